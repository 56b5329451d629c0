//! The headline pipeline: tightness verdicts for contact structures on
//! branched double covers of braid closures.
//!
//! The certificate has two independent halves. The rank-determinant check
//! on reduced GF(2) homology certifies that the spectral sequence from the
//! homology of the closure to the Floer homology of its double cover
//! collapses; nonvanishing of the transverse cycle class then forces the
//! contact invariant of the induced contact structure to be nonzero, which
//! certifies tightness. A vanishing class decides nothing — the contact
//! invariant can survive when the class dies — so that outcome is reported
//! separately and never read as overtwistedness.

use crate::braid::BraidWord;
use crate::classical;
use crate::diagram::closure_diagram;
use crate::engine;
use crate::error::{Error, Result};
use crate::khovanov::{Flavor, Reduction};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

/// Whether the transverse cycle class survives in reduced GF(2) homology:
/// the class of the all-minus labeling of the braid's oriented resolution.
/// Works for closures of any number of components (the class is transported
/// through the streaming reduction, where the surviving complex has zero
/// differential, so survival is directly visible).
pub fn psi_nonvanishing(w: &BraidWord) -> Result<bool> {
    let streamed = engine::reduced_complex(
        &closure_diagram(w),
        Flavor::KhovanovF2,
        Reduction::Reduced,
        true,
    )?;
    Ok(streamed.tracked.is_some_and(|t| !t.is_empty()))
}

/// The s invariant of a knot closure: the filtration level of the canonical
/// generator class in reduced Bar–Natan homology, which for a knot is a
/// single class in homological degree zero.
pub fn s_invariant(w: &BraidWord) -> Result<i64> {
    if !w.is_knot() {
        return Err(Error::NotAKnot(w.components()));
    }
    let streamed = engine::reduced_complex(
        &closure_diagram(w),
        Flavor::BarNatanF2,
        Reduction::Reduced,
        false,
    )?;
    let levels = engine::filtered_levels(&streamed.complex);
    match levels.as_slice() {
        [(0, s)] => Ok(*s as i64),
        other => Err(Error::Filtration(format!(
            "reduced deformation homology of a knot must be one class in degree zero, got {other:?}"
        ))),
    }
}

/// Final verdict of the certificate pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Collapse certified and the transverse class is nonzero: the double
    /// cover's contact structure is tight.
    TightCertified,
    /// The transverse class vanishes: no conclusion either way.
    PsiZero,
    /// Some ingredient is missing (rank ≠ det, resource cap, ...).
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::TightCertified => "TIGHT_CERTIFIED",
            Verdict::PsiZero => "PSI_ZERO",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Everything the pipeline measured for one braid word, with per-field
/// provenance notes and stage timings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub braid: String,
    pub strands: usize,
    pub sl: i64,
    pub s: Option<i64>,
    pub sigma: Option<i64>,
    pub det: i64,
    pub kh_rank: Option<usize>,
    pub thin: bool,
    pub collapse: bool,
    pub psi_nonzero: Option<bool>,
    pub verdict: Verdict,
    pub notes: BTreeMap<String, String>,
    pub timings_ms: BTreeMap<String, u64>,
}

/// Runs the full pipeline. Never fails: every stage error is downgraded to
/// a note and the verdict falls back to `Inconclusive` (or `PsiZero` when
/// the class demonstrably dies).
pub fn tightness_verdict(w: &BraidWord) -> VerdictReport {
    let mut notes: BTreeMap<String, String> = BTreeMap::new();
    let mut timings_ms: BTreeMap<String, u64> = BTreeMap::new();
    let d = closure_diagram(w);

    let t = Instant::now();
    let sl = w.self_linking();
    let det = classical::determinant(&d);
    let sigma = match classical::signature(&d) {
        Ok(v) => Some(v),
        Err(e) => {
            notes.insert("sigma".into(), e.to_string());
            None
        }
    };
    timings_ms.insert("classical".into(), t.elapsed().as_millis() as u64);

    let t = Instant::now();
    let (kh_rank, psi_nonzero, thin, collapse) =
        match engine::reduced_complex(&d, Flavor::KhovanovF2, Reduction::Reduced, true) {
            Ok(streamed) => {
                let table = engine::homology(&streamed.complex);
                let psi = streamed.tracked.as_ref().map(|t| !t.is_empty());
                let thin = sigma.is_some_and(|s| classical::is_thin(&table, s));
                let collapse = match classical::rank_det_check(&table, det, &w.to_string()) {
                    Ok(()) => {
                        notes.insert(
                            "collapse".into(),
                            format!(
                                "reduced homology rank {} equals the determinant",
                                table.total_rank
                            ),
                        );
                        true
                    }
                    Err(e) => {
                        notes.insert("collapse".into(), e.to_string());
                        false
                    }
                };
                (Some(table.total_rank), psi, thin, collapse)
            }
            Err(e) => {
                notes.insert("homology".into(), e.to_string());
                (None, None, false, false)
            }
        };
    timings_ms.insert("homology".into(), t.elapsed().as_millis() as u64);

    let t = Instant::now();
    let s = if w.is_knot() {
        match s_invariant(w) {
            Ok(v) => Some(v),
            Err(e) => {
                notes.insert("s".into(), e.to_string());
                None
            }
        }
    } else {
        notes.insert(
            "s".into(),
            "multi-component closure: s is defined for knots, so the transverse class is \
             tested by the direct solve alone (a negative-crossing resolution relates the \
             closure to a knot one crossing smaller)"
                .into(),
        );
        None
    };
    timings_ms.insert("s".into(), t.elapsed().as_millis() as u64);

    let verdict = match (psi_nonzero, collapse) {
        (Some(true), true) => {
            notes.insert(
                "verdict".into(),
                "nonzero transverse class and rank-determinant collapse: the contact \
                 structure on the branched double cover is tight"
                    .into(),
            );
            Verdict::TightCertified
        }
        (Some(false), _) => {
            notes.insert(
                "verdict".into(),
                "the transverse class vanishes; this does NOT decide tightness — the \
                 contact invariant can be nonzero even when the class dies"
                    .into(),
            );
            Verdict::PsiZero
        }
        (Some(true), false) => {
            notes.insert(
                "verdict".into(),
                "the transverse class survives but the collapse certificate failed, so \
                 nothing transfers to the contact invariant"
                    .into(),
            );
            Verdict::Inconclusive
        }
        (None, _) => {
            notes.insert(
                "verdict".into(),
                "the transverse class could not be computed".into(),
            );
            Verdict::Inconclusive
        }
    };

    VerdictReport {
        braid: w.to_string(),
        strands: w.strands(),
        sl,
        s,
        sigma,
        det,
        kh_rank,
        thin,
        collapse,
        psi_nonzero,
        verdict,
        notes,
        timings_ms,
    }
}
