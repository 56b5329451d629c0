//! Classical invariants from checkerboard (Goeritz) forms — determinant and
//! signature — plus the thin-homology checks built on them.
//!
//! The signature convention here is the one under which the homology of a
//! thin knot sits on the diagonal `q - 2i = signature`: the right-handed
//! trefoil has signature +2.

use crate::diagram::LinkDiagram;
use crate::engine::HomologyTable;
use crate::error::{Error, Result};
use crate::linalg;
use num_traits::ToPrimitive;

struct GoeritzForm {
    /// Symmetric white-region form with one region deleted.
    reduced: Vec<Vec<i64>>,
    /// Signature correction accumulated over crossings whose white corners
    /// sit east-west.
    correction: i64,
}

/// Goeritz form of the checkerboard coloring whose white regions sit at gaps
/// of the given parity.
fn goeritz(d: &LinkDiagram, white_odd: bool) -> GoeritzForm {
    let faces = d.faces();
    let mut white_index = vec![u32::MAX; faces.n_faces];
    let mut m = 0u32;
    for f in 0..faces.n_faces {
        if faces.odd_gap[f] == white_odd {
            white_index[f] = m;
            m += 1;
        }
    }
    let m = m as usize;
    let mut g = vec![vec![0i64; m]; m];
    let mut mu = 0i64;
    for (idx, l) in d.letters().iter().enumerate() {
        if l.forced.is_some() {
            continue;
        }
        let cf = d.crossing_faces(&faces, idx);
        let eps = l.sign as i64;
        let (fu, fv, eta) = if white_index[cf.n as usize] != u32::MAX {
            debug_assert_ne!(white_index[cf.s as usize], u32::MAX);
            (cf.n, cf.s, eps)
        } else {
            debug_assert_ne!(white_index[cf.w as usize], u32::MAX);
            debug_assert_ne!(white_index[cf.e as usize], u32::MAX);
            let eta = -eps;
            mu += eta;
            (cf.w, cf.e, eta)
        };
        let u = white_index[fu as usize] as usize;
        let v = white_index[fv as usize] as usize;
        // A crossing whose white corners already lie in one region
        // contributes nothing to the form (the diagonal is defined so that
        // every row sums to zero).
        if u != v {
            g[u][v] -= eta;
            g[v][u] -= eta;
        }
    }
    for u in 0..m {
        g[u][u] = -(0..m).filter(|&v| v != u).map(|v| g[u][v]).sum::<i64>();
    }
    let reduced: Vec<Vec<i64>> = g[..m - 1].iter().map(|row| row[..m - 1].to_vec()).collect();
    GoeritzForm {
        reduced,
        correction: mu,
    }
}

/// Link determinant (the order of the first homology of the branched double
/// cover when finite). Split diagrams return 0.
pub fn determinant(d: &LinkDiagram) -> i64 {
    if !d.connected() {
        return 0;
    }
    let det = |white_odd: bool| {
        linalg::det_i64(&goeritz(d, white_odd).reduced)
            .to_i64()
            .expect("checkerboard determinant fits in 64 bits")
            .abs()
    };
    let a = det(false);
    debug_assert_eq!(a, det(true), "colorings must agree on the determinant");
    a
}

/// Link signature, in the convention where the right-handed trefoil has
/// signature +2 (thin homology sits on `q - 2i = signature`). Split diagrams
/// have no checkerboard form and return an error.
pub fn signature(d: &LinkDiagram) -> Result<i64> {
    if !d.connected() {
        return Err(Error::Disconnected);
    }
    let sig = |white_odd: bool| {
        let form = goeritz(d, white_odd);
        linalg::signature_i64(&form.reduced) - form.correction
    };
    let a = sig(false);
    debug_assert_eq!(a, sig(true), "colorings must agree on the signature");
    Ok(a)
}

/// True when the homology is supported on the single diagonal
/// `q - 2i = sigma`.
pub fn is_thin(h: &HomologyTable, sigma: i64) -> bool {
    h.dims
        .keys()
        .all(|&(i, q)| q as i64 - 2 * i as i64 == sigma)
}

/// Certifies the rank-determinant identity of a thin table: total rank equal
/// to the determinant. A zero determinant can never match and gets its own
/// error so callers can report the obstruction precisely.
pub fn rank_det_check(h: &HomologyTable, det: i64, context: &str) -> Result<()> {
    if det == 0 {
        return Err(Error::ZeroDeterminant(context.to_string()));
    }
    if h.total_rank as i64 != det {
        return Err(Error::QaFailure(format!(
            "{context}: homology rank {} != determinant {det}",
            h.total_rank
        )));
    }
    Ok(())
}
