//! End-to-end acceptance battery: the headline computations and performance
//! budgets this crate is built to reproduce, one criterion per test. Each
//! test prints a `criterion N: PASS` line (visible with `--nocapture`);
//! a failing criterion fails its test.
//!
//! Tolerances and time budgets are pinned in the constants below.

use khtight::families::{
    corpus, mirror_10_125, mirror_10_130, mirror_10_141, plumbing_10_125, plumbing_10_141,
    psi_vanishing,
};
use khtight::linalg::rat;
use khtight::{
    braid_to_surgery, build_complex, build_cube, cancel_reduce, closure_diagram, d3, determinant,
    enumerate_embeddings, homology, orthogonal_complement, pages, parity_obstruction,
    parse_bifiltered, psi_chain, psi_nonvanishing, s_invariant, scan_reduce, signature,
    tightness_verdict, BiFilteredComplex, BiGen, BraidWord, Filtration, Flavor, GramLattice,
    Obstruction, Reduction, Stabilize, Verdict,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use std::time::{Duration, Instant};

const DET_BUDGET: Duration = Duration::from_secs(1);
const S_BUDGET: Duration = Duration::from_secs(60);
const LATTICE_BUDGET: Duration = Duration::from_secs(10);
const VERDICT_12_BUDGET: Duration = Duration::from_secs(10);
const VERDICT_16_BUDGET: Duration = Duration::from_secs(120);

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

#[test]
fn criterion_01_determinant_families() {
    for r in 0..=8usize {
        let (det, took) = timed(|| determinant(&closure_diagram(&mirror_10_125(r))));
        assert_eq!(det, r as i64 + 6, "three-strand pretzel family at r = {r}");
        assert!(took < DET_BUDGET, "det at r = {r} took {took:?}");
    }
    for r in 0..=6usize {
        let (det, took) = timed(|| determinant(&closure_diagram(&mirror_10_141(r))));
        assert_eq!(det, 9 + 3 * r as i64, "double-twist family at r = {r}");
        assert!(took < DET_BUDGET, "det at r = {r} took {took:?}");
    }
    for r in 0..=5usize {
        let (det, took) = timed(|| determinant(&closure_diagram(&mirror_10_130(r))));
        assert_eq!(det, 14 + r as i64, "four-strand family at r = {r}");
        assert!(took < DET_BUDGET, "det at r = {r} took {took:?}");
    }
    println!("criterion 1: PASS — family determinants r+6, 9+3r, 14+r, each under 1 s");
}

#[test]
fn criterion_02_self_linking() {
    for r in 0..=8usize {
        assert_eq!(mirror_10_125(r).self_linking(), 2 - r as i64);
    }
    for r in 0..=6usize {
        assert_eq!(mirror_10_141(r).self_linking(), 3 - r as i64);
    }
    for r in 0..=5usize {
        assert_eq!(mirror_10_130(r).self_linking(), 2 - r as i64);
    }
    println!("criterion 2: PASS — self-linking 2-r, 3-r, 2-r across all three families");
}

#[test]
fn criterion_03_signature_and_s() {
    let trefoil: BraidWord = "1,1,1".parse().unwrap();
    assert_eq!(signature(&closure_diagram(&trefoil)).unwrap(), 2);
    let (s, took) = timed(|| s_invariant(&trefoil).unwrap());
    assert_eq!(s, 2);
    assert!(took < S_BUDGET);

    for r in [5usize, 7] {
        let w = mirror_10_125(r);
        assert_eq!(signature(&closure_diagram(&w)).unwrap(), 3 - r as i64);
        let (s, took) = timed(|| s_invariant(&w).unwrap());
        assert_eq!(s, 3 - r as i64, "s at r = {r}");
        assert!(took < S_BUDGET, "s at r = {r} took {took:?}");
    }
    for r in [4usize, 6] {
        let w = mirror_10_141(r);
        assert_eq!(signature(&closure_diagram(&w)).unwrap(), 4 - r as i64);
        let (s, took) = timed(|| s_invariant(&w).unwrap());
        assert_eq!(s, 4 - r as i64, "s at r = {r}");
        assert!(took < S_BUDGET, "s at r = {r} took {took:?}");
    }
    println!("criterion 3: PASS — signature +2 for the right trefoil; sigma = s = 3-r and 4-r on the odd/even family rows, each s under 60 s");
}

#[test]
fn criterion_04_thin_collapse() {
    let w = mirror_10_125(5);
    let d = closure_diagram(&w);
    let streamed =
        khtight::reduced_complex(&d, Flavor::KhovanovF2, Reduction::Reduced, false).unwrap();
    let table = homology(&streamed.complex);
    assert_eq!(table.total_rank, 11);
    assert_eq!(determinant(&d), 11);
    for &(i, q) in table.dims.keys() {
        assert_eq!(
            q as i64 - 2 * i as i64,
            -2,
            "homology off the expected diagonal at (i, q) = ({i}, {q})"
        );
    }
    println!("criterion 4: PASS — K_5 reduced homology thin on q-2i = -2 with rank 11 = det");
}

#[test]
fn criterion_05_psi_and_verdicts() {
    for (w, label) in [
        (mirror_10_125(5), "three-strand pretzel K_5"),
        (mirror_10_141(4), "double-twist K_4"),
        (mirror_10_130(3), "four-strand K_3"),
    ] {
        assert!(psi_nonvanishing(&w).unwrap(), "{label}");
        let report = tightness_verdict(&w);
        assert_eq!(report.verdict, Verdict::TightCertified, "{label}");
    }
    for r in [3usize, 4, 5] {
        let w = psi_vanishing(r);
        assert!(!psi_nonvanishing(&w).unwrap(), "cautionary word r = {r}");
        let report = tightness_verdict(&w);
        assert_eq!(report.verdict, Verdict::PsiZero, "cautionary word r = {r}");
    }
    println!("criterion 5: PASS — transverse class survives on the three certified words (TIGHT_CERTIFIED) and dies on the cautionary family (PSI_ZERO)");
}

#[test]
fn criterion_06_grading_law() {
    let words = corpus();
    assert!(words.len() >= 15, "corpus must carry at least 15 words");
    for w in &words {
        let cube = build_cube(&closure_diagram(w)).unwrap();
        let c = build_complex(&cube, Flavor::KhovanovF2, Reduction::Reduced).unwrap();
        let chain = psi_chain(&c).unwrap();
        assert!(!chain.is_empty());
        for &g in &chain {
            assert_eq!(
                c.gens[g as usize].q as i64,
                w.self_linking() + 1,
                "grading law fails on {w}"
            );
        }
    }
    println!(
        "criterion 6: PASS — q(psi) = sl + 1 on all {} corpus words",
        words.len()
    );
}

#[test]
fn criterion_07_d3_invariants() {
    let res = d3(&braid_to_surgery(&mirror_10_125(5), Stabilize::Auto)).unwrap();
    assert_eq!(res.d3, rat(-1) / rat(2));
    assert_eq!(res.c1_sq, rat(0));
    let res = d3(&braid_to_surgery(&mirror_10_141(4), Stabilize::Auto)).unwrap();
    assert_eq!(res.d3, rat(0));
    let res = d3(&braid_to_surgery(&mirror_10_141(6), Stabilize::Auto)).unwrap();
    assert_eq!(res.d3, rat(-1) / rat(2));

    // Calibration contract: the lifted presentation's first homology matches
    // the closure determinant on every member of all three families.
    let mut checked = 0;
    for w in (0..=8)
        .map(mirror_10_125)
        .chain((0..=6).map(mirror_10_141))
        .chain((0..=5).map(mirror_10_130))
    {
        let res = d3(&braid_to_surgery(&w, Stabilize::Auto)).unwrap();
        assert_eq!(
            res.h1_order,
            determinant(&closure_diagram(&w)),
            "first-homology order vs determinant on {w}"
        );
        checked += 1;
    }
    assert_eq!(checked, 9 + 7 + 6);
    println!("criterion 7: PASS — d3 = -1/2, 0, -1/2 with c1^2 = 0, exact rationals; |H_1| = det on all 22 family members");
}

#[test]
fn criterion_08_lattice_obstructions() {
    let ((), took) = timed(|| {
        let seven = GramLattice::new(plumbing_10_125()).unwrap();
        let classes = enumerate_embeddings(&seven, 8);
        assert_eq!(classes.len(), 1, "seven-vertex star must embed uniquely");
        let comp = orthogonal_complement(&classes[0]);
        assert_eq!(comp.diagonal(), Some(vec![-11]));
        assert_eq!(
            parity_obstruction(&comp, 11).unwrap(),
            Obstruction::Obstructed
        );

        let eight = GramLattice::new(plumbing_10_141()).unwrap();
        let classes = enumerate_embeddings(&eight, 10);
        assert_eq!(classes.len(), 1, "eight-vertex star must embed uniquely");
        let comp = orthogonal_complement(&classes[0]);
        assert_eq!(comp.diagonal(), Some(vec![-9, -3]));
        assert_eq!(
            parity_obstruction(&comp, 27).unwrap(),
            Obstruction::Obstructed
        );
    });
    assert!(took < LATTICE_BUDGET, "lattice searches took {took:?}");
    println!("criterion 8: PASS — unique embeddings with complements <-11> and <-9>+<-3>, both parity-obstructed, under 10 s");
}

#[test]
fn criterion_09_toy_spectral_sequence() {
    let complex = parse_bifiltered(include_str!("data/toy.bfc")).unwrap();
    let report = pages(&complex, Filtration::I, 3);

    let e1 = &report.pages[1];
    assert_eq!(e1.total_dim(), 3, "first page rank");
    // The page-one differential is rank one, sourced at the level-0 class
    // ([x]) and landing on the level-1 class ([y]).
    assert_eq!(e1.d_rank, 1);
    assert_eq!(e1.d_ranks.get(&0), Some(&1));

    let e2 = &report.pages[2];
    assert_eq!(e2.total_dim(), 1, "second page rank");
    assert_eq!(
        e2.induced_levels,
        vec![(-1, 1)],
        "surviving class sits at descending level -1"
    );

    assert_eq!(report.total_rank, 1);
    assert_eq!(
        report.total_levels,
        vec![(-2, 1)],
        "the homology class itself sits at descending level -2"
    );
    println!("criterion 9: PASS — toy pages: E^1 rank 3, d_1[x] = [y], E^2 one class at level -1, total homology at level -2");
}

// ---- criterion 10: property suites ------------------------------------------

/// Composes the differential with itself and demands zero, entry by entry.
fn assert_d_squared_zero(cols: &[Vec<u32>], label: &str) {
    for (g, targets) in cols.iter().enumerate() {
        let mut acc: std::collections::BTreeSet<u32> = Default::default();
        for &t in targets {
            for &tt in &cols[t as usize] {
                if !acc.insert(tt) {
                    acc.remove(&tt);
                }
            }
        }
        assert!(acc.is_empty(), "d^2 != 0 from generator {g} in {label}");
    }
}

/// A random bi-filtered complex over GF(2): a partial matching oriented along
/// the gradings (which trivially squares to zero) scrambled by random
/// filtration-respecting transvections. Independent of the library's own
/// test generator by construction.
fn random_bifiltered(rng: &mut StdRng) -> BiFilteredComplex {
    let n = rng.gen_range(1..=24usize);
    let gens: Vec<BiGen> = (0..n)
        .map(|k| BiGen {
            name: format!("g{k}"),
            a: rng.gen_range(-3..=3),
            i: rng.gen_range(0..=4),
        })
        .collect();
    let admissible = |from: usize, to: usize| -> bool {
        gens[to].i >= gens[from].i && gens[to].a <= gens[from].a
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for pair in order.chunks_exact(2) {
        if rng.gen_bool(0.3) {
            continue;
        }
        let (mut g, mut h) = (pair[0], pair[1]);
        if !admissible(g, h) {
            std::mem::swap(&mut g, &mut h);
        }
        if admissible(g, h) {
            cols[g] = vec![h];
        }
    }

    for _ in 0..rng.gen_range(0..=2 * n) {
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        // The basis change x -> x + y respects both filtrations when y sits
        // at least as deep as x in each.
        if x == y || !admissible(x, y) {
            continue;
        }
        let old = cols.clone();
        for z in 0..n {
            let mut set: std::collections::BTreeSet<usize> = old[z].iter().copied().collect();
            if z == x {
                for &t in &old[y] {
                    if !set.insert(t) {
                        set.remove(&t);
                    }
                }
            }
            if set.contains(&x) && !set.insert(y) {
                set.remove(&y);
            }
            cols[z] = set.into_iter().collect();
        }
    }

    BiFilteredComplex::new(gens, cols).expect("generator output must validate")
}

#[test]
fn criterion_10_property_suites() {
    // (a) d composed with d vanishes on every corpus complex, all flavors.
    for w in corpus() {
        let cube = build_cube(&closure_diagram(&w)).unwrap();
        for flavor in [Flavor::KhovanovF2, Flavor::BarNatanF2] {
            for reduction in [Reduction::Reduced, Reduction::Unreduced] {
                let c = build_complex(&cube, flavor, reduction).unwrap();
                assert_d_squared_zero(&c.cols, &format!("{w} {flavor:?} {reduction:?}"));
            }
        }
    }

    // (b) the scanning reduction is a homology-preserving oracle match on
    // every corpus complex (all fit in the full-cube regime).
    for w in corpus() {
        let cube = build_cube(&closure_diagram(&w)).unwrap();
        for flavor in [Flavor::KhovanovF2, Flavor::BarNatanF2] {
            let c = build_complex(&cube, flavor, Reduction::Reduced).unwrap();
            let reduced = scan_reduce(&c);
            assert!(reduced.len() <= c.len());
            assert_eq!(
                homology(&reduced),
                homology(&c),
                "scan reduction changed homology on {w} ({flavor:?})"
            );
        }
    }

    // (c) Gaussian cancellation preserves every spectral-sequence page from
    // E^1 on, for 200 random bi-filtered complexes (seed pinned).
    let mut rng = StdRng::seed_from_u64(0xACC3);
    for trial in 0..200 {
        let c = random_bifiltered(&mut rng);
        let reduced = cancel_reduce(&c);
        for which in [Filtration::I, Filtration::A] {
            let before = pages(&c, which, 5);
            let after = pages(&reduced, which, 5);
            assert_eq!(before.total_rank, after.total_rank, "trial {trial}");
            for r in 1..=5 {
                assert_eq!(
                    before.pages[r].dims, after.pages[r].dims,
                    "trial {trial}, page {r}, {which:?}"
                );
                assert_eq!(
                    before.pages[r].d_ranks, after.pages[r].d_ranks,
                    "trial {trial}, page {r}, {which:?}"
                );
            }
        }
    }

    // (d) the self-linking bound sl <= s - 1 on every corpus knot.
    let mut knots = 0;
    for w in corpus() {
        if w.is_knot() {
            assert!(
                w.self_linking() < s_invariant(&w).unwrap(),
                "self-linking bound fails on {w}"
            );
            knots += 1;
        }
    }
    assert!(
        knots >= 10,
        "corpus must carry enough knots to be meaningful"
    );

    // (e) the determinant is independent of the checkerboard coloring:
    // mirroring swaps the two colorings and must fix the determinant, and
    // the signature path cross-checks both colorings internally under
    // debug assertions on every corpus word.
    for w in corpus() {
        let d = closure_diagram(&w);
        let dm = closure_diagram(&w.mirror());
        assert_eq!(
            determinant(&d),
            determinant(&dm),
            "determinant vs mirror on {w}"
        );
        let _ = signature(&d);
    }

    println!("criterion 10: PASS — d^2 = 0, scan-reduction oracle, 200-trial page preservation, self-linking bound, coloring independence");
}

#[test]
fn criterion_11_performance() {
    let twelve = mirror_10_125(7);
    assert_eq!(twelve.len(), 12);
    let (report, took) = timed(|| tightness_verdict(&twelve));
    assert_eq!(report.verdict, Verdict::TightCertified);
    assert!(
        took < VERDICT_12_BUDGET,
        "12-crossing verdict took {took:?}"
    );

    let sixteen = mirror_10_125(11);
    assert_eq!(sixteen.len(), 16);
    let (report, took) = timed(|| tightness_verdict(&sixteen));
    assert_eq!(report.verdict, Verdict::TightCertified);
    assert_eq!(report.det, 17);
    assert!(
        took < VERDICT_16_BUDGET,
        "16-crossing verdict took {took:?}"
    );

    println!(
        "criterion 11: PASS — full verdict pipeline at 12 crossings under 10 s and 16 crossings under 120 s"
    );
}
