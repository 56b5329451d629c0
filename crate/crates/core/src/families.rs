//! The braid families this crate certifies, plus the shared test corpus and
//! the plumbing forms used by the lattice-embedding obstruction.
//!
//! Each family fixes a positive tail and grows a block of negative letters
//! at position 1; `r` counts that block. All four are 3- or 4-strand words.

use crate::braid::BraidWord;

fn family(r: usize, tail: &[i32], strands: usize) -> BraidWord {
    let mut letters = vec![-1; r];
    letters.extend_from_slice(tail);
    BraidWord::new(letters, strands).expect("family words are well-formed")
}

/// Closures are the pretzel links P(-r, 3, -2); at r = 5 this is the mirror
/// of the knot 10_125. Determinant r + 6.
pub fn mirror_10_125(r: usize) -> BraidWord {
    family(r, &[2, 1, 1, 1, 2], 3)
}

/// At r = 4 the closure is the mirror of 10_141; the r = 0 member is the
/// connected sum of two trefoils. Determinant 9 + 3r.
pub fn mirror_10_141(r: usize) -> BraidWord {
    family(r, &[2, 1, 1, 1, 2, 2], 3)
}

/// At r = 3 the closure is the mirror of 10_130; the r = 0 member is an
/// alternating link with a 5_2 knot and an unknot as components.
/// Determinant 14 + r.
pub fn mirror_10_130(r: usize) -> BraidWord {
    family(r, &[2, 1, 1, 2, 2, 3, -2, 3], 4)
}

/// Transverse family whose distinguished cycle dies for r > 2 even though
/// the underlying contact structures stay tight — the cautionary family.
pub fn psi_vanishing(r: usize) -> BraidWord {
    family(r, &[2, 1, 1, 2], 3)
}

/// Shared test corpus: small torus words, twist knots, stabilized forms, and
/// representatives of all four families.
pub fn corpus() -> Vec<BraidWord> {
    let words: &[(&str, usize)] = &[
        ("", 1),
        ("1", 2),
        ("-1", 2),
        ("1,1", 2),
        ("1,1,1", 2),
        ("-1,-1,-1", 2),
        ("1,1,1,1,1", 2),
        ("1,1,1,2", 3),
        ("1,-2,1,-2", 3),
        ("-1,2,-1,2", 3),
        ("1,2,1,2", 3),
        ("1,2", 3),
    ];
    let mut out: Vec<BraidWord> = words
        .iter()
        .map(|(w, s)| {
            let letters: Vec<i32> = w
                .split(',')
                .filter(|p| !p.is_empty())
                .map(|p| p.parse().unwrap())
                .collect();
            BraidWord::new(letters, *s).unwrap()
        })
        .collect();
    out.push(mirror_10_125(1));
    out.push(mirror_10_125(2));
    out.push(mirror_10_125(5));
    out.push(mirror_10_141(2));
    out.push(mirror_10_141(4));
    out.push(mirror_10_130(1));
    out.push(mirror_10_130(3));
    out.push(psi_vanishing(3));
    out
}

/// Intersection form of the star-shaped plumbing bounding the orientation
/// reverse of the double cover in the pretzel family: weights
/// (-3, -2, -2, -2, -2, -2, -2), center v3, legs {v1}, {v2}, {v4-v5-v6-v7}.
pub fn plumbing_10_125() -> Vec<Vec<i64>> {
    star_plumbing(
        &[-3, -2, -2, -2, -2, -2, -2],
        &[(1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)],
    )
}

/// Intersection form of the plumbing for the double-twist family's r = 6
/// cover: weights (-3, -3, -2, ..., -2), center v3, legs {v1}, {v2},
/// {v4-...-v8}.
pub fn plumbing_10_141() -> Vec<Vec<i64>> {
    star_plumbing(
        &[-3, -3, -2, -2, -2, -2, -2, -2],
        &[(1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8)],
    )
}

fn star_plumbing(weights: &[i64], edges: &[(usize, usize)]) -> Vec<Vec<i64>> {
    let n = weights.len();
    let mut g = vec![vec![0; n]; n];
    for (i, &w) in weights.iter().enumerate() {
        g[i][i] = w;
    }
    for &(a, b) in edges {
        g[a - 1][b - 1] = 1;
        g[b - 1][a - 1] = 1;
    }
    g
}
