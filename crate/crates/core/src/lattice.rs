//! Embeddings of negative-definite integral lattices into the standard
//! diagonal lattice, orthogonal complements, and the parity obstruction to
//! Stein fillings with nonzero second Betti number.
//!
//! The ambient lattice is Z^n with the form x·y = −Σ x_k y_k; its
//! automorphisms are signed permutations of the basis e_1, ..., e_n.
//! `enumerate_embeddings` lists every way to realize a given Gram matrix by
//! vectors in that lattice, up to those automorphisms, by backtracking over
//! vertices: fresh coordinates are only ever introduced in increasing order
//! with positive first use (every embedding can be gauged that way), and the
//! survivors are deduplicated by a canonical form.

use crate::error::{Error, Result};
use crate::linalg;
use serde::{Deserialize, Serialize};

/// A finite-rank lattice presented by a symmetric negative-definite Gram
/// matrix, with display labels for its basis vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramLattice {
    pub gram: Vec<Vec<i64>>,
    pub labels: Vec<String>,
}

impl GramLattice {
    /// Validates symmetry and negative definiteness (leading principal
    /// minors alternate: (−1)^k det_k > 0) and labels the basis v1, v2, ...
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let k = gram.len();
        if gram.iter().any(|row| row.len() != k) {
            return Err(Error::Parse("Gram matrix must be square".into()));
        }
        for i in 0..k {
            for j in 0..k {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Parse(format!(
                        "Gram matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        for lead in 1..=k {
            let minor: Vec<Vec<i64>> = gram[..lead]
                .iter()
                .map(|row| row[..lead].to_vec())
                .collect();
            let det = linalg::det_i64(&minor);
            let sign = if lead % 2 == 0 { 1 } else { -1 };
            if (det.clone() * sign) <= 0.into() {
                return Err(Error::Parse(format!(
                    "Gram matrix is not negative definite (order-{lead} minor {det})"
                )));
            }
        }
        let labels = (1..=k).map(|i| format!("v{i}")).collect();
        Ok(GramLattice { gram, labels })
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    /// The diagonal entries when the matrix is diagonal, `None` otherwise.
    pub fn diagonal(&self) -> Option<Vec<i64>> {
        let k = self.rank();
        for i in 0..k {
            for j in 0..k {
                if i != j && self.gram[i][j] != 0 {
                    return None;
                }
            }
        }
        Some((0..k).map(|i| self.gram[i][i]).collect())
    }
}

/// Images of the lattice basis in Z^n with the form x·y = −Σ x_k y_k.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Embedding {
    pub vectors: Vec<Vec<i64>>,
    pub n: usize,
}

/// The ambient pairing: negative dot product.
fn pair(a: &[i64], b: &[i64]) -> i64 {
    -a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>()
}

impl Embedding {
    /// The Gram matrix the images actually realize.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        self.vectors
            .iter()
            .map(|a| self.vectors.iter().map(|b| pair(a, b)).collect())
            .collect()
    }

    /// Canonical representative under signed coordinate permutations: each
    /// coordinate's sign is flipped so its first nonzero entry (in vertex
    /// order) is negative, then coordinates are sorted by their absolute
    /// pattern and entries, used coordinates first.
    pub fn canonical(&self) -> Embedding {
        let rank = self.vectors.len();
        let mut columns: Vec<Vec<i64>> = (0..self.n)
            .map(|c| (0..rank).map(|r| self.vectors[r][c]).collect())
            .collect();
        for col in &mut columns {
            if let Some(first) = col.iter().find(|&&v| v != 0) {
                if *first > 0 {
                    for v in col.iter_mut() {
                        *v = -*v;
                    }
                }
            }
        }
        columns.sort_by_key(|col| {
            let abs: Vec<i64> = col.iter().map(|v| v.abs()).collect();
            (col.iter().all(|&v| v == 0), abs, col.clone())
        });
        let vectors = (0..rank)
            .map(|r| columns.iter().map(|col| col[r]).collect())
            .collect();
        Embedding { vectors, n: self.n }
    }
}

/// All ways to write `norm` as an ordered non-increasing sum of positive
/// squares: the entry patterns a fresh block of coordinates can carry.
fn square_partitions(norm: i64) -> Vec<Vec<i64>> {
    fn go(rest: i64, max: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        let mut a = max.min((rest as f64).sqrt() as i64 + 1);
        while a * a > rest {
            a -= 1;
        }
        while a >= 1 {
            prefix.push(a);
            go(rest - a * a, a, prefix, out);
            prefix.pop();
            a -= 1;
        }
    }
    let mut out = Vec::new();
    go(norm, norm, &mut Vec::new(), &mut out);
    out
}

/// Entry patterns on the already-used coordinates with squared length at
/// most `budget`: every integer vector of length `used`, paired with its
/// leftover norm.
fn used_parts(used: usize, budget: i64) -> Vec<(Vec<i64>, i64)> {
    let mut out = Vec::new();
    fn go(
        idx: usize,
        used: usize,
        rest: i64,
        prefix: &mut Vec<i64>,
        out: &mut Vec<(Vec<i64>, i64)>,
    ) {
        if idx == used {
            out.push((prefix.clone(), rest));
            return;
        }
        let mut a = 0i64;
        while a * a <= rest {
            for signed in if a == 0 { vec![0] } else { vec![a, -a] } {
                prefix.push(signed);
                go(idx + 1, used, rest - a * a, prefix, out);
                prefix.pop();
            }
            a += 1;
        }
    }
    go(0, used, budget, &mut Vec::new(), &mut out);
    out
}

struct Search<'a> {
    gram: &'a [Vec<i64>],
    n: usize,
    found: Vec<Vec<Vec<i64>>>,
}

impl Search<'_> {
    fn run(&mut self, assigned: &mut Vec<Vec<i64>>, used: usize) {
        let i = assigned.len();
        if i == self.gram.len() {
            self.found.push(assigned.clone());
            return;
        }
        let norm = -self.gram[i][i];
        for (old, leftover) in used_parts(used, norm) {
            let fresh_patterns = square_partitions(leftover);
            'pattern: for pattern in fresh_patterns {
                if used + pattern.len() > self.n {
                    continue;
                }
                let mut v = vec![0i64; self.n];
                v[..used].copy_from_slice(&old);
                for (k, &a) in pattern.iter().enumerate() {
                    v[used + k] = a;
                }
                for (j, w) in assigned.iter().enumerate() {
                    if pair(&v, w) != self.gram[i][j] {
                        continue 'pattern;
                    }
                }
                let next_used = used + pattern.len();
                assigned.push(v);
                self.run(assigned, next_used);
                assigned.pop();
            }
        }
    }
}

fn dedup_canonical(found: Vec<Vec<Vec<i64>>>, n: usize) -> Vec<Embedding> {
    let mut canon: Vec<Embedding> = found
        .into_iter()
        .map(|vectors| Embedding { vectors, n }.canonical())
        .collect();
    canon.sort();
    canon.dedup();
    canon
}

/// Enumerates the embeddings of `g` into the rank-`n` standard diagonal
/// lattice, one canonical representative per signed-permutation class. An
/// empty result means no embedding exists.
pub fn enumerate_embeddings(g: &GramLattice, n: usize) -> Vec<Embedding> {
    let mut search = Search {
        gram: &g.gram,
        n,
        found: Vec::new(),
    };
    search.run(&mut Vec::new(), 0);
    let out = dedup_canonical(search.found, n);
    debug_assert!(out.iter().all(|e| e.gram() == g.gram));
    out
}

/// Completes a partial assignment of the first `prefix.len()` basis vectors
/// to full embeddings (canonical representatives; empty when the prefix is
/// inconsistent or admits no extension). Coordinates beyond any the prefix
/// touches are gauge-fixed exactly as in `enumerate_embeddings`.
pub fn complete_embedding(g: &GramLattice, n: usize, prefix: &[Vec<i64>]) -> Vec<Embedding> {
    if prefix.len() > g.rank() || prefix.iter().any(|v| v.len() > n) {
        return Vec::new();
    }
    let mut assigned: Vec<Vec<i64>> = prefix
        .iter()
        .map(|v| {
            let mut full = v.clone();
            full.resize(n, 0);
            full
        })
        .collect();
    for (i, v) in assigned.iter().enumerate() {
        for (j, w) in assigned.iter().enumerate().take(i + 1) {
            if pair(v, w) != g.gram[i][j] {
                return Vec::new();
            }
        }
    }
    let used = assigned
        .iter()
        .flat_map(|v| v.iter().rposition(|&x| x != 0))
        .map(|p| p + 1)
        .max()
        .unwrap_or(0);
    let mut search = Search {
        gram: &g.gram,
        n,
        found: Vec::new(),
    };
    search.run(&mut assigned, used);
    dedup_canonical(search.found, n)
}

/// The orthogonal complement of the embedded lattice in Z^n, presented in
/// integral diagonal form whenever the greedy congruence succeeds (entries
/// ascending), otherwise by the raw Gram matrix of a kernel basis.
pub fn orthogonal_complement(e: &Embedding) -> GramLattice {
    let basis = linalg::int_kernel(&e.vectors, e.n);
    let gram: Vec<Vec<i64>> = basis
        .iter()
        .map(|a| basis.iter().map(|b| pair(a, b)).collect())
        .collect();
    let gram = match linalg::gram_diagonalize(&gram) {
        Some(mut diag) => {
            diag.sort_unstable();
            let k = diag.len();
            let mut m = vec![vec![0i64; k]; k];
            for (i, d) in diag.into_iter().enumerate() {
                m[i][i] = d;
            }
            m
        }
        None => gram,
    };
    let labels = (1..=gram.len()).map(|i| format!("u{i}")).collect();
    GramLattice { gram, labels }
}

/// Outcome of the parity test for Stein fillings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Obstruction {
    /// Some k²·d_i is odd: a filling with vanishing first Chern class has no
    /// room for second homology, so the homotopy invariant would have to be
    /// zero — fillings with nonzero invariant are excluded.
    Obstructed,
    NotObstructed,
}

/// The parity obstruction: the filling's homology embeds with index dividing
/// `h1_order` = k into the complement lattice, so the classes k·u_i have
/// squares k²·d_i; a characteristic-vector count forces the first Chern
/// class to be odd on any class of odd square. With c₁ = 0 that is a
/// contradiction unless every k²·d_i is even.
pub fn parity_obstruction(complement: &GramLattice, h1_order: i64) -> Result<Obstruction> {
    let Some(diag) = complement.diagonal() else {
        return Err(Error::Parse(
            "parity obstruction requires a diagonal complement form".into(),
        ));
    };
    let k_odd = h1_order % 2 != 0;
    let any_odd = diag.iter().any(|&d| d % 2 != 0);
    Ok(if k_odd && any_odd {
        Obstruction::Obstructed
    } else {
        Obstruction::NotObstructed
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn star_125() -> GramLattice {
        GramLattice::new(families::plumbing_10_125()).unwrap()
    }

    fn star_141() -> GramLattice {
        GramLattice::new(families::plumbing_10_141()).unwrap()
    }

    /// e-vector shorthand: signed 1-based coordinates into length n.
    fn ev(n: usize, coords: &[i64]) -> Vec<i64> {
        let mut v = vec![0i64; n];
        for &c in coords {
            v[(c.unsigned_abs() as usize) - 1] += c.signum();
        }
        v
    }

    #[test]
    fn seven_vertex_star_embeds_uniquely() {
        let g = star_125();
        let found = enumerate_embeddings(&g, 8);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].gram(), g.gram);

        // The published display of the embedding, as v1..v7.
        let display = Embedding {
            vectors: vec![
                ev(8, &[-1, -3, 5]),
                ev(8, &[-1, 3]),
                ev(8, &[1, 2]),
                ev(8, &[-2, 4]),
                ev(8, &[-4, 6]),
                ev(8, &[-6, 7]),
                ev(8, &[-7, 8]),
            ],
            n: 8,
        };
        assert_eq!(display.gram(), g.gram);
        assert_eq!(display.canonical(), found[0]);
    }

    #[test]
    fn eight_vertex_star_embeds_uniquely() {
        let g = star_141();
        let found = enumerate_embeddings(&g, 10);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].gram(), g.gram);

        let display = Embedding {
            vectors: vec![
                ev(10, &[-1, -3, 5]),
                ev(10, &[-1, 3, 4]),
                ev(10, &[1, 2]),
                ev(10, &[-2, 6]),
                ev(10, &[-6, 7]),
                ev(10, &[-7, 8]),
                ev(10, &[-8, 9]),
                ev(10, &[-9, 10]),
            ],
            n: 10,
        };
        assert_eq!(display.gram(), g.gram);
        assert_eq!(display.canonical(), found[0]);
    }

    #[test]
    fn alternative_partial_assignment_is_pruned() {
        // A second consistent start for the first four vertices exists, but
        // admits no fifth vector at any ambient rank.
        let g = star_125();
        for n in 8..=10 {
            let prefix = vec![
                ev(n, &[-2, 4, 5]),
                ev(n, &[-1, 3]),
                ev(n, &[1, 2]),
                ev(n, &[-1, -3]),
            ];
            // The prefix itself is consistent with the Gram matrix...
            let partial = Embedding {
                vectors: prefix.clone(),
                n,
            };
            let want: Vec<Vec<i64>> = g.gram[..4].iter().map(|r| r[..4].to_vec()).collect();
            assert_eq!(partial.gram(), want);
            // ...but no completion exists.
            assert!(complete_embedding(&g, n, &prefix).is_empty());
        }
    }

    #[test]
    fn published_prefix_completes() {
        let g = star_125();
        let prefix = vec![ev(8, &[-1, -3, 5]), ev(8, &[-1, 3]), ev(8, &[1, 2])];
        let found = complete_embedding(&g, 8, &prefix);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0], enumerate_embeddings(&g, 8)[0]);
    }

    #[test]
    fn complements_are_stable_under_ambient_padding() {
        for n in 8..=12 {
            let found = enumerate_embeddings(&star_125(), n);
            assert_eq!(found.len(), 1, "ambient rank {n}");
            let comp = orthogonal_complement(&found[0]);
            let mut want = vec![-11i64];
            want.extend(std::iter::repeat_n(-1, n - 8));
            assert_eq!(comp.diagonal().unwrap(), want);
        }
        for n in 10..=14 {
            let found = enumerate_embeddings(&star_141(), n);
            assert_eq!(found.len(), 1, "ambient rank {n}");
            let comp = orthogonal_complement(&found[0]);
            let mut want = vec![-9i64, -3];
            want.extend(std::iter::repeat_n(-1, n - 10));
            assert_eq!(comp.diagonal().unwrap(), want);
        }
    }

    #[test]
    fn minimal_complement_generator_shape() {
        let found = enumerate_embeddings(&star_125(), 8);
        let basis = linalg::int_kernel(&found[0].vectors, 8);
        assert_eq!(basis.len(), 1);
        let mut abs: Vec<i64> = basis[0].iter().map(|v| v.abs()).collect();
        abs.sort_unstable();
        assert_eq!(abs, vec![1, 1, 1, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn full_rank_identity_embedding_has_trivial_complement() {
        let g = GramLattice::new(vec![vec![-1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]).unwrap();
        let found = enumerate_embeddings(&g, 3);
        assert_eq!(found.len(), 1);
        let comp = orthogonal_complement(&found[0]);
        assert_eq!(comp.rank(), 0);
        assert_eq!(comp.diagonal().unwrap(), Vec::<i64>::new());
    }

    #[test]
    fn canonicalization_absorbs_signed_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1a77);
        for (g, n) in [(star_125(), 8), (star_141(), 10)] {
            let listed = enumerate_embeddings(&g, n);
            let rep = &listed[0];
            for _ in 0..50 {
                let mut cols: Vec<usize> = (0..n).collect();
                cols.shuffle(&mut rng);
                let flips: Vec<i64> = (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect();
                let scrambled = Embedding {
                    vectors: rep
                        .vectors
                        .iter()
                        .map(|v| (0..n).map(|c| flips[c] * v[cols[c]]).collect())
                        .collect(),
                    n,
                };
                assert_eq!(scrambled.gram(), g.gram);
                assert_eq!(scrambled.canonical(), *rep);
            }
        }
    }

    #[test]
    fn parity_obstruction_examples() {
        let diag = |d: &[i64]| {
            let k = d.len();
            let mut m = vec![vec![0i64; k]; k];
            for (i, &v) in d.iter().enumerate() {
                m[i][i] = v;
            }
            GramLattice {
                gram: m,
                labels: (1..=k).map(|i| format!("u{i}")).collect(),
            }
        };
        assert_eq!(
            parity_obstruction(&diag(&[-11, -1, -1, -1]), 11).unwrap(),
            Obstruction::Obstructed
        );
        assert_eq!(
            parity_obstruction(&diag(&[-9, -3, -1, -1]), 27).unwrap(),
            Obstruction::Obstructed
        );
        assert_eq!(
            parity_obstruction(&diag(&[-2, -4, -6]), 27).unwrap(),
            Obstruction::NotObstructed
        );
        assert_eq!(
            parity_obstruction(&diag(&[-11, -1]), 4).unwrap(),
            Obstruction::NotObstructed
        );
        let skew = GramLattice {
            gram: vec![vec![-2, 1], vec![1, -2]],
            labels: vec!["u1".into(), "u2".into()],
        };
        assert!(parity_obstruction(&skew, 3).is_err());
    }

    #[test]
    fn gram_validation_rejects_indefinite_input() {
        assert!(GramLattice::new(vec![vec![0]]).is_err());
        assert!(GramLattice::new(vec![vec![-2, -3], vec![-3, -2]]).is_err());
        assert!(GramLattice::new(vec![vec![-2, 1], vec![1, -2]]).is_ok());
        assert!(GramLattice::new(vec![vec![-2, 1], vec![0, -2]]).is_err());
    }
}
