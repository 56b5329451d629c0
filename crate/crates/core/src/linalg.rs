//! Exact linear algebra over the integers and rationals.
//!
//! Everything here runs on matrices of modest size (Goeritz forms, linking
//! matrices, lattice Gram matrices), so clarity beats asymptotics: plain
//! fraction-free-by-rationals elimination throughout.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

fn to_rat_matrix(m: &[Vec<i64>]) -> Vec<Vec<Rat>> {
    m.iter()
        .map(|r| r.iter().map(|&v| rat(v)).collect())
        .collect()
}

/// Determinant of a square integer matrix, exactly.
pub fn det_i64(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = to_rat_matrix(m);
    let mut det = Rat::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigInt::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    debug_assert!(det.is_integer());
    det.to_integer()
}

/// Solves `m x = rhs` exactly for square integer `m`; `None` when singular.
pub fn solve_i64(m: &[Vec<i64>], rhs: &[i64]) -> Option<Vec<Rat>> {
    let n = m.len();
    let mut a = to_rat_matrix(m);
    let mut b: Vec<Rat> = rhs.iter().map(|&v| rat(v)).collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        b.swap(p, col);
        let pivot = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
            let sub = &f * &b[col];
            b[r] -= sub;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Signature (number of positive minus negative eigenvalues) of a symmetric
/// integer matrix, by congruence diagonalization over the rationals.
pub fn signature_i64(m: &[Vec<i64>]) -> i64 {
    let mut a = to_rat_matrix(m);
    let mut sig = 0i64;
    while !a.is_empty() {
        let n = a.len();
        if let Some(p) = (0..n).find(|&i| !a[i][i].is_zero()) {
            sig += if a[p][p].is_positive() { 1 } else { -1 };
            let pivot = a[p][p].clone();
            let rest: Vec<usize> = (0..n).filter(|&i| i != p).collect();
            let mut next = vec![vec![Rat::zero(); n - 1]; n - 1];
            for (bi, &i) in rest.iter().enumerate() {
                for (bj, &j) in rest.iter().enumerate() {
                    next[bi][bj] = &a[i][j] - &(&a[i][p] * &a[p][j]) / &pivot;
                }
            }
            a = next;
        } else if let Some((i, j)) = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| !a[i][j].is_zero())
        {
            // Zero diagonal but a nonzero off-diagonal entry: adding row and
            // column j into i makes a[i][i] = 2 a[i][j] != 0.
            for t in 0..n {
                let v = a[j][t].clone();
                a[i][t] += v;
            }
            for t in 0..n {
                let v = a[t][j].clone();
                a[t][i] += v;
            }
        } else {
            break; // all remaining entries vanish
        }
    }
    sig
}

/// Basis of the integer kernel of a (not necessarily square) integer matrix.
///
/// Column-style euclidean elimination with a tracked unimodular transform:
/// the returned vectors are a lattice basis of `{ x : m x = 0 }`.
pub fn int_kernel(m: &[Vec<i64>], n_cols: usize) -> Vec<Vec<i64>> {
    let rows = m.len();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut u: Vec<Vec<BigInt>> = (0..n_cols)
        .map(|i| (0..n_cols).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect();
    // u is stored as columns: u[c] is the c-th column vector.
    let mut lead = 0usize;
    for r in 0..rows {
        while let Some(best) = (lead..n_cols)
            .filter(|&c| !a[r][c].is_zero())
            .min_by_key(|&c| a[r][c].abs())
        {
            if best != lead {
                for row in a.iter_mut() {
                    row.swap(best, lead);
                }
                u.swap(best, lead);
            }
            let mut done = true;
            for c in lead + 1..n_cols {
                if a[r][c].is_zero() {
                    continue;
                }
                let q = div_round(&a[r][c], &a[r][lead]);
                if !q.is_zero() {
                    for row in a.iter_mut() {
                        let sub = &q * &row[lead];
                        row[c] -= sub;
                    }
                    for i in 0..n_cols {
                        let sub = &q * &u[lead][i];
                        u[c][i] -= sub;
                    }
                }
                if !a[r][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if lead < n_cols && !a[r][lead].is_zero() {
            lead += 1;
        }
    }
    (lead..n_cols)
        .filter(|&c| (0..rows).all(|r| a[r][c].is_zero()))
        .map(|c| {
            u[c].iter()
                .map(|v| i64::try_from(v).expect("kernel basis entry fits i64"))
                .collect()
        })
        .collect()
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // Nearest-integer division keeps euclidean column reduction shrinking.
    let two = BigInt::from(2);
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if &r.abs() * &two > b.abs() {
        if (r.is_positive()) == (b.is_positive()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Attempts to diagonalize a symmetric integer Gram matrix by an integer
/// congruence. Returns the diagonal on success; `None` when the greedy
/// reduction gets stuck (caller then reports the raw Gram matrix).
pub fn gram_diagonalize(g: &[Vec<i64>]) -> Option<Vec<i64>> {
    let mut a: Vec<Vec<BigInt>> = g
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut diag = Vec::new();
    let mut guard = 0usize;
    while !a.is_empty() {
        guard += 1;
        if guard > 10_000 {
            return None;
        }
        let n = a.len();
        let Some(p) = (0..n)
            .filter(|&i| !a[i][i].is_zero())
            .min_by_key(|&i| a[i][i].abs())
        else {
            return if a.iter().flatten().all(|v| v.is_zero()) {
                diag.extend(std::iter::repeat_n(0, a.len()));
                Some(diag)
            } else {
                None
            };
        };
        let mut clean = true;
        for j in 0..n {
            if j == p || a[p][j].is_zero() {
                continue;
            }
            let q = div_round(&a[p][j], &a[p][p]);
            if q.is_zero() {
                clean = false;
                continue;
            }
            for t in 0..n {
                let sub = &q * &a[t][p];
                a[t][j] -= sub;
            }
            for t in 0..n {
                let sub = &q * &a[p][t];
                a[j][t] -= sub;
            }
        }
        if (0..n).all(|j| j == p || a[p][j].is_zero()) {
            diag.push(i64::try_from(&a[p][p]).ok()?);
            let rest: Vec<usize> = (0..n).filter(|&i| i != p).collect();
            a = rest
                .iter()
                .map(|&i| rest.iter().map(|&j| a[i][j].clone()).collect())
                .collect();
        } else if clean {
            // Off-diagonal entries smaller than every diagonal pivot and not
            // reducible: give up rather than loop.
            return None;
        }
    }
    Some(diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_small() {
        assert_eq!(det_i64(&[vec![2, 1], vec![1, 2]]), BigInt::from(3));
        assert_eq!(det_i64(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(det_i64(&[]), BigInt::one());
        assert_eq!(
            det_i64(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]),
            BigInt::from(4)
        );
    }

    #[test]
    fn solve_exact() {
        let m = vec![vec![2, 1], vec![1, 2]];
        let x = solve_i64(&m, &[1, 0]).unwrap();
        assert_eq!(x[0], Rat::new(BigInt::from(2), BigInt::from(3)));
        assert_eq!(x[1], Rat::new(BigInt::from(-1), BigInt::from(3)));
        assert!(solve_i64(&[vec![1, 1], vec![1, 1]], &[1, 0]).is_none());
    }

    #[test]
    fn signature_handles_zero_diagonal() {
        // Hyperbolic plane: signature 0.
        assert_eq!(signature_i64(&[vec![0, 1], vec![1, 0]]), 0);
        assert_eq!(signature_i64(&[vec![2, 0], vec![0, -3]]), 0);
        assert_eq!(signature_i64(&[vec![2, 1], vec![1, 2]]), 2);
        assert_eq!(
            signature_i64(&[vec![-2, 1, 0], vec![1, -2, 1], vec![0, 1, -2]]),
            -3
        );
    }

    #[test]
    fn kernel_is_saturated() {
        // Kernel of (1 2 3) is a rank-2 primitive sublattice.
        let k = int_kernel(&[vec![1, 2, 3]], 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(v[0] + 2 * v[1] + 3 * v[2], 0);
        }
        // (2 4): kernel must contain (2, -1), primitive.
        let k = int_kernel(&[vec![2, 4]], 2);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0][0].abs(), 2);
        assert_eq!(k[0][1].abs(), 1);
    }

    #[test]
    fn diagonalize_small_gram() {
        let d = gram_diagonalize(&[vec![-12, 3], vec![3, -3]]).unwrap();
        let mut d = d;
        d.sort();
        assert_eq!(d, vec![-9, -3]);
    }
}
