//! Finite-sample certification of positive definiteness and conditional
//! negative definiteness: Toeplitz-type group Gram matrices, Hankel-type
//! semigroup matrices, and a cyclic Jacobi eigensolver that decides them.
//!
//! Complex coefficients in the definitions reduce to the real symmetric
//! case here: every kernel this crate evaluates is real valued and
//! symmetric under inversion, so its Gram matrices are real symmetric.

use serde::Serialize;
use thiserror::Error;

use crate::words::{FreeWord, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GramError {
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// Dense symmetric matrix; the two triangles are stored identically.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds the matrix from an entry generator, symmetrizing by
    /// averaging `f(i, j)` and `f(j, i)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = if i == j {
                    f(i, i)
                } else {
                    0.5 * (f(i, j) + f(j, i))
                };
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn check_finite(&self) -> Result<(), GramError> {
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.get(i, j).is_finite() {
                    return Err(GramError::NonFinite(i, j));
                }
            }
        }
        Ok(())
    }

    /// Full spectrum by cyclic Jacobi rotations, iterated until the
    /// off-diagonal Frobenius norm drops below `1e-14 * ||M||_F`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        if n == 0 {
            return Vec::new();
        }
        let mut a = self.data.clone();
        let threshold = 1e-14 * self.frobenius();
        let off = |a: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += 2.0 * a[i * n + j] * a[i * n + j];
                }
            }
            s.sqrt()
        };
        for _sweep in 0..100 {
            if off(&a) <= threshold {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (theta * theta + 1.0).sqrt())
                    } else {
                        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs
    }
}

/// Default certification tolerance at the eigensolver's backward-error
/// scale: `1e-9 * n * max|entry|`.
pub fn default_tol(m: &SymMatrix) -> f64 {
    let t = 1e-9 * m.n() as f64 * m.max_abs_entry();
    if t > 0.0 {
        t
    } else {
        1e-12
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Pd,
    Cnd,
}

/// Certification outcome for one Gram matrix.
#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub n: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub mode: CheckMode,
    #[serde(skip)]
    pub matrix: SymMatrix,
}

impl GramReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

/// Group Gram matrix `M[i][j] = phi(x_i^-1 x_j)`.
pub fn group_gram<W: Word>(words: &[W], phi: impl Fn(&W) -> f64) -> SymMatrix {
    SymMatrix::from_fn(words.len(), |i, j| phi(&words[i].inverse().mul(&words[j])))
}

/// Hankel-type semigroup Gram matrix `M[i][j] = phidot(s_i + s_j)`.
pub fn semigroup_gram(points: &[f64], phidot: impl Fn(f64) -> f64) -> SymMatrix {
    SymMatrix::from_fn(points.len(), |i, j| phidot(points[i] + points[j]))
}

/// Accepts iff the smallest eigenvalue is `>= -tol`.
pub fn check_psd(m: &SymMatrix, tol: f64) -> Result<GramReport, GramError> {
    if !(tol > 0.0) {
        return Err(GramError::BadTolerance(tol));
    }
    m.check_finite()?;
    let eigs = m.eigenvalues();
    let min_eig = eigs.first().copied().unwrap_or(0.0);
    let max_eig = eigs.last().copied().unwrap_or(0.0);
    Ok(GramReport {
        n: m.n(),
        min_eig,
        max_eig,
        tol,
        verdict: if min_eig >= -tol {
            Verdict::Accept
        } else {
            Verdict::Reject
        },
        mode: CheckMode::Pd,
        matrix: m.clone(),
    })
}

/// Conditional-negative-definiteness check: projects onto the sum-zero
/// subspace with the centering projector `P = I - (1/n) J` and accepts
/// iff the largest eigenvalue of `P M P` is `<= tol`. The range of `P`
/// is exactly the sum-zero coefficient space.
pub fn check_cnd(m: &SymMatrix, tol: f64) -> Result<GramReport, GramError> {
    if !(tol > 0.0) {
        return Err(GramError::BadTolerance(tol));
    }
    m.check_finite()?;
    let n = m.n();
    let centered = if n == 0 {
        m.clone()
    } else {
        let nf = n as f64;
        let row_mean: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| m.get(i, j)).sum::<f64>() / nf)
            .collect();
        let grand = row_mean.iter().sum::<f64>() / nf;
        SymMatrix::from_fn(n, |i, j| m.get(i, j) - row_mean[i] - row_mean[j] + grand)
    };
    let eigs = centered.eigenvalues();
    let min_eig = eigs.first().copied().unwrap_or(0.0);
    let max_eig = eigs.last().copied().unwrap_or(0.0);
    Ok(GramReport {
        n,
        min_eig,
        max_eig,
        tol,
        verdict: if max_eig <= tol {
            Verdict::Accept
        } else {
            Verdict::Reject
        },
        mode: CheckMode::Cnd,
        matrix: m.clone(),
    })
}

/// Both sides of the parity quadratic-form identity:
/// `lhs = sum c_i c_j (-1)^{||g_i g_j^-1||_2^2}` and
/// `rhs = (sum_{even} c_i - sum_{odd} c_j)^2`, where parity is that of
/// the squared `l^2` length.
pub fn parity_identity_check(words: &[FreeWord], c: &[f64]) -> (f64, f64) {
    assert_eq!(words.len(), c.len());
    let mut lhs = 0.0;
    for (i, gi) in words.iter().enumerate() {
        for (j, gj) in words.iter().enumerate() {
            let parity = gi.mul(&gj.inverse()).sq_length() % 2;
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            lhs += c[i] * c[j] * sign;
        }
    }
    let mut signed = 0.0;
    for (g, &ci) in words.iter().zip(c) {
        if g.sq_length() % 2 == 0 {
            signed += ci;
        } else {
            signed -= ci;
        }
    }
    (lhs, signed * signed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{random_word_with, FreeWord};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(text: &str) -> FreeWord {
        FreeWord::parse(text).unwrap()
    }

    #[test]
    fn group_gram_examples() {
        let m = group_gram(&[FreeWord::identity()], |_| 1.0);
        assert_eq!(m.get(0, 0), 1.0);

        // phi(g) = 0.5^{||g||_2^2} on {e, g1, g1^2}
        let words = [w("e"), w("g1"), w("g1^2")];
        let m = group_gram(&words, |g| 0.5f64.powi(g.sq_length() as i32));
        let expected = [
            [1.0, 0.5, 0.0625],
            [0.5, 1.0, 0.5],
            [0.0625, 0.5, 1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.get(i, j) - expected[i][j]).abs() < 1e-15);
            }
        }

        // delta at the identity gives the identity matrix
        let words = [w("e"), w("g1"), w("g2 g1^-1")];
        let m = group_gram(&words, |g| if g.is_identity() { 1.0 } else { 0.0 });
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn semigroup_gram_examples() {
        let m = semigroup_gram(&[0.0, 1.0, 2.0], |_| 1.0);
        assert!((0..3).all(|i| (0..3).all(|j| m.get(i, j) == 1.0)));

        // chi_{0} semicharacter
        let m = semigroup_gram(&[0.0, 1.0], |s| if s == 0.0 { 1.0 } else { 0.0 });
        assert_eq!(
            [[m.get(0, 0), m.get(0, 1)], [m.get(1, 0), m.get(1, 1)]],
            [[1.0, 0.0], [0.0, 0.0]]
        );

        // moments of (1/2)(delta_1 + delta_{-1}): 1, 0, 1, 0, 1
        let moments = |n: f64| if (n as i64) % 2 == 0 { 1.0 } else { 0.0 };
        let m = semigroup_gram(&[0.0, 1.0, 2.0], moments);
        let expected = [[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), expected[i][j]);
            }
        }
    }

    #[test]
    fn check_psd_examples() {
        let id = SymMatrix::from_fn(4, |i, j| if i == j { 1.0 } else { 0.0 });
        let rep = check_psd(&id, 1e-9).unwrap();
        assert!(rep.accepted());
        assert!((rep.min_eig - 1.0).abs() < 1e-12);

        let m = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        let rep = check_psd(&m, 1e-9).unwrap();
        assert!(!rep.accepted());
        assert!((rep.min_eig - (-1.0)).abs() < 1e-12);

        // parity kernel on random words is positive definite
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let words: Vec<FreeWord> = (0..8).map(|_| random_word_with(&mut rng, 6, 3, 4)).collect();
        let m = group_gram(&words, |g| if g.sq_length() % 2 == 0 { 1.0 } else { -1.0 });
        assert!(check_psd(&m, default_tol(&m)).unwrap().accepted());
    }

    #[test]
    fn check_cnd_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let words: Vec<FreeWord> =
                (0..7).map(|_| random_word_with(&mut rng, 6, 3, 4)).collect();
            let m = group_gram(&words, |g| g.sq_length() as f64);
            assert!(check_cnd(&m, default_tol(&m)).unwrap().accepted());
        }

        let neg_id = SymMatrix::from_fn(3, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(check_cnd(&neg_id, 1e-9).unwrap().accepted());

        // psi(g) = -||g||_2^2 on {e, g1} is not conditionally negative definite
        let words = [w("e"), w("g1")];
        let m = group_gram(&words, |g| -(g.sq_length() as f64));
        assert!(!check_cnd(&m, 1e-9).unwrap().accepted());
    }

    #[test]
    fn non_finite_entries_error() {
        let m = SymMatrix::from_fn(2, |i, j| if i == j { f64::NAN } else { 0.0 });
        assert!(matches!(check_psd(&m, 1e-9), Err(GramError::NonFinite(_, _))));
        assert!(matches!(check_cnd(&m, 1e-9), Err(GramError::NonFinite(_, _))));
    }

    #[test]
    fn parity_identity_examples() {
        let words = [w("e"), w("g1")];
        let (lhs, rhs) = parity_identity_check(&words, &[1.0, -1.0]);
        assert_eq!((lhs, rhs), (4.0, 4.0));

        let (lhs, rhs) = parity_identity_check(&words, &[0.0, 0.0]);
        assert_eq!((lhs, rhs), (0.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let words: Vec<FreeWord> =
                (0..6).map(|_| random_word_with(&mut rng, 5, 3, 3)).collect();
            let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (lhs, rhs) = parity_identity_check(&words, &c);
            assert!((lhs - rhs).abs() < 1e-12, "lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn schur_product_of_accepted_profiles_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let words: Vec<FreeWord> =
                (0..6).map(|_| random_word_with(&mut rng, 5, 3, 4)).collect();
            let phi1 = |g: &FreeWord| 0.5f64.powi(g.sq_length() as i32);
            let phi2 = |g: &FreeWord| if g.sq_length() % 2 == 0 { 1.0 } else { -1.0 };
            let m1 = group_gram(&words, phi1);
            let m2 = group_gram(&words, phi2);
            let prod = group_gram(&words, |g| phi1(g) * phi2(g));
            assert!(check_psd(&m1, default_tol(&m1)).unwrap().accepted());
            assert!(check_psd(&m2, default_tol(&m2)).unwrap().accepted());
            assert!(check_psd(&prod, default_tol(&prod)).unwrap().accepted());
        }
    }

    // Independent oracle: a symmetric matrix is PSD iff every principal
    // minor is nonnegative. Enumerated directly for n <= 4.
    fn det(sub: &[Vec<f64>]) -> f64 {
        let n = sub.len();
        match n {
            0 => 1.0,
            1 => sub[0][0],
            _ => {
                let mut d = 0.0;
                for j in 0..n {
                    let minor: Vec<Vec<f64>> = (1..n)
                        .map(|r| {
                            (0..n)
                                .filter(|&c| c != j)
                                .map(|c| sub[r][c])
                                .collect()
                        })
                        .collect();
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    d += sign * sub[0][j] * det(&minor);
                }
                d
            }
        }
    }

    fn psd_oracle(m: &SymMatrix, tol: f64) -> bool {
        let n = m.n();
        assert!(n <= 4);
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let sub: Vec<Vec<f64>> = idx
                .iter()
                .map(|&i| idx.iter().map(|&j| m.get(i, j)).collect())
                .collect();
            if det(&sub) < -tol {
                return false;
            }
        }
        true
    }

    #[test]
    fn check_psd_agrees_with_principal_minor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut agreements = 0u32;
        for _ in 0..10_000 {
            let n = rng.gen_range(1..=4usize);
            let raw: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            // A^T A is PSD; A + A^T usually is not. Mix both kinds.
            let m = if rng.gen_bool(0.5) {
                SymMatrix::from_fn(n, |i, j| {
                    (0..n).map(|k| raw[k * n + i] * raw[k * n + j]).sum()
                })
            } else {
                SymMatrix::from_fn(n, |i, j| raw[i * n + j] + raw[j * n + i])
            };
            let tol = default_tol(&m).max(1e-12);
            let rep = check_psd(&m, tol).unwrap();
            // Skip matrices whose extremal eigenvalue sits inside the
            // tolerance band; both deciders are then allowed either answer.
            if rep.min_eig.abs() <= 10.0 * tol {
                continue;
            }
            assert_eq!(rep.accepted(), psd_oracle(&m, tol * 10.0));
            agreements += 1;
        }
        assert!(agreements > 9000);
    }

    #[test]
    fn report_json_shape() {
        let id = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.0 });
        let rep = check_psd(&id, 1e-9).unwrap();
        let js = serde_json::to_string(&rep).unwrap();
        assert!(js.contains(r#""n":2"#));
        assert!(js.contains(r#""min_eig":"#));
        assert!(js.contains(r#""tol":"#));
        assert!(js.contains(r#""verdict":"accept""#));
    }

    #[test]
    fn jacobi_matches_closed_forms() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let m = SymMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let e = m.eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);

        // rank-one ones matrix: eigenvalues {0, 0, 3}
        let ones = SymMatrix::from_fn(3, |_, _| 1.0);
        let e = ones.eigenvalues();
        assert!(e[0].abs() < 1e-12 && e[1].abs() < 1e-12 && (e[2] - 3.0).abs() < 1e-12);
    }
}
