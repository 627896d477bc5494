//! Inverse problem: decide whether a finite sequence is the moment
//! sequence of a measure on `[-1, 1]` (Hankel feasibility) and recover
//! the representing atoms, plus the Laplace variant for exponential
//! mixtures on `[0, oo)`.
//!
//! Recovery is Prony-style: the monic polynomial annihilating the atom
//! locations is solved from the shifted Hankel system, its roots are
//! found by a simultaneous (Durand-Kerner) iteration, weights come from
//! a nonnegatively constrained Vandermonde solve, and the whole
//! parameter set is polished by a few Gauss-Newton steps on the moment
//! equations.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gram::{check_psd, default_tol, GramError, GramReport, SymMatrix};
use crate::profiles::{Atom, DiscreteMeasure, ProfileError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("need at least {needed} moments for k = {k}, got {got}")]
    TooFewMoments { k: usize, needed: usize, got: usize },
    #[error("k must be >= 1")]
    BadK,
    #[error("non-finite moment at index {0}")]
    NonFinite(usize),
    #[error("infeasible at k = {k}: root {root} is not a real location in range")]
    InfeasibleAtK { k: usize, root: Complex64 },
    #[error("root finding did not converge")]
    RootsDiverged,
    #[error("samples do not contain s = 0")]
    MissingZeroSample,
    #[error("samples do not form an arithmetic grid h, 2h, ..., 2kh")]
    BadGrid,
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Finite real sequence `m_0 ... m_L` indexed by semigroup points.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct MomentSequence {
    pub m: Vec<f64>,
}

impl MomentSequence {
    pub fn new(m: Vec<f64>) -> Result<Self, MomentError> {
        for (i, v) in m.iter().enumerate() {
            if !v.is_finite() {
                return Err(MomentError::NonFinite(i));
            }
        }
        Ok(MomentSequence { m })
    }

    /// `m_n = sum w_i s_i^n` for `n = 0..=last` of a discrete measure.
    pub fn of_measure(mu: &DiscreteMeasure, last: usize) -> Self {
        let m = (0..=last)
            .map(|n| crate::profiles::eval_pd_z(mu, n as u64))
            .collect();
        MomentSequence { m }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

/// Feasibility verdict with the two Hankel witnesses: `H = [m_{i+j}]`
/// certifies semigroup positive-definiteness, the localized
/// `H' = [m_{i+j} - m_{i+j+2}]` certifies support inside `[-1, 1]`.
#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityReport {
    pub verdict: Feasibility,
    pub bounded: bool,
    pub hankel: GramReport,
    pub localized: Option<GramReport>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.verdict == Feasibility::Feasible
    }
}

pub fn hankel_feasible(ms: &MomentSequence, tol: f64) -> Result<FeasibilityReport, MomentError> {
    let m = &ms.m;
    if m.is_empty() {
        return Err(MomentError::TooFewMoments {
            k: 0,
            needed: 1,
            got: 0,
        });
    }
    let big_l = m.len() - 1;
    let scale = m.iter().fold(1.0f64, |a, v| a.max(v.abs()));

    // Boundedness of the represented kernel: |m_n| <= m_0.
    let bounded = m.iter().all(|v| v.abs() <= m[0] + tol * scale);

    let h_dim = big_l / 2 + 1;
    let hankel_mat = SymMatrix::from_fn(h_dim, |i, j| m[i + j]);
    let hankel = check_psd(&hankel_mat, tol.max(default_tol(&hankel_mat)))?;

    let localized = if big_l >= 2 {
        let d = (big_l - 2) / 2 + 1;
        let mat = SymMatrix::from_fn(d, |i, j| m[i + j] - m[i + j + 2]);
        Some(check_psd(&mat, tol.max(default_tol(&mat)))?)
    } else {
        None
    };

    let ok = bounded && hankel.accepted() && localized.as_ref().map_or(true, |r| r.accepted());
    Ok(FeasibilityReport {
        verdict: if ok {
            Feasibility::Feasible
        } else {
            Feasibility::Infeasible
        },
        bounded,
        hankel,
        localized,
    })
}

/// Recovered measure with its worst moment mismatch.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryResult {
    pub measure: DiscreteMeasure,
    pub residual: f64,
    pub atoms_found: usize,
}

/// Dense linear solve by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-13 * scale`.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(1e-300f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if pivot < 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in (col + 1)..n {
            s -= a[col][c] * x[c];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// All roots of the monic polynomial `x^k + c_{k-1} x^{k-1} + ... + c_0`
/// by Durand-Kerner iteration. `perturb` jitters the initial ring so
/// repeated recoveries can probe uniqueness.
fn monic_roots(coeffs: &[f64], perturb: Option<&mut ChaCha8Rng>) -> Result<Vec<Complex64>, MomentError> {
    let k = coeffs.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let eval = |z: Complex64| -> Complex64 {
        let mut v = Complex64::new(1.0, 0.0);
        for &c in coeffs.iter().rev() {
            v = v * z + c;
        }
        v
    };
    let mut jitter: Vec<f64> = vec![0.0; k];
    if let Some(rng) = perturb {
        for j in jitter.iter_mut() {
            *j = rng.gen_range(-0.1..0.1);
        }
    }
    let base = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..k)
        .map(|i| base.powu(i as u32 + 1) * Complex64::new(1.0 + jitter[i], 0.0))
        .collect();
    for _ in 0..600 {
        let mut max_step = 0.0f64;
        for i in 0..k {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..k {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-280 {
                return Err(MomentError::RootsDiverged);
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 {
            return Ok(roots);
        }
    }
    // Accept slow convergence as long as the residuals are tiny.
    if roots.iter().all(|&r| eval(r).norm() < 1e-10) {
        Ok(roots)
    } else {
        Err(MomentError::RootsDiverged)
    }
}

/// Nonnegative weight solve against the Vandermonde moment equations:
/// unconstrained normal-equation solve, then clip-and-refit, dropping
/// atoms whose weight comes back negative.
fn nn_weights(locs: &[f64], m: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut active: Vec<usize> = (0..locs.len()).collect();
    loop {
        if active.is_empty() {
            return (vec![0.0; locs.len()], Vec::new());
        }
        let k = active.len();
        let rows = m.len();
        // normal equations  (V^T V) w = V^T m
        let mut ata = vec![vec![0.0; k]; k];
        let mut atb = vec![0.0; k];
        for n in 0..rows {
            let row: Vec<f64> = active.iter().map(|&i| locs[i].powi(n as i32)).collect();
            for a in 0..k {
                for b in 0..k {
                    ata[a][b] += row[a] * row[b];
                }
                atb[a] += row[a] * m[n];
            }
        }
        let w = match solve_dense(ata, atb) {
            Some(w) => w,
            None => return (vec![0.0; locs.len()], Vec::new()),
        };
        if let Some(pos) = w.iter().position(|&wi| wi < 0.0) {
            active.remove(pos);
            continue;
        }
        let mut full = vec![0.0; locs.len()];
        for (slot, &i) in active.iter().enumerate() {
            full[i] = w[slot];
        }
        return (full, active.iter().map(|&i| locs[i]).collect());
    }
}

fn moment_residual(locs: &[f64], weights: &[f64], m: &[f64]) -> f64 {
    (0..m.len())
        .map(|n| {
            let model: f64 = locs
                .iter()
                .zip(weights)
                .map(|(&s, &w)| w * s.powi(n as i32))
                .sum();
            (model - m[n]).abs()
        })
        .fold(0.0, f64::max)
}

/// Gauss-Newton polish of `(s_i, w_i)` against all supplied moments.
fn refine_atoms(locs: &mut Vec<f64>, weights: &mut Vec<f64>, m: &[f64]) {
    let k = locs.len();
    if k == 0 {
        return;
    }
    let rows = m.len();
    let mut best = (locs.clone(), weights.clone());
    let mut best_res = moment_residual(locs, weights, m);
    for _ in 0..25 {
        let nvar = 2 * k;
        let mut jtj = vec![vec![0.0; nvar]; nvar];
        let mut jtr = vec![0.0; nvar];
        for n in 0..rows {
            let mut row = vec![0.0; nvar];
            let mut model = 0.0;
            for i in 0..k {
                let s = locs[i];
                let w = weights[i];
                let sn = s.powi(n as i32);
                model += w * sn;
                row[i] = sn; // d/dw
                row[k + i] = if n == 0 {
                    0.0
                } else {
                    w * n as f64 * s.powi(n as i32 - 1)
                };
            }
            let r = model - m[n];
            for a in 0..nvar {
                for b in 0..nvar {
                    jtj[a][b] += row[a] * row[b];
                }
                jtr[a] += row[a] * r;
            }
        }
        // small Levenberg damping keeps near-singular steps finite
        let damp = 1e-12 * (0..nvar).map(|i| jtj[i][i]).fold(0.0f64, f64::max).max(1e-300);
        for (i, row) in jtj.iter_mut().enumerate() {
            row[i] += damp;
            let _ = i;
        }
        let step = match solve_dense(jtj, jtr) {
            Some(s) => s,
            None => break,
        };
        for i in 0..k {
            weights[i] -= step[i];
            locs[i] -= step[k + i];
        }
        let res = moment_residual(locs, weights, m);
        if res < best_res {
            best_res = res;
            best = (locs.clone(), weights.clone());
        }
        if step.iter().all(|s| s.abs() < 1e-15) {
            break;
        }
    }
    *locs = best.0;
    *weights = best.1;
}

/// Recovers up to `k` atoms from moments `m_0 ... m_L` (`L >= 2k - 1`).
/// A singular Hankel system makes the solver retry with `k - 1`;
/// `atoms_found` reports the count actually used.
pub fn recover_measure(ms: &MomentSequence, k: usize) -> Result<RecoveryResult, MomentError> {
    recover_measure_seeded(ms, k, None)
}

/// As `recover_measure` but with a jitter source for the root-finder
/// initialization; used by the uniqueness diagnostics.
pub fn recover_measure_seeded(
    ms: &MomentSequence,
    k: usize,
    mut perturb: Option<&mut ChaCha8Rng>,
) -> Result<RecoveryResult, MomentError> {
    if k == 0 {
        return Err(MomentError::BadK);
    }
    let m = &ms.m;
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        // the zero measure
        return Ok(RecoveryResult {
            measure: DiscreteMeasure::empty(),
            residual: 0.0,
            atoms_found: 0,
        });
    }

    let mut k_try = k;
    loop {
        let needed = 2 * k_try;
        if m.len() < needed {
            return Err(MomentError::TooFewMoments {
                k: k_try,
                needed,
                got: m.len(),
            });
        }
        // Hankel system  H p = -(m_k .. m_{2k-1})  for the monic
        // annihilating polynomial of the atom locations.
        let a: Vec<Vec<f64>> = (0..k_try)
            .map(|i| (0..k_try).map(|j| m[i + j]).collect())
            .collect();
        let b: Vec<f64> = (0..k_try).map(|i| -m[k_try + i]).collect();
        let coeffs = match solve_dense(a, b) {
            Some(c) => c,
            None => {
                if k_try == 1 {
                    return Err(MomentError::InfeasibleAtK {
                        k,
                        root: Complex64::new(f64::NAN, 0.0),
                    });
                }
                k_try -= 1;
                continue;
            }
        };
        let roots = monic_roots(&coeffs, perturb.as_deref_mut())?;
        let mut locs = Vec::with_capacity(k_try);
        for r in roots {
            if r.im.abs() > 1e-6 * r.norm().max(1.0) {
                return Err(MomentError::InfeasibleAtK { k: k_try, root: r });
            }
            locs.push(r.re);
        }
        let (full_w, _) = nn_weights(&locs, m);
        let mut kept_locs = Vec::new();
        let mut kept_w = Vec::new();
        for (s, w) in locs.iter().zip(&full_w) {
            if *w > 0.0 {
                kept_locs.push(*s);
                kept_w.push(*w);
            }
        }
        refine_atoms(&mut kept_locs, &mut kept_w, m);
        let mut atoms = Vec::new();
        for (&s, &w) in kept_locs.iter().zip(&kept_w) {
            if w > 0.0 {
                atoms.push(Atom { loc: s, w });
            }
        }
        atoms.sort_by(|a, b| a.loc.partial_cmp(&b.loc).unwrap());
        let residual = moment_residual(
            &atoms.iter().map(|a| a.loc).collect::<Vec<_>>(),
            &atoms.iter().map(|a| a.w).collect::<Vec<_>>(),
            m,
        );
        let atoms_found = atoms.len();
        return Ok(RecoveryResult {
            measure: DiscreteMeasure::new(atoms)?,
            residual,
            atoms_found,
        });
    }
}

/// Recovers `(a_i, w_i)` and the jump weight `b` from samples of
/// `phi(s) = sum w_i e^{-a_i s} + b chi_{{0}}(s)` on the grid
/// `0, h, 2h, ..., 2kh`. The substitution `x = e^{-a h}` turns the
/// positive-grid samples into a power-moment problem on `(0, 1]`.
pub fn recover_laplace(values: &[(f64, f64)], k: usize) -> Result<RecoveryResult, MomentError> {
    let phi0 = values
        .iter()
        .find(|(s, _)| *s == 0.0)
        .ok_or(MomentError::MissingZeroSample)?
        .1;
    let mut positive: Vec<(f64, f64)> = values.iter().copied().filter(|(s, _)| *s > 0.0).collect();
    positive.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    if k == 0 {
        // pure jump: everything away from zero must vanish
        let residual = positive.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        return Ok(RecoveryResult {
            measure: DiscreteMeasure::with_infinity(vec![], phi0.max(0.0))?,
            residual,
            atoms_found: 0,
        });
    }
    if positive.len() < 2 * k {
        return Err(MomentError::BadGrid);
    }
    let h = positive[0].0;
    for (i, (s, _)) in positive.iter().take(2 * k).enumerate() {
        if (s - (i + 1) as f64 * h).abs() > 1e-9 * h {
            return Err(MomentError::BadGrid);
        }
    }
    // Shifted moments of the measure with atoms x_i = e^{-a_i h} and
    // weights w_i x_i, so the unknown jump b never enters.
    let shifted: Vec<f64> = positive.iter().take(2 * k).map(|(_, v)| *v).collect();
    let ms = MomentSequence::new(shifted)?;
    let rec = recover_measure(&ms, k)?;

    let mut atoms = Vec::new();
    for a in rec.measure.atoms() {
        let x = a.loc;
        if x <= 1e-12 || x > 1.0 + 1e-8 {
            return Err(MomentError::InfeasibleAtK {
                k,
                root: Complex64::new(x, 0.0),
            });
        }
        let x_clamped = x.min(1.0);
        let rate = -(x_clamped.ln()) / h;
        atoms.push(Atom {
            loc: rate,
            w: a.w / x,
        });
    }
    atoms.sort_by(|a, b| a.loc.partial_cmp(&b.loc).unwrap());
    let mass: f64 = atoms.iter().map(|a| a.w).sum();
    let b = (phi0 - mass).max(0.0);
    let measure = DiscreteMeasure::with_infinity(atoms, b)?;
    let residual = values
        .iter()
        .map(|&(s, v)| (crate::profiles::eval_pd_rplus(&measure, s) - v).abs())
        .fold(0.0, f64::max);
    let atoms_found = measure.atoms().len();
    Ok(RecoveryResult {
        measure,
        residual,
        atoms_found,
    })
}

fn cleaned(measure: &DiscreteMeasure) -> Vec<Atom> {
    let mut atoms: Vec<Atom> = measure
        .atoms()
        .iter()
        .copied()
        .filter(|a| a.w > 1e-10)
        .collect();
    atoms.sort_by(|a, b| a.loc.partial_cmp(&b.loc).unwrap());
    atoms
}

/// Transport-style distance between two cleaned atom lists:
/// `sum |dw| + sum w |ds|` after sorting by location, plus any mass
/// stranded by a count mismatch.
pub fn measure_gap(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    let xa = cleaned(a);
    let xb = cleaned(b);
    let mut gap = 0.0;
    for i in 0..xa.len().max(xb.len()) {
        match (xa.get(i), xb.get(i)) {
            (Some(p), Some(q)) => {
                gap += (p.w - q.w).abs() + 0.5 * (p.w + q.w) * (p.loc - q.loc).abs();
            }
            (Some(p), None) | (None, Some(p)) => gap += p.w,
            (None, None) => {}
        }
    }
    gap + (a.infinity_weight() - b.infinity_weight()).abs()
}

/// Repeats the recovery pipeline with jittered root-finder seeds and
/// returns the largest pairwise distance between the recovered
/// measures. Small values are numerical evidence that the representing
/// measure at this atom count is unique.
pub fn uniqueness_gap(
    ms: &MomentSequence,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<f64, MomentError> {
    let mut recovered = vec![recover_measure(ms, k)?.measure];
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9e3779b97f4a7c15));
        recovered.push(recover_measure_seeded(ms, k, Some(&mut rng))?.measure);
    }
    let mut gap = 0.0f64;
    for i in 0..recovered.len() {
        for j in (i + 1)..recovered.len() {
            gap = gap.max(measure_gap(&recovered[i], &recovered[j]));
        }
    }
    Ok(gap)
}
