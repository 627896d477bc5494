//! Forward synthesis of radial profiles from representing measures, the
//! exponential (Schoenberg) transform, and the fixed-t measure rescaling
//! used in the small-t limit checks.
//!
//! Measures are finite atomic lists. Continuous densities are probed by
//! quadrature atoms (see [`DiscreteMeasure::gauss_legendre`]); the
//! possibly-infinite Radon measure of the Levy-Khintchine form is
//! supported only through finite truncations, with the linear and jump
//! terms carried exactly by dedicated coefficients.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("atom weight must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("atom location {0} outside the required support")]
    LocOutOfRange(f64),
    #[error("coefficient must be nonnegative, got {0}")]
    NegativeCoefficient(f64),
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("t must be positive, got {0}")]
    BadT(f64),
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub loc: f64,
    pub w: f64,
}

/// Finite list of positive atoms plus an optional point-at-infinity
/// weight `b` (the weight of the discontinuous semicharacter).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    atoms: Vec<Atom>,
    #[serde(default)]
    b: f64,
}

impl TryFrom<MeasureRepr> for DiscreteMeasure {
    type Error = String;
    fn try_from(r: MeasureRepr) -> Result<Self, String> {
        DiscreteMeasure::with_infinity(r.atoms, r.b).map_err(|e| e.to_string())
    }
}

impl From<DiscreteMeasure> for MeasureRepr {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureRepr {
            atoms: m.atoms,
            b: m.b,
        }
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, ProfileError> {
        Self::with_infinity(atoms, 0.0)
    }

    pub fn with_infinity(atoms: Vec<Atom>, b: f64) -> Result<Self, ProfileError> {
        for a in &atoms {
            if !a.loc.is_finite() {
                return Err(ProfileError::NonFinite(a.loc));
            }
            if !a.w.is_finite() {
                return Err(ProfileError::NonFinite(a.w));
            }
            if a.w <= 0.0 {
                return Err(ProfileError::NonPositiveWeight(a.w));
            }
        }
        if !b.is_finite() {
            return Err(ProfileError::NonFinite(b));
        }
        if b < 0.0 {
            return Err(ProfileError::NegativeCoefficient(b));
        }
        Ok(DiscreteMeasure { atoms, b })
    }

    pub fn empty() -> Self {
        DiscreteMeasure {
            atoms: Vec::new(),
            b: 0.0,
        }
    }

    pub fn point_mass(loc: f64, w: f64) -> Result<Self, ProfileError> {
        Self::new(vec![Atom { loc, w }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn infinity_weight(&self) -> f64 {
        self.b
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum::<f64>() + self.b
    }

    /// Quadrature atoms for a density on `[-1, 1]`: Gauss-Legendre nodes
    /// with weights scaled by the density. Nodes where the density
    /// vanishes (or goes negative) are dropped.
    pub fn gauss_legendre(nodes: usize, density: impl Fn(f64) -> f64) -> Result<Self, ProfileError> {
        let (xs, ws) = gauss_legendre_rule(nodes);
        let atoms = xs
            .iter()
            .zip(&ws)
            .filter_map(|(&x, &w)| {
                let d = density(x);
                (d > 0.0).then_some(Atom { loc: x, w: w * d })
            })
            .collect();
        Self::new(atoms)
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre polynomial.
fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            // Evaluate P_n and its derivative by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            let dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let w = 2.0 / ((1.0 - x * x) * dp * dp);
                xs[i] = -x;
                xs[n - 1 - i] = x;
                ws[i] = w;
                ws[n - 1 - i] = w;
                break;
            }
        }
    }
    (xs, ws)
}

/// Geometric sum `G(s, n) = sum_{k=0}^{n-1} s^k`; `G(1, n) = n` and
/// `G(s, 0) = 0`. Stable replacement for `(1 - s^n) / (1 - s)`.
pub fn geometric_sum(s: f64, n: u64) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    for _ in 0..n {
        acc += pow;
        pow *= s;
    }
    acc
}

// ---------------------------------------------------------------------------
// Profile types
// ---------------------------------------------------------------------------

/// Measure on `[-1, 1]` representing a positive definite radial profile
/// on the integer semigroup: `phi(n) = sum w_i s_i^n`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RadialProfileZ {
    mu: DiscreteMeasure,
}

impl RadialProfileZ {
    pub fn new(mu: DiscreteMeasure) -> Result<Self, ProfileError> {
        if mu.infinity_weight() != 0.0 {
            return Err(ProfileError::NegativeCoefficient(mu.infinity_weight()));
        }
        for a in mu.atoms() {
            if !(-1.0..=1.0).contains(&a.loc) {
                return Err(ProfileError::LocOutOfRange(a.loc));
            }
        }
        Ok(RadialProfileZ { mu })
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn eval(&self, n: u64) -> f64 {
        eval_pd_z(&self.mu, n)
    }
}

/// Measure on `[-1, 1]` representing a conditionally negative definite
/// radial profile via the geometric-sum kernel.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CndProfileZ {
    nu: DiscreteMeasure,
}

impl CndProfileZ {
    pub fn new(nu: DiscreteMeasure) -> Result<Self, ProfileError> {
        if nu.infinity_weight() != 0.0 {
            return Err(ProfileError::NegativeCoefficient(nu.infinity_weight()));
        }
        for a in nu.atoms() {
            if !(-1.0..=1.0).contains(&a.loc) {
                return Err(ProfileError::LocOutOfRange(a.loc));
            }
        }
        Ok(CndProfileZ { nu })
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.nu
    }

    pub fn eval(&self, n: u64) -> f64 {
        eval_cnd_z(&self.nu, n)
    }
}

/// `phi(s) = sum w_i e^{-a_i s} + b chi_{{0}}(s)` with atoms on `[0, oo)`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RPlusPdProfile {
    mu: DiscreteMeasure,
}

impl RPlusPdProfile {
    pub fn new(mu: DiscreteMeasure) -> Result<Self, ProfileError> {
        for a in mu.atoms() {
            if a.loc < 0.0 {
                return Err(ProfileError::LocOutOfRange(a.loc));
            }
        }
        Ok(RPlusPdProfile { mu })
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn eval(&self, s: f64) -> f64 {
        eval_pd_rplus(&self.mu, s)
    }
}

/// Levy-Khintchine data: `psi(s) = psi0 + c s + b chi_{(0,oo)}(s)
/// + sum w_i (1 - e^{-a_i s})`, atom locations strictly positive.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RPlusCndProfile {
    pub psi0: f64,
    pub c: f64,
    pub b: f64,
    nu: DiscreteMeasure,
}

impl RPlusCndProfile {
    pub fn new(psi0: f64, c: f64, b: f64, nu: DiscreteMeasure) -> Result<Self, ProfileError> {
        if !psi0.is_finite() {
            return Err(ProfileError::NonFinite(psi0));
        }
        if c < 0.0 {
            return Err(ProfileError::NegativeCoefficient(c));
        }
        if b < 0.0 {
            return Err(ProfileError::NegativeCoefficient(b));
        }
        if nu.infinity_weight() != 0.0 {
            return Err(ProfileError::NegativeCoefficient(nu.infinity_weight()));
        }
        for a in nu.atoms() {
            if a.loc <= 0.0 {
                return Err(ProfileError::LocOutOfRange(a.loc));
            }
        }
        Ok(RPlusCndProfile { psi0, c, b, nu })
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.nu
    }

    pub fn eval(&self, s: f64) -> f64 {
        let jump = if s > 0.0 { self.b } else { 0.0 };
        self.psi0
            + self.c * s
            + jump
            + self
                .nu
                .atoms()
                .iter()
                .map(|a| a.w * (1.0 - (-a.loc * s).exp()))
                .sum::<f64>()
    }
}

/// Tagged on-disk form of any profile.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProfileFile {
    #[serde(rename = "pd-z")]
    PdZ { mu: DiscreteMeasure },
    #[serde(rename = "cnd-z")]
    CndZ { nu: DiscreteMeasure },
    #[serde(rename = "pd-rplus")]
    PdRplus { mu: DiscreteMeasure },
    #[serde(rename = "cnd-rplus")]
    CndRplus {
        psi0: f64,
        c: f64,
        b: f64,
        nu: DiscreteMeasure,
    },
}

// ---------------------------------------------------------------------------
// Evaluation against raw measures
// ---------------------------------------------------------------------------

/// `sum w_i s_i^n`, with `0^0 = 1`.
pub fn eval_pd_z(mu: &DiscreteMeasure, n: u64) -> f64 {
    mu.atoms()
        .iter()
        .map(|a| a.w * pow_u(a.loc, n))
        .sum::<f64>()
        + if n == 0 { mu.infinity_weight() } else { 0.0 }
}

fn pow_u(s: f64, n: u64) -> f64 {
    if n == 0 {
        1.0
    } else {
        s.powi(n.min(i32::MAX as u64) as i32)
    }
}

/// `sum w_i G(s_i, n)` with the geometric-sum kernel.
pub fn eval_cnd_z(nu: &DiscreteMeasure, n: u64) -> f64 {
    nu.atoms()
        .iter()
        .map(|a| a.w * geometric_sum(a.loc, n))
        .sum()
}

/// `sum w_i e^{-a_i s} + b chi_{{0}}(s)`. The jump at zero uses exact
/// equality: the point-at-infinity semicharacter is genuinely
/// discontinuous and must not be smeared by a tolerance.
pub fn eval_pd_rplus(mu: &DiscreteMeasure, s: f64) -> f64 {
    mu.atoms()
        .iter()
        .map(|a| a.w * (-a.loc * s).exp())
        .sum::<f64>()
        + if s == 0.0 { mu.infinity_weight() } else { 0.0 }
}

/// Pointwise `g -> exp(-t psi(g))`.
pub fn schoenberg_transform<T, F>(psi: F, t: f64) -> impl Fn(&T) -> f64
where
    F: Fn(&T) -> f64,
{
    move |x| (-t * psi(x)).exp()
}

/// Rescales a fixed-t representing measure into its difference-quotient
/// measure: each atom `(s, w)` becomes `(s, w (1 - s) / t)`; atoms at
/// `s = 1` acquire weight zero and are dropped.
pub fn nu_t_from_mu_t(mu_t: &DiscreteMeasure, t: f64) -> Result<DiscreteMeasure, ProfileError> {
    if !(t > 0.0) {
        return Err(ProfileError::BadT(t));
    }
    let atoms = mu_t
        .atoms()
        .iter()
        .filter_map(|a| {
            let w = a.w * (1.0 - a.loc) / t;
            (w > 0.0).then_some(Atom { loc: a.loc, w })
        })
        .collect();
    DiscreteMeasure::new(atoms)
}
