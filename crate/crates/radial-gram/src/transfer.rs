//! Replicated witness families: for each of the three spaces, `N`
//! interchangeable copies of elements hitting prescribed length targets
//! `s_1 ... s_M`, with all cross lengths equal to `s_j + s_k`. Averaging
//! a group-side quadratic form over the copies transfers group
//! positive-definiteness to the length semigroup, up to an explicit
//! `O(1/(N-1))` defect.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{CoordVector, FreeWord, GeneratorId, RealFreeWord, Space, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("need at least 2 copies, got {0}")]
    BadCopies(u32),
    #[error("need at least one target")]
    NoTargets,
    #[error("bad target {0}: {1}")]
    BadTarget(f64, &'static str),
    #[error("p = {0} out of range (0, 2]")]
    BadP(f64),
    #[error("space `{0}` requires p")]
    MissingP(String),
    #[error("unknown space `{0}`")]
    UnknownSpace(String),
    #[error("pairing overflow for ({0}, {1})")]
    PairOverflow(u64, u64),
    #[error(
        "family invariant violated at ({n},{j}) x ({m},{k}): theta = {got}, expected {expected}"
    )]
    InvariantViolated {
        n: usize,
        j: usize,
        m: usize,
        k: usize,
        got: f64,
        expected: f64,
    },
    #[error("coefficient count {got} does not match target count {expected}")]
    BadCoefficients { got: usize, expected: usize },
    #[error("averaged quadratic form {quad} fell below the bound {bound}")]
    BoundViolated { quad: f64, bound: f64 },
    #[error(
        "function is not radial: words `{w1}` and `{w2}` share length {point} but give {v1} vs {v2}"
    )]
    NotRadial {
        point: f64,
        w1: String,
        w2: String,
        v1: f64,
        v2: f64,
    },
    #[error("no probe words supplied for some point")]
    NoProbes,
    #[error("no probe value recorded at s = {0}")]
    UnknownPoint(f64),
}

/// Injective flattening of doubly-indexed generators `g_{n,j}`
/// (`n, j >= 1`) into the single generator alphabet: the Cantor-style
/// diagonal `((n+j-2)(n+j-1)/2 + n)`.
pub fn pair_index(n: u32, j: u32) -> Result<GeneratorId, TransferError> {
    assert!(n >= 1 && j >= 1, "indices start at 1");
    let (n64, j64) = (n as u64, j as u64);
    let d = n64 + j64 - 2;
    let idx = d * (d + 1) / 2 + n64;
    u32::try_from(idx)
        .ok()
        .and_then(GeneratorId::new)
        .ok_or(TransferError::PairOverflow(n64, j64))
}

/// Which space a family lives in, with the length exponent where one is
/// needed.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum FamilySpace {
    FreeInt,
    FreeReal(f64),
    DirectSum(f64),
}

impl FamilySpace {
    pub fn space(self) -> Space {
        match self {
            FamilySpace::FreeInt => Space::FreeInt,
            FamilySpace::FreeReal(_) => Space::FreeReal,
            FamilySpace::DirectSum(_) => Space::DirectSum,
        }
    }

    pub fn p(self) -> f64 {
        match self {
            FamilySpace::FreeInt => 2.0,
            FamilySpace::FreeReal(p) | FamilySpace::DirectSum(p) => p,
        }
    }
}

/// Requested family shape: `N` copies hitting the listed semigroup
/// targets. Duplicate targets are dropped on construction so family
/// elements stay pairwise distinct.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "FamilySpecRepr", into = "FamilySpecRepr")]
pub struct FamilySpec {
    space: FamilySpace,
    copies: u32,
    targets: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FamilySpecRepr {
    space: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(rename = "N")]
    n: u32,
    targets: Vec<f64>,
}

impl TryFrom<FamilySpecRepr> for FamilySpec {
    type Error = TransferError;
    fn try_from(r: FamilySpecRepr) -> Result<Self, TransferError> {
        let space = match (r.space.as_str(), r.p) {
            ("free-int", _) => FamilySpace::FreeInt,
            ("free-real", Some(p)) => FamilySpace::FreeReal(p),
            ("direct-sum", Some(p)) => FamilySpace::DirectSum(p),
            ("free-real", None) | ("direct-sum", None) => {
                return Err(TransferError::MissingP(r.space))
            }
            _ => return Err(TransferError::UnknownSpace(r.space)),
        };
        FamilySpec::new(space, r.n, &r.targets)
    }
}

impl From<FamilySpec> for FamilySpecRepr {
    fn from(s: FamilySpec) -> Self {
        let (space, p) = match s.space {
            FamilySpace::FreeInt => ("free-int", None),
            FamilySpace::FreeReal(p) => ("free-real", Some(p)),
            FamilySpace::DirectSum(p) => ("direct-sum", Some(p)),
        };
        FamilySpecRepr {
            space: space.to_string(),
            p,
            n: s.copies,
            targets: s.targets,
        }
    }
}

impl FamilySpec {
    pub fn new(space: FamilySpace, copies: u32, targets: &[f64]) -> Result<Self, TransferError> {
        if copies < 2 {
            return Err(TransferError::BadCopies(copies));
        }
        match space {
            FamilySpace::FreeReal(p) | FamilySpace::DirectSum(p) => {
                if !(p.is_finite() && p > 0.0 && p <= 2.0) {
                    return Err(TransferError::BadP(p));
                }
            }
            FamilySpace::FreeInt => {}
        }
        let mut kept: Vec<f64> = Vec::new();
        for &t in targets {
            if !t.is_finite() || t < 0.0 {
                return Err(TransferError::BadTarget(t, "must be finite and nonnegative"));
            }
            if space == FamilySpace::FreeInt && (t < 1.0 || t.fract() != 0.0) {
                return Err(TransferError::BadTarget(t, "must be a positive integer"));
            }
            if !kept.contains(&t) {
                kept.push(t);
            }
        }
        if kept.is_empty() {
            return Err(TransferError::NoTargets);
        }
        Ok(FamilySpec {
            space,
            copies,
            targets: kept,
        })
    }

    pub fn space(&self) -> FamilySpace {
        self.space
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

/// The built family: `element(n, k)` is the witness for copy `n`
/// (1-based) and target index `k` (1-based).
#[derive(Clone, PartialEq, Debug)]
pub struct WitnessFamily<W: Word> {
    targets: Vec<f64>,
    p: f64,
    /// row n-1 holds the elements of copy n, in target order
    elements: Vec<Vec<W>>,
}

impl<W: Word> WitnessFamily<W> {
    pub fn copies(&self) -> usize {
        self.elements.len()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn element(&self, n: usize, k: usize) -> &W {
        &self.elements[n - 1][k - 1]
    }

    /// Worst deviation from the defining display over all index pairs
    /// it constrains.
    pub fn max_display_error(&self) -> f64 {
        let mut worst = 0.0f64;
        let big_n = self.copies();
        let big_m = self.targets.len();
        for n in 1..=big_n {
            for j in 1..=big_m {
                let gn = self.element(n, j);
                for m in 1..=big_n {
                    for k in 1..=big_m {
                        let expected = if n == m {
                            if j != k {
                                continue;
                            }
                            0.0
                        } else {
                            self.targets[j - 1] + self.targets[k - 1]
                        };
                        let got = gn.inverse().mul(self.element(m, k)).theta(self.p);
                        worst = worst.max((got - expected).abs());
                    }
                }
            }
        }
        worst
    }

    /// Checks the defining display: `theta(g_{n,s_j}^{-1} g_{m,s_k})`
    /// equals `s_j + s_k` for `n != m` and `0` for coincident indices,
    /// within `tol` (pass `0.0` for the exact integer case).
    pub fn verify(&self, tol: f64) -> Result<(), TransferError> {
        let big_n = self.copies();
        let big_m = self.targets.len();
        for n in 1..=big_n {
            for j in 1..=big_m {
                let gn = self.element(n, j);
                for m in 1..=big_n {
                    for k in 1..=big_m {
                        let expected = if n == m {
                            if j != k {
                                continue;
                            }
                            0.0
                        } else {
                            self.targets[j - 1] + self.targets[k - 1]
                        };
                        let got = gn.inverse().mul(self.element(m, k)).theta(self.p);
                        if (got - expected).abs() > tol {
                            return Err(TransferError::InvariantViolated {
                                n,
                                j,
                                m,
                                k,
                                got,
                                expected,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Free-group family: target `j` is witnessed by the descending product
/// of `j` fresh generators, one exponent-1 block each, so every cross
/// product is reduced as written.
pub fn build_family_f(spec: &FamilySpec) -> Result<WitnessFamily<FreeWord>, TransferError> {
    if spec.space != FamilySpace::FreeInt {
        return Err(TransferError::UnknownSpace("expected free-int".to_string()));
    }
    let mut elements = Vec::new();
    for n in 1..=spec.copies {
        let mut row = Vec::new();
        for &t in &spec.targets {
            let j = t as u32;
            let blocks: Result<Vec<_>, _> =
                (1..=j).rev().map(|i| pair_index(n, i).map(|g| (g, 1i64))).collect();
            row.push(FreeWord::from_blocks(blocks?));
        }
        elements.push(row);
    }
    Ok(WitnessFamily {
        targets: spec.targets.clone(),
        p: 2.0,
        elements,
    })
}

fn real_exponent(target: f64, p: f64) -> f64 {
    target.powf(1.0 / p)
}

/// Free-real-line family: target `r_j` is witnessed by a single block
/// `g_{j,n}^{r_j^{1/p}}`; a zero target yields the identity.
pub fn build_family_r(spec: &FamilySpec) -> Result<WitnessFamily<RealFreeWord>, TransferError> {
    let p = match spec.space {
        FamilySpace::FreeReal(p) => p,
        _ => return Err(TransferError::UnknownSpace("expected free-real".to_string())),
    };
    let mut elements = Vec::new();
    for n in 1..=spec.copies {
        let mut row = Vec::new();
        for (j, &t) in spec.targets.iter().enumerate() {
            let g = pair_index(j as u32 + 1, n)?;
            row.push(RealFreeWord::from_blocks([(g, real_exponent(t, p))]));
        }
        elements.push(row);
    }
    Ok(WitnessFamily {
        targets: spec.targets.clone(),
        p,
        elements,
    })
}

/// Direct-sum family: the commutative analogue, `lambda_j` placed on the
/// coordinate indexed by `pair_index(j, n)`.
pub fn build_family_d(spec: &FamilySpec) -> Result<WitnessFamily<CoordVector>, TransferError> {
    let p = match spec.space {
        FamilySpace::DirectSum(p) => p,
        _ => return Err(TransferError::UnknownSpace("expected direct-sum".to_string())),
    };
    let mut elements = Vec::new();
    for n in 1..=spec.copies {
        let mut row = Vec::new();
        for (j, &t) in spec.targets.iter().enumerate() {
            let g = pair_index(j as u32 + 1, n)?;
            row.push(CoordVector::from_entries([(g, real_exponent(t, p))]));
        }
        elements.push(row);
    }
    Ok(WitnessFamily {
        targets: spec.targets.clone(),
        p,
        elements,
    })
}

/// Evaluates the copy-averaged quadratic form of `phi` over the family
/// with replicated coefficients `d_{n,k} = c_k`, alongside the
/// averaging defect `-(sum |c_k|)^2 phi(e) / (N-1)`.
///
/// For positive definite `phi` the averaged form dominates the defect;
/// as `N` grows the defect vanishes, forcing the length-semigroup form
/// `sum c_k c_j phidot(s_j + s_k)` to be nonnegative. The group-side
/// form is summed term by term rather than through the radial identity,
/// so the inequality is established numerically from scratch. A family
/// that fails its defining display aborts the computation.
pub fn transfer_bound_check<W: Word>(
    phi: impl Fn(&W) -> f64,
    family: &WitnessFamily<W>,
    c: &[f64],
    verify_tol: f64,
) -> Result<(f64, f64), TransferError> {
    if c.len() != family.targets.len() {
        return Err(TransferError::BadCoefficients {
            got: c.len(),
            expected: family.targets.len(),
        });
    }
    family.verify(verify_tol)?;
    let big_n = family.copies();
    let big_m = family.targets.len();
    let mut cross = 0.0;
    for n in 1..=big_n {
        for m in 1..=big_n {
            if n == m {
                continue;
            }
            for k in 1..=big_m {
                for j in 1..=big_m {
                    let g = family.element(n, k).inverse().mul(family.element(m, j));
                    cross += c[k - 1] * c[j - 1] * phi(&g);
                }
            }
        }
    }
    let quad = cross / (big_n as f64 * (big_n as f64 - 1.0));
    let abs_sum: f64 = c.iter().map(|x| x.abs()).sum();
    let phi_e = phi(&W::identity());
    let bound = -abs_sum * abs_sum * phi_e / (big_n as f64 - 1.0);
    let slack = 1e-12 * (quad.abs() + bound.abs() + 1.0);
    if quad < bound - slack {
        return Err(TransferError::BoundViolated { quad, bound });
    }
    Ok((quad, bound))
}

/// A radial function restricted to the semigroup of attained lengths:
/// lookup of `phidot(s)` at the probed points.
#[derive(Clone, Debug)]
pub struct SemigroupProfile {
    /// sorted (point, value)
    points: Vec<(f64, f64)>,
}

impl SemigroupProfile {
    pub fn eval(&self, s: f64) -> Result<f64, TransferError> {
        self.points
            .iter()
            .find(|(pt, _)| (pt - s).abs() <= 1e-9 * (1.0 + pt.abs()))
            .map(|&(_, v)| v)
            .ok_or(TransferError::UnknownPoint(s))
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Collapses a radial group function to its length profile `phidot`.
/// Each semigroup point must come with at least one probe word; where
/// two or more probes share a point their values must agree to `1e-12`
/// (relative), otherwise the disagreeing pair is reported.
pub fn radial_to_semigroup<W: Word>(
    phi: impl Fn(&W) -> f64,
    probes: &[(f64, Vec<W>)],
) -> Result<SemigroupProfile, TransferError> {
    let mut points = Vec::new();
    for (s, words) in probes {
        let first = words.first().ok_or(TransferError::NoProbes)?;
        let v0 = phi(first);
        for w in &words[1..] {
            let v = phi(w);
            if (v - v0).abs() > 1e-12 * (1.0 + v0.abs()) {
                return Err(TransferError::NotRadial {
                    point: *s,
                    w1: first.to_string(),
                    w2: w.to_string(),
                    v1: v0,
                    v2: v,
                });
            }
        }
        points.push((*s, v0));
    }
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(SemigroupProfile { points })
}
