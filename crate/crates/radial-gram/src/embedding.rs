//! The explicit map from reduced integer words into the free Hilbert
//! space of prefix keys: a word with blocks `(a_j, k_j)` is sent to the
//! vector with coefficient `k_j` at the key
//! `a_1^{k_1} ... a_{j-1}^{k_{j-1}} a_j`. Squared distances between
//! images realize squared `l^2` word lengths exactly, in integer
//! arithmetic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::words::FreeWord;

/// Finitely supported integer vector indexed by canonical prefix-word
/// keys. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "EmbeddingRepr", into = "EmbeddingRepr")]
pub struct EmbeddingVector {
    support: BTreeMap<String, i64>,
}

#[derive(Serialize, Deserialize)]
struct CoeffRepr {
    key: String,
    c: i64,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingRepr {
    coeffs: Vec<CoeffRepr>,
}

impl TryFrom<EmbeddingRepr> for EmbeddingVector {
    type Error = String;
    fn try_from(r: EmbeddingRepr) -> Result<Self, String> {
        let mut support = BTreeMap::new();
        for c in r.coeffs {
            if c.c == 0 {
                return Err("zero coefficient".to_string());
            }
            if support.insert(c.key.clone(), c.c).is_some() {
                return Err(format!("duplicate key `{}`", c.key));
            }
        }
        Ok(EmbeddingVector { support })
    }
}

impl From<EmbeddingVector> for EmbeddingRepr {
    fn from(v: EmbeddingVector) -> Self {
        EmbeddingRepr {
            coeffs: v
                .support
                .into_iter()
                .map(|(key, c)| CoeffRepr { key, c })
                .collect(),
        }
    }
}

impl EmbeddingVector {
    pub fn empty() -> Self {
        EmbeddingVector {
            support: BTreeMap::new(),
        }
    }

    pub fn support(&self) -> &BTreeMap<String, i64> {
        &self.support
    }

    /// Exact squared norm `sum c^2`.
    pub fn sq_norm(&self) -> u128 {
        self.support
            .values()
            .map(|&c| {
                let c = c.unsigned_abs() as u128;
                c * c
            })
            .sum()
    }
}

/// Image of a reduced word; the support size equals the block count.
pub fn embed(g: &FreeWord) -> EmbeddingVector {
    let mut support = BTreeMap::new();
    let mut prefix: Vec<(crate::words::GeneratorId, i64)> = Vec::new();
    for &(gen, k) in g.blocks() {
        prefix.push((gen, 1));
        let key = FreeWord::from_blocks(prefix.iter().copied()).to_string();
        support.insert(key, k);
        let last = prefix.last_mut().unwrap();
        last.1 = k;
    }
    EmbeddingVector { support }
}

/// Exact `sum (u_k - v_k)^2` over the union of supports.
pub fn sq_distance(u: &EmbeddingVector, v: &EmbeddingVector) -> u128 {
    let mut total: u128 = 0;
    let mut a = u.support.iter().peekable();
    let mut b = v.support.iter().peekable();
    loop {
        let d: i128 = match (a.peek(), b.peek()) {
            (Some(&(ka, &ca)), Some(&(kb, &cb))) => match ka.cmp(kb) {
                std::cmp::Ordering::Less => {
                    a.next();
                    ca as i128
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                    -(cb as i128)
                }
                std::cmp::Ordering::Equal => {
                    a.next();
                    b.next();
                    ca as i128 - cb as i128
                }
            },
            (Some((_, &ca)), None) => {
                a.next();
                ca as i128
            }
            (None, Some((_, &cb))) => {
                b.next();
                -(cb as i128)
            }
            (None, None) => break,
        };
        let m = d.unsigned_abs();
        total = total
            .checked_add(m.checked_mul(m).expect("distance overflow"))
            .expect("distance overflow");
    }
    total
}

/// The four divergence patterns a reduced pair can exhibit, after
/// swapping so the second word is the longer one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PairCase {
    /// One word is a prefix subword of the other (possibly the identity,
    /// possibly ending inside a block with the same sign).
    Prefix,
    /// At the first differing block the exponents carry opposite signs.
    OppositeSign,
    /// The first differing block uses a different generator.
    NewGenerator,
    /// Divergence happens strictly inside a block: same generator, same
    /// sign, and the word with the smaller exponent keeps going.
    InteriorSplit,
}

/// Diagnostic classifier for test stratification; `embed` itself is
/// case-free.
pub fn classify_pair(f: &FreeWord, g: &FreeWord) -> PairCase {
    let l1 = |w: &FreeWord| w.blocks().iter().map(|&(_, k)| k.unsigned_abs() as u128).sum::<u128>();
    let (f, g) = if (l1(f), f.blocks().len()) > (l1(g), g.blocks().len()) {
        (g, f)
    } else {
        (f, g)
    };
    let fb = f.blocks();
    let gb = g.blocks();
    let mut i = 0;
    while i < fb.len() && i < gb.len() && fb[i] == gb[i] {
        i += 1;
    }
    if i == fb.len() || i == gb.len() {
        return PairCase::Prefix;
    }
    let (fg, fk) = fb[i];
    let (gg, gk) = gb[i];
    if fg != gg {
        return PairCase::NewGenerator;
    }
    if fk.signum() != gk.signum() {
        return PairCase::OppositeSign;
    }
    // Same generator, same sign, distinct exponents.
    let small_ends = if fk.abs() < gk.abs() {
        i + 1 == fb.len()
    } else {
        i + 1 == gb.len()
    };
    if small_ends {
        PairCase::Prefix
    } else {
        PairCase::InteriorSplit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{random_word, Word};

    fn w(text: &str) -> FreeWord {
        FreeWord::parse(text).unwrap()
    }

    #[test]
    fn embed_identity_is_empty() {
        assert_eq!(embed(&FreeWord::identity()), EmbeddingVector::empty());
    }

    #[test]
    fn embed_formula() {
        let v = embed(&w("g1^2 g2^-1"));
        let mut expected = BTreeMap::new();
        expected.insert("g1".to_string(), 2);
        expected.insert("g1^2 g2".to_string(), -1);
        assert_eq!(v.support(), &expected);
    }

    #[test]
    fn embed_single_block_norm() {
        assert_eq!(embed(&w("g1^3")).sq_norm(), 9);
    }

    #[test]
    fn sq_distance_basics() {
        let u = embed(&w("g1^2 g2^-1"));
        assert_eq!(sq_distance(&u, &u), 0);
        // ||g1^-1 g1^2 g2^-1||^2 = ||g1 g2^-1||^2 = 2
        let v = embed(&w("g1"));
        assert_eq!(sq_distance(&u, &v), 2);
        let g = w("g2^3 g1^-2");
        assert_eq!(sq_distance(&embed(&g), &EmbeddingVector::empty()), g.sq_length());
    }

    #[test]
    fn classify_cases() {
        assert_eq!(classify_pair(&w("g1^2"), &w("g1^2 g2")), PairCase::Prefix);
        assert_eq!(classify_pair(&w("g1^-1"), &w("g1^2")), PairCase::OppositeSign);
        assert_eq!(classify_pair(&w("g2"), &w("g1")), PairCase::NewGenerator);
        assert_eq!(
            classify_pair(&w("g1 g2^2"), &w("g1^3 g2")),
            PairCase::InteriorSplit
        );
        assert_eq!(classify_pair(&w("e"), &w("g1^2")), PairCase::Prefix);
        assert_eq!(classify_pair(&w("g1"), &w("g1^3")), PairCase::Prefix);
    }

    #[test]
    fn classification_is_symmetric_on_samples() {
        for seed in 0..500 {
            let f = random_word(seed, 4, 3, 3).unwrap();
            let g = random_word(seed + 10_000, 4, 3, 3).unwrap();
            assert_eq!(classify_pair(&f, &g), classify_pair(&g, &f));
        }
    }

    #[test]
    fn isometry_on_samples() {
        for seed in 0..2000 {
            let f = random_word(seed, 5, 3, 3).unwrap();
            let g = random_word(seed + 50_000, 5, 3, 3).unwrap();
            let d = sq_distance(&embed(&f), &embed(&g));
            assert_eq!(d, f.inverse().mul(&g).sq_length(), "f={f} g={g}");
        }
    }

    #[test]
    fn json_shape() {
        let v = embed(&w("g1^2 g2^-1"));
        let js = serde_json::to_string(&v).unwrap();
        assert_eq!(
            js,
            r#"{"coeffs":[{"key":"g1","c":2},{"key":"g1^2 g2","c":-1}]}"#
        );
        assert_eq!(serde_json::from_str::<EmbeddingVector>(&js).unwrap(), v);
    }
}
