//! Reduced-word algebra for the three ambient spaces: the free group on
//! countably many generators (integer exponents), the free real line
//! (real exponents) and the direct sum of countably many copies of the
//! reals (finitely supported coordinate vectors).
//!
//! All values are immutable once constructed and always kept in freely
//! reduced normal form, so equality is structural equality.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("malformed token `{0}`")]
    MalformedToken(String),
    #[error("zero exponent in token `{0}`")]
    ZeroExponent(String),
    #[error("generator index must be >= 1 in token `{0}`")]
    ZeroIndex(String),
    #[error("p = {0} is outside (0, 2]")]
    InvalidP(f64),
    #[error("sampling bounds must be >= 1")]
    BadBound,
}

/// 1-based index of a free generator.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct GeneratorId(u32);

impl GeneratorId {
    pub fn new(index: u32) -> Option<Self> {
        (index >= 1).then_some(GeneratorId(index))
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for GeneratorId {
    type Error = String;
    fn try_from(v: u32) -> Result<Self, String> {
        GeneratorId::new(v).ok_or_else(|| "generator index must be >= 1".to_string())
    }
}

impl From<GeneratorId> for u32 {
    fn from(g: GeneratorId) -> u32 {
        g.0
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// Common group interface used by the Gram assembly and the transfer
/// families. `theta` is the additive length functional `sum |k|^p`.
pub trait Word: Clone + PartialEq + fmt::Display {
    fn identity() -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
    fn is_identity(&self) -> bool;
    /// `sum_j |k_j|^p` over the blocks of the reduced form. Requires `0 < p <= 2`.
    fn theta(&self, p: f64) -> f64;
}

fn check_p(p: f64) -> Result<(), WordError> {
    if p.is_finite() && p > 0.0 && p <= 2.0 {
        Ok(())
    } else {
        Err(WordError::InvalidP(p))
    }
}

/// An `l^p` length together with the exact integer value when one exists
/// (the squared `l^2` length of an integer-exponent word).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LengthValue {
    pub value: f64,
    pub exact_int: Option<u128>,
}

// ---------------------------------------------------------------------------
// FreeWord: integer exponents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct BlockRepr<T> {
    g: u32,
    k: T,
}

#[derive(Serialize, Deserialize)]
struct WordRepr<T> {
    blocks: Vec<BlockRepr<T>>,
}

/// A freely reduced word of the free group: a sequence of
/// `(generator, nonzero exponent)` blocks with distinct adjacent
/// generators. The empty sequence is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "WordRepr<i64>", into = "WordRepr<i64>")]
pub struct FreeWord {
    blocks: Vec<(GeneratorId, i64)>,
}

impl TryFrom<WordRepr<i64>> for FreeWord {
    type Error = String;
    fn try_from(r: WordRepr<i64>) -> Result<Self, String> {
        let mut blocks = Vec::with_capacity(r.blocks.len());
        for b in r.blocks {
            let g = GeneratorId::new(b.g).ok_or("generator index must be >= 1")?;
            if b.k == 0 {
                return Err("zero exponent".to_string());
            }
            blocks.push((g, b.k));
        }
        Ok(FreeWord::from_blocks(blocks))
    }
}

impl From<FreeWord> for WordRepr<i64> {
    fn from(w: FreeWord) -> Self {
        WordRepr {
            blocks: w
                .blocks
                .into_iter()
                .map(|(g, k)| BlockRepr { g: g.index(), k })
                .collect(),
        }
    }
}

impl FreeWord {
    /// Builds a word from arbitrary blocks, freely reducing them with a
    /// single stack scan. Cascading cancellation is handled because each
    /// incoming block is merged against the current stack top.
    pub fn from_blocks<I>(blocks: I) -> Self
    where
        I: IntoIterator<Item = (GeneratorId, i64)>,
    {
        let mut stack: Vec<(GeneratorId, i64)> = Vec::new();
        for (g, k) in blocks {
            if k == 0 {
                continue;
            }
            match stack.last_mut() {
                Some((top, sum)) if *top == g => {
                    *sum = sum.checked_add(k).expect("exponent overflow");
                    if *sum == 0 {
                        stack.pop();
                    }
                }
                _ => stack.push((g, k)),
            }
        }
        FreeWord { blocks: stack }
    }

    /// Convenience constructor from `(index, exponent)` pairs.
    ///
    /// Panics on index 0; zero exponents are dropped by reduction.
    pub fn from_pairs(pairs: &[(u32, i64)]) -> Self {
        FreeWord::from_blocks(
            pairs
                .iter()
                .map(|&(g, k)| (GeneratorId::new(g).expect("generator index >= 1"), k)),
        )
    }

    pub fn blocks(&self) -> &[(GeneratorId, i64)] {
        &self.blocks
    }

    pub fn parse(text: &str) -> Result<Self, WordError> {
        let mut blocks = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let (g, k) = parse_token_int(tok)?;
            blocks.push((g, k));
        }
        Ok(FreeWord::from_blocks(blocks))
    }

    /// Exact squared `l^2` length, `sum k_j^2`.
    pub fn sq_length(&self) -> u128 {
        self.blocks
            .iter()
            .map(|&(_, k)| {
                let k = k.unsigned_abs() as u128;
                k.checked_mul(k).expect("squared length overflow")
            })
            .fold(0u128, |acc, x| acc.checked_add(x).expect("squared length overflow"))
    }

    pub fn lp_length_pow(&self, p: f64) -> Result<LengthValue, WordError> {
        check_p(p)?;
        if p == 2.0 {
            let sq = self.sq_length();
            return Ok(LengthValue {
                value: sq as f64,
                exact_int: Some(sq),
            });
        }
        let value = self
            .blocks
            .iter()
            .map(|&(_, k)| (k.unsigned_abs() as f64).powf(p))
            .sum();
        Ok(LengthValue {
            value,
            exact_int: None,
        })
    }

    pub fn lp_length(&self, p: f64) -> Result<LengthValue, WordError> {
        let pow = self.lp_length_pow(p)?;
        Ok(LengthValue {
            value: pow.value.powf(1.0 / p),
            exact_int: None,
        })
    }
}

impl Word for FreeWord {
    fn identity() -> Self {
        FreeWord { blocks: Vec::new() }
    }

    fn mul(&self, other: &Self) -> Self {
        FreeWord::from_blocks(self.blocks.iter().chain(other.blocks.iter()).copied())
    }

    fn inverse(&self) -> Self {
        FreeWord {
            blocks: self
                .blocks
                .iter()
                .rev()
                .map(|&(g, k)| (g, k.checked_neg().expect("exponent overflow")))
                .collect(),
        }
    }

    fn is_identity(&self) -> bool {
        self.blocks.is_empty()
    }

    fn theta(&self, p: f64) -> f64 {
        self.lp_length_pow(p).expect("valid p").value
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return write!(f, "e");
        }
        let mut first = true;
        for &(g, k) in &self.blocks {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if k == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{k}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// RealFreeWord: real exponents
// ---------------------------------------------------------------------------

/// A reduced word of the free product of copies of the real line.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "WordRepr<f64>", into = "WordRepr<f64>")]
pub struct RealFreeWord {
    blocks: Vec<(GeneratorId, f64)>,
}

impl TryFrom<WordRepr<f64>> for RealFreeWord {
    type Error = String;
    fn try_from(r: WordRepr<f64>) -> Result<Self, String> {
        let mut blocks = Vec::with_capacity(r.blocks.len());
        for b in r.blocks {
            let g = GeneratorId::new(b.g).ok_or("generator index must be >= 1")?;
            if !b.k.is_finite() {
                return Err("non-finite exponent".to_string());
            }
            if b.k == 0.0 {
                return Err("zero exponent".to_string());
            }
            blocks.push((g, b.k));
        }
        Ok(RealFreeWord::from_blocks(blocks))
    }
}

impl From<RealFreeWord> for WordRepr<f64> {
    fn from(w: RealFreeWord) -> Self {
        WordRepr {
            blocks: w
                .blocks
                .into_iter()
                .map(|(g, k)| BlockRepr { g: g.index(), k })
                .collect(),
        }
    }
}

impl RealFreeWord {
    pub fn from_blocks<I>(blocks: I) -> Self
    where
        I: IntoIterator<Item = (GeneratorId, f64)>,
    {
        let mut stack: Vec<(GeneratorId, f64)> = Vec::new();
        for (g, k) in blocks {
            if k == 0.0 {
                continue;
            }
            match stack.last_mut() {
                Some((top, sum)) if *top == g => {
                    *sum += k;
                    if *sum == 0.0 {
                        stack.pop();
                    }
                }
                _ => stack.push((g, k)),
            }
        }
        RealFreeWord { blocks: stack }
    }

    pub fn from_pairs(pairs: &[(u32, f64)]) -> Self {
        RealFreeWord::from_blocks(
            pairs
                .iter()
                .map(|&(g, k)| (GeneratorId::new(g).expect("generator index >= 1"), k)),
        )
    }

    pub fn blocks(&self) -> &[(GeneratorId, f64)] {
        &self.blocks
    }

    pub fn parse(text: &str) -> Result<Self, WordError> {
        let mut blocks = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let (g, k) = parse_token_real(tok)?;
            blocks.push((g, k));
        }
        Ok(RealFreeWord::from_blocks(blocks))
    }

    pub fn lp_length_pow(&self, p: f64) -> Result<LengthValue, WordError> {
        check_p(p)?;
        Ok(LengthValue {
            value: self.blocks.iter().map(|&(_, k)| k.abs().powf(p)).sum(),
            exact_int: None,
        })
    }

    pub fn lp_length(&self, p: f64) -> Result<LengthValue, WordError> {
        let pow = self.lp_length_pow(p)?;
        Ok(LengthValue {
            value: pow.value.powf(1.0 / p),
            exact_int: None,
        })
    }
}

impl Word for RealFreeWord {
    fn identity() -> Self {
        RealFreeWord { blocks: Vec::new() }
    }

    fn mul(&self, other: &Self) -> Self {
        RealFreeWord::from_blocks(self.blocks.iter().chain(other.blocks.iter()).copied())
    }

    fn inverse(&self) -> Self {
        RealFreeWord {
            blocks: self.blocks.iter().rev().map(|&(g, k)| (g, -k)).collect(),
        }
    }

    fn is_identity(&self) -> bool {
        self.blocks.is_empty()
    }

    fn theta(&self, p: f64) -> f64 {
        self.lp_length_pow(p).expect("valid p").value
    }
}

impl fmt::Display for RealFreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return write!(f, "e");
        }
        let mut first = true;
        for &(g, k) in &self.blocks {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{g}^{k}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// CoordVector: finitely supported vectors in the direct sum
// ---------------------------------------------------------------------------

/// A finitely supported map coordinate index -> nonzero real. The group
/// law is coordinatewise addition.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "CoordRepr", into = "CoordRepr")]
pub struct CoordVector {
    entries: BTreeMap<GeneratorId, f64>,
}

#[derive(Serialize, Deserialize)]
struct CoordRepr {
    entries: BTreeMap<String, f64>,
}

impl TryFrom<CoordRepr> for CoordVector {
    type Error = String;
    fn try_from(r: CoordRepr) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (key, v) in r.entries {
            let idx: u32 = key.parse().map_err(|_| format!("bad coordinate key `{key}`"))?;
            let g = GeneratorId::new(idx).ok_or("coordinate index must be >= 1")?;
            if !v.is_finite() {
                return Err("non-finite entry".to_string());
            }
            if v != 0.0 {
                entries.insert(g, v);
            }
        }
        Ok(CoordVector { entries })
    }
}

impl From<CoordVector> for CoordRepr {
    fn from(c: CoordVector) -> Self {
        CoordRepr {
            entries: c
                .entries
                .into_iter()
                .map(|(g, v)| (g.index().to_string(), v))
                .collect(),
        }
    }
}

impl CoordVector {
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (GeneratorId, f64)>,
    {
        let mut map: BTreeMap<GeneratorId, f64> = BTreeMap::new();
        for (g, v) in entries {
            let sum = map.entry(g).or_insert(0.0);
            *sum += v;
            if *sum == 0.0 {
                map.remove(&g);
            }
        }
        CoordVector { entries: map }
    }

    pub fn from_pairs(pairs: &[(u32, f64)]) -> Self {
        CoordVector::from_entries(
            pairs
                .iter()
                .map(|&(g, v)| (GeneratorId::new(g).expect("coordinate index >= 1"), v)),
        )
    }

    pub fn entries(&self) -> &BTreeMap<GeneratorId, f64> {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self, WordError> {
        let mut entries = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let (g, k) = parse_token_real(tok)?;
            entries.push((g, k));
        }
        Ok(CoordVector::from_entries(entries))
    }

    pub fn lp_length_pow(&self, p: f64) -> Result<LengthValue, WordError> {
        check_p(p)?;
        Ok(LengthValue {
            value: self.entries.values().map(|v| v.abs().powf(p)).sum(),
            exact_int: None,
        })
    }

    pub fn lp_length(&self, p: f64) -> Result<LengthValue, WordError> {
        let pow = self.lp_length_pow(p)?;
        Ok(LengthValue {
            value: pow.value.powf(1.0 / p),
            exact_int: None,
        })
    }
}

impl Word for CoordVector {
    fn identity() -> Self {
        CoordVector {
            entries: BTreeMap::new(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        CoordVector::from_entries(
            self.entries
                .iter()
                .chain(other.entries.iter())
                .map(|(&g, &v)| (g, v)),
        )
    }

    fn inverse(&self) -> Self {
        CoordVector {
            entries: self.entries.iter().map(|(&g, &v)| (g, -v)).collect(),
        }
    }

    fn is_identity(&self) -> bool {
        self.entries.is_empty()
    }

    fn theta(&self, p: f64) -> f64 {
        self.lp_length_pow(p).expect("valid p").value
    }
}

impl fmt::Display for CoordVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "e");
        }
        let mut first = true;
        for (g, v) in &self.entries {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{g}^{v}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Space {
    FreeInt,
    FreeReal,
    DirectSum,
}

#[derive(Clone, PartialEq, Debug)]
pub enum Element {
    Free(FreeWord),
    Real(RealFreeWord),
    Coord(CoordVector),
}

/// Parses whitespace-separated `g<i>^<k>` tokens (exponent optional,
/// default 1) or the identity token `e` into a reduced element of the
/// requested space.
pub fn parse_word(text: &str, space: Space) -> Result<Element, WordError> {
    match space {
        Space::FreeInt => FreeWord::parse(text).map(Element::Free),
        Space::FreeReal => RealFreeWord::parse(text).map(Element::Real),
        Space::DirectSum => CoordVector::parse(text).map(Element::Coord),
    }
}

fn split_token(tok: &str) -> Result<(GeneratorId, Option<&str>), WordError> {
    let body = tok
        .strip_prefix('g')
        .ok_or_else(|| WordError::MalformedToken(tok.to_string()))?;
    let (idx_part, exp_part) = match body.split_once('^') {
        Some((i, e)) => (i, Some(e)),
        None => (body, None),
    };
    let idx: u32 = idx_part
        .parse()
        .map_err(|_| WordError::MalformedToken(tok.to_string()))?;
    let g = GeneratorId::new(idx).ok_or_else(|| WordError::ZeroIndex(tok.to_string()))?;
    Ok((g, exp_part))
}

fn parse_token_int(tok: &str) -> Result<(GeneratorId, i64), WordError> {
    let (g, exp) = split_token(tok)?;
    let k = match exp {
        None => 1,
        Some(e) => e
            .parse::<i64>()
            .map_err(|_| WordError::MalformedToken(tok.to_string()))?,
    };
    if k == 0 {
        return Err(WordError::ZeroExponent(tok.to_string()));
    }
    Ok((g, k))
}

fn parse_token_real(tok: &str) -> Result<(GeneratorId, f64), WordError> {
    let (g, exp) = split_token(tok)?;
    let k = match exp {
        None => 1.0,
        Some(e) => {
            let v = e
                .parse::<f64>()
                .map_err(|_| WordError::MalformedToken(tok.to_string()))?;
            if !v.is_finite() {
                return Err(WordError::MalformedToken(tok.to_string()));
            }
            v
        }
    };
    if k == 0.0 {
        return Err(WordError::ZeroExponent(tok.to_string()));
    }
    Ok((g, k))
}

// ---------------------------------------------------------------------------
// Random sampling
// ---------------------------------------------------------------------------

/// Draws a reduced word with `1..=max_blocks` blocks, generator indices
/// in `1..=max_gen` (no adjacent repeats) and nonzero exponents in
/// `[-max_exp, max_exp]`. Deterministic for a fixed seed.
pub fn random_word(
    seed: u64,
    max_blocks: u32,
    max_exp: u32,
    max_gen: u32,
) -> Result<FreeWord, WordError> {
    if max_blocks < 1 || max_exp < 1 || max_gen < 1 {
        return Err(WordError::BadBound);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_word_with(&mut rng, max_blocks, max_exp, max_gen))
}

/// As `random_word` but driven by a caller-owned generator, for campaigns
/// that split one master seed across many draws.
pub fn random_word_with(
    rng: &mut impl Rng,
    max_blocks: u32,
    max_exp: u32,
    max_gen: u32,
) -> FreeWord {
    let nblocks = if max_gen == 1 {
        1
    } else {
        rng.gen_range(1..=max_blocks)
    };
    let mut blocks = Vec::with_capacity(nblocks as usize);
    let mut prev: Option<u32> = None;
    for _ in 0..nblocks {
        let g = loop {
            let g = rng.gen_range(1..=max_gen);
            if Some(g) != prev {
                break g;
            }
        };
        prev = Some(g);
        let mag = rng.gen_range(1..=max_exp) as i64;
        let k = if rng.gen_bool(0.5) { mag } else { -mag };
        blocks.push((GeneratorId::new(g).unwrap(), k));
    }
    FreeWord::from_blocks(blocks)
}

/// Random reduced element of the free real line; exponent magnitudes are
/// kept in `[0.1, max_amp]` so blocks stay numerically nonzero.
pub fn random_real_word_with(rng: &mut impl Rng, max_blocks: u32, max_amp: f64, max_gen: u32) -> RealFreeWord {
    let nblocks = if max_gen == 1 {
        1
    } else {
        rng.gen_range(1..=max_blocks)
    };
    let mut blocks = Vec::with_capacity(nblocks as usize);
    let mut prev: Option<u32> = None;
    for _ in 0..nblocks {
        let g = loop {
            let g = rng.gen_range(1..=max_gen);
            if Some(g) != prev {
                break g;
            }
        };
        prev = Some(g);
        let mag = rng.gen_range(0.1..max_amp);
        let k = if rng.gen_bool(0.5) { mag } else { -mag };
        blocks.push((GeneratorId::new(g).unwrap(), k));
    }
    RealFreeWord::from_blocks(blocks)
}

/// Random finitely supported coordinate vector with entries in
/// `[-max_amp, -0.1] U [0.1, max_amp]`.
pub fn random_coord_vector_with(rng: &mut impl Rng, max_support: u32, max_amp: f64, max_gen: u32) -> CoordVector {
    let support = rng.gen_range(1..=max_support.min(max_gen));
    let mut entries = Vec::new();
    let mut used = Vec::new();
    for _ in 0..support {
        let g = loop {
            let g = rng.gen_range(1..=max_gen);
            if !used.contains(&g) {
                break g;
            }
        };
        used.push(g);
        let mag = rng.gen_range(0.1..max_amp);
        let v = if rng.gen_bool(0.5) { mag } else { -mag };
        entries.push((GeneratorId::new(g).unwrap(), v));
    }
    CoordVector::from_entries(entries)
}
