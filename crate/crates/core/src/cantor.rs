//! The middle-1/α Cantor set: contraction ratio, address words, level
//! intervals and exact evaluation of points.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{int, pow_u, ratstr, Rational};

pub const DEFAULT_DEPTH_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CantorError {
    #[error("contraction ratio r = {0} must lie in (0, 1/2)")]
    BadRatio(String),
    #[error("alpha = {0} must exceed 1")]
    BadAlpha(String),
    #[error("depth {depth} exceeds the enumeration cap {cap}")]
    DepthCap { depth: usize, cap: usize },
    #[error("invalid word {0:?}: only '0' and '1' allowed")]
    BadWord(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct CantorParams {
    r: Rational,
    alpha: Rational,
    lambda: Rational,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    #[serde(with = "ratstr")]
    r: Rational,
}

impl TryFrom<ParamsRepr> for CantorParams {
    type Error = CantorError;
    fn try_from(p: ParamsRepr) -> Result<Self, CantorError> {
        CantorParams::new(p.r)
    }
}

impl From<CantorParams> for ParamsRepr {
    fn from(p: CantorParams) -> Self {
        ParamsRepr { r: p.r }
    }
}

impl CantorParams {
    pub fn new(r: Rational) -> Result<Self, CantorError> {
        if !r.is_positive() || r >= Rational::new(1.into(), 2.into()) {
            return Err(CantorError::BadRatio(r.to_string()));
        }
        let alpha = (Rational::one() - &r * int(2)).recip();
        let lambda = r.recip() - int(2);
        Ok(Self { r, alpha, lambda })
    }

    /// From α > 1 via r = (1 − 1/α)/2.
    pub fn from_alpha(alpha: Rational) -> Result<Self, CantorError> {
        if alpha <= Rational::one() {
            return Err(CantorError::BadAlpha(alpha.to_string()));
        }
        Self::new((Rational::one() - alpha.recip()) / int(2))
    }

    /// The classical middle-thirds set.
    pub fn ternary() -> Self {
        Self::new(Rational::new(1.into(), 3.into())).unwrap()
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn one_minus_r(&self) -> Rational {
        Rational::one() - &self.r
    }

    pub fn r_pow(&self, n: usize) -> Rational {
        pow_u(&self.r, n as u64)
    }
}

/// Finite binary address σ₁σ₂…σₙ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SymbolWord {
    bits: Vec<bool>,
}

impl SymbolWord {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![false; n] }
    }

    pub fn ones(n: usize) -> Self {
        Self { bits: vec![true; n] }
    }

    /// The `n`-bit word whose bits are the binary digits of `index`, most
    /// significant first. Word order matches left-endpoint order.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self {
            bits: (0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut w = self.clone();
        w.bits.push(bit);
        w
    }

    pub fn concat(&self, other: &SymbolWord) -> Self {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Self { bits }
    }

    pub fn prepend_zeros(&self, l: usize) -> Self {
        let mut bits = vec![false; l];
        bits.extend_from_slice(&self.bits);
        Self { bits }
    }

    pub fn with_bit(&self, i: usize, bit: bool) -> Self {
        let mut w = self.clone();
        w.bits[i] = bit;
        w
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for SymbolWord {
    type Err = CantorError;
    fn from_str(s: &str) -> Result<Self, CantorError> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(CantorError::BadWord(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(SymbolWord::new)
    }
}

impl Serialize for SymbolWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SymbolWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Left endpoint g_σ(0) = Σ_{σᵢ=1} (1−r) r^(i−1).
pub fn eval_prefix(params: &CantorParams, word: &SymbolWord) -> Rational {
    let step = params.one_minus_r();
    let mut scale = Rational::one();
    let mut u = Rational::zero();
    for &b in word.bits() {
        if b {
            u += &step * &scale;
        }
        scale *= params.r();
    }
    u
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelInterval {
    pub word: SymbolWord,
    #[serde(with = "ratstr")]
    pub lo: Rational,
    #[serde(with = "ratstr")]
    pub hi: Rational,
}

impl LevelInterval {
    pub fn new(params: &CantorParams, word: SymbolWord) -> Self {
        let lo = eval_prefix(params, &word);
        let hi = &lo + params.r_pow(word.len());
        Self { word, lo, hi }
    }

    pub fn root() -> Self {
        Self { word: SymbolWord::empty(), lo: Rational::zero(), hi: Rational::one() }
    }

    pub fn depth(&self) -> usize {
        self.word.len()
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// `I_{u,bit}` computed incrementally from the parent.
    pub fn child(&self, params: &CantorParams, bit: bool) -> Self {
        let w = self.width();
        let word = self.word.child(bit);
        if bit {
            let lo = &self.lo + params.one_minus_r() * &w;
            Self { word, lo, hi: self.hi.clone() }
        } else {
            let hi = &self.lo + params.r() * &w;
            Self { word, lo: self.lo.clone(), hi }
        }
    }
}

/// How a finite word continues to a point of the set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Unresolved: the point lies somewhere in the word's level interval.
    Open,
    /// Followed by 0^∞: the left endpoint.
    Zeros,
    /// Followed by 1^∞: the right endpoint.
    Ones,
    /// Followed by the block repeated forever.
    Periodic(SymbolWord),
}

/// A word with a tail. Exact tails name a single point of C_α; an open tail
/// names a level interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CantorPoint {
    pub word: SymbolWord,
    pub tail: Tail,
}

impl CantorPoint {
    pub fn new(word: SymbolWord, tail: Tail) -> Self {
        Self { word, tail }
    }

    pub fn zero() -> Self {
        Self::new(SymbolWord::empty(), Tail::Zeros)
    }

    /// The point 1 − r, i.e. word "1" followed by zeros.
    pub fn one_minus_r() -> Self {
        Self::new(SymbolWord::ones(1), Tail::Zeros)
    }

    pub fn open(word: SymbolWord) -> Self {
        Self::new(word, Tail::Open)
    }

    pub fn is_exact(&self) -> bool {
        self.tail != Tail::Open
    }

    /// Exact range of the point: a single value unless the tail is open.
    pub fn range(&self, params: &CantorParams) -> (Rational, Rational) {
        let u = eval_prefix(params, &self.word);
        let rn = params.r_pow(self.word.len());
        match &self.tail {
            Tail::Open => {
                let hi = &u + rn;
                (u, hi)
            }
            Tail::Zeros => (u.clone(), u),
            Tail::Ones => {
                let v = u + rn;
                (v.clone(), v)
            }
            Tail::Periodic(block) => {
                let p = block.len();
                let b = eval_prefix(params, block);
                let v = if p == 0 {
                    u
                } else {
                    u + rn * b / (Rational::one() - params.r_pow(p))
                };
                (v.clone(), v)
            }
        }
    }

    /// Left end of the range; the value itself for exact points.
    pub fn value(&self, params: &CantorParams) -> Rational {
        self.range(params).0
    }

    /// Scaling by r^l: prepend l zeros.
    pub fn prepend_zeros(&self, l: usize) -> Self {
        Self::new(self.word.prepend_zeros(l), self.tail.clone())
    }
}

fn check_cap(n: usize, cap: usize) -> Result<(), CantorError> {
    if n > cap {
        Err(CantorError::DepthCap { depth: n, cap })
    } else {
        Ok(())
    }
}

/// L_n in ascending order.
pub fn left_endpoints(params: &CantorParams, n: usize, cap: usize) -> Result<Vec<Rational>, CantorError> {
    Ok(truncation_cover(params, n, cap)?.into_iter().map(|i| i.lo).collect())
}

/// The 2^n intervals of F_n in ascending order.
pub fn truncation_cover(params: &CantorParams, n: usize, cap: usize) -> Result<Vec<LevelInterval>, CantorError> {
    check_cap(n, cap)?;
    let mut level = vec![LevelInterval::root()];
    for _ in 0..n {
        level = level
            .iter()
            .flat_map(|i| [i.child(params, false), i.child(params, true)])
            .collect();
    }
    Ok(level)
}
