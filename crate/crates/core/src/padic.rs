//! Truncated p-adic integers, the p-adic Cantor set
//! C_γ = { Σ a_n γ^n : a_n ∈ {0, γ − 1} }, and decompositions of p-adic
//! integers as sums of elements or m-th powers of elements of C_γ.
//!
//! An element of C_γ is addressed by a selection word w: the point
//! Σ_{n : w_n = 1} (γ − 1) γ^n.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::SymbolWord;
use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("γ must satisfy p^u > 2 with u = v_p(γ) ≥ 1")]
    BadGamma,
    #[error("denominator divisible by p = {0}")]
    NotIntegral(u32),
    #[error("{0} is not a unit")]
    NotUnit(String),
    #[error("exponent must be at least {min}, got {m}")]
    BadExponent { m: u32, min: u32 },
    #[error("truncation of {have} digits is below the {need} needed for one induction step")]
    TruncationTooShort { have: usize, need: usize },
    #[error("residue search over {count} items exceeds the budget {budget}")]
    BudgetExceeded { count: String, budget: u64 },
    #[error("the residue sums of m-th powers never cover Z/p^{0}")]
    NeverCovers(usize),
    #[error("digit {digit} out of range for p = {p}")]
    BadDigit { digit: u32, p: u32 },
}

pub type Result<T> = std::result::Result<T, PadicError>;

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn modulus(p: u32, n: usize) -> BigUint {
    BigUint::from(p).pow(n as u32)
}

/// An element of Z/p^N, read as a p-adic integer known to N digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicInt {
    p: u32,
    n: usize,
    value: BigUint,
}

#[derive(Serialize, Deserialize)]
struct PadicRepr {
    p: u32,
    digits: Vec<u32>,
}

impl Serialize for PadicInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PadicRepr { p: self.p, digits: self.digits() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicInt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PadicRepr::deserialize(d)?;
        PadicInt::from_digits(r.p, &r.digits).map_err(serde::de::Error::custom)
    }
}

impl PadicInt {
    pub fn from_bigint(p: u32, x: &BigInt, n: usize) -> Self {
        let m = BigInt::from(modulus(p, n));
        let v = x.mod_floor(&m).to_biguint().expect("non-negative after mod_floor");
        Self { p, n, value: v }
    }

    pub fn from_i64(p: u32, x: i64, n: usize) -> Self {
        Self::from_bigint(p, &BigInt::from(x), n)
    }

    /// A rational whose denominator is prime to p.
    pub fn from_rational(p: u32, q: &Rational, n: usize) -> Result<Self> {
        let num = Self::from_bigint(p, q.numer(), n);
        let den = Self::from_bigint(p, q.denom(), n);
        if den.value.is_multiple_of(&BigUint::from(p)) {
            return Err(PadicError::NotIntegral(p));
        }
        Ok(&num * &den.inverse()?)
    }

    /// Least significant digit first.
    pub fn from_digits(p: u32, digits: &[u32]) -> Result<Self> {
        let mut v = BigUint::zero();
        for &d in digits.iter().rev() {
            if d >= p {
                return Err(PadicError::BadDigit { digit: d, p });
            }
            v = v * p + d;
        }
        Ok(Self { p, n: digits.len(), value: v })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Truncation depth N.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn digits(&self) -> Vec<u32> {
        let mut v = self.value.clone();
        (0..self.n)
            .map(|_| {
                let (q, r) = v.div_rem(&BigUint::from(self.p));
                v = q;
                r.to_u32().unwrap()
            })
            .collect()
    }

    /// Index of the first nonzero digit; None when all N digits vanish.
    pub fn valuation(&self) -> Option<usize> {
        self.digits().iter().position(|&d| d != 0)
    }

    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.n);
        Self { p: self.p, n, value: &self.value % modulus(self.p, n) }
    }

    /// Congruence mod p^k, with k capped by both truncations.
    pub fn congruent(&self, other: &Self, k: usize) -> bool {
        let k = k.min(self.n).min(other.n);
        self.truncate(k).value == other.truncate(k).value
    }

    pub fn inverse(&self) -> Result<Self> {
        let m = BigInt::from(modulus(self.p, self.n));
        let a = BigInt::from_biguint(Sign::Plus, self.value.clone());
        let g = a.extended_gcd(&m);
        if !g.gcd.is_one() {
            return Err(PadicError::NotUnit(self.to_string()));
        }
        Ok(Self::from_bigint(self.p, &g.x, self.n))
    }

    pub fn pow(&self, e: u32) -> Self {
        let m = modulus(self.p, self.n);
        Self { p: self.p, n: self.n, value: self.value.modpow(&BigUint::from(e), &m) }
    }

    /// x / p^k for x divisible by p^k; the result is known to N − k digits.
    pub fn div_p_pow(&self, k: usize) -> Self {
        let d = modulus(self.p, k);
        assert!(self.value.is_multiple_of(&d), "{self} is not divisible by {}^{k}", self.p);
        Self { p: self.p, n: self.n - k, value: &self.value / d }
    }

    pub fn scale(&self, k: u64) -> Self {
        self * &Self::from_bigint(self.p, &BigInt::from(k), self.n)
    }

    fn combine(&self, o: &Self, f: impl Fn(BigInt, BigInt) -> BigInt) -> Self {
        assert_eq!(self.p, o.p, "mixed primes");
        let n = self.n.min(o.n);
        let a = BigInt::from(self.value.clone());
        let b = BigInt::from(o.value.clone());
        Self::from_bigint(self.p, &f(a, b), n)
    }
}

impl Add for &PadicInt {
    type Output = PadicInt;
    fn add(self, o: &PadicInt) -> PadicInt {
        self.combine(o, |a, b| a + b)
    }
}

impl Sub for &PadicInt {
    type Output = PadicInt;
    fn sub(self, o: &PadicInt) -> PadicInt {
        self.combine(o, |a, b| a - b)
    }
}

impl Mul for &PadicInt {
    type Output = PadicInt;
    fn mul(self, o: &PadicInt) -> PadicInt {
        self.combine(o, |a, b| a * b)
    }
}

impl Neg for &PadicInt {
    type Output = PadicInt;
    fn neg(self) -> PadicInt {
        PadicInt::from_bigint(self.p, &-BigInt::from(self.value.clone()), self.n)
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d: Vec<String> = self.digits().iter().map(|d| d.to_string()).collect();
        write!(f, "{} (base {})", d.join(" "), self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicCantorParams {
    pub p: u32,
    pub gamma: PadicInt,
    pub u: usize,
    /// γ = p^u γ₁ with γ₁ a unit.
    pub gamma1: PadicInt,
}

impl PadicCantorParams {
    /// γ given mod p^n; needs v_p(γ) = u ≥ 1 and p^u > 2.
    pub fn new(p: u32, gamma: PadicInt) -> Result<Self> {
        if !is_prime(p) {
            return Err(PadicError::NotPrime(p));
        }
        assert_eq!(gamma.p(), p);
        let u = gamma.valuation().filter(|&u| u >= 1).ok_or(PadicError::BadGamma)?;
        if p == 2 && u < 2 {
            return Err(PadicError::BadGamma);
        }
        let gamma1 = gamma.div_p_pow(u);
        Ok(Self { p, gamma, u, gamma1 })
    }

    pub fn from_integer(p: u32, gamma: i64, n: usize) -> Result<Self> {
        Self::new(p, PadicInt::from_i64(p, gamma, n))
    }

    pub fn from_rational(p: u32, gamma: &Rational, n: usize) -> Result<Self> {
        Self::new(p, PadicInt::from_rational(p, gamma, n)?)
    }

    /// Truncation depth of γ.
    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn element(&self, x: i64) -> PadicInt {
        PadicInt::from_i64(self.p, x, self.len())
    }

    /// γ − 1, a unit.
    pub fn gm1(&self) -> PadicInt {
        &self.gamma - &self.element(1)
    }

    /// p^u − 1, the least number of summands needed for sums of elements.
    pub fn linear_count(&self) -> usize {
        (self.p as usize).pow(self.u as u32) - 1
    }

    /// The point of C_γ addressed by `word`.
    pub fn eval(&self, word: &SymbolWord) -> PadicInt {
        let gm1 = self.gm1();
        let mut acc = self.element(0);
        let mut g = self.element(1);
        for &b in word.bits() {
            if b {
                acc = &acc + &(&gm1 * &g);
            }
            g = &g * &self.gamma;
        }
        acc
    }
}

/// Greedy base-γ digits b_n ∈ {0, …, p^u − 1} of x, floor(N/u) of them;
/// Σ b_n γ^n ≡ x mod p^(u·len).
pub fn base_gamma_digits(x: &PadicInt, params: &PadicCantorParams) -> Vec<u64> {
    let u = params.u;
    let pu = BigUint::from(params.p).pow(u as u32);
    let g1inv = params.gamma1.inverse().expect("γ₁ is a unit");
    let mut cur = x.clone();
    let mut out = Vec::new();
    while cur.len() >= u && cur.len() > 0 {
        let b = cur.value() % &pu;
        out.push(b.to_u64().expect("digit fits"));
        let bb = PadicInt::from_bigint(params.p, &BigInt::from(b), cur.len());
        let q = (&cur - &bb).div_p_pow(u);
        cur = &q * &g1inv.truncate(q.len());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicCertificate {
    pub params: PadicCantorParams,
    pub target: PadicInt,
    pub m: u32,
    pub summands: Vec<SymbolWord>,
    /// Σ x_i^m ≡ target mod p^congruence_depth.
    pub congruence_depth: usize,
}

impl PadicCertificate {
    pub fn sum(&self) -> PadicInt {
        self.summands
            .iter()
            .fold(self.params.element(0), |acc, w| &acc + &self.params.eval(w).pow(self.m))
    }

    pub fn verify(&self) -> bool {
        let depth = self.congruence_depth.min(self.params.len()).min(self.target.len());
        self.sum().congruent(&self.target, depth)
    }
}

/// target as a sum of exactly p^u − 1 elements of C_γ: write
/// target/(γ − 1) = Σ b_n γ^n and let summand i take position n iff b_n ≥ i.
pub fn decompose_linear(target: &PadicInt, params: &PadicCantorParams) -> PadicCertificate {
    let n = target.len().min(params.len());
    let x = &target.truncate(n) * &params.gm1().truncate(n).inverse().expect("γ − 1 is a unit");
    let digits = base_gamma_digits(&x, params);
    let summands = (1..=params.linear_count() as u64)
        .map(|i| SymbolWord::new(digits.iter().map(|&b| b >= i).collect()))
        .collect();
    PadicCertificate {
        params: params.clone(),
        target: target.clone(),
        m: 1,
        summands,
        congruence_depth: params.u * digits.len(),
    }
}

/// Summand count of the m-th power construction:
/// p^(u+v) − 1 + p^u − 1 for p ≥ 3 and 2^(2u+v) − 1 + 2^u − 1 for p = 2.
pub fn power_count(params: &PadicCantorParams, m: u32) -> usize {
    let (v, _) = split_exponent(params.p, m);
    let base = if params.p == 2 { 2 * params.u + v } else { params.u + v };
    (params.p as usize).pow(base as u32) - 1 + params.linear_count()
}

/// m = p^v m₁ with p ∤ m₁.
fn split_exponent(p: u32, m: u32) -> (usize, u32) {
    let mut v = 0;
    let mut m1 = m;
    while m1 % p == 0 {
        m1 /= p;
        v += 1;
    }
    (v, m1)
}

fn vp_binomial(p: u32, m: u32, j: u32) -> usize {
    // Legendre: v_p(C(m, j)) = carries when adding j and m − j in base p
    let s = |mut x: u32| {
        let mut t = 0;
        while x > 0 {
            t += x % p;
            x /= p;
        }
        t
    };
    ((s(j) + s(m - j) - s(m)) / (p - 1)) as usize
}

/// target as a sum of m-th powers: y_i ∈ {0, γ − 1} fixed by a base
/// congruence, and p^u − 1 further summands grown one γ-digit at a time,
/// each step lifting the congruence from p^(uN+v) to p^(u(N+1)+v).
pub fn decompose_power(target: &PadicInt, m: u32, params: &PadicCantorParams) -> Result<PadicCertificate> {
    if m < 2 {
        return Err(PadicError::BadExponent { m, min: 2 });
    }
    let (p, u) = (params.p, params.u);
    let t = target.len().min(params.len());
    let (v, m1) = split_exponent(p, m);
    let n0 = if p == 2 { 2 } else { 1 };
    let need = u * (n0 + 1) + v;
    if t < need {
        return Err(PadicError::TruncationTooShort { have: t, need });
    }
    let target = target.truncate(t);
    let el = |x: i64| PadicInt::from_i64(p, x, t);
    let gm1 = params.gm1().truncate(t);
    let gm1_m = gm1.pow(m);
    let nx = params.linear_count();
    let mut words = vec![SymbolWord::new([vec![true], vec![false; n0 - 1]].concat()); nx];

    // base case: x − (p^u − 1)(γ−1)^m ≡ k0 (γ−1)^m mod p^(u n0 + v)
    let e0 = u * n0 + v;
    let resid = &target - &gm1_m.scale(nx as u64);
    let k0 = (&resid * &gm1_m.inverse()?).truncate(e0);
    let k0 = k0.value().to_usize().expect("small base coefficient");
    let ny = (p as usize).pow(e0 as u32) - 1;
    let ys: Vec<SymbolWord> = (0..ny).map(|i| if i < k0 { SymbolWord::ones(1) } else { SymbolWord::empty() }).collect();
    let ysum = gm1_m.scale(k0 as u64);

    let gamma1 = params.gamma1.truncate(t);
    let pu = (p as u64).pow(u as u32);
    let mut nn = n0;
    while u * (nn + 1) + v <= t {
        for j in 2..=m {
            assert!(
                ((j as usize - 1) * nn - 1) * u + vp_binomial(p, m, j) >= v,
                "valuation bound fails at j = {j}, N = {nn}"
            );
        }
        let xsum = words.iter().fold(el(0), |acc, w| &acc + &params.eval(w).truncate(t).pow(m));
        let d = &(&target - &ysum) - &xsum;
        let depth = u * nn + v;
        assert!(d.truncate(depth).is_zero(), "congruence lost at N = {nn}");
        let unit = (&gm1_m * &gamma1.pow(nn as u32)).scale(m1 as u64);
        let quotient = d.div_p_pow(depth);
        let k1 = (&quotient * &unit.truncate(quotient.len()).inverse()?).truncate(u);
        let k1 = k1.value().to_u64().expect("digit") as usize;
        assert!((k1 as u64) < pu);
        for (i, w) in words.iter_mut().enumerate() {
            w.push(i < k1);
        }
        nn += 1;
    }
    let summands = ys.into_iter().chain(words).collect();
    Ok(PadicCertificate { params: params.clone(), target, m, summands, congruence_depth: u * nn + v })
}

/// Residues mod p^j of the m-th powers of points of C_γ.
pub fn power_residues(params: &PadicCantorParams, m: u32, j: usize, budget: u64) -> Result<Vec<bool>> {
    let len = j.div_ceil(params.u);
    let size = (params.p as u64).checked_pow(j as u32).unwrap_or(u64::MAX);
    let words = 1u64.checked_shl(len as u32).unwrap_or(u64::MAX);
    if size > budget || words > budget {
        return Err(PadicError::BudgetExceeded { count: size.max(words).to_string(), budget });
    }
    let mut hit = vec![false; size as usize];
    for idx in 0..words {
        let w = SymbolWord::from_index(idx, len);
        let x = params.eval(&w).truncate(j).pow(m);
        hit[x.value().to_usize().unwrap()] = true;
    }
    Ok(hit)
}

/// Residues mod p^j reachable as sums of exactly `count` elements of `set`.
pub fn sumset_residues(set: &[bool], count: usize) -> Vec<bool> {
    let q = set.len();
    let members: Vec<usize> = (0..q).filter(|&i| set[i]).collect();
    let mut cur = vec![false; q];
    cur[0] = true;
    for _ in 0..count {
        let mut next = vec![false; q];
        for a in (0..q).filter(|&a| cur[a]) {
            for &b in &members {
                next[(a + b) % q] = true;
            }
        }
        cur = next;
    }
    cur
}

/// Least t such that t m-th powers of points of C_γ cover Z/p^j: a lower
/// bound for the number of summands needed over all of Z_p.
pub fn residue_lower_bound(params: &PadicCantorParams, m: u32, j: usize, budget: u64) -> Result<usize> {
    let set = power_residues(params, m, j, budget)?;
    let q = set.len();
    let mut cur = vec![false; q];
    cur[0] = true;
    for t in 1..=q {
        let mut next = cur.clone();
        for a in (0..q).filter(|&a| cur[a]) {
            for b in (0..q).filter(|&b| set[b]) {
                next[(a + b) % q] = true;
            }
        }
        if next == cur {
            break;
        }
        if next.iter().all(|&x| x) {
            return Ok(t);
        }
        cur = next;
    }
    Err(PadicError::NeverCovers(j))
}

/// (p^u − 1)(γ − 1) mod p^u, which no sum of p^u − 2 points of C_γ reaches.
pub fn linear_minimality_witness(params: &PadicCantorParams) -> (u64, bool) {
    let set = power_residues(params, 1, params.u, u64::MAX).expect("small residue ring");
    let reach = sumset_residues(&set, params.linear_count() - 1);
    let q = reach.len() as u64;
    let gm1 = params.gm1().truncate(params.u).value().to_u64().unwrap();
    let w = (params.linear_count() as u64 * gm1) % q;
    (w, !reach[w as usize])
}
