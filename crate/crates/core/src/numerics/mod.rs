//! Exact rational arithmetic and certified enclosures.
//!
//! Every decision in this crate is made on exact rationals. Irrational
//! constants (`e^x`, `ln y`, `arctan x`, `pi`, `y^(1/m)`) only ever appear as
//! [`RationalInterval`] enclosures that are guaranteed to contain the true
//! value, and comparisons involving them go through [`certified_compare`],
//! which refines until the enclosures separate or gives up loudly.

mod compare;
mod elementary;
mod interval;
pub mod ratstr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use compare::{certified_compare, CertifiedScalar, Expr, DEFAULT_COMPARE_CAP};
pub use elementary::{
    certified_atan, certified_exp, certified_ln, certified_pi, certified_root,
};
pub use interval::RationalInterval;

/// Exact arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("target width must be positive, got {0}")]
    NonPositiveWidth(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("interval division by an interval containing zero: {0}")]
    DivisionByZero(String),
    #[error("comparison undecidable after {rounds} refinement rounds (difference enclosure {enclosure})")]
    Undecidable { rounds: u32, enclosure: String },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// `n/d` as a rational. Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn from_big(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

/// `x^e` for any integer exponent; `x` must be nonzero when `e < 0`.
pub fn pow(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        pow_u(x, e as u64)
    } else {
        pow_u(&x.recip(), e.unsigned_abs())
    }
}

pub fn pow_u(x: &Rational, mut e: u64) -> Rational {
    let mut base = x.clone();
    let mut acc = Rational::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

pub fn floor(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

/// `j = floor(log_r x)` for `0 < r < 1`, `x > 0`: the unique integer with
/// `r^(j+1) < x <= r^j`. Decided by exact repeated multiplication.
pub fn floor_log_base_r(r: &Rational, x: &Rational) -> Result<i64> {
    if !(r.is_positive() && r < &Rational::one()) {
        return Err(NumericsError::Domain(format!("base r = {r} must lie in (0,1)")));
    }
    if !x.is_positive() {
        return Err(NumericsError::Domain(format!("x = {x} must be positive")));
    }
    let one = Rational::one();
    if x <= &one {
        // largest j >= 0 with x <= r^j
        let mut j = 0i64;
        let mut next = r.clone();
        while x <= &next {
            j += 1;
            next *= r;
        }
        Ok(j)
    } else {
        let inv = r.recip();
        let mut j = -1i64;
        let mut cur = inv.clone();
        while x > &cur {
            j -= 1;
            cur *= &inv;
        }
        Ok(j)
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: &BigInt) -> u64 {
    assert!(!n.is_zero(), "valuation of zero");
    let mut v = 0;
    let mut m = n.abs();
    loop {
        let (q, rem) = m.div_rem(p);
        if !rem.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// Human-readable decimal approximation; display only, never used to decide.
pub fn approx(x: &Rational, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (a * Rational::from_integer(scale.clone())).round().to_integer();
    let (ip, fp) = scaled.div_rem(&scale);
    let mut s = String::new();
    if neg && !(ip.is_zero() && fp.is_zero()) {
        s.push('-');
    }
    s.push_str(&ip.to_string());
    if digits > 0 {
        let f = fp.to_string();
        s.push('.');
        s.push_str(&"0".repeat(digits - f.len()));
        s.push_str(&f);
    }
    s
}
