use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{pow_u, NumericsError, Rational, Result};

/// Closed interval `[lo, hi]` with rational endpoints.
///
/// Arithmetic on rationals is exact, so `+`, `-`, `*`, `/` and integer powers
/// return the exact image interval; enclosures of irrational values only
/// enter through the constructors in `elementary`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalInterval {
    #[serde(with = "super::ratstr")]
    pub lo: Rational,
    #[serde(with = "super::ratstr")]
    pub hi: Rational,
}

impl RationalInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &RationalInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn intersect(&self, other: &RationalInterval) -> Option<RationalInterval> {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi <= other.hi { &self.hi } else { &other.hi };
        (lo <= hi).then(|| RationalInterval::new(lo.clone(), hi.clone()))
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn scale(&self, c: &Rational) -> RationalInterval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            RationalInterval::new(a, b)
        } else {
            RationalInterval::new(b, a)
        }
    }

    pub fn recip(&self) -> Result<RationalInterval> {
        if self.contains_zero() {
            return Err(NumericsError::DivisionByZero(self.to_string()));
        }
        Ok(RationalInterval::new(self.hi.recip(), self.lo.recip()))
    }

    pub fn div(&self, other: &RationalInterval) -> Result<RationalInterval> {
        Ok(self * &other.recip()?)
    }

    pub fn pow(&self, e: u32) -> RationalInterval {
        if e == 0 {
            return RationalInterval::point(Rational::one());
        }
        let a = pow_u(&self.lo, e as u64);
        let b = pow_u(&self.hi, e as u64);
        if e % 2 == 1 || !self.lo.is_negative() {
            // monotone on this range
            if a <= b {
                RationalInterval::new(a, b)
            } else {
                RationalInterval::new(b, a)
            }
        } else if !self.hi.is_positive() {
            RationalInterval::new(b, a)
        } else {
            let hi = if a >= b { a } else { b };
            RationalInterval::new(Rational::zero(), hi)
        }
    }

    pub fn max(&self, other: &RationalInterval) -> RationalInterval {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi >= other.hi { &self.hi } else { &other.hi };
        RationalInterval::new(lo.clone(), hi.clone())
    }
}

impl From<Rational> for RationalInterval {
    fn from(x: Rational) -> Self {
        RationalInterval::point(x)
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for &RationalInterval {
    type Output = RationalInterval;
    fn add(self, rhs: &RationalInterval) -> RationalInterval {
        RationalInterval::new(&self.lo + &rhs.lo, &self.hi + &rhs.hi)
    }
}

impl Sub for &RationalInterval {
    type Output = RationalInterval;
    fn sub(self, rhs: &RationalInterval) -> RationalInterval {
        RationalInterval::new(&self.lo - &rhs.hi, &self.hi - &rhs.lo)
    }
}

impl Neg for &RationalInterval {
    type Output = RationalInterval;
    fn neg(self) -> RationalInterval {
        RationalInterval::new(-&self.hi, -&self.lo)
    }
}

impl Mul for &RationalInterval {
    type Output = RationalInterval;
    fn mul(self, rhs: &RationalInterval) -> RationalInterval {
        let cands = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if c < &lo {
                lo = c.clone();
            }
            if c > &hi {
                hi = c.clone();
            }
        }
        RationalInterval::new(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    fn iv(a: Rational, b: Rational) -> RationalInterval {
        RationalInterval::new(a, b)
    }

    #[test]
    fn arithmetic_is_exact_image() {
        let a = iv(rat(-1, 2), rat(3, 2));
        let b = iv(int(2), int(3));
        assert_eq!(&a + &b, iv(rat(3, 2), rat(9, 2)));
        assert_eq!(&a - &b, iv(rat(-7, 2), rat(-1, 2)));
        assert_eq!(&a * &b, iv(rat(-3, 2), rat(9, 2)));
        assert_eq!(a.div(&b).unwrap(), iv(rat(-1, 4), rat(3, 4)));
        assert!(b.div(&a).is_err());
    }

    #[test]
    fn even_power_straddling_zero() {
        let a = iv(rat(-2, 1), rat(1, 1));
        assert_eq!(a.pow(2), iv(int(0), int(4)));
        assert_eq!(a.pow(3), iv(int(-8), int(1)));
        let neg = iv(int(-3), int(-2));
        assert_eq!(neg.pow(2), iv(int(4), int(9)));
        assert_eq!(neg.pow(0), RationalInterval::point(int(1)));
    }

    #[test]
    fn intersection() {
        let a = iv(int(0), int(2));
        assert_eq!(a.intersect(&iv(int(1), int(3))), Some(iv(int(1), int(2))));
        assert_eq!(a.intersect(&iv(int(3), int(4))), None);
    }
}
