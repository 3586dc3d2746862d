//! Rigorous enclosures of e^x, ln y, arctan x, pi and y^(1/m).
//!
//! Each routine sums a truncated series and bounds the tail explicitly, so
//! the returned interval always contains the true value.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{ceil, int, pow_u, rat, NumericsError, Rational, RationalInterval, Result};

fn check_width(w: &Rational) -> Result<()> {
    if w.is_positive() {
        Ok(())
    } else {
        Err(NumericsError::NonPositiveWidth(w.to_string()))
    }
}

/// Enclosure of `e^x` of width at most `width`.
///
/// For `x >= 0` the Taylor polynomial is summed until the Lagrange remainder
/// `x^N/N! * e^x`, with `e^x` overestimated by `3^ceil(x)`, drops below
/// `width`. Negative `x` goes through the reciprocal.
pub fn certified_exp(x: &Rational, width: &Rational) -> Result<RationalInterval> {
    check_width(width)?;
    if x.is_zero() {
        return Ok(RationalInterval::point(Rational::one()));
    }
    if x.is_negative() {
        // 1/e^{-x}: the reciprocal map on [lo,hi] with lo >= 1 shrinks widths
        let pos = certified_exp(&-x, width)?;
        return pos.recip();
    }
    let bound = pow_u(&int(3), ceil(x).try_into().unwrap_or(u64::MAX));
    let mut sum = Rational::zero();
    let mut term = Rational::one(); // x^i / i!
    let mut i: u64 = 0;
    loop {
        sum += &term;
        i += 1;
        term = term * x / int(i as i64);
        let rem = &term * &bound;
        if &rem <= width {
            return Ok(RationalInterval::new(sum.clone(), sum + rem));
        }
    }
}

/// `2 atanh(t)` for `0 <= t < 1` with tail bound
/// `2 t^(2N+1) / ((2N+1)(1 - t^2))`.
fn two_atanh(t: &Rational, width: &Rational) -> RationalInterval {
    if t.is_zero() {
        return RationalInterval::point(Rational::zero());
    }
    let t2 = t * t;
    let denom = Rational::one() - &t2;
    let mut sum = Rational::zero();
    let mut power = t.clone();
    let mut k: i64 = 0;
    loop {
        sum += int(2) * &power / int(2 * k + 1);
        power *= &t2;
        k += 1;
        let tail = int(2) * &power / (int(2 * k + 1) * &denom);
        if &tail <= width {
            return RationalInterval::new(sum.clone(), sum + tail);
        }
    }
}

/// Enclosure of `ln y` for `y > 0`.
///
/// `y = 2^k z` with `z` in `[1, 2)`, then `ln z = 2 atanh((z-1)/(z+1))` and
/// `ln 2 = 2 atanh(1/3)`.
pub fn certified_ln(y: &Rational, width: &Rational) -> Result<RationalInterval> {
    check_width(width)?;
    if !y.is_positive() {
        return Err(NumericsError::Domain(format!("ln of non-positive {y}")));
    }
    let two = int(2);
    let mut z = y.clone();
    let mut k: i64 = 0;
    while z >= two {
        z /= &two;
        k += 1;
    }
    while z < Rational::one() {
        z *= &two;
        k -= 1;
    }
    let t = (&z - Rational::one()) / (&z + Rational::one());
    let half = width / int(2);
    let lz = two_atanh(&t, &half);
    if k == 0 {
        return Ok(lz);
    }
    let w2 = &half / int(k.abs());
    let ln2 = two_atanh(&rat(1, 3), &w2);
    let scaled = ln2.scale(&int(k));
    Ok(&scaled + &lz)
}

/// Alternating Taylor series for arctan on `|x| <= 1/2`; consecutive
/// partial sums bracket the limit.
fn atan_small(x: &Rational, width: &Rational) -> RationalInterval {
    if x.is_zero() {
        return RationalInterval::point(Rational::zero());
    }
    let x2 = x * x;
    let mut sum = Rational::zero();
    let mut power = x.clone();
    let mut k: i64 = 0;
    loop {
        let term = &power / int(2 * k + 1);
        let next = if k % 2 == 0 { &sum + &term } else { &sum - &term };
        if term.abs() <= *width {
            return if sum <= next {
                RationalInterval::new(sum, next)
            } else {
                RationalInterval::new(next, sum)
            };
        }
        sum = next;
        power *= &x2;
        k += 1;
    }
}

/// Enclosure of pi via Machin's formula `16 atan(1/5) - 4 atan(1/239)`.
pub fn certified_pi(width: &Rational) -> Result<RationalInterval> {
    check_width(width)?;
    let a = atan_small(&rat(1, 5), &(width / int(32)));
    let b = atan_small(&rat(1, 239), &(width / int(8)));
    Ok(&a.scale(&int(16)) - &b.scale(&int(4)))
}

/// Enclosure of `arctan x` for any rational `x`.
pub fn certified_atan(x: &Rational, width: &Rational) -> Result<RationalInterval> {
    check_width(width)?;
    if x.is_negative() {
        return Ok(-&certified_atan(&-x, width)?);
    }
    if *x <= rat(1, 2) {
        return Ok(atan_small(x, width));
    }
    let half = width / int(2);
    if *x > Rational::one() {
        // pi/2 - atan(1/x), with 1/x < 1
        let pi = certified_pi(&half)?.scale(&rat(1, 2));
        let inner = certified_atan(&x.recip(), &(width / int(4)))?;
        return Ok(&pi - &inner);
    }
    // x in (1/2, 1]: pi/4 + atan((x-1)/(x+1)) with |(x-1)/(x+1)| < 1/3
    let pi = certified_pi(&half)?.scale(&rat(1, 4));
    let y = (x - Rational::one()) / (x + Rational::one());
    Ok(&pi + &atan_small(&y, &(width / int(4))))
}

/// Exact `m`-th root of a rational that is a perfect `m`-th power.
fn exact_root(y: &Rational, m: u32) -> Option<Rational> {
    let n = y.numer();
    let d = y.denom();
    let rn: BigInt = n.nth_root(m);
    let rd: BigInt = d.nth_root(m);
    (num_traits::pow(rn.clone(), m as usize) == *n && num_traits::pow(rd.clone(), m as usize) == *d)
        .then(|| Rational::new(rn, rd))
}

/// Enclosure of `y^(1/m)` by bisection on `z^m = y` with exact comparisons.
pub fn certified_root(y: &Rational, m: u32, width: &Rational) -> Result<RationalInterval> {
    check_width(width)?;
    if !y.is_positive() {
        return Err(NumericsError::Domain(format!("root of non-positive {y}")));
    }
    if m == 0 {
        return Err(NumericsError::Domain("zeroth root".into()));
    }
    if let Some(r) = exact_root(y, m) {
        return Ok(RationalInterval::point(r));
    }
    let one = Rational::one();
    let (mut lo, mut hi) = if *y < one {
        (y.clone(), one)
    } else {
        (one, y.clone())
    };
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / int(2);
        if pow_u(&mid, m as u64) <= *y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RationalInterval::new(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::pow;

    fn taylor_partial(x: &Rational, terms: u64) -> Rational {
        let mut sum = Rational::zero();
        let mut term = Rational::one();
        for i in 0..terms {
            sum += &term;
            term = term * x / int(i as i64 + 1);
        }
        sum
    }

    #[test]
    fn exp_basic() {
        let w = rat(1, 100);
        assert_eq!(certified_exp(&int(0), &w).unwrap(), RationalInterval::point(int(1)));
        let e32 = certified_exp(&rat(3, 2), &w).unwrap();
        assert!(e32.width() <= w);
        assert!(e32.hi < int(5));
        assert!(e32.contains(&rat(44816, 10000)));
        assert!(certified_exp(&int(1), &int(0)).is_err());
        assert!(certified_exp(&int(1), &int(-1)).is_err());
    }

    #[test]
    fn exp_one_against_hand_oracle() {
        // 20 terms: remainder after x^19/19! is at most 3/20! < 10^-17
        let e = certified_exp(&int(1), &rat(1, 1000)).unwrap();
        let partial = taylor_partial(&int(1), 20);
        let tail = rat(3, 1) / (1..=20i64).fold(int(1), |acc, i| acc * int(i));
        assert!(e.lo <= &partial + &tail && partial <= e.hi);
        assert!(e.width() <= rat(1, 1000));
    }

    #[test]
    fn exp_negative_argument() {
        let e = certified_exp(&int(-1), &rat(1, 10_000)).unwrap();
        assert!(e.contains(&rat(36788, 100_000)));
        assert!(e.width() <= rat(1, 10_000));
    }

    #[test]
    fn ln_values() {
        let w = rat(1, 1_000_000);
        let l2 = certified_ln(&int(2), &w).unwrap();
        assert!((l2.midpoint() - rat(693_147, 1_000_000)).abs() < rat(1, 500_000));
        assert!(l2.width() <= w);
        let l = certified_ln(&rat(1, 10), &w).unwrap();
        assert!((l.midpoint() - rat(-2_302_585, 1_000_000)).abs() < rat(1, 500_000));
        assert!(l.width() <= w);
        assert_eq!(certified_ln(&int(1), &w).unwrap(), RationalInterval::point(int(0)));
        assert!(certified_ln(&int(0), &w).is_err());
    }

    #[test]
    fn pi_and_atan() {
        let w = pow(&int(10), -12);
        let pi = certified_pi(&w).unwrap();
        assert!(pi.lo > rat(3_141_592_653_589, 1_000_000_000_000));
        assert!(pi.hi < rat(3_141_592_653_590, 1_000_000_000_000));
        assert!(pi.width() <= w);
        let a1 = certified_atan(&int(1), &w).unwrap();
        assert!(a1.lo > rat(785_398_163_397, 1_000_000_000_000));
        assert!(a1.width() <= w);
        for (x, v) in [
            (rat(1, 3), rat(321_750_554_396, 1_000_000_000_000)),
            (rat(3, 4), rat(643_501_108_793, 1_000_000_000_000)),
            (int(3), rat(1_249_045_772_398, 1_000_000_000_000)),
            (rat(-3, 4), rat(-643_501_108_793, 1_000_000_000_000)),
        ] {
            let a = certified_atan(&x, &w).unwrap();
            assert!(a.width() <= w, "{x}");
            assert!((&a.midpoint() - &v).abs() < pow(&int(10), -11), "{x}");
        }
    }

    #[test]
    fn roots() {
        let w = rat(1, 1000);
        assert_eq!(certified_root(&int(1), 5, &w).unwrap(), RationalInterval::point(int(1)));
        assert_eq!(certified_root(&rat(1, 2), 1, &w).unwrap(), RationalInterval::point(rat(1, 2)));
        assert_eq!(certified_root(&rat(4, 9), 2, &w).unwrap(), RationalInterval::point(rat(2, 3)));
        let s = certified_root(&rat(1, 2), 2, &w).unwrap();
        assert!(s.width() <= w);
        assert!(&s.lo * &s.lo <= rat(1, 2) && rat(1, 2) <= &s.hi * &s.hi);
        assert!(certified_root(&int(0), 2, &w).is_err());
        assert!(certified_root(&int(-2), 3, &w).is_err());
    }
}
