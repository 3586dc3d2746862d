use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::elementary::{certified_atan, certified_exp, certified_ln, certified_pi, certified_root};
use super::{int, pow, NumericsError, Rational, RationalInterval, Result};

pub const DEFAULT_COMPARE_CAP: u32 = 64;

/// Real-valued expression over rationals and the supported constants.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Rat(Rational),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    /// `Root(y, m)` is `y^(1/m)`.
    Root(Box<Expr>, u32),
    Atan(Box<Expr>),
    Pi,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn rat(x: Rational) -> Expr {
        Expr::Rat(x)
    }
    pub fn exp(x: Expr) -> Expr {
        Expr::Exp(Box::new(x))
    }
    pub fn ln(x: Expr) -> Expr {
        Expr::Ln(Box::new(x))
    }
    pub fn root(x: Expr, m: u32) -> Expr {
        Expr::Root(Box::new(x), m)
    }
    pub fn atan(x: Expr) -> Expr {
        Expr::Atan(Box::new(x))
    }
    pub fn pow(self, e: u32) -> Expr {
        Expr::Pow(Box::new(self), e)
    }

    /// True when the expression contains no transcendental or radical node.
    pub fn is_rational(&self) -> bool {
        match self {
            Expr::Rat(_) => true,
            Expr::Exp(_) | Expr::Ln(_) | Expr::Root(..) | Expr::Atan(_) | Expr::Pi => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_rational() && b.is_rational()
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.is_rational(),
        }
    }

    /// Exact value of a rational expression.
    pub fn exact(&self) -> Result<Rational> {
        Ok(match self {
            Expr::Rat(x) => x.clone(),
            Expr::Add(a, b) => a.exact()? + b.exact()?,
            Expr::Sub(a, b) => a.exact()? - b.exact()?,
            Expr::Mul(a, b) => a.exact()? * b.exact()?,
            Expr::Div(a, b) => {
                let d = b.exact()?;
                if d.is_zero() {
                    return Err(NumericsError::DivisionByZero(format!("{self}")));
                }
                a.exact()? / d
            }
            Expr::Neg(a) => -a.exact()?,
            Expr::Pow(a, e) => pow(&a.exact()?, *e as i64),
            _ => return Err(NumericsError::Domain(format!("{self} is not rational"))),
        })
    }

    /// Enclosure at precision `w`: every leaf constant is enclosed to width
    /// `w`. `Ok(None)` means an intermediate enclosure touched a domain
    /// boundary (zero divisor, non-positive log argument) and more precision
    /// is needed.
    pub fn enclose(&self, w: &Rational) -> Result<Option<RationalInterval>> {
        let r = match self {
            Expr::Rat(x) => RationalInterval::point(x.clone()),
            Expr::Pi => certified_pi(w)?,
            Expr::Exp(a) => match a.enclose(w)? {
                None => return Ok(None),
                Some(i) => RationalInterval::new(certified_exp(&i.lo, w)?.lo, certified_exp(&i.hi, w)?.hi),
            },
            Expr::Atan(a) => match a.enclose(w)? {
                None => return Ok(None),
                Some(i) => RationalInterval::new(certified_atan(&i.lo, w)?.lo, certified_atan(&i.hi, w)?.hi),
            },
            Expr::Ln(a) => match a.enclose(w)? {
                None => return Ok(None),
                Some(i) if !i.hi.is_positive() => {
                    return Err(NumericsError::Domain(format!("ln of non-positive {i}")))
                }
                Some(i) if !i.lo.is_positive() => return Ok(None),
                Some(i) => RationalInterval::new(certified_ln(&i.lo, w)?.lo, certified_ln(&i.hi, w)?.hi),
            },
            Expr::Root(a, m) => match a.enclose(w)? {
                None => return Ok(None),
                Some(i) if !i.hi.is_positive() => {
                    return Err(NumericsError::Domain(format!("root of non-positive {i}")))
                }
                Some(i) if !i.lo.is_positive() => return Ok(None),
                Some(i) => RationalInterval::new(
                    certified_root(&i.lo, *m, w)?.lo,
                    certified_root(&i.hi, *m, w)?.hi,
                ),
            },
            Expr::Add(a, b) => match (a.enclose(w)?, b.enclose(w)?) {
                (Some(x), Some(y)) => &x + &y,
                _ => return Ok(None),
            },
            Expr::Sub(a, b) => match (a.enclose(w)?, b.enclose(w)?) {
                (Some(x), Some(y)) => &x - &y,
                _ => return Ok(None),
            },
            Expr::Mul(a, b) => match (a.enclose(w)?, b.enclose(w)?) {
                (Some(x), Some(y)) => &x * &y,
                _ => return Ok(None),
            },
            Expr::Div(a, b) => match (a.enclose(w)?, b.enclose(w)?) {
                (Some(_), Some(y)) if y.is_point() && y.lo.is_zero() => {
                    return Err(NumericsError::DivisionByZero(format!("{self}")))
                }
                (Some(x), Some(y)) if !y.contains_zero() => x.div(&y)?,
                _ => return Ok(None),
            },
            Expr::Neg(a) => match a.enclose(w)? {
                Some(x) => -&x,
                None => return Ok(None),
            },
            Expr::Pow(a, e) => match a.enclose(w)? {
                Some(x) => x.pow(*e),
                None => return Ok(None),
            },
        };
        Ok(Some(r))
    }
}

impl From<Rational> for Expr {
    fn from(x: Rational) -> Self {
        Expr::Rat(x)
    }
}

impl From<i64> for Expr {
    fn from(x: i64) -> Self {
        Expr::Rat(int(x))
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $v:ident) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rat(x) => write!(f, "{x}"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::Root(a, m) => write!(f, "({a})^(1/{m})"),
            Expr::Atan(a) => write!(f, "atan({a})"),
            Expr::Pi => write!(f, "pi"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Pow(a, e) => write!(f, "({a})^{e}"),
        }
    }
}

/// Leaf precision used in refinement round `round`: `2^(-8(round+1))`.
fn precision(round: u32) -> Rational {
    Rational::new(One::one(), num_traits::pow(num_bigint::BigInt::from(2), 8 * (round as usize + 1)))
}

/// A real number carried as an expression together with a shrinking
/// enclosure. Each `refine` intersects with the previous enclosure, so the
/// sequence of enclosures is nested.
#[derive(Debug, Clone)]
pub struct CertifiedScalar {
    expr: Expr,
    enclosure: RationalInterval,
    round: u32,
}

impl CertifiedScalar {
    pub fn new(expr: Expr) -> Result<Self> {
        let mut round = 0;
        loop {
            if let Some(enclosure) = expr.enclose(&precision(round))? {
                return Ok(Self { expr, enclosure, round });
            }
            round += 1;
            if round > DEFAULT_COMPARE_CAP {
                return Err(NumericsError::Undecidable { rounds: round, enclosure: "none".into() });
            }
        }
    }

    pub fn enclosure(&self) -> &RationalInterval {
        &self.enclosure
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn refine(&mut self) -> Result<&RationalInterval> {
        self.round += 1;
        if let Some(next) = self.expr.enclose(&precision(self.round))? {
            self.enclosure = self
                .enclosure
                .intersect(&next)
                .expect("enclosures of the same value must overlap");
        }
        Ok(&self.enclosure)
    }

    /// Refine until the enclosure width is at most `w` or `cap` rounds pass.
    pub fn refine_to(&mut self, w: &Rational, cap: u32) -> Result<&RationalInterval> {
        while &self.enclosure.width() > w {
            if self.round >= cap {
                return Err(NumericsError::Undecidable {
                    rounds: self.round,
                    enclosure: self.enclosure.to_string(),
                });
            }
            self.refine()?;
        }
        Ok(&self.enclosure)
    }
}

/// Decide the order of two real expressions.
///
/// Rational expressions are compared exactly. Otherwise enclosures are
/// refined for at most `cap` rounds; equality is only reported when both
/// enclosures collapse to the same rational point.
pub fn certified_compare(lhs: &Expr, rhs: &Expr, cap: u32) -> Result<Ordering> {
    if lhs.is_rational() && rhs.is_rational() {
        return Ok(lhs.exact()?.cmp(&rhs.exact()?));
    }
    let mut a = CertifiedScalar::new(lhs.clone())?;
    let mut b = CertifiedScalar::new(rhs.clone())?;
    loop {
        let (x, y) = (a.enclosure(), b.enclosure());
        if x.hi < y.lo {
            return Ok(Ordering::Less);
        }
        if x.lo > y.hi {
            return Ok(Ordering::Greater);
        }
        if x.is_point() && y.is_point() && x.lo == y.lo {
            return Ok(Ordering::Equal);
        }
        if a.round() >= cap || b.round() >= cap {
            return Err(NumericsError::Undecidable {
                rounds: cap,
                enclosure: (x - y).to_string(),
            });
        }
        a.refine()?;
        b.refine()?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    #[test]
    fn spec_examples() {
        let e = Expr::exp(rat(3, 2).into());
        assert_eq!(certified_compare(&e, &5.into(), DEFAULT_COMPARE_CAP).unwrap(), Ordering::Less);
        assert_eq!(certified_compare(&1.into(), &1.into(), DEFAULT_COMPARE_CAP).unwrap(), Ordering::Equal);
        let s = Expr::root(rat(1, 2).into(), 2);
        assert_eq!(
            certified_compare(&s, &rat(707, 1000).into(), DEFAULT_COMPARE_CAP).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn tight_comparison_is_undecidable() {
        // atan(1) and pi/4 are the same real number
        let a = Expr::atan(1.into());
        let b = Expr::Pi / 4.into();
        match certified_compare(&a, &b, 4) {
            Err(NumericsError::Undecidable { rounds, .. }) => assert_eq!(rounds, 4),
            other => panic!("expected undecidable, got {other:?}"),
        }
    }

    #[test]
    fn exact_points_compare_equal() {
        let a = Expr::root(rat(9, 4).into(), 2);
        assert_eq!(certified_compare(&a, &rat(3, 2).into(), 8).unwrap(), Ordering::Equal);
    }

    #[test]
    fn domain_errors_surface() {
        let bad = Expr::ln(Expr::from(-1));
        assert!(matches!(certified_compare(&bad, &0.into(), 8), Err(NumericsError::Domain(_))));
        let z = Expr::from(1) / Expr::from(0);
        assert!(certified_compare(&z, &0.into(), 8).is_err());
    }

    #[test]
    fn refinement_is_nested() {
        let mut s = CertifiedScalar::new(Expr::exp(Expr::Pi) - Expr::ln(2.into())).unwrap();
        let mut prev = s.enclosure().clone();
        for _ in 0..6 {
            let next = s.refine().unwrap().clone();
            assert!(prev.contains_interval(&next));
            prev = next;
        }
        assert!(prev.width() < rat(1, 1_000_000_000));
    }
}
