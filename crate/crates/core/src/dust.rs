//! Sums of m-th powers on the Cantor dust W = C + iC (ternary C).
//!
//! Every point of the unit disk is written as Σ z_j^m with at most 2^(m+8)
//! summands. The plane is covered by a few exact directions:
//! the real and imaginary axes, the rotation vectors (1 + i r^n)^m and
//! (r^n + i)^m = i^m·conj((1 + i r^n)^m), and a handful of fixed points. Each
//! segment coefficient is handed to the real solver, and its summands x are
//! lifted into W by x ↦ x, ix, (1 + i r^n)x or (r^n + i)x.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::{CantorParams, CantorPoint, SymbolWord, Tail};
use crate::numerics::{
    certified_compare, floor, int, pow_u, rat, ratstr, CertifiedScalar, Expr, NumericsError, Rational,
    RationalInterval, DEFAULT_COMPARE_CAP,
};
use crate::powersum::{decompose, PowerSumError, PowerSumProblem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DustError {
    #[error("the dust engine needs the middle-third set (r = 1/3)")]
    NotTernary,
    #[error("exponent must be at least 3, got {0}")]
    BadExponent(u32),
    #[error("target {0} outside the closed unit disk")]
    TargetOutsideRegion(String),
    #[error("no angle window found within {0} indices")]
    WindowNotFound(usize),
    #[error("geometry failure: {0}")]
    Geometry(String),
    #[error("cannot parse complex number {0:?}")]
    Parse(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    PowerSum(#[from] PowerSumError),
}

pub type Result<T> = std::result::Result<T, DustError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComplexRational {
    #[serde(with = "ratstr")]
    pub re: Rational,
    #[serde(with = "ratstr")]
    pub im: Rational,
}

impl ComplexRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self::new(re, Rational::zero())
    }

    pub fn zero() -> Self {
        Self::real(Rational::zero())
    }

    pub fn one() -> Self {
        Self::real(Rational::one())
    }

    pub fn i() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    /// i^k
    pub fn i_pow(k: u32) -> Self {
        match k % 4 {
            0 => Self::one(),
            1 => Self::i(),
            2 => -Self::one(),
            _ => -Self::i(),
        }
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sq(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// |re| + |im|, an upper bound for the modulus.
    pub fn l1(&self) -> Rational {
        self.re.abs() + self.im.abs()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(&self.re * c, &self.im * c)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl Add for &ComplexRational {
    type Output = ComplexRational;
    fn add(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &ComplexRational {
    type Output = ComplexRational;
    fn sub(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &ComplexRational {
    type Output = ComplexRational;
    fn mul(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

impl Neg for ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational::new(-self.re, -self.im)
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Accepts "a", "bi", "a+bi", "a-bi" and "a,b", with rational a and b.
impl FromStr for ComplexRational {
    type Err = DustError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || DustError::Parse(s.to_string());
        let q: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let part = |t: &str| -> Result<Rational> { ratstr::parse(t).map_err(|_| bad()) };
        if let Some((a, b)) = q.split_once(',') {
            return Ok(Self::new(part(a)?, part(b)?));
        }
        let Some(body) = q.strip_suffix('i') else {
            return Ok(Self::real(part(&q)?));
        };
        let split = body.char_indices().filter(|&(i, c)| i > 0 && (c == '+' || c == '-')).last();
        let (re, im) = match split {
            Some((i, _)) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => int(1),
            "-" => int(-1),
            t => part(t.strip_prefix('+').unwrap_or(t))?,
        };
        Ok(Self::new(part(re)?, im))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationVector {
    pub n: i64,
    pub m: u32,
    pub value: ComplexRational,
}

impl RotationVector {
    /// |value|² = (1 + r^(2|n|))^m
    pub fn norm_sq(&self) -> Rational {
        self.value.norm_sq()
    }
}

fn check_ternary(params: &CantorParams) -> Result<()> {
    if params.r() == &rat(1, 3) {
        Ok(())
    } else {
        Err(DustError::NotTernary)
    }
}

/// The base point of direction θ_n: 1 + i r^n for n ≥ 0, r^|n| + i for n < 0.
fn rotation_base(params: &CantorParams, n: i64) -> ComplexRational {
    let rn = params.r_pow(n.unsigned_abs() as usize);
    if n >= 0 {
        ComplexRational::new(int(1), rn)
    } else {
        ComplexRational::new(rn, int(1))
    }
}

pub fn rotation_vector(params: &CantorParams, n: i64, m: u32) -> RotationVector {
    RotationVector { n, m, value: rotation_base(params, n).pow(m) }
}

/// θ_n = arctan r^n, with θ_(−n) = π/2 − θ_n.
pub fn theta_expr(params: &CantorParams, n: i64) -> Expr {
    let x = Expr::Rat(params.r_pow(n.unsigned_abs() as usize));
    if n >= 0 {
        Expr::atan(x)
    } else {
        Expr::Pi / Expr::from(2) - Expr::atan(x)
    }
}

pub fn theta_enclosure(params: &CantorParams, n: i64, width: &Rational) -> Result<RationalInterval> {
    let mut s = CertifiedScalar::new(theta_expr(params, n))?;
    Ok(s.refine_to(width, DEFAULT_COMPARE_CAP)?.clone())
}

/// θ_(n+1) < θ_n ≤ 3θ_(n+1) − r^(3n+3), both decided by certified comparison.
pub fn angle_chain_holds(params: &CantorParams, n: i64) -> Result<bool> {
    assert!(n >= -1);
    let a = theta_expr(params, n);
    let b = theta_expr(params, n + 1);
    let first = certified_compare(&b, &a, DEFAULT_COMPARE_CAP)? == Ordering::Less;
    let rhs = Expr::from(3) * b - Expr::Rat(params.r_pow((3 * n + 3) as usize));
    let second = certified_compare(&a, &rhs, DEFAULT_COMPARE_CAP)? != Ordering::Greater;
    Ok(first && second)
}

/// Compare m·θ_n with q·π + extra.
fn m_theta_cmp(params: &CantorParams, m: u32, n: i64, q: &Rational, extra: &Rational) -> Result<Ordering> {
    if n == 0 && &rat(m as i64, 4) == q {
        return Ok(Rational::zero().cmp(extra));
    }
    let lhs = Expr::from(m as i64) * theta_expr(params, n);
    let rhs = Expr::Pi * Expr::Rat(q.clone()) + Expr::Rat(extra.clone());
    Ok(certified_compare(&lhs, &rhs, DEFAULT_COMPARE_CAP)?)
}

/// The n ≥ 0 with m·θ_(n+1) ≤ qπ < m·θ_n. The scan is capped at 4m indices.
pub fn angle_window(params: &CantorParams, m: u32, q: &Rational) -> Result<i64> {
    let cap = 4 * m as usize;
    let zero = Rational::zero();
    if m_theta_cmp(params, m, 0, q, &zero)? != Ordering::Greater {
        return Err(DustError::WindowNotFound(0));
    }
    for n in 0..cap as i64 {
        if m_theta_cmp(params, m, n + 1, q, &zero)? != Ordering::Greater {
            return Ok(n);
        }
    }
    Err(DustError::WindowNotFound(cap))
}

/// 2^(m+8), after checking 2^(m+6)(2/3)^m / 100 > 1 exactly.
pub fn disk_cover_budget(m: u32) -> Result<u64> {
    if m < 3 {
        return Err(DustError::BadExponent(m));
    }
    let quarter = pow_u(&int(2), (m + 6) as u64);
    let lhs = quarter * pow_u(&rat(2, 3), m as u64) / int(100);
    assert!(lhs > int(1), "budget inequality fails at m = {m}");
    Ok(1u64 << (m + 8))
}

/// Radius of the square (k/100)(2/3)^m S covered by 4k summands, k ≥ 2^m.
pub fn square_radius(m: u32, k: u64) -> Rational {
    int(k as i64) * pow_u(&rat(2, 3), m as u64) / int(100)
}

/// How a real point x ∈ C is placed in W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lift {
    /// x
    Real,
    /// ix
    Imag,
    /// (1 + i r^n)x for n ≥ 0, (r^|n| + i)x for n < 0
    Rotated(i64),
}

impl Lift {
    fn base(self, params: &CantorParams) -> ComplexRational {
        match self {
            Lift::Real => ComplexRational::one(),
            Lift::Imag => ComplexRational::i(),
            Lift::Rotated(n) => rotation_base(params, n),
        }
    }

    /// The factor g^m with (gx)^m = g^m x^m.
    pub fn multiplier(self, params: &CantorParams, m: u32) -> ComplexRational {
        self.base(params).pow(m)
    }

    fn apply(self, x: &CantorPoint) -> DustSummand {
        let (re, im) = match self {
            Lift::Real => (x.clone(), CantorPoint::zero()),
            Lift::Imag => (CantorPoint::zero(), x.clone()),
            Lift::Rotated(n) if n >= 0 => (x.clone(), x.prepend_zeros(n as usize)),
            Lift::Rotated(n) => (x.prepend_zeros(n.unsigned_abs() as usize), x.clone()),
        };
        DustSummand { re, im }
    }
}

/// z = x + iy with x, y ∈ C.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DustSummand {
    pub re: CantorPoint,
    pub im: CantorPoint,
}

impl DustSummand {
    /// Left ends of both coordinates; the exact point when both are closed.
    pub fn anchor(&self, params: &CantorParams) -> ComplexRational {
        ComplexRational::new(self.re.value(params), self.im.value(params))
    }

    fn is_zero(&self, params: &CantorParams) -> bool {
        self.re.is_exact() && self.im.is_exact() && self.anchor(params).is_zero()
    }

    /// i·conj(z) = y + ix
    pub fn swap(&self) -> Self {
        Self { re: self.im.clone(), im: self.re.clone() }
    }
}

/// One piece of the covering: `coefficient` ∈ [0, k] times the sum of the
/// multipliers of `lifts`, or `count` copies of a fixed point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    Segment {
        lifts: Vec<Lift>,
        #[serde(with = "ratstr")]
        coefficient: Rational,
    },
    Fixed {
        point: DustSummand,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DustCertificate {
    pub params: CantorParams,
    pub m: u32,
    pub target: ComplexRational,
    /// Maximum number of summands allowed.
    pub budget: u64,
    pub summands: Vec<DustSummand>,
    /// Bound on |Σ z_j^m − target| with z_j taken at the summands' anchors.
    #[serde(with = "ratstr")]
    pub residual_bound: Rational,
    pub plan: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DustReplayError {
    #[error("{got} summands exceed the budget {budget}")]
    OverBudget { got: usize, budget: u64 },
    #[error("|sum - target|^2 = {err_sq} exceeds residual^2 = {bound_sq}")]
    ResidualExceeded { err_sq: String, bound_sq: String },
}

impl DustCertificate {
    pub fn sum(&self) -> ComplexRational {
        self.summands.chunk_by(|x, y| x == y).fold(ComplexRational::zero(), |acc, run| {
            let z = run[0].anchor(&self.params).pow(self.m);
            &acc + &z.scale(&int(run.len() as i64))
        })
    }

    /// Exact check |Σ z_j^m − target|² ≤ residual_bound², returning the sum.
    pub fn replay(&self) -> std::result::Result<ComplexRational, DustReplayError> {
        if self.summands.len() as u64 > self.budget {
            return Err(DustReplayError::OverBudget { got: self.summands.len(), budget: self.budget });
        }
        let sum = self.sum();
        let err_sq = (&sum - &self.target).norm_sq();
        let bound_sq = &self.residual_bound * &self.residual_bound;
        if err_sq > bound_sq {
            return Err(DustReplayError::ResidualExceeded {
                err_sq: err_sq.to_string(),
                bound_sq: bound_sq.to_string(),
            });
        }
        Ok(sum)
    }

    pub fn verify(&self) -> bool {
        self.replay().is_ok()
    }
}

/// w ↦ i^m·conj(w).
pub fn symmetry_point(z: &ComplexRational, m: u32) -> ComplexRational {
    &ComplexRational::i_pow(m) * &z.conj()
}

/// Certificate for i^m·conj(target): swap the coordinates of every summand.
pub fn symmetry_map(cert: &DustCertificate) -> DustCertificate {
    let swap_piece = |p: &Piece| match p {
        Piece::Segment { lifts, coefficient } => Piece::Segment {
            lifts: lifts
                .iter()
                .map(|l| match l {
                    Lift::Real => Lift::Imag,
                    Lift::Imag => Lift::Real,
                    Lift::Rotated(n) => Lift::Rotated(-n),
                })
                .collect(),
            coefficient: coefficient.clone(),
        },
        Piece::Fixed { point, count } => Piece::Fixed { point: point.swap(), count: *count },
    };
    DustCertificate {
        params: cert.params.clone(),
        m: cert.m,
        target: symmetry_point(&cert.target, cert.m),
        budget: cert.budget,
        summands: cert.summands.iter().map(DustSummand::swap).collect(),
        residual_bound: cert.residual_bound.clone(),
        plan: cert.plan.iter().map(swap_piece).collect(),
    }
}

/// A downward (m ≡ 2) or diagonal (m ≡ 1) shift, either a scalable segment
/// or a fixed sum of copies of two points.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Shift {
    Segment { lifts: Vec<Lift>, direction: ComplexRational },
    Fixed { points: [DustSummand; 2], count: usize, value: ComplexRational },
}

/// Angle windows and directions for one exponent, selected once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DustPlan {
    pub m: u32,
    /// Summands per group; the budget is four groups.
    pub group: usize,
    pub case: &'static str,
    pub n0: i64,
    pub n1: Option<i64>,
    up: Option<ComplexRational>,
    negative: Option<ComplexRational>,
    shift: Option<Shift>,
}

fn point_r_pow(n: usize) -> CantorPoint {
    CantorPoint::new(SymbolWord::zeros(n), Tail::Ones)
}

fn point_two_thirds() -> CantorPoint {
    CantorPoint::one_minus_r()
}

fn pair_value(params: &CantorParams, m: u32, p: &DustSummand, count: usize) -> (ComplexRational, [DustSummand; 2]) {
    let q = p.swap();
    let v = &p.anchor(params).pow(m) + &q.anchor(params).pow(m);
    (v.scale(&int(count as i64)), [p.clone(), q])
}

fn rot_pair(params: &CantorParams, m: u32, n: i64) -> (Vec<Lift>, ComplexRational) {
    let lifts = vec![Lift::Rotated(n), Lift::Rotated(-n)];
    let d = &Lift::Rotated(n).multiplier(params, m) + &Lift::Rotated(-n).multiplier(params, m);
    (lifts, d)
}

fn geometry(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(DustError::Geometry(what.to_string()))
    }
}

pub fn plan(params: &CantorParams, m: u32) -> Result<DustPlan> {
    check_ternary(params)?;
    let budget = disk_cover_budget(m)?;
    let group = (budget / 4) as usize;
    let zero = Rational::zero();
    let mut p = DustPlan { m, group, case: "", n0: 0, n1: None, up: None, negative: None, shift: None };
    match m % 4 {
        0 => {
            let n0 = angle_window(params, m, &rat(1, 2))?;
            let extra = int(m as i64) * params.r_pow((3 * n0 + 3) as usize);
            let n1 = if m_theta_cmp(params, m, n0, &rat(1, 2), &extra)? == Ordering::Less { n0 - 1 } else { n0 };
            let up = Lift::Rotated(n0 + 1).multiplier(params, m);
            let (lifts, d) = rot_pair(params, m, n1);
            geometry(up.im.is_positive() && up.re >= zero, "upward direction")?;
            geometry(d.im.is_zero() && d.re.is_negative(), "negative real direction")?;
            p.case = "quarter-turn";
            p.n0 = n0;
            p.n1 = Some(n1);
            p.up = Some(up);
            p.shift = Some(Shift::Segment { lifts, direction: d });
        }
        3 => {
            let n0 = angle_window(params, m, &rat(1, 3))?;
            let (lifts, d) = rot_pair(params, m, n0);
            geometry(d.re.is_negative() && d.im == -&d.re, "direction 3π/4")?;
            p.case = "three-quarter";
            p.n0 = n0;
            p.shift = Some(Shift::Segment { lifts, direction: d });
        }
        1 => {
            let n0 = angle_window(params, m, &int(1))?;
            let zero_ = Rational::zero();
            let c1 = m_theta_cmp(params, m, n0 + 1, &rat(7, 12), &zero_)? != Ordering::Greater;
            let c2 = m_theta_cmp(params, m, n0 + 1, &rat(5, 6), &zero_)? != Ordering::Less;
            p.n0 = n0;
            p.shift = Some(if c1 || c2 {
                let n = if c1 { n0 } else { n0 + 1 };
                p.case = if c1 { "diagonal" } else { "diagonal-next" };
                p.n1 = Some(n);
                let (lifts, d) = rot_pair(params, m, n);
                geometry(d.re.is_negative() && d.im == d.re, "direction 5π/4")?;
                Shift::Segment { lifts, direction: d }
            } else {
                p.case = "diagonal-fixed";
                let pt = DustSummand { re: point_two_thirds(), im: point_r_pow((n0 + 1) as usize) };
                let count = group / 3;
                let (value, points) = pair_value(params, m, &pt, count);
                geometry(value.re.is_negative() && value.im == value.re, "fixed direction 5π/4")?;
                Shift::Fixed { points, count, value }
            });
        }
        _ => {
            let n0 = angle_window(params, m, &rat(3, 4))?;
            let n1 = angle_window(params, m, &int(1))?;
            let up = Lift::Rotated(n0 + 1).multiplier(params, m);
            geometry(up.im.is_positive(), "upward direction")?;
            p.n0 = n0;
            p.n1 = Some(n1);
            p.up = Some(up);
            let zero_ = Rational::zero();
            let case1 = m_theta_cmp(params, m, n1 + 1, &rat(2, 3), &zero_)? != Ordering::Greater;
            let shift = if case1 && m_theta_cmp(params, m, n1, &rat(7, 6), &zero_)? == Ordering::Greater {
                p.case = "downward";
                let (lifts, d) = rot_pair(params, m, n1);
                Shift::Segment { lifts, direction: d }
            } else {
                let (pt, count) = if case1 {
                    p.case = "downward-fixed";
                    (DustSummand { re: point_two_thirds(), im: point_r_pow(n1 as usize) }, group / 4)
                } else {
                    p.case = "downward-fixed-wide";
                    let y = CantorPoint::new(SymbolWord::zeros(n1 as usize).child(true), Tail::Zeros);
                    let k2 = floor(&(pow_u(&rat(4, 5), m as u64) * int(group as i64) / int(4)));
                    let count: usize = k2.try_into().expect("small count");
                    (DustSummand { re: CantorPoint::new(SymbolWord::empty(), Tail::Ones), im: y }, count)
                };
                let (value, points) = pair_value(params, m, &pt, count);
                Shift::Fixed { points, count, value }
            };
            let dir = match &shift {
                Shift::Segment { direction, .. } => direction.clone(),
                Shift::Fixed { value, .. } => value.clone(),
            };
            geometry(dir.re.is_zero() && dir.im.is_negative(), "downward direction")?;
            p.shift = Some(shift);
        }
    }
    Ok(p)
}

struct Builder<'a> {
    params: &'a CantorParams,
    m: u32,
    group: usize,
    digits: usize,
    summands: Vec<DustSummand>,
    residual: Rational,
    plan: Vec<Piece>,
}

impl Builder<'_> {
    fn segment(&mut self, lifts: Vec<Lift>, c: Rational) -> Result<()> {
        geometry(!c.is_negative() && c <= int(self.group as i64), "coefficient outside its segment")?;
        if c.is_zero() {
            return Ok(());
        }
        let problem = PowerSumProblem::new(self.params.clone(), self.group, self.m);
        let cert = decompose(&problem, &c, self.digits)?;
        for l in &lifts {
            let g = l.multiplier(self.params, self.m);
            self.residual += g.l1() * &cert.residual_bound;
            self.summands.extend(
                cert.summands.iter().map(|x| l.apply(x)).filter(|z| !z.is_zero(self.params)),
            );
        }
        self.plan.push(Piece::Segment { lifts, coefficient: c });
        Ok(())
    }

    fn fixed(&mut self, points: &[DustSummand; 2], count: usize) {
        for p in points {
            self.summands.extend(std::iter::repeat_n(p.clone(), count));
            self.plan.push(Piece::Fixed { point: p.clone(), count });
        }
    }

    /// Real coefficient a ∈ [−k, k]: x^m on the right, (ix)^m = −x^m on the
    /// left (m ≡ 2 mod 4 only).
    fn signed_real(&mut self, a: Rational) -> Result<()> {
        if a.is_negative() {
            self.segment(vec![Lift::Imag], -a)
        } else {
            self.segment(vec![Lift::Real], a)
        }
    }
}

/// Decompose a target in the closed unit disk as Σ z_j^m, z_j ∈ W, with at
/// most 2^(m+8) summands.
pub fn decompose_complex(
    params: &CantorParams,
    m: u32,
    target: &ComplexRational,
    digits: usize,
) -> Result<DustCertificate> {
    let p = plan(params, m)?;
    decompose_with_plan(params, &p, target, digits)
}

pub fn decompose_with_plan(
    params: &CantorParams,
    p: &DustPlan,
    target: &ComplexRational,
    digits: usize,
) -> Result<DustCertificate> {
    let m = p.m;
    if target.norm_sq() > int(1) {
        return Err(DustError::TargetOutsideRegion(target.to_string()));
    }
    // conj(f(W^k)) = f(W^k) when 4 | m: solve the upper half and swap
    if m % 4 == 0 && target.im.is_negative() {
        let c = decompose_with_plan(params, p, &target.conj(), digits)?;
        return Ok(symmetry_map(&c));
    }
    let mut b = Builder {
        params,
        m,
        group: p.group,
        digits,
        summands: Vec::new(),
        residual: Rational::zero(),
        plan: Vec::new(),
    };
    let (z, zero) = (target, Rational::zero());
    match (m % 4, p.shift.as_ref().expect("every plan has a shift")) {
        (0, Shift::Segment { lifts, direction: d }) => {
            let up = p.up.as_ref().expect("upward direction");
            let bcoef = &z.im / &up.im;
            let rest = &z.re - &bcoef * &up.re;
            b.segment(vec![Lift::Rotated(p.n0 + 1)], bcoef)?;
            if rest.is_negative() {
                b.segment(lifts.clone(), &rest / &d.re)?;
            } else {
                b.segment(vec![Lift::Real], rest)?;
            }
        }
        (3, Shift::Segment { lifts, direction: d }) => {
            // z = a − ib + c·D(−1 + i)
            let dd = d.im.clone();
            let cd = zero.clone().max(-&z.re).max(z.im.clone());
            b.segment(vec![Lift::Real], &z.re + &cd)?;
            b.segment(vec![Lift::Imag], &cd - &z.im)?;
            b.segment(lifts.clone(), cd / dd)?;
        }
        (1, shift) => {
            // z = a + ib + shift, the shift pointing along −1 − i
            let (a, bb) = match shift {
                Shift::Segment { lifts, direction: d } => {
                    let dd = -&d.re;
                    let cd = zero.clone().max(-&z.re).max(-&z.im);
                    b.segment(lifts.clone(), &cd / dd)?;
                    (&z.re + &cd, &z.im + &cd)
                }
                Shift::Fixed { points, count, value } => {
                    b.fixed(points, *count);
                    (&z.re - &value.re, &z.im - &value.im)
                }
            };
            b.segment(vec![Lift::Real], a)?;
            b.segment(vec![Lift::Imag], bb)?;
        }
        (2, shift) => {
            // z = a + b·up + shift, the shift pointing along −i
            let up = p.up.as_ref().expect("upward direction");
            let mut im = z.im.clone();
            if im.is_negative() {
                match shift {
                    Shift::Segment { lifts, direction: d } => {
                        b.segment(lifts.clone(), &im / &d.im)?;
                        im = zero.clone();
                    }
                    Shift::Fixed { points, count, value } => {
                        b.fixed(points, *count);
                        im -= &value.im;
                        geometry(!im.is_negative(), "fixed shift too short")?;
                    }
                }
            }
            let bcoef = &im / &up.im;
            b.signed_real(&z.re - &bcoef * &up.re)?;
            b.segment(vec![Lift::Rotated(p.n0 + 1)], bcoef)?;
        }
        _ => unreachable!("plan shape matches m mod 4"),
    }
    let budget = 4 * p.group as u64;
    let cert = DustCertificate {
        params: params.clone(),
        m,
        target: target.clone(),
        budget,
        summands: b.summands,
        residual_bound: b.residual,
        plan: b.plan,
    };
    geometry(cert.summands.len() as u64 <= budget, "summand budget")?;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3() -> CantorParams {
        CantorParams::ternary()
    }

    fn c(re: Rational, im: Rational) -> ComplexRational {
        ComplexRational::new(re, im)
    }

    #[test]
    fn rotation_examples() {
        let p = t3();
        assert_eq!(rotation_vector(&p, 0, 4).value, ComplexRational::real(int(-4)));
        assert_eq!(rotation_vector(&p, 1, 2).value, c(rat(8, 9), rat(2, 3)));
        assert_eq!(rotation_vector(&p, -1, 2).value, c(rat(-8, 9), rat(2, 3)));
        for n in -8..=8i64 {
            for m in 1..=12 {
                let v = rotation_vector(&p, n, m);
                let base = int(1) + p.r_pow(2 * n.unsigned_abs() as usize);
                assert_eq!(v.norm_sq(), pow_u(&base, m as u64));
            }
        }
    }

    #[test]
    fn parse_complex() {
        assert_eq!("-1/2+1/2i".parse::<ComplexRational>().unwrap(), c(rat(-1, 2), rat(1, 2)));
        assert_eq!("3/4 - i".parse::<ComplexRational>().unwrap(), c(rat(3, 4), int(-1)));
        assert_eq!("-2i".parse::<ComplexRational>().unwrap(), c(int(0), int(-2)));
        assert_eq!("5".parse::<ComplexRational>().unwrap(), c(int(5), int(0)));
        assert_eq!("1/3,-1/5".parse::<ComplexRational>().unwrap(), c(rat(1, 3), rat(-1, 5)));
        assert!("x+i".parse::<ComplexRational>().is_err());
        let z = c(rat(-7, 9), rat(-2, 5));
        assert_eq!(z.to_string().parse::<ComplexRational>().unwrap(), z);
    }

    #[test]
    fn theta_values() {
        let p = t3();
        let e = theta_enclosure(&p, 0, &rat(1, 1_000_000)).unwrap();
        let pi4 = crate::numerics::certified_pi(&rat(1, 10_000_000)).unwrap().scale(&rat(1, 4));
        assert!(e.intersect(&pi4).is_some());
        for n in -1..=3 {
            assert!(angle_chain_holds(&p, n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn windows() {
        let p = t3();
        // 4·atan(1/3) ≈ 1.287 is already below π/2
        assert_eq!(angle_window(&p, 4, &rat(1, 2)).unwrap(), 0);
        assert_eq!(angle_window(&p, 3, &rat(1, 3)).unwrap(), 0);
        let p5 = plan(&p, 5).unwrap();
        assert_eq!(p5.case, "diagonal");
        assert_eq!(rot_pair(&p, 5, 0).1, c(int(-8), int(-8)));
        let p6 = plan(&p, 6).unwrap();
        assert_eq!(p6.case, "downward");
        assert_eq!(rot_pair(&p, 6, 0).1, c(int(0), int(-16)));
        assert_eq!(rot_pair(&p, 3, 0).1, c(int(-4), int(4)));
        for m in 3..=16 {
            plan(&p, m).unwrap_or_else(|e| panic!("m={m}: {e}"));
        }
    }

    #[test]
    fn budgets() {
        assert_eq!(disk_cover_budget(3).unwrap(), 2048);
        assert_eq!(disk_cover_budget(4).unwrap(), 4096);
        assert!(matches!(disk_cover_budget(2), Err(DustError::BadExponent(2))));
    }

    #[test]
    fn zero_and_one() {
        let p = t3();
        let z = decompose_complex(&p, 4, &ComplexRational::zero(), 10).unwrap();
        assert!(z.summands.is_empty());
        assert_eq!(z.replay().unwrap(), ComplexRational::zero());
        let one = decompose_complex(&p, 3, &ComplexRational::one(), 20).unwrap();
        assert!(one.verify());
    }

    #[test]
    fn cubic_off_axis() {
        let p = t3();
        let t = c(rat(-1, 2), rat(1, 2));
        let cert = decompose_complex(&p, 3, &t, 40).unwrap();
        assert!(cert.verify());
        assert!(cert.summands.len() <= 2048);
        let s = symmetry_map(&cert);
        assert_eq!(s.target, symmetry_point(&t, 3));
        assert!(s.verify());
        let back = symmetry_map(&s);
        assert_eq!(back.target, t);
        assert!(back.verify());
    }

    #[test]
    fn outside_disk() {
        let r = decompose_complex(&t3(), 3, &c(int(1), rat(1, 10)), 10);
        assert!(matches!(r, Err(DustError::TargetOutsideRegion(_))));
        let q = CantorParams::new(rat(1, 4)).unwrap();
        assert!(matches!(decompose_complex(&q, 3, &ComplexRational::zero(), 10), Err(DustError::NotTernary)));
    }

    #[test]
    fn tampered_certificate_fails() {
        let mut cert = decompose_complex(&t3(), 3, &c(rat(1, 3), rat(-1, 4)), 20).unwrap();
        assert!(cert.verify());
        cert.target = c(rat(1, 3), rat(-1, 5));
        assert!(!cert.verify());
    }
}
