//! Images of the power-sum map on boxes of level intervals, the subdivision
//! criterion, and the digit-by-digit solver producing decomposition
//! certificates for real targets.

use std::ops::ControlFlow;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundsError};
use crate::cantor::{left_endpoints, CantorError, CantorParams, CantorPoint, LevelInterval, SymbolWord, Tail};
use crate::multiset::{for_each_multiset, multiset_count};
use crate::numerics::{ceil, int, pow_u, ratstr, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PowerSumError {
    #[error("target {target} outside [0, {k}]")]
    TargetOutOfRange { target: String, k: usize },
    #[error("target {target} outside the box image [{lo}, {hi}]")]
    TargetOutsideImage { target: String, lo: String, hi: String },
    #[error("subdivision criterion not satisfied")]
    CriterionFailed,
    #[error("need at least two coordinates, got {0}")]
    TooFewCoordinates(usize),
    #[error("exponent must be at least 1")]
    BadExponent,
    #[error("digits must be at least 1")]
    BadDigits,
    #[error("parameters not certified: {0}")]
    NotCertified(String),
    #[error("piece selection exhausted for {0}")]
    PieceSelectionExhausted(String),
    #[error("internal search failure: {0}")]
    SearchFailure(String),
    #[error("no admissible seed box found at depth {depth}")]
    NoSeedBox { depth: usize },
    #[error("enumeration budget exceeded: {count} seed boxes > {budget}")]
    Budget { count: String, budget: u64 },
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Cantor(#[from] CantorError),
}

pub type Result<T> = std::result::Result<T, PowerSumError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerSumProblem {
    pub params: CantorParams,
    pub k: usize,
    pub m: u32,
}

impl PowerSumProblem {
    pub fn new(params: CantorParams, k: usize, m: u32) -> Self {
        Self { params, k, m }
    }
}

/// A product of level intervals. Active coordinates share the depth of the
/// box and are the only ones ever subdivided; frozen coordinates are exact
/// points and act as constant offsets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PowerBox {
    pub depth: usize,
    pub active: Vec<LevelInterval>,
    pub frozen: Vec<CantorPoint>,
}

impl PowerBox {
    pub fn new(params: &CantorParams, words: Vec<SymbolWord>, frozen: Vec<CantorPoint>) -> Self {
        let depth = words.first().map_or(0, |w| w.len());
        assert!(words.iter().all(|w| w.len() == depth), "active words must share one depth");
        assert!(frozen.iter().all(|p| p.is_exact()), "frozen coordinates must be exact points");
        let active = words.into_iter().map(|w| LevelInterval::new(params, w)).collect();
        Self { depth, active, frozen }
    }

    /// Every coordinate at the same word.
    pub fn uniform(params: &CantorParams, word: SymbolWord, k: usize) -> Self {
        Self::new(params, vec![word; k], Vec::new())
    }

    pub fn len(&self) -> usize {
        self.active.len() + self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn frozen_offset(&self, params: &CantorParams, m: u32) -> Rational {
        self.frozen.iter().map(|p| pow_u(&p.value(params), m as u64)).sum()
    }

    fn points(&self, tail: Tail) -> Vec<CantorPoint> {
        self.active
            .iter()
            .map(|i| CantorPoint::new(i.word.clone(), tail.clone()))
            .chain(self.frozen.iter().cloned())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxImage {
    #[serde(with = "ratstr")]
    pub lo: Rational,
    #[serde(with = "ratstr")]
    pub hi: Rational,
}

impl BoxImage {
    pub fn contains(&self, t: &Rational) -> bool {
        &self.lo <= t && t <= &self.hi
    }
}

/// `[Σ u_i^m, Σ (u_i + r^n)^m]` plus the frozen m-th powers.
pub fn box_image(params: &CantorParams, b: &PowerBox, m: u32) -> BoxImage {
    box_image_with(b, m, b.frozen_offset(params, m))
}

fn box_image_with(b: &PowerBox, m: u32, off: Rational) -> BoxImage {
    let e = m as u64;
    let mut lo = off.clone();
    let mut hi = off;
    for (start, len) in runs(&b.active) {
        let n = int(len as i64);
        lo += pow_u(&b.active[start].lo, e) * &n;
        hi += pow_u(&b.active[start].hi, e) * n;
    }
    BoxImage { lo, hi }
}

/// Maximal runs of equal consecutive intervals as (start, length). Boxes
/// produced by the chain step have at most depth + 1 runs.
fn runs(v: &[LevelInterval]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, c) in v.iter().enumerate() {
        match out.last_mut() {
            Some((s, len)) if v[*s].word == c.word => *len += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

/// The subdivision criterion `Σ_{i≠M} u_i^(m−1) ≥ λ (u_M + r^n)^(m−1)` over
/// the active coordinates, where `u_M` is the largest active left endpoint.
/// The weak form uses `u_M + r^n − r^(n+1)`.
///
/// Frozen coordinates do not enter: they shift every child image by the
/// same amount and so cannot close a gap between children.
pub fn subdivision_ok(params: &CantorParams, b: &PowerBox, m: u32, strong: bool) -> Result<bool> {
    if b.len() < 2 {
        return Err(PowerSumError::TooFewCoordinates(b.len()));
    }
    if m == 0 {
        return Err(PowerSumError::BadExponent);
    }
    if b.active.is_empty() {
        return Ok(true);
    }
    let e = (m - 1) as u64;
    let rs = runs(&b.active);
    let umax = rs.iter().map(|&(s, _)| &b.active[s].lo).max().unwrap().clone();
    let total: Rational = rs
        .into_iter()
        .map(|(s, len)| pow_u(&b.active[s].lo, e) * int(len as i64))
        .sum();
    let lhs = total - pow_u(&umax, e);
    let mut top = umax + params.r_pow(b.depth);
    if !strong {
        top -= params.r_pow(b.depth + 1);
    }
    Ok(lhs >= params.lambda() * pow_u(&top, e))
}

/// One refinement step: a child box (one child per active coordinate) whose
/// image contains `target`.
///
/// The children along the chain 0…0, 10…0, 110…0, …, 1…1 have increasing
/// lower and upper image endpoints, and consecutive ones overlap when the
/// criterion holds. The first child whose upper end reaches the target
/// therefore contains it.
pub fn refine_target(params: &CantorParams, b: &PowerBox, m: u32, target: &Rational) -> Result<PowerBox> {
    if !subdivision_ok(params, b, m, true)? {
        return Err(PowerSumError::CriterionFailed);
    }
    let img = box_image(params, b, m);
    if !img.contains(target) {
        return Err(PowerSumError::TargetOutsideImage {
            target: target.to_string(),
            lo: img.lo.to_string(),
            hi: img.hi.to_string(),
        });
    }
    Ok(chain_step(params, b, m, target, &b.frozen_offset(params, m)))
}

fn chain_step(params: &CantorParams, b: &PowerBox, m: u32, target: &Rational, off: &Rational) -> PowerBox {
    let e = m as u64;
    let rs = runs(&b.active);
    // per run: both children and their image endpoints
    let kids: Vec<_> = rs
        .iter()
        .map(|&(s, _)| {
            let c0 = b.active[s].child(params, false);
            let c1 = b.active[s].child(params, true);
            let p0 = (pow_u(&c0.lo, e), pow_u(&c0.hi, e));
            let p1 = (pow_u(&c1.lo, e), pow_u(&c1.hi, e));
            (c0, c1, p0, p1)
        })
        .collect();
    let mut lo = off.clone();
    let mut hi = off.clone();
    for (&(_, len), (_, _, p0, _)) in rs.iter().zip(&kids) {
        lo += &p0.0 * int(len as i64);
        hi += &p0.1 * int(len as i64);
    }
    // walk the chain run by run; inside a run both ends move linearly
    let mut j = None;
    for (&(start, len), (_, _, p0, p1)) in rs.iter().zip(&kids) {
        if &hi >= target {
            j = Some(start);
            break;
        }
        let dlo = &p1.0 - &p0.0;
        let dhi = &p1.1 - &p0.1;
        let n = int(len as i64);
        if &(&hi + &dhi * &n) >= target {
            let c = ceil(&((target - &hi) / &dhi)).to_usize().expect("step count fits");
            lo += &dlo * int(c as i64);
            j = Some(start + c);
            break;
        }
        lo += dlo * &n;
        hi += dhi * n;
    }
    let j = j.unwrap_or_else(|| {
        assert!(&hi >= target, "target above the all-ones child, which shares the parent's upper end");
        b.active.len()
    });
    assert!(&lo <= target, "children of a box satisfying the criterion failed to overlap at chain index {j}");
    let mut active = Vec::with_capacity(b.active.len());
    for (&(start, len), (c0, c1, _, _)) in rs.iter().zip(&kids) {
        for i in start..start + len {
            active.push(if i < j { c1.clone() } else { c0.clone() });
        }
    }
    PowerBox { depth: b.depth + 1, active, frozen: b.frozen.clone() }
}

/// One recorded refinement level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub depth: usize,
    pub active: usize,
    pub criterion: bool,
    pub contains_target: bool,
    /// Image width within Σ m r^n over the active coordinates.
    pub width_ok: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn all_sound(&self) -> bool {
        self.steps.iter().all(|s| s.criterion && s.contains_target && s.width_ok)
    }
}

/// Refine `b` until every active word has length `digits`, or the target hits
/// an image endpoint and the coordinates can be closed off exactly.
fn solve_box(
    params: &CantorParams,
    m: u32,
    mut b: PowerBox,
    target: &Rational,
    digits: usize,
    mut trace: Option<&mut Trace>,
) -> Result<Vec<CantorPoint>> {
    if b.active.is_empty() {
        return Ok(b.frozen);
    }
    let rm_bound = int(m as i64);
    // frozen coordinates never change, so their offset is computed once
    let off = b.frozen_offset(params, m);
    loop {
        let img = box_image_with(&b, m, off.clone());
        let criterion = subdivision_ok(params, &b, m, true)?;
        if let Some(t) = trace.as_deref_mut() {
            let width = &img.hi - &img.lo;
            let bound = &rm_bound * params.r_pow(b.depth) * int(b.active.len() as i64);
            t.steps.push(TraceStep {
                depth: b.depth,
                active: b.active.len(),
                criterion,
                contains_target: img.contains(target),
                width_ok: width <= bound,
            });
        }
        if !img.contains(target) {
            return Err(PowerSumError::SearchFailure(format!(
                "target {target} left the image [{}, {}] at depth {}",
                img.lo, img.hi, b.depth
            )));
        }
        if target == &img.hi {
            return Ok(b.points(Tail::Ones));
        }
        if target == &img.lo {
            return Ok(b.points(Tail::Zeros));
        }
        if b.depth >= digits {
            return Ok(b.points(Tail::Open));
        }
        if !criterion {
            return Err(PowerSumError::CriterionFailed);
        }
        b = chain_step(params, &b, m, target, &off);
    }
}

/// A replayable witness that `target` is (up to `residual_bound`) a sum of
/// `k` m-th powers of points of C_α.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    pub params: CantorParams,
    pub k: usize,
    pub m: u32,
    #[serde(with = "ratstr")]
    pub target: Rational,
    pub summands: Vec<CantorPoint>,
    pub depth: usize,
    #[serde(with = "ratstr")]
    pub residual_bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("certificate has {got} summands, expected {expected}")]
    WrongCount { got: usize, expected: usize },
    #[error("|sum - target| = {gap} exceeds the residual bound {bound}")]
    ResidualExceeded { gap: String, bound: String },
    #[error("target outside the summands' image [{lo}, {hi}]")]
    OutsideImage { lo: String, hi: String },
    #[error("residual bound {bound} exceeds the open summands' total width {width}")]
    LooseResidual { bound: String, width: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    /// Σ x_j^m at the left endpoints (the exact sum when no tail is open).
    pub sum: Rational,
    pub image: BoxImage,
}

/// Σ of the m-th powers of each summand's range, as (at left ends, at right ends).
pub fn summand_image(params: &CantorParams, m: u32, summands: &[CantorPoint]) -> BoxImage {
    let e = m as u64;
    let mut lo = Rational::zero();
    let mut hi = Rational::zero();
    for run in summands.chunk_by(|x, y| x == y) {
        let (a, b) = run[0].range(params);
        let n = int(run.len() as i64);
        lo += pow_u(&a, e) * &n;
        hi += pow_u(&b, e) * n;
    }
    BoxImage { lo, hi }
}

impl DecompositionCertificate {
    fn assemble(problem: &PowerSumProblem, target: Rational, summands: Vec<CantorPoint>, depth: usize) -> Self {
        let img = summand_image(&problem.params, problem.m, &summands);
        Self {
            params: problem.params.clone(),
            k: problem.k,
            m: problem.m,
            target,
            summands,
            depth,
            residual_bound: img.hi - img.lo,
        }
    }

    /// Exact re-evaluation of every claim the certificate makes.
    pub fn replay(&self) -> std::result::Result<Replay, ReplayError> {
        if self.summands.len() != self.k {
            return Err(ReplayError::WrongCount { got: self.summands.len(), expected: self.k });
        }
        let image = summand_image(&self.params, self.m, &self.summands);
        let width = &image.hi - &image.lo;
        if self.residual_bound > width {
            return Err(ReplayError::LooseResidual {
                bound: self.residual_bound.to_string(),
                width: width.to_string(),
            });
        }
        if !image.contains(&self.target) {
            return Err(ReplayError::OutsideImage { lo: image.lo.to_string(), hi: image.hi.to_string() });
        }
        let gap = (&image.lo - &self.target).abs();
        if gap > self.residual_bound {
            return Err(ReplayError::ResidualExceeded {
                gap: gap.to_string(),
                bound: self.residual_bound.to_string(),
            });
        }
        Ok(Replay { sum: image.lo.clone(), image })
    }

    pub fn verify(&self) -> bool {
        self.replay().is_ok()
    }

    pub fn problem(&self) -> PowerSumProblem {
        PowerSumProblem::new(self.params.clone(), self.k, self.m)
    }
}

/// Certificate for `target · r^(lm)`: prepend `l` zeros to every word.
pub fn scale_certificate(cert: &DecompositionCertificate, l: usize) -> DecompositionCertificate {
    if l == 0 {
        return cert.clone();
    }
    let f = cert.params.r_pow(l * cert.m as usize);
    DecompositionCertificate {
        params: cert.params.clone(),
        k: cert.k,
        m: cert.m,
        target: &cert.target * &f,
        summands: cert.summands.iter().map(|s| s.prepend_zeros(l)).collect(),
        depth: cert.depth + l,
        residual_bound: &cert.residual_bound * f,
    }
}

/// Constants of the certified lemma chain for one (r, m, κ).
struct Route<'a> {
    params: &'a CantorParams,
    m: u32,
    digits: usize,
    trace: Option<&'a mut Trace>,
    k_star: usize,
    n_star: usize,
    k_c: usize,
    l0: usize,
    m0: usize,
    a: Rational,
    b: Rational,
    omr_m: Rational,
    r_m: Rational,
}

impl Route<'_> {
    fn pow(&self, x: &Rational) -> Rational {
        pow_u(x, self.m as u64)
    }

    fn fill(mut v: Vec<CantorPoint>, total: usize) -> Vec<CantorPoint> {
        assert!(v.len() <= total, "piece uses {} summands, only {total} available", v.len());
        v.resize(total, CantorPoint::zero());
        v
    }

    /// s ∈ [a, kk] with kk summands.
    fn from_a(&mut self, kk: usize, s: &Rational) -> Result<Vec<CantorPoint>> {
        let p = self.params;
        let omr = p.one_minus_r();
        // all kk coordinates on [1−r, 1]
        if &(int(kk as i64) * &self.omr_m) <= s {
            let b = PowerBox::uniform(p, SymbolWord::ones(1), kk);
            return solve_box(p, self.m, b, s, self.digits, self.trace.as_deref_mut());
        }
        // k* coordinates on [1−r, 1−r+r^n*], j more fixed at 1−r
        let top = int(self.k_star as i64) * self.pow(&(&omr + p.r_pow(self.n_star)));
        for j in 0..=(kk - self.k_star) {
            let shift = int(j as i64) * &self.omr_m;
            if &(&self.a + &shift) <= s && s <= &(&top + &shift) {
                let word = SymbolWord::ones(1).concat(&SymbolWord::zeros(self.n_star - 1));
                let frozen = vec![CantorPoint::one_minus_r(); j];
                let b = PowerBox::new(p, vec![word; self.k_star], frozen);
                let v = solve_box(p, self.m, b, s, self.digits, self.trace.as_deref_mut())?;
                return Ok(Self::fill(v, kk));
            }
        }
        Err(PowerSumError::PieceSelectionExhausted(format!("{s} in [a, {kk}]")))
    }

    /// y ∈ [b, kappa] with kappa ≥ k_c + k* − 1 summands.
    fn from_b(&mut self, kappa: usize, y: &Rational) -> Result<Vec<CantorPoint>> {
        if y >= &self.a {
            return self.from_a(kappa, y);
        }
        let p = self.params;
        let slice_top = self.pow(&(p.one_minus_r() + p.r_pow(self.l0)));
        let top = int(self.k_c as i64) * &self.r_m + &slice_top;
        for j in 0..kappa - self.k_c {
            let shift = int(j as i64) * &self.omr_m;
            if &(&self.b + &shift) <= y && y <= &(&top + &shift) {
                let y1 = y - &shift;
                let lo = &y1 - int(self.k_c as i64) * &self.r_m;
                let hi = &y1 - &self.a * &self.r_m;
                let x = slice_point(p, self.m, self.l0, &lo, &hi)?;
                let s = (&y1 - self.pow(&x.value(p))) / &self.r_m;
                let mut v: Vec<CantorPoint> = self
                    .from_a(self.k_c, &s)?
                    .into_iter()
                    .map(|c| c.prepend_zeros(1))
                    .collect();
                v.push(x);
                v.extend(std::iter::repeat(CantorPoint::one_minus_r()).take(j));
                return Ok(Self::fill(v, kappa));
            }
        }
        Err(PowerSumError::PieceSelectionExhausted(format!("{y} in [b, {kappa}]")))
    }

    /// y ∈ [(1−r)^m, kappa] with kappa ≥ k_c + k* summands.
    fn from_unit(&mut self, kappa: usize, y: &Rational) -> Result<Vec<CantorPoint>> {
        if y == &self.omr_m {
            return Ok(Self::fill(vec![CantorPoint::one_minus_r()], kappa));
        }
        if y >= &self.b {
            return self.from_b(kappa, y);
        }
        let p = self.params;
        let kp = self.k_c + self.k_star - 1;
        // smallest n with b r^{m(n+1)} + (1−r)^m ≤ y
        let mut n = 0usize;
        let mut scale = self.r_m.clone();
        while &(&self.b * &scale + &self.omr_m) > y {
            n += 1;
            scale *= &self.r_m;
        }
        let level = self.m as usize * n + self.m0;
        let lo = y - int(kp as i64) * &scale;
        let hi = y - &self.b * &scale;
        let x = slice_point(p, self.m, level, &lo, &hi)?;
        let s = (y - self.pow(&x.value(p))) / &scale;
        let mut v: Vec<CantorPoint> = self
            .from_b(kp, &s)?
            .into_iter()
            .map(|c| c.prepend_zeros(n + 1))
            .collect();
        v.push(x);
        Ok(Self::fill(v, kappa))
    }
}

/// A point x of [1−r, 1−r+r^l] ∩ C_α with x^m in the window [lo, hi].
///
/// Descends the level tree below the word 1 0^(l−1), keeping a node whose
/// image meets the window; stops as soon as an endpoint lands inside.
pub fn slice_point(params: &CantorParams, m: u32, l: usize, lo: &Rational, hi: &Rational) -> Result<CantorPoint> {
    if l == 0 {
        return Err(PowerSumError::NotCertified("slice level must be at least 1".into()));
    }
    let e = m as u64;
    let meets = |i: &LevelInterval| &pow_u(&i.lo, e) <= hi && &pow_u(&i.hi, e) >= lo;
    let inside = |x: &Rational| {
        let v = pow_u(x, e);
        lo <= &v && &v <= hi
    };
    let mut node = LevelInterval::new(params, SymbolWord::ones(1).concat(&SymbolWord::zeros(l - 1)));
    if !meets(&node) {
        return Err(PowerSumError::SearchFailure(format!("slice at level {l} misses window [{lo}, {hi}]")));
    }
    for _ in 0..100_000 {
        if inside(&node.lo) {
            return Ok(CantorPoint::new(node.word, Tail::Zeros));
        }
        if inside(&node.hi) {
            return Ok(CantorPoint::new(node.word, Tail::Ones));
        }
        let c0 = node.child(params, false);
        node = if meets(&c0) {
            c0
        } else {
            let c1 = node.child(params, true);
            if !meets(&c1) {
                return Err(PowerSumError::SearchFailure(format!(
                    "window [{lo}, {hi}] fell into a gap below {}",
                    node.word
                )));
            }
            c1
        };
    }
    Err(PowerSumError::SearchFailure("slice descent did not terminate".into()))
}

fn check_target(problem: &PowerSumProblem, target: &Rational, digits: usize) -> Result<()> {
    if problem.m == 0 {
        return Err(PowerSumError::BadExponent);
    }
    if digits == 0 {
        return Err(PowerSumError::BadDigits);
    }
    if target.is_negative() || target > &int(problem.k as i64) {
        return Err(PowerSumError::TargetOutOfRange { target: target.to_string(), k: problem.k });
    }
    Ok(())
}

/// Certified decomposition of `target ∈ [0, k]` as a sum of `k` m-th powers,
/// with every open word refined to at least `digits` symbols.
pub fn decompose(problem: &PowerSumProblem, target: &Rational, digits: usize) -> Result<DecompositionCertificate> {
    decompose_inner(problem, target, digits, None)
}

/// As [`decompose`], recording every refinement level into `trace`.
pub fn decompose_traced(
    problem: &PowerSumProblem,
    target: &Rational,
    digits: usize,
    trace: &mut Trace,
) -> Result<DecompositionCertificate> {
    decompose_inner(problem, target, digits, Some(trace))
}

fn decompose_inner(
    problem: &PowerSumProblem,
    target: &Rational,
    digits: usize,
    trace: Option<&mut Trace>,
) -> Result<DecompositionCertificate> {
    check_target(problem, target, digits)?;
    let kk = problem.k;
    if target.is_zero() {
        return Ok(DecompositionCertificate::assemble(problem, target.clone(), vec![CantorPoint::zero(); kk], digits));
    }
    if problem.m == 1 {
        return decompose_linear(problem, target, digits, trace);
    }
    let mut route = plan(problem, digits, trace)?;
    // scale small targets up into [(1−r)^m, k]
    let mut l = 0usize;
    let mut t = target.clone();
    while t < route.omr_m {
        t /= &route.r_m;
        l += 1;
    }
    let summands: Vec<CantorPoint> = route.from_unit(kk, &t)?.into_iter().map(|c| c.prepend_zeros(l)).collect();
    Ok(DecompositionCertificate::assemble(problem, target.clone(), summands, digits))
}

fn plan<'a>(problem: &'a PowerSumProblem, digits: usize, trace: Option<&'a mut Trace>) -> Result<Route<'a>> {
    let p = &problem.params;
    let m = problem.m;
    let kk = problem.k;
    let prof = bounds::profile(p, m)?;
    let k_star = prof.k_star as usize;
    if kk < k_star + 2 {
        return Err(PowerSumError::NotCertified(format!("k = {kk} is below k* + 2 = {}", k_star + 2)));
    }
    let r_m = pow_u(p.r(), m as u64);
    let omr_m = pow_u(&p.one_minus_r(), m as u64);
    if int(kk as i64) * &r_m < omr_m {
        return Err(PowerSumError::NotCertified(format!("k r^m < (1-r)^m at k = {kk}")));
    }
    let k_c = bounds::largest_certified_k(&prof, (kk - k_star) as u64).ok_or_else(|| {
        PowerSumError::NotCertified(format!("no k <= {} satisfies A1, A2', A3 and A4", kk - k_star))
    })? as usize;
    let rep = bounds::check_conditions(&prof, k_c as u64);
    let to_level = |x: Option<i64>| {
        x.filter(|&v| v >= 1)
            .and_then(|v| v.to_usize())
            .ok_or_else(|| PowerSumError::NotCertified(format!("slice level {x:?} below 1")))
    };
    Ok(Route {
        params: p,
        m,
        digits,
        trace,
        k_star,
        n_star: prof.n_star as usize,
        k_c,
        l0: to_level(rep.l0)?,
        m0: to_level(rep.m0)?,
        a: prof.a,
        b: prof.b,
        omr_m,
        r_m,
    })
}

/// m = 1: shift the target by l(1−r) into [k(1−r), k], solve with every
/// coordinate on [1−r, 1], then drop the leading 1 of l of the words.
fn decompose_linear(
    problem: &PowerSumProblem,
    target: &Rational,
    digits: usize,
    trace: Option<&mut Trace>,
) -> Result<DecompositionCertificate> {
    let p = &problem.params;
    let kk = problem.k;
    let g = bounds::g_alpha_1(p);
    if num_bigint::BigInt::from(kk) < g {
        return Err(PowerSumError::NotCertified(format!("k = {kk} is below G(1) = {g}")));
    }
    let omr = p.one_minus_r();
    let floor_k = int(kk as i64) * &omr;
    let mut l = 0usize;
    let mut t = target.clone();
    while t < floor_k {
        t += &omr;
        l += 1;
    }
    let b = PowerBox::uniform(p, SymbolWord::ones(1), kk);
    let pts = solve_box(p, 1, b, &t, digits, trace)?;
    let summands = pts
        .into_iter()
        .enumerate()
        .map(|(i, c)| if i < l { CantorPoint::new(c.word.with_bit(0, false), c.tail) } else { c })
        .collect();
    Ok(DecompositionCertificate::assemble(problem, target.clone(), summands, digits))
}

/// Decomposition for parameters outside the certified regime.
///
/// Uses the certified route when its preconditions hold. Otherwise the
/// target is scaled by powers of r^(−m) and a seed box is searched among the
/// multisets of level-`seed_depth` intervals: one that satisfies the strong
/// criterion and whose image contains the scaled target. Failure means only
/// that no seed exists at this depth, not that the target is uncovered.
pub fn decompose_best_effort(
    problem: &PowerSumProblem,
    target: &Rational,
    digits: usize,
    seed_depth: usize,
    budget: u64,
) -> Result<DecompositionCertificate> {
    match decompose(problem, target, digits) {
        Err(PowerSumError::NotCertified(_)) => {}
        other => return other,
    }
    let p = &problem.params;
    let m = problem.m;
    let kk = problem.k;
    if kk < 2 {
        return Err(PowerSumError::NoSeedBox { depth: seed_depth });
    }
    let ends = left_endpoints(p, seed_depth, crate::cantor::DEFAULT_DEPTH_CAP)?;
    let count = multiset_count(ends.len(), kk);
    if count > num_bigint::BigUint::from(budget) {
        return Err(PowerSumError::Budget { count: count.to_string(), budget });
    }
    let r_m = pow_u(p.r(), m as u64);
    let kq = int(kk as i64);
    let mut scaled = vec![(0usize, target.clone())];
    let mut t = target.clone();
    while &t / &r_m <= kq && t.is_positive() {
        t /= &r_m;
        scaled.push((scaled.len(), t.clone()));
    }
    for (l, t) in scaled.into_iter().rev() {
        let mut found: Option<PowerBox> = None;
        let _ = for_each_multiset(ends.len(), kk, 0, |idx| {
            let words = idx.iter().map(|&i| SymbolWord::from_index(i as u64, seed_depth)).collect();
            let b = PowerBox::new(p, words, Vec::new());
            if box_image(p, &b, m).contains(&t) && subdivision_ok(p, &b, m, true).unwrap_or(false) {
                found = Some(b);
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        if let Some(b) = found {
            let pts = solve_box(p, m, b, &t, digits, None)?;
            let summands = pts.into_iter().map(|c| c.prepend_zeros(l)).collect();
            return Ok(DecompositionCertificate::assemble(problem, target.clone(), summands, digits + l));
        }
    }
    Err(PowerSumError::NoSeedBox { depth: seed_depth })
}

/// Convenience: exact value Σ x^m for fully exact summand lists.
pub fn exact_sum(params: &CantorParams, m: u32, summands: &[CantorPoint]) -> Option<Rational> {
    summands
        .iter()
        .all(|s| s.is_exact())
        .then(|| summands.iter().map(|s| pow_u(&s.value(params), m as u64)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn third() -> CantorParams {
        CantorParams::ternary()
    }

    fn w(s: &str) -> SymbolWord {
        s.parse().unwrap()
    }

    fn bx(words: &[&str]) -> PowerBox {
        PowerBox::new(&third(), words.iter().map(|s| w(s)).collect(), Vec::new())
    }

    #[test]
    fn images() {
        let p = third();
        let b = bx(&["1", "1"]);
        assert_eq!(box_image(&p, &b, 1), BoxImage { lo: rat(4, 3), hi: int(2) });
        let b2 = bx(&["10", "11"]);
        assert_eq!(box_image(&p, &b2, 2), BoxImage { lo: rat(100, 81), hi: rat(130, 81) });
        let f = PowerBox::new(&p, Vec::new(), vec![CantorPoint::zero()]);
        assert_eq!(box_image(&p, &f, 4), BoxImage { lo: int(0), hi: int(0) });
    }

    #[test]
    fn criterion_examples() {
        let p = third();
        assert!(subdivision_ok(&p, &bx(&["1", "1"]), 1, true).unwrap());
        assert!(subdivision_ok(&p, &bx(&["10", "10", "10"]), 4, true).unwrap());
        assert!(!subdivision_ok(&p, &bx(&["0", "0"]), 2, true).unwrap());
        assert!(subdivision_ok(&p, &bx(&["1"]), 2, true).is_err());
    }

    #[test]
    fn frozen_do_not_help_the_criterion() {
        let p = third();
        // one active coordinate never satisfies the criterion, however many
        // frozen ones sit next to it
        let b = PowerBox::new(&p, vec![w("1")], vec![CantorPoint::one_minus_r(); 5]);
        assert!(!subdivision_ok(&p, &b, 2, true).unwrap());
    }

    #[test]
    fn refine_examples() {
        let p = third();
        let b = bx(&["1", "1"]);
        let c = refine_target(&p, &b, 1, &int(2)).unwrap();
        assert_eq!(c.active.iter().map(|i| i.word.to_string()).collect::<Vec<_>>(), ["11", "11"]);
        let c = refine_target(&p, &b, 1, &rat(3, 2)).unwrap();
        assert_eq!(c.active.iter().map(|i| i.word.to_string()).collect::<Vec<_>>(), ["10", "10"]);
        assert_eq!(box_image(&p, &c, 1), BoxImage { lo: rat(12, 9), hi: rat(14, 9) });
        // three quartic coordinates on [2/3, 1] fail the criterion
        // (2 (2/3)^3 < 1); sixteen pass it
        let b3 = bx(&["1", "1", "1"]);
        assert!(!subdivision_ok(&p, &b3, 4, true).unwrap());
        let b16 = PowerBox::uniform(&p, w("1"), 16);
        let c = refine_target(&p, &b16, 4, &(int(16) * pow_u(&rat(2, 3), 4))).unwrap();
        assert!(c.active.iter().all(|i| i.word == w("10")));
        assert!(matches!(refine_target(&p, &b, 1, &int(3)), Err(PowerSumError::TargetOutsideImage { .. })));
        assert!(matches!(refine_target(&p, &bx(&["0", "0"]), 2, &int(0)), Err(PowerSumError::CriterionFailed)));
    }

    #[test]
    fn steinhaus_half() {
        let prob = PowerSumProblem::new(third(), 2, 1);
        let c = decompose(&prob, &rat(1, 2), 30).unwrap();
        c.replay().unwrap();
        assert!(c.residual_bound <= int(2) * pow_u(&rat(1, 3), 30));
    }

    #[test]
    fn right_endpoint_is_exact() {
        let prob = PowerSumProblem::new(third(), 16, 4);
        let c = decompose(&prob, &int(16), 40).unwrap();
        assert!(c.summands.iter().all(|s| s.value(&third()) == int(1)));
        assert_eq!(c.residual_bound, int(0));
        c.replay().unwrap();
    }

    #[test]
    fn quartic_seven() {
        let prob = PowerSumProblem::new(third(), 16, 4);
        let mut tr = Trace::default();
        let c = decompose_traced(&prob, &int(7), 40, &mut tr).unwrap();
        c.replay().unwrap();
        assert!(c.residual_bound <= int(64) * pow_u(&rat(1, 3), 40));
        assert!(tr.all_sound());
    }

    #[test]
    fn quartic_small_targets() {
        let prob = PowerSumProblem::new(third(), 16, 4);
        for t in [rat(1, 1000), rat(16, 81), rat(17, 81), rat(1, 5), rat(3, 10), rat(2, 3), rat(15, 1)] {
            let c = decompose(&prob, &t, 20).unwrap();
            c.replay().unwrap_or_else(|e| panic!("{t}: {e}"));
        }
    }

    #[test]
    fn scaling() {
        let p = third();
        let prob = PowerSumProblem::new(p.clone(), 2, 1);
        let c = decompose(&prob, &int(2), 5).unwrap();
        let s = scale_certificate(&c, 1);
        assert_eq!(s.target, rat(2, 3));
        s.replay().unwrap();
        assert_eq!(scale_certificate(&c, 0), c);
        let prob16 = PowerSumProblem::new(p, 16, 4);
        let c16 = decompose(&prob16, &int(16), 3).unwrap();
        let s16 = scale_certificate(&c16, 2);
        assert_eq!(s16.target, int(16) * pow_u(&rat(1, 3), 8));
        s16.replay().unwrap();
    }

    #[test]
    fn errors() {
        let prob = PowerSumProblem::new(third(), 2, 1);
        assert!(matches!(decompose(&prob, &int(3), 5), Err(PowerSumError::TargetOutOfRange { .. })));
        assert!(matches!(decompose(&prob, &int(-1), 5), Err(PowerSumError::TargetOutOfRange { .. })));
        assert!(matches!(decompose(&prob, &int(1), 0), Err(PowerSumError::BadDigits)));
        let small = PowerSumProblem::new(third(), 8, 3);
        assert!(matches!(decompose(&small, &int(1), 5), Err(PowerSumError::NotCertified(_))));
    }

    #[test]
    fn best_effort_cubes() {
        let prob = PowerSumProblem::new(third(), 8, 3);
        let c = decompose_best_effort(&prob, &int(5), 20, 2, 1_000_000).unwrap();
        c.replay().unwrap();
        let lone = PowerSumProblem::new(third(), 3, 2);
        assert!(matches!(
            decompose_best_effort(&lone, &rat(2, 5), 20, 2, 1_000_000),
            Err(PowerSumError::NoSeedBox { depth: 2 })
        ));
    }

    #[test]
    fn tampered_certificate_fails() {
        let prob = PowerSumProblem::new(third(), 16, 4);
        let mut c = decompose(&prob, &int(7), 10).unwrap();
        c.target += rat(1, 2);
        assert!(c.replay().is_err());
        let mut c = decompose(&prob, &int(7), 10).unwrap();
        c.summands.pop();
        assert!(matches!(c.replay(), Err(ReplayError::WrongCount { .. })));
    }
}
