//! Brute-force images f_{k,m}(F_n^k) as unions of intervals, gap reports,
//! the two-summand exclusion windows, the three-summand ε, and coverage
//! probes.

use std::cmp::Ordering;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::{truncation_cover, CantorError, CantorParams};
use crate::multiset::{for_each_multiset, multiset_count};
use crate::numerics::{
    certified_compare, int, pow_u, rat, ratstr, Expr, NumericsError, Rational, RationalInterval,
    DEFAULT_COMPARE_CAP,
};
use crate::powersum::PowerSumProblem;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("enumeration budget exceeded: {count} multisets > {budget}")]
    BudgetExceeded { count: String, budget: u64 },
    #[error("exponent must be at least 1")]
    BadExponent,
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, CoverageError>;

/// Sorted, disjoint, maximally merged closed intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageSet {
    pub params: CantorParams,
    pub k: usize,
    pub m: u32,
    pub n: usize,
    pub intervals: Vec<RationalInterval>,
}

impl CoverageSet {
    pub fn contains(&self, x: &Rational) -> bool {
        let i = self.intervals.partition_point(|iv| &iv.hi < x);
        i < self.intervals.len() && self.intervals[i].contains(x)
    }

    /// True when no interval meets the open interval (lo, hi).
    pub fn misses_open(&self, lo: &Rational, hi: &Rational) -> bool {
        self.intervals.iter().all(|iv| &iv.hi <= lo || &iv.lo >= hi)
    }

    /// Every interval of `self` lies inside some interval of `other`.
    pub fn is_subset_of(&self, other: &CoverageSet) -> bool {
        self.intervals.iter().all(|iv| {
            let j = other.intervals.partition_point(|o| o.hi < iv.lo);
            j < other.intervals.len() && other.intervals[j].contains_interval(iv)
        })
    }
}

/// Sort and coalesce; touching intervals merge.
pub fn merge_intervals(mut v: Vec<RationalInterval>) -> Vec<RationalInterval> {
    v.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
    let mut out: Vec<RationalInterval> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
            }
            _ => out.push(iv),
        }
    }
    out
}

fn check_budget(count: BigUint, budget: u64) -> Result<()> {
    if count > BigUint::from(budget) {
        Err(CoverageError::BudgetExceeded { count: count.to_string(), budget })
    } else {
        Ok(())
    }
}

/// Exact f_{k,m}(F_n^k): the union of box images over all size-k multisets of
/// level-n intervals.
pub fn enumerate_image(problem: &PowerSumProblem, n: usize, budget: u64) -> Result<CoverageSet> {
    let (p, k, m) = (&problem.params, problem.k, problem.m);
    if m == 0 {
        return Err(CoverageError::BadExponent);
    }
    let cover = truncation_cover(p, n, usize::MAX)?;
    let count = multiset_count(cover.len(), k);
    check_budget(count, budget)?;
    let e = m as u64;
    let lo: Vec<Rational> = cover.iter().map(|c| pow_u(&c.lo, e)).collect();
    let hi: Vec<Rational> = cover.iter().map(|c| pow_u(&c.hi, e)).collect();
    let intervals = if k == 0 {
        vec![RationalInterval::point(int(0))]
    } else {
        let parts: Vec<Vec<RationalInterval>> = (0..cover.len())
            .into_par_iter()
            .map(|first| {
                let mut local = Vec::new();
                let _ = for_each_multiset(cover.len(), k - 1, first, |rest| {
                    let mut a = lo[first].clone();
                    let mut b = hi[first].clone();
                    for &i in rest {
                        a += &lo[i];
                        b += &hi[i];
                    }
                    local.push(RationalInterval::new(a, b));
                    ControlFlow::Continue(())
                });
                merge_intervals(local)
            })
            .collect();
        merge_intervals(parts.into_iter().flatten().collect())
    };
    Ok(CoverageSet { params: p.clone(), k, m, n, intervals })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    #[serde(with = "ratstr")]
    pub lo: Rational,
    #[serde(with = "ratstr")]
    pub hi: Rational,
}

impl Gap {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub gaps: Vec<Gap>,
    #[serde(with = "ratstr")]
    pub sup_gap: Rational,
}

pub fn gaps_of(intervals: &[RationalInterval]) -> GapReport {
    let gaps: Vec<Gap> = intervals
        .windows(2)
        .map(|w| Gap { lo: w[0].hi.clone(), hi: w[1].lo.clone() })
        .collect();
    let sup_gap = gaps.iter().map(Gap::width).max().unwrap_or_else(|| int(0));
    GapReport { gaps, sup_gap }
}

pub fn gap_report(cov: &CoverageSet) -> GapReport {
    gaps_of(&cov.intervals)
}

/// Image of x ↦ x^m on the level-`depth` intervals inside
/// [1−r, 1−r+r^l], merged.
pub fn slice_image(params: &CantorParams, m: u32, l: usize, depth: usize) -> Result<Vec<RationalInterval>> {
    assert!(l >= 1 && depth >= l, "need 1 <= l <= depth");
    let lo = params.one_minus_r();
    let hi = &lo + params.r_pow(l);
    let e = m as u64;
    let v = truncation_cover(params, depth, usize::MAX)?
        .into_iter()
        .filter(|c| c.lo >= lo && c.hi <= hi)
        .map(|c| RationalInterval::new(pow_u(&c.lo, e), pow_u(&c.hi, e)))
        .collect();
    Ok(merge_intervals(v))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub n: usize,
    /// 1 + (1 − 2r^(n−1))^m
    #[serde(with = "ratstr")]
    pub r13: Rational,
    /// 2 (1 − 2r^n)^m, the left end of the window
    #[serde(with = "ratstr")]
    pub lo: Rational,
    /// (1 − r^(n−1))^m + (1 − r^n)^m, the right end
    #[serde(with = "ratstr")]
    pub hi: Rational,
}

/// Open windows (lo, hi) ⊂ [0, 2] missed by two m-th powers, for
/// n = 2..=max_n wherever the ordering r13 < lo < hi holds.
pub fn two_power_window(params: &CantorParams, m: u32, max_n: usize) -> Vec<Window> {
    let e = m as u64;
    let one = int(1);
    (2..=max_n)
        .filter_map(|n| {
            let rn1 = params.r_pow(n - 1);
            let rn = params.r_pow(n);
            let r13 = &one + pow_u(&(&one - int(2) * &rn1), e);
            let lo = int(2) * pow_u(&(&one - int(2) * &rn), e);
            let hi = pow_u(&(&one - &rn1), e) + pow_u(&(&one - &rn), e);
            (r13 < lo && lo < hi).then_some(Window { n, r13, lo, hi })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Epsilon {
    pub m: u32,
    pub n: usize,
    #[serde(with = "ratstr")]
    pub epsilon: Rational,
}

/// n = ⌊−log₃(1 − 2^(−1/m))⌋ + 1 and ε = 3 − 3(1 − 3^(−n))^m.
///
/// ⌊−log₃ x⌋ is the largest j with x ≤ 3^(−j); each such comparison is
/// decided by a certified enclosure of 2^(−1/m).
pub fn three_power_epsilon(m: u32) -> Result<Epsilon> {
    if m == 0 {
        return Err(CoverageError::BadExponent);
    }
    let x = Expr::from(1) - Expr::root(Expr::Rat(rat(1, 2)), m);
    let mut j = 0usize;
    loop {
        let next = Expr::Rat(pow_u(&rat(1, 3), (j + 1) as u64));
        if certified_compare(&x, &next, DEFAULT_COMPARE_CAP)? == Ordering::Greater {
            break;
        }
        j += 1;
    }
    let n = j + 1;
    let epsilon = int(3) - int(3) * pow_u(&(int(1) - pow_u(&rat(1, 3), n as u64)), m as u64);
    Ok(Epsilon { m, n, epsilon })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthProbe {
    pub n: usize,
    pub gaps: Vec<Gap>,
    #[serde(with = "ratstr")]
    pub total_gap: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub k: usize,
    pub m: u32,
    /// Gaps are reported inside [k r^m, k]; scaling by r^m covers the rest.
    #[serde(with = "ratstr")]
    pub window_lo: Rational,
    #[serde(with = "ratstr")]
    pub window_hi: Rational,
    pub depths: Vec<DepthProbe>,
    pub summary: String,
}

/// Enumerate f_{k,m}(F_j^k) for j = 1..=n at k = ⌈(1/r − 1)^m⌉ and report the
/// gaps inside [k r^m, k]. Finite-depth images over-approximate the true
/// image, so a gap here is never a counterexample.
pub fn conjecture_probe(params: &CantorParams, m: u32, n: usize, budget: u64) -> Result<ProbeReport> {
    if m == 0 {
        return Err(CoverageError::BadExponent);
    }
    let lb = pow_u(&(params.r().recip() - int(1)), m as u64);
    let k: usize = crate::numerics::ceil(&lb).try_into().expect("k fits in usize");
    let problem = PowerSumProblem::new(params.clone(), k, m);
    let window_lo = int(k as i64) * params.r_pow(m as usize);
    let window_hi = int(k as i64);
    let mut depths = Vec::new();
    for j in 1..=n {
        let cov = enumerate_image(&problem, j, budget)?;
        let gaps: Vec<Gap> = gap_report(&cov)
            .gaps
            .into_iter()
            .filter(|g| g.hi > window_lo && g.lo < window_hi)
            .collect();
        let total_gap = gaps.iter().map(Gap::width).sum();
        depths.push(DepthProbe { n: j, gaps, total_gap });
    }
    let last = depths.last().expect("n >= 1");
    let summary = if last.gaps.is_empty() {
        format!("no obstruction found at depth {n}")
    } else {
        let trend: Vec<String> = depths.iter().map(|d| format!("{}:{}", d.n, d.gaps.len())).collect();
        format!(
            "{} gaps persist at depth {n} (gap counts by depth {}); not a counterexample",
            last.gaps.len(),
            trend.join(" ")
        )
    };
    Ok(ProbeReport { k, m, window_lo, window_hi, depths, summary })
}
