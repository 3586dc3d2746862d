//! Golden regression fixtures: each file names a computation, its inputs,
//! the expected outcome and the tolerance it is held to.

use std::path::Path;

use cantor_waring::bounds::{check_conditions, large_m_threshold, profile};
use cantor_waring::cantor::CantorParams;
use cantor_waring::coverage::{enumerate_image, three_power_epsilon, two_power_window};
use cantor_waring::dust::{decompose_complex, disk_cover_budget, ComplexRational};
use cantor_waring::numerics::{int, pow_u, ratstr, Rational};
use cantor_waring::padic::{decompose_linear, decompose_power, residue_lower_bound, PadicCantorParams};
use cantor_waring::powersum::{decompose, PowerSumProblem};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Expectation {
    /// Conditions at k = summands − k* all hold, with the listed constants.
    Conditions {
        #[serde(with = "ratstr")]
        r: Rational,
        m: u32,
        summands: u64,
        n_star: i64,
        k_star: u64,
        l0: i64,
    },
    /// Threshold enclosure of width ≤ width strictly inside (above, below).
    Threshold {
        #[serde(with = "ratstr")]
        r: Rational,
        #[serde(with = "ratstr")]
        width: Rational,
        #[serde(with = "ratstr")]
        above: Rational,
        #[serde(with = "ratstr")]
        below: Rational,
    },
    /// The level-n image is exactly the listed closed intervals.
    Image {
        #[serde(with = "ratstr")]
        r: Rational,
        k: usize,
        m: u32,
        n: usize,
        #[serde(with = "ratstr::vec")]
        intervals: Vec<Rational>,
    },
    /// The open interval (lo, hi) misses the image at each listed depth.
    Missed {
        #[serde(with = "ratstr")]
        r: Rational,
        k: usize,
        m: u32,
        depths: Vec<usize>,
        #[serde(with = "ratstr")]
        lo: Rational,
        #[serde(with = "ratstr")]
        hi: Rational,
    },
    /// The first two-power window for m, also missed by brute force.
    Window {
        #[serde(with = "ratstr")]
        r: Rational,
        m: u32,
        n: usize,
        #[serde(with = "ratstr")]
        lo: Rational,
        #[serde(with = "ratstr")]
        hi: Rational,
    },
    /// ε ≥ floor for every m ≤ m_max.
    Epsilon {
        m_max: u32,
        #[serde(with = "ratstr")]
        floor: Rational,
    },
    /// Every target decomposes with residual at most `residual`.
    Decompose {
        #[serde(with = "ratstr")]
        r: Rational,
        k: usize,
        m: u32,
        digits: usize,
        #[serde(with = "ratstr::vec")]
        targets: Vec<Rational>,
        #[serde(with = "ratstr")]
        residual: Rational,
    },
    /// Complex targets "re,im" decompose within the summand budget.
    Dust { m: u32, digits: usize, targets: Vec<String> },
    /// Power (m ≥ 2) or linear (m = 1) p-adic certificates with a fixed count.
    Padic { p: u32, gamma: i64, m: u32, digits: usize, targets: Vec<i64>, summands: usize },
    ResidueBound { p: u32, gamma: i64, m: u32, j: usize, value: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    /// "exact" or the rational residual allowed.
    pub tolerance: String,
    pub expect: Expectation,
}

fn r3() -> Rational {
    Rational::new(1.into(), 3.into())
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn suite() -> Vec<Fixture> {
    let fx = |name: &str, description: &str, tolerance: &str, expect| Fixture {
        name: name.into(),
        description: description.into(),
        tolerance: tolerance.into(),
        expect,
    };
    let mut v = vec![
        fx(
            "quartic_conditions_m4",
            "r = 1/3, m = 4: conditions hold with 16 summands, n* = 2, k* = 3, l0 = 3",
            "exact",
            Expectation::Conditions { r: r3(), m: 4, summands: 16, n_star: 2, k_star: 3, l0: 3 },
        ),
        fx(
            "quintic_conditions_m5",
            "r = 1/3, m = 5: conditions hold with 32 summands",
            "exact",
            Expectation::Conditions { r: r3(), m: 5, summands: 32, n_star: 2, k_star: 3, l0: 3 },
        ),
        fx(
            "quarter_threshold",
            "r = 1/4: exponent threshold lies in (6, 7)",
            "1/1000",
            Expectation::Threshold { r: q(1, 4), width: q(1, 1000), above: int(6), below: int(7) },
        ),
        fx(
            "steinhaus",
            "C + C = [0, 2], already visible at depth 2",
            "exact",
            Expectation::Image { r: r3(), k: 2, m: 1, n: 2, intervals: vec![int(0), int(2)] },
        ),
        fx(
            "three_squares_gap",
            "three squares miss (1/3, 4/9) at depths 2 to 4",
            "exact",
            Expectation::Missed { r: r3(), k: 3, m: 2, depths: vec![2, 3, 4], lo: r3(), hi: q(4, 9) },
        ),
        fx(
            "gap_98_100_over_81",
            "two squares miss (98/81, 100/81)",
            "exact",
            Expectation::Window { r: r3(), m: 2, n: 2, lo: q(98, 81), hi: q(100, 81) },
        ),
        fx(
            "three_power_epsilon",
            "epsilon >= 1/2 for m = 1..32",
            "exact",
            Expectation::Epsilon { m_max: 32, floor: q(1, 2) },
        ),
        fx(
            "two_linear_summands",
            "x + y over the middle-third set, 40 digits",
            "2/12157665459056928801",
            Expectation::Decompose {
                r: r3(),
                k: 2,
                m: 1,
                digits: 40,
                targets: vec![int(0), q(1, 2), q(1, 4), q(5, 7), int(1), q(3, 2), int(2)],
                residual: int(2) / pow_u(&int(3), 40),
            },
        ),
        fx(
            "sixteen_fourth_powers",
            "sums of 16 fourth powers, 40 digits",
            "64/12157665459056928801",
            Expectation::Decompose {
                r: r3(),
                k: 16,
                m: 4,
                digits: 40,
                targets: vec![q(1, 1000), q(16, 81), int(1), int(7), q(31, 3), int(16)],
                residual: int(64) / pow_u(&int(3), 40),
            },
        ),
        fx(
            "dust_cubes",
            "cubes from C + iC, grid targets",
            "residual_bound",
            Expectation::Dust { m: 3, digits: 30, targets: vec!["0,0".into(), "1,0".into(), "-1/2,1/2".into(), "7/10,-7/10".into()] },
        ),
        fx(
            "dust_fourth_powers",
            "fourth powers from C + iC, grid targets",
            "residual_bound",
            Expectation::Dust { m: 4, digits: 30, targets: vec!["0,1".into(), "-1,0".into(), "1/3,-1/3".into()] },
        ),
        fx(
            "padic_squares",
            "four squares mod 3^30",
            "exact",
            Expectation::Padic { p: 3, gamma: 3, m: 2, digits: 30, targets: vec![0, 1, 2, 7, -1, 12345], summands: 4 },
        ),
        fx(
            "padic_square_residues",
            "squares of C_3 need four summands mod 9",
            "exact",
            Expectation::ResidueBound { p: 3, gamma: 3, m: 2, j: 2, value: 4 },
        ),
    ];
    for (p, gamma, count) in [(3, 3, 2), (3, 6, 2), (2, 4, 3), (5, 5, 4)] {
        v.push(fx(
            &format!("padic_linear_{p}_{gamma}"),
            "linear p-adic certificates with p^u - 1 summands",
            "exact",
            Expectation::Padic { p, gamma, m: 1, digits: 30, targets: vec![0, 1, 2, 10, -1, -77], summands: count },
        ));
    }
    v
}

fn fail(name: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Verification(format!("{name}: {why}"))
}

fn params(r: &Rational) -> Result<CantorParams> {
    Ok(CantorParams::new(r.clone())?)
}

/// Recompute one fixture's expectation.
pub fn check(f: &Fixture, budget: u64) -> Result<()> {
    let name = f.name.as_str();
    match &f.expect {
        Expectation::Conditions { r, m, summands, n_star, k_star, l0 } => {
            let prof = profile(&params(r)?, *m)?;
            if (prof.n_star, prof.k_star) != (*n_star, *k_star) {
                return Err(fail(name, format!("n* = {}, k* = {}", prof.n_star, prof.k_star)));
            }
            let c = check_conditions(&prof, summands - prof.k_star);
            if !c.all_hold() || c.l0 != Some(*l0) {
                return Err(fail(name, format!("conditions {c:?}")));
            }
        }
        Expectation::Threshold { r, width, above, below } => {
            let t = large_m_threshold(&params(r)?, width)?;
            let e = &t.enclosure;
            if !(e.width() <= *width && &e.lo > above && &e.hi < below) {
                return Err(fail(name, format!("enclosure {e}")));
            }
        }
        Expectation::Image { r, k, m, n, intervals } => {
            let img = enumerate_image(&PowerSumProblem::new(params(r)?, *k, *m), *n, budget)?;
            let flat: Vec<Rational> = img.intervals.iter().flat_map(|i| [i.lo.clone(), i.hi.clone()]).collect();
            if &flat != intervals {
                return Err(fail(name, "image differs"));
            }
        }
        Expectation::Missed { r, k, m, depths, lo, hi } => {
            let prob = PowerSumProblem::new(params(r)?, *k, *m);
            for &n in depths {
                if !enumerate_image(&prob, n, budget)?.misses_open(lo, hi) {
                    return Err(fail(name, format!("depth {n} meets ({lo}, {hi})")));
                }
            }
        }
        Expectation::Window { r, m, n, lo, hi } => {
            let p = params(r)?;
            let w = two_power_window(&p, *m, *n);
            match w.first() {
                Some(w) if (&w.n, &w.lo, &w.hi) == (n, lo, hi) => {}
                other => return Err(fail(name, format!("first window {other:?}"))),
            }
            let img = enumerate_image(&PowerSumProblem::new(p, 2, *m), *n, budget)?;
            if !img.misses_open(lo, hi) {
                return Err(fail(name, "brute-force image meets the window"));
            }
        }
        Expectation::Epsilon { m_max, floor } => {
            for m in 1..=*m_max {
                let e = three_power_epsilon(m)?;
                if &e.epsilon < floor {
                    return Err(fail(name, format!("m = {m}: epsilon {}", e.epsilon)));
                }
            }
        }
        Expectation::Decompose { r, k, m, digits, targets, residual } => {
            let prob = PowerSumProblem::new(params(r)?, *k, *m);
            for t in targets {
                let c = decompose(&prob, t, *digits)?;
                c.replay().map_err(|e| fail(name, format!("{t}: {e}")))?;
                if &c.residual_bound > residual {
                    return Err(fail(name, format!("{t}: residual {}", c.residual_bound)));
                }
            }
        }
        Expectation::Dust { m, digits, targets } => {
            let budget = disk_cover_budget(*m)?;
            for t in targets {
                let z: ComplexRational = t.parse()?;
                let c = decompose_complex(&CantorParams::ternary(), *m, &z, *digits)?;
                c.replay().map_err(|e| fail(name, format!("{t}: {e}")))?;
                if c.summands.len() as u64 > budget {
                    return Err(fail(name, format!("{t}: {} summands", c.summands.len())));
                }
            }
        }
        Expectation::Padic { p, gamma, m, digits, targets, summands } => {
            let params = PadicCantorParams::from_integer(*p, *gamma, *digits)?;
            for &t in targets {
                let x = params.element(t);
                let c = if *m == 1 { decompose_linear(&x, &params) } else { decompose_power(&x, *m, &params)? };
                if c.summands.len() != *summands || !c.verify() {
                    return Err(fail(name, format!("target {t}: {} summands", c.summands.len())));
                }
            }
        }
        Expectation::ResidueBound { p, gamma, m, j, value } => {
            let params = PadicCantorParams::from_integer(*p, *gamma, (*j).max(1))?;
            let got = residue_lower_bound(&params, *m, *j, budget)?;
            if got != *value {
                return Err(fail(name, format!("bound {got}")));
            }
        }
    }
    Ok(())
}

pub fn write_suite(dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for f in suite() {
        let file = format!("{}.json", f.name);
        let mut text = serde_json::to_string_pretty(&f).expect("fixture serializes");
        text.push('\n');
        std::fs::write(dir.join(&file), text)?;
        names.push(file);
    }
    Ok(names)
}

/// Check every `*.json` fixture in `dir`, in name order.
pub fn check_dir(dir: &Path, budget: u64) -> Result<Vec<(String, Result<()>)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let label = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(&p)?;
        let res = serde_json::from_str::<Fixture>(&text)
            .map_err(|e| fail(&label, format!("malformed fixture: {e}")))
            .and_then(|f| check(&f, budget));
        out.push((label, res));
    }
    Ok(out)
}
