use std::io::Write;
use std::path::Path;

use cantor_waring::bounds::{check_conditions, large_m_threshold, profile, BoundsProfile};
use cantor_waring::cantor::CantorParams;
use cantor_waring::coverage::{
    conjecture_probe, enumerate_image, gap_report, three_power_epsilon, two_power_window,
};
use cantor_waring::dust::{decompose_complex, disk_cover_budget, plan, ComplexRational};
use cantor_waring::numerics::{approx, ratstr, Rational};
use cantor_waring::padic::{
    decompose_linear, decompose_power, residue_lower_bound, PadicCantorParams, PadicInt,
};
use cantor_waring::powersum::{decompose, decompose_best_effort, PowerSumProblem};
use num_traits::ToPrimitive;

use crate::cli::*;
use crate::error::{CliError, Result};
use crate::file::{BoundsReport, CertificateFile, CoverageReport, Payload};
use crate::fixtures;

fn rational(s: &str) -> Result<Rational> {
    ratstr::parse(s).map_err(CliError::Usage)
}

fn cantor(ratio: &Ratio) -> Result<CantorParams> {
    Ok(match &ratio.alpha {
        Some(a) => CantorParams::from_alpha(rational(a)?)?,
        None => CantorParams::new(rational(&ratio.r)?)?,
    })
}

fn check_depth(cfg: &RunConfig, n: usize) -> Result<()> {
    if n > cfg.max_depth {
        return Err(CliError::Budget(format!("depth {n} exceeds --max-depth {}", cfg.max_depth)));
    }
    Ok(())
}

/// Write the certificate to `path`, or to `out` when no path is given.
fn emit(cfg: &RunConfig, payload: Payload, path: Option<&Path>, out: &mut dyn Write) -> Result<CertificateFile> {
    let file = CertificateFile::new(payload, cfg.budget);
    match path {
        Some(p) => {
            file.write(p)?;
            writeln!(out, "wrote {} ({:?})", p.display(), file.replay_status)?;
        }
        None => writeln!(out, "{}", file.to_json())?,
    }
    Ok(file)
}

fn json_line<T: serde::Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("report serializes"))?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = &cli.config;
    if let Some(t) = cfg.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match cli.command {
        Command::Bounds(a) => bounds(cfg, a, out),
        Command::Decompose(a) => decompose_cmd(cfg, a, out),
        Command::Coverage(a) => coverage(cfg, a, out),
        Command::Window(a) => window(cfg, a, out),
        Command::Epsilon(a) => epsilon(a, out),
        Command::Dust(a) => dust(cfg, a, out),
        Command::Padic(a) => padic(cfg, a, out),
        Command::Verify { file } => {
            let f = CertificateFile::read(&file)?;
            f.verify(cfg.budget)?;
            writeln!(out, "verified {} certificate {}", f.payload.kind(), file.display())?;
            Ok(())
        }
        Command::Fixtures { action } => match action {
            FixtureAction::Write { dir } => {
                for name in fixtures::write_suite(&dir)? {
                    writeln!(out, "wrote {}", dir.join(name).display())?;
                }
                Ok(())
            }
            FixtureAction::Check { dir } => {
                let mut failures = Vec::new();
                for (name, res) in fixtures::check_dir(&dir, cfg.budget)? {
                    match res {
                        Ok(()) => writeln!(out, "ok   {name}")?,
                        Err(e) => {
                            writeln!(out, "FAIL {name}: {e}")?;
                            failures.push(name);
                        }
                    }
                }
                if failures.is_empty() {
                    Ok(())
                } else {
                    Err(CliError::Verification(format!("{} fixture(s) failed", failures.len())))
                }
            }
        },
    }
}

fn summands_for(prof: &BoundsProfile, k: &str) -> Result<u64> {
    if k == "auto" {
        return prof
            .target_k
            .to_u64()
            .ok_or_else(|| CliError::Budget(format!("lower bound {} does not fit in u64", prof.target_k)));
    }
    k.parse().map_err(|_| CliError::Usage(format!("--k must be an integer or \"auto\", got {k:?}")))
}

fn bounds_report(p: &CantorParams, m: u32, k: &str) -> Result<BoundsReport> {
    let prof = profile(p, m)?;
    let summands = summands_for(&prof, k)?;
    if summands <= prof.k_star {
        return Err(CliError::Usage(format!("k = {summands} must exceed k* = {}", prof.k_star)));
    }
    let conditions = check_conditions(&prof, summands - prof.k_star);
    Ok(BoundsReport { profile: prof, summands, conditions })
}

fn bounds(cfg: &RunConfig, a: BoundsArgs, out: &mut dyn Write) -> Result<()> {
    let p = cantor(&a.ratio)?;
    let hi = a.m_max.unwrap_or(a.m);
    if hi < a.m {
        return Err(CliError::Usage("--m-max is below --m".into()));
    }
    if a.out.is_some() && hi != a.m {
        return Err(CliError::Usage("--out writes a single exponent; drop --m-max".into()));
    }
    let reports = (a.m..=hi).map(|m| bounds_report(&p, m, &a.k)).collect::<Result<Vec<_>>>()?;
    if let Some(path) = &a.out {
        emit(cfg, Payload::Bounds(reports[0].clone()), Some(path), out)?;
    } else if a.json {
        json_line(out, &reports)?;
    } else {
        let yn = |b: bool| if b { "yes" } else { "no" };
        let opt = |v: Option<i64>| v.map_or("-".to_string(), |x| x.to_string());
        writeln!(
            out,
            "{:>3} {:>8} {:>8} {:>3} {:>3} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4}",
            "m", "k", "k-k*", "n*", "k*", "l0", "m0", "A1", "A2", "A2'", "A3", "A4", "all"
        )?;
        for r in &reports {
            let c = &r.conditions;
            writeln!(
                out,
                "{:>3} {:>8} {:>8} {:>3} {:>3} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4}",
                r.profile.m,
                r.summands,
                c.k,
                r.profile.n_star,
                r.profile.k_star,
                opt(c.l0),
                opt(c.m0),
                yn(c.a1.holds),
                yn(c.a2.holds),
                yn(c.a2prime.holds),
                yn(c.a3.holds),
                yn(c.a4.holds),
                yn(c.all_hold()),
            )?;
        }
    }
    if a.threshold {
        let t = large_m_threshold(&p, &Rational::new(1.into(), 1000.into()))?;
        writeln!(
            out,
            "threshold in [{}, {}], every m >= {} qualifies",
            approx(&t.enclosure.lo, 6),
            approx(&t.enclosure.hi, 6),
            t.integer
        )?;
    }
    Ok(())
}

fn decompose_cmd(cfg: &RunConfig, a: DecomposeArgs, out: &mut dyn Write) -> Result<()> {
    let prob = PowerSumProblem::new(cantor(&a.ratio)?, a.k, a.m);
    let t = rational(&a.target)?;
    let cert = if a.best_effort {
        decompose_best_effort(&prob, &t, a.digits, a.seed_depth, cfg.budget)?
    } else {
        decompose(&prob, &t, a.digits)?
    };
    emit(cfg, Payload::Real(cert), a.out.as_deref(), out)?;
    Ok(())
}

fn coverage(cfg: &RunConfig, a: CoverageArgs, out: &mut dyn Write) -> Result<()> {
    check_depth(cfg, a.n)?;
    let p = cantor(&a.ratio)?;
    if a.probe {
        let report = conjecture_probe(&p, a.m, a.n, cfg.budget)?;
        writeln!(out, "{}", report.summary)?;
        return json_line(out, &report);
    }
    let set = enumerate_image(&PowerSumProblem::new(p, a.k, a.m), a.n, cfg.budget)?;
    let gaps = gap_report(&set);
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).map_err(std::io::Error::from)?;
        w.write_record(["kind", "lo", "hi"]).map_err(std::io::Error::from)?;
        for i in &set.intervals {
            w.write_record(["interval", &ratstr::to_string(&i.lo), &ratstr::to_string(&i.hi)]).map_err(std::io::Error::from)?;
        }
        for g in &gaps.gaps {
            w.write_record(["gap", &ratstr::to_string(&g.lo), &ratstr::to_string(&g.hi)]).map_err(std::io::Error::from)?;
        }
        w.flush()?;
    }
    emit(cfg, Payload::Coverage(CoverageReport { set, gaps }), a.out.as_deref(), out)?;
    Ok(())
}

fn window(cfg: &RunConfig, a: WindowArgs, out: &mut dyn Write) -> Result<()> {
    check_depth(cfg, a.max_n)?;
    let p = cantor(&a.ratio)?;
    let ws = two_power_window(&p, a.m, a.max_n);
    if a.check {
        let prob = PowerSumProblem::new(p.clone(), 2, a.m);
        for w in &ws {
            if !enumerate_image(&prob, w.n, cfg.budget)?.misses_open(&w.lo, &w.hi) {
                return Err(CliError::Verification(format!("window at n = {} meets the level-n image", w.n)));
            }
        }
    }
    if a.json {
        return json_line(out, &ws);
    }
    writeln!(out, "{:>3}  {:<22} {:<22} {:>10}", "n", "lo", "hi", "lo ~")?;
    for w in &ws {
        writeln!(out, "{:>3}  {:<22} {:<22} {:>10}", w.n, ratstr::to_string(&w.lo), ratstr::to_string(&w.hi), approx(&w.lo, 6))?;
    }
    if ws.is_empty() {
        writeln!(out, "no window for n <= {}", a.max_n)?;
    }
    Ok(())
}

fn epsilon(a: EpsilonArgs, out: &mut dyn Write) -> Result<()> {
    let rows = (1..=a.m_max).map(three_power_epsilon).collect::<std::result::Result<Vec<_>, _>>()?;
    if a.json {
        return json_line(out, &rows);
    }
    writeln!(out, "{:>3} {:>3} {:>10}  epsilon", "m", "n", "~")?;
    for e in &rows {
        writeln!(out, "{:>3} {:>3} {:>10}  {}", e.m, e.n, approx(&e.epsilon, 6), e.epsilon)?;
    }
    Ok(())
}

fn dust(cfg: &RunConfig, a: DustArgs, out: &mut dyn Write) -> Result<()> {
    let p = CantorParams::ternary();
    if a.budget_check {
        let budget = disk_cover_budget(a.m)?;
        let pl = plan(&p, a.m)?;
        writeln!(out, "m = {}: at most {budget} summands, case {} (n0 = {})", a.m, pl.case, pl.n0)?;
    }
    if let Some(t) = &a.target {
        let z: ComplexRational = t.parse()?;
        let cert = decompose_complex(&p, a.m, &z, a.digits)?;
        emit(cfg, Payload::Dust(cert), a.out.as_deref(), out)?;
    }
    Ok(())
}

fn padic(cfg: &RunConfig, a: PadicArgs, out: &mut dyn Write) -> Result<()> {
    let gamma = rational(&a.gamma)?;
    if a.lower_bound {
        let j = a.j.expect("clap enforces --j");
        let params = PadicCantorParams::from_rational(a.p, &gamma, j.max(1))?;
        let k = residue_lower_bound(&params, a.m, j, cfg.budget)?;
        writeln!(out, "{k}")?;
    }
    if let Some(t) = &a.target {
        let params = PadicCantorParams::from_rational(a.p, &gamma, a.digits)?;
        let x = PadicInt::from_rational(a.p, &rational(t)?, a.digits)?;
        let cert = if a.m == 1 { decompose_linear(&x, &params) } else { decompose_power(&x, a.m, &params)? };
        emit(cfg, Payload::Padic(cert), a.out.as_deref(), out)?;
    }
    Ok(())
}
