use cantor_waring::bounds::{check_conditions, profile};
use cantor_waring::cantor::CantorParams;
use cantor_waring::coverage::{enumerate_image, gap_report, DEFAULT_BUDGET};
use cantor_waring::dust::{decompose_complex, ComplexRational};
use cantor_waring::numerics::{int, rat, Rational};
use cantor_waring::padic::{decompose_linear, decompose_power, PadicCantorParams, PadicInt};
use cantor_waring::powersum::{decompose, PowerSumProblem};
use cantor_waring_cli::file::{BoundsReport, CoverageReport};
use cantor_waring_cli::{CertificateFile, CliError, Payload, ReplayStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn target(rng: &mut ChaCha8Rng, top: i64) -> Rational {
    let d = rng.gen_range(1..=10_000i64);
    rat(rng.gen_range(0..=top * d), d)
}

/// Round trip through text; the replay outcome must survive unchanged.
fn round_trip(payload: Payload) -> ReplayStatus {
    let file = CertificateFile::new(payload, DEFAULT_BUDGET);
    let text = file.to_json();
    assert_eq!(text, file.to_json(), "serialization is deterministic");
    let back = CertificateFile::parse(&text).unwrap();
    assert_eq!(back, file);
    let replay = match back.verify(DEFAULT_BUDGET) {
        Ok(()) => ReplayStatus::Verified,
        Err(_) => ReplayStatus::Unverified,
    };
    assert_eq!(replay, file.replay_status);
    file.replay_status
}

#[test]
fn real_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..100 {
        let (k, m) = if i % 4 == 0 { (16, 4) } else { (2, 1) };
        let prob = PowerSumProblem::new(CantorParams::ternary(), k, m);
        let t = target(&mut rng, k as i64);
        let mut c = decompose(&prob, &t, 20).unwrap();
        assert_eq!(round_trip(Payload::Real(c.clone())), ReplayStatus::Verified);
        if i % 10 == 0 {
            c.target += rat(1, 100);
            assert_eq!(round_trip(Payload::Real(c)), ReplayStatus::Unverified);
        }
    }
}

#[test]
fn dust_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut n = 0;
    while n < 100 {
        let z = ComplexRational::new(rat(rng.gen_range(-20..=20), 20), rat(rng.gen_range(-20..=20), 20));
        if z.norm_sq() > int(1) {
            continue;
        }
        n += 1;
        let m = 3 + (n % 2) as u32;
        let mut c = decompose_complex(&CantorParams::ternary(), m, &z, 10).unwrap();
        assert_eq!(round_trip(Payload::Dust(c.clone())), ReplayStatus::Verified);
        if n % 10 == 0 {
            c.target = &c.target + &ComplexRational::real(rat(1, 2));
            assert_eq!(round_trip(Payload::Dust(c)), ReplayStatus::Unverified);
        }
    }
}

#[test]
fn padic_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..100 {
        let (p, gamma) = [(3, 3), (2, 4), (5, 5), (3, 6)][i % 4];
        let params = PadicCantorParams::from_integer(p, gamma, 20).unwrap();
        let digits: Vec<u32> = (0..20).map(|_| rng.gen_range(0..p)).collect();
        let x = PadicInt::from_digits(p, &digits).unwrap();
        let mut c = if i % 2 == 0 { decompose_power(&x, 2, &params).unwrap() } else { decompose_linear(&x, &params) };
        assert_eq!(round_trip(Payload::Padic(c.clone())), ReplayStatus::Verified);
        if i % 10 == 0 {
            c.target = &c.target + &params.element(1);
            assert_eq!(round_trip(Payload::Padic(c)), ReplayStatus::Unverified);
        }
    }
}

#[test]
fn coverage_reports() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..100 {
        let r = [rat(1, 3), rat(1, 4), rat(2, 5)][i % 3].clone();
        let prob = PowerSumProblem::new(CantorParams::new(r).unwrap(), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let set = enumerate_image(&prob, rng.gen_range(0..=3), DEFAULT_BUDGET).unwrap();
        let gaps = gap_report(&set);
        let mut rep = CoverageReport { set, gaps };
        assert_eq!(round_trip(Payload::Coverage(rep.clone())), ReplayStatus::Verified);
        if i % 10 == 0 {
            rep.set.intervals.pop();
            assert_eq!(round_trip(Payload::Coverage(rep)), ReplayStatus::Unverified);
        }
    }
}

#[test]
fn bounds_reports() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let p = CantorParams::new(rat(1, rng.gen_range(3..=9))).unwrap();
        let prof = profile(&p, rng.gen_range(1..=10)).unwrap();
        let summands = prof.k_star + rng.gen_range(1..=2000);
        let conditions = check_conditions(&prof, summands - prof.k_star);
        let mut rep = BoundsReport { profile: prof, summands, conditions };
        assert_eq!(round_trip(Payload::Bounds(rep.clone())), ReplayStatus::Verified);
        if i % 10 == 0 {
            rep.conditions.a1.holds = !rep.conditions.a1.holds;
            assert_eq!(round_trip(Payload::Bounds(rep)), ReplayStatus::Unverified);
        }
    }
}

#[test]
fn unknown_schema_is_rejected() {
    let prob = PowerSumProblem::new(CantorParams::ternary(), 2, 1);
    let file = CertificateFile::new(Payload::Real(decompose(&prob, &rat(1, 2), 10).unwrap()), DEFAULT_BUDGET);
    let text = file.to_json().replacen("\"schema_version\": \"1\"", "\"schema_version\": \"9\"", 1);
    assert!(matches!(CertificateFile::parse(&text), Err(CliError::Verification(_))));
    assert!(matches!(CertificateFile::parse("{}"), Err(CliError::Verification(_))));
}
