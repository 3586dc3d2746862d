use cantor_waring::padic::{
    base_gamma_digits, decompose_linear, decompose_power, power_count, PadicCantorParams, PadicInt,
};
use proptest::prelude::*;

const N: usize = 24;

fn padic(p: u32) -> impl Strategy<Value = PadicInt> {
    proptest::collection::vec(0..p, N).prop_map(move |d| PadicInt::from_digits(p, &d).unwrap())
}

fn triple(p: u32) -> impl Strategy<Value = (PadicInt, PadicInt, PadicInt)> {
    (padic(p), padic(p), padic(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_laws_mod_3((a, b, c) in triple(3)) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
    }

    #[test]
    fn ring_laws_mod_2((a, b, c) in triple(2)) {
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &(-&a), PadicInt::from_i64(2, 0, N));
    }
}

fn gamma_sum(params: &PadicCantorParams, digits: &[u64]) -> PadicInt {
    let gamma = params.gamma.clone();
    let mut acc = params.element(0);
    let mut g = params.element(1);
    for &b in digits {
        acc = &acc + &g.scale(b);
        g = &g * &gamma;
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn base_gamma_round_trip(x in padic(3)) {
        for gamma in [3, 6, 9] {
            let params = PadicCantorParams::from_integer(3, gamma, N).unwrap();
            let d = base_gamma_digits(&x, &params);
            prop_assert_eq!(d.len(), N / params.u);
            prop_assert!(d.iter().all(|&b| b < 3u64.pow(params.u as u32)));
            prop_assert!(gamma_sum(&params, &d).congruent(&x, params.u * d.len()));
        }
    }

    #[test]
    fn linear_certificates((x, _, _) in triple(5)) {
        let params = PadicCantorParams::from_integer(5, 10, N).unwrap();
        let c = decompose_linear(&x, &params);
        prop_assert_eq!(c.summands.len(), 4);
        prop_assert!(c.verify());
        prop_assert_eq!(c.congruence_depth, N);
    }
}

#[test]
fn power_certificates_match_the_count() {
    let cases = [(3, 3, 2), (3, 3, 3), (3, 3, 4), (3, 6, 2), (5, 5, 2), (5, 5, 5), (2, 4, 2), (2, 4, 3), (7, 7, 3)];
    for (p, gamma, m) in cases {
        let params = PadicCantorParams::from_integer(p, gamma, 20).unwrap();
        for t in [0i64, 1, 2, 7, 100, -1, -12345] {
            let x = params.element(t);
            let c = decompose_power(&x, m, &params).unwrap_or_else(|e| panic!("p={p} γ={gamma} m={m}: {e}"));
            assert_eq!(c.summands.len(), power_count(&params, m));
            assert!(c.verify());
            assert!(c.congruence_depth > 0 && c.congruence_depth <= 20);
        }
    }
}
