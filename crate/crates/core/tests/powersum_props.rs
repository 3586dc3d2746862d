use cantor_waring::cantor::{CantorParams, SymbolWord};
use cantor_waring::coverage::merge_intervals;
use cantor_waring::numerics::{int, pow_u, rat, Rational, RationalInterval};
use cantor_waring::powersum::{
    box_image, decompose, decompose_traced, refine_target, subdivision_ok, PowerBox, PowerSumProblem, Trace,
};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn third() -> CantorParams {
    CantorParams::ternary()
}

fn random_word(rng: &mut ChaCha8Rng, n: usize) -> SymbolWord {
    // lean towards 1s so that the criterion holds reasonably often
    SymbolWord::new((0..n).map(|_| rng.gen_bool(0.7)).collect())
}

fn children(p: &CantorParams, b: &PowerBox) -> Vec<PowerBox> {
    let k = b.active.len();
    (0..1u32 << k)
        .map(|mask| {
            let words = b.active.iter().enumerate().map(|(i, c)| c.word.child(mask >> i & 1 == 1)).collect();
            PowerBox::new(p, words, b.frozen.clone())
        })
        .collect()
}

#[test]
fn admissible_boxes_have_connected_children() {
    let p = third();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut found = 0;
    for _ in 0..20_000 {
        if found == 200 {
            break;
        }
        let k = rng.gen_range(2..=4);
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=5);
        let b = PowerBox::new(&p, (0..k).map(|_| random_word(&mut rng, n)).collect(), Vec::new());
        if !subdivision_ok(&p, &b, m, true).unwrap() {
            continue;
        }
        found += 1;
        let parent = box_image(&p, &b, m);
        let imgs = children(&p, &b)
            .iter()
            .map(|c| {
                let i = box_image(&p, c, m);
                RationalInterval::new(i.lo, i.hi)
            })
            .collect();
        assert_eq!(merge_intervals(imgs), vec![RationalInterval::new(parent.lo, parent.hi)]);
    }
    assert_eq!(found, 200);
}

#[test]
fn refinement_keeps_the_target() {
    let p = third();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let b = PowerBox::uniform(&p, SymbolWord::ones(1), 16);
    let img = box_image(&p, &b, 4);
    for _ in 0..50 {
        let t = &img.lo + (&img.hi - &img.lo) * rat(rng.gen_range(0..=1000), 1000);
        let mut cur = b.clone();
        for _ in 0..6 {
            cur = refine_target(&p, &cur, 4, &t).unwrap();
            assert!(box_image(&p, &cur, 4).contains(&t));
        }
    }
}

#[test]
fn traces_stay_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (k, m) in [(2usize, 1u32), (16, 4), (32, 5)] {
        let prob = PowerSumProblem::new(third(), k, m);
        for _ in 0..10 {
            let d = rng.gen_range(1..=500i64);
            let t = rat(rng.gen_range(0..=k as i64 * d), d);
            let mut tr = Trace::default();
            let c = decompose_traced(&prob, &t, 25, &mut tr).unwrap();
            assert!(tr.all_sound(), "k={k} m={m} t={t}");
            c.replay().unwrap();
        }
    }
}

#[test]
fn certificates_replay_within_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let prob = PowerSumProblem::new(third(), 16, 4);
    for _ in 0..20 {
        let d = rng.gen_range(1..=10_000i64);
        let t = rat(rng.gen_range(0..=16 * d), d);
        let c = decompose(&prob, &t, 30).unwrap();
        let r = c.replay().unwrap();
        assert!((&r.sum - &t) <= c.residual_bound && (&t - &r.sum) <= c.residual_bound);
        assert!(c.residual_bound <= int(64) * pow_u(&rat(1, 3), 30));
        assert!(!c.residual_bound.is_zero() || r.sum == t);
    }
}

#[test]
fn images_are_narrow() {
    let p = third();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..200 {
        let k = rng.gen_range(1..=5);
        let m = rng.gen_range(1..=6u32);
        let n = rng.gen_range(0..=6);
        let b = PowerBox::new(&p, (0..k).map(|_| random_word(&mut rng, n)).collect(), Vec::new());
        let img = box_image(&p, &b, m);
        let bound: Rational = int(m as i64) * p.r_pow(n) * int(k as i64);
        assert!(&img.hi - &img.lo <= bound);
    }
}
