use cantor_waring::cantor::CantorParams;
use cantor_waring::dust::{
    angle_chain_holds, decompose_complex, disk_cover_budget, rotation_vector, symmetry_map, symmetry_point,
    ComplexRational,
};
use cantor_waring::numerics::{int, pow_u, rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn rotation_norms_are_exact() {
    let p = CantorParams::ternary();
    for n in -8..=8i64 {
        for m in 1..=12 {
            let base = int(1) + p.r_pow(2 * n.unsigned_abs() as usize);
            assert_eq!(rotation_vector(&p, n, m).value.norm_sq(), pow_u(&base, m as u64));
        }
    }
}

#[test]
fn angle_chain() {
    let p = CantorParams::ternary();
    for n in -1..=10 {
        assert!(angle_chain_holds(&p, n).unwrap(), "n={n}");
    }
}

#[test]
fn random_disk_targets() {
    let p = CantorParams::ternary();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for m in 3..=7 {
        let mut done = 0;
        while done < 4 {
            let d = rng.gen_range(1..=64i64);
            let t = ComplexRational::new(rat(rng.gen_range(-d..=d), d), rat(rng.gen_range(-d..=d), d));
            if t.norm_sq() > int(1) {
                continue;
            }
            done += 1;
            let c = decompose_complex(&p, m, &t, 24).unwrap_or_else(|e| panic!("m={m} t={t}: {e}"));
            assert!(c.verify(), "m={m} t={t}");
            assert!(c.summands.len() as u64 <= disk_cover_budget(m).unwrap());
            let s = symmetry_map(&c);
            assert_eq!(s.target, symmetry_point(&t, m));
            assert!(s.verify());
            let back = symmetry_map(&s);
            assert_eq!(back.target, t);
            assert!(back.verify());
        }
    }
}
