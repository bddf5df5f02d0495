use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schatten_semigroup::random;
use schatten_semigroup::semigroup::expm;
use schatten_semigroup::{Complex64, DenseOperator64, Generator64};

fn diff(a: &DenseOperator64, b: &DenseOperator64) -> f64 {
    (a - b).frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn semigroup_law(seed in any::<u64>(), n in 1usize..7, s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Generator64::new(random::accretive(n, 0.1, 3.0, 0.5, &mut rng)).unwrap();
        let lhs = &g.evolve(s).unwrap() * &g.evolve(t).unwrap();
        let rhs = g.evolve(s + t).unwrap();
        prop_assert!(diff(&lhs, &rhs) <= 1e-10 * (1.0 + rhs.frobenius_norm()));
    }

    #[test]
    fn evolution_matches_pade(seed in any::<u64>(), n in 1usize..7, t in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random::gaussian::<f64, _>(n, 1.0, &mut rng);
        let g = Generator64::new(a.clone()).unwrap();
        let oracle = DenseOperator64::new(expm(&(a.matrix() * Complex64::new(-t, 0.0))).unwrap()).unwrap();
        prop_assert!(diff(&g.evolve(t).unwrap(), &oracle) <= 1e-9 * (1.0 + oracle.frobenius_norm()));
    }

    #[test]
    fn first_resolvent_identity(seed in any::<u64>(), n in 1usize..6, y1 in 0.5f64..5.0, y2 in 0.5f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Generator64::new(random::accretive(n, 0.5, 2.0, 0.3, &mut rng)).unwrap();
        let (z, w) = (Complex64::new(-1.0, y1), Complex64::new(-2.0, -y2));
        let (rz, rw) = (g.resolvent(z).unwrap(), g.resolvent(w).unwrap());
        let rhs = (&rz * &rw).scale(w - z);
        prop_assert!(diff(&(&rz - &rw), &rhs) <= 1e-10 * (1.0 + rhs.frobenius_norm()));
    }
}

#[test]
fn zero_time_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = Generator64::new(random::gaussian(4, 1.0, &mut rng)).unwrap();
    assert_eq!(g.evolve(0.0).unwrap().matrix(), DenseOperator64::identity(4).matrix());
}

#[test]
fn norm_continuity_at_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = Generator64::new(random::gaussian(5, 1.0, &mut rng)).unwrap();
    let id = DenseOperator64::identity(5);
    let mut prev = f64::INFINITY;
    for k in 1..8 {
        let d = diff(&g.evolve(10f64.powi(-k)).unwrap(), &id);
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-6);
}

#[test]
fn jordan_block_falls_back_to_pade() {
    let a = DenseOperator64::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
    let g = Generator64::new(a).unwrap();
    let t = 0.7;
    let e = g.evolve(t).unwrap();
    let want = (-t).exp();
    assert!((e.entry(0, 0).re - want).abs() < 1e-14);
    assert!((e.entry(0, 1).re + t * want).abs() < 1e-14);
}

#[test]
fn growth_bound_of_random_generators() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Generator64::new(random::gaussian(6, 1.0, &mut rng)).unwrap();
        let gb = g.growth_bound().unwrap();
        assert!(gb.warning.is_none(), "{:?}", gb.warning);
        assert!((gb.fitted - gb.value).abs() < 0.05 * (1.0 + gb.value.abs()));
    }
}

#[test]
fn resolvent_on_spectrum_is_rejected() {
    let g = Generator64::new(DenseOperator64::identity(3)).unwrap();
    assert!(g.resolvent(Complex64::new(1.0, 0.0)).is_err());
}
