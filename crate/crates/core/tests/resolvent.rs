use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schatten_semigroup::random;
use schatten_semigroup::resolvent::{
    resolvent_difference_scan, spectral_enclosure, spectral_enclosure_pair, vertical_decay_scan,
};
use schatten_semigroup::{Complex64, DenseOperator64, Generator64, SchattenIndex};

#[test]
fn scalar_resolvent_decay() {
    // |(1 + iy - 0)^{-1}| = (1 + y^2)^{-1/2}
    let g = Generator64::new(DenseOperator64::zeros(1)).unwrap();
    let s = vertical_decay_scan(&g, &DenseOperator64::identity(1), SchattenIndex::trace(), 1.0, 1e3, 48).unwrap();
    for (y, n) in s.ys.iter().zip(&s.norms) {
        assert!((n - 1.0 / (1.0 + y * y).sqrt()).abs() < 1e-14);
    }
    assert!((s.fitted_decay.unwrap() + 1.0).abs() < 1e-3);
    assert!(s.decreasing_in_top_decade());
}

#[test]
fn random_pairs_decay_at_least_linearly() {
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Generator64::new(random::accretive(6, 0.5, 3.0, 0.5, &mut rng)).unwrap();
        let b = random::gaussian(6, 1.0, &mut rng);
        let s = vertical_decay_scan(&g, &b, SchattenIndex::Finite(2.0), 0.0, 1e3, 48).unwrap();
        assert!(s.fitted_decay.unwrap() <= -0.9);
    }
}

#[test]
fn small_perturbation_difference_decays_quadratically() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random::accretive(5, 0.5, 2.0, 0.3, &mut rng);
    let b = random::gaussian(5, 1.0, &mut rng);
    let g1 = Generator64::new(a.clone()).unwrap();
    let eps = 1e-3;
    let g2 = Generator64::new(&a + &b.scale_real(eps)).unwrap();
    let s = resolvent_difference_scan(&g1, &g2, SchattenIndex::Finite(2.0), 0.0, 1e3).unwrap();
    assert!((s.fitted_decay.unwrap() + 2.0).abs() < 0.05);
    // leading term eps ||B||_2 / y^2 at the top of the scan
    let y = *s.ys.last().unwrap();
    let lead = eps * b.frobenius_norm() / (y * y);
    assert!((s.norms.last().unwrap() / lead - 1.0).abs() < 0.05);
    assert!(s.max_identity_residual() <= 1e-9);
}

#[test]
fn rank_one_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let a = random::accretive(6, 0.5, 2.0, 0.3, &mut rng);
    let u = random::gaussian::<f64, _>(6, 1.0, &mut rng);
    let col = u.matrix().column(0).into_owned();
    let r1 = DenseOperator64::new(&col * col.adjoint()).unwrap();
    let g1 = Generator64::new(a.clone()).unwrap();
    let g2 = Generator64::new(&a + &r1).unwrap();
    let s = resolvent_difference_scan(&g1, &g2, SchattenIndex::trace(), 0.0, 1e3).unwrap();
    assert!(s.fitted_decay.unwrap() <= -1.8);
    assert!(s.max_identity_residual() <= 1e-9);
}

#[test]
fn scan_skips_points_on_spectrum() {
    let g = Generator64::new(DenseOperator64::diagonal(&[Complex64::new(0.0, 10.0)]).unwrap()).unwrap();
    let s = vertical_decay_scan(&g, &DenseOperator64::identity(1), SchattenIndex::Infinity, 0.0, 10.0, 16).unwrap();
    assert_eq!(s.skipped, vec![10.0]);
}

#[test]
fn enclosure_contains_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let g1 = Generator64::new(random::gaussian(7, 2.0, &mut rng)).unwrap();
    let g2 = Generator64::new(random::gaussian(7, 2.0, &mut rng)).unwrap();
    let env = spectral_enclosure(&g1, 0.1).unwrap();
    assert!(g1.spectrum().iter().all(|&l| env.contains(l)));
    let pair = spectral_enclosure_pair(&g1, &g2, 0.1).unwrap();
    assert!(g1.spectrum().iter().chain(g2.spectrum()).all(|&l| pair.contains(l)));
    assert!(env.f.iter().all(|&f| f >= 0.1));
}
