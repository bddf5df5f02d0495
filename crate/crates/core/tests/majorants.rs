use proptest::prelude::*;
use schatten_semigroup::majorants::{
    certify_omega, convolution_power, convolve, integral, iterated_convolution_tail, weighted_integral, MajorantGrid,
    ScalarMajorant,
};
use statrs::function::gamma::gamma;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn constant(t_max: f64, c: f64) -> ScalarMajorant<f64> {
    ScalarMajorant::<f64>::sample(MajorantGrid::<f64>::graded(t_max).unwrap(), |_| c, None).unwrap().with_envelope(1.0, 0.0).unwrap()
}

#[test]
fn exponential_convolution_powers() {
    // e^{-s} convolved n times is s^{n-1} e^{-s} / (n-1)!
    let psi = ScalarMajorant::<f64>::sample(MajorantGrid::<f64>::graded(20.0).unwrap(), |s| (-s).exp(), None)
        .unwrap()
        .with_envelope(1.0, -1.0)
        .unwrap();
    for n in 1..=4 {
        let p = convolution_power(&psi, n, 20.0).unwrap();
        for t in [0.3f64, 1.0, 4.0] {
            let want = t.powi(n as i32 - 1) * (-t).exp() / factorial(n - 1);
            assert!((p.eval(t) - want).abs() < 1e-8 * (1.0 + want), "n={n} t={t}");
        }
    }
}

#[test]
fn laplace_transform_factorises() {
    let psi = ScalarMajorant::<f64>::sample(MajorantGrid::<f64>::graded(40.0).unwrap(), |s| (-s).exp() * (1.0 + s.sin().powi(2)), None)
        .unwrap()
        .with_envelope(2.0, -1.0)
        .unwrap();
    let omega = 0.5;
    let l = weighted_integral(&psi, omega).unwrap();
    for n in 2..=4 {
        let p = convolution_power(&psi, n, 40.0).unwrap().with_envelope(2f64.powi(n as i32) * 1e3, -0.9).unwrap();
        let ln = weighted_integral(&p, omega).unwrap();
        assert!((ln - l.powi(n as i32)).abs() < 1e-6 * l.powi(n as i32), "n={n}: {ln} vs {}", l.powi(n as i32));
    }
}

#[test]
fn constant_kernel_tail_is_exponential() {
    // sum_{n >= 1} (1 * c^{[n*]})(t) = e^{ct} - 1
    for c in [0.5, 1.0, 2.0] {
        let psi = constant(8.0, c);
        let phi = constant(8.0, 1.0);
        for t in [0.5, 1.0, 2.0] {
            let s = iterated_convolution_tail(&psi, &phi, 1, t, 1e-13).unwrap();
            let want = (c * t).exp_m1();
            assert!(s.value >= want * (1.0 - 1e-9), "c={c} t={t}: {} < {want}", s.value);
            assert!(s.value <= want * (1.0 + 1e-6), "c={c} t={t}: {} > {want}", s.value);
        }
    }
}

#[test]
fn singular_kernel_tail_matches_series() {
    // psi = s^{-1/4}: psi^{[n*]}(s) = G(3/4)^n s^{3n/4 - 1} / G(3n/4)
    let psi = ScalarMajorant::<f64>::sample(MajorantGrid::<f64>::graded(8.0).unwrap(), |s| s.powf(-0.25), Some(0.25))
        .unwrap()
        .with_envelope(1.0, 0.0)
        .unwrap();
    let phi = constant(8.0, 1.0);
    let g = gamma(0.75);
    for (start, t) in [(1usize, 1.0f64), (3, 1.0), (2, 2.5)] {
        let want: f64 = (start..200).map(|n| g.powi(n as i32) * t.powf(0.75 * n as f64) / gamma(0.75 * n as f64 + 1.0)).sum();
        let s = iterated_convolution_tail(&psi, &phi, start, t, 1e-13).unwrap();
        assert!(s.value >= want * (1.0 - 1e-8), "{} vs {want}", s.value);
        assert!(s.value <= want * (1.0 + 1e-5), "{} vs {want}", s.value);
    }
}

#[test]
fn weighted_singular_integral() {
    // int e^{-2s} s^{-1/4} e^s ds = G(3/4)
    let f = ScalarMajorant::<f64>::sample(MajorantGrid::<f64>::graded(60.0).unwrap(), |s| s.powf(-0.25) * s.exp(), Some(0.25))
        .unwrap()
        .with_envelope(1.0, 1.0)
        .unwrap();
    let got = weighted_integral(&f, 2.0).unwrap();
    assert!((got - gamma(0.75)).abs() < 1e-8, "{got}");
}

#[test]
fn short_horizon_is_reported() {
    let f = ScalarMajorant::<f64>::sample(MajorantGrid::<f64>::graded(1.0).unwrap(), |s| s.exp(), None).unwrap().with_envelope(1.0, 1.0).unwrap();
    assert!(weighted_integral(&f, 1.5).is_err());
}

#[test]
fn certified_omega_halves_the_kernel() {
    let psi = constant(8.0, 3.0);
    let (w, l) = certify_omega(&psi).unwrap();
    assert!(l < 0.5);
    assert!((l - 3.0 / w).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convolution_is_monotone(a in 0.1f64..3.0, da in 0.0f64..2.0, k in 0.0f64..2.0, t in 0.05f64..4.0) {
        let grid = MajorantGrid::<f64>::graded(8.0).unwrap();
        let f = ScalarMajorant::<f64>::sample(grid.clone(), |s| a * (-k * s).exp(), None).unwrap();
        let g = ScalarMajorant::<f64>::sample(grid.clone(), |s| (a + da) * (-k * s).exp(), None).unwrap();
        let h = ScalarMajorant::<f64>::sample(grid, |s| 1.0 + s, None).unwrap();
        prop_assert!(convolve(&f, &h, t).unwrap() <= convolve(&g, &h, t).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn convolution_commutes(p in 0.0f64..0.6, t in 0.05f64..4.0) {
        let grid = MajorantGrid::<f64>::graded(8.0).unwrap();
        let f = ScalarMajorant::<f64>::sample(grid.clone(), |s| s.powf(-p), Some(p)).unwrap();
        let g = ScalarMajorant::<f64>::sample(grid, |s| (-s).exp() + s, None).unwrap();
        let a = convolve(&f, &g, t).unwrap();
        let b = convolve(&g, &f, t).unwrap();
        prop_assert!((a - b).abs() <= 1e-7 * a);
    }
}

#[test]
fn integral_of_polynomial() {
    let f = ScalarMajorant::<f64>::sample(MajorantGrid::<f64>::graded(3.0).unwrap(), |s| s * s, None).unwrap();
    assert!((integral(&f) - 9.0).abs() < 1e-11);
}
