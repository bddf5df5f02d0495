use std::f64::consts::PI;

use schatten_semigroup::schatten::SchattenIndex;
use schatten_semigroup::schrodinger::{
    birman_solomjak_norm, bq_membership_probe, bq_refinement, build_dirichlet_laplacian, gaussian_bs_bound,
    gaussian_reference_integral, heat_kernel_bound_check, heat_kernel_refinement, parse_expression, GridDomain,
    HeatKernelModel, Potential,
};
use schatten_semigroup::Complex64;

fn real_pot(dom: &GridDomain<f64>, f: impl Fn(f64) -> f64) -> Potential<f64> {
    Potential::from_fn(dom, |x, _| Complex64::new(f(x), 0.0)).unwrap()
}

#[test]
fn laplacian_eigenvalues_converge_quadratically() {
    // k-th eigenvalue on (0, pi) tends to k^2 with O(h^2) error.
    let errs: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let dom = GridDomain::interval(PI, n).unwrap();
            let h = dom.h(0);
            // closed form for the stencil spectrum, k = 3
            let mu = 4.0 / (h * h) * (3.0 * h / 2.0).sin().powi(2);
            (9.0 - mu).abs()
        })
        .collect();
    assert!((errs[0] / errs[1] - 4.0).abs() < 0.2 && (errs[1] / errs[2] - 4.0).abs() < 0.2, "{errs:?}");
}

#[test]
fn square_ground_state() {
    let dom = GridDomain::<f64>::rectangle(PI, PI, 16).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    let low = g.spectrum().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    assert!((low - 2.0).abs() < 0.01, "{low}");
}

#[test]
fn heat_kernel_refinement_on_interval() {
    let model = HeatKernelModel::dirichlet(1).unwrap();
    let coarse = GridDomain::interval(PI, 128).unwrap();
    let fine = GridDomain::interval(PI, 256).unwrap();
    let r = heat_kernel_refinement(&coarse, &fine, &model, &[0.05, 0.1, 0.5]).unwrap();
    assert!(r.holds, "{:?} vs {:?}", r.fine.violations, r.eps_disc);
    assert!(r.fine.max_violation <= 1e-3);
    assert!(r.fine.min_entry >= -1e-12);
}

#[test]
fn large_time_kernel_has_slack() {
    let dom = GridDomain::interval(PI, 64).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    let model = HeatKernelModel::dirichlet(1).unwrap();
    let c = heat_kernel_bound_check(&g, &dom, &model, &[12.0]).unwrap();
    assert!(c.max_violation < 0.0);
}

#[test]
fn gaussian_reference_integral_matches_closed_form() {
    let dom = GridDomain::truncated_box(8.0, 1, 255).unwrap();
    for t in [0.1, 1.0] {
        let v = gaussian_reference_integral(&dom, 0.25, t);
        assert!((v - (2.0 * PI * t).sqrt()).abs() < 1e-8, "t={t}");
    }
}

#[test]
fn l2_potential_certificate_and_exponent() {
    let ts = [0.02, 0.05, 0.1, 0.2, 0.5];
    let mk = |n| {
        let dom = GridDomain::<f64>::truncated_box(8.0, 1, n).unwrap();
        let v = Potential::from_fn(&dom, |x: f64, _| Complex64::new((-x * x).exp(), 0.3 * x * (-x * x / 2.0).exp())).unwrap();
        (build_dirichlet_laplacian(&dom).unwrap(), v)
    };
    let (gc, vc) = mk(128);
    let (gf, vf) = mk(256);
    let r = bq_refinement((&gc, &vc), (&gf, &vf), &ts).unwrap();
    assert!(r.holds, "{:?} {:?}", r.fine.certificate_ratios, r.eps_disc);
    let e = r.fine.fitted_exponent;
    assert!((e + 0.25).abs() < 0.1, "{e}");
}

#[test]
fn zero_potential_probe() {
    let dom = GridDomain::truncated_box(4.0, 1, 32).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    let p = bq_membership_probe(&g, &dom, &Potential::zero(&dom), SchattenIndex::Finite(2.0), &[0.1, 0.5]).unwrap();
    assert!(p.norms.iter().all(|&x| x == 0.0));
    assert!(p.integrable);
}

#[test]
fn cube_indicator_trace_class_probe() {
    let dom = GridDomain::truncated_box(6.0, 1, 192).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    let v = real_pot(&dom, |x| if (-0.5..0.5).contains(&x) { 1.0 } else { 0.0 });
    let ts = [5e-3, 1e-2, 3e-2, 1e-1];
    let p = bq_membership_probe(&g, &dom, &v, SchattenIndex::trace(), &ts).unwrap();
    assert!(p.norms.iter().all(|x| x.is_finite()));
    assert!(p.integrable, "{}", p.fitted_exponent);
}

#[test]
fn scaling_potential_scales_norms() {
    let dom = GridDomain::truncated_box(4.0, 1, 48).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    let v = real_pot(&dom, |x| (-x * x).exp());
    let c = Complex64::new(-1.5, 2.0);
    let ts = [0.1, 0.3];
    let q = SchattenIndex::Finite(1.5);
    let a = bq_membership_probe(&g, &dom, &v, q, &ts).unwrap();
    let b = bq_membership_probe(&g, &dom, &v.scaled(c), q, &ts).unwrap();
    for (x, y) in a.norms.iter().zip(&b.norms) {
        assert!((y - 2.5 * x).abs() < 1e-10 * y);
    }
}

#[test]
fn gaussian_birman_solomjak_bound() {
    let dom = GridDomain::truncated_box(24.0, 1, 2047).unwrap();
    for t in [0.1, 1.0, 10.0] {
        let v = real_pot(&dom, |x| (-t * x * x).exp());
        for p in [1.0, 2.0] {
            let n = birman_solomjak_norm(&v, SchattenIndex::Finite(p), 1.0).unwrap();
            assert!(n < gaussian_bs_bound(t, p, 1), "t={t} p={p}");
        }
    }
}

#[test]
fn block_sum_oracle() {
    let dom = GridDomain::truncated_box(6.0, 1, 383).unwrap();
    let v = real_pot(&dom, |x| (-x * x).exp());
    // independent blockwise sum
    let h = dom.h(0);
    let mut blocks = std::collections::BTreeMap::<i64, f64>::new();
    for i in 0..dom.n {
        let x = -6.0 + h * (i + 1) as f64;
        *blocks.entry((x + 0.5).floor() as i64).or_default() += h * (-x * x).exp().powi(2);
    }
    let want: f64 = blocks.values().map(|m| m.sqrt()).sum();
    let got = birman_solomjak_norm(&v, SchattenIndex::trace(), 1.0).unwrap();
    assert!((got - want).abs() < 1e-10);
}

#[test]
fn embedding_chain() {
    let dom = GridDomain::<f64>::truncated_box(10.0, 1, 255).unwrap();
    let v = Potential::from_expr(&dom, &parse_expression("(1+x^2)^(-1) * (1 + 0.5i)").unwrap()).unwrap();
    let n2 = birman_solomjak_norm(&v, SchattenIndex::Finite(2.0), 1.0).unwrap();
    let n1 = birman_solomjak_norm(&v, SchattenIndex::trace(), 1.0).unwrap();
    assert!(v.l2_norm() <= n2 * (1.0 + 1e-12) && n2 <= n1);
    assert!(v.delta_norm(1.0).is_finite());
}
