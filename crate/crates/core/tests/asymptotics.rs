use std::f64::consts::PI;
use std::time::Instant;

use schatten_semigroup::asymptotics::{fitted_a0, heat_trace_check, perturbed_spectrum, weyl_lower_bound_check};
use schatten_semigroup::schrodinger::{build_dirichlet_laplacian, GridDomain, Potential};
use schatten_semigroup::Complex64;

fn potentials(dom: &GridDomain<f64>) -> Vec<(&'static str, Potential<f64>)> {
    vec![
        ("zero", Potential::zero(dom)),
        ("ix", Potential::from_fn(dom, |x, _| Complex64::new(0.0, x)).unwrap()),
        (
            "bump",
            Potential::from_fn(dom, |x, _| Complex64::new(2.0, 3.0) * (-4.0 * (x - PI / 2.0).powi(2)).exp()).unwrap(),
        ),
    ]
}

#[test]
fn zero_potential_spectrum_is_stencil_spectrum() {
    let dom = GridDomain::<f64>::interval(PI, 64).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    let rep = perturbed_spectrum(&g, &Potential::zero(&dom)).unwrap();
    let h = dom.h(0);
    for (k, z) in rep.eigenvalues.iter().enumerate() {
        let want = 4.0 / (h * h) * ((k + 1) as f64 * h / 2.0).sin().powi(2);
        assert!((z.re - want).abs() < 1e-9 * want && z.im.abs() < 1e-12);
    }
}

#[test]
fn constant_shift_moves_spectrum() {
    let dom = GridDomain::<f64>::interval(PI, 48).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    let base = perturbed_spectrum(&g, &Potential::zero(&dom)).unwrap();
    let c = Complex64::new(0.0, 2.5);
    let shifted = perturbed_spectrum(&g, &Potential::zero(&dom).shifted(c)).unwrap();
    for (a, b) in base.eigenvalues.iter().zip(&shifted.eigenvalues) {
        assert!((a + c - b).norm() < 1e-8 * (1.0 + a.norm()));
    }
}

#[test]
fn trace_identity() {
    let dom = GridDomain::<f64>::interval(PI, 96).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    for (_, v) in potentials(&dom) {
        let rep = perturbed_spectrum(&g, &v).unwrap();
        let sum: Complex64 = rep.eigenvalues.iter().sum();
        let want = g.operator().trace() + v.samples().iter().sum::<Complex64>();
        assert!((sum - want).norm() < 1e-8 * want.norm());
    }
}

#[test]
fn weyl_margins_on_pi_interval() {
    let start = Instant::now();
    let dom = GridDomain::<f64>::interval(PI, 256).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    for (name, v) in potentials(&dom) {
        let rep = perturbed_spectrum(&g, &v).unwrap();
        let w = weyl_lower_bound_check(&rep, &dom, 80).unwrap();
        let n_star = w.n_star.unwrap_or_else(|| panic!("{name}: no N_star"));
        assert!(w.margins[n_star - 1..].iter().all(|&m| m >= 0.0), "{name}");
        assert!(fitted_a0(&rep, &dom, 80) > 0.0, "{name}");
    }
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn heat_trace_bounds() {
    let dom = GridDomain::<f64>::interval(PI, 256).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    for (name, v) in potentials(&dom) {
        let c = heat_trace_check(&g, &v, &dom, &[0.05, 0.1, 0.2, 0.5]).unwrap();
        assert!(c.all_ok(), "{name}: {:?}", c);
        assert!(c.m1 >= 0.0 && c.m1.is_finite());
    }
}

#[test]
fn heat_trace_rejects_unresolved_times() {
    let dom = GridDomain::<f64>::interval(PI, 16).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    assert!(heat_trace_check(&g, &Potential::zero(&dom), &dom, &[0.01]).is_err());
    assert!(heat_trace_check(&g, &Potential::zero(&dom), &dom, &[2.0]).is_err());
}

#[test]
fn report_json_and_csv() {
    let dom = GridDomain::<f64>::interval(PI, 30).unwrap();
    let g = build_dirichlet_laplacian(&dom).unwrap();
    let mut rep = perturbed_spectrum(&g, &Potential::zero(&dom)).unwrap();
    rep.weyl = Some(weyl_lower_bound_check(&rep, &dom, 10).unwrap());
    let j = rep.to_json();
    assert_eq!(j["schema_version"], 1);
    assert_eq!(j["eigenvalues"].as_array().unwrap().len(), 30);
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 31);
}
