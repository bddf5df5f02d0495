//! Eigenvalues of `-Delta + V` on a grid: Weyl-type lower bounds and
//! heat-trace estimates.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{input, Error, Result};
use crate::schrodinger::{build_dirichlet_laplacian, GridDomain, Potential};
use crate::{DenseOperator, Generator, Real, SCHEMA_VERSION};

/// `gamma` in the `M_1` measurement window `(0, gamma]`.
pub const GAMMA: f64 = 1.0;

#[derive(Clone, Debug, Serialize)]
pub struct WeylCheck<T: Real> {
    /// `4 pi / (4 e |Omega|)^{2/d}`.
    pub weyl_constant: T,
    pub n_check: usize,
    /// `margins[n-1] = Re lambda_n - weyl_constant n^{2/d}`.
    pub margins: Vec<T>,
    /// First index from which every margin up to `n_check` is `>= 0`.
    pub n_star: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRecord<T: Real> {
    pub t: T,
    /// `||e^{-A t/2}||_2^2` for the unperturbed Laplacian.
    pub hs_norm_sq: T,
    /// `|Omega| / (4 pi t)^{d/2}`.
    pub hs_bound: T,
    /// Relative discretisation slack from the refinement pair.
    pub eps_disc: T,
    pub hs_bound_ok: bool,
    /// `sum_k e^{-Re lambda_k t}`.
    pub series: T,
    /// `2 |Omega| / (4 pi t)^{d/2} + 2 M_1^2 + eps_disc * 2 |Omega| / (4 pi t)^{d/2}`.
    pub series_bound: T,
    pub series_bound_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatTraceCheck<T: Real> {
    pub gamma: T,
    /// `max_{t <= gamma} (||e^{-Ht}||_2 - ||e^{-At}||_2)`, clipped at 0.
    pub m1: T,
    pub records: Vec<TraceRecord<T>>,
}

impl<T: Real> HeatTraceCheck<T> {
    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.hs_bound_ok && r.series_bound_ok)
    }
}

/// Sorted spectrum of a perturbed grid operator plus optional checks.
#[derive(Clone, Debug)]
pub struct SpectralReport<T: Real> {
    /// Sorted by `Re`, ties by `Im`.
    pub eigenvalues: Vec<Complex<T>>,
    pub weyl: Option<WeylCheck<T>>,
    pub trace: Option<HeatTraceCheck<T>>,
}

impl<T: Real> SpectralReport<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_star(&self) -> Option<usize> {
        self.weyl.as_ref().and_then(|w| w.n_star)
    }

    pub fn to_json(&self) -> Value {
        let ev: Vec<[f64; 2]> = self.eigenvalues.iter().map(|z| [z.re.f64(), z.im.f64()]).collect();
        json!({
            "schema_version": SCHEMA_VERSION,
            "eigenvalues": ev,
            "weyl": self.weyl,
            "heat_trace": self.trace,
        })
    }

    /// Rows `n, re, im, bound, margin` (bound and margin blank past `n_check`).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        out.write_record(["n", "re", "im", "bound", "margin"]).map_err(csv_err)?;
        for (k, z) in self.eigenvalues.iter().enumerate() {
            let n = k + 1;
            let (b, m) = match &self.weyl {
                Some(wc) if n <= wc.n_check => {
                    let m = wc.margins[k];
                    (format!("{:e}", (z.re - m).f64()), format!("{:e}", m.f64()))
                }
                _ => (String::new(), String::new()),
            };
            out.write_record([n.to_string(), format!("{:e}", z.re.f64()), format!("{:e}", z.im.f64()), b, m])
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn sort_spectrum<T: Real>(v: &mut [Complex<T>]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

fn perturbed_matrix<T: Real>(g: &Generator<T>, v: &Potential<T>) -> Result<DMatrix<Complex<T>>> {
    if g.dim() != v.samples().len() {
        return input(format!("generator is {0}x{0}, potential has {1} samples", g.dim(), v.samples().len()));
    }
    let mut h = g.operator().matrix().clone();
    for (i, z) in v.samples().iter().enumerate() {
        h[(i, i)] += *z;
    }
    Ok(h)
}

/// Eigenvalues of `A + diag(V)`.
pub fn perturbed_spectrum<T: Real>(g: &Generator<T>, v: &Potential<T>) -> Result<SpectralReport<T>> {
    let h = perturbed_matrix(g, v)?;
    let real_v = v.samples().iter().all(|z| z.im == T::zero());
    let mut ev: Vec<Complex<T>> = if real_v && g.is_hermitian() {
        SymmetricEigen::new(h).eigenvalues.iter().map(|&x| Complex::new(x, T::zero())).collect()
    } else {
        crate::semigroup::eigenvalues(&h).map_err(|e| {
            Error::Numerical(format!("{e}; |H|_F = {}", DenseOperator::wrap(perturbed_matrix(g, v).unwrap_or_default()).frobenius_norm()))
        })?
    };
    if !ev.iter().all(|z| z.re.finite() && z.im.finite()) {
        return Err(Error::Numerical("eigensolver returned non-finite values".into()));
    }
    sort_spectrum(&mut ev);
    Ok(SpectralReport { eigenvalues: ev, weyl: None, trace: None })
}

/// `4 pi / (4 e |Omega|)^{2/d}`.
pub fn weyl_constant<T: Real>(dom: &GridDomain<T>) -> T {
    let d = T::of_usize(dom.dim());
    T::of(4.0) * T::pi() / (T::of(4.0) * T::e() * dom.volume()).powf(T::of(2.0) / d)
}

pub fn weyl_lower_bound_check<T: Real>(rep: &SpectralReport<T>, dom: &GridDomain<T>, n_check: usize) -> Result<WeylCheck<T>> {
    if n_check == 0 || n_check > rep.dim() / 3 {
        return input(format!(
            "n_check = {n_check} must lie in 1..={} (first third of the grid spectrum)",
            rep.dim() / 3
        ));
    }
    let c = weyl_constant(dom);
    let e = T::of(2.0) / T::of_usize(dom.dim());
    let margins: Vec<T> = (1..=n_check).map(|n| rep.eigenvalues[n - 1].re - c * T::of_usize(n).powf(e)).collect();
    let mut n_star = None;
    for n in (1..=n_check).rev() {
        if margins[n - 1] >= T::zero() {
            n_star = Some(n);
        } else {
            break;
        }
    }
    Ok(WeylCheck { weyl_constant: c, n_check, margins, n_star })
}

/// `min_{n <= n_check} Re lambda_n / n^{2/d}`.
pub fn fitted_a0<T: Real>(rep: &SpectralReport<T>, dom: &GridDomain<T>, n_check: usize) -> T {
    let e = T::of(2.0) / T::of_usize(dom.dim());
    rep.eigenvalues
        .iter()
        .take(n_check)
        .enumerate()
        .map(|(k, z)| z.re / T::of_usize(k + 1).powf(e))
        .fold(T::max_value().unwrap_or(T::one() / T::eps()), |a, b| a.min(b))
}

fn frob<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt()
}

/// `||e^{-Gt}||_2` on `t_0 2^{k/4} <= gamma`, with four evolutions and
/// repeated squaring.
fn hs_profile<T: Real>(g: &Generator<T>, t0: T, gamma: T) -> Result<Vec<(T, T)>> {
    let mut out = Vec::new();
    for j in 0..4 {
        let mut t = t0 * T::of(2f64.powf(j as f64 / 4.0));
        if t > gamma {
            break;
        }
        let mut e = g.evolve(t)?.into_matrix();
        while t <= gamma * T::of(1.0 + 1e-12) {
            out.push((t, frob(&e)));
            e = &e * &e;
            t *= T::of(2.0);
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Hilbert-Schmidt and trace-series bounds at each `t` in `ts`.
pub fn heat_trace_check<T: Real>(g: &Generator<T>, v: &Potential<T>, dom: &GridDomain<T>, ts: &[T]) -> Result<HeatTraceCheck<T>> {
    if g.dim() != dom.num_nodes() || v.domain() != dom {
        return input("generator, potential and grid must match");
    }
    let gamma = T::of(GAMMA);
    let h2 = dom.h_min() * dom.h_min();
    if ts.is_empty() {
        return input("no sample times given");
    }
    for &t in ts {
        if !t.finite() || t > gamma {
            return input(format!("t = {t} outside (h^2, {gamma}]"));
        }
        if t <= h2 {
            return Err(Error::Resolution(format!("t = {t} not above h^2 = {h2}")));
        }
    }
    let coarse_dom = dom.with_points(dom.n / 2)?;
    let coarse = build_dirichlet_laplacian(&coarse_dom)?;
    let (hc, hf) = (coarse_dom.h_min(), dom.h_min());

    let gh = Generator::new(DenseOperator::new(perturbed_matrix(g, v)?)?)?;
    let mut lam = gh.spectrum().to_vec();
    sort_spectrum(&mut lam);

    let pa = hs_profile(g, h2, gamma)?;
    let ph = hs_profile(&gh, h2, gamma)?;
    let m1 = pa.iter().zip(&ph).fold(T::zero(), |m, (a, b)| m.max(b.1 - a.1));

    let d2 = T::of_usize(dom.dim()) / T::of(2.0);
    let omega = dom.volume();
    let mut records = Vec::with_capacity(ts.len());
    for &t in ts {
        let qf = frob(g.evolve(t / T::of(2.0))?.matrix()).powi(2);
        let qc = coarse.spectrum().iter().fold(T::zero(), |a, z| a + (-z.re * t).exp());
        let eps = crate::schrodinger::refinement_slack(qc, qf, hc, hf) / qf;
        let hs_bound = omega / (T::of(4.0) * T::pi() * t).powf(d2);
        let hs_bound_ok = qf <= hs_bound * (T::one() + eps) * (T::one() + T::verdict_slack());
        let series = lam.iter().fold(T::zero(), |a, z| a + (-z.re * t).exp());
        let series_bound = T::of(2.0) * hs_bound * (T::one() + eps) + T::of(2.0) * m1 * m1;
        let series_bound_ok = series <= series_bound * (T::one() + T::verdict_slack());
        records.push(TraceRecord { t, hs_norm_sq: qf, hs_bound, eps_disc: eps, hs_bound_ok, series, series_bound, series_bound_ok });
    }
    Ok(HeatTraceCheck { gamma, m1, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weyl_constant_on_pi_interval() {
        let dom = GridDomain::<f64>::interval(std::f64::consts::PI, 16).unwrap();
        let want = 1.0 / (4.0 * std::f64::consts::E.powi(2) * std::f64::consts::PI);
        assert!((weyl_constant(&dom) - want).abs() < 1e-15);
        assert!((weyl_constant(&dom) - 0.01077).abs() < 1e-5);
    }

    #[test]
    fn n_check_limited_to_first_third() {
        let dom = GridDomain::<f64>::interval(1.0, 30).unwrap();
        let g = build_dirichlet_laplacian(&dom).unwrap();
        let rep = perturbed_spectrum(&g, &Potential::zero(&dom)).unwrap();
        assert!(weyl_lower_bound_check(&rep, &dom, 11).is_err());
        assert!(weyl_lower_bound_check(&rep, &dom, 10).is_ok());
    }

    #[test]
    fn sorting_breaks_ties_by_imaginary_part() {
        let mut v = vec![Complex::new(1.0, 2.0), Complex::new(0.5, 0.0), Complex::new(1.0, -1.0)];
        sort_spectrum(&mut v);
        assert_eq!(v, vec![Complex::new(0.5, 0.0), Complex::new(1.0, -1.0), Complex::new(1.0, 2.0)]);
    }
}
