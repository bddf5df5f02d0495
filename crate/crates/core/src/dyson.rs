//! Dyson-Phillips terms of `e^{-(A+B)t}` around `e^{-At}`.
//!
//! With `T(t) = e^{-At}` the perturbed semigroup is `sum_n S_n(t)` where
//! `S_0 = T` and `S_n(t) = int_0^t T(t-s) (-B) S_{n-1}(s) ds`.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::majorants::{self, MajorantGrid, ScalarMajorant, TailSeries};
use crate::quadrature::{GaussLegendre, PANEL_NODES};
use crate::schatten::{schatten_norm, SchattenIndex};
use crate::{DenseOperator, Generator, Real};

pub const DEFAULT_QUAD_PANELS: usize = 16;

/// Absolute truncation tolerance for tail series.
const TAIL_TOL: f64 = 1e-13;

/// Relative quadrature self-estimate above which results are rejected.
const RESOLUTION_TOL: f64 = 1e-6;

/// `max(floor(q) + 6, 10)`.
pub fn default_n_max<T: Real>(q: SchattenIndex<T>) -> Result<usize> {
    let q = q.finite()?;
    Ok((q.f64().floor() as usize + 6).max(10))
}

/// `max{1, q/n}`.
pub fn term_index<T: Real>(q: T, n: usize) -> SchattenIndex<T> {
    SchattenIndex::Finite((q / T::of_usize(n)).max(T::one()))
}

#[derive(Clone, Debug)]
pub struct DysonLedger<T: Real> {
    pub t: T,
    pub q: SchattenIndex<T>,
    /// `S_0(t) = e^{-At}`.
    pub unperturbed: DenseOperator<T>,
    /// `terms[n-1] = S_n(t)`.
    pub terms: Vec<DenseOperator<T>>,
    pub indices: Vec<SchattenIndex<T>>,
    pub term_norms: Vec<T>,
    /// Certified bound on `||sum_{n > N} S_n(t)||_1`.
    pub tail_bound: T,
    /// Panel-doubling estimate of the quadrature error.
    pub resolution_error: T,
    pub quad_panels: usize,
    pub tail: Option<TailSeries<T>>,
}

impl<T: Real> DysonLedger<T> {
    pub fn n_max(&self) -> usize {
        self.terms.len()
    }

    /// `S_0(t) + ... + S_N(t)`.
    pub fn partial_sum(&self) -> DenseOperator<T> {
        self.terms.iter().fold(self.unperturbed.clone(), |acc, s| &acc + s)
    }
}

/// Discretisation of `[0, t]` into uniform Gauss-Legendre panels.
struct Panels<T: Real> {
    h: T,
    rule: GaussLegendre<T>,
}

impl<T: Real> Panels<T> {
    fn new(t: T, count: usize) -> Self {
        Self { h: t / T::of_usize(count), rule: GaussLegendre::new(PANEL_NODES) }
    }

    fn node(&self, k: usize, l: usize) -> T {
        self.h * (T::of_usize(k) + (self.rule.nodes[l] + T::one()) / T::of(2.0))
    }

    fn weight(&self, l: usize) -> T {
        self.rule.weights[l] * self.h / T::of(2.0)
    }
}

type Mat<T> = DMatrix<Complex<T>>;

fn cscale<T: Real>(m: &Mat<T>, w: T) -> Mat<T> {
    m * Complex::new(w, T::zero())
}

/// `S_1(t), ..., S_{n_max}(t)` by nested composite Gauss-Legendre
/// quadrature with `S_{n-1}` memoised on the nodes.
///
/// Node values of one panel are stacked into an `(m d) x d` block. Each term
/// is marched panel by panel: the value at the left edge is carried across by
/// `T(h)`, and only the partial panel needs interpolation of `S_{n-1}`.
fn nested_terms<T: Real>(g: &Generator<T>, b: &DenseOperator<T>, t: T, n_max: usize, panels: usize) -> Result<Vec<Mat<T>>> {
    let p = Panels::new(t, panels);
    let m = PANEL_NODES;
    let d = b.dim();
    let nb = -b.matrix();
    let ev = |s: T| -> Result<Mat<T>> { Ok(g.evolve(s)?.into_matrix()) };
    let c = |w: T| Complex::new(w, T::zero());

    // K[0]: partial panel [k h, x_i], S_{n-1} interpolated through the panel nodes.
    let mut k0 = Mat::zeros(m * d, m * d);
    let mut lag = vec![T::zero(); m];
    for li in 0..m {
        let lam = (p.rule.nodes[li] + T::one()) * p.h / T::of(2.0);
        for (&xi, &wr) in p.rule.nodes.iter().zip(&p.rule.weights) {
            let y = lam * (xi + T::one()) / T::of(2.0);
            let w = wr * lam / T::of(2.0);
            p.rule.lagrange(y * T::of(2.0) / p.h - T::one(), &mut lag);
            let k = ev(lam - y)? * &nb;
            for (l, cl) in lag.iter().enumerate() {
                let mut blk = k0.view_mut((li * d, l * d), (d, d));
                blk += &k * c(w * *cl);
            }
        }
    }
    // Within a panel: T(x_i - t_k) from the left edge; across it: T(h) and the
    // endpoint row T(t_{k+1} - x_j) (-B) w_j.
    let mut tin = Mat::zeros(m * d, d);
    let mut end = Mat::zeros(d, m * d);
    for l in 0..m {
        let off = (p.rule.nodes[l] + T::one()) * p.h / T::of(2.0);
        tin.view_mut((l * d, 0), (d, d)).copy_from(&ev(off)?);
        end.view_mut((0, l * d), (d, d)).copy_from(&(ev(p.h - off)? * &nb * c(p.weight(l))));
    }
    let step = ev(p.h)?;

    let mut prev: Vec<Mat<T>> = Vec::with_capacity(panels);
    for k in 0..panels {
        let mut blk = Mat::zeros(m * d, d);
        for l in 0..m {
            blk.view_mut((l * d, 0), (d, d)).copy_from(&ev(p.node(k, l))?);
        }
        prev.push(blk);
    }
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        // S_n(t_k) at the left edge, zero at s = 0 for n >= 1.
        let mut edge = Mat::zeros(d, d);
        let mut next = Vec::with_capacity(panels);
        for blk in &prev {
            let mut cur = Mat::zeros(m * d, d);
            cur.gemm(one, &tin, &edge, zero);
            cur.gemm(one, &k0, blk, one);
            next.push(cur);
            let mut e = Mat::zeros(d, d);
            e.gemm(one, &step, &edge, zero);
            e.gemm(one, &end, blk, one);
            edge = e;
        }
        out.push(edge);
        prev = next;
    }
    Ok(out)
}

fn frob<T: Real>(m: &Mat<T>) -> T {
    m.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt()
}

/// Terms with a panel-doubling check on `S_1` and `S_2`.
fn checked_terms<T: Real>(g: &Generator<T>, b: &DenseOperator<T>, t: T, n_max: usize, panels: usize) -> Result<(Vec<Mat<T>>, T)> {
    let terms = nested_terms(g, b, t, n_max, panels)?;
    let k = n_max.min(2);
    if k == 0 {
        return Ok((terms, T::zero()));
    }
    let fine = nested_terms(g, b, t, k, 2 * panels)?;
    let est = terms.iter().zip(&fine).map(|(a, b)| frob(&(a - b))).fold(T::zero(), |a, b| a.max(b));
    let scale = frob(&terms[0]);
    if est > T::of(RESOLUTION_TOL) * scale {
        return Err(Error::Resolution(format!(
            "quadrature with {panels} panels changes S_1/S_2 by {est} (|S_1| = {scale}); increase quad_panels"
        )));
    }
    Ok((terms, est))
}

fn validate<T: Real>(g: &Generator<T>, b: &DenseOperator<T>, t: T) -> Result<()> {
    if g.dim() != b.dim() {
        return input(format!("generator is {0}x{0} but perturbation is {1}x{1}", g.dim(), b.dim()));
    }
    if !t.finite() || t < T::zero() {
        return input(format!("t must be finite and >= 0, got {t}"));
    }
    Ok(())
}

/// `phi(s) = ||T(s)||_inf` and `psi(s) = ||B T(s)||_q` on `(0, horizon]`,
/// with growth envelope `e^{mu u}` from the log-norm of `-A`.
pub fn semigroup_majorants<T: Real>(
    g: &Generator<T>,
    b: &DenseOperator<T>,
    q: SchattenIndex<T>,
    horizon: T,
) -> Result<(ScalarMajorant<T>, ScalarMajorant<T>)> {
    let grid = MajorantGrid::graded(horizon)?;
    let mut phi = Vec::with_capacity(grid.len());
    let mut psi = Vec::with_capacity(grid.len());
    for &s in grid.nodes() {
        let e = g.evolve(s)?;
        phi.push(e.singular_values()[0]);
        psi.push(schatten_norm(&(b * &e), q)?);
    }
    let mu = g.log_norm();
    let phi = ScalarMajorant::from_values(grid.clone(), phi, None)?.with_envelope(T::one(), mu)?;
    let psi = ScalarMajorant::from_values(grid, psi, None)?.with_envelope(T::one(), mu)?;
    Ok((phi, psi))
}

fn majorant_horizon<T: Real>(t: T) -> T {
    (t * T::of(2.0)).max(T::of(8.0))
}

/// The Dyson ledger `S_1(t), ..., S_{n_max}(t)` with norms at `max{1, q/n}`
/// and a certified bound on `||sum_{n > n_max} S_n(t)||_1`.
pub fn dyson_terms<T: Real>(
    g: &Generator<T>,
    b: &DenseOperator<T>,
    q: SchattenIndex<T>,
    t: T,
    n_max: usize,
    quad_panels: usize,
) -> Result<DysonLedger<T>> {
    validate(g, b, t)?;
    let qv = q.finite()?;
    let r = qv.f64().floor() as usize;
    if n_max < r.max(1) {
        return input(format!("n_max = {n_max} must be at least floor(q) = {r} for a trace-norm tail"));
    }
    if quad_panels == 0 {
        return input("quad_panels must be >= 1");
    }
    let unperturbed = g.evolve(t)?;
    if t == T::zero() {
        return Ok(DysonLedger {
            t,
            q,
            unperturbed,
            terms: Vec::new(),
            indices: Vec::new(),
            term_norms: Vec::new(),
            tail_bound: T::zero(),
            resolution_error: T::zero(),
            quad_panels,
            tail: None,
        });
    }
    let (raw, resolution_error) = checked_terms(g, b, t, n_max, quad_panels)?;
    let terms: Vec<DenseOperator<T>> = raw
        .into_iter()
        .map(|m| DenseOperator::new(m).map_err(|_| Error::Numerical("non-finite Dyson term".into())))
        .collect::<Result<_>>()?;
    let indices: Vec<SchattenIndex<T>> = (1..=n_max).map(|n| term_index(qv, n)).collect();
    let term_norms = terms.iter().zip(&indices).map(|(s, &i)| schatten_norm(s, i)).collect::<Result<Vec<T>>>()?;
    let (phi, psi) = semigroup_majorants(g, b, q, majorant_horizon(t))?;
    let tail = majorants::iterated_convolution_tail(&psi, &phi, n_max + 1, t, T::of(TAIL_TOL))?;
    Ok(DysonLedger {
        t,
        q,
        unperturbed,
        terms,
        indices,
        term_norms,
        tail_bound: tail.value,
        resolution_error,
        quad_panels,
        tail: Some(tail),
    })
}

/// Per-term envelope `||S_n(t)||_{max{1,q/n}} <= e^{omega t} / (2^n t^2)`.
#[derive(Clone, Debug, Serialize)]
pub struct TailCertificate<T: Real> {
    /// Certified exponent in the per-term envelope.
    pub omega: T,
    /// `omega` at which `int e^{-omega s} psi(s) ds < 1/2`.
    pub base_omega: T,
    pub weighted_psi: T,
    /// `sup_{s <= t} e^{-base_omega s} ||T(s)||_inf`.
    pub sup_phi: T,
    pub start_index: usize,
    pub t: T,
    /// Bound on `||sum_{n > start_index} S_n(t)||_1`.
    pub tail_bound: T,
}

impl<T: Real> TailCertificate<T> {
    pub fn bound(&self, n: usize) -> T {
        (self.omega * self.t).exp() / (T::of(2f64.powi(n as i32)) * self.t * self.t)
    }
}

pub fn tail_certificate<T: Real>(
    g: &Generator<T>,
    b: &DenseOperator<T>,
    q: SchattenIndex<T>,
    t: T,
) -> Result<TailCertificate<T>> {
    validate(g, b, t)?;
    if t == T::zero() {
        return input("tail certificate needs t > 0");
    }
    let start = q.finite()?.f64().floor() as usize;
    let (phi, psi) = semigroup_majorants(g, b, q, majorant_horizon(t))?;
    let (w, l) = majorants::certify_omega(&psi)?;
    let sup_phi = phi.weighted_sup(t, w).ok_or_else(|| Error::Numerical("unbounded semigroup majorant".into()))?;
    let omega = w + (sup_phi * t * t).max(T::one()).ln() / t;
    let tail = majorants::iterated_convolution_tail(&psi, &phi, start + 1, t, T::of(TAIL_TOL))?;
    Ok(TailCertificate { omega, base_omega: w, weighted_psi: l, sup_phi, start_index: start, t, tail_bound: tail.value })
}

#[derive(Clone, Debug, Serialize)]
pub struct DuhamelReport<T: Real> {
    pub residual: T,
    pub resolution_error: T,
    pub panels: usize,
}

/// `||e^{-(A+B)t} - e^{-At} + int_0^t T(t-s, A+B) B T(s, A) ds||_q`.
pub fn duhamel_residual<T: Real>(g: &Generator<T>, b: &DenseOperator<T>, q: SchattenIndex<T>, t: T) -> Result<T> {
    Ok(duhamel_report(g, b, q, t, DEFAULT_QUAD_PANELS)?.residual)
}

pub fn duhamel_report<T: Real>(
    g: &Generator<T>,
    b: &DenseOperator<T>,
    q: SchattenIndex<T>,
    t: T,
    panels: usize,
) -> Result<DuhamelReport<T>> {
    validate(g, b, t)?;
    if panels == 0 {
        return input("panels must be >= 1");
    }
    let gp = Generator::new(g.operator() + b)?;
    let integral = |np: usize| -> Result<Mat<T>> {
        let p = Panels::new(t, np);
        let mut acc = Mat::zeros(b.dim(), b.dim());
        for k in 0..np {
            for l in 0..PANEL_NODES {
                let s = p.node(k, l);
                let term = gp.evolve(t - s)?.into_matrix() * b.matrix() * g.evolve(s)?.into_matrix();
                acc += cscale(&term, p.weight(l));
            }
        }
        Ok(acc)
    };
    let coarse = integral(panels)?;
    let fine = integral(2 * panels)?;
    let est = frob(&(&coarse - &fine));
    if est > T::of(RESOLUTION_TOL) * frob(&coarse) {
        return Err(Error::Resolution(format!("Duhamel quadrature changes by {est} under panel doubling")));
    }
    let r = gp.evolve(t)?.into_matrix() - g.evolve(t)?.into_matrix() + coarse;
    let residual = schatten_norm(&DenseOperator::new(r)?, q)?;
    Ok(DuhamelReport { residual, resolution_error: est, panels })
}

#[derive(Clone, Debug)]
pub struct MixedExpansion<T: Real> {
    /// `floor(q - q/p)`.
    pub ell: usize,
    /// `r_n = max{1, pq/(np+q)}`, `n = 0..=n_max`.
    pub r_indices: Vec<T>,
    /// `terms[n] = B_0 S_n(t)`.
    pub terms: Vec<DenseOperator<T>>,
    pub term_norms: Vec<T>,
    /// Bound on `||sum_{n > ell} B_0 S_n(t)||_1`.
    pub w_norm_bound: T,
}

/// `ell = floor(q - q/p)` and `r_n = max{1, pq/(np+q)}`.
pub fn mixed_indices<T: Real>(p: SchattenIndex<T>, q: SchattenIndex<T>, n_max: usize) -> Result<(usize, Vec<T>)> {
    let (pv, qv) = (p.finite()?, q.finite()?);
    if pv < qv {
        return input(format!("mixed expansion needs p >= q, got p = {pv}, q = {qv}"));
    }
    let ell = (qv - qv / pv).f64().floor() as usize;
    let r = (0..=n_max)
        .map(|n| (pv * qv / (T::of_usize(n) * pv + qv)).max(T::one()))
        .collect();
    Ok((ell, r))
}

#[allow(clippy::too_many_arguments)]
pub fn mixed_expansion<T: Real>(
    g: &Generator<T>,
    b: &DenseOperator<T>,
    b0: &DenseOperator<T>,
    p: SchattenIndex<T>,
    q: SchattenIndex<T>,
    t: T,
    n_max: usize,
) -> Result<MixedExpansion<T>> {
    validate(g, b, t)?;
    validate(g, b0, t)?;
    if t == T::zero() {
        return input("mixed expansion needs t > 0");
    }
    let (ell, r_indices) = mixed_indices(p, q, n_max)?;
    let (raw, _) = checked_terms(g, b, t, n_max, DEFAULT_QUAD_PANELS)?;
    let mut terms = vec![b0 * &g.evolve(t)?];
    for s in raw {
        terms.push(b0 * &DenseOperator::new(s)?);
    }
    let term_norms = terms
        .iter()
        .zip(&r_indices)
        .map(|(x, &r)| schatten_norm(x, SchattenIndex::Finite(r)))
        .collect::<Result<Vec<T>>>()?;
    let h = majorant_horizon(t);
    let (_, psi) = semigroup_majorants(g, b, q, h)?;
    let (_, psi0) = semigroup_majorants(g, b0, p, h)?;
    let w = majorants::iterated_convolution_tail(&psi, &psi0, ell + 1, t, T::of(TAIL_TOL))?;
    Ok(MixedExpansion { ell, r_indices, terms, term_norms, w_norm_bound: w.value })
}
