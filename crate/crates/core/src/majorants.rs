//! Scalar majorants on `(0, t_max]` and their convolution calculus.
//!
//! Samples live on a geometrically graded Gauss-Legendre grid: panels
//! `[s_min rho^k, s_min rho^{k+1}]` with `s_min = t_max 10^{-decades}`. The
//! piece `[0, s_min]` is handled analytically through a power law
//! `f(s) ~ f(s_min) (s_min / s)^alpha`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::quadrature::{GaussLegendre, PANEL_NODES};
use crate::Real;

pub const DEFAULT_DECADES: usize = 10;
pub const DEFAULT_PANELS_PER_DECADE: usize = 8;

/// Shared sample grid of a family of majorants.
#[derive(Clone, Debug)]
pub struct MajorantGrid<T: Real> {
    t_max: T,
    decades: usize,
    per_decade: usize,
    log_ratio: T,
    breaks: Vec<T>,
    nodes: Vec<T>,
    weights: Vec<T>,
    rule: GaussLegendre<T>,
}

impl<T: Real> MajorantGrid<T> {
    pub fn graded(t_max: T) -> Result<Arc<Self>> {
        Self::with_resolution(t_max, DEFAULT_DECADES, DEFAULT_PANELS_PER_DECADE)
    }

    pub fn with_resolution(t_max: T, decades: usize, per_decade: usize) -> Result<Arc<Self>> {
        if !t_max.finite() || t_max <= T::zero() {
            return input(format!("grid horizon must be positive, got {t_max}"));
        }
        if decades == 0 || per_decade == 0 {
            return input("grid needs at least one decade and one panel per decade");
        }
        let panels = decades * per_decade;
        let log_ratio = T::of(10f64.ln() / per_decade as f64);
        let mut breaks: Vec<T> = (0..=panels)
            .map(|k| t_max * T::of(10f64.powf(-(decades as f64) + k as f64 / per_decade as f64)))
            .collect();
        breaks[panels] = t_max;
        let rule = GaussLegendre::new(PANEL_NODES);
        let mut nodes = Vec::with_capacity(panels * PANEL_NODES);
        let mut weights = Vec::with_capacity(panels * PANEL_NODES);
        for k in 0..panels {
            for (x, w) in rule.mapped(breaks[k], breaks[k + 1]) {
                nodes.push(x);
                weights.push(w);
            }
        }
        Ok(Arc::new(Self { t_max, decades, per_decade, log_ratio, breaks, nodes, weights, rule }))
    }

    /// Same resolution, new horizon.
    pub fn rescaled(&self, t_max: T) -> Result<Arc<Self>> {
        Self::with_resolution(t_max, self.decades, self.per_decade)
    }

    pub fn t_max(&self) -> T {
        self.t_max
    }

    pub fn s_min(&self) -> T {
        self.breaks[0]
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    fn panel_of(&self, s: T) -> usize {
        let p = self.panels();
        if s <= self.breaks[0] {
            return 0;
        }
        if s >= self.t_max {
            return p - 1;
        }
        let guess = ((s / self.breaks[0]).ln() / self.log_ratio).f64().floor();
        let mut k = (guess.max(0.0) as usize).min(p - 1);
        while k > 0 && s < self.breaks[k] {
            k -= 1;
        }
        while k + 1 < p && s > self.breaks[k + 1] {
            k += 1;
        }
        k
    }

    /// Panel index and Lagrange weights of the sample values at `s`.
    fn basis(&self, s: T, out: &mut [T]) -> usize {
        let k = self.panel_of(s);
        let (a, b) = (self.breaks[k], self.breaks[k + 1]);
        let x = (s - a) * T::of(2.0) / (b - a) - T::one();
        self.rule.lagrange(x, out);
        k
    }

    fn interpolate(&self, values: &[T], s: T) -> T {
        let mut l = [T::zero(); PANEL_NODES];
        let k = self.basis(s, &mut l);
        let v = &values[k * PANEL_NODES..(k + 1) * PANEL_NODES];
        l.iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
    }
}

/// Growth envelope beyond the horizon: `f(t_max + u) <= f(t_max) factor e^{rate u}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailEnvelope<T> {
    pub factor: T,
    pub rate: T,
}

/// A nonnegative function sampled on a [`MajorantGrid`].
#[derive(Clone, Debug)]
pub struct ScalarMajorant<T: Real> {
    grid: Arc<MajorantGrid<T>>,
    values: Vec<T>,
    exponent: Option<T>,
    envelope: Option<TailEnvelope<T>>,
}

impl<T: Real> ScalarMajorant<T> {
    /// Samples `f` at the grid nodes. `exponent = Some(alpha)` declares
    /// `f(s) ~ c s^{-alpha}` near zero; `alpha` must be below 1.
    pub fn sample(grid: Arc<MajorantGrid<T>>, f: impl Fn(T) -> T, exponent: Option<T>) -> Result<Self> {
        let values = grid.nodes.iter().map(|&s| f(s)).collect();
        Self::from_values(grid, values, exponent)
    }

    pub fn from_values(grid: Arc<MajorantGrid<T>>, values: Vec<T>, exponent: Option<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return input(format!("expected {} samples, got {}", grid.len(), values.len()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.finite() || **v < T::zero()) {
            return input(format!("majorant sample {i} is {v}; values must be finite and >= 0"));
        }
        if let Some(a) = exponent {
            if !a.finite() || a >= T::one() {
                return input(format!("singular exponent {a} is not integrable at 0"));
            }
        }
        Ok(Self { grid, values, exponent, envelope: None })
    }

    pub fn with_envelope(mut self, factor: T, rate: T) -> Result<Self> {
        if !factor.finite() || factor < T::zero() || !rate.finite() {
            return input("envelope factor must be >= 0 and rate finite");
        }
        self.envelope = Some(TailEnvelope { factor, rate });
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<MajorantGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn exponent(&self) -> Option<T> {
        self.exponent
    }

    pub fn t_max(&self) -> T {
        self.grid.t_max
    }

    fn alpha(&self) -> T {
        self.exponent.unwrap_or_else(T::zero)
    }

    /// Extrapolated value at the inner edge `s_min`.
    fn edge(&self) -> T {
        self.grid.interpolate(&self.values, self.grid.s_min()).max(T::zero())
    }

    pub fn eval(&self, s: T) -> T {
        let g = &self.grid;
        if s < g.s_min() {
            if s <= T::zero() {
                let a = self.alpha();
                return if a > T::zero() {
                    T::max_value().unwrap_or(T::one() / T::eps())
                } else if a < T::zero() {
                    T::zero()
                } else {
                    self.edge()
                };
            }
            return self.edge() * (g.s_min() / s).powf(self.alpha());
        }
        if s > g.t_max {
            let end = self.at_horizon();
            if let Some(e) = self.envelope {
                return end * e.factor * (e.rate * (s - g.t_max)).exp();
            }
            return end;
        }
        g.interpolate(&self.values, s).max(T::zero())
    }

    fn at_horizon(&self) -> T {
        self.grid.interpolate(&self.values, self.grid.t_max).max(T::zero())
    }

    /// `int_0^c f` for `c <= s_min` from the power law.
    fn near_moment(&self, c: T) -> T {
        power_moment(self.edge(), self.alpha(), self.grid.s_min(), c)
    }

    /// `sup_{0 < s <= t} e^{-omega s} f(s)`, or `None` if `f` is singular at 0.
    pub fn weighted_sup(&self, t: T, omega: T) -> Option<T> {
        if self.alpha() > T::zero() {
            return None;
        }
        let mut m = self.edge().max(self.eval(t) * (-omega * t).exp());
        for (&s, &v) in self.grid.nodes.iter().zip(&self.values) {
            if s > t {
                break;
            }
            m = m.max(v * (-omega * s).exp());
        }
        Some(m)
    }

    /// Declared envelope, or one fitted from samples in `[t_max/2, t_max]`.
    pub fn envelope(&self) -> TailEnvelope<T> {
        if let Some(e) = self.envelope {
            return e;
        }
        let half = self.grid.t_max / T::of(2.0);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (&s, &v) in self.grid.nodes.iter().zip(&self.values) {
            if s >= half && v > T::zero() {
                xs.push(s.f64());
                ys.push(v.f64().ln());
            }
        }
        if xs.len() < 2 || self.at_horizon() == T::zero() {
            return TailEnvelope { factor: T::zero(), rate: T::zero() };
        }
        let ls = crate::semigroup::least_squares_slope(&xs, &ys);
        let n = xs.len();
        let last = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        TailEnvelope { factor: T::one(), rate: T::of(ls.max(last)) }
    }
}

fn power_moment<T: Real>(edge: T, alpha: T, s_min: T, c: T) -> T {
    if c <= T::zero() {
        return T::zero();
    }
    let a = T::one() - alpha;
    edge * s_min * (c / s_min).powf(a) / a
}

/// `int_0^c s^{a-1} e^{-omega s} ds`.
fn weighted_power_integral<T: Real>(a: T, omega: T, c: T) -> T {
    let (a, w, c) = (a.f64(), omega.f64(), c.f64());
    let x = w * c;
    if x > 1.0 {
        let g = statrs::function::gamma::gamma_lr(a, x) * statrs::function::gamma::gamma(a);
        return T::of(g * w.powf(-a));
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 0..200 {
        let add = term / (k as f64 + a);
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
        term *= -x / (k as f64 + 1.0);
    }
    T::of(c.powf(a) * sum)
}

/// `int_0^inf e^{-omega s} f(s) ds`.
///
/// The part beyond `t_max` is bounded with the tail envelope and must stay
/// below `1e-10` of the total, else the horizon is reported as too short.
pub fn weighted_integral<T: Real>(f: &ScalarMajorant<T>, omega: T) -> Result<T> {
    Ok(weighted_integral_parts(f, omega)?.0)
}

fn weighted_integral_parts<T: Real>(f: &ScalarMajorant<T>, omega: T) -> Result<(T, T)> {
    if !omega.finite() {
        return input("omega must be finite");
    }
    let env = f.envelope();
    let tail_active = env.factor > T::zero() && f.at_horizon() > T::zero();
    if tail_active && omega <= env.rate {
        return Err(Error::Divergence(format!("omega = {omega} does not exceed the growth rate {}", env.rate)));
    }
    let g = &f.grid;
    let mut body = g
        .nodes
        .iter()
        .zip(&g.weights)
        .zip(&f.values)
        .fold(T::zero(), |acc, ((&s, &w), &v)| acc + w * v * (-omega * s).exp());
    let a = T::one() - f.alpha();
    body += f.edge() * g.s_min().powf(f.alpha()) * weighted_power_integral(a, omega, g.s_min());
    let tail = if tail_active {
        f.at_horizon() * env.factor * (-omega * g.t_max).exp() / (omega - env.rate)
    } else {
        T::zero()
    };
    let total = body + tail;
    if !total.finite() {
        return Err(Error::Divergence(format!("weighted integral overflowed at omega = {omega}")));
    }
    if tail > T::of(1e-10) * total {
        return Err(Error::Resolution(format!(
            "horizon {} too short at omega = {omega}: tail {tail} vs integral {total}",
            g.t_max
        )));
    }
    Ok((total, tail))
}

/// One row of a discretised convolution: `(f * g)(x) = dense . g + near`.
#[derive(Clone, Debug)]
struct ConvRow<T> {
    dense: Vec<T>,
    near: T,
    cutoff: T,
}

impl<T: Real> ConvRow<T> {
    fn apply(&self, grid: &MajorantGrid<T>, g: &[T], edge: T, beta: T) -> T {
        let s = self.dense.iter().zip(g).fold(T::zero(), |acc, (a, b)| acc + *a * *b);
        (s + self.near * power_moment(edge, beta, grid.s_min(), self.cutoff)).max(T::zero())
    }
}

/// Row for `(f * g)(x)` with `g` sampled on `grid`. The integral is split at
/// `x/2`: the first half follows `grid` (where `g` may be singular) and the
/// second half follows `f`'s own grid.
fn conv_row<T: Real>(f: &ScalarMajorant<T>, grid: &MajorantGrid<T>, x: T) -> ConvRow<T> {
    let m = PANEL_NODES;
    let mut dense = vec![T::zero(); grid.len()];
    let half = x / T::of(2.0);
    let mut l = [T::zero(); PANEL_NODES];

    for k in 0..grid.panels() {
        let a = grid.breaks[k];
        if a >= half {
            break;
        }
        let b = grid.breaks[k + 1];
        if b <= half {
            let r = k * m..(k + 1) * m;
            for ((d, &w), &y) in dense[r.clone()].iter_mut().zip(&grid.weights[r.clone()]).zip(&grid.nodes[r]) {
                *d += w * f.eval(x - y);
            }
        } else {
            for (y, w) in grid.rule.mapped(a, half) {
                let kk = grid.basis(y, &mut l);
                let c = w * f.eval(x - y);
                for (i, li) in l.iter().enumerate() {
                    dense[kk * m + i] += c * *li;
                }
            }
        }
    }
    let cutoff = grid.s_min().min(half);
    let near = f.eval(x - cutoff / T::of(2.0));

    let fg = &f.grid;
    let mut add_point = |u: T, w: T, dense: &mut Vec<T>| {
        let kk = grid.basis(x - u, &mut l);
        for (i, li) in l.iter().enumerate() {
            dense[kk * m + i] += w * *li;
        }
    };
    for k in 0..fg.panels() {
        let a = fg.breaks[k];
        if a >= half {
            break;
        }
        let b = fg.breaks[k + 1];
        if b <= half {
            for j in k * m..(k + 1) * m {
                add_point(fg.nodes[j], fg.weights[j] * f.values[j], &mut dense);
            }
        } else {
            for (u, w) in fg.rule.mapped(a, half) {
                add_point(u, w * f.eval(u), &mut dense);
            }
        }
    }
    let c2 = fg.s_min().min(half);
    add_point(c2 / T::of(2.0), f.near_moment(c2), &mut dense);
    ConvRow { dense, near, cutoff }
}

fn check_horizon<T: Real>(t: T, what: &str, t_max: T) -> Result<()> {
    if !t.finite() || t <= T::zero() {
        return input(format!("{what}: t must be positive, got {t}"));
    }
    if t > t_max * (T::one() + T::of(1e-12)) {
        return input(format!("{what}: t = {t} beyond majorant horizon {t_max}"));
    }
    Ok(())
}

/// `int_0^{t_max} f`.
pub fn integral<T: Real>(f: &ScalarMajorant<T>) -> T {
    let g = &f.grid;
    g.weights.iter().zip(&f.values).fold(f.near_moment(g.s_min()), |acc, (&w, &v)| acc + w * v)
}

/// `(f * g)(t) = int_0^t f(t - s) g(s) ds`.
pub fn convolve<T: Real>(f: &ScalarMajorant<T>, g: &ScalarMajorant<T>, t: T) -> Result<T> {
    check_horizon(t, "convolve", f.t_max().min(g.t_max()))?;
    let t = t.min(g.t_max());
    let row = conv_row(f, &g.grid, t);
    Ok(row.apply(&g.grid, &g.values, g.edge(), g.alpha()))
}

/// Convolution with a fixed left factor `f`, discretised on one grid.
struct ConvKernel<T: Real> {
    grid: Arc<MajorantGrid<T>>,
    rows: Vec<ConvRow<T>>,
    alpha: T,
}

impl<T: Real> ConvKernel<T> {
    fn new(f: &ScalarMajorant<T>, grid: Arc<MajorantGrid<T>>) -> Self {
        let rows = grid.nodes.iter().map(|&x| conv_row(f, &grid, x)).collect();
        Self { grid, rows, alpha: f.alpha() }
    }

    /// `f * g` with `g ~ s^{-beta}` near zero; returns values and new exponent.
    fn apply(&self, g: &[T], beta: T) -> (Vec<T>, T) {
        let edge = self.grid.interpolate(g, self.grid.s_min()).max(T::zero());
        let out = self.rows.iter().map(|r| r.apply(&self.grid, g, edge, beta)).collect();
        (out, (beta + self.alpha - T::one()).max(T::of(-20.0)))
    }
}

fn resample<T: Real>(f: &ScalarMajorant<T>, grid: &Arc<MajorantGrid<T>>) -> Vec<T> {
    grid.nodes.iter().map(|&s| f.eval(s)).collect()
}

/// `psi^{[n*]}` on `[0, horizon]`, sampled on a grid of the same resolution.
pub fn convolution_power<T: Real>(psi: &ScalarMajorant<T>, n: usize, horizon: T) -> Result<ScalarMajorant<T>> {
    if n == 0 {
        return input("convolution power needs n >= 1");
    }
    check_horizon(horizon, "convolution_power", psi.t_max())?;
    let grid = psi.grid.rescaled(horizon.min(psi.t_max()))?;
    let mut g = resample(psi, &grid);
    let mut beta = psi.alpha();
    if n > 1 {
        let k = ConvKernel::new(psi, grid.clone());
        for _ in 1..n {
            let (next, b) = k.apply(&g, beta);
            g = next;
            beta = b;
        }
    }
    let exponent = if beta == T::zero() { None } else { Some(beta) };
    ScalarMajorant::from_values(grid, g, exponent)
}

/// Smallest `omega = base + 2^k`, `k = 0..=20`, with weighted integral of
/// `psi` below 1/2. `base` is the tail growth rate of `psi`.
pub fn certify_omega<T: Real>(psi: &ScalarMajorant<T>) -> Result<(T, T)> {
    let base = psi.envelope().rate;
    let mut last = None;
    for k in 0..=20 {
        let omega = base + T::of(2f64.powi(k));
        match weighted_integral(psi, omega) {
            Ok(l) if l < T::of(0.5) => return Ok((omega, l)),
            Ok(l) => last = Some(format!("weighted integral {l} at omega = {omega}")),
            Err(Error::Resolution(m)) | Err(Error::Divergence(m)) => last = Some(m),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Divergence(format!(
        "no omega up to {base} + 2^20 brings the weighted integral below 1/2 ({})",
        last.unwrap_or_default()
    )))
}

/// Partial sums of `theta(t) = sum_{n >= start} (phi * psi^{[n*]})(t)`.
#[derive(Clone, Debug, Serialize)]
pub struct TailSeries<T: Real> {
    /// Upper bound: computed terms from `start` plus the remainder certificate.
    pub value: T,
    /// Index of the last term evaluated.
    pub terms_used: usize,
    pub start: usize,
    /// `terms[n-1] = (phi * psi^{[n*]})(t)`.
    pub terms: Vec<T>,
    /// Certified bound on the terms past `terms_used`.
    pub remainder: T,
    pub omega: T,
    /// `int_0^inf e^{-omega s} psi(s) ds`.
    pub weighted_psi: T,
}

impl<T: Real> TailSeries<T> {
    /// Bound on `sum_{n >= from}`; `from` must be at least `start`.
    pub fn from_index(&self, from: usize) -> T {
        let from = from.max(1);
        self.terms.iter().skip(from - 1).fold(T::zero(), |a, b| a + *b) + self.remainder
    }
}

const MAX_TERMS: usize = 5000;

/// `sum_{n >= start} (phi * psi1^{[n*]})(t)` truncated once the running term
/// and the geometric remainder certificate both drop below `tol`.
pub fn iterated_convolution_tail<T: Real>(
    psi1: &ScalarMajorant<T>,
    phi: &ScalarMajorant<T>,
    start: usize,
    t: T,
    tol: T,
) -> Result<TailSeries<T>> {
    if start == 0 {
        return input("tail start index must be >= 1");
    }
    if !tol.finite() || tol <= T::zero() {
        return input("tolerance must be positive");
    }
    check_horizon(t, "iterated_convolution_tail", psi1.t_max().min(phi.t_max()))?;
    let (omega, l) = certify_omega(psi1)?;
    let grid = psi1.grid.rescaled(t)?;
    let t = grid.t_max;
    let kernel = ConvKernel::new(psi1, grid.clone());
    let phi_row = conv_row(phi, &grid, t);
    let mut g = resample(psi1, &grid);
    let mut beta = psi1.alpha();
    let growth = (omega * t).exp();
    let one = T::one();

    // Remainder past term n: e^{wt} M L^{n+1}/(1-L) for bounded phi; for
    // singular phi use M' = sup e^{-ws}(phi*psi)(s) and L^n instead.
    let remainder: Box<dyn Fn(usize) -> T> = match phi.weighted_sup(t, omega) {
        Some(m) => Box::new(move |n| growth * m * l.powi(n as i32 + 1) / (one - l)),
        None => {
            let (pp, _) = kernel.apply(&resample(phi, &grid), phi.alpha());
            let mp = grid
                .nodes
                .iter()
                .zip(&pp)
                .fold(T::zero(), |a, (&s, &v)| a.max(v * (-omega * s).exp()));
            let mp = mp.max(phi_row_value(psi1, phi, &grid, t) * (-omega * t).exp());
            Box::new(move |n| growth * mp * l.powi(n as i32) / (one - l))
        }
    };

    let mut terms = Vec::new();
    let mut sum = T::zero();
    let g_edge = |g: &[T]| grid.interpolate(g, grid.s_min()).max(T::zero());
    for n in 1..=MAX_TERMS {
        let term = phi_row.apply(&grid, &g, g_edge(&g), beta);
        terms.push(term);
        if n >= start {
            sum += term;
            let r = remainder(n);
            if term < tol && r < tol {
                return Ok(TailSeries { value: sum + r, terms_used: n, start, terms, remainder: r, omega, weighted_psi: l });
            }
        }
        let (next, b) = kernel.apply(&g, beta);
        g = next;
        beta = b;
    }
    Err(Error::Divergence(format!("tail series not converged after {MAX_TERMS} terms")))
}

fn phi_row_value<T: Real>(psi: &ScalarMajorant<T>, phi: &ScalarMajorant<T>, grid: &Arc<MajorantGrid<T>>, t: T) -> T {
    let g = resample(phi, grid);
    let edge = grid.interpolate(&g, grid.s_min()).max(T::zero());
    conv_row(psi, grid, t).apply(grid, &g, edge, phi.alpha())
}
