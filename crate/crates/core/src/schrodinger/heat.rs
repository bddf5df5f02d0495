use serde::Serialize;

use super::{build_dirichlet_laplacian, GridDomain, Potential};
use crate::error::{input, Error, Result};
use crate::majorants::{self, MajorantGrid, ScalarMajorant};
use crate::schatten::{schatten_norm, SchattenIndex};
use crate::semigroup::least_squares_slope;
use crate::{Generator, Real};

/// Gaussian heat-kernel model `K_t(x, y) <= k(t) e^{-b |x-y|^2 / t}` with a
/// power-law prefactor `k(t) = scale * t^{-kappa}`.
#[derive(Clone, Debug, Serialize)]
pub struct HeatKernelModel<T: Real> {
    pub b: T,
    pub d: usize,
    pub scale: T,
    pub kappa: T,
    /// `int_0^1 k(s) s^{d/4} ds`, evaluated by quadrature.
    pub integrability: T,
}

impl<T: Real> HeatKernelModel<T> {
    pub fn new(b: T, d: usize, scale: T, kappa: T) -> Result<Self> {
        if !(b.finite() && b > T::zero() && scale.finite() && scale > T::zero() && kappa.finite()) {
            return input("heat kernel model needs b > 0 and a positive prefactor");
        }
        if d != 1 && d != 2 {
            return input(format!("heat kernel model dimension must be 1 or 2, got {d}"));
        }
        let alpha = kappa - T::of_usize(d) / T::of(4.0);
        if alpha >= T::one() {
            return input(format!("k(s) s^(d/4) ~ s^(-{alpha}) is not integrable at 0"));
        }
        let grid = MajorantGrid::graded(T::one())?;
        let f = ScalarMajorant::sample(grid, |s| scale * s.powf(-alpha), (alpha != T::zero()).then_some(alpha))?;
        let integrability = majorants::integral(&f);
        if !integrability.finite() {
            return Err(Error::Divergence("prefactor integral is not finite".into()));
        }
        Ok(Self { b, d, scale, kappa, integrability })
    }

    /// Dirichlet (and free) Laplacian: `k(t) = (4 pi t)^{-d/2}`, `b = 1/4`.
    pub fn dirichlet(d: usize) -> Result<Self> {
        let scale = (T::of(4.0) * T::pi()).powf(-T::of_usize(d) / T::of(2.0));
        Self::new(T::of(0.25), d, scale, T::of_usize(d) / T::of(2.0))
    }

    pub fn prefactor(&self, t: T) -> T {
        self.scale * t.powf(-self.kappa)
    }

    pub fn bound(&self, t: T, dist_sq: T) -> T {
        self.prefactor(t) * (-self.b * dist_sq / t).exp()
    }
}

fn check_times<T: Real>(dom: &GridDomain<T>, ts: &[T]) -> Result<()> {
    if ts.is_empty() {
        return input("no sample times given");
    }
    let h2 = dom.h_min() * dom.h_min();
    for &t in ts {
        if !t.finite() || t <= T::zero() {
            return input(format!("sample time {t} must be positive"));
        }
        if t < h2 {
            return Err(Error::Resolution(format!("t = {t} is below h^2 = {h2}; kernel unresolved on this grid")));
        }
    }
    Ok(())
}

fn check_generator<T: Real>(g: &Generator<T>, dom: &GridDomain<T>) -> Result<()> {
    if g.dim() != dom.num_nodes() {
        return input(format!("generator is {0}x{0}, grid has {1} nodes", g.dim(), dom.num_nodes()));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatKernelCheck<T: Real> {
    pub ts: Vec<T>,
    /// `max_{ij} (K_t(x_i, x_j) - bound)` per sample time.
    pub violations: Vec<T>,
    pub max_violation: T,
    /// Smallest kernel entry over all times.
    pub min_entry: T,
}

/// Compares `K = (e^{-At})_{ij} / h^d` against the model's Gaussian bound.
pub fn heat_kernel_bound_check<T: Real>(
    g: &Generator<T>,
    dom: &GridDomain<T>,
    model: &HeatKernelModel<T>,
    ts: &[T],
) -> Result<HeatKernelCheck<T>> {
    check_generator(g, dom)?;
    check_times(dom, ts)?;
    if model.d != dom.dim() {
        return input("heat kernel model and grid differ in dimension");
    }
    let n = dom.num_nodes();
    let w = T::one() / dom.cell_volume();
    let dist: Vec<T> = (0..n * n).map(|k| dom.distance_sq(k / n, k % n)).collect();
    let mut violations = Vec::with_capacity(ts.len());
    let mut min_entry = T::max_value().unwrap_or(T::one() / T::eps());
    for &t in ts {
        let e = g.evolve(t)?;
        let m = e.matrix();
        let mut v = -T::max_value().unwrap_or(T::one() / T::eps());
        for i in 0..n {
            for j in 0..n {
                let k = m[(i, j)].re * w;
                min_entry = min_entry.min(k);
                v = v.max(k - model.bound(t, dist[i * n + j]));
            }
        }
        violations.push(v);
    }
    let max_violation = violations.iter().copied().fold(-T::max_value().unwrap_or(T::one()), |a, b| a.max(b));
    Ok(HeatKernelCheck { ts: ts.to_vec(), violations, max_violation, min_entry })
}

/// Richardson slack `2 |v_c - v_f| h_f^2 / (h_c^2 - h_f^2)` for a quantity
/// converging like `h^2`.
pub(crate) fn refinement_slack<T: Real>(coarse: T, fine: T, hc: T, hf: T) -> T {
    T::of(2.0) * (coarse - fine).abs() * hf * hf / (hc * hc - hf * hf)
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatKernelRefinement<T: Real> {
    pub coarse: HeatKernelCheck<T>,
    pub fine: HeatKernelCheck<T>,
    /// Discretisation slack per sample time.
    pub eps_disc: Vec<T>,
    /// `fine.violations[k] <= eps_disc[k]`.
    pub verdicts: Vec<bool>,
    pub holds: bool,
}

/// Runs the kernel check on two grids of the same domain and accepts
/// violations up to the refinement-estimated `O(h^2)` slack.
pub fn heat_kernel_refinement<T: Real>(
    coarse_dom: &GridDomain<T>,
    fine_dom: &GridDomain<T>,
    model: &HeatKernelModel<T>,
    ts: &[T],
) -> Result<HeatKernelRefinement<T>> {
    let (hc, hf) = (coarse_dom.h_min(), fine_dom.h_min());
    if hc <= hf {
        return input("coarse grid must have a larger spacing than the fine grid");
    }
    let coarse = heat_kernel_bound_check(&build_dirichlet_laplacian(coarse_dom)?, coarse_dom, model, ts)?;
    let fine = heat_kernel_bound_check(&build_dirichlet_laplacian(fine_dom)?, fine_dom, model, ts)?;
    let eps_disc: Vec<T> = coarse
        .violations
        .iter()
        .zip(&fine.violations)
        .map(|(&c, &f)| refinement_slack(c, f, hc, hf))
        .collect();
    let verdicts: Vec<bool> = fine.violations.iter().zip(&eps_disc).map(|(&v, &e)| v <= e).collect();
    let holds = verdicts.iter().all(|&b| b);
    Ok(HeatKernelRefinement { coarse, fine, eps_disc, verdicts, holds })
}

/// `h^d sum_nodes e^{-2b|z|^2/t}`, to be compared with `(t pi / 2b)^{d/2}`.
pub fn gaussian_reference_integral<T: Real>(dom: &GridDomain<T>, b: T, t: T) -> T {
    let s = (0..dom.num_nodes()).fold(T::zero(), |acc, i| {
        let c = dom.coords(i);
        acc + (-T::of(2.0) * b * (c[0] * c[0] + c[1] * c[1]) / t).exp()
    });
    s * dom.cell_volume()
}

#[derive(Clone, Debug, Serialize)]
pub struct BqProbe<T: Real> {
    pub q: SchattenIndex<T>,
    pub ts: Vec<T>,
    /// `||diag(V) e^{-At}||_q`.
    pub norms: Vec<T>,
    /// Slope of `log norm` against `log t` over the smallest decade of `ts`.
    pub fitted_exponent: T,
    pub integrable: bool,
    /// `(8 pi t)^{-d/4} ||V||_{L^2}` (only for `q = 2`).
    pub certificate: Option<Vec<T>>,
    /// `norms / certificate`.
    pub certificate_ratios: Option<Vec<T>>,
}

/// Schatten norms of `V e^{-At}` at the sample times.
///
/// The matrix needs no extra volume weight: the rescaling between `l^2` on
/// the grid and the `h^d`-weighted inner product is a multiple of a unitary.
pub fn bq_membership_probe<T: Real>(
    g: &Generator<T>,
    dom: &GridDomain<T>,
    v: &Potential<T>,
    q: SchattenIndex<T>,
    ts: &[T],
) -> Result<BqProbe<T>> {
    check_generator(g, dom)?;
    check_times(dom, ts)?;
    if v.domain() != dom {
        return input("potential was sampled on a different grid");
    }
    let mut ts = ts.to_vec();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let norms = ts
        .iter()
        .map(|&t| schatten_norm(&g.evolve(t)?.left_diagonal(v.samples()), q))
        .collect::<Result<Vec<T>>>()?;
    let t0 = ts[0];
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&t, &n) in ts.iter().zip(&norms) {
        if t <= t0 * T::of(10.0 + 1e-9) && n > T::zero() {
            xs.push(t.f64().ln());
            ys.push(n.f64().ln());
        }
    }
    let fitted_exponent = if xs.len() >= 2 { T::of(least_squares_slope(&xs, &ys)) } else { T::zero() };
    let integrable = fitted_exponent > -T::one();
    let (certificate, certificate_ratios) = if q == SchattenIndex::Finite(T::of(2.0)) {
        let d4 = T::of_usize(dom.dim()) / T::of(4.0);
        let c: Vec<T> = ts
            .iter()
            .map(|&t| (T::of(8.0) * T::pi() * t).powf(-d4) * v.l2_norm())
            .collect();
        let r = norms
            .iter()
            .zip(&c)
            .map(|(&n, &b)| if b > T::zero() { n / b } else { T::zero() })
            .collect();
        (Some(c), Some(r))
    } else {
        (None, None)
    };
    Ok(BqProbe { q, ts, norms, fitted_exponent, integrable, certificate, certificate_ratios })
}

#[derive(Clone, Debug, Serialize)]
pub struct BqRefinement<T: Real> {
    pub coarse: BqProbe<T>,
    pub fine: BqProbe<T>,
    /// Relative slack on the certificate per sample time.
    pub eps_disc: Vec<T>,
    pub certified: Vec<bool>,
    pub holds: bool,
}

/// Hilbert-Schmidt probe on two grids; the fine-grid ratio to the
/// `(8 pi t)^{-d/4} ||V||` certificate may exceed 1 by the refinement slack.
pub fn bq_refinement<T: Real>(
    coarse: (&Generator<T>, &Potential<T>),
    fine: (&Generator<T>, &Potential<T>),
    ts: &[T],
) -> Result<BqRefinement<T>> {
    let q = SchattenIndex::Finite(T::of(2.0));
    let (dc, df) = (coarse.1.domain(), fine.1.domain());
    let (hc, hf) = (dc.h_min(), df.h_min());
    if hc <= hf {
        return input("coarse grid must have a larger spacing than the fine grid");
    }
    let c = bq_membership_probe(coarse.0, dc, coarse.1, q, ts)?;
    let f = bq_membership_probe(fine.0, df, fine.1, q, ts)?;
    let rc = c.certificate_ratios.clone().unwrap_or_default();
    let rf = f.certificate_ratios.clone().unwrap_or_default();
    let eps_disc: Vec<T> = rc.iter().zip(&rf).map(|(&a, &b)| refinement_slack(a, b, hc, hf)).collect();
    let certified: Vec<bool> = rf
        .iter()
        .zip(&eps_disc)
        .map(|(&r, &e)| r <= (T::one() + e) * (T::one() + T::verdict_slack()))
        .collect();
    let holds = certified.iter().all(|&b| b);
    Ok(BqRefinement { coarse: c, fine: f, eps_disc, certified, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_model_is_integrable() {
        let m = HeatKernelModel::<f64>::dirichlet(1).unwrap();
        // int_0^1 (4 pi s)^{-1/2} s^{1/4} ds = (4 pi)^{-1/2} / (3/4)
        let want = (4.0 * std::f64::consts::PI).powf(-0.5) / 0.75;
        assert!((m.integrability - want).abs() < 1e-9);
    }

    #[test]
    fn non_integrable_prefactor_rejected() {
        assert!(HeatKernelModel::<f64>::new(0.25, 1, 1.0, 1.5).is_err());
    }

    #[test]
    fn small_times_are_unresolved() {
        let dom = GridDomain::<f64>::interval(std::f64::consts::PI, 16).unwrap();
        let g = build_dirichlet_laplacian(&dom).unwrap();
        let m = HeatKernelModel::dirichlet(1).unwrap();
        assert!(matches!(heat_kernel_bound_check(&g, &dom, &m, &[1e-4]), Err(Error::Resolution(_))));
    }
}
