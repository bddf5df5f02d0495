//! Resolvent decay along vertical lines and spectral enclosures.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::schatten::{schatten_norm, SchattenIndex};
use crate::semigroup::least_squares_slope;
use crate::{DenseOperator, Generator, Real};

pub const POINTS_PER_DECADE: usize = 16;

/// Points closer than this to the spectrum are skipped.
pub const GRAZING_DISTANCE: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct VerticalScan<T: Real> {
    pub x: T,
    pub ys: Vec<T>,
    /// Max of the norms at `x + iy` and `x - iy`.
    pub norms: Vec<T>,
    /// Slope of `log norm` against `log y` over the top decade; `None`
    /// when fewer than two positive norms are available there.
    pub fitted_decay: Option<T>,
    /// Heights dropped because `x +- iy` grazes the spectrum.
    pub skipped: Vec<T>,
    /// Second resolvent identity residuals (difference scans only).
    pub identity_residuals: Vec<T>,
}

impl<T: Real> VerticalScan<T> {
    pub fn max_identity_residual(&self) -> T {
        self.identity_residuals.iter().copied().fold(T::zero(), |a, b| a.max(b))
    }

    /// Norms non-increasing over the top decade.
    pub fn decreasing_in_top_decade(&self) -> bool {
        let lo = self.ys.last().copied().unwrap_or_else(T::zero) / T::of(10.0);
        let top: Vec<T> = self.ys.iter().zip(&self.norms).filter(|(y, _)| **y >= lo).map(|(_, n)| *n).collect();
        top.windows(2).all(|w| w[1] <= w[0])
    }
}

fn log_grid<T: Real>(y_max: T, n: usize) -> Vec<T> {
    (0..n)
        .map(|k| y_max * T::of(10f64.powf(-((n - 1 - k) as f64) / POINTS_PER_DECADE as f64)))
        .collect()
}

fn fit_top_decade<T: Real>(ys: &[T], norms: &[T]) -> Option<T> {
    let lo = *ys.last()? / T::of(10.0);
    let (mut xs, mut ls) = (Vec::new(), Vec::new());
    for (y, n) in ys.iter().zip(norms) {
        if *y >= lo * T::of(1.0 - 1e-12) && *n > T::zero() {
            xs.push(y.f64().ln());
            ls.push(n.f64().ln());
        }
    }
    (xs.len() >= 2).then(|| T::of(least_squares_slope(&xs, &ls)))
}

fn grazes<T: Real>(g: &Generator<T>, z: Complex<T>) -> bool {
    g.distance_to_spectrum(z) < T::of(GRAZING_DISTANCE)
}

fn check_scan<T: Real>(x: T, y_max: T, n_points: usize) -> Result<()> {
    if n_points < 8 {
        return input(format!("a vertical scan needs at least 8 points, got {n_points}"));
    }
    if !x.finite() || !y_max.finite() || y_max <= T::zero() {
        return input("scan line needs finite x and positive y_max");
    }
    Ok(())
}

/// `||B R(x + iy, A)||_q` on a log-spaced grid of heights ending at `y_max`.
pub fn vertical_decay_scan<T: Real>(
    g: &Generator<T>,
    b: &DenseOperator<T>,
    q: SchattenIndex<T>,
    x: T,
    y_max: T,
    n_points: usize,
) -> Result<VerticalScan<T>> {
    check_scan(x, y_max, n_points)?;
    if g.dim() != b.dim() {
        return input("generator and perturbation differ in size");
    }
    let (mut ys, mut norms, mut skipped) = (Vec::new(), Vec::new(), Vec::new());
    for y in log_grid(y_max, n_points) {
        let zs = [Complex::new(x, y), Complex::new(x, -y)];
        if zs.iter().any(|&z| grazes(g, z)) {
            skipped.push(y);
            continue;
        }
        let mut n = T::zero();
        for z in zs {
            n = n.max(schatten_norm(&(b * &g.resolvent(z)?), q)?);
        }
        ys.push(y);
        norms.push(n);
    }
    let fitted_decay = fit_top_decade(&ys, &norms);
    Ok(VerticalScan { x, ys, norms, fitted_decay, skipped, identity_residuals: Vec::new() })
}

/// `||R(z, A_2) - R(z, A_1)||_q` over three decades of heights, recording the
/// residual of `R_2 - R_1 = R_2 (A_2 - A_1) R_1` at every point.
pub fn resolvent_difference_scan<T: Real>(
    g1: &Generator<T>,
    g2: &Generator<T>,
    q: SchattenIndex<T>,
    x: T,
    y_max: T,
) -> Result<VerticalScan<T>> {
    resolvent_difference_scan_with(g1, g2, q, x, y_max, 3 * POINTS_PER_DECADE)
}

pub fn resolvent_difference_scan_with<T: Real>(
    g1: &Generator<T>,
    g2: &Generator<T>,
    q: SchattenIndex<T>,
    x: T,
    y_max: T,
    n_points: usize,
) -> Result<VerticalScan<T>> {
    check_scan(x, y_max, n_points)?;
    if g1.dim() != g2.dim() {
        return input("generators differ in size");
    }
    let diff = g2.operator() - g1.operator();
    let (mut ys, mut norms, mut skipped, mut res) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for y in log_grid(y_max, n_points) {
        let zs = [Complex::new(x, y), Complex::new(x, -y)];
        if zs.iter().any(|&z| grazes(g1, z) || grazes(g2, z)) {
            skipped.push(y);
            continue;
        }
        let (mut n, mut r) = (T::zero(), T::zero());
        for z in zs {
            let r1 = g1.resolvent(z)?;
            let r2 = g2.resolvent(z)?;
            let d = &r2 - &r1;
            r = r.max(schatten_norm(&(&d - &(&(&r2 * &diff) * &r1)), q)?);
            n = n.max(schatten_norm(&d, q)?);
        }
        ys.push(y);
        norms.push(n);
        res.push(r);
    }
    let fitted_decay = fit_top_decade(&ys, &norms);
    Ok(VerticalScan { x, ys, norms, fitted_decay, skipped, identity_residuals: res })
}

/// `|Im lambda| <= F(|Re lambda|)` with `F(|w|) = max{l(w), l(-w)} + margin`
/// and `l(w) = max |Im lambda|` over eigenvalues with `|Re lambda - w| <= margin`.
#[derive(Clone, Debug, Serialize)]
pub struct EnclosureEnvelope<T: Real> {
    pub margin: T,
    pub xs: Vec<T>,
    #[serde(rename = "F")]
    pub f: Vec<T>,
    #[serde(skip)]
    eigenvalues: Vec<Complex<T>>,
}

impl<T: Real> EnclosureEnvelope<T> {
    fn local(&self, w: T) -> T {
        self.eigenvalues
            .iter()
            .filter(|l| (l.re - w).abs() <= self.margin)
            .map(|l| l.im.abs())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// `F(|x|)`.
    pub fn bound_at(&self, x: T) -> T {
        let w = x.abs();
        self.local(w).max(self.local(-w)) + self.margin
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        z.im.abs() <= self.bound_at(z.re)
    }
}

pub fn spectral_enclosure<T: Real>(g: &Generator<T>, margin: T) -> Result<EnclosureEnvelope<T>> {
    enclosure_from(g.spectrum().to_vec(), margin)
}

/// Envelope covering the spectra of both generators.
pub fn spectral_enclosure_pair<T: Real>(g1: &Generator<T>, g2: &Generator<T>, margin: T) -> Result<EnclosureEnvelope<T>> {
    let mut ev = g1.spectrum().to_vec();
    ev.extend_from_slice(g2.spectrum());
    enclosure_from(ev, margin)
}

fn enclosure_from<T: Real>(eigenvalues: Vec<Complex<T>>, margin: T) -> Result<EnclosureEnvelope<T>> {
    if !margin.finite() || margin <= T::zero() {
        return Err(Error::Input(format!("enclosure margin must be positive, got {margin}")));
    }
    let top = eigenvalues.iter().map(|l| l.re.abs()).fold(T::zero(), |a, b| a.max(b)) + margin;
    let mut xs: Vec<T> = (0..=64).map(|k| top * T::of(k as f64 / 64.0)).collect();
    xs.extend(eigenvalues.iter().map(|l| l.re.abs()));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    xs.dedup();
    let mut env = EnclosureEnvelope { margin, xs, f: Vec::new(), eigenvalues };
    env.f = env.xs.iter().map(|&x| env.bound_at(x)).collect();
    Ok(env)
}
