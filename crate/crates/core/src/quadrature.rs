//! Gauss-Legendre rules and Lagrange interpolation on their nodes.

use crate::Real;

/// Nodes per panel used throughout the crate.
pub const PANEL_NODES: usize = 8;

/// An `m`-point Gauss-Legendre rule on `[-1, 1]` with barycentric weights
/// for interpolation through its nodes.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T: Real> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    bary: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![0.0f64; m];
        let mut weights = vec![0.0f64; m];
        for i in 0..m {
            // Chebyshev-like initial guess, then Newton on P_m.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            nodes[m - 1 - i] = x;
            weights[m - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        let bary: Vec<f64> = (0..m)
            .map(|j| {
                let p: f64 = (0..m).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product();
                1.0 / p
            })
            .collect();
        Self {
            nodes: nodes.into_iter().map(T::of).collect(),
            weights: weights.into_iter().map(T::of).collect(),
            bary: bary.into_iter().map(T::of).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::of(2.0);
        let mid = (a + b) / T::of(2.0);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, w * half))
    }

    /// Lagrange basis values at reference coordinate `x` (any real `x`).
    pub fn lagrange(&self, x: T, out: &mut [T]) {
        let m = self.len();
        debug_assert_eq!(out.len(), m);
        for j in 0..m {
            if x == self.nodes[j] {
                out.iter_mut().for_each(|o| *o = T::zero());
                out[j] = T::one();
                return;
            }
        }
        // Second barycentric form is exact on constants; fine inside or
        // slightly outside the panel.
        let mut den = T::zero();
        for ((o, &b), &xj) in out.iter_mut().zip(&self.bary).zip(&self.nodes) {
            *o = b / (x - xj);
            den += *o;
        }
        for o in out.iter_mut() {
            *o /= den;
        }
    }
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let gl = GaussLegendre::<f64>::new(8);
        for k in 0..16 {
            let s: f64 = gl.mapped(0.0, 2.0).map(|(x, w)| w * x.powi(k)).sum();
            let want = 2f64.powi(k + 1) / (k + 1) as f64;
            assert!((s - want).abs() < 1e-12 * want, "k={k}");
        }
    }

    #[test]
    fn interpolation_reproduces_degree_seven() {
        let gl = GaussLegendre::<f64>::new(8);
        let f = |x: f64| 1.0 - 2.0 * x + x.powi(7);
        let vals: Vec<f64> = gl.nodes.iter().map(|&x| f(x)).collect();
        let mut l = vec![0.0; 8];
        for x in [-1.0, -0.3, 0.77, 1.0, 1.2] {
            gl.lagrange(x, &mut l);
            let y: f64 = l.iter().zip(&vals).map(|(a, b)| a * b).sum();
            assert!((y - f(x)).abs() < 1e-11, "x={x}");
        }
    }
}
