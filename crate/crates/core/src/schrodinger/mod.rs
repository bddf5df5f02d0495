//! Finite-difference Dirichlet Laplacians on boxes, potentials and
//! heat-kernel based membership checks.

mod expr;
mod heat;
pub(crate) use heat::refinement_slack;
mod potential;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

pub use expr::{parse_expression, Expr};
pub use heat::{
    bq_membership_probe, bq_refinement, gaussian_reference_integral, heat_kernel_bound_check, heat_kernel_refinement,
    BqProbe, BqRefinement, HeatKernelCheck, HeatKernelModel, HeatKernelRefinement,
};
pub use potential::{birman_solomjak_norm, gaussian_bs_bound, load_potential_csv, Potential};

use crate::error::{input, Result};
use crate::{DenseOperator, Generator, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainKind<T> {
    /// `(0, length)`.
    Interval { length: T },
    /// `(0, L1) x (0, L2)`.
    Rectangle { lengths: [T; 2] },
    /// `[-R, R]^d` standing in for `R^d`.
    TruncatedBox { half_width: T, dim: usize },
}

/// A uniform grid of `n` interior nodes per axis with Dirichlet walls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridDomain<T> {
    pub kind: DomainKind<T>,
    pub n: usize,
}

impl<T: Real> GridDomain<T> {
    pub fn new(kind: DomainKind<T>, n: usize) -> Result<Self> {
        if n < 8 {
            return input(format!("need at least 8 interior points per axis, got {n}"));
        }
        let ok = match kind {
            DomainKind::Interval { length } => length.finite() && length > T::zero(),
            DomainKind::Rectangle { lengths } => lengths.iter().all(|l| l.finite() && *l > T::zero()),
            DomainKind::TruncatedBox { half_width, dim } => {
                if dim != 1 && dim != 2 {
                    return input(format!("dimension must be 1 or 2, got {dim}"));
                }
                half_width.finite() && half_width > T::zero()
            }
        };
        if !ok {
            return input("domain lengths must be positive and finite");
        }
        Ok(Self { kind, n })
    }

    pub fn interval(length: T, n: usize) -> Result<Self> {
        Self::new(DomainKind::Interval { length }, n)
    }

    pub fn rectangle(l1: T, l2: T, n: usize) -> Result<Self> {
        Self::new(DomainKind::Rectangle { lengths: [l1, l2] }, n)
    }

    pub fn truncated_box(half_width: T, dim: usize, n: usize) -> Result<Self> {
        Self::new(DomainKind::TruncatedBox { half_width, dim }, n)
    }

    /// Same domain with `n` interior points per axis.
    pub fn with_points(&self, n: usize) -> Result<Self> {
        Self::new(self.kind, n)
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval { .. } => 1,
            DomainKind::Rectangle { .. } => 2,
            DomainKind::TruncatedBox { dim, .. } => dim,
        }
    }

    pub fn length(&self, axis: usize) -> T {
        match self.kind {
            DomainKind::Interval { length } => length,
            DomainKind::Rectangle { lengths } => lengths[axis],
            DomainKind::TruncatedBox { half_width, .. } => half_width * T::of(2.0),
        }
    }

    pub fn lower(&self, _axis: usize) -> T {
        match self.kind {
            DomainKind::TruncatedBox { half_width, .. } => -half_width,
            _ => T::zero(),
        }
    }

    pub fn h(&self, axis: usize) -> T {
        self.length(axis) / T::of_usize(self.n + 1)
    }

    /// Smallest spacing.
    pub fn h_min(&self) -> T {
        (0..self.dim()).map(|a| self.h(a)).fold(T::max_value().unwrap_or(T::one() / T::eps()), |a, b| a.min(b))
    }

    /// `h^d`, the volume of one grid cell.
    pub fn cell_volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |acc, a| acc * self.h(a))
    }

    /// `|Omega|`.
    pub fn volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |acc, a| acc * self.length(a))
    }

    pub fn num_nodes(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    /// Coordinates of node `idx` (axis 0 runs fastest); unused axes are 0.
    pub fn coords(&self, idx: usize) -> [T; 2] {
        let mut c = [T::zero(); 2];
        let mut rest = idx;
        for (a, ca) in c.iter_mut().enumerate().take(self.dim()) {
            let i = rest % self.n;
            rest /= self.n;
            *ca = self.lower(a) + self.h(a) * T::of_usize(i + 1);
        }
        c
    }

    pub fn distance_sq(&self, i: usize, j: usize) -> T {
        let (a, b) = (self.coords(i), self.coords(j));
        (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])
    }
}

/// `-Delta` with Dirichlet walls: 3-point (1D) or 5-point (2D) stencil.
pub fn dirichlet_laplacian_matrix<T: Real>(dom: &GridDomain<T>) -> DenseOperator<T> {
    let n = dom.n;
    let size = dom.num_nodes();
    let mut m = DMatrix::<Complex<T>>::zeros(size, size);
    let c = |x: T| Complex::new(x, T::zero());
    for a in 0..dom.dim() {
        let w = T::one() / (dom.h(a) * dom.h(a));
        let stride = n.pow(a as u32);
        for idx in 0..size {
            m[(idx, idx)] += c(w * T::of(2.0));
            let i = (idx / stride) % n;
            if i > 0 {
                m[(idx, idx - stride)] -= c(w);
            }
            if i + 1 < n {
                m[(idx, idx + stride)] -= c(w);
            }
        }
    }
    DenseOperator::wrap(m)
}

pub fn build_dirichlet_laplacian<T: Real>(dom: &GridDomain<T>) -> Result<Generator<T>> {
    Generator::new(dirichlet_laplacian_matrix(dom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_spectrum_matches_stencil_formula() {
        let dom = GridDomain::<f64>::interval(std::f64::consts::PI, 32).unwrap();
        let g = build_dirichlet_laplacian(&dom).unwrap();
        assert!(g.is_hermitian());
        let mut ev: Vec<f64> = g.spectrum().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = dom.h(0);
        for (k, e) in ev.iter().enumerate() {
            let want = 4.0 / (h * h) * ((k + 1) as f64 * h / 2.0).sin().powi(2);
            assert!((e - want).abs() < 1e-10 * want, "k={k}");
        }
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(GridDomain::<f64>::interval(1.0, 7).is_err());
        assert!(GridDomain::<f64>::truncated_box(1.0, 3, 16).is_err());
    }

    #[test]
    fn coordinates_are_interior() {
        let d = GridDomain::<f64>::truncated_box(2.0, 2, 9).unwrap();
        assert_eq!(d.num_nodes(), 81);
        let c0 = d.coords(0);
        assert!((c0[0] + 1.6).abs() < 1e-15 && (c0[1] + 1.6).abs() < 1e-15);
        let c = d.coords(80);
        assert!((c[0] - 1.6).abs() < 1e-15 && (c[1] - 1.6).abs() < 1e-15);
    }
}
