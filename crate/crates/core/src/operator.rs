use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use crate::error::{input, Result};
use crate::Real;

/// Square complex matrix standing in for a bounded operator on `C^n`.
///
/// Construction through [`DenseOperator::new`] rejects empty, non-square or
/// non-finite input; arithmetic between operators of different size panics
/// like nalgebra does.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator<T: Real> {
    m: DMatrix<Complex<T>>,
}

impl<T: Real> DenseOperator<T> {
    pub fn new(m: DMatrix<Complex<T>>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return input(format!("operator must be square and nonempty, got {}x{}", m.nrows(), m.ncols()));
        }
        if !m.iter().all(|z| z.re.finite() && z.im.finite()) {
            return input("operator has non-finite entries");
        }
        Ok(Self { m })
    }

    /// Wraps a matrix produced internally; shape is checked in debug builds.
    pub(crate) fn wrap(m: DMatrix<Complex<T>>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows() > 0);
        Self { m }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    /// Row-major real entries.
    pub fn from_real(n: usize, rows: &[T]) -> Result<Self> {
        if rows.len() != n * n {
            return input(format!("expected {} entries, got {}", n * n, rows.len()));
        }
        Self::from_fn(n, |i, j| Complex::new(rows[i * n + j], T::zero()))
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::wrap(DMatrix::zeros(n, n))
    }

    pub fn diagonal(d: &[Complex<T>]) -> Result<Self> {
        let n = d.len();
        Self::from_fn(n, |i, j| if i == j { d[i] } else { Complex::new(T::zero(), T::zero()) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.m[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.m.adjoint())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::wrap(&self.m * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    /// `diag(d) * self`.
    pub fn left_diagonal(&self, d: &[Complex<T>]) -> Self {
        assert_eq!(d.len(), self.dim());
        let mut m = self.m.clone();
        for (i, mut row) in m.row_iter_mut().enumerate() {
            row *= d[i];
        }
        Self::wrap(m)
    }

    pub fn trace(&self) -> Complex<T> {
        self.m.trace()
    }

    /// Frobenius (Hilbert-Schmidt) norm computed from the entries.
    pub fn frobenius_norm(&self) -> T {
        self.m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Induced 1-norm (max column sum), used for scaling decisions.
    pub fn one_norm(&self) -> T {
        self.m
            .column_iter()
            .map(|c| c.iter().fold(T::zero(), |a, z| a + z.modulus()))
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<T> {
        let sv = self.m.clone().svd(false, false).singular_values;
        let mut v: Vec<T> = sv.iter().copied().collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        v
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.finite() && z.im.finite())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        let scale = self.frobenius_norm().max(T::one());
        let n = self.dim();
        (0..n).all(|i| (i..n).all(|j| (self.m[(i, j)] - self.m[(j, i)].conj()).modulus() <= tol * scale))
    }

    /// Converts to another precision (through `f64`).
    pub fn cast<U: Real>(&self) -> DenseOperator<U> {
        DenseOperator::wrap(self.m.map(|z| Complex::new(U::of(z.re.f64()), U::of(z.im.f64()))))
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl<T: Real> $tr<&DenseOperator<T>> for &DenseOperator<T> {
            type Output = DenseOperator<T>;
            fn $f(self, rhs: &DenseOperator<T>) -> DenseOperator<T> {
                DenseOperator::wrap(&self.m $op &rhs.m)
            }
        }
        impl<T: Real> $tr<DenseOperator<T>> for DenseOperator<T> {
            type Output = DenseOperator<T>;
            fn $f(self, rhs: DenseOperator<T>) -> DenseOperator<T> {
                DenseOperator::wrap(self.m $op rhs.m)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl<T: Real> Neg for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn neg(self) -> DenseOperator<T> {
        DenseOperator::wrap(-&self.m)
    }
}

impl<T: Real> Neg for DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn neg(self) -> DenseOperator<T> {
        DenseOperator::wrap(-self.m)
    }
}
