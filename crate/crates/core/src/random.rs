//! Seeded random test operators.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{DenseOperator, Real};

fn gauss<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = StandardNormal.sample(rng);
    T::of(x)
}

/// Complex Gaussian matrix with entries of variance `scale^2 / n`.
pub fn gaussian<T: Real, R: Rng + ?Sized>(n: usize, scale: T, rng: &mut R) -> DenseOperator<T> {
    let s = scale / T::of_usize(n).sqrt() / T::of(2f64.sqrt());
    DenseOperator::wrap(nalgebra::DMatrix::from_fn(n, n, |_, _| {
        Complex::new(gauss::<T, R>(rng) * s, gauss::<T, R>(rng) * s)
    }))
}

/// Real Gaussian matrix with entries of variance `scale^2 / n`.
pub fn gaussian_real<T: Real, R: Rng + ?Sized>(n: usize, scale: T, rng: &mut R) -> DenseOperator<T> {
    let s = scale / T::of_usize(n).sqrt();
    DenseOperator::wrap(nalgebra::DMatrix::from_fn(n, n, |_, _| Complex::new(gauss::<T, R>(rng) * s, T::zero())))
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseOperator<T> {
    let g = gaussian(n, T::one(), rng);
    let qr = g.into_matrix().qr();
    DenseOperator::wrap(qr.q())
}

/// `A = U diag(lambda) U^*` with `Re lambda` in `[lo, hi]`, optionally with
/// small imaginary parts, then a non-normal upper-triangular nudge of size
/// `skew`.
pub fn accretive<T: Real, R: Rng + ?Sized>(n: usize, lo: T, hi: T, skew: T, rng: &mut R) -> DenseOperator<T> {
    let u = unitary::<T, R>(n, rng);
    let mut d = nalgebra::DMatrix::<Complex<T>>::zeros(n, n);
    for i in 0..n {
        let r: f64 = rng.random();
        let im: f64 = rng.random::<f64>() - 0.5;
        d[(i, i)] = Complex::new(lo + (hi - lo) * T::of(r), T::of(im));
        for j in (i + 1)..n {
            d[(i, j)] = Complex::new(gauss::<T, R>(rng) * skew, gauss::<T, R>(rng) * skew);
        }
    }
    let um = u.matrix();
    DenseOperator::wrap(um * d * um.adjoint())
}
