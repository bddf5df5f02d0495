//! Generators `A` and the semigroup `T(t, A) = e^{-At}`.

mod expm;

use nalgebra::{ComplexField, DMatrix, Schur, SymmetricEigen};
use num_complex::Complex;
use serde::Serialize;

pub use expm::expm;

use crate::error::{input, Error, Result};
use crate::{DenseOperator, Real};

/// Eigenvector condition number above which the Pade path is used.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e6;

#[derive(Clone, Debug)]
struct EigenCache<T: Real> {
    vectors: DMatrix<Complex<T>>,
    inverse: DMatrix<Complex<T>>,
    values: Vec<Complex<T>>,
}

/// A generator `A` with cached spectral data.
#[derive(Clone, Debug)]
pub struct Generator<T: Real> {
    a: DenseOperator<T>,
    spectrum: Vec<Complex<T>>,
    eig: Option<EigenCache<T>>,
    condition: Option<T>,
    hermitian: bool,
    log_norm: T,
    norm: T,
}

impl<T: Real> Generator<T> {
    pub fn new(a: DenseOperator<T>) -> Result<Self> {
        let hermitian = a.is_hermitian(T::eps() * T::of(16.0));
        let norm = a.frobenius_norm();
        let (spectrum, eig, condition) = if hermitian {
            let se = SymmetricEigen::new(a.matrix().clone());
            let values: Vec<Complex<T>> = se.eigenvalues.iter().map(|&x| Complex::new(x, T::zero())).collect();
            let vectors = se.eigenvectors;
            let inverse = vectors.adjoint();
            (values.clone(), Some(EigenCache { vectors, inverse, values }), Some(T::one()))
        } else {
            let (values, vectors) = schur_eigen(a.matrix())?;
            let sv = vectors.clone().svd(false, false).singular_values;
            let smax = sv.max();
            let smin = sv.min();
            let cond = if smin > T::zero() { smax / smin } else { T::max_value().unwrap_or(T::one() / T::eps()) };
            let mut cache = None;
            if cond.f64() < EIGEN_CONDITION_LIMIT {
                if let Some(inverse) = vectors.clone().lu().try_inverse() {
                    let c = EigenCache { vectors, inverse, values: values.clone() };
                    if reconstruction_error(&c, a.matrix()) <= T::verdict_slack() * norm.max(T::eps()) {
                        cache = Some(c);
                    }
                }
            }
            (values, cache, Some(cond))
        };
        let log_norm = hermitian_part_max(&a);
        Ok(Self { a, spectrum, eig, condition, hermitian, log_norm, norm })
    }

    pub fn operator(&self) -> &DenseOperator<T> {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Eigenvalues of `A` in solver order.
    pub fn spectrum(&self) -> &[Complex<T>] {
        &self.spectrum
    }

    pub fn diagonalizable(&self) -> bool {
        self.eig.is_some()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Condition number of the eigenvector matrix.
    pub fn eigen_condition(&self) -> Option<T> {
        self.condition
    }

    /// Frobenius norm of `A`.
    pub fn norm(&self) -> T {
        self.norm
    }

    /// `mu = max eig(-(A + A^*)/2)`, so that `||e^{-At}||_inf <= e^{mu t}`.
    pub fn log_norm(&self) -> T {
        self.log_norm
    }

    /// `min Re spec(A)`.
    pub fn spectral_abscissa(&self) -> T {
        self.spectrum.iter().map(|z| z.re).fold(T::max_value().unwrap_or(T::one() / T::eps()), |a, b| a.min(b))
    }

    /// `e^{-At}`.
    pub fn evolve(&self, t: T) -> Result<DenseOperator<T>> {
        if !t.finite() || t < T::zero() {
            return input(format!("evolution time must be finite and >= 0, got {t}"));
        }
        if t == T::zero() {
            return Ok(DenseOperator::identity(self.dim()));
        }
        let m = match &self.eig {
            Some(c) => {
                let mut w = c.vectors.clone();
                for (j, lam) in c.values.iter().enumerate() {
                    let f = ComplexField::exp(-*lam * Complex::new(t, T::zero()));
                    for z in w.column_mut(j).iter_mut() {
                        *z *= f;
                    }
                }
                w * &c.inverse
            }
            None => expm(&(self.a.matrix() * Complex::new(-t, T::zero())))?,
        };
        DenseOperator::new(m).map_err(|_| Error::Numerical(format!("e^(-At) not finite at t = {t}")))
    }

    /// `(zI - A)^{-1}`.
    pub fn resolvent(&self, z: Complex<T>) -> Result<DenseOperator<T>> {
        let dist = self.distance_to_spectrum(z);
        if dist <= T::of(1e-12) * self.norm.max(T::one()) {
            return Err(Error::Spectrum(format!("z = {z} lies on the spectrum (distance {dist})")));
        }
        let n = self.dim();
        let m = DMatrix::<Complex<T>>::identity(n, n) * z - self.a.matrix();
        let inv = m.lu().try_inverse().ok_or_else(|| Error::Spectrum(format!("zI - A singular at z = {z}")))?;
        DenseOperator::new(inv).map_err(|_| Error::Spectrum(format!("resolvent not finite at z = {z}")))
    }

    pub fn distance_to_spectrum(&self, z: Complex<T>) -> T {
        self.spectrum
            .iter()
            .map(|l| (z - *l).modulus())
            .fold(T::max_value().unwrap_or(T::one() / T::eps()), |a, b| a.min(b))
    }

    /// Spectral growth bound `-min Re spec(A)` with an empirical cross-check.
    pub fn growth_bound(&self) -> Result<GrowthBound<T>> {
        let c = self.spectral_abscissa();
        let value = -c;
        // Fit log||e^{-A't}|| for the shifted A' = A - cI to avoid underflow.
        let n = self.dim();
        let shifted = Generator::new(DenseOperator::wrap(
            self.a.matrix() - DMatrix::<Complex<T>>::identity(n, n) * Complex::new(c, T::zero()),
        ))?;
        let t0 = (300.0 / (1.0 + value.f64().abs())).min(20.0);
        let k = 9;
        let mut xs = Vec::with_capacity(k);
        let mut ys = Vec::with_capacity(k);
        for i in 0..k {
            let t = t0 * (1.0 + i as f64 / (k - 1) as f64);
            let e = shifted.evolve(T::of(t))?;
            let nrm = e.singular_values()[0].f64();
            if nrm > 0.0 && nrm.is_finite() {
                xs.push(t);
                ys.push(nrm.ln() - c.f64() * t);
            }
        }
        let fitted = if xs.len() >= 2 { least_squares_slope(&xs, &ys) } else { f64::NAN };
        let tol = 0.05 * (1.0 + value.f64().abs());
        let warning = if fitted.is_finite() && (fitted - value.f64()).abs() <= tol {
            None
        } else {
            Some(format!("empirical growth {fitted:.6} differs from spectral bound {value} by more than {tol:.3}"))
        };
        Ok(GrowthBound { value, fitted: T::of(if fitted.is_finite() { fitted } else { 0.0 }), window: [T::of(t0), T::of(2.0 * t0)], warning })
    }
}

/// Result of [`Generator::growth_bound`].
#[derive(Clone, Debug, Serialize)]
pub struct GrowthBound<T: Real> {
    /// `-min Re spec(A)`.
    pub value: T,
    /// Least-squares slope of `log||T(t)||` over `window`.
    pub fitted: T,
    pub window: [T; 2],
    pub warning: Option<String>,
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn reconstruction_error<T: Real>(c: &EigenCache<T>, a: &DMatrix<Complex<T>>) -> T {
    let mut w = c.vectors.clone();
    for (j, lam) in c.values.iter().enumerate() {
        for z in w.column_mut(j).iter_mut() {
            *z *= *lam;
        }
    }
    (w * &c.inverse - a).iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

fn hermitian_part_max<T: Real>(a: &DenseOperator<T>) -> T {
    let m = a.matrix();
    let h = (m + m.adjoint()) * Complex::new(T::of(-0.5), T::zero());
    let ev = SymmetricEigen::new(h).eigenvalues;
    ev.max()
}

/// Eigenvalues of a general complex matrix via complex Schur form.
pub fn eigenvalues<T: Real>(m: &DMatrix<Complex<T>>) -> Result<Vec<Complex<T>>> {
    let schur = Schur::try_new(m.clone(), T::eps(), 100 * m.nrows().max(10))
        .ok_or_else(|| Error::Numerical(format!("Schur iteration did not converge ({}x{})", m.nrows(), m.ncols())))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

type EigenPairs<T> = (Vec<Complex<T>>, DMatrix<Complex<T>>);

/// Eigenvalues and unit eigenvectors from the Schur form `A = Q R Q^*`.
fn schur_eigen<T: Real>(m: &DMatrix<Complex<T>>) -> Result<EigenPairs<T>> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), T::eps(), 100 * n.max(10))
        .ok_or_else(|| Error::Numerical(format!("Schur iteration did not converge ({n}x{n})")))?;
    let (q, r) = schur.unpack();
    let values: Vec<Complex<T>> = (0..n).map(|i| r[(i, i)]).collect();
    let rnorm = r.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    let small = (T::eps() * rnorm).max(T::min_value().unwrap_or(T::eps()).abs().min(T::eps()));
    let mut x = DMatrix::<Complex<T>>::zeros(n, n);
    for k in 0..n {
        x[(k, k)] = Complex::new(T::one(), T::zero());
        for j in (0..k).rev() {
            let mut s = Complex::new(T::zero(), T::zero());
            for l in (j + 1)..=k {
                s += r[(j, l)] * x[(l, k)];
            }
            let mut d = r[(j, j)] - r[(k, k)];
            if d.modulus() < small {
                d = Complex::new(small, T::zero());
            }
            x[(j, k)] = -s / d;
        }
        let nrm = x.column(k).iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        for z in x.column_mut(k).iter_mut() {
            *z /= Complex::new(nrm, T::zero());
        }
    }
    Ok((values, q * x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(rows: &[f64]) -> Generator<f64> {
        let n = (rows.len() as f64).sqrt() as usize;
        Generator::new(DenseOperator::from_real(n, rows).unwrap()).unwrap()
    }

    #[test]
    fn zero_generator_is_identity() {
        let g = gen(&[0.0; 4]);
        assert_eq!(g.evolve(5.0).unwrap(), DenseOperator::identity(2));
    }

    #[test]
    fn evolve_at_zero_is_exact_identity() {
        let g = gen(&[1.0, 5.0, 0.0, 2.0]);
        assert_eq!(g.evolve(0.0).unwrap(), DenseOperator::identity(2));
    }

    #[test]
    fn diagonal_generator() {
        let g = gen(&[1.0, 0.0, 0.0, 2.0]);
        let e = g.evolve(1.0).unwrap();
        assert!((e.entry(0, 0).re - (-1f64).exp()).abs() < 1e-15);
        assert!((e.entry(1, 1).re - (-2f64).exp()).abs() < 1e-15);
        assert!(e.entry(0, 1).norm() < 1e-15);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let g = gen(&[0.0, 1.0, 0.0, 0.0]);
        assert!(!g.diagonalizable());
        let e = g.evolve(2.5).unwrap();
        assert!((e.entry(0, 0).re - 1.0).abs() < 1e-14);
        assert!((e.entry(0, 1).re + 2.5).abs() < 1e-14);
        assert!(e.entry(1, 0).norm() < 1e-14);
    }

    #[test]
    fn scalar_resolvent() {
        let g = gen(&[1.0]);
        let r = g.resolvent(Complex::new(0.0, 0.0)).unwrap();
        assert!((r.entry(0, 0).re + 1.0).abs() < 1e-15);
        assert!(matches!(g.resolvent(Complex::new(1.0, 0.0)), Err(Error::Spectrum(_))));
    }

    #[test]
    fn jordan_block_growth() {
        let g = gen(&[1.0, 5.0, 0.0, 1.0]);
        let gb = g.growth_bound().unwrap();
        assert_eq!(gb.value, -1.0);
        assert!(gb.warning.is_none(), "{:?}", gb.warning);
    }

    #[test]
    fn negative_time_rejected() {
        assert!(gen(&[1.0]).evolve(-1.0).is_err());
    }

    #[test]
    fn log_norm_bounds_evolution() {
        let g = gen(&[1.0, 4.0, 0.0, 2.0]);
        for t in [0.1, 0.5, 1.0, 3.0] {
            let n = g.evolve(t).unwrap().singular_values()[0];
            assert!(n <= (g.log_norm() * t).exp() * (1.0 + 1e-12));
        }
    }
}
