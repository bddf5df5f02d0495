//! Schatten `q`-norms and the Hoelder product inequality.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{input, Error, Result};
use crate::{DenseOperator, Real};

/// A Schatten index `q` in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchattenIndex<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> SchattenIndex<T> {
    /// `q >= 1`; `f64::INFINITY` maps to [`SchattenIndex::Infinity`].
    pub fn new(q: f64) -> Result<Self> {
        if q.is_nan() || q < 1.0 {
            return input(format!("Schatten index must be >= 1, got {q}"));
        }
        if q.is_infinite() {
            Ok(Self::Infinity)
        } else {
            Ok(Self::Finite(T::of(q)))
        }
    }

    pub fn trace() -> Self {
        Self::Finite(T::one())
    }

    pub fn hilbert_schmidt() -> Self {
        Self::Finite(T::of(2.0))
    }

    /// `1/q`, zero at infinity.
    pub fn reciprocal(self) -> T {
        match self {
            Self::Finite(q) => T::one() / q,
            Self::Infinity => T::zero(),
        }
    }

    /// Index whose reciprocal is `1/q`; `1/q` must lie in `[0, 1]`.
    pub fn from_reciprocal(r: T) -> Result<Self> {
        if !r.finite() || r < T::zero() || r > T::one() + T::verdict_slack() {
            return input(format!("reciprocal index {r} outside [0, 1]"));
        }
        if r == T::zero() {
            Ok(Self::Infinity)
        } else {
            Ok(Self::Finite((T::one() / r).max(T::one())))
        }
    }

    pub fn value(self) -> Option<T> {
        match self {
            Self::Finite(q) => Some(q),
            Self::Infinity => None,
        }
    }

    pub fn finite(self) -> Result<T> {
        self.value().ok_or_else(|| Error::Input("finite Schatten index required".into()))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Self::Finite(q) => q.f64(),
            Self::Infinity => f64::INFINITY,
        }
    }
}

impl<T: Real> fmt::Display for SchattenIndex<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(q) => write!(f, "{q}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl<T: Real> Serialize for SchattenIndex<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(q) => s.serialize_f64(q.f64()),
            Self::Infinity => s.serialize_str("inf"),
        }
    }
}

/// `(sum sigma_k^q)^{1/q}` over singular values, or `sigma_max` for `q = inf`.
///
/// Singular values below `T::sv_cutoff() * sigma_max` are dropped so that
/// rounding noise does not inflate small-`q` norms.
pub fn schatten_norm<T: Real>(op: &DenseOperator<T>, q: SchattenIndex<T>) -> Result<T> {
    if !op.is_finite() {
        return input("Schatten norm of a non-finite operator");
    }
    Ok(norm_from_singular_values(&op.singular_values(), q))
}

pub(crate) fn norm_from_singular_values<T: Real>(sv: &[T], q: SchattenIndex<T>) -> T {
    let smax = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    if smax == T::zero() {
        return T::zero();
    }
    match q {
        SchattenIndex::Infinity => smax,
        SchattenIndex::Finite(q) => {
            let cut = T::sv_cutoff() * smax;
            // Normalise by sigma_max to stay clear of overflow for large q.
            let s = sv
                .iter()
                .filter(|&&x| x >= cut)
                .fold(T::zero(), |acc, &x| acc + (x / smax).powf(q));
            smax * s.powf(T::one() / q)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderCheck<T: Real> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Checks `||S T||_p <= ||S||_q ||T||_r` with `1/p = 1/q + 1/r`.
pub fn holder_product_check<T: Real>(
    s: &DenseOperator<T>,
    t: &DenseOperator<T>,
    q: SchattenIndex<T>,
    r: SchattenIndex<T>,
) -> Result<HolderCheck<T>> {
    if s.dim() != t.dim() {
        return input("Hoelder check needs operators of equal size");
    }
    let inv = q.reciprocal() + r.reciprocal();
    if inv > T::one() + T::verdict_slack() {
        return input(format!("1/q + 1/r = {inv} exceeds 1"));
    }
    let p = SchattenIndex::from_reciprocal(inv.min(T::one()))?;
    let lhs = schatten_norm(&(s * t), p)?;
    let rhs = schatten_norm(s, q)? * schatten_norm(t, r)?;
    let holds = lhs <= rhs * (T::one() + T::verdict_slack());
    Ok(HolderCheck { lhs, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn idx(q: f64) -> SchattenIndex<f64> {
        SchattenIndex::new(q).unwrap()
    }

    #[test]
    fn diagonal_norms() {
        let d = DenseOperator::<f64>::diagonal(&[Complex::new(3.0, 0.0), Complex::new(0.0, -4.0)]).unwrap();
        assert!((schatten_norm(&d, idx(1.0)).unwrap() - 7.0).abs() < 1e-12);
        assert!((schatten_norm(&d, idx(2.0)).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(schatten_norm(&d, SchattenIndex::Infinity).unwrap(), 4.0);
    }

    #[test]
    fn zero_operator_has_zero_norm() {
        let z = DenseOperator::<f64>::zeros(3);
        for q in [1.0, 2.5, f64::INFINITY] {
            assert_eq!(schatten_norm(&z, idx(q)).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_small_index() {
        assert!(SchattenIndex::<f64>::new(0.5).is_err());
        assert!(SchattenIndex::<f64>::new(f64::NAN).is_err());
    }

    #[test]
    fn holder_rejects_overfull_exponents() {
        let a = DenseOperator::<f64>::identity(2);
        assert!(holder_product_check(&a, &a, idx(1.0), idx(1.5)).is_err());
    }

    #[test]
    fn single_precision_norm() {
        let d = DenseOperator::<f32>::diagonal(&[Complex::new(3.0, 0.0), Complex::new(4.0, 0.0)]).unwrap();
        assert!((schatten_norm(&d, SchattenIndex::Finite(2.0)).unwrap() - 5.0).abs() < 1e-5);
    }
}
