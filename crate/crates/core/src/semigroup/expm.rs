//! Scaling-and-squaring matrix exponential with a degree-13 diagonal Pade
//! approximant (Higham 2005).

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Real;

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn one_norm<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.column_iter()
        .map(|c| c.iter().fold(T::zero(), |a, z| a + z.modulus()))
        .fold(T::zero(), |a, b| a.max(b))
}

/// `exp(m)`.
pub fn expm<T: Real>(m: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    let n = m.nrows();
    let norm = one_norm(m);
    if !norm.finite() {
        return Err(Error::Numerical("matrix exponential of non-finite matrix".into()));
    }
    let ratio = norm.f64() / THETA13;
    let s: i32 = if ratio > 1.0 { ratio.log2().ceil() as i32 } else { 0 };
    let a = m * Complex::new(T::of(2f64.powi(-s)), T::zero());
    let c = |k: usize| Complex::new(T::of(B13[k]), T::zero());
    let id = DMatrix::<Complex<T>>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * c(13) + &a4 * c(11) + &a2 * c(9)) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1);
    let u = &a * inner_u;
    let v = &a6 * (&a6 * c(12) + &a4 * c(10) + &a2 * c(8)) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::Numerical("singular Pade denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.iter().all(|z| z.re.finite() && z.im.finite()) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    Ok(r)
}
