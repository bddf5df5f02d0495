//! Schatten-class perturbation theory for matrix semigroups `T(t) = e^{-At}`.
//!
//! The crate works with finite-dimensional (dense, complex) truncations of
//! semigroup generators. It provides Schatten norms, the Dyson-Phillips
//! expansion of a perturbed semigroup with certified tail bounds, scalar
//! majorant calculus on `[0, t_max]`, resolvent decay scans and a small
//! Schrodinger-operator toolkit (Dirichlet Laplacians, potentials, heat
//! kernels and eigenvalue asymptotics).
//!
//! Everything is generic over the real scalar type via [`Real`]; concrete
//! aliases for `f64` and `f32` are exported below.

pub mod asymptotics;
pub mod dyson;
pub mod error;
pub mod majorants;
pub mod operator;
pub mod quadrature;
pub mod random;
pub mod resolvent;
pub mod schatten;
pub mod schrodinger;
pub mod semigroup;
mod scalar;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use operator::DenseOperator;
pub use scalar::Real;
pub use schatten::SchattenIndex;
pub use semigroup::Generator;

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

pub type Complex64 = Complex<f64>;
pub type Complex32 = Complex<f32>;
pub type DenseOperator64 = DenseOperator<f64>;
pub type DenseOperator32 = DenseOperator<f32>;
pub type Generator64 = Generator<f64>;
pub type Generator32 = Generator<f32>;
pub type SchattenIndex64 = SchattenIndex<f64>;
pub type SchattenIndex32 = SchattenIndex<f32>;
pub type ScalarMajorant64 = majorants::ScalarMajorant<f64>;
pub type ScalarMajorant32 = majorants::ScalarMajorant<f32>;
pub type DysonLedger64 = dyson::DysonLedger<f64>;
pub type DysonLedger32 = dyson::DysonLedger<f32>;
pub type GridDomain64 = schrodinger::GridDomain<f64>;
pub type GridDomain32 = schrodinger::GridDomain<f32>;
pub type Potential64 = schrodinger::Potential<f64>;
pub type Potential32 = schrodinger::Potential<f32>;
pub type SpectralReport64 = asymptotics::SpectralReport<f64>;
pub type SpectralReport32 = asymptotics::SpectralReport<f32>;
