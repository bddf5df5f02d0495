use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the whole crate is generic over (`f32` or `f64`).
///
/// Besides the field operations from nalgebra this carries a couple of
/// precision-dependent tolerances so that verdicts mean the same thing for
/// both widths.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Default
    + std::fmt::Display
    + serde::Serialize
    + Send
    + Sync
    + 'static
{
    /// Relative slack allowed when an inequality is checked numerically.
    fn verdict_slack() -> Self;
    /// Singular values below `sv_cutoff() * sigma_max` are treated as zero.
    fn sv_cutoff() -> Self;
    /// Machine epsilon.
    fn eps() -> Self;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("finite real converts to f64")
    }

    #[inline]
    fn finite(self) -> bool {
        self.f64().is_finite()
    }
}

macro_rules! impl_real {
    ($t:ty, $slack:expr, $cut:expr) => {
        impl Real for $t {
            #[inline]
            fn verdict_slack() -> Self {
                $slack
            }
            #[inline]
            fn sv_cutoff() -> Self {
                $cut
            }
            #[inline]
            fn eps() -> Self {
                <$t>::EPSILON
            }
        }
    };
}

impl_real!(f64, 1e-10, 1e-14);
impl_real!(f32, 1e-4, 1e-6);
