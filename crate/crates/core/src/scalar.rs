use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the statistics are computed in.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant. Every finite `f64` is representable (possibly rounded).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant not representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }

    /// Relative cutoff below which a pivot or eigenvalue counts as zero.
    ///
    /// `1e-12` in double precision; in single precision the rounding floor
    /// (`64·ε`) dominates.
    #[inline]
    fn singular_tol() -> Self {
        Self::of(1e-12).max(Self::of(64.0) * Self::epsilon())
    }

    /// Relative tolerance for symmetry checks.
    #[inline]
    fn symmetry_tol() -> Self {
        Self::of(1e-10).max(Self::of(64.0) * Self::epsilon())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
