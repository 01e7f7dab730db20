//! Scalar abstraction so the whole crate works with `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable for coordinates, weights, and costs.
///
/// Blanket-implemented for anything satisfying the bounds, which in practice
/// means `f32` and `f64`. All numeric literals inside the crate go through
/// [`Real::from_f64_lossy`] so code stays monomorphic over the scalar.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only for values a float type
    /// cannot represent at all (never the case for finite constants).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant must convert")
    }

    /// Lossy widening to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }

    /// `true` when `self` and `other` agree within `tol` absolutely or
    /// relatively, whichever is looser.
    fn close_to(self, other: Self, tol: Self) -> bool {
        let diff = (self - other).abs();
        let scale = Self::one().max(self.abs()).max(other.abs());
        diff <= tol * scale
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
