//! Scalar abstraction shared by the transform and thresholding code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    /// Widening conversion used for special functions evaluated in `f64`.
    fn f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
