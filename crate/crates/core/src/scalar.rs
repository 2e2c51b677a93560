use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the geometric and quadrature layers are generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal or table entry.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
