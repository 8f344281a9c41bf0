//! Scalar traits the numeric layers are generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Floating-point scalar for phase sums and discrepancies: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + Sum + Send + Sync + Debug + Display + 'static {
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field scalar for parameter calculus: floats or exact rationals.
pub trait FieldScalar: Num + Clone + PartialOrd + FromPrimitive + Debug {
    fn to_f64_lossy(&self) -> f64;
}

impl FieldScalar for f32 {
    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl FieldScalar for f64 {
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl FieldScalar for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
