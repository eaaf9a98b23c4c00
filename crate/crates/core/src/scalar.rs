use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// Floating-point scalar used by the simulators, estimators and predictors.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Sum + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal; panics only for types that cannot hold it.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Scalar for exact probability bookkeeping: `f64`, or `BigRational` when exact
/// answers are needed.
pub trait Probability: Clone + Num + Signed + PartialOrd + ToPrimitive + Debug {}

impl<P> Probability for P where P: Clone + Num + Signed + PartialOrd + ToPrimitive + Debug {}
