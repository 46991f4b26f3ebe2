//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the solver, functionals and oracles are written over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Significant digits needed for a lossless decimal round trip.
    const ROUND_TRIP_DIGITS: usize;

    /// Converts an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Formats with [`Real::ROUND_TRIP_DIGITS`] significant digits.
    fn to_exact_string(self) -> String {
        format!("{:.*e}", Self::ROUND_TRIP_DIGITS - 1, self)
    }
}

impl Real for f32 {
    const ROUND_TRIP_DIGITS: usize = 9;
}

impl Real for f64 {
    const ROUND_TRIP_DIGITS: usize = 17;
}

/// Complex numbers over a [`Real`] scalar.
pub type Cplx<T> = num_complex::Complex<T>;
