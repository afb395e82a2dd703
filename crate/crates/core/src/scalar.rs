//! Scalar abstraction for the numeric core.
//!
//! Everything in this crate is written against [`Scalar`], a real field with
//! the num-traits conversions needed to move literals and file payloads in
//! and out. `f32` and `f64` are the supported instantiations; the concrete
//! aliases at the crate root fix `f64`, which is what the default tolerances
//! are calibrated for.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

pub trait Scalar: RealField + FromPrimitive + ToPrimitive + Copy + Default {}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Convert an `f64` literal into `T`, panicking only on non-representable
/// input (never happens for the finite constants used internally).
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite literal must convert")
}
