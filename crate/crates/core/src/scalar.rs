//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the engine can compute in.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// (1e-10, 1e-12, ...) assume `f64`; `f32` works but only to its own precision.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Neumaier-compensated sum.
pub fn compensated_sum<T, I>(values: I) -> T
where
    T: Scalar,
    I: IntoIterator<Item = T>,
{
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry = carry + ((sum - t) + v);
        } else {
            carry = carry + ((v - t) + sum);
        }
        sum = t;
    }
    sum + carry
}

/// Compensated dot product of two equal-length slices.
pub fn compensated_dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    compensated_sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// Variances at or below this level are rounding noise for data whose
/// entries are of magnitude `scale`.
pub fn variance_noise_floor<T: Scalar>(scale: T) -> T {
    let e = lit::<T>(64.0) * T::epsilon() * scale.max(T::one());
    e * e
}

/// Largest absolute entry.
pub fn max_abs<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

/// Relative difference `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_diff<T: Scalar>(a: T, b: T, floor: T) -> T {
    let scale = a.abs().max(b.abs()).max(floor);
    (a - b).abs() / scale
}
