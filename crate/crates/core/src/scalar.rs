//! Scalar abstraction shared by the numeric kernels.
//!
//! The sample-statistic and distance-covariance kernels are written once over
//! [`Real`] and instantiated for `f32` and `f64`. Decompositions and the
//! estimation layers built on them work in `f64`.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point type usable by the generic kernels.
pub trait Real: Float + FromPrimitive + NumAssign + Sum + Debug + Send + Sync + 'static {
    /// Converts an `f64` constant, panicking only for values the type cannot
    /// represent at all (never the case for `f32`/`f64`).
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }
}

impl<T: Real> CompensatedSum<T> {
    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    let mut acc = CompensatedSum::default();
    for x in it {
        acc.add(x);
    }
    acc.value()
}
