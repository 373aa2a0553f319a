//! Scalar abstraction shared by every numeric kernel in the crate.
//!
//! Contour vectors, distances, centroids, design matrices and linear model
//! weights are generic over [`Scalar`]; graph statistics (clustering
//! coefficients, modularity) are counts-based and always computed in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable for contour and model arithmetic: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Never fails for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean; zero for an empty slice.
pub fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / T::from_usize_lossy(xs.len())
}

/// Mean and population standard deviation.
pub fn mean_std<T: Scalar>(xs: &[T]) -> (T, T) {
    let m = mean(xs);
    if xs.is_empty() {
        return (m, T::zero());
    }
    let var = xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_usize_lossy(xs.len());
    (m, var.sqrt())
}

/// Squared Euclidean distance between equal-length vectors.
#[inline]
pub fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_matches_hand_values() {
        let (m, s) = mean_std(&[2.0_f64, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert_eq!(s, 2.0);
        let (m32, s32) = mean_std(&[2.0_f32, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!((m32, s32), (5.0, 2.0));
    }

    #[test]
    fn distance_of_unit_offset() {
        let a = vec![0.0_f64; 30];
        let b = vec![1.0_f64; 30];
        assert!((squared_distance(&a, &b).sqrt() - 30f64.sqrt()).abs() < 1e-12);
    }
}
