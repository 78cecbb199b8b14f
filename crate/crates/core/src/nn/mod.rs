//! Small neural-network kernel: a single-layer LSTM with an affine output
//! head, a causal 1-D convolution layer, and the Adam optimizer.
//!
//! Everything is generic over [`Scalar`] so the same code runs at single
//! precision for training/inference and at double precision for gradient
//! checking.

mod adam;
mod conv;
mod fastmath;
pub mod gradcheck;
mod lstm;

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::Float;

pub use adam::{Adam, AdamConfig};
pub use conv::{Activation, CausalConv, CausalConvGrads};
pub use lstm::{DenseParams, LstmModel, LstmParams, LstmState, LstmTape};

/// Floating-point element type used by every layer.
pub trait Scalar:
    Float + AddAssign + SubAssign + MulAssign + Sum + Default + Debug + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;

    fn sigmoid_in_place(xs: &mut [Self]) {
        for x in xs.iter_mut() {
            *x = sigmoid(*x);
        }
    }

    fn tanh_in_place(xs: &mut [Self]) {
        for x in xs.iter_mut() {
            *x = x.tanh();
        }
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }

    fn sigmoid_in_place(xs: &mut [Self]) {
        fastmath::sigmoid_slice(xs);
    }

    fn tanh_in_place(xs: &mut [Self]) {
        fastmath::tanh_slice(xs);
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Anything holding trainable parameters as a fixed list of flat slices.
///
/// The slice order is stable and shared by gradients of the same type, so an
/// optimizer can walk parameters and gradients in lockstep.
pub trait Parameterized<T: Scalar> {
    fn param_slices(&self) -> Vec<&[T]>;
    fn param_slices_mut(&mut self) -> Vec<&mut [T]>;

    fn param_count(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    fn flatten(&self) -> Vec<T> {
        self.param_slices()
            .into_iter()
            .flat_map(|s| s.iter().copied())
            .collect()
    }

    fn fill_zero(&mut self) {
        for s in self.param_slices_mut() {
            s.fill(T::zero());
        }
    }

    fn all_finite(&self) -> bool {
        self.param_slices()
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
    }

    /// `self += other`, component-wise.
    fn accumulate(&mut self, other: &Self) {
        for (dst, src) in self.param_slices_mut().into_iter().zip(other.param_slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += *s;
            }
        }
    }

    fn scale(&mut self, factor: T) {
        for s in self.param_slices_mut() {
            for v in s.iter_mut() {
                *v *= factor;
            }
        }
    }
}

#[inline]
pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// `acc[j] += a * x[j]`
#[inline]
pub(crate) fn axpy<T: Scalar>(acc: &mut [T], a: T, x: &[T]) {
    for (y, &v) in acc.iter_mut().zip(x) {
        *y += a * v;
    }
}

/// Dot product with eight independent partial sums so the loop vectorizes.
#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [T::zero(); 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for l in 0..8 {
            lanes[l] += xa[l] * xb[l];
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    let s0 = (lanes[0] + lanes[4]) + (lanes[1] + lanes[5]);
    let s1 = (lanes[2] + lanes[6]) + (lanes[3] + lanes[7]);
    (s0 + s1) + tail
}
