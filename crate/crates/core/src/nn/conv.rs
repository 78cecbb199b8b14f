use rand::Rng;

use super::{Parameterized, Scalar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

/// Causal 1-D convolution `y_t = f(sum_i W_i x_{t-i} + b)` with zero
/// left-padding.
///
/// Kernels are indexed `[out][in][tap]`, tap 0 multiplying the current frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalConv<T> {
    out_channels: usize,
    in_channels: usize,
    taps: usize,
    pub kernels: Vec<T>,
    pub bias: Vec<T>,
    pub activation: Activation,
}

/// Gradients of a scalar loss with respect to a convolution's parameters and
/// its input sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalConvGrads<T> {
    pub params: CausalConv<T>,
    pub inputs: Vec<T>,
}

impl<T: Scalar> CausalConv<T> {
    /// `taps` is the kernel length `n + 1`.
    pub fn zeros(out_channels: usize, in_channels: usize, taps: usize, activation: Activation) -> Self {
        CausalConv {
            out_channels,
            in_channels,
            taps,
            kernels: vec![T::zero(); out_channels * in_channels * taps],
            bias: vec![T::zero(); out_channels],
            activation,
        }
    }

    pub fn init<R: Rng + ?Sized>(
        out_channels: usize,
        in_channels: usize,
        taps: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let mut c = Self::zeros(out_channels, in_channels, taps, activation);
        let bound = 1.0 / ((in_channels * taps) as f64).sqrt();
        for w in c.kernels.iter_mut().chain(c.bias.iter_mut()) {
            *w = T::from_f64(rng.gen_range(-bound..bound));
        }
        c
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    #[inline]
    fn kidx(&self, o: usize, i: usize, tap: usize) -> usize {
        (o * self.in_channels + i) * self.taps + tap
    }

    pub fn kernel(&self, o: usize, i: usize, tap: usize) -> T {
        self.kernels[self.kidx(o, i, tap)]
    }

    pub fn set_kernel(&mut self, o: usize, i: usize, tap: usize, v: T) {
        let k = self.kidx(o, i, tap);
        self.kernels[k] = v;
    }

    fn check(&self, inputs: &[T]) -> Result<usize> {
        if self.kernels.len() != self.out_channels * self.in_channels * self.taps {
            return Err(Error::shape(
                "conv kernels",
                self.out_channels * self.in_channels * self.taps,
                self.kernels.len(),
            ));
        }
        if self.bias.len() != self.out_channels {
            return Err(Error::shape("conv bias", self.out_channels, self.bias.len()));
        }
        if inputs.is_empty() {
            return Err(Error::InvalidArgument("convolution input is empty".into()));
        }
        if inputs.len() % self.in_channels != 0 {
            return Err(Error::shape(
                "conv input frames",
                inputs.len().next_multiple_of(self.in_channels),
                inputs.len(),
            ));
        }
        Ok(inputs.len() / self.in_channels)
    }

    /// `inputs` holds frames of `in_channels`; returns frames of `out_channels`.
    pub fn forward(&self, inputs: &[T]) -> Result<Vec<T>> {
        let steps = self.check(inputs)?;
        let (p, q) = (self.out_channels, self.in_channels);
        let mut out = vec![T::zero(); steps * p];
        for t in 0..steps {
            for o in 0..p {
                let mut acc = self.bias[o];
                for tap in 0..self.taps.min(t + 1) {
                    let x = &inputs[(t - tap) * q..(t - tap + 1) * q];
                    for (i, &xi) in x.iter().enumerate() {
                        acc += self.kernel(o, i, tap) * xi;
                    }
                }
                out[t * p + o] = match self.activation {
                    Activation::Tanh => acc.tanh(),
                    Activation::Identity => acc,
                };
            }
        }
        Ok(out)
    }

    /// Backward pass given the forward `outputs` and dLoss/dOutputs.
    pub fn backward(&self, inputs: &[T], outputs: &[T], output_grads: &[T]) -> Result<CausalConvGrads<T>> {
        let steps = self.check(inputs)?;
        let (p, q) = (self.out_channels, self.in_channels);
        if outputs.len() != steps * p {
            return Err(Error::shape("conv outputs", steps * p, outputs.len()));
        }
        if output_grads.len() != steps * p {
            return Err(Error::shape("conv output gradients", steps * p, output_grads.len()));
        }
        let mut grads = CausalConvGrads {
            params: Self::zeros(p, q, self.taps, self.activation),
            inputs: vec![T::zero(); inputs.len()],
        };
        for t in 0..steps {
            for o in 0..p {
                let dz = match self.activation {
                    Activation::Tanh => {
                        let y = outputs[t * p + o];
                        output_grads[t * p + o] * (T::one() - y * y)
                    }
                    Activation::Identity => output_grads[t * p + o],
                };
                grads.params.bias[o] += dz;
                for tap in 0..self.taps.min(t + 1) {
                    let base = (t - tap) * q;
                    for i in 0..q {
                        let k = self.kidx(o, i, tap);
                        grads.params.kernels[k] += dz * inputs[base + i];
                        grads.inputs[base + i] += dz * self.kernels[k];
                    }
                }
            }
        }
        Ok(grads)
    }
}

impl<T: Scalar> Parameterized<T> for CausalConv<T> {
    fn param_slices(&self) -> Vec<&[T]> {
        vec![&self.kernels, &self.bias]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![&mut self.kernels, &mut self.bias]
    }
}
