//! Finite-difference verification of the analytic gradients.
//!
//! Runs at double precision on small random instances. The relative error
//! of one component is `|a - n| / max(|a|, |n|, REL_ERR_FLOOR)`, where `a` is
//! the analytic and `n` the central-difference value; the floor keeps
//! components that are zero up to rounding from dominating the report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Activation, CausalConv, LstmModel, LstmState, Parameterized};

pub const REL_ERR_FLOOR: f64 = 1e-6;
pub const DEFAULT_STEP: f64 = 1e-5;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub model: String,
    pub components: usize,
    pub max_rel_error: f64,
    pub worst_component: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Central differences of `loss` with respect to every parameter of `params`.
pub fn finite_difference<P, F>(params: &P, step: f64, loss: F) -> Vec<f64>
where
    P: Parameterized<f64> + Clone,
    F: Fn(&P) -> f64,
{
    let mut probe = params.clone();
    let mut out = Vec::with_capacity(params.param_count());
    let blocks = params.param_slices().iter().map(|s| s.len()).collect::<Vec<_>>();
    for (b, len) in blocks.into_iter().enumerate() {
        for k in 0..len {
            let orig = probe.param_slices()[b][k];
            probe.param_slices_mut()[b][k] = orig + step;
            let up = loss(&probe);
            probe.param_slices_mut()[b][k] = orig - step;
            let down = loss(&probe);
            probe.param_slices_mut()[b][k] = orig;
            out.push((up - down) / (2.0 * step));
        }
    }
    out
}

pub fn compare(model: &str, analytic: &[f64], numeric: &[f64], tolerance: f64) -> GradCheckReport {
    assert_eq!(analytic.len(), numeric.len(), "gradient vectors differ in length");
    let mut worst = 0;
    let mut max_err = 0.0f64;
    for (k, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let err = (a - n).abs() / a.abs().max(n.abs()).max(REL_ERR_FLOOR);
        // NaN never compares greater, so catch it explicitly.
        if err > max_err || err.is_nan() {
            max_err = err;
            worst = k;
            if err.is_nan() {
                break;
            }
        }
    }
    GradCheckReport {
        model: model.to_string(),
        components: analytic.len(),
        max_rel_error: max_err,
        worst_component: worst,
        tolerance,
        passed: max_err < tolerance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmCheckSpec {
    pub hidden_size: usize,
    pub input_size: usize,
    pub steps: usize,
}

impl Default for LstmCheckSpec {
    fn default() -> Self {
        LstmCheckSpec {
            hidden_size: 4,
            input_size: 3,
            steps: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvCheckSpec {
    pub out_channels: usize,
    pub in_channels: usize,
    /// Highest tap index `n`; the kernel has `n + 1` taps.
    pub order: usize,
    pub steps: usize,
}

impl Default for ConvCheckSpec {
    fn default() -> Self {
        ConvCheckSpec {
            out_channels: 2,
            in_channels: 2,
            order: 3,
            steps: 10,
        }
    }
}

/// A random LSTM instance with an MSE loss against a random target.
pub struct LstmInstance {
    pub model: LstmModel<f64>,
    pub inputs: Vec<f64>,
    pub initial: LstmState<f64>,
    pub target: Vec<f64>,
}

impl LstmInstance {
    pub fn random(spec: LstmCheckSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = LstmModel::init(spec.hidden_size, spec.input_size, 1.0, &mut rng);
        // Nonzero biases so every gate path carries gradient.
        for b in model.lstm.biases.iter_mut() {
            *b = rng.gen_range(-0.5..0.5);
        }
        model.head.bias = rng.gen_range(-0.5..0.5);
        let mut uniform = |n: usize, lim: f64| (0..n).map(|_| rng.gen_range(-lim..lim)).collect::<Vec<f64>>();
        let inputs = uniform(spec.steps * spec.input_size, 1.0);
        let initial = LstmState {
            hidden: uniform(spec.hidden_size, 0.5),
            cell: uniform(spec.hidden_size, 1.0),
        };
        let target = uniform(spec.steps, 1.0);
        LstmInstance {
            model,
            inputs,
            initial,
            target,
        }
    }

    pub fn loss(&self, model: &LstmModel<f64>) -> f64 {
        let (out, _) = model.forward(&self.inputs, &self.initial).expect("shapes fixed");
        mse(&out, &self.target)
    }

    pub fn analytic(&self) -> Vec<f64> {
        let (out, _) = self.model.forward(&self.inputs, &self.initial).expect("shapes fixed");
        let grads = self
            .model
            .gradients(&self.inputs, &self.initial, &mse_grad(&out, &self.target))
            .expect("shapes fixed");
        grads.flatten()
    }

    pub fn numeric(&self, step: f64) -> Vec<f64> {
        finite_difference(&self.model, step, |m| self.loss(m))
    }
}

pub struct ConvInstance {
    pub conv: CausalConv<f64>,
    pub inputs: Vec<f64>,
    pub target: Vec<f64>,
}

impl ConvInstance {
    pub fn random(spec: ConvCheckSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conv = CausalConv::init(spec.out_channels, spec.in_channels, spec.order + 1, Activation::Tanh, &mut rng);
        let inputs = (0..spec.steps * spec.in_channels)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let target = (0..spec.steps * spec.out_channels)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        ConvInstance { conv, inputs, target }
    }

    fn loss_with(&self, conv: &CausalConv<f64>, inputs: &[f64]) -> f64 {
        mse(&conv.forward(inputs).expect("shapes fixed"), &self.target)
    }

    /// Parameter gradients followed by input gradients.
    pub fn analytic(&self) -> Vec<f64> {
        let out = self.conv.forward(&self.inputs).expect("shapes fixed");
        let g = self
            .conv
            .backward(&self.inputs, &out, &mse_grad(&out, &self.target))
            .expect("shapes fixed");
        let mut v = g.params.flatten();
        v.extend_from_slice(&g.inputs);
        v
    }

    pub fn numeric(&self, step: f64) -> Vec<f64> {
        let mut v = finite_difference(&self.conv, step, |c| self.loss_with(c, &self.inputs));
        let mut x = self.inputs.clone();
        for k in 0..x.len() {
            let orig = x[k];
            x[k] = orig + step;
            let up = self.loss_with(&self.conv, &x);
            x[k] = orig - step;
            let down = self.loss_with(&self.conv, &x);
            x[k] = orig;
            v.push((up - down) / (2.0 * step));
        }
        v
    }
}

fn mse(out: &[f64], target: &[f64]) -> f64 {
    out.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum::<f64>() / out.len() as f64
}

fn mse_grad(out: &[f64], target: &[f64]) -> Vec<f64> {
    let n = out.len() as f64;
    out.iter().zip(target).map(|(y, t)| 2.0 * (y - t) / n).collect()
}

pub fn check_lstm(spec: LstmCheckSpec, step: f64, tolerance: f64, seed: u64) -> GradCheckReport {
    let inst = LstmInstance::random(spec, seed);
    compare(
        &format!("lstm H={} D={} T={}", spec.hidden_size, spec.input_size, spec.steps),
        &inst.analytic(),
        &inst.numeric(step),
        tolerance,
    )
}

pub fn check_conv(spec: ConvCheckSpec, step: f64, tolerance: f64, seed: u64) -> GradCheckReport {
    let inst = ConvInstance::random(spec, seed);
    compare(
        &format!(
            "causal_conv p={} q={} n={} T={}",
            spec.out_channels, spec.in_channels, spec.order, spec.steps
        ),
        &inst.analytic(),
        &inst.numeric(step),
        tolerance,
    )
}
