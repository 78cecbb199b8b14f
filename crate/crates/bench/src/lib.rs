//! Fixtures shared by the benchmarks.

use ampnet_core::checkpoint::{Checkpoint, ModelDescriptor};
use ampnet_core::nn::LstmModel;
use ampnet_core::ControlSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random LSTM conditioned on the five amp knobs, at 48 kHz.
pub fn amp_checkpoint(hidden: usize, seed: u64) -> Checkpoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let controls = ControlSpace::amp_knobs();
    let d = 1 + controls.len();
    Checkpoint::new(
        ModelDescriptor {
            hidden_size: hidden,
            input_size: d,
            control_count: controls.len(),
            controls,
            sample_rate: 48_000,
            warmup_samples: 0,
            iterations: 0,
            best_validation_esr: None,
        },
        LstmModel::init(hidden, d, 1.0, &mut rng),
    )
    .expect("consistent descriptor")
}

pub fn noise(n: usize, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect()
}
