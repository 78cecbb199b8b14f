//! Supervised training: losses, the minibatch Adam loop, validation and the
//! control-interpolation probe.
//!
//! The first `warmup_samples` steps of every segment run the model forward
//! (no loss, no gradient); the state at the end of the warm-up seeds the
//! scored region, which is backpropagated in full or in windows of
//! `truncation` steps.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, ModelDescriptor};
use crate::controls::ControlVector;
use crate::dataset::{condition_concat_into, Dataset, Split};
use crate::error::{Error, Result};
use crate::nn::{Adam, AdamConfig, LstmModel, LstmState, LstmTape, Parameterized, Scalar};
use crate::rig::{virtual_amp_process, ExcitationCorpus, VirtualAmpConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    Esr,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(LossKind::Mse),
            "esr" => Ok(LossKind::Esr),
            other => Err(Error::InvalidArgument(format!("unknown loss {other:?} (expected mse or esr)"))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Mse => "mse",
            LossKind::Esr => "esr",
        })
    }
}

/// Mean squared error over all elements of equally shaped `B x T` buffers.
pub fn mse_loss<T: Scalar>(pred: &[T], target: &[T]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::shape("prediction", target.len(), pred.len()));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("mse of an empty batch".into()));
    }
    Ok(error_energy(pred, target) / pred.len() as f64)
}

/// Error-to-signal ratio with batch-level normalization:
/// `sum (pred - target)^2 / sum target^2` over the whole batch.
pub fn esr_loss<T: Scalar>(pred: &[T], target: &[T]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::shape("prediction", target.len(), pred.len()));
    }
    let energy = signal_energy(target);
    if energy <= 0.0 {
        return Err(Error::ZeroTargetEnergy);
    }
    Ok(error_energy(pred, target) / energy)
}

fn error_energy<T: Scalar>(pred: &[T], target: &[T]) -> f64 {
    pred.iter()
        .zip(target)
        .map(|(&p, &y)| {
            let e = p.as_f64() - y.as_f64();
            e * e
        })
        .sum()
}

fn signal_energy<T: Scalar>(y: &[T]) -> f64 {
    y.iter().map(|&v| v.as_f64() * v.as_f64()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub batch_size: usize,
    pub iterations: usize,
    pub adam: AdamConfig,
    pub loss: LossKind,
    pub warmup_samples: usize,
    pub seed: u64,
    /// Validation pass every this many iterations (and after the last one).
    pub validate_every: usize,
    /// Write the best checkpoint so far to `checkpoint_path` every this many
    /// iterations; 0 disables periodic writes.
    pub checkpoint_every: usize,
    pub checkpoint_path: Option<std::path::PathBuf>,
    /// BPTT window over the scored region; `None` backpropagates through the
    /// whole region at once.
    pub truncation: Option<usize>,
    /// Half-width of the uniform output-head initialization, times `1/sqrt(H)`.
    pub head_init_scale: f64,
    /// Rescale the minibatch gradient to at most this L2 norm.
    pub grad_clip: Option<f64>,
    /// Cosine-anneal the learning rate down to this fraction of its initial
    /// value by the last iteration; constant when `None`.
    pub lr_final_fraction: Option<f64>,
    /// Evaluate minibatch elements one after another on the calling thread.
    pub strict_deterministic: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_size: 32,
            batch_size: 4,
            iterations: 20_000,
            adam: AdamConfig::default(),
            loss: LossKind::Esr,
            warmup_samples: 1000,
            seed: 0,
            validate_every: 1000,
            checkpoint_every: 0,
            checkpoint_path: None,
            truncation: None,
            head_init_scale: 0.1,
            grad_clip: None,
            lr_final_fraction: None,
            strict_deterministic: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, segment_length: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.hidden_size == 0 || self.batch_size == 0 || self.iterations == 0 {
            return bad("hidden_size, batch_size and iterations must be positive".into());
        }
        if self.validate_every == 0 {
            return bad("validate_every must be positive".into());
        }
        if self.grad_clip.is_some_and(|c| !(c > 0.0)) {
            return bad("grad_clip must be positive".into());
        }
        if self.lr_final_fraction.is_some_and(|f| !(0.0..=1.0).contains(&f)) {
            return bad("lr_final_fraction must lie in [0, 1]".into());
        }
        if self.truncation == Some(0) {
            return bad("truncation length must be positive".into());
        }
        let a = &self.adam;
        if !(a.learning_rate > 0.0 && a.epsilon > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2)) {
            return bad(format!("invalid Adam parameters {a:?}"));
        }
        if self.warmup_samples >= segment_length {
            return bad(format!(
                "warmup_samples ({}) must be shorter than the segment length ({segment_length})",
                self.warmup_samples
            ));
        }
        if self.checkpoint_every > 0 && self.checkpoint_path.is_none() {
            return bad("checkpoint_every needs a checkpoint_path".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub iteration: usize,
    pub mean_esr: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss: LossKind,
    pub train_loss: Vec<f64>,
    pub validation: Vec<ValidationPoint>,
    pub best_iteration: usize,
    pub best_validation_esr: Option<f64>,
    pub train_seconds: f64,
    pub validation_seconds: f64,
    pub total_seconds: f64,
}

impl TrainReport {
    pub fn final_validation_esr(&self) -> Option<f64> {
        self.validation.last().map(|v| v.mean_esr)
    }

    /// `iteration,train_loss` rows, iterations counted from 1.
    pub fn loss_csv(&self) -> String {
        let mut s = String::from("iteration,train_loss\n");
        for (i, l) in self.train_loss.iter().enumerate() {
            s.push_str(&format!("{},{l:.9e}\n", i + 1));
        }
        s
    }

    pub fn validation_csv(&self) -> String {
        let mut s = String::from("iteration,mean_esr,elapsed_s\n");
        for v in &self.validation {
            s.push_str(&format!("{},{:.9e},{:.3}\n", v.iteration, v.mean_esr, v.elapsed_s));
        }
        s
    }

    /// Writes `report.json`, `loss.csv` and `validation.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, body: &[u8]| {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
        };
        put("report.json", &serde_json::to_vec_pretty(self).expect("report serializes"))?;
        put("loss.csv", self.loss_csv().as_bytes())?;
        put("validation.csv", self.validation_csv().as_bytes())
    }
}

/// Per-element buffers, reused across iterations.
struct Worker {
    frames: Vec<f32>,
    controls: Vec<f32>,
    gates: Vec<f32>,
    tape: LstmTape<f32>,
    output_grads: Vec<f32>,
    grads: LstmModel<f32>,
}

impl Worker {
    fn new(h: usize, d: usize) -> Self {
        Worker {
            frames: Vec::new(),
            controls: Vec::new(),
            gates: Vec::new(),
            tape: LstmTape::new(),
            output_grads: Vec::new(),
            grads: LstmModel::zeros(h, d),
        }
    }

    /// Forward + backward for one example. `grad_scale` maps squared error to
    /// the batch loss (`1/E` for ESR, `1/(B T)` for MSE). Returns the
    /// example's scored error energy.
    fn run(
        &mut self,
        model: &LstmModel<f32>,
        input: &[f32],
        target: &[f32],
        controls: &ControlVector,
        warmup: usize,
        truncation: Option<usize>,
        grad_scale: f64,
    ) -> Result<f64> {
        let d = model.input_size();
        self.grads.fill_zero();
        self.controls.clear();
        self.controls.extend(controls.values().iter().map(|&v| v as f32));
        condition_concat_into(input, &self.controls, &mut self.frames);

        let mut state = LstmState::zeros(model.hidden_size());
        model.run_state(&self.frames[..warmup * d], &mut state, &mut self.gates);

        let scored = input.len() - warmup;
        let window = truncation.unwrap_or(scored).min(scored);
        let mut err = 0.0f64;
        let mut start = warmup;
        while start < input.len() {
            let end = (start + window).min(input.len());
            model.forward_tape(&self.frames[start * d..end * d], &state, &mut self.tape)?;
            self.output_grads.clear();
            for (&p, &y) in self.tape.outputs().iter().zip(&target[start..end]) {
                let e = p as f64 - y as f64;
                err += e * e;
                self.output_grads.push((2.0 * e * grad_scale) as f32);
            }
            model.backward(&mut self.tape, &self.output_grads, &mut self.grads)?;
            state = self.tape.final_state();
            start = end;
        }
        Ok(err)
    }
}

fn descriptor(dataset: &Dataset, config: &TrainConfig) -> ModelDescriptor {
    ModelDescriptor {
        hidden_size: config.hidden_size,
        input_size: 1 + dataset.controls.len(),
        control_count: dataset.controls.len(),
        controls: dataset.controls.clone(),
        sample_rate: dataset.sample_rate,
        warmup_samples: config.warmup_samples,
        iterations: 0,
        best_validation_esr: None,
    }
}

/// Trains a conditioned LSTM on the training split and returns the
/// checkpoint with the best validation ESR (the final parameters when the
/// validation split is empty).
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(Checkpoint, TrainReport)> {
    config.validate(dataset.segment_length)?;
    for ex in &dataset.examples {
        dataset.controls.validate(&ex.controls)?;
    }
    let started = Instant::now();
    let h = config.hidden_size;
    let d = 1 + dataset.controls.len();
    let warmup = config.warmup_samples;
    let val_idx = dataset.indices(Split::Validation);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = LstmModel::<f32>::init(h, d, config.head_init_scale, &mut rng);
    let mut adam = Adam::for_params(&model, config.adam.clone());
    let mut batches = dataset.minibatches(config.batch_size, config.seed.wrapping_add(1))?;
    let mut workers: Vec<Worker> = (0..config.batch_size).map(|_| Worker::new(h, d)).collect();
    let mut grads = LstmModel::<f32>::zeros(h, d);

    let desc = descriptor(dataset, config);
    let mut best: Option<(f64, usize, LstmModel<f32>)> = None;
    let mut report = TrainReport {
        loss: config.loss,
        train_loss: Vec::with_capacity(config.iterations),
        validation: Vec::new(),
        best_iteration: 0,
        best_validation_esr: None,
        train_seconds: 0.0,
        validation_seconds: 0.0,
        total_seconds: 0.0,
    };
    let mut val_time = 0.0;

    for iteration in 1..=config.iterations {
        let (_, indices) = batches.next_indices();
        let examples: Vec<_> = indices.iter().map(|&i| &dataset.examples[i]).collect();
        let scored = dataset.segment_length - warmup;
        let grad_scale = match config.loss {
            LossKind::Esr => {
                let energy: f64 = examples.iter().map(|ex| signal_energy(&ex.target[warmup..])).sum();
                if energy <= 0.0 {
                    debug!("iteration {iteration}: silent batch skipped");
                    report.train_loss.push(0.0);
                    continue;
                }
                1.0 / energy
            }
            LossKind::Mse => 1.0 / (examples.len() * scored) as f64,
        };

        let active = &mut workers[..examples.len()];
        let work = |(w, ex): (&mut Worker, &&crate::dataset::ExampleTriple)| {
            w.run(&model, &ex.input, &ex.target, &ex.controls, warmup, config.truncation, grad_scale)
        };
        let errs: Vec<f64> = if config.strict_deterministic {
            active.iter_mut().zip(&examples).map(work).collect::<Result<_>>()?
        } else {
            active.par_iter_mut().zip(&examples).map(work).collect::<Result<_>>()?
        };

        grads.fill_zero();
        for w in active.iter() {
            grads.accumulate(&w.grads);
        }
        let loss = errs.iter().sum::<f64>() * grad_scale;
        if !loss.is_finite() || !grads.all_finite() {
            return Err(Error::NonFiniteLoss {
                iteration,
                batch_ids: examples.iter().map(|e| e.id.clone()).collect(),
            });
        }
        report.train_loss.push(loss);
        if let Some(clip) = config.grad_clip {
            let norm = grads.flatten().iter().map(|&g| g as f64 * g as f64).sum::<f64>().sqrt();
            if norm > clip {
                grads.scale((clip / norm) as f32);
            }
        }
        if let Some(f) = config.lr_final_fraction {
            adam.config.learning_rate = cosine_rate(config.adam.learning_rate, f, iteration, config.iterations);
        }
        adam.update(&mut model, &grads)?;

        let last = iteration == config.iterations;
        if !val_idx.is_empty() && (iteration % config.validate_every == 0 || last) {
            let t0 = Instant::now();
            let esr = mean_esr(&model, dataset, &val_idx, warmup)?;
            val_time += t0.elapsed().as_secs_f64();
            report.validation.push(ValidationPoint {
                iteration,
                mean_esr: esr,
                elapsed_s: started.elapsed().as_secs_f64(),
            });
            let recent = &report.train_loss[report.train_loss.len().saturating_sub(config.validate_every)..];
            info!(
                "iteration {iteration}: train {} {:.5} validation esr {esr:.5}",
                config.loss,
                recent.iter().sum::<f64>() / recent.len() as f64
            );
            if best.as_ref().map_or(true, |(b, _, _)| esr < *b) {
                best = Some((esr, iteration, model.clone()));
            }
        }
        if config.checkpoint_every > 0 && (iteration % config.checkpoint_every == 0 || last) {
            let path = config.checkpoint_path.as_ref().expect("validated");
            snapshot(&desc, &model, best.as_ref(), iteration)?.save(path)?;
        }
    }

    let checkpoint = snapshot(&desc, &model, best.as_ref(), config.iterations)?;
    if let Some((esr, it, _)) = &best {
        report.best_iteration = *it;
        report.best_validation_esr = Some(*esr);
    } else {
        report.best_iteration = config.iterations;
    }
    report.total_seconds = started.elapsed().as_secs_f64();
    report.validation_seconds = val_time;
    report.train_seconds = report.total_seconds - val_time;
    Ok((checkpoint, report))
}

/// Learning rate at `iteration` (1-based) of `total` under cosine annealing.
pub fn cosine_rate(initial: f64, final_fraction: f64, iteration: usize, total: usize) -> f64 {
    let progress = if total > 1 { (iteration - 1) as f64 / (total - 1) as f64 } else { 1.0 };
    let floor = initial * final_fraction;
    floor + 0.5 * (initial - floor) * (1.0 + (std::f64::consts::PI * progress).cos())
}

fn snapshot(
    desc: &ModelDescriptor,
    current: &LstmModel<f32>,
    best: Option<&(f64, usize, LstmModel<f32>)>,
    iteration: usize,
) -> Result<Checkpoint> {
    let mut desc = desc.clone();
    desc.iterations = iteration;
    let model = match best {
        Some((esr, _, m)) => {
            desc.best_validation_esr = Some(*esr);
            m.clone()
        }
        None => current.clone(),
    };
    Checkpoint::new(desc, model)
}

/// Model output for one segment with constant controls, from a zero state.
pub fn predict(model: &LstmModel<f32>, input: &[f32], controls: &ControlVector) -> Result<Vec<f32>> {
    let mut frames = Vec::new();
    condition_concat_into(input, &controls.as_f32(), &mut frames);
    Ok(model.forward(&frames, &LstmState::zeros(model.hidden_size()))?.0)
}

/// ESR of one example over its scored region (after `warmup` samples).
pub fn example_esr(model: &LstmModel<f32>, input: &[f32], target: &[f32], controls: &ControlVector, warmup: usize) -> Result<f64> {
    let pred = predict(model, input, controls)?;
    esr_loss(&pred[warmup..], &target[warmup..])
}

fn mean_esr(model: &LstmModel<f32>, dataset: &Dataset, indices: &[usize], warmup: usize) -> Result<f64> {
    let esrs: Vec<f64> = indices
        .par_iter()
        .map(|&i| {
            let ex = &dataset.examples[i];
            example_esr(model, &ex.input, &ex.target, &ex.controls, warmup)
        })
        .collect::<Result<_>>()?;
    Ok(esrs.iter().sum::<f64>() / esrs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScore {
    pub id: String,
    pub esr: f64,
    /// RMS of the scored target region.
    pub target_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub split: Split,
    /// Mean of the per-example ESR values.
    pub mean_esr: f64,
    pub median_esr: f64,
    /// Total error energy over total target energy across the split.
    pub pooled_esr: f64,
    /// Worst first.
    pub examples: Vec<ExampleScore>,
}

/// Per-example ESR (batch size one) over `split`, skipping the checkpoint's
/// warm-up region.
pub fn validate(checkpoint: &Checkpoint, dataset: &Dataset, split: Split) -> Result<ValidationReport> {
    check_compatible(checkpoint, dataset)?;
    let warmup = checkpoint.descriptor.warmup_samples;
    if warmup >= dataset.segment_length {
        return Err(Error::InvalidArgument(format!(
            "checkpoint warm-up {warmup} is not shorter than segment length {}",
            dataset.segment_length
        )));
    }
    let idx = dataset.indices(split);
    if idx.is_empty() {
        return Err(Error::InvalidArgument(format!("dataset has no {split:?} examples")));
    }
    let mut examples: Vec<ExampleScore> = idx
        .par_iter()
        .map(|&i| {
            let ex = &dataset.examples[i];
            let scored = &ex.target[warmup..];
            Ok(ExampleScore {
                id: ex.id.clone(),
                esr: example_esr(&checkpoint.model, &ex.input, &ex.target, &ex.controls, warmup)?,
                target_rms: (signal_energy(scored) / scored.len() as f64).sqrt(),
            })
        })
        .collect::<Result<_>>()?;
    let n = examples.len() as f64;
    let mean_esr = examples.iter().map(|e| e.esr).sum::<f64>() / n;
    let energy: f64 = examples.iter().map(|e| e.target_rms * e.target_rms).sum();
    let pooled_esr = examples.iter().map(|e| e.esr * e.target_rms * e.target_rms).sum::<f64>() / energy;
    examples.sort_by(|a, b| b.esr.total_cmp(&a.esr).then_with(|| a.id.cmp(&b.id)));
    let mid = examples.len() / 2;
    let median_esr = if examples.len() % 2 == 1 {
        examples[mid].esr
    } else {
        0.5 * (examples[mid - 1].esr + examples[mid].esr)
    };
    Ok(ValidationReport { split, mean_esr, median_esr, pooled_esr, examples })
}

fn check_compatible(checkpoint: &Checkpoint, dataset: &Dataset) -> Result<()> {
    let d = &checkpoint.descriptor;
    if d.controls != dataset.controls {
        return Err(Error::InvalidArgument(format!(
            "checkpoint controls [{}] differ from dataset controls [{}]",
            d.controls, dataset.controls
        )));
    }
    if d.sample_rate != dataset.sample_rate {
        return Err(Error::InvalidArgument(format!(
            "checkpoint sample rate {} differs from dataset sample rate {}",
            d.sample_rate, dataset.sample_rate
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub controls: ControlVector,
    pub esr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub seen: Vec<ProbeResult>,
    pub unseen: Vec<ProbeResult>,
    pub seen_mean_esr: f64,
    pub unseen_mean_esr: Option<f64>,
    /// `unseen / seen`.
    pub ratio: Option<f64>,
}

/// Compares the model against fresh virtual-rig audio at training
/// configurations and at midpoints between pairs of them.
///
/// Probe `i` draws training configurations `a_i != b_i`; the seen probe uses
/// `a_i`, the unseen probe `(a_i + b_i) / 2`, both on the same fresh
/// excitation segment. With no controls there is nothing to interpolate and
/// the report holds a single seen probe.
pub fn control_interpolation_eval(
    checkpoint: &Checkpoint,
    dataset: &Dataset,
    corpus: &ExcitationCorpus,
    probes: usize,
    seed: u64,
) -> Result<InterpolationReport> {
    check_compatible(checkpoint, dataset)?;
    if corpus.sample_rate != dataset.sample_rate {
        return Err(Error::InvalidArgument("corpus and dataset sample rates differ".into()));
    }
    let len = dataset.segment_length;
    let warmup = checkpoint.descriptor.warmup_samples;
    let eligible = corpus.eligible_clips(len);
    if eligible.is_empty() {
        return Err(Error::InvalidArgument(format!("no corpus clip is at least {len} samples long")));
    }
    let train: Vec<&ControlVector> = dataset
        .examples
        .iter()
        .filter(|e| e.split == Split::Train)
        .map(|e| &e.controls)
        .collect();
    if train.is_empty() {
        return Err(Error::InvalidArgument("dataset has no training examples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let single = dataset.controls.is_empty() || train.len() < 2;
    let count = if single { 1 } else { probes.max(1) };

    let mut jobs = Vec::with_capacity(count);
    for _ in 0..count {
        let picks = if single { 1 } else { 2 };
        let mut pair: Vec<&ControlVector> = train.choose_multiple(&mut rng, picks).copied().collect();
        let a = pair.remove(0).clone();
        let mid = pair.first().map(|b| a.midpoint(b));
        let segment = corpus.draw_segment(&eligible, len, &mut rng);
        jobs.push((a, mid, segment));
    }

    let score = |c: &ControlVector, x: &[f32]| -> Result<ProbeResult> {
        let cfg = VirtualAmpConfig::from_controls(&dataset.controls, c, dataset.sample_rate)?;
        let y = virtual_amp_process(&cfg, x);
        let esr = example_esr(&checkpoint.model, x, &y, c, warmup)?;
        Ok(ProbeResult { controls: c.clone(), esr })
    };
    let results: Vec<(ProbeResult, Option<ProbeResult>)> = jobs
        .par_iter()
        .map(|(a, mid, x)| Ok((score(a, x)?, mid.as_ref().map(|m| score(m, x)).transpose()?)))
        .collect::<Result<_>>()?;

    let (seen, unseen): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let unseen: Vec<ProbeResult> = unseen.into_iter().flatten().collect();
    let mean = |v: &[ProbeResult]| v.iter().map(|p| p.esr).sum::<f64>() / v.len() as f64;
    let seen_mean_esr = mean(&seen);
    let unseen_mean_esr = (!unseen.is_empty()).then(|| mean(&unseen));
    Ok(InterpolationReport {
        ratio: unseen_mean_esr.map(|u| u / seen_mean_esr),
        seen,
        unseen,
        seen_mean_esr,
        unseen_mean_esr,
    })
}
