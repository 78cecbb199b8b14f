//! Streaming inference: a stateful, block-size-independent model session
//! with live control updates, an optional cabinet impulse response, and
//! RMS loudness matching.

use std::path::Path;
use std::sync::mpsc::{channel, Receiver, Sender, TryRecvError};
use std::time::Instant;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, rms};
use crate::checkpoint::Checkpoint;
use crate::controls::ControlSpace;
use crate::error::{Error, Result};
use crate::nn::{LstmModel, LstmState};

pub const REFERENCE_RATE: u32 = 48_000;

/// A control change delivered through [`StreamSession::control_sender`].
#[derive(Debug, Clone, PartialEq)]
pub enum ControlUpdate {
    Set { index: usize, value: f64 },
    All(Vec<f64>),
}

/// One audio stream through a trained model.
///
/// All buffers are sized at creation; [`StreamSession::process_block`]
/// neither allocates nor touches storage.
pub struct StreamSession {
    model: LstmModel<f32>,
    space: ControlSpace,
    sample_rate: u32,
    controls: Vec<f64>,
    /// Values fed to the model: `controls` as `f32`, or their smoothed
    /// trajectory when smoothing is on.
    live: Vec<f32>,
    smoothing: Option<f32>,
    frame: Vec<f32>,
    state: LstmState<f32>,
    gates: Vec<f32>,
    cabinet: Option<FirFilter>,
    updates: Option<Receiver<ControlUpdate>>,
}

impl StreamSession {
    /// Starts a session with all controls at 0.5.
    pub fn new(checkpoint: &Checkpoint, sample_rate: u32) -> Result<Self> {
        let d = &checkpoint.descriptor;
        if d.sample_rate != sample_rate {
            return Err(Error::InvalidArgument(format!(
                "stream runs at {sample_rate} Hz but the checkpoint was trained at {} Hz",
                d.sample_rate
            )));
        }
        let k = d.controls.len();
        let h = checkpoint.model.hidden_size();
        Ok(StreamSession {
            model: checkpoint.model.clone(),
            space: d.controls.clone(),
            sample_rate,
            controls: vec![0.5; k],
            live: vec![0.5; k],
            smoothing: None,
            frame: vec![0.0; 1 + k],
            state: LstmState::zeros(h),
            gates: vec![0.0; 5 * h],
            cabinet: None,
            updates: None,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn control_space(&self) -> &ControlSpace {
        &self.space
    }

    pub fn controls(&self) -> &[f64] {
        &self.controls
    }

    /// Replaces all control values, effective from the next sample.
    /// Out-of-range values are clamped to `[0, 1]` with a warning; the
    /// return value says whether that happened.
    pub fn set_controls(&mut self, values: &[f64]) -> Result<bool> {
        if values.len() != self.controls.len() {
            return Err(Error::shape("control vector", self.controls.len(), values.len()));
        }
        let mut clamped = false;
        for (dst, &v) in self.controls.iter_mut().zip(values) {
            let c = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
            clamped |= c != v || v.is_nan();
            *dst = c;
        }
        if clamped {
            warn!("control values {values:?} clamped to {:?}", self.controls);
        }
        if self.smoothing.is_none() {
            self.sync_live();
        }
        Ok(clamped)
    }

    pub fn set_control(&mut self, index: usize, value: f64) -> Result<bool> {
        if index >= self.controls.len() {
            return Err(Error::InvalidArgument(format!(
                "control index {index} out of range for {} controls",
                self.controls.len()
            )));
        }
        let c = if value.is_nan() { 0.0 } else { value.clamp(0.0, 1.0) };
        let clamped = c != value || value.is_nan();
        if clamped {
            warn!("control {index} value {value} clamped to {c}");
        }
        self.controls[index] = c;
        if self.smoothing.is_none() {
            self.live[index] = c as f32;
        }
        Ok(clamped)
    }

    pub fn set_control_by_name(&mut self, name: &str, value: f64) -> Result<bool> {
        let index = self
            .space
            .index_of(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown control {name:?}; model has [{}]", self.space)))?;
        self.set_control(index, value)
    }

    /// One-pole smoothing of control moves with the given time constant in
    /// seconds; `None` (the default) applies changes instantly.
    pub fn set_smoothing(&mut self, time_constant: Option<f64>) -> Result<()> {
        self.smoothing = match time_constant {
            None => None,
            Some(t) if t > 0.0 && t.is_finite() => {
                Some((1.0 - (-1.0 / (t * self.sample_rate as f64)).exp()) as f32)
            }
            Some(t) => return Err(Error::InvalidArgument(format!("smoothing time constant {t} must be positive"))),
        };
        if self.smoothing.is_none() {
            self.sync_live();
        }
        Ok(())
    }

    pub fn set_cabinet(&mut self, ir: Option<&CabinetIR>) -> Result<()> {
        self.cabinet = match ir {
            None => None,
            Some(ir) => {
                if ir.sample_rate != self.sample_rate {
                    return Err(Error::InvalidArgument(format!(
                        "cabinet IR is at {} Hz, session at {} Hz",
                        ir.sample_rate, self.sample_rate
                    )));
                }
                Some(FirFilter::new(ir))
            }
        };
        Ok(())
    }

    /// Returns a sender whose updates are applied at the start of the next
    /// block. Calling it again replaces the previous channel.
    pub fn control_sender(&mut self) -> Sender<ControlUpdate> {
        let (tx, rx) = channel();
        self.updates = Some(rx);
        tx
    }

    /// Clears the recurrent and filter state; controls are kept.
    pub fn reset(&mut self) {
        self.state.reset();
        if let Some(f) = &mut self.cabinet {
            f.reset();
        }
        self.sync_live();
    }

    fn sync_live(&mut self) {
        for (l, &c) in self.live.iter_mut().zip(&self.controls) {
            *l = c as f32;
        }
    }

    fn drain_updates(&mut self) {
        let Some(rx) = self.updates.take() else { return };
        loop {
            match rx.try_recv() {
                Ok(ControlUpdate::Set { index, value }) => {
                    if let Err(e) = self.set_control(index, value) {
                        warn!("ignored control update: {e}");
                    }
                }
                Ok(ControlUpdate::All(values)) => {
                    if let Err(e) = self.set_controls(&values) {
                        warn!("ignored control update: {e}");
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => {
                    return;
                }
            }
        }
        self.updates = Some(rx);
    }

    /// Processes `input` into `output` (same length), continuing from the
    /// state left by the previous call.
    pub fn process_block(&mut self, input: &[f32], output: &mut [f32]) -> Result<()> {
        if input.len() != output.len() {
            return Err(Error::shape("output block", input.len(), output.len()));
        }
        if input.is_empty() {
            return Err(Error::InvalidArgument("block must hold at least one sample".into()));
        }
        self.drain_updates();
        let k = self.controls.len();
        if self.smoothing.is_none() {
            self.frame[1..].copy_from_slice(&self.live);
        }
        for (x, y) in input.iter().zip(output.iter_mut()) {
            if let Some(a) = self.smoothing {
                for ((l, &c), f) in self.live.iter_mut().zip(&self.controls).zip(&mut self.frame[1..=k]) {
                    let next = *l + a * (c as f32 - *l);
                    // Rounding stalls the glide just short of the target.
                    *l = if next == *l { c as f32 } else { next };
                    *f = *l;
                }
            }
            self.frame[0] = *x;
            self.model
                .lstm
                .advance(&self.frame, &mut self.state.hidden, &mut self.state.cell, &mut self.gates);
            let out = self.model.head.apply(&self.state.hidden);
            *y = match &mut self.cabinet {
                Some(f) => f.tick(out),
                None => out,
            };
        }
        Ok(())
    }

    /// Allocating convenience wrapper around [`Self::process_block`].
    pub fn process(&mut self, input: &[f32]) -> Result<Vec<f32>> {
        let mut out = vec![0.0; input.len()];
        if !input.is_empty() {
            self.process_block(input, &mut out)?;
        }
        Ok(out)
    }

    /// Runs `input` in blocks of `block_size`, applying each automation
    /// event at its exact sample.
    pub fn process_automated(
        &mut self,
        input: &[f32],
        automation: &ControlAutomation,
        block_size: usize,
    ) -> Result<Vec<f32>> {
        if block_size == 0 {
            return Err(Error::InvalidArgument("block size must be positive".into()));
        }
        let mut out = vec![0.0; input.len()];
        let mut events = automation.events.iter().peekable();
        let mut pos = 0;
        while pos < input.len() {
            while let Some(e) = events.next_if(|e| e.sample(self.sample_rate) <= pos) {
                self.set_control_by_name(&e.control, e.value)?;
            }
            let next_event = events.peek().map_or(usize::MAX, |e| e.sample(self.sample_rate));
            let end = (pos + block_size).min(input.len()).min(next_event);
            self.process_block(&input[pos..end], &mut out[pos..end])?;
            pos = end;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutomationEvent {
    pub time_s: f64,
    pub control: String,
    pub value: f64,
}

impl AutomationEvent {
    fn sample(&self, rate: u32) -> usize {
        (self.time_s * rate as f64).round() as usize
    }
}

/// Timed control moves, one `time_s control value` per line (whitespace or
/// comma separated, `#` starts a comment), kept in time order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlAutomation {
    pub events: Vec<AutomationEvent>,
}

impl ControlAutomation {
    pub fn parse(text: &str, space: &ControlSpace) -> Result<Self> {
        let mut events = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let bad = |m: String| Error::InvalidArgument(format!("automation line {}: {m}", n + 1));
            let [t, name, v] = fields[..] else {
                return Err(bad(format!("expected `time_s control value`, got {line:?}")));
            };
            let time_s: f64 = t.parse().map_err(|_| bad(format!("bad time {t:?}")))?;
            let value: f64 = v.parse().map_err(|_| bad(format!("bad value {v:?}")))?;
            if !(time_s >= 0.0 && time_s.is_finite()) {
                return Err(bad(format!("time {time_s} must be a finite non-negative number")));
            }
            if space.index_of(name).is_none() {
                return Err(bad(format!("unknown control {name:?}; model has [{space}]")));
            }
            events.push(AutomationEvent { time_s, control: name.to_string(), value });
        }
        events.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
        Ok(ControlAutomation { events })
    }

    pub fn load(path: &Path, space: &ControlSpace) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, space).map_err(|e| Error::format(path, e.to_string()))
    }
}

/// Speaker-cabinet impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct CabinetIR {
    pub sample_rate: u32,
    pub taps: Vec<f32>,
}

impl CabinetIR {
    pub fn new(sample_rate: u32, taps: Vec<f32>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidArgument("impulse response needs at least one tap".into()));
        }
        Ok(CabinetIR { sample_rate, taps })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let clip = read_wav(path)?;
        Self::new(clip.sample_rate, clip.samples).map_err(|e| Error::format(path, e.to_string()))
    }
}

/// Direct-form streaming FIR; products are accumulated in `f64`.
#[derive(Debug, Clone)]
pub struct FirFilter {
    taps: Vec<f64>,
    /// Circular history; `history[pos]` is the newest sample.
    history: Vec<f64>,
    pos: usize,
}

impl FirFilter {
    pub fn new(ir: &CabinetIR) -> Self {
        let n = ir.taps.len();
        FirFilter {
            taps: ir.taps.iter().map(|&t| t as f64).collect(),
            history: vec![0.0; n],
            pos: 0,
        }
    }

    pub fn reset(&mut self) {
        self.history.fill(0.0);
        self.pos = 0;
    }

    pub fn tick(&mut self, x: f32) -> f32 {
        let n = self.taps.len();
        self.pos = if self.pos == 0 { n - 1 } else { self.pos - 1 };
        self.history[self.pos] = x as f64;
        // taps[k] pairs with history[(pos + k) % n].
        let (newer, older) = self.history.split_at(self.pos);
        let split = n - self.pos;
        let mut acc = 0.0;
        for (t, h) in self.taps[..split].iter().zip(older) {
            acc += t * h;
        }
        for (t, h) in self.taps[split..].iter().zip(newer) {
            acc += t * h;
        }
        acc as f32
    }
}

/// Causal convolution of a whole signal with `ir`, truncated to the input
/// length.
pub fn apply_cabinet_ir(samples: &[f32], ir: &CabinetIR) -> Vec<f32> {
    let mut f = FirFilter::new(ir);
    samples.iter().map(|&x| f.tick(x)).collect()
}

/// Scales `samples` so their RMS equals that of `reference`.
pub fn loudness_match(samples: &[f32], reference: &[f32]) -> Result<Vec<f32>> {
    let target = rms(reference);
    if target == 0.0 {
        return Err(Error::SilentReference);
    }
    let current = rms(samples);
    if current == 0.0 {
        return Err(Error::InvalidArgument("cannot loudness-match a silent signal".into()));
    }
    let gain = target / current;
    Ok(samples.iter().map(|&x| (x as f64 * gain) as f32).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub hidden_size: usize,
    pub control_count: usize,
    pub block_size: usize,
    pub samples: usize,
    pub seconds: f64,
    pub samples_per_second: f64,
    /// `samples_per_second / 48000`.
    pub realtime_factor: f64,
}

/// Single-stream steady-state throughput over `duration_s` seconds of
/// 48 kHz noise, processed in blocks of `block_size` on the calling thread.
pub fn benchmark_throughput(checkpoint: &Checkpoint, duration_s: f64, block_size: usize) -> Result<ThroughputReport> {
    if !(duration_s > 0.0) || block_size == 0 {
        return Err(Error::InvalidArgument("duration and block size must be positive".into()));
    }
    let mut session = StreamSession::new(checkpoint, checkpoint.descriptor.sample_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let input: Vec<f32> = (0..block_size).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut output = vec![0.0; block_size];
    let total = (duration_s * REFERENCE_RATE as f64).ceil() as usize;
    let blocks = total.div_ceil(block_size);
    // Warm caches and branch predictors.
    for _ in 0..blocks.min(16) {
        session.process_block(&input, &mut output)?;
    }
    let start = Instant::now();
    for _ in 0..blocks {
        session.process_block(&input, &mut output)?;
    }
    let seconds = start.elapsed().as_secs_f64();
    std::hint::black_box(&output);
    let samples = blocks * block_size;
    let samples_per_second = samples as f64 / seconds;
    Ok(ThroughputReport {
        hidden_size: checkpoint.model.hidden_size(),
        control_count: checkpoint.descriptor.control_count,
        block_size,
        samples,
        seconds,
        samples_per_second,
        realtime_factor: samples_per_second / REFERENCE_RATE as f64,
    })
}
