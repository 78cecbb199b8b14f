//! Virtual reference amplifier and the capture runner that records
//! conditioned datasets from it.
//!
//! Signal chain, per sample, all in double precision:
//!
//! 1. drive gain `g = 1 + 11 * volume^2`
//! 2. waveshaper `tanh(g x + 0.1) - tanh(0.1)` (asymmetric, zero at zero)
//! 3. DC blocker, one-pole high-pass at 10 Hz
//! 4. low shelf at 200 Hz, gain `-12 + 24 * bass` dB
//! 5. high shelf at 1.5 kHz, gain `-12 + 24 * treble` dB
//! 6. one-pole low-pass, cutoff `f_hi * (500 / f_hi)^tone_cut` with
//!    `f_hi = min(12 kHz, 0.45 fs)`
//! 7. output scale `0.5 * master^2`
//!
//! Every map is monotone in its knob. Filter state starts at zero for each
//! processed segment.

use std::f64::consts::PI;
use std::path::Path;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::audio::{read_wav, write_wav, AudioClip};
use crate::controls::{ControlSpace, ControlVector, AMP_KNOBS};
use crate::dataset::{Dataset, ExampleTriple, Split};
use crate::error::{Error, Result};
use crate::plan::Session;

const SHAPER_BIAS: f64 = 0.1;
const DC_BLOCK_HZ: f64 = 10.0;
const BASS_HZ: f64 = 200.0;
const TREBLE_HZ: f64 = 1500.0;
const TONE_CUT_LOW_HZ: f64 = 500.0;
const SHELF_RANGE_DB: f64 = 12.0;
const OUTPUT_SCALE: f64 = 0.5;
/// Knob position used for amp knobs missing from a capture's control space.
pub const DEFAULT_KNOB: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualAmpConfig {
    pub volume: f64,
    pub bass: f64,
    pub treble: f64,
    pub tone_cut: f64,
    pub master: f64,
    pub sample_rate: u32,
}

impl VirtualAmpConfig {
    pub fn new(knobs: [f64; 5], sample_rate: u32) -> Result<Self> {
        for (name, v) in AMP_KNOBS.iter().zip(knobs) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("knob {name} = {v} is outside [0, 1]")));
            }
        }
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        let [volume, bass, treble, tone_cut, master] = knobs;
        Ok(VirtualAmpConfig {
            volume,
            bass,
            treble,
            tone_cut,
            master,
            sample_rate,
        })
    }

    pub fn knobs(&self) -> [f64; 5] {
        [self.volume, self.bass, self.treble, self.tone_cut, self.master]
    }

    /// Maps a control vector over `space` onto the amp's knobs. Every name in
    /// `space` must be an amp knob; knobs the space omits sit at
    /// [`DEFAULT_KNOB`].
    pub fn from_controls(space: &ControlSpace, controls: &ControlVector, sample_rate: u32) -> Result<Self> {
        space.validate(controls)?;
        let mut knobs = [DEFAULT_KNOB; 5];
        for (spec, &v) in space.controls().iter().zip(controls.values()) {
            let k = AMP_KNOBS
                .iter()
                .position(|n| *n == spec.name)
                .ok_or_else(|| Error::InvalidArgument(format!("the virtual amp has no control {:?}", spec.name)))?;
            knobs[k] = v;
        }
        Self::new(knobs, sample_rate)
    }
}

fn one_pole_coeff(cutoff_hz: f64, sample_rate: f64) -> f64 {
    (-2.0 * PI * cutoff_hz / sample_rate).exp()
}

#[derive(Debug, Clone, Copy, Default)]
struct OnePole {
    a: f64,
    y: f64,
}

impl OnePole {
    fn lowpass(cutoff_hz: f64, sample_rate: f64) -> Self {
        OnePole {
            a: one_pole_coeff(cutoff_hz, sample_rate),
            y: 0.0,
        }
    }

    #[inline]
    fn tick(&mut self, x: f64) -> f64 {
        self.y = (1.0 - self.a) * x + self.a * self.y;
        self.y
    }
}

/// Stateful instance of the virtual amplifier at one knob setting.
#[derive(Debug, Clone)]
pub struct VirtualAmp {
    config: VirtualAmpConfig,
    drive: f64,
    shaper_offset: f64,
    dc_r: f64,
    dc_x1: f64,
    dc_y1: f64,
    bass_gain: f64,
    bass_lp: OnePole,
    treble_gain: f64,
    treble_lp: OnePole,
    tone_lp: OnePole,
    out_gain: f64,
}

fn db_to_gain(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

impl VirtualAmp {
    pub fn new(config: VirtualAmpConfig) -> Self {
        let fs = config.sample_rate as f64;
        let f_hi = (0.45 * fs).min(12_000.0);
        let tone_cutoff = f_hi * (TONE_CUT_LOW_HZ.min(f_hi) / f_hi).powf(config.tone_cut);
        VirtualAmp {
            config,
            drive: 1.0 + 11.0 * config.volume * config.volume,
            shaper_offset: SHAPER_BIAS.tanh(),
            dc_r: one_pole_coeff(DC_BLOCK_HZ, fs),
            dc_x1: 0.0,
            dc_y1: 0.0,
            bass_gain: db_to_gain(-SHELF_RANGE_DB + 2.0 * SHELF_RANGE_DB * config.bass),
            bass_lp: OnePole::lowpass(BASS_HZ.min(0.45 * fs), fs),
            treble_gain: db_to_gain(-SHELF_RANGE_DB + 2.0 * SHELF_RANGE_DB * config.treble),
            treble_lp: OnePole::lowpass(TREBLE_HZ.min(0.45 * fs), fs),
            tone_lp: OnePole::lowpass(tone_cutoff, fs),
            out_gain: OUTPUT_SCALE * config.master * config.master,
        }
    }

    pub fn config(&self) -> &VirtualAmpConfig {
        &self.config
    }

    pub fn reset(&mut self) {
        *self = VirtualAmp::new(self.config);
    }

    #[inline]
    pub fn tick(&mut self, x: f32) -> f32 {
        let shaped = (self.drive * x as f64 + SHAPER_BIAS).tanh() - self.shaper_offset;
        let dc = shaped - self.dc_x1 + self.dc_r * self.dc_y1;
        self.dc_x1 = shaped;
        self.dc_y1 = dc;
        let low = dc + (self.bass_gain - 1.0) * self.bass_lp.tick(dc);
        let high = low + (self.treble_gain - 1.0) * (low - self.treble_lp.tick(low));
        let toned = self.tone_lp.tick(high);
        (self.out_gain * toned) as f32
    }

    pub fn process(&mut self, input: &[f32]) -> Vec<f32> {
        input.iter().map(|&x| self.tick(x)).collect()
    }
}

/// Processes one segment from a zeroed filter state.
pub fn virtual_amp_process(config: &VirtualAmpConfig, input: &[f32]) -> Vec<f32> {
    VirtualAmp::new(*config).process(input)
}

/// Source material for captures. All clips share the session sample rate
/// and have peak at most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationCorpus {
    pub sample_rate: u32,
    pub clips: Vec<AudioClip>,
}

impl ExcitationCorpus {
    pub fn new(sample_rate: u32, clips: Vec<AudioClip>) -> Result<Self> {
        for (i, c) in clips.iter().enumerate() {
            if c.sample_rate != sample_rate {
                return Err(Error::InvalidArgument(format!(
                    "corpus clip {i} is at {} Hz, expected {sample_rate} Hz",
                    c.sample_rate
                )));
            }
            if c.peak() > 1.0 {
                return Err(Error::InvalidArgument(format!("corpus clip {i} peaks above 1.0")));
            }
        }
        Ok(ExcitationCorpus { sample_rate, clips })
    }

    /// Self-contained generated material: plucked guitar and bass lines,
    /// strummed chords, sine sweeps and noise bursts.
    pub fn synthetic(sample_rate: u32, clip_seconds: f64, clips_per_kind: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = (clip_seconds * sample_rate as f64).round() as usize;
        let fs = sample_rate as f64;
        let mut clips = Vec::new();
        for _ in 0..clips_per_kind {
            clips.push(plucked_line(&mut rng, fs, len, 82.4, 659.3, 1));
            clips.push(plucked_line(&mut rng, fs, len, 41.2, 196.0, 1));
            clips.push(plucked_line(&mut rng, fs, len, 82.4, 392.0, 3));
            clips.push(sine_sweep(&mut rng, fs, len));
            clips.push(noise_bursts(&mut rng, fs, len));
        }
        let clips = clips
            .into_iter()
            .map(|mut s| {
                let peak = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let target = rng.gen_range(0.2..1.0);
                let k = if peak > 0.0 { target / peak } else { 0.0 };
                s.iter_mut().for_each(|v| *v *= k);
                AudioClip::new(sample_rate, s.into_iter().map(|v| (v as f32).clamp(-1.0, 1.0)).collect())
            })
            .collect();
        ExcitationCorpus { sample_rate, clips }
    }

    /// Loads every `.wav` file in `dir` (sorted by name).
    pub fn load_dir(dir: &Path, sample_rate: u32) -> Result<Self> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
            .collect();
        paths.sort();
        let clips = paths.iter().map(|p| read_wav(p)).collect::<Result<Vec<_>>>()?;
        Self::new(sample_rate, clips)
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, c) in self.clips.iter().enumerate() {
            write_wav(&dir.join(format!("clip{i:04}.wav")), self.sample_rate, &c.samples)?;
        }
        Ok(())
    }

    /// A uniformly chosen window of `len` samples from a uniformly chosen
    /// clip among those long enough.
    pub fn draw_segment<R: Rng + ?Sized>(&self, eligible: &[usize], len: usize, rng: &mut R) -> Vec<f32> {
        let clip = &self.clips[eligible[rng.gen_range(0..eligible.len())]];
        let start = rng.gen_range(0..=clip.len() - len);
        clip.samples[start..start + len].to_vec()
    }

    /// Indices of clips that can supply a `len`-sample segment; warns about
    /// the rest.
    pub fn eligible_clips(&self, len: usize) -> Vec<usize> {
        let mut ok = Vec::new();
        for (i, c) in self.clips.iter().enumerate() {
            if c.len() >= len {
                ok.push(i);
            } else {
                warn!("corpus clip {i} has {} samples, shorter than segment length {len}; skipped", c.len());
            }
        }
        ok
    }
}

fn karplus_strong<R: Rng + ?Sized>(rng: &mut R, fs: f64, freq: f64, n: usize, decay: f64) -> Vec<f64> {
    let period = (fs / freq).round().max(2.0) as usize;
    let mut buf: Vec<f64> = (0..period).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = Vec::with_capacity(n);
    let mut idx = 0;
    for _ in 0..n {
        let next = (idx + 1) % period;
        let v = buf[idx];
        buf[idx] = decay * 0.5 * (buf[idx] + buf[next]);
        out.push(v);
        idx = next;
    }
    out
}

fn plucked_line<R: Rng + ?Sized>(rng: &mut R, fs: f64, len: usize, f_lo: f64, f_hi: f64, voices: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    let mut t = 0;
    while t < len {
        let note_len = ((rng.gen_range(0.1..0.5)) * fs) as usize;
        let amp = rng.gen_range(0.3..1.0);
        let root = f_lo * (f_hi / f_lo).powf(rng.gen::<f64>());
        let decay = rng.gen_range(0.996..0.9995);
        for v in 0..voices {
            let ratio = [1.0, 1.498, 2.0, 1.26][v % 4];
            let n = note_len.min(len - t);
            let s = karplus_strong(rng, fs, (root * ratio).min(0.45 * fs), n, decay);
            // Strum offset between voices.
            let off = (v * (0.012 * fs) as usize).min(n);
            for (k, x) in s.iter().take(n - off).enumerate() {
                out[t + off + k] += amp * x / voices as f64;
            }
        }
        t += note_len;
    }
    out
}

fn sine_sweep<R: Rng + ?Sized>(rng: &mut R, fs: f64, len: usize) -> Vec<f64> {
    let f0: f64 = 40.0;
    let f1: f64 = 0.45 * fs;
    let amp = rng.gen_range(0.1..1.0);
    let dur = len as f64 / fs;
    let k = (f1 / f0).ln();
    (0..len)
        .map(|n| {
            let t = n as f64 / fs;
            let phase = 2.0 * PI * f0 * dur / k * ((t / dur * k).exp() - 1.0);
            amp * phase.sin()
        })
        .collect()
}

fn noise_bursts<R: Rng + ?Sized>(rng: &mut R, fs: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    let mut t = 0;
    while t < len {
        let burst = (rng.gen_range(0.05..0.4) * fs) as usize;
        let gap = (rng.gen_range(0.0..0.03) * fs) as usize;
        let amp = rng.gen_range(0.2..0.8);
        for k in 0..burst.min(len - t) {
            let env = (-(k as f64) / burst as f64).exp();
            out[t + k] = amp * env * rng.gen_range(-1.0..1.0);
        }
        t += burst + gap;
    }
    out
}

/// Records one example per session step: a random corpus segment played
/// through the virtual amp at that step's controls.
///
/// Steps are independent (state reset per segment, a per-step random
/// stream), so they are processed in parallel; the result follows session
/// order. All examples come back with [`Split::Unassigned`].
pub fn capture_session(
    session: &Session,
    corpus: &ExcitationCorpus,
    segment_length: usize,
    seed: u64,
) -> Result<Dataset> {
    if segment_length == 0 {
        return Err(Error::InvalidArgument("segment length must be positive".into()));
    }
    let eligible = corpus.eligible_clips(segment_length);
    if eligible.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no corpus clip is at least {segment_length} samples long"
        )));
    }
    let space = &session.header.controls;
    let rate = corpus.sample_rate;
    let examples = session
        .steps
        .par_iter()
        .map(|step| {
            let config = VirtualAmpConfig::from_controls(space, &step.controls, rate)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(step.step as u64);
            let input = corpus.draw_segment(&eligible, segment_length, &mut rng);
            let target = virtual_amp_process(&config, &input);
            Ok(ExampleTriple {
                id: format!("s{:05}", step.step),
                input,
                target,
                controls: step.controls.clone(),
                split: Split::Unassigned,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ds = Dataset::new(rate, segment_length, space.clone());
    for ex in examples {
        ds.push(ex)?;
    }
    Ok(ds)
}

/// Re-runs the amp on every stored input and counts entries whose target
/// differs in any bit. Zero means the capture is consistent.
pub fn verify_capture(dataset: &Dataset) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for ex in &dataset.examples {
        let config = VirtualAmpConfig::from_controls(&dataset.controls, &ex.controls, dataset.sample_rate)?;
        let again = virtual_amp_process(&config, &ex.input);
        let same = again.len() == ex.target.len()
            && again.iter().zip(&ex.target).all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            bad.push(ex.id.clone());
        }
    }
    Ok(bad)
}
