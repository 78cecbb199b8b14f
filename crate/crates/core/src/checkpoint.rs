//! Versioned model checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! | bytes            | content                                        |
//! |------------------|------------------------------------------------|
//! | 8                | magic `AMPNETCK`                               |
//! | 4 (u32)          | format version, currently 1                    |
//! | 4 (u32)          | header length `n`                              |
//! | n                | UTF-8 JSON [`ModelDescriptor`]                 |
//! | 4 * 4H * D (f32) | LSTM input weights, column-major (see below)   |
//! | 4 * 4H * H (f32) | LSTM recurrent weights, column-major           |
//! | 4 * 4H (f32)     | LSTM biases                                    |
//! | 4 * H (f32)      | output head weights                            |
//! | 4 (f32)          | output head bias                               |
//!
//! Gate rows are ordered input, forget, cell candidate, output. "Column-major"
//! means the `4H` weights attached to one input (or hidden) channel are
//! contiguous, channels in order: audio first, then the controls in
//! descriptor order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controls::ControlSpace;
use crate::error::{Error, Result};
use crate::nn::{DenseParams, LstmModel, LstmParams};

pub const MAGIC: &[u8; 8] = b"AMPNETCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub hidden_size: usize,
    /// `1 + control_count`.
    pub input_size: usize,
    pub control_count: usize,
    pub controls: ControlSpace,
    pub sample_rate: u32,
    /// Leading samples of each segment excluded from losses.
    pub warmup_samples: usize,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default)]
    pub best_validation_esr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub descriptor: ModelDescriptor,
    pub model: LstmModel<f32>,
}

impl Checkpoint {
    pub fn new(descriptor: ModelDescriptor, model: LstmModel<f32>) -> Result<Self> {
        let d = &descriptor;
        if d.control_count != d.controls.len() || d.input_size != 1 + d.control_count {
            return Err(Error::Checkpoint(format!(
                "inconsistent descriptor: input_size {} with {} controls",
                d.input_size,
                d.controls.len()
            )));
        }
        if model.hidden_size() != d.hidden_size || model.input_size() != d.input_size {
            return Err(Error::Checkpoint(format!(
                "model is {}x{} but descriptor says {}x{}",
                model.hidden_size(),
                model.input_size(),
                d.hidden_size,
                d.input_size
            )));
        }
        Ok(Checkpoint { descriptor, model })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.descriptor).expect("descriptor serializes");
        let m = &self.model;
        let mut out = Vec::with_capacity(16 + header.len() + 4 * (m.lstm.input_weights.len() + m.lstm.recurrent_weights.len() + 1024));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        let blocks: [&[f32]; 5] = [
            &m.lstm.input_weights,
            &m.lstm.recurrent_weights,
            &m.lstm.biases,
            &m.head.weights,
            std::slice::from_ref(&m.head.bias),
        ];
        for b in blocks {
            for v in b {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Checkpoint(m.to_string());
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("not a checkpoint file (bad magic)"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {version} (this build reads {FORMAT_VERSION})"
            )));
        }
        let hlen = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let body = bytes.get(16..16 + hlen).ok_or_else(|| bad("truncated header"))?;
        let descriptor: ModelDescriptor =
            serde_json::from_slice(body).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
        let (h, d) = (descriptor.hidden_size, descriptor.input_size);
        if h == 0 || d == 0 {
            return Err(bad("zero-sized model"));
        }
        let mut floats = bytes[16 + hlen..].chunks_exact(4);
        if floats.remainder().len() != 0 {
            return Err(bad("parameter section is not a whole number of f32 values"));
        }
        let mut take = |n: usize| -> Result<Vec<f32>> {
            let v: Vec<f32> = floats
                .by_ref()
                .take(n)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if v.len() != n {
                return Err(bad("truncated parameter data"));
            }
            Ok(v)
        };
        let iw = take(4 * h * d)?;
        let rw = take(4 * h * h)?;
        let b = take(4 * h)?;
        let hw = take(h)?;
        let hb = take(1)?[0];
        if floats.next().is_some() {
            return Err(bad("trailing data after parameters"));
        }
        let model = LstmModel {
            lstm: LstmParams::from_parts(h, d, iw, rw, b)?,
            head: DenseParams { weights: hw, bias: hb },
        };
        Checkpoint::new(descriptor, model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Checkpoint(m) => Error::Checkpoint(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
