//! Conditioned training examples `(input, target, controls)` and their
//! on-disk form.
//!
//! A dataset directory holds `manifest.jsonl` and an `audio/` folder of mono
//! float WAV files. The manifest's first line is a header object:
//!
//! ```text
//! {"format":"ampnet-dataset","version":1,"sample_rate":8000,"segment_length":4000,
//!  "controls":[{"name":"volume","kind":"continuous"}, ...]}
//! ```
//!
//! and every following line is one entry:
//!
//! ```text
//! {"id":"ex00000","input":"audio/ex00000.in.wav","target":"audio/ex00000.out.wav",
//!  "controls":[0.25,...],"split":"train"}
//! ```
//!
//! Paths are relative to the manifest. `split` is one of `train`,
//! `validation` or `unassigned`. Entries can be appended while a capture is
//! running.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, write_wav};
use crate::controls::{ControlSpace, ControlVector};
use crate::error::{Error, Result};

pub const MANIFEST_FORMAT: &str = "ampnet-dataset";
pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    #[default]
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub format: String,
    pub version: u32,
    pub sample_rate: u32,
    pub segment_length: usize,
    pub controls: ControlSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub input: String,
    pub target: String,
    pub controls: ControlVector,
    #[serde(default)]
    pub split: Split,
}

/// Parsed manifest without the audio.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub header: ManifestHeader,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleTriple {
    pub id: String,
    pub input: Vec<f32>,
    pub target: Vec<f32>,
    pub controls: ControlVector,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sample_rate: u32,
    pub segment_length: usize,
    pub controls: ControlSpace,
    pub examples: Vec<ExampleTriple>,
}

impl ManifestHeader {
    pub fn new(sample_rate: u32, segment_length: usize, controls: ControlSpace) -> Self {
        ManifestHeader {
            format: MANIFEST_FORMAT.to_string(),
            version: MANIFEST_VERSION,
            sample_rate,
            segment_length,
            controls,
        }
    }
}

pub fn input_file_name(id: &str) -> String {
    format!("audio/{id}.in.wav")
}

pub fn target_file_name(id: &str) -> String {
    format!("audio/{id}.out.wav")
}

/// Appends entries (and their audio) to a dataset directory.
pub struct ManifestWriter {
    dir: PathBuf,
    header: ManifestHeader,
    out: BufWriter<File>,
}

impl ManifestWriter {
    pub fn create(dir: &Path, header: ManifestHeader) -> Result<Self> {
        fs::create_dir_all(dir.join("audio")).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(MANIFEST_FILE);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        let line = serde_json::to_string(&header).expect("header serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(&path, e))?;
        Ok(ManifestWriter {
            dir: dir.to_path_buf(),
            header,
            out,
        })
    }

    pub fn append(&mut self, example: &ExampleTriple) -> Result<()> {
        check_geometry(&self.header, example)?;
        let entry = ManifestEntry {
            id: example.id.clone(),
            input: input_file_name(&example.id),
            target: target_file_name(&example.id),
            controls: example.controls.clone(),
            split: example.split,
        };
        write_wav(&self.dir.join(&entry.input), self.header.sample_rate, &example.input)?;
        write_wav(&self.dir.join(&entry.target), self.header.sample_rate, &example.target)?;
        let line = serde_json::to_string(&entry).expect("entry serializes");
        let path = self.dir.join(MANIFEST_FILE);
        writeln!(self.out, "{line}").map_err(|e| Error::io(&path, e))?;
        self.out.flush().map_err(|e| Error::io(&path, e))
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join(MANIFEST_FILE)
    }
}

fn check_geometry(header: &ManifestHeader, ex: &ExampleTriple) -> Result<()> {
    if ex.input.len() != header.segment_length || ex.target.len() != header.segment_length {
        return Err(Error::Manifest(format!(
            "{}: input/target lengths {}/{} do not match segment length {}",
            ex.id,
            ex.input.len(),
            ex.target.len(),
            header.segment_length
        )));
    }
    header
        .controls
        .validate(&ex.controls)
        .map_err(|e| Error::Manifest(format!("{}: {e}", ex.id)))
}

impl DatasetManifest {
    /// Parses and validates the manifest text; audio is not touched.
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::format(path, "empty manifest"))?
            .map_err(|e| Error::io(path, e))?;
        let header: ManifestHeader = serde_json::from_str(&first)
            .map_err(|e| Error::format(path, format!("bad header: {e}")))?;
        if header.format != MANIFEST_FORMAT {
            return Err(Error::format(path, format!("unknown format {:?}", header.format)));
        }
        if header.version != MANIFEST_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported manifest version {}", header.version),
            ));
        }
        if header.sample_rate == 0 || header.segment_length == 0 {
            return Err(Error::Manifest("sample rate and segment length must be positive".into()));
        }
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ManifestEntry = serde_json::from_str(&line)
                .map_err(|e| Error::format(path, format!("line {}: {e}", n + 2)))?;
            header
                .controls
                .validate(&entry.controls)
                .map_err(|e| Error::Manifest(format!("{}: {e}", entry.id)))?;
            if !seen.insert(entry.id.clone()) {
                return Err(Error::Manifest(format!("duplicate id {:?}", entry.id)));
            }
            entries.push(entry);
        }
        Ok(DatasetManifest { header, entries })
    }
}

impl Dataset {
    pub fn new(sample_rate: u32, segment_length: usize, controls: ControlSpace) -> Self {
        Dataset {
            sample_rate,
            segment_length,
            controls,
            examples: Vec::new(),
        }
    }

    pub fn header(&self) -> ManifestHeader {
        ManifestHeader::new(self.sample_rate, self.segment_length, self.controls.clone())
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn push(&mut self, example: ExampleTriple) -> Result<()> {
        check_geometry(&self.header(), &example)?;
        if self.examples.iter().any(|e| e.id == example.id) {
            return Err(Error::Manifest(format!("duplicate id {:?}", example.id)));
        }
        self.examples.push(example);
        Ok(())
    }

    /// Writes the manifest and audio under `dir`; returns the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let mut w = ManifestWriter::create(dir, self.header())?;
        for ex in &self.examples {
            w.append(ex)?;
        }
        Ok(w.manifest_path())
    }

    /// Loads a manifest and all referenced audio, checking geometry.
    pub fn read(manifest_path: &Path) -> Result<Self> {
        let manifest = DatasetManifest::read(manifest_path)?;
        let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        let h = &manifest.header;
        let mut ds = Dataset::new(h.sample_rate, h.segment_length, h.controls.clone());
        for entry in manifest.entries {
            let load = |rel: &str| -> Result<Vec<f32>> {
                let p = base.join(rel);
                if !p.exists() {
                    return Err(Error::Manifest(format!(
                        "{}: referenced audio file {} does not exist",
                        entry.id,
                        p.display()
                    )));
                }
                let clip = read_wav(&p)?;
                if clip.sample_rate != h.sample_rate {
                    return Err(Error::Manifest(format!(
                        "{}: {} has sample rate {}, manifest declares {}",
                        entry.id,
                        p.display(),
                        clip.sample_rate,
                        h.sample_rate
                    )));
                }
                Ok(clip.samples)
            };
            let input = load(&entry.input)?;
            let target = load(&entry.target)?;
            ds.push(ExampleTriple {
                id: entry.id.clone(),
                input,
                target,
                controls: entry.controls,
                split: entry.split,
            })?;
        }
        Ok(ds)
    }

    /// Seeded random partition into `train_count` training and `val_count`
    /// validation examples; the rest become unassigned.
    pub fn random_split(&mut self, train_count: usize, val_count: usize, seed: u64) -> Result<()> {
        let n = self.examples.len();
        if train_count + val_count > n {
            return Err(Error::InvalidArgument(format!(
                "split {train_count} + {val_count} exceeds {n} examples"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        for (rank, &i) in order.iter().enumerate() {
            self.examples[i].split = if rank < train_count {
                Split::Train
            } else if rank < train_count + val_count {
                Split::Validation
            } else {
                Split::Unassigned
            };
        }
        Ok(())
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.examples.len())
            .filter(|&i| self.examples[i].split == split)
            .collect()
    }

    pub fn minibatches(&self, batch_size: usize, seed: u64) -> Result<Minibatches<'_>> {
        Minibatches::new(self, batch_size, seed)
    }
}

/// One minibatch: `inputs`/`targets` are `B x S`, `controls` is `B x K`,
/// all row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub epoch: usize,
    pub indices: Vec<usize>,
    pub ids: Vec<String>,
    pub inputs: Vec<f32>,
    pub targets: Vec<f32>,
    pub controls: Vec<f32>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Endless stream of minibatches over the training split. Each epoch is a
/// fresh seeded shuffle; the last batch of an epoch may be short.
pub struct Minibatches<'a> {
    dataset: &'a Dataset,
    train: Vec<usize>,
    order: Vec<usize>,
    pos: usize,
    epoch: usize,
    batch_size: usize,
    rng: ChaCha8Rng,
}

impl<'a> Minibatches<'a> {
    pub fn new(dataset: &'a Dataset, batch_size: usize, seed: u64) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        let train = dataset.indices(Split::Train);
        if train.is_empty() {
            return Err(Error::InvalidArgument("training split is empty".into()));
        }
        let mut it = Minibatches {
            dataset,
            order: Vec::new(),
            train,
            pos: 0,
            epoch: 0,
            batch_size,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        it.reshuffle();
        Ok(it)
    }

    fn reshuffle(&mut self) {
        self.order.clone_from(&self.train);
        self.order.shuffle(&mut self.rng);
        self.pos = 0;
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.train.len().div_ceil(self.batch_size)
    }

    /// Index-only variant of `next`, for callers that read examples in place.
    pub fn next_indices(&mut self) -> (usize, Vec<usize>) {
        if self.pos >= self.order.len() {
            self.epoch += 1;
            self.reshuffle();
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let idx = self.order[self.pos..end].to_vec();
        self.pos = end;
        (self.epoch, idx)
    }
}

impl Iterator for Minibatches<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        let (epoch, indices) = self.next_indices();
        let ds = self.dataset;
        let mut b = Batch {
            epoch,
            ids: Vec::with_capacity(indices.len()),
            inputs: Vec::with_capacity(indices.len() * ds.segment_length),
            targets: Vec::with_capacity(indices.len() * ds.segment_length),
            controls: Vec::with_capacity(indices.len() * ds.controls.len()),
            indices,
        };
        for &i in &b.indices {
            let ex = &ds.examples[i];
            b.ids.push(ex.id.clone());
            b.inputs.extend_from_slice(&ex.input);
            b.targets.extend_from_slice(&ex.target);
            b.controls.extend(ex.controls.values().iter().map(|&v| v as f32));
        }
        Some(b)
    }
}

/// Builds per-step model inputs `[x_t, c_1, ..., c_K]`, repeating the
/// controls at every step.
pub fn condition_concat(input: &[f32], controls: &[f32]) -> Vec<f32> {
    let mut out = Vec::new();
    condition_concat_into(input, controls, &mut out);
    out
}

pub fn condition_concat_into(input: &[f32], controls: &[f32], out: &mut Vec<f32>) {
    out.clear();
    out.reserve(input.len() * (1 + controls.len()));
    for &x in input {
        out.push(x);
        out.extend_from_slice(controls);
    }
}
