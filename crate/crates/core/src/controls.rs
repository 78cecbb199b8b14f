//! Control-surface description shared by planning, capture, training and
//! inference.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlKind {
    Continuous,
    /// An `m`-position switch, stored as the levels `{0, 1/(m-1), ..., 1}`.
    Discrete { levels: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ControlKind,
}

impl ControlSpec {
    pub fn continuous(name: &str) -> Self {
        ControlSpec {
            name: name.to_string(),
            kind: ControlKind::Continuous,
        }
    }

    pub fn discrete(name: &str, levels: u32) -> Self {
        ControlSpec {
            name: name.to_string(),
            kind: ControlKind::Discrete { levels },
        }
    }

    /// Snaps a normalized value onto this control's grid.
    pub fn quantize(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        match self.kind {
            ControlKind::Continuous => v,
            ControlKind::Discrete { levels } => {
                let steps = (levels - 1) as f64;
                (v * steps).round() / steps
            }
        }
    }

    pub fn accepts(&self, v: f64) -> bool {
        if !(0.0..=1.0).contains(&v) {
            return false;
        }
        match self.kind {
            ControlKind::Continuous => true,
            ControlKind::Discrete { .. } => (self.quantize(v) - v).abs() < 1e-12,
        }
    }
}

/// The set of controls a device exposes, in conditioning-vector order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlSpace {
    controls: Vec<ControlSpec>,
}

/// Knob names of the virtual amplifier, in conditioning order.
pub const AMP_KNOBS: [&str; 5] = ["volume", "bass", "treble", "tone_cut", "master"];

impl ControlSpace {
    pub fn new(controls: Vec<ControlSpec>) -> Result<Self> {
        for (k, c) in controls.iter().enumerate() {
            if c.name.is_empty() {
                return Err(Error::InvalidArgument(format!("control {k} has an empty name")));
            }
            if controls[..k].iter().any(|o| o.name == c.name) {
                return Err(Error::InvalidArgument(format!("duplicate control name {:?}", c.name)));
            }
            if let ControlKind::Discrete { levels } = c.kind {
                if levels < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "switch {:?} needs at least 2 positions, got {levels}",
                        c.name
                    )));
                }
            }
        }
        Ok(ControlSpace { controls })
    }

    /// A space with no controls (a fixed-setting capture).
    pub fn empty() -> Self {
        ControlSpace { controls: Vec::new() }
    }

    /// The five continuous knobs of the virtual amplifier.
    pub fn amp_knobs() -> Self {
        ControlSpace {
            controls: AMP_KNOBS.iter().map(|n| ControlSpec::continuous(n)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn controls(&self) -> &[ControlSpec] {
        &self.controls
    }

    pub fn names(&self) -> Vec<String> {
        self.controls.iter().map(|c| c.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.controls.iter().position(|c| c.name == name)
    }

    pub fn validate(&self, v: &ControlVector) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} control values, got {}",
                self.len(),
                v.len()
            )));
        }
        for (spec, &x) in self.controls.iter().zip(v.values()) {
            if !spec.accepts(x) {
                return Err(Error::InvalidArgument(format!(
                    "control {:?} value {x} is outside its range",
                    spec.name
                )));
            }
        }
        Ok(())
    }
}

/// Parses `name[:levels],...`, e.g. `volume,bass,bright:2`. `none` or an
/// empty string gives the empty space.
impl FromStr for ControlSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(ControlSpace::empty());
        }
        let mut controls = Vec::new();
        for item in s.split(',') {
            let item = item.trim();
            let spec = match item.split_once(':') {
                None => ControlSpec::continuous(item),
                Some((name, levels)) => {
                    let levels: u32 = levels.trim().parse().map_err(|_| {
                        Error::InvalidArgument(format!("bad switch level count in {item:?}"))
                    })?;
                    ControlSpec::discrete(name.trim(), levels)
                }
            };
            controls.push(spec);
        }
        ControlSpace::new(controls)
    }
}

impl fmt::Display for ControlSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .controls
            .iter()
            .map(|c| match c.kind {
                ControlKind::Continuous => c.name.clone(),
                ControlKind::Discrete { levels } => format!("{}:{levels}", c.name),
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Normalized control positions, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct ControlVector(Vec<f64>);

impl ControlVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "control value {v} is outside [0, 1]"
            )));
        }
        Ok(ControlVector(values))
    }

    pub fn zeros(k: usize) -> Self {
        ControlVector(vec![0.0; k])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l1_distance(&self, other: &ControlVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn midpoint(&self, other: &ControlVector) -> ControlVector {
        ControlVector(self.0.iter().zip(&other.0).map(|(a, b)| 0.5 * (a + b)).collect())
    }

    /// Clamps into `[0, 1]`; returns whether anything changed.
    pub fn clamp_in_place(&mut self) -> bool {
        let mut changed = false;
        for v in self.0.iter_mut() {
            let c = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
            changed |= c != *v || v.is_nan();
            *v = c;
        }
        changed
    }

    pub fn as_f32(&self) -> Vec<f32> {
        self.0.iter().map(|&v| v as f32).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_spec() {
        let s: ControlSpace = "gain, bright:2,mode:3".parse().unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.controls()[2].kind, ControlKind::Discrete { levels: 3 });
        assert_eq!(s.to_string(), "gain,bright:2,mode:3");
        assert!("none".parse::<ControlSpace>().unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!("a,a".parse::<ControlSpace>().is_err());
        assert!("sw:1".parse::<ControlSpace>().is_err());
        assert!("sw:x".parse::<ControlSpace>().is_err());
        assert!("a,,b".parse::<ControlSpace>().is_err());
    }

    #[test]
    fn switch_levels_are_uniform() {
        let c = ControlSpec::discrete("mode", 3);
        assert_eq!(c.quantize(0.2), 0.0);
        assert_eq!(c.quantize(0.4), 0.5);
        assert_eq!(c.quantize(0.9), 1.0);
        assert!(c.accepts(0.5));
        assert!(!c.accepts(0.3));
    }

    #[test]
    fn vector_range_is_enforced() {
        assert!(ControlVector::new(vec![0.0, 1.3]).is_err());
        let mut v = ControlVector(vec![1.2, -0.1, 0.5]);
        assert!(v.clamp_in_place());
        assert_eq!(v.values(), &[1.0, 0.0, 0.5]);
        assert!(!v.clamp_in_place());
    }
}
