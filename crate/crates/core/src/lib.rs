//! Controllable neural amplifier modeling.
//!
//! The crate covers the whole pipeline: planning a measurement session over
//! a device's controls ([`plan`]), capturing a conditioned dataset from the
//! built-in virtual amplifier ([`rig`], [`dataset`]), training a conditioned
//! LSTM ([`train`], [`nn`]) and running it as a streaming processor
//! ([`engine`]).

pub mod audio;
pub mod checkpoint;
pub mod controls;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod nn;
pub mod plan;
pub mod rig;
pub mod train;

pub use checkpoint::{Checkpoint, ModelDescriptor};
pub use controls::{ControlKind, ControlSpace, ControlSpec, ControlVector};
pub use dataset::{Dataset, ExampleTriple, Split};
pub use engine::{CabinetIR, StreamSession};
pub use error::{Error, Result};
pub use train::{LossKind, TrainConfig, TrainReport};
