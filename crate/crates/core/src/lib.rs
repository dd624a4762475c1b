//! Seismic infrasound rumble detection: acquisition-chain simulation,
//! spectrogram enhancement, feature extraction and lightweight classifiers.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dsp;
pub mod enhancement;
pub mod error;
pub mod features;
pub mod frontend;
pub mod pipeline;
pub mod series;
pub mod synth;

pub use classify::{Dataset, EvalReport, LinearModel, Model, TreeModel};
pub use dsp::{Scale, Spectrogram};
pub use enhancement::CoherenceMap;
pub use error::{Error, Result};
pub use features::{FeatureKind, FeatureVector, Label, MelFilterBank};
pub use frontend::FrontEndConfig;
pub use pipeline::PipelineConfig;
pub use series::{TimeSeries, Unit};
