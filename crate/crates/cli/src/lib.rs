//! Pipeline orchestration and synthetic-trial generation on top of the
//! suit-load core library.

pub mod pipeline;
pub mod synth;

pub use pipeline::{run_pipeline, PipelineSummary};
pub use synth::{generate_synthetic_trial, SynthOptions, SynthTrial};
