//! Library half of `sparc-tool`: report bundle I/O, the `run` pipeline and
//! `inspect`.

pub mod bundle;
pub mod inspect;
pub mod pipeline;

pub use pipeline::{run_pipeline, Overrides, PipelineConfig, StageError};
