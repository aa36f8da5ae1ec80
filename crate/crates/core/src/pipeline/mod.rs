//! End-to-end orchestration (extract, train, eval) and the FST-first,
//! neural-fallback query layer.

mod commands;
mod config;
mod fallback;
pub mod toy;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dataset::DatasetError;
use crate::eval::EvalError;
use crate::fst::FstError;
use crate::seq2seq::ModelError;

pub use self::commands::{
    evaluate_task, extract, read_analyzer, train_task, write_json, ExtractManifest, SplitCounts,
    TrainSummary,
};
pub use self::config::{PipelineConfig, CONFIG_KEYS};
pub use self::fallback::{
    fallback_analyze, fallback_generate, fallback_lemmatize, parse_analysis, serve, FallbackResult,
    Provenance, ServeRecord, Session,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Fst(#[from] FstError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 usage, 2 I/O, 3 data or contract violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => EXIT_USAGE,
            PipelineError::Io { .. }
            | PipelineError::Dataset(DatasetError::Io { .. })
            | PipelineError::Model(ModelError::Io { .. }) => EXIT_IO,
            _ => EXIT_DATA,
        }
    }
}
