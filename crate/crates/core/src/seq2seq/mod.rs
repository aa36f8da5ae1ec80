//! Attentional encoder-decoder over token sequences: vocabularies, model
//! assembly, training, greedy and beam decoding, and checkpoints.

mod checkpoint;
mod decode;
mod model;
mod train;
mod vocab;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::nn::NnError;

pub use self::checkpoint::{
    from_bytes, load_checkpoint, save_checkpoint, to_bytes, FORMAT_VERSION, MAGIC,
};
pub use self::decode::{
    beam_search, default_max_len, greedy_search, Hypothesis, IdHypothesis, ModelScorer, StepScorer,
};
pub use self::model::{parameter_shapes, DecoderState, HyperParams, Seq2SeqModel};
pub use self::train::{
    evaluate, log_to_jsonl, train, BatchObserver, LogRecord, Optimizer, Pair, Profile, TrainConfig,
    TrainOutcome,
};
pub use self::vocab::{build_vocab, Vocabulary, BOS, EOS, PAD, UNK};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("vocabulary: {0}")]
    Vocabulary(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("configuration: {0}")]
    Config(String),
    #[error("parameter {field}: {message}")]
    Shape { field: String, message: String },
    #[error("checkpoint field {field}: {message}")]
    Checkpoint { field: String, message: String },
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ModelError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ModelError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Vocabularies built from the training pairs.
pub fn vocab_for(pairs: &[Pair]) -> Result<(Vocabulary, Vocabulary), ModelError> {
    build_vocab(pairs.iter().map(|p| (&p.source[..], &p.target[..])))
}
