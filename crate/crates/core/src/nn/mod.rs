//! A small reverse-mode automatic differentiation engine with the pieces a
//! character-level encoder-decoder needs: embeddings, LSTM cells, a
//! bidirectional encoder, bilinear global attention, cross-entropy and SGD.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`).

pub mod gradcheck;
mod graph;
mod layers;
mod optim;
mod scalar;
mod tensor;

pub use self::graph::{Graph, InputGrads, NodeId};
pub use self::layers::{
    bidirectional_encode, global_attention, lstm_cell, Attended, Attention, BiEncoder, Dropout,
    Encoded, Init, LstmLayer, LstmState,
};
pub(crate) use self::layers::{lookup, maybe_dropout};
pub use self::optim::{adam_step, grad_norm, sgd_step, AdamState};
pub use self::scalar::{axpy, dot, log_softmax, matvec, matvec_t, sigmoid, softmax, Scalar};
pub use self::tensor::{Gradients, ParamId, ParameterSet, Tensor};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("empty input sequence")]
    EmptySequence,
}
