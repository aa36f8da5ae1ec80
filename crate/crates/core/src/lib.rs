//! Morphological analysis, lemmatization and generation models trained on
//! data extracted from finite-state transducers.
//!
//! [`fst`] reads and queries AT&T transducers, [`dataset`] turns an analyzer
//! and a lexicon into lemma-disjoint task datasets, [`nn`] and [`seq2seq`]
//! train character-level attention models, [`eval`] scores them and
//! [`pipeline`] chains everything together with an FST-first query layer.

pub mod dataset;
pub mod eval;
pub mod fst;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod seq2seq;

/// Double-precision model, the type written to and read from checkpoints.
pub type Model = seq2seq::Seq2SeqModel<f64>;
/// Single-precision model for inference.
pub type Model32 = seq2seq::Seq2SeqModel<f32>;
/// Top-level error carrying the process exit code.
pub type Error = pipeline::PipelineError;
