//! Multi-task hate-speech classification toolkit.
//!
//! One shared text encoder is trained jointly against several datasets, each
//! with its own classifier head. Two schemes classify datasets never seen in
//! training: a fresh binary head trained on the frozen encoder (NCH), and a
//! majority vote over the per-dataset heads binarized through their own
//! class mappings (MV). The crate also ships the surrounding machinery:
//! deterministic text normalization, corpus vocabularies, a small
//! reverse-mode autodiff engine with Adam, stratified splitting and
//! oversampling, crowd-label aggregation with two-stage tie-breaking,
//! Krippendorff's alpha, vocabulary-overlap similarity, and posting-behavior
//! time-series statistics (Pearson correlation, Granger causality).
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `hatemtl` binary for batch entry points.

pub mod analysis;
pub mod annotation;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod numerics;
pub mod synth;
pub mod textnorm;
pub mod tokenizer;
pub mod train;

pub use error::{Error, Result};
