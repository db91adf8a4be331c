//! Semi-supervised fake-news classification.
//!
//! The pipeline ingests social-media news records, splits them into
//! train/validation/test, folds the training split so that only fold 1
//! exposes labels, and then self-trains an LSTM + self-attention network:
//! each round pseudo-labels the next fold at a confidence threshold,
//! absorbs the confident records, and retrains from scratch. Classical
//! baselines (logistic regression, multinomial naive Bayes) and the shared
//! metrics kernel live alongside for comparison.

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod nn;
pub mod selftrain;
pub mod synth;
pub mod sentiment;
pub mod text;
pub mod tensor;

pub use error::{Error, Result};
