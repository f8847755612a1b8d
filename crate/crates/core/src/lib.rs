//! Context-conditioned review generation and detection.
//!
//! The pipeline runs in stages:
//!
//! 1. [`corpus`] turns review records into cleaned (context, review) pairs
//!    and a shared vocabulary.
//! 2. [`lm`] scores next tokens given a context and prefix; the bundled
//!    model is an interpolated absolute-discounting n-gram model.
//! 3. [`decoder`] runs greedy decoding over penalty-augmented scores.
//! 4. [`obfuscator`] re-introduces spelling mistakes and keyboard typos.
//! 5. [`detector`] extracts stylometric features and trains a boosted
//!    ensemble of shallow trees.
//! 6. [`harness`] wires these into reproducible experiments.

pub mod corpus;
pub mod decoder;
pub mod detector;
pub mod error;
pub mod harness;
pub mod lm;
pub mod obfuscator;
pub mod rng;

pub use error::{Error, Result};
