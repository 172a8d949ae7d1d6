//! Gesture sequence analytics for surgical video.
//!
//! The crate turns frame-level gesture probabilities into gesture sequences,
//! engineers sequence features from them, and runs the evaluation and
//! outcome-association statistics used to compare two gesture sources:
//!
//! * [`gesture`]: domain types and the plain-text file formats
//! * [`segmentation`]: kernel-cost PELT aggregation of probability streams
//! * [`features`]: the engineered feature families
//! * [`metrics`]: frame- and video-level ROC AUC
//! * [`stats`]: t-tests, effect sizes, ranking and cross-source concordance
//! * [`cv`]: stratified cross-validation with a pluggable classifier
//! * [`synthetic`]: seeded generators standing in for annotated cohorts

pub mod cv;
pub mod error;
pub mod features;
pub mod gesture;
pub mod matrix;
pub mod metrics;
pub mod segmentation;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use gesture::{
    FrameProbabilityStream, Gesture, GestureAlphabet, GestureEvent, GestureSequence, Outcome,
    OutcomeTable,
};
