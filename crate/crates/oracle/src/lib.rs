//! Reference implementations written straight from the definitions, with no
//! attempt at speed and no code shared with `gestureflow`. Test suites compare
//! the library against these.

#![allow(clippy::needless_range_loop)]

pub mod auc;
pub mod features;
pub mod partition;
pub mod random;
pub mod stats;
