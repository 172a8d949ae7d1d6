//! Outcome-association statistics and cross-source concordance.

mod concordance;
mod hypothesis;
pub mod special;

pub use concordance::{concordance, rank_features, ConcordanceReport, PairedEffect, RankedFeature};
pub use hypothesis::{cohens_d, pearson_r, t_test, t_test_two_sample, Correlation, TTest, TTestKind};
