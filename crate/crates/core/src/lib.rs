//! Exact maximum loneliness for integer runner speeds.
//!
//! The loneliness of speeds `v_1, ..., v_n` is `max_t min_i ||t v_i||`, where
//! `||x||` is the distance to the nearest integer. This crate computes it
//! exactly, classifies the result against the floor `1/n` and the values
//! `s / (n s + k)`, checks lemma thresholds and common-factor statements for
//! four runners, and runs resumable exhaustive scans over bounded tuples.

pub mod analysis;
pub mod census;
pub mod engine;
pub mod error;
pub mod rational;
pub mod scan;
pub mod shifted;
pub mod spectrum;

pub use census::{merge_census, CensusSummary};
pub use engine::{
    candidate_times, compute_ml, compute_ml_with_floor, oracle_ml, prejump_invariant, LonelinessResult, Mode,
    SpeedSet, Witness,
};
pub use error::{ArithError, Error, Result};
pub use rational::{circle_norm, CircleDistance, Rational};
pub use scan::{enumerate_primitive, run_scan, ScanConfig, ScanParams, ScanRecord, Shard};
pub use shifted::{shifted_ml, shifted_oracle, ShiftedInstance};
pub use spectrum::{classify, spectrum_value, SpectrumClass, SpectrumKind};
