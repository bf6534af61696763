//! Noiseless adaptive group testing when the number of infections is
//! unknown.
//!
//! The crate provides the diagonal splitting algorithm, a hybrid that
//! estimates the infection count from the first diagonal stage and hands
//! over to Hwang's generalized binary splitting, the classical binary
//! splitting baselines, closed-form expectations for the diagonal scheme,
//! and a reproducible sweep harness.

pub mod algorithms;
pub mod analytics;
pub mod combinatorics;
mod error;
pub mod instance;
pub mod ledger;
pub mod likelihood;
pub mod sim;
pub mod tree;

pub use algorithms::{
    drive, run, run_bsa, run_dsa, run_hgbsa, run_hybrid, Adaptive, Algorithm, AlgorithmConfig,
    AlgorithmKind,
    CountKnowledge, RunResult,
};
pub use error::{Error, Result};
pub use instance::{InfectionInstance, Model};
pub use ledger::{Diagnosis, Oracle, Pool, SimulatedOracle, Status, TestLedger};
