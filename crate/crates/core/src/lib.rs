//! Throughput-optimal mode selection for a buffer-aided relay link.
//!
//! A source reaches a destination only through a relay that holds decoded
//! packets in an unbounded buffer. Each slot the relay picks one of four
//! modes: receive on the first hop, deliver on the second hop, do both at
//! once in full-duplex (paying a self-interference penalty on the first
//! hop), or stay silent. This crate provides:
//!
//! * [`channel`] — fading model, per-slot outage regions, and their
//!   closed-form probabilities;
//! * [`policy`] — the five-case randomized policy that maximizes long-run
//!   delivered rate, its closed-form throughput, and reference baselines;
//! * [`simplex`] / [`lp`] — an independent linear-programming oracle and a
//!   dual certificate that cross-check the closed form;
//! * [`sim`] — a slotted Monte Carlo simulator with ideal and strict
//!   buffer accounting;
//! * [`sweep`] — named parameter presets, axis sweeps with per-point
//!   simulation, and machine-readable reports;
//! * [`verify`] — a batch driver that replays all of the above against each
//!   other, with deliberate fault injections to prove the checks bite.

use thiserror::Error as ThisError;

pub mod channel;
pub mod lp;
pub mod policy;
pub mod sim;
pub mod simplex;
pub mod sweep;
pub mod verify;

pub use channel::{
    classify, db_to_linear, region_probabilities, sample_gains, sinr, thresholds, Mode,
    OutageThresholds, Region, RegionProbabilities, Rsi, SlotSinrs, SystemParams,
};
pub use lp::{
    case_alpha0, certify, oracle_vs_analytic, solve_allocation, solve_lp, Certification,
    KktCertificate, LpSolution, ModeMask, OracleComparison, Violation,
};
pub use policy::{
    baseline_policy, classify_case, closed_form_throughput, fd_preferred_throughput,
    hd_optimal_throughput, optimal_policy, Baseline, BaselineKind, OptimalPolicy, Policy,
    StatCase, ThroughputReport,
};
pub use sim::{queue_growth_probe, simulate, BufferMode, GrowthProbe, SimConfig, SimReport};
pub use sweep::{preset, preset_names, run_sweep, Axis, PolicyChoice, RunConfig, SweepReport, SweepRow};
pub use verify::{run_verification, Injection, VerifyConfig, VerifyOutcome};

/// Unified error type for parameter validation, solving, and I/O.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("allocation solver failed: {0}")]
    Lp(String),
    #[error("report parse failed: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
