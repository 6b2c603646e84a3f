//! Cross-verification driver.
//!
//! For a batch of region distributions — random simplex draws, draws pinned
//! to the four case boundaries, and the distributions induced by every
//! named preset — this runs three independent checks on the policy engine:
//!
//! 1. the closed-form throughput must match the LP oracle to `1e-9`;
//! 2. the closed-form policy must pass the dual certificate at its case's
//!    balance price;
//! 3. the closed-form policy's buffer balance residual must vanish.
//!
//! An optional injection corrupts the policy before checks 2 and 3 run,
//! demonstrating that the harness actually has teeth: a corrupted policy
//! must produce at least one recorded failure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{region_probabilities, Mode, Region, RegionProbabilities};
use crate::lp::{
    boundary_region_probabilities, case_alpha0, certify, oracle_vs_analytic,
    random_region_probabilities,
};
use crate::policy::{optimal_policy, Policy};
use crate::sweep::{preset, preset_names};
use crate::Error;

/// Closed form and LP oracle must agree to this absolute gap (bits/slot).
pub const GAP_TOL: f64 = 1e-9;

/// Deliberate corruptions of the closed-form policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injection {
    /// Move R2's receive probability onto full-duplex, which cannot work
    /// there. Caught by the certificate and by the balance residual.
    FullDuplexInR2,
    /// Make R3 receive, although its first hop is in outage. Every R3
    /// selection value is zero, so only the balance residual can catch it.
    ReceiveInR3,
}

impl std::fmt::Display for Injection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Injection::FullDuplexInR2 => "full-duplex-in-r2",
            Injection::ReceiveInR3 => "receive-in-r3",
        })
    }
}

impl std::str::FromStr for Injection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "full-duplex-in-r2" => Ok(Injection::FullDuplexInR2),
            "receive-in-r3" => Ok(Injection::ReceiveInR3),
            other => Err(Error::InvalidConfig(format!(
                "unknown injection {other:?} (expected full-duplex-in-r2 or receive-in-r3)"
            ))),
        }
    }
}

fn apply_injection(injection: Injection, policy: &Policy) -> Policy {
    let mut rows = *policy.rows();
    match injection {
        Injection::FullDuplexInR2 => {
            let k = Region::R2.index();
            rows[k][Mode::FullDuplex.index()] += rows[k][Mode::HdReceive.index()];
            rows[k][Mode::HdReceive.index()] = 0.0;
        }
        Injection::ReceiveInR3 => {
            rows[Region::R3.index()] = [1.0, 0.0, 0.0, 0.0];
        }
    }
    Policy::new(rows).expect("injections keep rows row-stochastic")
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Random simplex draws.
    pub samples: usize,
    /// Draws pinned to each of the four case boundaries.
    pub boundary_per_edge: usize,
    pub seed: u64,
    /// Target rate used for the throughput comparison.
    pub r0: f64,
    pub inject: Option<Injection>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { samples: 200, boundary_per_edge: 25, seed: 7, r0: 4.0, inject: None }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    /// Distributions examined.
    pub checked: usize,
    /// Largest closed-form vs LP gap seen (bits/slot).
    pub max_gap: f64,
    /// Largest buffer balance residual seen (bits/slot).
    pub max_residual: f64,
    /// Human-readable discrepancy descriptions; empty means verified.
    pub failures: Vec<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs the full verification batch.
pub fn run_verification(config: &VerifyConfig) -> Result<VerifyOutcome, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut batch: Vec<(String, RegionProbabilities)> = Vec::new();
    for i in 0..config.samples {
        batch.push((format!("random-{i}"), random_region_probabilities(&mut rng)));
    }
    let edges = boundary_region_probabilities(&mut rng, config.boundary_per_edge);
    for (i, v) in edges.into_iter().enumerate() {
        batch.push((format!("edge{}-{}", i / config.boundary_per_edge.max(1), i), v));
    }
    for name in preset_names() {
        let cfg = preset(name)?;
        batch.push((format!("preset-{name}"), region_probabilities(&cfg.params)));
    }

    let mut outcome =
        VerifyOutcome { checked: batch.len(), max_gap: 0.0, max_residual: 0.0, failures: vec![] };
    for (label, rp) in &batch {
        let cmp = oracle_vs_analytic(rp, config.r0)?;
        outcome.max_gap = outcome.max_gap.max(cmp.gap);
        if cmp.gap > GAP_TOL {
            outcome.failures.push(format!(
                "{label} ({}): closed form {} vs LP {} (gap {:.3e})",
                cmp.case, cmp.closed_form, cmp.lp_value, cmp.gap
            ));
        }
        if cmp.lp_support > 7 {
            outcome
                .failures
                .push(format!("{label}: LP support {} exceeds basis size 7", cmp.lp_support));
        }

        let opt = optimal_policy(rp);
        let policy = match config.inject {
            Some(injection) => apply_injection(injection, &opt.policy),
            None => opt.policy.clone(),
        };
        let cert = certify(&policy, rp, case_alpha0(opt.case));
        for v in &cert.violations {
            outcome.failures.push(format!(
                "{label} ({}): certificate violation at ({}, {}), gap {:.3e}",
                opt.case, v.region, v.mode, v.gap
            ));
        }
        let residual = policy.balance_residual(rp, config.r0).abs();
        outcome.max_residual = outcome.max_residual.max(residual);
        if residual > GAP_TOL * config.r0.max(1.0) {
            outcome
                .failures
                .push(format!("{label} ({}): balance residual {residual:.3e}", opt.case));
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_verifies() {
        let outcome = run_verification(&VerifyConfig::default()).unwrap();
        assert!(outcome.passed(), "failures: {:?}", &outcome.failures[..outcome.failures.len().min(5)]);
        assert_eq!(outcome.checked, 200 + 4 * 25 + 6);
        assert!(outcome.max_gap < GAP_TOL);
        assert!(outcome.max_residual < 1e-9);
    }

    #[test]
    fn injections_are_detected() {
        for injection in [Injection::FullDuplexInR2, Injection::ReceiveInR3] {
            let config = VerifyConfig {
                samples: 50,
                boundary_per_edge: 5,
                inject: Some(injection),
                ..VerifyConfig::default()
            };
            let outcome = run_verification(&config).unwrap();
            assert!(!outcome.passed(), "{injection} went undetected");
        }
    }

    #[test]
    fn injection_names_roundtrip() {
        for injection in [Injection::FullDuplexInR2, Injection::ReceiveInR3] {
            let parsed: Injection = injection.to_string().parse().unwrap();
            assert_eq!(parsed, injection);
        }
        assert!("psi9".parse::<Injection>().is_err());
    }
}
