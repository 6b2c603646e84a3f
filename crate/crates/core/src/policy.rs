//! Mode-selection policy engine.
//!
//! A policy is a per-region probability row over the four modes. The relay
//! draws a mode independently every slot, so long-run arrival and departure
//! rates are linear in the row entries and the best stationary policy is the
//! solution of a small linear program. This module carries the closed form
//! of that solution: classify the region-probability vector into one of five
//! cases ([`StatCase`]) by ordering the drain-only mass `p3` against the
//! fill-only mass `p4 + p5`, then fill in the one randomized row per case
//! that makes the queue arrival rate equal the departure rate. The LP oracle
//! in [`crate::lp`] independently reproduces every number produced here.
//!
//! Throughput accounting: a successful `M1` slot adds `r0` bits to the relay
//! queue, a successful `M2` slot drains `r0`, and an `M3` slot does both.
//! Only departures count toward delivered throughput, and at the optimum the
//! two rates are equal, so maximizing throughput means maximizing the
//! balanced flow.

use serde::{Deserialize, Serialize};

use crate::channel::{Mode, Region, RegionProbabilities};
use crate::Error;

/// The five stationary cases, ordered by how scarce departure opportunities
/// are relative to arrivals. `Psi1` has fill-capacity to burn (some `M1`
/// slots idle); `Psi5` is so drain-rich that some `R3` slots idle instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatCase {
    Psi1,
    Psi2,
    Psi3,
    Psi4,
    Psi5,
}

impl StatCase {
    pub const ALL: [StatCase; 5] =
        [StatCase::Psi1, StatCase::Psi2, StatCase::Psi3, StatCase::Psi4, StatCase::Psi5];

    pub fn index(self) -> usize {
        match self {
            StatCase::Psi1 => 0,
            StatCase::Psi2 => 1,
            StatCase::Psi3 => 2,
            StatCase::Psi4 => 3,
            StatCase::Psi5 => 4,
        }
    }
}

impl std::fmt::Display for StatCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Psi{}", self.index() + 1)
    }
}

impl std::str::FromStr for StatCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Psi1" => Ok(StatCase::Psi1),
            "Psi2" => Ok(StatCase::Psi2),
            "Psi3" => Ok(StatCase::Psi3),
            "Psi4" => Ok(StatCase::Psi4),
            "Psi5" => Ok(StatCase::Psi5),
            other => Err(Error::InvalidConfig(format!("unknown case tag: {other}"))),
        }
    }
}

/// Orders `p3` against the fill-only mass `s = p4 + p5` shifted by the
/// flexible masses `p1` (FD-capable) and `p2` (HD-flexible). Interval edges
/// belong to the lower-numbered case, which the cascaded `<=` tests produce
/// directly.
pub fn classify_case(rp: &RegionProbabilities) -> StatCase {
    let p = rp.as_array();
    let s = p[3] + p[4];
    if p[2] <= s - p[0] - p[1] {
        StatCase::Psi1
    } else if p[2] <= s - p[1] {
        StatCase::Psi2
    } else if p[2] <= s + p[1] {
        StatCase::Psi3
    } else if p[2] <= s + p[1] + p[0] {
        StatCase::Psi4
    } else {
        StatCase::Psi5
    }
}

/// A per-region mode distribution: `rows()[k][j]` is the probability of
/// selecting mode `j` when the slot falls in region `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    rows: [[f64; 4]; 6],
}

impl Policy {
    /// Validates row-stochasticity (entries in `[0, 1]`, rows summing to 1,
    /// both within 1e-9) and normalizes away the residual rounding so that
    /// cumulative-sum sampling sees exact unit rows.
    pub fn new(rows: [[f64; 4]; 6]) -> Result<Self, Error> {
        const TOL: f64 = 1e-9;
        let mut clean = rows;
        for (k, row) in clean.iter_mut().enumerate() {
            let mut sum = 0.0;
            for v in row.iter_mut() {
                if !v.is_finite() || *v < -TOL || *v > 1.0 + TOL {
                    return Err(Error::InvalidPolicy(format!(
                        "row {} entry out of [0, 1]: {}",
                        k + 1,
                        v
                    )));
                }
                *v = v.clamp(0.0, 1.0);
                sum += *v;
            }
            if (sum - 1.0).abs() > TOL {
                return Err(Error::InvalidPolicy(format!("row {} sums to {}", k + 1, sum)));
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        Ok(Policy { rows: clean })
    }

    /// The policy that never transmits.
    pub fn all_silent() -> Self {
        Policy { rows: [[0.0, 0.0, 0.0, 1.0]; 6] }
    }

    pub fn rows(&self) -> &[[f64; 4]; 6] {
        &self.rows
    }

    pub fn prob(&self, region: Region, mode: Mode) -> f64 {
        self.rows[region.index()][mode.index()]
    }

    /// Long-run queue fill rate in bits/slot: mass on `M1`/`M3` weighted by
    /// region probability, counting only regions where the hop succeeds.
    pub fn arrival_rate(&self, rp: &RegionProbabilities, r0: f64) -> f64 {
        let mut rate = 0.0;
        for region in Region::ALL {
            let v = region.viability();
            let row = self.rows[region.index()];
            let mut succ = 0.0;
            if v.hd_receive {
                succ += row[Mode::HdReceive.index()];
            }
            if v.full_duplex {
                succ += row[Mode::FullDuplex.index()];
            }
            rate += rp.get(region) * succ;
        }
        rate * r0
    }

    /// Long-run queue drain rate in bits/slot: mass on `M2`/`M3`, same
    /// success weighting.
    pub fn departure_rate(&self, rp: &RegionProbabilities, r0: f64) -> f64 {
        let mut rate = 0.0;
        for region in Region::ALL {
            let v = region.viability();
            let row = self.rows[region.index()];
            let mut succ = 0.0;
            if v.hd_transmit {
                succ += row[Mode::HdTransmit.index()];
            }
            if v.full_duplex {
                succ += row[Mode::FullDuplex.index()];
            }
            rate += rp.get(region) * succ;
        }
        rate * r0
    }

    /// `arrival_rate - departure_rate`; zero (to rounding) for any policy
    /// meant to keep the queue stable without starving it.
    pub fn balance_residual(&self, rp: &RegionProbabilities, r0: f64) -> f64 {
        self.arrival_rate(rp, r0) - self.departure_rate(rp, r0)
    }

    /// Total probability the policy puts on full duplex, region-weighted.
    pub fn full_duplex_mass(&self, rp: &RegionProbabilities) -> f64 {
        Region::ALL
            .iter()
            .map(|&r| rp.get(r) * self.prob(r, Mode::FullDuplex))
            .sum()
    }
}

/// Result of [`optimal_policy`]: the policy, the case it was built for, and
/// any rows that fell back to silence because their mixing fraction had a
/// zero-probability denominator (possible only when the involved regions
/// carry no mass, so throughput is unaffected).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalPolicy {
    pub case: StatCase,
    pub policy: Policy,
    pub degenerate_rows: Vec<Region>,
}

/// Mixing fractions land in `[0, 1]` by the case inequalities; anything
/// outside is boundary round-off and gets clamped.
fn clamp_fraction(x: f64) -> f64 {
    debug_assert!(
        (-1e-9..=1.0 + 1e-9).contains(&x),
        "mixing fraction {x} outside [0, 1] beyond rounding"
    );
    x.clamp(0.0, 1.0)
}

/// Builds the throughput-optimal stationary policy for a region-probability
/// vector.
///
/// Row construction per case (`s = p4 + p5`; rows not listed are pure):
///
/// * `Psi1` — departures are the bottleneck: R1–R3 all drain (`M2`), and the
///   fill-only regions R4/R5 fill just often enough,
///   `M1` w.p. `(p1 + p2 + p3) / s`, idling otherwise.
/// * `Psi2` — R1 splits between draining (`M2`, w.p. `(s - p2 - p3) / p1`)
///   and full duplex; every other capable region runs flat out.
/// * `Psi3` — R1 goes full duplex; R2 splits between drain and fill,
///   `M2` w.p. `(p2 + s - p3) / (2 p2)`.
/// * `Psi4` — arrivals become the bottleneck: R1 splits between fill (`M1`,
///   w.p. `(p3 - p2 - s) / p1`) and full duplex; R2 fills; R3 drains.
/// * `Psi5` — drain capacity to burn: all fill-capable regions fill; R3
///   drains w.p. `(p1 + p2 + s) / p3` and idles otherwise.
///
/// Each mixing fraction is exactly the value that zeroes the queue balance
/// residual, which is what makes the whole departure rate deliverable.
pub fn optimal_policy(rp: &RegionProbabilities) -> OptimalPolicy {
    const M1: usize = 0;
    const M2: usize = 1;
    const M3: usize = 2;
    const M4: usize = 3;

    let case = classify_case(rp);
    let p = rp.as_array();
    let s = p[3] + p[4];
    let mut rows = [[0.0f64; 4]; 6];
    // R6 can't transmit at all; everything else is case-specific.
    rows[5][M4] = 1.0;
    let mut degenerate = Vec::new();

    // Fraction with a possibly-zero denominator. `None` marks a degenerate
    // row whose region necessarily has zero probability.
    let fraction = |num: f64, den: f64| -> Option<f64> {
        if den > 0.0 {
            Some(clamp_fraction(num / den))
        } else {
            None
        }
    };
    let pure = |m: usize| -> [f64; 4] {
        let mut row = [0.0; 4];
        row[m] = 1.0;
        row
    };
    let mix = |m_a: usize, p_a: f64, m_b: usize| -> [f64; 4] {
        let mut row = [0.0; 4];
        row[m_a] = p_a;
        row[m_b] = 1.0 - p_a;
        row
    };

    match case {
        StatCase::Psi1 => {
            rows[0] = pure(M2);
            rows[1] = pure(M2);
            rows[2] = pure(M2);
            match fraction(p[0] + p[1] + p[2], s) {
                Some(f) => {
                    rows[3] = mix(M1, f, M4);
                    rows[4] = mix(M1, f, M4);
                }
                None => {
                    rows[3] = pure(M4);
                    rows[4] = pure(M4);
                    degenerate.extend([Region::R4, Region::R5]);
                }
            }
        }
        StatCase::Psi2 => {
            match fraction(s - p[1] - p[2], p[0]) {
                Some(f) => rows[0] = mix(M2, f, M3),
                None => {
                    rows[0] = pure(M4);
                    degenerate.push(Region::R1);
                }
            }
            rows[1] = pure(M2);
            rows[2] = pure(M2);
            rows[3] = pure(M1);
            rows[4] = pure(M1);
        }
        StatCase::Psi3 => {
            rows[0] = pure(M3);
            match fraction(p[1] + s - p[2], 2.0 * p[1]) {
                Some(f) => rows[1] = mix(M2, f, M1),
                None => {
                    rows[1] = pure(M4);
                    degenerate.push(Region::R2);
                }
            }
            rows[2] = pure(M2);
            rows[3] = pure(M1);
            rows[4] = pure(M1);
        }
        StatCase::Psi4 => {
            match fraction(p[2] - p[1] - s, p[0]) {
                Some(f) => rows[0] = mix(M1, f, M3),
                None => {
                    rows[0] = pure(M4);
                    degenerate.push(Region::R1);
                }
            }
            rows[1] = pure(M1);
            rows[2] = pure(M2);
            rows[3] = pure(M1);
            rows[4] = pure(M1);
        }
        StatCase::Psi5 => {
            rows[0] = pure(M1);
            rows[1] = pure(M1);
            match fraction(p[0] + p[1] + s, p[2]) {
                Some(f) => rows[2] = mix(M2, f, M4),
                None => {
                    rows[2] = pure(M4);
                    degenerate.push(Region::R3);
                }
            }
            rows[3] = pure(M1);
            rows[4] = pure(M1);
        }
    }

    let policy = Policy::new(rows).expect("constructed rows are row-stochastic");
    OptimalPolicy { case, policy, degenerate_rows: degenerate }
}

/// Throughput of an optimal stationary policy, with the balance invariant
/// made explicit: at the optimum the arrival and departure rates coincide
/// with the delivered rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub case: StatCase,
    /// Delivered bits/slot.
    pub throughput: f64,
    pub arrival_rate: f64,
    pub departure_rate: f64,
}

/// Closed-form optimal throughput:
///
/// * `Psi1`/`Psi2`: `(p1 + p2 + p3) * r0` — every drain-capable slot drains.
/// * `Psi3`: `(p1 + (p2 + p3 + p4 + p5) / 2) * r0` — R1 counts double via
///   full duplex, the rest time-shares evenly.
/// * `Psi4`/`Psi5`: `(p1 + p2 + p4 + p5) * r0` — every fill-capable slot
///   fills.
pub fn closed_form_throughput(rp: &RegionProbabilities, r0: f64) -> ThroughputReport {
    let case = classify_case(rp);
    let p = rp.as_array();
    let t = match case {
        StatCase::Psi1 | StatCase::Psi2 => p[0] + p[1] + p[2],
        StatCase::Psi3 => p[0] + (p[1] + p[2] + p[3] + p[4]) / 2.0,
        StatCase::Psi4 | StatCase::Psi5 => p[0] + p[1] + p[3] + p[4],
    } * r0;
    ThroughputReport { case, throughput: t, arrival_rate: t, departure_rate: t }
}

/// Reference schemes the hybrid policy is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineKind {
    /// Best stationary policy that never uses full duplex.
    HdOptimal,
    /// Full duplex wherever it works (R1), silence elsewhere.
    FdAlways,
    /// R1 pinned to full duplex, remaining regions balanced optimally.
    FdPreferred,
}

impl std::fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BaselineKind::HdOptimal => "hd-optimal",
            BaselineKind::FdAlways => "fd-always",
            BaselineKind::FdPreferred => "fd-preferred",
        })
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "hd-optimal" => Ok(BaselineKind::HdOptimal),
            "fd-always" => Ok(BaselineKind::FdAlways),
            "fd-preferred" => Ok(BaselineKind::FdPreferred),
            other => Err(Error::Parse(format!(
                "unknown baseline {other:?} (expected hd-optimal, fd-always, or fd-preferred)"
            ))),
        }
    }
}

/// A baseline policy together with its achieved throughput.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub kind: BaselineKind,
    pub policy: Policy,
    pub throughput: f64,
}

/// Closed-form throughput of the best FD-free policy. With fill-only mass
/// `a = p4 + p5`, drain-only mass `b = p3`, and flexible mass `c = p1 + p2`,
/// the balanced flow is capped by splitting `c` (the `(a+b+c)/2` term) and
/// by each side's total capacity.
pub fn hd_optimal_throughput(rp: &RegionProbabilities, r0: f64) -> f64 {
    let p = rp.as_array();
    let a = p[3] + p[4];
    let b = p[2];
    let c = p[0] + p[1];
    ((a + b + c) / 2.0).min(a + c).min(b + c) * r0
}

/// Closed-form throughput with R1 pinned to full duplex: R1 contributes its
/// full mass to both sides, and the leftover regions form an FD-free
/// balancing problem of their own.
pub fn fd_preferred_throughput(rp: &RegionProbabilities, r0: f64) -> f64 {
    let p = rp.as_array();
    let a = p[3] + p[4];
    let b = p[2];
    let c = p[1];
    (p[0] + ((a + b + c) / 2.0).min(a + c).min(b + c)) * r0
}

/// Builds a baseline policy. `FdAlways` is explicit; the other two are
/// solved by the LP oracle with the matching mode restrictions, so their
/// policies inherit the oracle's tie-breaking (unused mass parks on `M4`).
pub fn baseline_policy(kind: BaselineKind, rp: &RegionProbabilities, r0: f64) -> Result<Baseline, Error> {
    match kind {
        BaselineKind::FdAlways => {
            let mut rows = [[0.0, 0.0, 0.0, 1.0]; 6];
            rows[0] = [0.0, 0.0, 1.0, 0.0];
            Ok(Baseline {
                kind,
                policy: Policy::new(rows).expect("fd-always rows are row-stochastic"),
                throughput: rp.get(Region::R1) * r0,
            })
        }
        BaselineKind::HdOptimal => {
            let sol = crate::lp::solve_allocation(rp, r0, &crate::lp::ModeMask::forbid_full_duplex())?;
            Ok(Baseline { kind, policy: sol.policy, throughput: sol.objective })
        }
        BaselineKind::FdPreferred => {
            let sol = crate::lp::solve_allocation(rp, r0, &crate::lp::ModeMask::pin_full_duplex_in_r1())?;
            Ok(Baseline { kind, policy: sol.policy, throughput: sol.objective })
        }
    }
}
