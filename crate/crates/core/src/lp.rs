//! Independent linear-programming oracle for the mode-selection problem,
//! plus a dual-based optimality certificate.
//!
//! The decision variables are the 24 entries of a [`Policy`]: one
//! probability per (region, mode) pair. Constraints: each region's row sums
//! to one (6 equalities), and the relay buffer neither drains nor grows on
//! average — expected arrival rate equals expected departure rate (1
//! equality; the full-duplex mode adds and removes a packet in the same
//! slot, so it cancels out of this row). The objective is the expected
//! delivered rate. The solver in [`crate::simplex`] shares no code with the
//! closed-form construction in [`crate::policy`], so agreement between the
//! two over random region distributions is a genuine cross-check rather
//! than a tautology.
//!
//! The certificate side works from per-(region, mode) selection values
//! built from a single scalar `alpha0`, the dual price of the buffer
//! balance constraint: an allocation is optimal exactly when every mode it
//! plays with positive probability attains the maximum selection value
//! within its region.

use rand::Rng;

use crate::channel::{Mode, Region, RegionProbabilities};
use crate::policy::{classify_case, closed_form_throughput, Policy, StatCase};
use crate::simplex;
use crate::Error;

/// Probabilities below this count as "not in the support" when certifying
/// or counting support size.
pub const SUPPORT_TOL: f64 = 1e-9;

/// A selection value may fall short of its region's maximum by at most this
/// much while the mode still carries probability.
pub const CERT_TOL: f64 = 1e-9;

/// Restricts which modes each region may use, for baseline variants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeMask {
    allowed: [[bool; 4]; 6],
}

impl ModeMask {
    /// Every mode available in every region.
    pub fn all() -> Self {
        ModeMask { allowed: [[true; 4]; 6] }
    }

    /// Full-duplex disabled everywhere: the relay runs half-duplex only.
    pub fn forbid_full_duplex() -> Self {
        let mut allowed = [[true; 4]; 6];
        for row in allowed.iter_mut() {
            row[Mode::FullDuplex.index()] = false;
        }
        ModeMask { allowed }
    }

    /// Whenever both hops can sustain full-duplex (region R1), the relay
    /// must take it; elsewhere it is free.
    pub fn pin_full_duplex_in_r1() -> Self {
        let mut allowed = [[true; 4]; 6];
        allowed[Region::R1.index()] = [false, false, true, false];
        ModeMask { allowed }
    }

    pub fn allows(&self, region: Region, mode: Mode) -> bool {
        self.allowed[region.index()][mode.index()]
    }
}

/// Output of [`solve_allocation`].
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Optimal expected delivered rate (bits/slot).
    pub objective: f64,
    /// An optimal allocation. Ties are broken by the solver's pivoting, so
    /// this need not equal the closed-form table even when the values agree.
    pub policy: Policy,
    /// Dual price of the buffer balance row, rescaled to rate-1 units. For
    /// the unrestricted problem this is the `alpha0` that certifies the
    /// optimum; under a mask it prices balance for the restricted problem.
    pub alpha0: f64,
    /// Number of (region, mode) entries carrying more than [`SUPPORT_TOL`].
    /// A basic optimum of the 7-row program uses at most 7.
    pub support: usize,
}

/// Solves the mode-allocation LP restricted to `mask`.
pub fn solve_allocation(
    rp: &RegionProbabilities,
    r0: f64,
    mask: &ModeMask,
) -> Result<LpSolution, Error> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target rate must be positive and finite, got {r0}"
        )));
    }
    let mut cols: Vec<(Region, Mode)> = Vec::with_capacity(24);
    for region in Region::ALL {
        let any = Mode::ALL.iter().any(|&m| mask.allows(region, m));
        if !any {
            return Err(Error::InvalidConfig(format!(
                "mask leaves region {region} with no mode"
            )));
        }
        for mode in Mode::ALL {
            if mask.allows(region, mode) {
                cols.push((region, mode));
            }
        }
    }

    let n = cols.len();
    let mut c = vec![0.0; n];
    // Row 0 is the balance constraint, rows 1..=6 the per-region sums.
    let mut a = vec![vec![0.0; n]; 7];
    let b: Vec<f64> = std::iter::once(0.0).chain(std::iter::repeat_n(1.0, 6)).collect();
    for (j, &(region, mode)) in cols.iter().enumerate() {
        let p = rp.get(region);
        let v = region.viability();
        let (arrives, departs) = match mode {
            Mode::HdReceive => (v.hd_receive, false),
            Mode::HdTransmit => (false, v.hd_transmit),
            // Full-duplex both enqueues and delivers on success, so its net
            // buffer effect is zero and it only shows up in the objective.
            Mode::FullDuplex => (false, false),
            Mode::Silent => (false, false),
        };
        let delivers = match mode {
            Mode::HdTransmit => v.hd_transmit,
            Mode::FullDuplex => v.full_duplex,
            _ => false,
        };
        a[0][j] = p * ((arrives as i32 as f64) - (departs as i32 as f64));
        a[1 + region.index()][j] = 1.0;
        c[j] = p * (delivers as i32 as f64) * r0;
    }

    let sol = simplex::maximize(&c, &a, &b).map_err(|e| Error::Lp(e.to_string()))?;

    let mut rows = [[0.0f64; 4]; 6];
    for (j, &(region, mode)) in cols.iter().enumerate() {
        rows[region.index()][mode.index()] = sol.x[j].max(0.0);
    }
    // The solver may park mass on modes that cannot succeed in their region
    // (every coefficient zero). Fold such mass into Silent where the mask
    // permits, so reported policies do not pretend to transmit into outage.
    for region in Region::ALL {
        if !mask.allows(region, Mode::Silent) {
            continue;
        }
        let v = region.viability();
        for mode in [Mode::HdReceive, Mode::HdTransmit, Mode::FullDuplex] {
            if !v.succeeds(mode) {
                let k = region.index();
                rows[k][Mode::Silent.index()] += rows[k][mode.index()];
                rows[k][mode.index()] = 0.0;
            }
        }
    }
    let policy = Policy::new(rows)?;
    let support = policy
        .rows()
        .iter()
        .flatten()
        .filter(|&&p| p > SUPPORT_TOL)
        .count();
    // The balance row is written (arrival - departure) = 0; its dual prices
    // a unit of forced arrival surplus. alpha0 in certificate units is the
    // negated dual per unit of target rate.
    let alpha0 = -sol.duals[0] / r0;
    Ok(LpSolution { objective: sol.objective, policy, alpha0, support })
}

/// Solves the unrestricted mode-allocation LP.
pub fn solve_lp(rp: &RegionProbabilities, r0: f64) -> Result<LpSolution, Error> {
    solve_allocation(rp, r0, &ModeMask::all())
}

/// Per-(region, mode) selection values induced by a balance price
/// `alpha0`, in units of the target rate.
///
/// A slot spent receiving earns the buffered packet's future delivery,
/// worth `alpha0`; a delivering slot earns the remaining `1 - alpha0` plus
/// nothing for the queue; full-duplex earns the full packet immediately;
/// silence earns zero. Modes that cannot succeed in a region earn zero
/// regardless.
#[derive(Debug, Clone)]
pub struct KktCertificate {
    pub alpha0: f64,
    values: [[f64; 4]; 6],
}

impl KktCertificate {
    pub fn new(alpha0: f64) -> Self {
        let mut values = [[0.0f64; 4]; 6];
        for region in Region::ALL {
            let v = region.viability();
            values[region.index()] = [
                if v.hd_receive { alpha0 } else { 0.0 },
                if v.hd_transmit { 1.0 - alpha0 } else { 0.0 },
                if v.full_duplex { 1.0 } else { 0.0 },
                0.0,
            ];
        }
        KktCertificate { alpha0, values }
    }

    pub fn values(&self, region: Region) -> [f64; 4] {
        self.values[region.index()]
    }
}

/// A supported mode whose selection value falls short of its region's best.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub region: Region,
    pub mode: Mode,
    /// How far below the region maximum the violating mode's value sits.
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct Certification {
    pub certified: bool,
    pub violations: Vec<Violation>,
}

/// Checks the complementary-slackness condition: every mode the policy
/// plays with positive probability must attain (within [`CERT_TOL`]) the
/// maximum selection value of its region. Regions with zero probability
/// never occur and are skipped.
pub fn certify(policy: &Policy, rp: &RegionProbabilities, alpha0: f64) -> Certification {
    let cert = KktCertificate::new(alpha0);
    let mut violations = Vec::new();
    for region in Region::ALL {
        if rp.get(region) <= 0.0 {
            continue;
        }
        let values = cert.values(region);
        let best = values.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        for mode in Mode::ALL {
            if policy.prob(region, mode) > SUPPORT_TOL && values[mode.index()] < best - CERT_TOL {
                violations.push(Violation { region, mode, gap: best - values[mode.index()] });
            }
        }
    }
    Certification { certified: violations.is_empty(), violations }
}

/// The balance price that certifies the closed-form optimal policy in each
/// statistical case.
///
/// Each case's randomized row forces the price: a mode pair can share
/// probability only if their selection values tie.
///
/// * `Psi1` mixes receive (`alpha0`) with silence (0) in R4/R5: `alpha0 = 0`.
/// * `Psi2` mixes deliver (`1 - alpha0`) with full-duplex (1) in R1:
///   `alpha0 = 0`.
/// * `Psi3` mixes receive with deliver in R2: `alpha0 = 1 - alpha0`, so
///   `alpha0 = 1/2`.
/// * `Psi4` mixes receive (`alpha0`) with full-duplex (1) in R1:
///   `alpha0 = 1`.
/// * `Psi5` mixes deliver (`1 - alpha0`) with silence (0) in R3:
///   `alpha0 = 1`. Note this is pinned by the R3 row itself; any larger
///   price would push the delivering mode's value below silence and
///   disqualify the very mass the policy plays there.
pub fn case_alpha0(case: StatCase) -> f64 {
    match case {
        StatCase::Psi1 | StatCase::Psi2 => 0.0,
        StatCase::Psi3 => 0.5,
        StatCase::Psi4 | StatCase::Psi5 => 1.0,
    }
}

/// Side-by-side result of the closed-form construction and the LP oracle.
#[derive(Debug, Clone)]
pub struct OracleComparison {
    pub case: StatCase,
    pub closed_form: f64,
    pub lp_value: f64,
    pub gap: f64,
    pub lp_alpha0: f64,
    pub lp_support: usize,
}

/// Runs both routes to the optimal throughput and reports the gap.
pub fn oracle_vs_analytic(rp: &RegionProbabilities, r0: f64) -> Result<OracleComparison, Error> {
    let report = closed_form_throughput(rp, r0);
    let lp = solve_lp(rp, r0)?;
    Ok(OracleComparison {
        case: classify_case(rp),
        closed_form: report.throughput,
        lp_value: lp.objective,
        gap: (lp.objective - report.throughput).abs(),
        lp_alpha0: lp.alpha0,
        lp_support: lp.support,
    })
}

/// A region distribution drawn uniformly over the probability simplex
/// (normalized unit exponentials).
pub fn random_region_probabilities<R: Rng + ?Sized>(rng: &mut R) -> RegionProbabilities {
    let mut w = [0.0f64; 6];
    for v in w.iter_mut() {
        *v = -f64::ln(1.0 - rng.gen::<f64>());
    }
    let sum: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= sum;
    }
    RegionProbabilities::new(w).expect("normalized exponentials form a distribution")
}

/// Distributions sitting (up to rounding) on one of the four thresholds
/// that separate adjacent statistical cases. Edge 0 is the Psi1/Psi2
/// boundary and edge 3 the Psi4/Psi5 boundary.
pub fn boundary_region_probabilities<R: Rng + ?Sized>(
    rng: &mut R,
    per_edge: usize,
) -> Vec<RegionProbabilities> {
    let mut out = Vec::with_capacity(4 * per_edge);
    for edge in 0..4 {
        let mut produced = 0;
        while produced < per_edge {
            let mut w = [0.0f64; 6];
            for (i, v) in w.iter_mut().enumerate() {
                if i != 2 {
                    *v = -f64::ln(1.0 - rng.gen::<f64>());
                }
            }
            let s = w[3] + w[4];
            w[2] = match edge {
                0 => s - w[0] - w[1],
                1 => s - w[1],
                2 => s + w[1],
                _ => s + w[1] + w[0],
            };
            if w[2] < 0.0 {
                continue;
            }
            let sum: f64 = w.iter().sum();
            for v in w.iter_mut() {
                *v /= sum;
            }
            out.push(RegionProbabilities::new(w).expect("normalized weights"));
            produced += 1;
        }
    }
    out
}
