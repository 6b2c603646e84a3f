//! Two-hop relay channel model: link budgets, outage thresholds, and the
//! per-slot region classification that mode scheduling keys on.
//!
//! The node chain is source → relay → destination with no direct link. Both
//! hops fade independently with Rayleigh envelopes, so the power gains `g1`
//! (source→relay) and `g2` (relay→destination) are exponential with means
//! `omega1` and `omega2`. Per slot the relay either listens ([`Mode::HdReceive`]),
//! forwards queued data ([`Mode::HdTransmit`]), does both at once in full
//! duplex ([`Mode::FullDuplex`], paying a residual self-interference penalty
//! at its own receiver), or idles ([`Mode::Silent`]).
//!
//! A hop sustains the design rate `r0` iff its SNR/SINR clears
//! `gamma0 = 2^r0 - 1`. Inverting the three link budgets turns that into
//! fixed gain thresholds ([`OutageThresholds`]), which partition the
//! `(g1, g2)` quadrant into six regions with distinct mode-viability
//! patterns. Everything downstream — the closed-form policy, the LP oracle,
//! the slot simulator — consumes regions and their stationary probabilities,
//! never raw gains.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Residual self-interference (RSI) seen by the relay's receiver while the
/// relay transmits in full duplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rsi {
    /// Interference power proportional to the relay transmit power: `I_R = k * p2`.
    Coefficient(f64),
    /// Fixed interference power independent of `p2`.
    Fixed(f64),
}

impl Rsi {
    /// Effective interference power at the relay input for transmit power `p2`.
    pub fn power(&self, p2: f64) -> f64 {
        match *self {
            Rsi::Coefficient(k) => k * p2,
            Rsi::Fixed(i) => i,
        }
    }
}

/// Static system parameters: transmit powers, noise variances, fading means,
/// RSI model, and target rate. Powers are linear (use [`db_to_linear`] for
/// dB inputs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Source transmit power.
    pub p1: f64,
    /// Relay transmit power.
    pub p2: f64,
    /// Noise variance at the relay receiver.
    pub sigma2_r: f64,
    /// Noise variance at the destination receiver.
    pub sigma2_d: f64,
    /// Mean of the exponential source→relay power gain.
    pub omega1: f64,
    /// Mean of the exponential relay→destination power gain.
    pub omega2: f64,
    /// Residual self-interference model.
    pub rsi: Rsi,
    /// Design rate in bits/slot; one queue packet corresponds to `r0` bits.
    pub r0: f64,
    /// Optional explicit SINR threshold. When `None`, `gamma0 = 2^r0 - 1`.
    pub gamma0_override: Option<f64>,
}

impl SystemParams {
    /// SINR threshold a hop must clear to sustain `r0`.
    pub fn gamma0(&self) -> f64 {
        self.gamma0_override.unwrap_or_else(|| 2f64.powf(self.r0) - 1.0)
    }

    /// RSI power for the configured relay transmit power.
    pub fn rsi_power(&self) -> f64 {
        self.rsi.power(self.p2)
    }

    /// Checks positivity/sign constraints. Operations in this crate assume a
    /// validated parameter set.
    pub fn validate(&self) -> Result<(), Error> {
        fn positive(name: &str, v: f64) -> Result<(), Error> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        }
        positive("p1", self.p1)?;
        positive("p2", self.p2)?;
        positive("sigma2_r", self.sigma2_r)?;
        positive("sigma2_d", self.sigma2_d)?;
        positive("omega1", self.omega1)?;
        positive("omega2", self.omega2)?;
        positive("r0", self.r0)?;
        let rsi = self.rsi_power();
        if !rsi.is_finite() || rsi < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rsi power must be non-negative and finite, got {rsi}"
            )));
        }
        if let Some(g) = self.gamma0_override {
            positive("gamma0", g)?;
        }
        Ok(())
    }
}

/// Converts a dB quantity to linear scale: `10^(db/10)`. The single source
/// of truth for dB handling, so dB and linear inputs cannot drift apart.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// The four per-slot transmission modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// M1 — half duplex, source transmits to the relay (queue grows).
    HdReceive,
    /// M2 — half duplex, relay transmits to the destination (queue drains).
    HdTransmit,
    /// M3 — full duplex, both hops active in the same slot.
    FullDuplex,
    /// M4 — all nodes silent.
    Silent,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::HdReceive, Mode::HdTransmit, Mode::FullDuplex, Mode::Silent];

    pub fn index(self) -> usize {
        match self {
            Mode::HdReceive => 0,
            Mode::HdTransmit => 1,
            Mode::FullDuplex => 2,
            Mode::Silent => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Mode> {
        Mode::ALL.get(i).copied()
    }

    /// Short conventional label (`M1`..`M4`).
    pub fn label(self) -> &'static str {
        ["M1", "M2", "M3", "M4"][self.index()]
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// The six gain regions. `R1` is FD-capable on both hops; `R6` is total
/// outage. See [`classify`] for the exact boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

impl Region {
    pub const ALL: [Region; 6] = [Region::R1, Region::R2, Region::R3, Region::R4, Region::R5, Region::R6];

    pub fn index(self) -> usize {
        match self {
            Region::R1 => 0,
            Region::R2 => 1,
            Region::R3 => 2,
            Region::R4 => 3,
            Region::R5 => 4,
            Region::R6 => 5,
        }
    }

    pub fn from_index(i: usize) -> Option<Region> {
        Region::ALL.get(i).copied()
    }

    /// Which modes succeed when the slot falls in this region.
    pub fn viability(self) -> ModeViability {
        // Rows follow the region order R1..R6:
        //   hd_receive : g1 clears the HD threshold
        //   hd_transmit: g2 clears its threshold
        //   full_duplex: g1 clears the (stricter) FD threshold AND g2 clears
        const TABLE: [ModeViability; 6] = [
            ModeViability { hd_receive: true, hd_transmit: true, full_duplex: true },
            ModeViability { hd_receive: true, hd_transmit: true, full_duplex: false },
            ModeViability { hd_receive: false, hd_transmit: true, full_duplex: false },
            ModeViability { hd_receive: true, hd_transmit: false, full_duplex: false },
            ModeViability { hd_receive: true, hd_transmit: false, full_duplex: false },
            ModeViability { hd_receive: false, hd_transmit: false, full_duplex: false },
        ];
        TABLE[self.index()]
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "R{}", self.index() + 1)
    }
}

/// Per-region success flags for the three active modes. [`Mode::Silent`]
/// never carries data, so it has no flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeViability {
    pub hd_receive: bool,
    pub hd_transmit: bool,
    pub full_duplex: bool,
}

impl ModeViability {
    /// Whether selecting `mode` in a slot with these flags moves data.
    pub fn succeeds(&self, mode: Mode) -> bool {
        match mode {
            Mode::HdReceive => self.hd_receive,
            Mode::HdTransmit => self.hd_transmit,
            Mode::FullDuplex => self.full_duplex,
            Mode::Silent => false,
        }
    }
}

/// Instantaneous SINRs for a slot with gains `(g1, g2)`.
///
/// The FD variant of the first hop divides by noise *plus* RSI; the HD
/// variant sees noise only, so `gamma1_hd >= gamma1_fd` always.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotSinrs {
    /// First-hop SINR while the relay transmits (full duplex).
    pub gamma1_fd: f64,
    /// First-hop SNR with the relay receiver unimpaired (half duplex).
    pub gamma1_hd: f64,
    /// Second-hop SNR at the destination.
    pub gamma2: f64,
}

/// Computes the three per-slot SINRs from instantaneous gains.
pub fn sinr(params: &SystemParams, g1: f64, g2: f64) -> SlotSinrs {
    let i_r = params.rsi_power();
    SlotSinrs {
        gamma1_fd: params.p1 * g1 / (i_r + params.sigma2_r),
        gamma1_hd: params.p1 * g1 / params.sigma2_r,
        gamma2: params.p2 * g2 / params.sigma2_d,
    }
}

/// Gain thresholds equivalent to the SINR outage conditions. A hop/mode
/// succeeds iff its gain is at or above the matching threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageThresholds {
    /// Minimum `g1` for a successful HD source→relay slot.
    pub g1_hd: f64,
    /// Minimum `g1` for the source→relay hop while the relay transmits
    /// (FD): RSI raises this above `g1_hd` whenever RSI power is nonzero.
    pub g1_fd: f64,
    /// Minimum `g2` for a successful relay→destination slot.
    pub g2_hd: f64,
}

/// Inverts the link budgets into gain thresholds for the configured rate.
pub fn thresholds(params: &SystemParams) -> OutageThresholds {
    let gamma0 = params.gamma0();
    let th = OutageThresholds {
        g1_hd: gamma0 * params.sigma2_r / params.p1,
        g1_fd: gamma0 * (params.rsi_power() + params.sigma2_r) / params.p1,
        g2_hd: gamma0 * params.sigma2_d / params.p2,
    };
    debug_assert!(th.g1_fd >= th.g1_hd);
    th
}

/// Maps instantaneous gains to their region. Boundaries sit on the success
/// side: a gain exactly at a threshold counts as clearing it.
pub fn classify(th: &OutageThresholds, g1: f64, g2: f64) -> Region {
    let second_hop_ok = g2 >= th.g2_hd;
    if g1 >= th.g1_fd {
        if second_hop_ok {
            Region::R1
        } else {
            Region::R5
        }
    } else if g1 >= th.g1_hd {
        if second_hop_ok {
            Region::R2
        } else {
            Region::R4
        }
    } else if second_hop_ok {
        Region::R3
    } else {
        Region::R6
    }
}

/// Draws one slot's `(g1, g2)` pair by inverse transform: `-omega * ln(u)`
/// with `u` uniform on `(0, 1]`, so the draw is finite and fully determined
/// by the generator stream.
pub fn sample_gains<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> (f64, f64) {
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = 1.0 - rng.gen::<f64>();
    (-params.omega1 * u1.ln(), -params.omega2 * u2.ln())
}

/// Stationary probabilities of the six regions. Always a valid probability
/// vector: construction clamps only floating dust (components are products
/// of survival probabilities).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionProbabilities {
    p: [f64; 6],
}

impl RegionProbabilities {
    /// Validates and wraps a raw vector: components in `[0, 1]` and summing
    /// to 1, both within 1e-12.
    pub fn new(p: [f64; 6]) -> Result<Self, Error> {
        const TOL: f64 = 1e-12;
        let mut clamped = p;
        for (i, v) in clamped.iter_mut().enumerate() {
            if !v.is_finite() || *v < -TOL || *v > 1.0 + TOL {
                return Err(Error::InvalidProbabilities(format!(
                    "component {} out of [0, 1]: {}",
                    i + 1,
                    p[i]
                )));
            }
            *v = v.clamp(0.0, 1.0);
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > TOL {
            return Err(Error::InvalidProbabilities(format!("sum {} != 1", sum)));
        }
        Ok(RegionProbabilities { p: clamped })
    }

    pub fn get(&self, r: Region) -> f64 {
        self.p[r.index()]
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.p
    }

    /// Probability that the source→relay hop supports HD reception
    /// (regions R1, R2, R4, R5) — the arrival-capable mass.
    pub fn arrival_capable(&self) -> f64 {
        self.get(Region::R1) + self.get(Region::R2) + self.get(Region::R4) + self.get(Region::R5)
    }

    /// Probability that the relay→destination hop is up (regions R1–R3) —
    /// the departure-capable mass.
    pub fn departure_capable(&self) -> f64 {
        self.get(Region::R1) + self.get(Region::R2) + self.get(Region::R3)
    }
}

impl std::ops::Index<Region> for RegionProbabilities {
    type Output = f64;
    fn index(&self, r: Region) -> &f64 {
        &self.p[r.index()]
    }
}

/// Closed-form region probabilities under independent exponential gains.
///
/// With `a = P(g1 >= g1_hd)`, `b = P(g1 >= g1_fd)`, `c = P(g2 >= g2_hd)`,
/// the six products below tile the quadrant exactly, so the vector sums to
/// one up to rounding. Note `p1 + p2 = a*c` and `p4 + p5 = a*(1-c)` do not
/// depend on the RSI level: RSI only shifts mass between R1 and R2 (and
/// between R5 and R4).
pub fn region_probabilities(params: &SystemParams) -> RegionProbabilities {
    let th = thresholds(params);
    let a = (-th.g1_hd / params.omega1).exp();
    let b = (-th.g1_fd / params.omega1).exp();
    let c = (-th.g2_hd / params.omega2).exp();
    let p = [
        b * c,
        (a - b) * c,
        (1.0 - a) * c,
        (a - b) * (1.0 - c),
        b * (1.0 - c),
        (1.0 - a) * (1.0 - c),
    ];
    RegionProbabilities::new(p).expect("closed-form region probabilities are a valid vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_test_params() -> SystemParams {
        // gamma0 pinned to 1 so the thresholds come out as (1, 2, 1).
        SystemParams {
            p1: 1.0,
            p2: 1.0,
            sigma2_r: 1.0,
            sigma2_d: 1.0,
            omega1: 1.0,
            omega2: 1.0,
            rsi: Rsi::Fixed(1.0),
            r0: 1.0,
            gamma0_override: Some(1.0),
        }
    }

    #[test]
    fn sinr_matches_worked_example() {
        let params = SystemParams {
            p1: 10.0,
            p2: 7.0,
            sigma2_r: 1.0,
            sigma2_d: 2.0,
            omega1: 1.0,
            omega2: 1.0,
            rsi: Rsi::Fixed(4.0),
            r0: 1.0,
            gamma0_override: None,
        };
        let s = sinr(&params, 0.5, 0.25);
        assert!((s.gamma1_fd - 1.0).abs() < 1e-15, "gamma1_fd = {}", s.gamma1_fd);
        assert!((s.gamma1_hd - 5.0).abs() < 1e-15, "gamma1_hd = {}", s.gamma1_hd);
        assert!((s.gamma2 - 7.0 * 0.25 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sinr_zero_gain_and_no_rsi() {
        let mut params = unit_test_params();
        let s = sinr(&params, 0.0, 0.0);
        assert_eq!(s.gamma1_fd, 0.0);
        assert_eq!(s.gamma1_hd, 0.0);
        assert_eq!(s.gamma2, 0.0);

        // With no RSI the FD and HD first-hop SINRs coincide.
        params.rsi = Rsi::Fixed(0.0);
        let s = sinr(&params, 0.7, 0.1);
        assert_eq!(s.gamma1_fd, s.gamma1_hd);
    }

    #[test]
    fn rsi_coefficient_scales_with_relay_power() {
        let mut params = unit_test_params();
        params.p2 = 10.0;
        params.rsi = Rsi::Coefficient(0.5);
        assert_eq!(params.rsi_power(), 5.0);
        params.rsi = Rsi::Fixed(5.0);
        assert_eq!(params.rsi_power(), 5.0);
    }

    #[test]
    fn thresholds_match_worked_example() {
        let th = thresholds(&unit_test_params());
        assert!((th.g1_hd - 1.0).abs() < 1e-15);
        assert!((th.g1_fd - 2.0).abs() < 1e-15);
        assert!((th.g2_hd - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gamma0_derived_from_rate_unless_overridden() {
        let mut params = unit_test_params();
        params.gamma0_override = None;
        params.r0 = 1.0;
        assert!((params.gamma0() - 1.0).abs() < 1e-15);
        params.r0 = 2.0;
        assert!((params.gamma0() - 3.0).abs() < 1e-15);
        params.gamma0_override = Some(7.5);
        assert_eq!(params.gamma0(), 7.5);
    }

    #[test]
    fn fd_threshold_never_below_hd_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let params = SystemParams {
                p1: rng.gen::<f64>() * 100.0 + 0.1,
                p2: rng.gen::<f64>() * 100.0 + 0.1,
                sigma2_r: rng.gen::<f64>() * 2.0 + 0.1,
                sigma2_d: rng.gen::<f64>() * 2.0 + 0.1,
                omega1: rng.gen::<f64>() * 2.0 + 0.1,
                omega2: rng.gen::<f64>() * 2.0 + 0.1,
                rsi: Rsi::Fixed(rng.gen::<f64>() * 10.0),
                r0: rng.gen::<f64>() * 6.0 + 0.1,
                gamma0_override: None,
            };
            let th = thresholds(&params);
            assert!(th.g1_fd >= th.g1_hd);
        }
    }

    #[test]
    fn classify_hits_all_six_cells() {
        let th = OutageThresholds { g1_hd: 1.0, g1_fd: 2.0, g2_hd: 1.0 };
        assert_eq!(classify(&th, 2.5, 1.2), Region::R1);
        assert_eq!(classify(&th, 1.5, 1.2), Region::R2);
        assert_eq!(classify(&th, 0.5, 1.2), Region::R3);
        assert_eq!(classify(&th, 1.5, 0.5), Region::R4);
        assert_eq!(classify(&th, 2.5, 0.5), Region::R5);
        assert_eq!(classify(&th, 0.5, 0.5), Region::R6);
    }

    #[test]
    fn classify_boundaries_count_as_success() {
        let th = OutageThresholds { g1_hd: 1.0, g1_fd: 2.0, g2_hd: 1.0 };
        assert_eq!(classify(&th, 2.0, 1.0), Region::R1);
        assert_eq!(classify(&th, 1.0, 1.0), Region::R2);
        assert_eq!(classify(&th, 1.0, 0.999_999), Region::R4);
        assert_eq!(classify(&th, 0.999_999, 1.0), Region::R3);
    }

    #[test]
    fn viability_table_matches_region_definitions() {
        // R1 supports everything; R2 loses FD; R3 only drains; R4/R5 only
        // fill; R6 supports nothing.
        let expect = [
            (Region::R1, [true, true, true]),
            (Region::R2, [true, true, false]),
            (Region::R3, [false, true, false]),
            (Region::R4, [true, false, false]),
            (Region::R5, [true, false, false]),
            (Region::R6, [false, false, false]),
        ];
        for (region, [o1, o2, o3]) in expect {
            let v = region.viability();
            assert_eq!(v.hd_receive, o1, "{region} hd_receive");
            assert_eq!(v.hd_transmit, o2, "{region} hd_transmit");
            assert_eq!(v.full_duplex, o3, "{region} full_duplex");
            assert!(!v.succeeds(Mode::Silent));
        }
    }

    #[test]
    fn viability_consistent_with_sinr_on_sampled_gains() {
        let params = unit_test_params();
        let th = thresholds(&params);
        let gamma0 = params.gamma0();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let (g1, g2) = sample_gains(&params, &mut rng);
            let region = classify(&th, g1, g2);
            let v = region.viability();
            let s = sinr(&params, g1, g2);
            assert_eq!(v.hd_receive, s.gamma1_hd >= gamma0);
            assert_eq!(v.hd_transmit, s.gamma2 >= gamma0);
            assert_eq!(v.full_duplex, s.gamma1_fd >= gamma0 && s.gamma2 >= gamma0);
        }
    }

    #[test]
    fn region_probabilities_match_closed_form_example() {
        // Thresholds (1, 2, 1) with unit fading means: p[R1] = e^-2 * e^-1.
        let rp = region_probabilities(&unit_test_params());
        assert!((rp.get(Region::R1) - (-3.0f64).exp()).abs() < 1e-15);
        assert!((rp.get(Region::R1) - 0.049_787_068_367_863_944).abs() < 1e-15);
    }

    #[test]
    fn region_probabilities_sum_to_one_across_random_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let params = SystemParams {
                p1: rng.gen::<f64>() * 999.0 + 1.0,
                p2: rng.gen::<f64>() * 999.0 + 1.0,
                sigma2_r: rng.gen::<f64>() * 1.5 + 0.5,
                sigma2_d: rng.gen::<f64>() * 1.5 + 0.5,
                omega1: rng.gen::<f64>() * 1.8 + 0.2,
                omega2: rng.gen::<f64>() * 1.8 + 0.2,
                rsi: if rng.gen::<bool>() {
                    Rsi::Fixed(rng.gen::<f64>() * 20.0)
                } else {
                    Rsi::Coefficient(rng.gen::<f64>() * 0.1)
                },
                r0: rng.gen::<f64>() * 6.0 + 0.2,
                gamma0_override: None,
            };
            let rp = region_probabilities(&params);
            let sum: f64 = rp.as_array().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "sum = {sum}");
            assert!(rp.as_array().iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn no_rsi_empties_the_fd_penalty_strip() {
        let mut params = unit_test_params();
        params.rsi = Rsi::Fixed(0.0);
        let rp = region_probabilities(&params);
        assert_eq!(rp.get(Region::R2), 0.0);
        assert_eq!(rp.get(Region::R4), 0.0);
    }

    #[test]
    fn rsi_shifts_mass_without_changing_hop_margins() {
        // Raising RSI drains R1 into R2 (and R5 into R4) but cannot change
        // p1+p2 or p4+p5, which depend only on the per-hop outage odds.
        let mut prev_p1 = f64::INFINITY;
        let mut prev_p2 = -1.0;
        let mut baseline: Option<(f64, f64)> = None;
        for i_r in [0.0, 0.5, 1.0, 2.0, 5.0, 20.0] {
            let mut params = unit_test_params();
            params.rsi = Rsi::Fixed(i_r);
            let rp = region_probabilities(&params);
            let p1 = rp.get(Region::R1);
            let p2 = rp.get(Region::R2);
            assert!(p1 <= prev_p1 + 1e-15);
            assert!(p2 >= prev_p2 - 1e-15);
            prev_p1 = p1;
            prev_p2 = p2;

            let sums = (p1 + p2, rp.get(Region::R4) + rp.get(Region::R5));
            match baseline {
                None => baseline = Some(sums),
                Some((s12, s45)) => {
                    assert!((sums.0 - s12).abs() < 1e-15);
                    assert!((sums.1 - s45).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn sampled_gains_are_deterministic_and_exponential() {
        let params = unit_test_params();
        let mut rng_a = ChaCha8Rng::seed_from_u64(42);
        let mut rng_b = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            assert_eq!(sample_gains(&params, &mut rng_a), sample_gains(&params, &mut rng_b));
        }

        // Empirical CDF at t = omega1 should sit near 1 - e^-1.
        let mut params = unit_test_params();
        params.omega1 = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let mut below = 0u64;
        let mut sum = 0.0;
        for _ in 0..n {
            let (g1, _) = sample_gains(&params, &mut rng);
            assert!(g1.is_finite() && g1 >= 0.0);
            if g1 <= params.omega1 {
                below += 1;
            }
            sum += g1;
        }
        let cdf = below as f64 / n as f64;
        assert!((cdf - (1.0 - (-1.0f64).exp())).abs() < 0.005, "cdf = {cdf}");
        // Sample mean within 3 sigma of omega1 (exponential sd = mean).
        let mean = sum / n as f64;
        assert!((mean - 0.8).abs() < 3.0 * 0.8 / (n as f64).sqrt(), "mean = {mean}");
    }

    #[test]
    fn empirical_region_frequencies_track_probabilities() {
        let params = unit_test_params();
        let th = thresholds(&params);
        let rp = region_probabilities(&params);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 100_000u64;
        let mut counts = [0u64; 6];
        for _ in 0..n {
            let (g1, g2) = sample_gains(&params, &mut rng);
            counts[classify(&th, g1, g2).index()] += 1;
        }
        for region in Region::ALL {
            let p = rp.get(region);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let freq = counts[region.index()] as f64 / n as f64;
            assert!(
                (freq - p).abs() <= 3.0 * se,
                "{region}: freq {freq} vs p {p} (3se = {})",
                3.0 * se
            );
        }
    }

    #[test]
    fn validate_rejects_nonpositive_parameters() {
        let mut params = unit_test_params();
        assert!(params.validate().is_ok());
        params.p1 = 0.0;
        assert!(params.validate().is_err());
        params.p1 = 1.0;
        params.rsi = Rsi::Fixed(-0.5);
        assert!(params.validate().is_err());
        params.rsi = Rsi::Coefficient(0.1);
        params.r0 = -1.0;
        assert!(params.validate().is_err());
    }

    #[test]
    fn probability_vector_validation() {
        assert!(RegionProbabilities::new([0.5, 0.5, 0.0, 0.0, 0.0, 0.0]).is_ok());
        // Dust below zero is clamped, real mass violations are rejected.
        assert!(RegionProbabilities::new([0.5, 0.5, -1e-13, 1e-13, 0.0, 0.0]).is_ok());
        assert!(RegionProbabilities::new([0.5, 0.5, -1e-6, 1e-6, 0.0, 0.0]).is_err());
        assert!(RegionProbabilities::new([0.5, 0.4, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(RegionProbabilities::new([1.5, -0.5, 0.0, 0.0, 0.0, 0.0]).is_err());
    }
}
