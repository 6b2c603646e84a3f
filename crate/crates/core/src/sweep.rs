//! Parameter presets, axis sweeps, and report serialization.
//!
//! A sweep fixes every system parameter except one axis (target rate or a
//! node power in dB), evaluates the closed-form throughputs at each grid
//! point, and optionally runs the slotted simulator per point. Points are
//! independent, so they run in parallel; per-point seeds are derived from
//! the base seed with a mixing function, which keeps the report
//! byte-identical for a given configuration regardless of thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, region_probabilities, Region, Rsi, SystemParams};
use crate::policy::{
    baseline_policy, closed_form_throughput, fd_preferred_throughput, hd_optimal_throughput,
    optimal_policy, BaselineKind,
};
use crate::sim::{simulate, BufferMode, SimConfig};
use crate::Error;

/// The parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    R0,
    P1Db,
    P2Db,
}

impl Axis {
    fn apply(self, params: &mut SystemParams, value: f64) {
        match self {
            Axis::R0 => params.r0 = value,
            Axis::P1Db => params.p1 = db_to_linear(value),
            Axis::P2Db => params.p2 = db_to_linear(value),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::R0 => "r0",
            Axis::P1Db => "p1_db",
            Axis::P2Db => "p2_db",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "r0" => Ok(Axis::R0),
            "p1_db" => Ok(Axis::P1Db),
            "p2_db" => Ok(Axis::P2Db),
            other => Err(Error::InvalidConfig(format!(
                "unknown axis {other:?} (expected r0, p1_db, or p2_db)"
            ))),
        }
    }
}

/// Which policy the simulator runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyChoice {
    Optimal,
    Baseline(BaselineKind),
}

impl std::fmt::Display for PolicyChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicyChoice::Optimal => f.write_str("optimal"),
            PolicyChoice::Baseline(kind) => write!(f, "{kind}"),
        }
    }
}

impl std::str::FromStr for PolicyChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "optimal" => Ok(PolicyChoice::Optimal),
            other => other.parse::<BaselineKind>().map(PolicyChoice::Baseline).map_err(|_| {
                Error::InvalidConfig(format!(
                    "unknown policy {other:?} (expected optimal, hd-optimal, fd-always, or fd-preferred)"
                ))
            }),
        }
    }
}

/// Full description of a sweep (or of a single-point run, when the grid
/// has one value).
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Base parameters; the axis overwrites one of them per point.
    pub params: SystemParams,
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub policy: PolicyChoice,
    /// Attach Monte Carlo estimates to every grid point.
    pub simulate: bool,
    pub horizon: u64,
    pub warmup: u64,
    pub seed: u64,
    pub buffer: BufferMode,
    /// Name of the preset this config was derived from, if any.
    pub preset: Option<String>,
}

/// Keys accepted by [`RunConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "p1_db", "p1", "p2_db", "p2", "sigma2_r", "sigma2_d", "omega1", "omega2", "rsi", "rsi_db",
    "rsi_coeff", "r0", "gamma0", "axis", "start", "stop", "step", "policy", "simulate",
    "horizon", "warmup", "seed", "buffer",
];

impl Default for RunConfig {
    fn default() -> Self {
        preset("fig3a").expect("default preset exists")
    }
}

impl RunConfig {
    /// Applies one `key=value` override. Unknown keys and unparsable
    /// values are configuration errors that name the offender.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        fn num(key: &str, value: &str) -> Result<f64, Error> {
            value.parse::<f64>().map_err(|_| {
                Error::InvalidConfig(format!("{key} expects a number, got {value:?}"))
            })
        }
        fn int(key: &str, value: &str) -> Result<u64, Error> {
            value.parse::<u64>().map_err(|_| {
                Error::InvalidConfig(format!("{key} expects a non-negative integer, got {value:?}"))
            })
        }
        match key {
            "p1_db" => self.params.p1 = db_to_linear(num(key, value)?),
            "p1" => self.params.p1 = num(key, value)?,
            "p2_db" => self.params.p2 = db_to_linear(num(key, value)?),
            "p2" => self.params.p2 = num(key, value)?,
            "sigma2_r" => self.params.sigma2_r = num(key, value)?,
            "sigma2_d" => self.params.sigma2_d = num(key, value)?,
            "omega1" => self.params.omega1 = num(key, value)?,
            "omega2" => self.params.omega2 = num(key, value)?,
            "rsi" => self.params.rsi = Rsi::Fixed(num(key, value)?),
            "rsi_db" => self.params.rsi = Rsi::Fixed(db_to_linear(num(key, value)?)),
            "rsi_coeff" => self.params.rsi = Rsi::Coefficient(num(key, value)?),
            "r0" => self.params.r0 = num(key, value)?,
            "gamma0" => {
                self.params.gamma0_override =
                    if value == "auto" { None } else { Some(num(key, value)?) }
            }
            "axis" => self.axis = value.parse()?,
            "start" => self.start = num(key, value)?,
            "stop" => self.stop = num(key, value)?,
            "step" => self.step = num(key, value)?,
            "policy" => self.policy = value.parse()?,
            "simulate" => {
                self.simulate = value.parse::<bool>().map_err(|_| {
                    Error::InvalidConfig(format!("simulate expects true or false, got {value:?}"))
                })?
            }
            "horizon" => self.horizon = int(key, value)?,
            "warmup" => self.warmup = int(key, value)?,
            "seed" => self.seed = int(key, value)?,
            "buffer" => self.buffer = value.parse()?,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown key {other:?}; valid keys: {}",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// The axis grid `start, start+step, ..., stop` (stop included when it
    /// lands on the grid up to rounding).
    pub fn axis_values(&self) -> Result<Vec<f64>, Error> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(Error::InvalidConfig(format!("step must be positive, got {}", self.step)));
        }
        if self.stop < self.start {
            return Err(Error::InvalidConfig(format!(
                "stop {} is below start {}",
                self.stop, self.start
            )));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.start + i as f64 * self.step).collect())
    }
}

/// Named parameter sets. Variance of the fading on each hop and both noise
/// floors stay at their common values; each preset picks powers, fading
/// scales, self-interference, and an axis.
pub fn preset(name: &str) -> Result<RunConfig, Error> {
    let base = SystemParams {
        p1: db_to_linear(25.0),
        p2: db_to_linear(25.0),
        sigma2_r: 1.0,
        sigma2_d: 1.0,
        omega1: 0.8,
        omega2: 0.6,
        rsi: Rsi::Fixed(5.0),
        r0: 2.0,
        gamma0_override: None,
    };
    let rate_axis = |params: SystemParams| RunConfig {
        params,
        axis: Axis::R0,
        start: 0.25,
        stop: 12.0,
        step: 0.25,
        policy: PolicyChoice::Optimal,
        simulate: false,
        horizon: 1_000_000,
        warmup: 10_000,
        seed: 1,
        buffer: BufferMode::Ideal,
        preset: Some(name.to_string()),
    };
    match name {
        // Throughput vs target rate, relay-favored link.
        "fig3a" => Ok(rate_axis(base)),
        // Both hops equally strong on average: the time-sharing case
        // dominates the whole rate range.
        "fig3b" => Ok(rate_axis(SystemParams { p1: db_to_linear(23.75), ..base })),
        // Second hop stronger.
        "fig3c" => Ok(rate_axis(SystemParams { p2: db_to_linear(30.0), ..base })),
        // High power on both hops with heavy self-interference; override
        // `rsi` to compare interference levels.
        "fig4" => Ok(rate_axis(SystemParams {
            p1: db_to_linear(30.0),
            p2: db_to_linear(30.0),
            rsi: Rsi::Fixed(20.0),
            ..base
        })),
        // Throughput vs source power.
        "fig5" => Ok(RunConfig {
            axis: Axis::P1Db,
            start: 0.0,
            stop: 60.0,
            step: 1.0,
            ..rate_axis(SystemParams {
                p2: db_to_linear(30.0),
                omega2: 0.8,
                r0: 4.0,
                ..base
            })
        }),
        // Throughput vs relay power, with self-interference tied to it.
        "fig6" => Ok(RunConfig {
            axis: Axis::P2Db,
            start: 0.0,
            stop: 60.0,
            step: 0.5,
            ..rate_axis(SystemParams {
                p1: db_to_linear(30.0),
                p2: db_to_linear(30.0),
                rsi: Rsi::Coefficient(1.0),
                r0: 4.0,
                ..base
            })
        }),
        other => Err(Error::InvalidConfig(format!(
            "unknown preset {other:?}; available: {}",
            preset_names().join(", ")
        ))),
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &["fig3a", "fig3b", "fig3c", "fig4", "fig5", "fig6"]
}

/// One grid point of a sweep. Analytic columns are always present; `sim_*`
/// columns are filled only when the sweep simulates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepRow {
    /// Axis value (target rate, or power in dB).
    pub value: f64,
    /// Statistical case tag at this point ("Psi1".."Psi5").
    pub case: String,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub p5: f64,
    pub p6: f64,
    /// Closed-form optimal throughput, bits/slot.
    pub t_optimal: f64,
    pub t_hd_optimal: f64,
    pub t_fd_always: f64,
    pub t_fd_preferred: f64,
    pub sim_throughput: Option<f64>,
    pub sim_stderr: Option<f64>,
    pub sim_r1: Option<f64>,
    pub sim_r2: Option<f64>,
}

/// A finished sweep: the configuration echo plus one row per grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub preset: Option<String>,
    pub axis: String,
    pub policy: String,
    pub simulate: bool,
    pub buffer: BufferMode,
    pub horizon: u64,
    pub warmup: u64,
    pub seed: u64,
    pub params: SystemParams,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Pretty JSON with a trailing newline (stable for file comparison).
    pub fn to_json(&self) -> Result<String, Error> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("json encode: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// CSV of the rows only (header + one line per point).
    pub fn to_csv(&self) -> Result<String, Error> {
        rows_to_csv(&self.rows)
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Parse(format!("csv encode: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(format!("csv utf8: {e}")))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<SweepRow>, Error> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .collect::<Result<Vec<SweepRow>, _>>()
        .map_err(|e| Error::Parse(format!("csv decode: {e}")))
}

/// Derives a per-point seed from the base seed: a bijective mix keeps
/// points statistically independent while the report stays reproducible.
fn point_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Evaluates the whole grid. Grid points run in parallel; the row order and
/// every value in it are independent of the thread schedule.
pub fn run_sweep(config: &RunConfig) -> Result<SweepReport, Error> {
    let values = config.axis_values()?;
    let rows: Result<Vec<SweepRow>, Error> = values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let mut params = config.params.clone();
            config.axis.apply(&mut params, value);
            params.validate()?;
            let rp = region_probabilities(&params);
            let p = rp.as_array();
            let report = closed_form_throughput(&rp, params.r0);
            let mut row = SweepRow {
                value,
                case: report.case.to_string(),
                p1: p[0],
                p2: p[1],
                p3: p[2],
                p4: p[3],
                p5: p[4],
                p6: p[5],
                t_optimal: report.throughput,
                t_hd_optimal: hd_optimal_throughput(&rp, params.r0),
                t_fd_always: rp.get(Region::R1) * params.r0,
                t_fd_preferred: fd_preferred_throughput(&rp, params.r0),
                sim_throughput: None,
                sim_stderr: None,
                sim_r1: None,
                sim_r2: None,
            };
            if config.simulate {
                let r0 = params.r0;
                let policy = match config.policy {
                    PolicyChoice::Optimal => optimal_policy(&rp).policy,
                    PolicyChoice::Baseline(kind) => baseline_policy(kind, &rp, params.r0)?.policy,
                };
                let sim = simulate(&SimConfig {
                    params,
                    policy,
                    horizon: config.horizon,
                    warmup: config.warmup,
                    seed: point_seed(config.seed, i as u64),
                    buffer: config.buffer,
                })?;
                let n = config.horizon as f64;
                let phat = (sim.delivered as f64 / n).clamp(0.0, 1.0);
                row.sim_throughput = Some(sim.est_throughput);
                row.sim_stderr = Some(r0 * (phat * (1.0 - phat) / n).sqrt());
                row.sim_r1 = Some(sim.est_r1);
                row.sim_r2 = Some(sim.est_r2);
            }
            Ok(row)
        })
        .collect();
    Ok(SweepReport {
        preset: config.preset.clone(),
        axis: config.axis.to_string(),
        policy: config.policy.to_string(),
        simulate: config.simulate,
        buffer: config.buffer,
        horizon: config.horizon,
        warmup: config.warmup,
        seed: config.seed,
        params: config.params.clone(),
        rows: rows?,
    })
}
