//! Python bindings for the relay policy engine and simulator.
//!
//! Exposes the analytic pipeline (region probabilities, case
//! classification, optimal policy, throughput, baselines), the LP oracle
//! with its dual certificate, and the slotted Monte Carlo simulator. The
//! compiled module is named `_bufrelay`; see `python/smoke_test.py` at the
//! repository root for a usage walkthrough.

// #[pyfunction] expands to PyErr-to-PyErr conversions that trip this lint.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bufrelay::channel::{self, RegionProbabilities, Rsi, SystemParams};
use bufrelay::lp;
use bufrelay::policy::{self, BaselineKind, Policy, StatCase};
use bufrelay::sim::{self, BufferMode, SimConfig};
use bufrelay::sweep;

fn value_error(err: bufrelay::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn probabilities(p: [f64; 6]) -> PyResult<RegionProbabilities> {
    RegionProbabilities::new(p).map_err(value_error)
}

fn policy_from_rows(rows: [[f64; 4]; 6]) -> PyResult<Policy> {
    Policy::new(rows).map_err(value_error)
}

fn parse_case(name: &str) -> PyResult<StatCase> {
    name.parse::<StatCase>().map_err(value_error)
}

fn parse_buffer(name: &str) -> PyResult<BufferMode> {
    name.parse::<BufferMode>().map_err(value_error)
}

/// System parameters for one operating point. Powers are linear (use
/// `db_to_linear` to convert); `rsi` is a fixed residual self-interference
/// power while `rsi_coeff` scales it with the relay transmit power — set at
/// most one of them.
#[pyclass(name = "SystemParams", frozen)]
#[derive(Clone)]
struct PySystemParams {
    inner: SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (p1, p2, omega1, omega2, r0, *, sigma2_r = 1.0, sigma2_d = 1.0, rsi = None, rsi_coeff = None, gamma0 = None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        p1: f64,
        p2: f64,
        omega1: f64,
        omega2: f64,
        r0: f64,
        sigma2_r: f64,
        sigma2_d: f64,
        rsi: Option<f64>,
        rsi_coeff: Option<f64>,
        gamma0: Option<f64>,
    ) -> PyResult<Self> {
        let rsi = match (rsi, rsi_coeff) {
            (Some(_), Some(_)) => {
                return Err(PyValueError::new_err(
                    "set either rsi (fixed power) or rsi_coeff (scales with p2), not both",
                ))
            }
            (Some(power), None) => Rsi::Fixed(power),
            (None, Some(k)) => Rsi::Coefficient(k),
            (None, None) => Rsi::Fixed(0.0),
        };
        let inner = SystemParams {
            p1,
            p2,
            sigma2_r,
            sigma2_d,
            omega1,
            omega2,
            rsi,
            r0,
            gamma0_override: gamma0,
        };
        inner.validate().map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn p1(&self) -> f64 {
        self.inner.p1
    }

    #[getter]
    fn p2(&self) -> f64 {
        self.inner.p2
    }

    #[getter]
    fn omega1(&self) -> f64 {
        self.inner.omega1
    }

    #[getter]
    fn omega2(&self) -> f64 {
        self.inner.omega2
    }

    #[getter]
    fn sigma2_r(&self) -> f64 {
        self.inner.sigma2_r
    }

    #[getter]
    fn sigma2_d(&self) -> f64 {
        self.inner.sigma2_d
    }

    #[getter]
    fn r0(&self) -> f64 {
        self.inner.r0
    }

    /// Outage SINR threshold actually in force (override or `2^r0 - 1`).
    fn gamma0(&self) -> f64 {
        self.inner.gamma0()
    }

    /// Residual self-interference power seen by the relay in linear units.
    fn rsi_power(&self) -> f64 {
        self.inner.rsi_power()
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemParams(p1={:?}, p2={:?}, omega1={:?}, omega2={:?}, r0={:?}, sigma2_r={:?}, sigma2_d={:?}, rsi_power={:?}, gamma0={:?})",
            self.inner.p1,
            self.inner.p2,
            self.inner.omega1,
            self.inner.omega2,
            self.inner.r0,
            self.inner.sigma2_r,
            self.inner.sigma2_d,
            self.inner.rsi_power(),
            self.inner.gamma0(),
        )
    }
}

/// Result of one slotted simulation run.
#[pyclass(name = "SimReport", frozen, get_all)]
struct PySimReport {
    horizon: u64,
    warmup: u64,
    seed: u64,
    buffer: String,
    region_counts: [u64; 6],
    mode_counts: [u64; 4],
    selection_counts: [[u64; 4]; 6],
    delivered: u64,
    est_r1: f64,
    est_r2: f64,
    est_throughput: f64,
    final_queue: u64,
    peak_queue: u64,
    trajectory: Vec<(u64, u64)>,
}

#[pymethods]
impl PySimReport {
    fn __repr__(&self) -> String {
        format!(
            "SimReport(horizon={}, seed={}, buffer={:?}, est_throughput={:?}, delivered={})",
            self.horizon, self.seed, self.buffer, self.est_throughput, self.delivered
        )
    }
}

impl From<sim::SimReport> for PySimReport {
    fn from(r: sim::SimReport) -> Self {
        Self {
            horizon: r.horizon,
            warmup: r.warmup,
            seed: r.seed,
            buffer: r.buffer.to_string(),
            region_counts: r.region_counts,
            mode_counts: r.mode_counts,
            selection_counts: r.selection_counts,
            delivered: r.delivered,
            est_r1: r.est_r1,
            est_r2: r.est_r2,
            est_throughput: r.est_throughput,
            final_queue: r.final_queue,
            peak_queue: r.peak_queue,
            trajectory: r.trajectory,
        }
    }
}

/// Converts a dB power figure to linear units.
#[pyfunction]
fn db_to_linear(db: f64) -> f64 {
    channel::db_to_linear(db)
}

/// Stationary probabilities of the six outage regions, in order R1..R6.
#[pyfunction]
fn region_probabilities(params: &PySystemParams) -> PyResult<[f64; 6]> {
    params.inner.validate().map_err(value_error)?;
    Ok(channel::region_probabilities(&params.inner).as_array())
}

/// Statistical case tag ("Psi1".."Psi5") for a region distribution.
#[pyfunction]
fn classify_case(p: [f64; 6]) -> PyResult<String> {
    Ok(policy::classify_case(&probabilities(p)?).to_string())
}

/// Optimal policy for a region distribution: a `(case, rows,
/// degenerate_regions)` triple, where `rows[region][mode]` is the selection
/// probability over modes M1..M4 and degenerate regions are the
/// zero-probability rows forced to stay silent.
#[pyfunction]
fn optimal_policy(p: [f64; 6]) -> PyResult<(String, [[f64; 4]; 6], Vec<String>)> {
    let opt = policy::optimal_policy(&probabilities(p)?);
    let degenerate = opt.degenerate_rows.iter().map(|r| r.to_string()).collect();
    Ok((opt.case.to_string(), *opt.policy.rows(), degenerate))
}

/// Closed-form optimal long-run throughput in bits/slot.
#[pyfunction]
fn optimal_throughput(p: [f64; 6], r0: f64) -> PyResult<f64> {
    Ok(policy::closed_form_throughput(&probabilities(p)?, r0).throughput)
}

/// Baseline throughputs `(hd_optimal, fd_always, fd_preferred)`.
#[pyfunction]
fn baseline_throughputs(p: [f64; 6], r0: f64) -> PyResult<(f64, f64, f64)> {
    let rp = probabilities(p)?;
    let fd_always = rp.get(channel::Region::R1) * r0;
    Ok((
        policy::hd_optimal_throughput(&rp, r0),
        fd_always,
        policy::fd_preferred_throughput(&rp, r0),
    ))
}

/// The mode-selection table for a named baseline ("hd-optimal",
/// "fd-always", or "fd-preferred"), as `(rows, throughput)`.
#[pyfunction]
fn baseline_policy(kind: &str, p: [f64; 6], r0: f64) -> PyResult<([[f64; 4]; 6], f64)> {
    let kind = kind.parse::<BaselineKind>().map_err(value_error)?;
    let rp = probabilities(p)?;
    let baseline = policy::baseline_policy(kind, &rp, r0).map_err(value_error)?;
    Ok((*baseline.policy.rows(), baseline.throughput))
}

/// Independent LP oracle: `(objective, alpha0, support)` where `alpha0` is
/// the dual price of the buffer balance constraint and `support` counts the
/// nonzero allocation entries.
#[pyfunction]
fn lp_optimum(p: [f64; 6], r0: f64) -> PyResult<(f64, f64, usize)> {
    let sol = lp::solve_lp(&probabilities(p)?, r0).map_err(value_error)?;
    Ok((sol.objective, sol.alpha0, sol.support))
}

/// Balance price that certifies each case's optimal policy.
#[pyfunction]
fn case_price(case: &str) -> PyResult<f64> {
    Ok(lp::case_alpha0(parse_case(case)?))
}

/// One certificate violation: (region, mode, gap below the region max).
type ViolationRow = (String, String, f64);

/// Checks a policy against the dual certificate at balance price `alpha0`.
/// Returns `(certified, violations)` with violations as
/// `(region, mode, gap)` tuples.
#[pyfunction]
fn certify_policy(
    p: [f64; 6],
    rows: [[f64; 4]; 6],
    alpha0: f64,
) -> PyResult<(bool, Vec<ViolationRow>)> {
    let rp = probabilities(p)?;
    let cert = lp::certify(&policy_from_rows(rows)?, &rp, alpha0);
    let violations = cert
        .violations
        .iter()
        .map(|v| (v.region.to_string(), v.mode.to_string(), v.gap))
        .collect();
    Ok((cert.certified, violations))
}

/// Runs one slotted Monte Carlo simulation. `policy=None` simulates the
/// optimal policy for the operating point; otherwise pass explicit
/// `rows[region][mode]` selection probabilities. `buffer` is "ideal"
/// (rate accounting, backlog never binds) or "strict" (integer queue,
/// delivery requires a buffered packet).
#[pyfunction]
#[pyo3(signature = (params, *, horizon = 1_000_000, warmup = 10_000, seed = 1, buffer = "ideal", policy = None))]
fn simulate(
    params: &PySystemParams,
    horizon: u64,
    warmup: u64,
    seed: u64,
    buffer: &str,
    policy: Option<[[f64; 4]; 6]>,
) -> PyResult<PySimReport> {
    let rp = channel::region_probabilities(&params.inner);
    let policy = match policy {
        Some(rows) => policy_from_rows(rows)?,
        None => policy::optimal_policy(&rp).policy,
    };
    let config = SimConfig {
        params: params.inner.clone(),
        policy,
        horizon,
        warmup,
        seed,
        buffer: parse_buffer(buffer)?,
    };
    Ok(sim::simulate(&config).map_err(value_error)?.into())
}

/// Estimates how the relay backlog scales with time under a policy:
/// `(horizons, mean_queues, exponent)`. The exponent is the least-squares
/// slope of log mean backlog versus log horizon — near 0.5 for a balanced
/// policy (diffusive), near 1.0 under positive drift.
#[pyfunction]
#[pyo3(signature = (params, rows, *, buffer = "strict", replicas = 50, min_pow = 10, max_pow = 18, seed = 1))]
#[allow(clippy::too_many_arguments)]
fn queue_growth_probe(
    params: &PySystemParams,
    rows: [[f64; 4]; 6],
    buffer: &str,
    replicas: u64,
    min_pow: u32,
    max_pow: u32,
    seed: u64,
) -> PyResult<(Vec<u64>, Vec<f64>, f64)> {
    let probe = sim::queue_growth_probe(
        &params.inner,
        &policy_from_rows(rows)?,
        parse_buffer(buffer)?,
        replicas,
        min_pow,
        max_pow,
        seed,
    )
    .map_err(value_error)?;
    Ok((probe.horizons, probe.mean_queue, probe.exponent))
}

/// Names of the built-in parameter presets.
#[pyfunction]
fn preset_names() -> Vec<String> {
    sweep::preset_names().iter().map(|s| s.to_string()).collect()
}

/// System parameters of a named preset (at the preset's base operating
/// point; the swept axis stays at its base value).
#[pyfunction]
fn preset_params(name: &str) -> PyResult<PySystemParams> {
    let config = sweep::preset(name).map_err(value_error)?;
    Ok(PySystemParams { inner: config.params })
}

#[pymodule]
fn _bufrelay(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PySimReport>()?;
    m.add_function(wrap_pyfunction!(db_to_linear, m)?)?;
    m.add_function(wrap_pyfunction!(region_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(classify_case, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_policy, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_throughput, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_throughputs, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_policy, m)?)?;
    m.add_function(wrap_pyfunction!(lp_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(case_price, m)?)?;
    m.add_function(wrap_pyfunction!(certify_policy, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(queue_growth_probe, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(preset_params, m)?)?;
    Ok(())
}
