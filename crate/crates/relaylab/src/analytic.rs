//! Stationary-throughput solvers for proportional-fair scheduling with and
//! without a half-duplex relay phase.
//!
//! The scheduler picks `argmax_i b_i h_i[t] / theta_i[t]` each slot. In the
//! small-step limit the averages settle at the stationary point
//! `theta_i = E[h_i * 1{i wins}]`, which this module evaluates in closed form
//! for exponential gains and solves by damped fixed-point iteration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{
    validate_flows, FixedPointReport, FlowClass, FlowSpec, RelayPhaseConfig, ThroughputVector,
};

/// Largest population for which the exact inclusion-exclusion sum is
/// evaluated (2^19 subsets for the largest competitor set). Beyond this,
/// use `mc::estimate_winner_expectation`.
pub const MAX_EXACT_FLOWS: usize = 20;

/// n-th harmonic number `H_n = 1 + 1/2 + ... + 1/n`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Round-robin throughput per scheduled slot: `1/lambda_i`.
///
/// Every flow's slot share is `1/n`, and a scheduled slot credits the mean
/// gain, so conditioned on being scheduled a flow averages `1/lambda_i`.
pub fn rr_closed_form(flows: &[FlowSpec]) -> Result<ThroughputVector> {
    validate_flows(flows)?;
    Ok(flows.iter().map(|f| 1.0 / f.lambda_r).collect::<Vec<_>>().into())
}

/// Round-robin throughput per slot overall: `1/(n * lambda_i)`.
pub fn rr_share_of_slots(flows: &[FlowSpec]) -> Result<ThroughputVector> {
    validate_flows(flows)?;
    let n = flows.len() as f64;
    Ok(flows
        .iter()
        .map(|f| 1.0 / (n * f.lambda_r))
        .collect::<Vec<_>>()
        .into())
}

/// Proportional-fair stationary throughput without a relay phase:
/// `theta_i = (H_n / n) / lambda_i`.
///
/// All flows must be direct with neutral incentives; the single-phase gain
/// rate is taken from `lambda_r`.
pub fn pf_closed_form_norelay(flows: &[FlowSpec]) -> Result<ThroughputVector> {
    validate_flows(flows)?;
    require_all_direct(flows)?;
    let n = flows.len();
    let factor = harmonic(n) / n as f64;
    Ok(flows
        .iter()
        .map(|f| factor / f.lambda_r)
        .collect::<Vec<_>>()
        .into())
}

fn require_all_direct(flows: &[FlowSpec]) -> Result<()> {
    if let Some(f) = flows.iter().find(|f| f.is_relayed()) {
        return Err(Error::domain(format!(
            "flow {}: no-relay operations accept direct flows only",
            f.id
        )));
    }
    Ok(())
}

fn validate_theta(theta: &[f64], n: usize) -> Result<()> {
    if theta.len() != n {
        return Err(Error::domain(format!(
            "theta has {} entries for {n} flows",
            theta.len()
        )));
    }
    if let Some(t) = theta.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::domain(format!(
            "theta entries must be finite and > 0, got {t}"
        )));
    }
    Ok(())
}

fn check_exact_cap(n: usize) -> Result<()> {
    if n > MAX_EXACT_FLOWS {
        return Err(Error::domain(format!(
            "exact inclusion-exclusion is capped at {MAX_EXACT_FLOWS} flows, got {n}; \
             use mc::estimate_winner_expectation instead"
        )));
    }
    Ok(())
}

/// Competitor exponents `c_j = lambda_j * w_i * theta_j / (w_j * theta_i)`.
///
/// Flow `j` beats flow `i` holding gain `x` iff `h_j > w_i theta_j x /
/// (w_j theta_i)`, an event of probability `exp(-c_j x)`.
fn competitor_coefficients(i: usize, rates: &[f64], weights: &[f64], theta: &[f64]) -> Vec<f64> {
    (0..rates.len())
        .filter(|&j| j != i)
        .map(|j| rates[j] * weights[i] * theta[j] / (weights[j] * theta[i]))
        .collect()
}

/// Inclusion-exclusion over competitor subsets. `term(d)` receives
/// `d = lambda_i + sum_{j in S} c_j` and the result is
/// `sum_S (-1)^{|S|} term(d)`.
fn inclusion_exclusion(lambda_i: f64, c: &[f64], term: impl Fn(f64) -> f64) -> f64 {
    let m = c.len();
    debug_assert!(m < 32);
    let mut acc = 0.0;
    for mask in 0u32..(1u32 << m) {
        let mut s = 0.0;
        let mut bits = mask;
        while bits != 0 {
            s += c[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * term(lambda_i + s);
    }
    acc
}

fn winner_expectation_raw(i: usize, rates: &[f64], weights: &[f64], theta: &[f64]) -> f64 {
    let c = competitor_coefficients(i, rates, weights, theta);
    inclusion_exclusion(rates[i], &c, |d| rates[i] / (d * d))
}

fn win_probability_raw(i: usize, rates: &[f64], weights: &[f64], theta: &[f64]) -> f64 {
    let c = competitor_coefficients(i, rates, weights, theta);
    inclusion_exclusion(rates[i], &c, |d| rates[i] / d)
}

/// `E[h_i * 1{i wins}]` for one shared competition slot.
///
/// Gains are `Exp(lambda_r)` and the scheduler maximizes
/// `incentive_j * h_j / theta_j`. Exact up to [`MAX_EXACT_FLOWS`] flows.
pub fn winner_expectation(i: usize, flows: &[FlowSpec], theta: &[f64]) -> Result<f64> {
    validate_flows(flows)?;
    validate_theta(theta, flows.len())?;
    check_exact_cap(flows.len())?;
    if i >= flows.len() {
        return Err(Error::domain(format!("flow index {i} out of range")));
    }
    let rates: Vec<f64> = flows.iter().map(|f| f.lambda_r).collect();
    let weights: Vec<f64> = flows.iter().map(|f| f.incentive).collect();
    Ok(winner_expectation_raw(i, &rates, &weights, theta))
}

/// `P(i wins)` under the same competition as [`winner_expectation`].
pub fn win_probability(i: usize, flows: &[FlowSpec], theta: &[f64]) -> Result<f64> {
    validate_flows(flows)?;
    validate_theta(theta, flows.len())?;
    check_exact_cap(flows.len())?;
    if i >= flows.len() {
        return Err(Error::domain(format!("flow index {i} out of range")));
    }
    let rates: Vec<f64> = flows.iter().map(|f| f.lambda_r).collect();
    let weights: Vec<f64> = flows.iter().map(|f| f.incentive).collect();
    Ok(win_probability_raw(i, &rates, &weights, theta))
}

/// Damped fixed-point iteration controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Max-norm residual below which the iterate is accepted.
    pub tolerance: f64,
    pub max_iter: u64,
    /// Step fraction toward the mapped value, in (0, 1].
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_iter: 100_000,
            damping: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::domain("tolerance must be finite and > 0"));
        }
        if self.max_iter == 0 {
            return Err(Error::domain("max_iter must be >= 1"));
        }
        if !(self.damping.is_finite() && self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::domain("damping must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Runs `theta <- (1 - eta) theta + eta F(theta)` from `init` until the
/// max-norm residual `|F(theta) - theta|` falls below tolerance.
fn damped_iteration(
    init: Vec<f64>,
    opts: &SolverOptions,
    map: impl Fn(&[f64]) -> Vec<f64>,
) -> FixedPointReport {
    let n = init.len();
    let mut theta = init;
    let mut residuals = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0u64;
    let mut converged = false;
    while iterations < opts.max_iter {
        let mapped = map(&theta);
        for i in 0..n {
            residuals[i] = (mapped[i] - theta[i]).abs();
        }
        residual = residuals.iter().fold(0.0, |a: f64, &r| a.max(r));
        iterations += 1;
        if residual <= opts.tolerance {
            theta = mapped;
            converged = true;
            break;
        }
        for i in 0..n {
            theta[i] = (1.0 - opts.damping) * theta[i] + opts.damping * mapped[i];
        }
    }
    FixedPointReport {
        theta: theta.into(),
        residuals,
        residual,
        iterations,
        converged,
    }
}

/// Solves `theta_i = E[h_i 1{i wins}]` for a single-phase all-direct
/// population with gains `Exp(lambda_r)`.
pub fn fixed_point_norelay(flows: &[FlowSpec], opts: &SolverOptions) -> Result<FixedPointReport> {
    validate_flows(flows)?;
    require_all_direct(flows)?;
    check_exact_cap(flows.len())?;
    opts.validate()?;
    let rates: Vec<f64> = flows.iter().map(|f| f.lambda_r).collect();
    let weights = vec![1.0; flows.len()];
    let init: Vec<f64> = rates.iter().map(|l| 1.0 / l).collect();
    Ok(damped_iteration(init, opts, |theta| {
        (0..rates.len())
            .map(|i| winner_expectation_raw(i, &rates, &weights, theta))
            .collect()
    }))
}

/// Solves the two-phase stationary system under half-duplex relay timing.
///
/// A fraction `alpha` of slots forms the relay phase, where every flow
/// competes with gains `Exp(lambda_r)` and relayed flows carry weight
/// `beta * incentive`. The remaining slots form the access phase, where only
/// direct flows compete with gains `Exp(lambda_a)`. Stationary averages:
///
/// - direct:  `theta_i = alpha E_r(i) + (1 - alpha) E_a(i)`
/// - relayed: `theta_i = alpha E_r(i)`
///
/// `alpha = 0` and `alpha = 1` collapse to single-phase systems and are
/// solved directly.
pub fn fixed_point_relay(
    flows: &[FlowSpec],
    phase: &RelayPhaseConfig,
    opts: &SolverOptions,
) -> Result<FixedPointReport> {
    validate_flows(flows)?;
    check_exact_cap(flows.len())?;
    opts.validate()?;
    let n = flows.len();
    let alpha = phase.alpha();
    let beta = phase.beta();

    let rates_r: Vec<f64> = flows.iter().map(|f| f.lambda_r).collect();
    let weights_r: Vec<f64> = flows
        .iter()
        .map(|f| if f.is_relayed() { beta * f.incentive } else { 1.0 })
        .collect();
    let direct_idx: Vec<usize> = (0..n).filter(|&i| flows[i].is_direct()).collect();

    if alpha == 0.0 {
        // Relay phase vanishes: relayed flows starve, direct flows run plain
        // proportional fair on access gains.
        let mut theta = vec![0.0; n];
        if direct_idx.is_empty() {
            return Ok(FixedPointReport {
                theta: theta.into(),
                residuals: vec![0.0; n],
                residual: 0.0,
                iterations: 0,
                converged: true,
            });
        }
        let rates_a: Vec<f64> = direct_idx
            .iter()
            .map(|&i| flows[i].lambda_a_required())
            .collect::<Result<_>>()?;
        let weights_a = vec![1.0; rates_a.len()];
        let init: Vec<f64> = rates_a.iter().map(|l| 1.0 / l).collect();
        let sub = damped_iteration(init, opts, |t| {
            (0..rates_a.len())
                .map(|i| winner_expectation_raw(i, &rates_a, &weights_a, t))
                .collect()
        });
        let mut residuals = vec![0.0; n];
        for (k, &i) in direct_idx.iter().enumerate() {
            theta[i] = sub.theta[k];
            residuals[i] = sub.residuals[k];
        }
        return Ok(FixedPointReport {
            theta: theta.into(),
            residuals,
            residual: sub.residual,
            iterations: sub.iterations,
            converged: sub.converged,
        });
    }

    if alpha == 1.0 {
        // Access phase vanishes: one weighted competition over all flows.
        let init: Vec<f64> = rates_r.iter().map(|l| 1.0 / l).collect();
        return Ok(damped_iteration(init, opts, |theta| {
            (0..n)
                .map(|i| winner_expectation_raw(i, &rates_r, &weights_r, theta))
                .collect()
        }));
    }

    let rates_a: Vec<f64> = direct_idx
        .iter()
        .map(|&i| flows[i].lambda_a_required())
        .collect::<Result<_>>()?;
    let weights_a = vec![1.0; rates_a.len()];

    let init: Vec<f64> = flows
        .iter()
        .map(|f| match f.class {
            FlowClass::Direct => {
                alpha / f.lambda_r + (1.0 - alpha) / f.lambda_a.expect("validated above")
            }
            FlowClass::Relayed => alpha / f.lambda_r,
        })
        .collect();

    Ok(damped_iteration(init, opts, |theta| {
        let theta_a: Vec<f64> = direct_idx.iter().map(|&i| theta[i]).collect();
        let mut access = vec![0.0; direct_idx.len()];
        for k in 0..direct_idx.len() {
            access[k] = winner_expectation_raw(k, &rates_a, &weights_a, &theta_a);
        }
        (0..n)
            .map(|i| {
                let relay = alpha * winner_expectation_raw(i, &rates_r, &weights_r, theta);
                match flows[i].class {
                    FlowClass::Direct => {
                        let k = direct_idx.iter().position(|&d| d == i).expect("direct");
                        relay + (1.0 - alpha) * access[k]
                    }
                    FlowClass::Relayed => relay,
                }
            })
            .collect()
    }))
}

/// Closed-form `beta -> infinity` limit of [`fixed_point_relay`].
///
/// Relayed flows preempt the whole relay phase and split it by plain
/// proportional fair on `lambda_r`; direct flows keep only the access phase
/// and split it by proportional fair on `lambda_a`:
///
/// - direct:  `theta_i = (1 - alpha) (H_D / D) / lambda_a`
/// - relayed: `theta_i = alpha (H_R / R) / lambda_r`
///
/// Requires equal incentives across relayed flows; unequal incentives keep
/// finite weight ratios in the limit and the closed form does not apply.
pub fn beta_asymptote(flows: &[FlowSpec], phase: &RelayPhaseConfig) -> Result<ThroughputVector> {
    validate_flows(flows)?;
    let alpha = phase.alpha();
    let relayed: Vec<&FlowSpec> = flows.iter().filter(|f| f.is_relayed()).collect();
    if let Some(f) = relayed.iter().find(|f| f.incentive != relayed[0].incentive) {
        return Err(Error::domain(format!(
            "flow {}: beta_asymptote requires equal incentives across relayed flows",
            f.id
        )));
    }
    let n_direct = flows.iter().filter(|f| f.is_direct()).count();
    let n_relayed = relayed.len();
    let pf_direct = if n_direct > 0 {
        harmonic(n_direct) / n_direct as f64
    } else {
        0.0
    };
    let pf_relayed = if n_relayed > 0 {
        harmonic(n_relayed) / n_relayed as f64
    } else {
        0.0
    };
    let theta = flows
        .iter()
        .map(|f| match f.class {
            FlowClass::Direct => {
                if alpha == 1.0 {
                    Ok(0.0)
                } else {
                    Ok((1.0 - alpha) * pf_direct / f.lambda_a_required()?)
                }
            }
            FlowClass::Relayed => Ok(alpha * pf_relayed / f.lambda_r),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(theta.into())
}

/// Incentive that balances relay-phase and access-phase scheduling pressure:
/// `beta = alpha lambda_r / ((1 - alpha) lambda_a)`.
///
/// `alpha` must lie strictly inside (0, 1); the rule is meaningless when one
/// phase is absent. Values below 1 mean no incentive is needed.
pub fn recommended_beta(alpha: f64, lambda_r: f64, lambda_a: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie strictly in (0, 1), got {alpha}"
        )));
    }
    for (name, v) in [("lambda_r", lambda_r), ("lambda_a", lambda_a)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    Ok(alpha * lambda_r / ((1.0 - alpha) * lambda_a))
}

/// End-to-end efficiency of a two-hop pipe with per-phase spectral
/// efficiencies `rho_r` (backhaul) and `rho_a` (access):
/// `theta = rho_r rho_a / (rho_r + rho_a)`.
pub fn end_to_end_efficiency(rho_r: f64, rho_a: f64) -> Result<f64> {
    validate_rho(rho_r, rho_a)?;
    Ok(rho_r * rho_a / (rho_r + rho_a))
}

/// Time split maximizing two-hop end-to-end throughput
/// `min(alpha rho_r, (1 - alpha) rho_a)`: `alpha* = rho_a / (rho_r + rho_a)`.
pub fn optimal_split(rho_r: f64, rho_a: f64) -> Result<f64> {
    validate_rho(rho_r, rho_a)?;
    Ok(rho_a / (rho_r + rho_a))
}

/// Two-hop end-to-end rate delivered at split `alpha`; maximized by
/// [`optimal_split`] where it equals [`end_to_end_efficiency`].
pub fn two_hop_rate(alpha: f64, rho_r: f64, rho_a: f64) -> Result<f64> {
    validate_rho(rho_r, rho_a)?;
    if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
        return Err(Error::domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok((alpha * rho_r).min((1.0 - alpha) * rho_a))
}

fn validate_rho(rho_r: f64, rho_a: f64) -> Result<()> {
    for (name, v) in [("rho_r", rho_r), ("rho_a", rho_a)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    Ok(())
}

/// Which knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Relayed-flow incentive, values >= 1.
    Beta,
    /// Relay-phase fraction, values in [0, 1].
    Alpha,
    /// Access-to-relay mean gain ratio for direct flows, values > 0;
    /// applied as `lambda_a = lambda_r / gamma`.
    Gamma,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Beta => "beta",
            SweepParameter::Alpha => "alpha",
            SweepParameter::Gamma => "gamma",
        }
    }
}

/// One solved sweep grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub theta: ThroughputVector,
    pub residual: f64,
    pub iterations: u64,
    pub converged: bool,
}

/// Solved sweep, rows ascending in parameter value.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub flow_ids: Vec<usize>,
    pub flow_classes: Vec<FlowClass>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// CSV with one row per grid point. Non-convergence is flagged per row,
    /// never dropped.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(self.parameter.name());
        for (id, class) in self.flow_ids.iter().zip(&self.flow_classes) {
            out.push_str(&format!(",theta_flow{id}_{class}"));
        }
        out.push_str(",residual,iterations,converged\n");
        for row in &self.rows {
            out.push_str(&format!("{}", row.value));
            for t in row.theta.iter() {
                out.push_str(&format!(",{t}"));
            }
            out.push_str(&format!(
                ",{},{},{}\n",
                row.residual, row.iterations, row.converged
            ));
        }
        out
    }

    /// Column of stationary throughputs for one flow id.
    pub fn theta_column(&self, flow_id: usize) -> Option<Vec<f64>> {
        let k = self.flow_ids.iter().position(|&id| id == flow_id)?;
        Some(self.rows.iter().map(|r| r.theta[k]).collect())
    }
}

/// Solves [`fixed_point_relay`] across a parameter grid. Grid values are
/// validated up front; individual non-convergence is flagged per row.
pub fn sweep(
    parameter: SweepParameter,
    values: &[f64],
    flows: &[FlowSpec],
    phase: &RelayPhaseConfig,
    opts: &SolverOptions,
) -> Result<SweepTable> {
    validate_flows(flows)?;
    opts.validate()?;
    if values.is_empty() {
        return Err(Error::domain("sweep needs at least one grid value"));
    }
    for &v in values {
        let ok = match parameter {
            SweepParameter::Beta => v.is_finite() && v >= 1.0,
            SweepParameter::Alpha => v.is_finite() && (0.0..=1.0).contains(&v),
            SweepParameter::Gamma => v.is_finite() && v > 0.0,
        };
        if !ok {
            return Err(Error::domain(format!(
                "sweep value {v} out of range for parameter {}",
                parameter.name()
            )));
        }
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));

    let rows: Vec<SweepRow> = sorted
        .par_iter()
        .map(|&v| -> Result<SweepRow> {
            let report = match parameter {
                SweepParameter::Beta => fixed_point_relay(flows, &phase.with_beta(v)?, opts)?,
                SweepParameter::Alpha => fixed_point_relay(flows, &phase.with_alpha(v)?, opts)?,
                SweepParameter::Gamma => {
                    let adjusted: Vec<FlowSpec> = flows
                        .iter()
                        .map(|f| {
                            let mut f = f.clone();
                            if f.is_direct() {
                                f.lambda_a = Some(f.lambda_r / v);
                            }
                            f
                        })
                        .collect();
                    fixed_point_relay(&adjusted, phase, opts)?
                }
            };
            Ok(SweepRow {
                value: v,
                theta: report.theta,
                residual: report.residual,
                iterations: report.iterations,
                converged: report.converged,
            })
        })
        .collect::<Result<_>>()?;

    Ok(SweepTable {
        parameter,
        flow_ids: flows.iter().map(|f| f.id).collect(),
        flow_classes: flows.iter().map(|f| f.class).collect(),
        rows,
    })
}

/// Log-spaced grid from `from` to `to` inclusive.
pub fn log_space(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && from > 0.0 && to > from) {
        return Err(Error::domain("log_space needs 0 < from < to, both finite"));
    }
    if points < 2 {
        return Err(Error::domain("log_space needs at least 2 points"));
    }
    let (lf, lt) = (from.ln(), to.ln());
    Ok((0..points)
        .map(|k| (lf + (lt - lf) * k as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Linearly spaced grid from `from` to `to` inclusive.
pub fn lin_space(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && to > from) {
        return Err(Error::domain("lin_space needs from < to, both finite"));
    }
    if points < 2 {
        return Err(Error::domain("lin_space needs at least 2 points"));
    }
    Ok((0..points)
        .map(|k| from + (to - from) * k as f64 / (points - 1) as f64)
        .collect())
}
