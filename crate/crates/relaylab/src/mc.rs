//! Slot-level Monte-Carlo scheduler.
//!
//! This is the cross-check for [`crate::analytic`]: it actually runs the
//! `argmax b_i h_i / theta_bar_i` competition slot by slot instead of solving
//! the stationary equations, so agreement between the two is evidence for
//! both.
//!
//! Randomness is split per flow: flow `i` draws from ChaCha8 stream `i + 1`
//! of the run seed, so adding or removing flows never perturbs the gain
//! sequences of the remaining flows. A flow's stream advances only in slots
//! where the flow is eligible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{validate_flows, FlowSpec, RelayPhaseConfig, ThroughputVector};

/// Scheduling rule applied every slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Cyclic order over eligible flows; gains only decide credit.
    RoundRobin,
    /// `argmax h_i / theta_bar_i`, incentives ignored.
    ProportionalFair,
    /// `argmax b_i h_i / theta_bar_i` with `b_i = beta * incentive` for
    /// relayed flows and 1 for direct flows.
    IncentivizedProportionalFair,
}

/// Inputs for one slot-level run. The phase config must carry an integer
/// subframe split; slots cycle `tau_r` relay then `tau_a` access slots.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub flows: Vec<FlowSpec>,
    pub phase: RelayPhaseConfig,
    pub slots: u64,
    pub ewma_epsilon: f64,
    pub seed: u64,
    /// Record the EWMA state every this many slots; `None` disables tracing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_every: Option<u64>,
}

impl McConfig {
    /// True when the run is long enough for the EWMA to forget its
    /// initialization (`slots >= 10 / epsilon`). Shorter runs are legal but
    /// their averages still carry the initial transient.
    pub fn meets_convergence_guideline(&self) -> bool {
        self.slots as f64 * self.ewma_epsilon >= 10.0
    }
}

/// EWMA snapshot for trace output.
#[derive(Debug, Clone, Serialize)]
pub struct TracePoint {
    pub slot: u64,
    pub theta_bar: Vec<f64>,
}

/// Outcome of a slot-level run.
#[derive(Debug, Clone, Serialize)]
pub struct McResult {
    /// Final EWMA state `theta_bar`. Noisy at level `sqrt(epsilon/2)`; use
    /// [`McResult::empirical_theta`] for quantitative comparisons.
    pub theta_ewma: ThroughputVector,
    /// Per-slot mean of credited gains after burn-in; the low-variance
    /// estimate of stationary throughput.
    pub theta_sample_mean: ThroughputVector,
    pub win_counts: Vec<u64>,
    pub relay_phase_wins: Vec<u64>,
    pub access_phase_wins: Vec<u64>,
    pub relay_phase_slots: u64,
    /// Slots in which no flow was eligible (possible only when one class is
    /// empty); everyone's average decays in such slots.
    pub idle_slots: u64,
    pub slots: u64,
    pub burn_in_slots: u64,
    pub trace: Vec<TracePoint>,
}

impl McResult {
    /// The estimator to compare against analytic fixed points.
    pub fn empirical_theta(&self) -> &ThroughputVector {
        &self.theta_sample_mean
    }
}

/// Flow `id` draws from its own ChaCha8 stream of the run seed. Stream 0 is
/// reserved; flows start at stream 1.
fn flow_rng(seed: u64, flow_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(flow_id as u64 + 1);
    rng
}

/// Runs the slot-level scheduler and returns averages, win counts and phase
/// accounting. Bit-identical results for identical `(cfg, policy)`.
pub fn run_mc(cfg: &McConfig, policy: Policy) -> Result<McResult> {
    validate_flows(&cfg.flows)?;
    let (tau_r, tau_a) = cfg.phase.subframes().ok_or_else(|| {
        Error::config("slot-level runs need an integer subframe split (tau_r/tau_a)")
    })?;
    let period = (tau_r + tau_a) as u64;
    if cfg.slots == 0 {
        return Err(Error::domain("slots must be >= 1"));
    }
    if !(cfg.ewma_epsilon.is_finite() && cfg.ewma_epsilon > 0.0 && cfg.ewma_epsilon < 1.0) {
        return Err(Error::domain(format!(
            "ewma_epsilon must lie in (0, 1), got {}",
            cfg.ewma_epsilon
        )));
    }
    if cfg.trace_every == Some(0) {
        return Err(Error::domain("trace_every must be >= 1 when set"));
    }

    let n = cfg.flows.len();
    let alpha = cfg.phase.alpha();
    let beta = cfg.phase.beta();
    let eps = cfg.ewma_epsilon;

    let exp_r: Vec<Exp<f64>> = cfg
        .flows
        .iter()
        .map(|f| Exp::new(f.lambda_r).expect("validated lambda_r"))
        .collect();
    let exp_a: Vec<Option<Exp<f64>>> = cfg
        .flows
        .iter()
        .map(|f| -> Result<Option<Exp<f64>>> {
            if f.is_direct() && tau_a > 0 {
                Ok(Some(Exp::new(f.lambda_a_required()?).expect("validated lambda_a")))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;

    let weights: Vec<f64> = cfg
        .flows
        .iter()
        .map(|f| match policy {
            Policy::IncentivizedProportionalFair if f.is_relayed() => beta * f.incentive,
            _ => 1.0,
        })
        .collect();

    // Phase-weighted mean gain; keeps the EWMA near its stationary scale
    // from slot 0.
    let mut theta_bar: Vec<f64> = cfg
        .flows
        .iter()
        .map(|f| {
            if f.is_direct() && tau_a > 0 {
                alpha / f.lambda_r + (1.0 - alpha) / f.lambda_a.expect("direct with access phase")
            } else {
                alpha / f.lambda_r
            }
        })
        .collect();

    let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|i| flow_rng(cfg.seed, cfg.flows[i].id)).collect();

    let guideline = (10.0 / eps).ceil() as u64;
    let burn_in = if guideline < cfg.slots { guideline } else { cfg.slots / 2 };

    let mut win_counts = vec![0u64; n];
    let mut relay_phase_wins = vec![0u64; n];
    let mut access_phase_wins = vec![0u64; n];
    let mut credited = vec![0.0f64; n];
    let mut relay_phase_slots = 0u64;
    let mut idle_slots = 0u64;
    let mut trace = Vec::new();
    let mut gains = vec![0.0f64; n];
    let mut eligible = vec![false; n];
    let mut rr_next = 0usize;

    for t in 0..cfg.slots {
        let relay_phase = (t % period) < tau_r as u64;
        if relay_phase {
            relay_phase_slots += 1;
        }
        for i in 0..n {
            eligible[i] = relay_phase || cfg.flows[i].is_direct();
            if eligible[i] {
                gains[i] = if relay_phase {
                    exp_r[i].sample(&mut rngs[i])
                } else {
                    exp_a[i].expect("direct flow in access phase").sample(&mut rngs[i])
                };
            }
        }

        let winner = match policy {
            Policy::RoundRobin => {
                let mut found = None;
                for k in 0..n {
                    let idx = (rr_next + k) % n;
                    if eligible[idx] {
                        found = Some(idx);
                        rr_next = (idx + 1) % n;
                        break;
                    }
                }
                found
            }
            Policy::ProportionalFair | Policy::IncentivizedProportionalFair => {
                let mut best = f64::NEG_INFINITY;
                let mut found = None;
                for i in 0..n {
                    if !eligible[i] {
                        continue;
                    }
                    let metric = weights[i] * gains[i] / theta_bar[i];
                    if metric > best {
                        best = metric;
                        found = Some(i);
                    }
                }
                found
            }
        };

        for th in theta_bar.iter_mut() {
            *th *= 1.0 - eps;
        }
        match winner {
            Some(w) => {
                theta_bar[w] += eps * gains[w];
                win_counts[w] += 1;
                if relay_phase {
                    relay_phase_wins[w] += 1;
                } else {
                    access_phase_wins[w] += 1;
                }
                if t >= burn_in {
                    credited[w] += gains[w];
                }
            }
            None => idle_slots += 1,
        }

        if let Some(k) = cfg.trace_every {
            if t % k == 0 {
                trace.push(TracePoint {
                    slot: t,
                    theta_bar: theta_bar.clone(),
                });
            }
        }
    }

    let counted = (cfg.slots - burn_in) as f64;
    let sample_mean: Vec<f64> = credited.iter().map(|c| c / counted).collect();

    Ok(McResult {
        theta_ewma: theta_bar.into(),
        theta_sample_mean: sample_mean.into(),
        win_counts,
        relay_phase_wins,
        access_phase_wins,
        relay_phase_slots,
        idle_slots,
        slots: cfg.slots,
        burn_in_slots: burn_in,
        trace,
    })
}

/// Monte-Carlo estimate of `E[h_i 1{i wins}]` with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct WinnerEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Estimates [`crate::analytic::winner_expectation`] by direct sampling of
/// the single-slot competition; the estimator for populations beyond the
/// exact inclusion-exclusion cap.
///
/// Gains are `Exp(lambda_r)` and the metric is `incentive_i h_i / theta_i`,
/// matching the exact operation. Requires `samples >= 10_000`.
pub fn estimate_winner_expectation(
    i: usize,
    flows: &[FlowSpec],
    theta: &[f64],
    samples: u64,
    seed: u64,
) -> Result<WinnerEstimate> {
    validate_flows(flows)?;
    let n = flows.len();
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
    if i >= n {
        return Err(Error::domain(format!("flow index {i} out of range")));
    }
    if samples < 10_000 {
        return Err(Error::domain(format!(
            "at least 10000 samples required for a usable standard error, got {samples}"
        )));
    }

    let exp: Vec<Exp<f64>> = flows
        .iter()
        .map(|f| Exp::new(f.lambda_r).expect("validated lambda_r"))
        .collect();
    let mut rngs: Vec<ChaCha8Rng> = flows.iter().map(|f| flow_rng(seed, f.id)).collect();

    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..samples {
        let mut best = f64::NEG_INFINITY;
        let mut winner = 0usize;
        let mut h_i = 0.0f64;
        for j in 0..n {
            let h = exp[j].sample(&mut rngs[j]);
            if j == i {
                h_i = h;
            }
            let metric = flows[j].incentive * h / theta[j];
            if metric > best {
                best = metric;
                winner = j;
            }
        }
        let x = if winner == i { h_i } else { 0.0 };
        sum += x;
        sum_sq += x * x;
    }

    let m = samples as f64;
    let mean = sum / m;
    let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(WinnerEstimate {
        value: mean,
        std_error: (var / m).sqrt(),
        samples,
    })
}
