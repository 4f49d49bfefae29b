//! Shared domain types: flow descriptions, phase timing and solver reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a flow is served by the donor directly in both phases or rides
/// through a half-duplex relay and is schedulable only in the relay phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowClass {
    Direct,
    Relayed,
}

impl std::fmt::Display for FlowClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FlowClass::Direct => write!(f, "direct"),
            FlowClass::Relayed => write!(f, "relayed"),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// One downlink flow competing for slots.
///
/// Channel gains are exponential: rate `lambda_r` during the relay phase and
/// `lambda_a` during the access phase. `lambda_a` is meaningful for direct
/// flows only; relayed flows are gated off outside the relay phase.
/// `incentive` is the multiplicative scheduler weight `b_i`; direct flows
/// must keep the neutral weight 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub id: usize,
    pub class: FlowClass,
    pub lambda_r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_a: Option<f64>,
    #[serde(default = "one")]
    pub incentive: f64,
}

impl FlowSpec {
    /// Direct flow with gain rates for both phases and neutral incentive.
    pub fn direct(id: usize, lambda_r: f64, lambda_a: f64) -> Self {
        FlowSpec {
            id,
            class: FlowClass::Direct,
            lambda_r,
            lambda_a: Some(lambda_a),
            incentive: 1.0,
        }
    }

    /// Relayed flow; only the relay-phase gain rate exists.
    pub fn relayed(id: usize, lambda_r: f64) -> Self {
        FlowSpec {
            id,
            class: FlowClass::Relayed,
            lambda_r,
            lambda_a: None,
            incentive: 1.0,
        }
    }

    /// Relayed flow with an explicit per-flow incentive weight.
    pub fn relayed_with_incentive(id: usize, lambda_r: f64, incentive: f64) -> Self {
        FlowSpec {
            id,
            class: FlowClass::Relayed,
            lambda_r,
            lambda_a: None,
            incentive,
        }
    }

    pub fn is_direct(&self) -> bool {
        self.class == FlowClass::Direct
    }

    pub fn is_relayed(&self) -> bool {
        self.class == FlowClass::Relayed
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_r.is_finite() && self.lambda_r > 0.0) {
            return Err(Error::domain(format!(
                "flow {}: lambda_r must be finite and > 0, got {}",
                self.id, self.lambda_r
            )));
        }
        if let Some(la) = self.lambda_a {
            if !(la.is_finite() && la > 0.0) {
                return Err(Error::domain(format!(
                    "flow {}: lambda_a must be finite and > 0, got {la}",
                    self.id
                )));
            }
        }
        if !(self.incentive.is_finite() && self.incentive > 0.0) {
            return Err(Error::domain(format!(
                "flow {}: incentive must be finite and > 0, got {}",
                self.id, self.incentive
            )));
        }
        if self.is_direct() && self.incentive != 1.0 {
            return Err(Error::domain(format!(
                "flow {}: direct flows carry the neutral incentive 1, got {}",
                self.id, self.incentive
            )));
        }
        if self.is_relayed() && self.lambda_a.is_some() {
            return Err(Error::domain(format!(
                "flow {}: relayed flows have no access-phase gain rate",
                self.id
            )));
        }
        Ok(())
    }

    /// Access-phase gain rate; errors when absent but required.
    pub fn lambda_a_required(&self) -> Result<f64> {
        self.lambda_a.ok_or_else(|| {
            Error::domain(format!(
                "flow {}: lambda_a is required for direct flows competing in the access phase",
                self.id
            ))
        })
    }
}

/// Validates a population: non-empty, unique ids, each flow well-formed.
pub fn validate_flows(flows: &[FlowSpec]) -> Result<()> {
    if flows.is_empty() {
        return Err(Error::domain("flow population must be non-empty"));
    }
    let mut ids: Vec<usize> = flows.iter().map(|f| f.id).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != flows.len() {
        return Err(Error::domain("flow ids must be unique"));
    }
    for f in flows {
        f.validate()?;
    }
    Ok(())
}

/// Half-duplex phase split and the relayed-flow incentive used by the
/// incentivized scheduler.
///
/// The split is either an exact subframe pair `(tau_r, tau_a)` with
/// `tau_r >= 1`, or a bare fraction `alpha` in `[0, 1]` for analytic work.
/// `alpha = 0` and `alpha = 1` are degenerate single-phase systems accepted
/// only through [`RelayPhaseConfig::from_alpha`]; the subframe constructor
/// always yields `alpha > 0`. `beta >= 1` throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayPhaseConfig {
    subframes: Option<(u32, u32)>,
    alpha: f64,
    beta: f64,
}

fn validate_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(Error::domain(format!(
            "beta must be finite and >= 1, got {beta}"
        )));
    }
    Ok(())
}

impl RelayPhaseConfig {
    /// Exact integer split: `tau_r` relay subframes then `tau_a` access
    /// subframes per period.
    pub fn from_subframes(tau_r: u32, tau_a: u32, beta: f64) -> Result<Self> {
        if tau_r == 0 {
            return Err(Error::domain("tau_r must be >= 1"));
        }
        validate_beta(beta)?;
        let period = (tau_r + tau_a) as f64;
        Ok(RelayPhaseConfig {
            subframes: Some((tau_r, tau_a)),
            alpha: tau_r as f64 / period,
            beta,
        })
    }

    /// Fractional split for analytic work; `alpha` may sit on either
    /// endpoint, collapsing one phase entirely.
    pub fn from_alpha(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
            return Err(Error::domain(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        validate_beta(beta)?;
        Ok(RelayPhaseConfig {
            subframes: None,
            alpha,
            beta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Integer subframe split when constructed from one.
    pub fn subframes(&self) -> Option<(u32, u32)> {
        self.subframes
    }

    /// Slots per timing period; only integer splits have one.
    pub fn period(&self) -> Option<u64> {
        self.subframes.map(|(r, a)| (r + a) as u64)
    }

    /// Same split, different incentive.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        validate_beta(beta)?;
        Ok(RelayPhaseConfig { beta, ..*self })
    }

    /// Same incentive, different fractional split (drops any subframe pair).
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        RelayPhaseConfig::from_alpha(alpha, self.beta)
    }
}

/// Serialized form of [`RelayPhaseConfig`]: either `tau_r`/`tau_a` or
/// `alpha`, never both; `beta` defaults to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayPhaseConfigRaw {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_a: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "one")]
    pub beta: f64,
}

impl TryFrom<RelayPhaseConfigRaw> for RelayPhaseConfig {
    type Error = Error;

    fn try_from(raw: RelayPhaseConfigRaw) -> Result<Self> {
        match (raw.tau_r, raw.tau_a, raw.alpha) {
            (Some(r), Some(a), None) => RelayPhaseConfig::from_subframes(r, a, raw.beta),
            (None, None, Some(al)) => RelayPhaseConfig::from_alpha(al, raw.beta),
            (None, None, None) => Err(Error::config(
                "phase config needs either tau_r/tau_a or alpha",
            )),
            _ => Err(Error::config(
                "phase config takes tau_r/tau_a or alpha, not a mixture",
            )),
        }
    }
}

impl From<&RelayPhaseConfig> for RelayPhaseConfigRaw {
    fn from(cfg: &RelayPhaseConfig) -> Self {
        match cfg.subframes {
            Some((r, a)) => RelayPhaseConfigRaw {
                tau_r: Some(r),
                tau_a: Some(a),
                alpha: None,
                beta: cfg.beta,
            },
            None => RelayPhaseConfigRaw {
                tau_r: None,
                tau_a: None,
                alpha: Some(cfg.alpha),
                beta: cfg.beta,
            },
        }
    }
}

impl Serialize for RelayPhaseConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RelayPhaseConfigRaw::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RelayPhaseConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RelayPhaseConfigRaw::deserialize(d)?;
        RelayPhaseConfig::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Long-run average throughput per flow, indexed like the flow slice that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputVector(Vec<f64>);

impl ThroughputVector {
    pub fn new(theta: Vec<f64>) -> Self {
        ThroughputVector(theta)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Largest componentwise absolute difference against another vector.
    pub fn max_abs_diff(&self, other: &ThroughputVector) -> f64 {
        assert_eq!(self.len(), other.len(), "throughput vectors differ in length");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ThroughputVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for ThroughputVector {
    fn from(v: Vec<f64>) -> Self {
        ThroughputVector(v)
    }
}

/// Outcome of a damped fixed-point solve.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub theta: ThroughputVector,
    /// Per-flow residual `|F_i(theta) - theta_i|` at the final iterate.
    pub residuals: Vec<f64>,
    /// Max-norm residual at the final iterate.
    pub residual: f64,
    pub iterations: u64,
    pub converged: bool,
}
