//! TTI-level system simulation of backhaul/direct/access subframe plans.
//!
//! A donor cell serves direct UEs and feeds half-duplex relay nodes over
//! in-band backhaul; relay nodes forward buffered bytes to their UEs in
//! normal access subframes. The engine in [`engine`] replays a
//! [`SubframePlan`] TTI by TTI with per-link block fading, CQI-driven MCS
//! selection and drop-tail relay buffers.

mod buffer;
mod engine;
mod plan;

pub use buffer::RelayBuffer;
pub use engine::{
    buffer_balance_report, compare_plans, run_scenario, BalanceVerdict, Better,
    BufferBalanceReport, KindStats, MetricRow, PlanComparison, RnBalance, RnSummary,
    ScenarioResult, ScenarioSummary, TtiBackhaulRecord, TtiRecord, TtiUeRecord, UeSummary,
};
pub use plan::{SubframeKind, SubframePlan};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowClass;
use crate::radio::{CqiConfig, NodeGeometry, Position, Transmitter};

/// Which node a UE is associated with; fixed for the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attachment {
    Donor,
    Relay(usize),
}

/// Downlink traffic offered to one UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Traffic {
    /// Infinite queue; the UE can always fill an allocation.
    FullBuffer,
    /// Constant arrivals at the donor, in bytes per TTI.
    Cbr { bytes_per_tti: u64 },
}

impl Default for Traffic {
    fn default() -> Self {
        Traffic::FullBuffer
    }
}

/// Slot-winner rule a scheduling node applies among its own flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerPolicy {
    RoundRobin,
    /// `argmax efficiency(cqi) / theta_bar` over flows with data.
    ProportionalFair,
}

/// How a subframe's resource blocks are split among scheduled flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbAllocation {
    /// The policy winner takes every RB of the subframe.
    WholeSubframe,
    /// RBs rotate over eligible flows regardless of policy.
    PerRbRoundRobin,
}

/// Fixed node position and transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub x: f64,
    pub y: f64,
    pub power_dbm: f64,
}

/// One UE: position, attachment and offered traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UeSpec {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub attach: Attachment,
    #[serde(default)]
    pub traffic: Traffic,
}

impl UeSpec {
    /// Donor-attached UEs are direct; relay-attached UEs are relayed.
    pub fn class(&self) -> FlowClass {
        match self.attach {
            Attachment::Donor => FlowClass::Direct,
            Attachment::Relay(_) => FlowClass::Relayed,
        }
    }
}

fn default_rb_per_subframe() -> u32 {
    50
}

fn default_symbols_per_rb() -> u32 {
    168
}

fn default_relay_buffer_bytes() -> u64 {
    1_000_000
}

fn default_noise_floor() -> f64 {
    -100.0
}

fn default_pathloss_exponent() -> f64 {
    3.5
}

fn default_reference_loss() -> f64 {
    30.0
}

fn default_scheduler() -> SchedulerPolicy {
    SchedulerPolicy::ProportionalFair
}

fn default_rb_allocation() -> RbAllocation {
    RbAllocation::WholeSubframe
}

fn default_pf_epsilon() -> f64 {
    0.1
}

/// Complete description of one simulation run; a single JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub donor: NodeSpec,
    #[serde(default)]
    pub relays: Vec<NodeSpec>,
    pub ues: Vec<UeSpec>,
    pub plan: SubframePlan,
    pub ttis: u64,
    pub seed: u64,
    #[serde(default = "default_rb_per_subframe")]
    pub rb_per_subframe: u32,
    #[serde(default = "default_symbols_per_rb")]
    pub symbols_per_rb: u32,
    #[serde(default = "default_relay_buffer_bytes")]
    pub relay_buffer_bytes: u64,
    #[serde(default = "default_noise_floor")]
    pub noise_floor_dbm: f64,
    #[serde(default = "default_pathloss_exponent")]
    pub pathloss_exponent: f64,
    #[serde(default = "default_reference_loss")]
    pub reference_loss_db: f64,
    #[serde(default = "default_scheduler")]
    pub donor_scheduler: SchedulerPolicy,
    #[serde(default = "default_scheduler")]
    pub relay_scheduler: SchedulerPolicy,
    #[serde(default = "default_rb_allocation")]
    pub rb_allocation: RbAllocation,
    /// EWMA step for the TTI-level proportional-fair averages.
    #[serde(default = "default_pf_epsilon")]
    pub pf_epsilon: f64,
    #[serde(default)]
    pub cqi: CqiConfig,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ues.is_empty() {
            return Err(Error::config("scenario needs at least one UE"));
        }
        let mut ids: Vec<usize> = self.ues.iter().map(|u| u.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.ues.len() {
            return Err(Error::config("UE ids must be unique"));
        }
        for ue in &self.ues {
            if let Attachment::Relay(k) = ue.attach {
                if k >= self.relays.len() {
                    return Err(Error::config(format!(
                        "ue {} attaches to relay {k} but only {} relays exist",
                        ue.id,
                        self.relays.len()
                    )));
                }
            }
        }
        if self.ttis == 0 {
            return Err(Error::config("ttis must be >= 1"));
        }
        if self.rb_per_subframe == 0 || self.symbols_per_rb == 0 {
            return Err(Error::config("rb_per_subframe and symbols_per_rb must be >= 1"));
        }
        if self.relay_buffer_bytes == 0 {
            return Err(Error::config("relay_buffer_bytes must be >= 1"));
        }
        if !(self.pf_epsilon.is_finite() && self.pf_epsilon > 0.0 && self.pf_epsilon < 1.0) {
            return Err(Error::config("pf_epsilon must lie in (0, 1)"));
        }
        self.cqi.validate()?;
        self.geometry().validate()?;
        Ok(())
    }

    /// True when the run length covers whole plan periods; partial periods
    /// are legal but skew per-kind averages.
    pub fn covers_whole_periods(&self) -> bool {
        self.ttis % self.plan.period() == 0
    }

    /// Radio geometry with users in UE declaration order.
    pub fn geometry(&self) -> NodeGeometry {
        NodeGeometry {
            donor: Transmitter {
                position: Position::new(self.donor.x, self.donor.y),
                power_dbm: self.donor.power_dbm,
            },
            relays: self
                .relays
                .iter()
                .map(|r| Transmitter {
                    position: Position::new(r.x, r.y),
                    power_dbm: r.power_dbm,
                })
                .collect(),
            users: self.ues.iter().map(|u| Position::new(u.x, u.y)).collect(),
            noise_floor_dbm: self.noise_floor_dbm,
            pathloss_exponent: self.pathloss_exponent,
            reference_loss_db: self.reference_loss_db,
        }
    }
}
