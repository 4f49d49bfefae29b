//! TTI-by-TTI replay of a subframe plan.
//!
//! Fading is block-constant per plan period and per directed link, drawn by
//! counter-indexed ChaCha8 streams: the multiplier for `(tx, rx, period)`
//! depends only on the scenario seed and those three values, never on
//! evaluation order. Within a period, a direct UE therefore sees bit-equal
//! SINR in any two subframes with the same active-transmitter set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowClass;
use crate::radio::{link_state, CqiConfig, LinkState, NodeGeometry, ReceiverId, TransmitterId};
use crate::sim::buffer::RelayBuffer;
use crate::sim::plan::{SubframeKind, SubframePlan};
use crate::sim::{
    Attachment, RbAllocation, ScenarioConfig, SchedulerPolicy, Traffic,
};

/// One UE's line in a TTI record; present every TTI as the CQI report,
/// with bytes and MCS filled when the UE was served.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TtiUeRecord {
    pub ue: usize,
    pub node: TransmitterId,
    pub sinr_db: f64,
    pub cqi: u8,
    pub mcs: Option<u8>,
    pub bytes: u64,
}

/// Backhaul reception line for one relay node; emitted whenever the relay
/// is able to listen (always in B and D, in U only while silent).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TtiBackhaulRecord {
    pub rn: usize,
    pub sinr_db: f64,
    pub cqi: u8,
    pub mcs: Option<u8>,
    pub bytes: u64,
}

/// Everything that happened in one TTI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TtiRecord {
    pub tti: u64,
    pub kind: SubframeKind,
    pub active: Vec<TransmitterId>,
    pub ues: Vec<TtiUeRecord>,
    pub backhaul: Vec<TtiBackhaulRecord>,
}

/// Per-subframe-kind aggregates for one UE. CQI sums cover every report;
/// MCS sums cover served TTIs only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct KindStats {
    pub ttis: u64,
    pub served_ttis: u64,
    pub bytes: u64,
    pub cqi_sum: u64,
    pub mcs_sum: u64,
}

impl KindStats {
    pub fn mean_cqi(&self) -> Option<f64> {
        (self.ttis > 0).then(|| self.cqi_sum as f64 / self.ttis as f64)
    }

    pub fn mean_served_mcs(&self) -> Option<f64> {
        (self.served_ttis > 0).then(|| self.mcs_sum as f64 / self.served_ttis as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UeSummary {
    pub ue: usize,
    pub class: FlowClass,
    pub bytes: u64,
    /// Indexed by [`SubframeKind::index`]: B, D, U.
    pub per_kind: [KindStats; 3],
}

impl UeSummary {
    pub fn kind(&self, k: SubframeKind) -> &KindStats {
        &self.per_kind[k.index()]
    }

    pub fn total(&self) -> KindStats {
        let mut acc = KindStats::default();
        for s in &self.per_kind {
            acc.ttis += s.ttis;
            acc.served_ttis += s.served_ttis;
            acc.bytes += s.bytes;
            acc.cqi_sum += s.cqi_sum;
            acc.mcs_sum += s.mcs_sum;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnSummary {
    pub rn: usize,
    pub arrivals: u64,
    pub departures: u64,
    pub drops: u64,
    /// Bytes still queued at the end of the run.
    pub queued: u64,
    /// Access RBs the relay could have used but did not (empty buffers,
    /// out-of-range UEs or partial grants).
    pub idle_access_rb: u64,
    /// U subframes in which this relay transmitted.
    pub tx_ttis: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub plan: String,
    pub alpha: f64,
    pub period: u64,
    pub ttis: u64,
    pub rb_per_subframe: u32,
    pub ues: Vec<UeSummary>,
    pub rns: Vec<RnSummary>,
    pub direct_bytes: u64,
    pub relayed_bytes: u64,
    pub half_duplex_violations: u64,
    pub u_ttis: u64,
    pub u_ttis_with_rn_tx: u64,
    /// Realized backhaul spectral accounting (donor -> relay grants).
    pub backhaul_bits: u64,
    pub backhaul_symbols: u64,
    /// Realized access-hop accounting (relay -> UE grants).
    pub access_bits: u64,
    pub access_symbols: u64,
}

impl ScenarioSummary {
    /// Measured backhaul spectral efficiency in bits per symbol.
    pub fn rho_r(&self) -> Option<f64> {
        (self.backhaul_symbols > 0).then(|| self.backhaul_bits as f64 / self.backhaul_symbols as f64)
    }

    /// Measured relay-access spectral efficiency in bits per symbol.
    pub fn rho_a(&self) -> Option<f64> {
        (self.access_symbols > 0).then(|| self.access_bits as f64 / self.access_symbols as f64)
    }

    /// Mean CQI over all UE reports in one subframe kind.
    pub fn mean_cqi_by_kind(&self, kind: SubframeKind) -> Option<f64> {
        let (mut sum, mut count) = (0u64, 0u64);
        for ue in &self.ues {
            let s = ue.kind(kind);
            sum += s.cqi_sum;
            count += s.ttis;
        }
        (count > 0).then(|| sum as f64 / count as f64)
    }

    /// Mean served MCS over direct UEs in one subframe kind.
    pub fn mean_direct_mcs_by_kind(&self, kind: SubframeKind) -> Option<f64> {
        let (mut sum, mut count) = (0u64, 0u64);
        for ue in self.ues.iter().filter(|u| u.class == FlowClass::Direct) {
            let s = ue.kind(kind);
            sum += s.mcs_sum;
            count += s.served_ttis;
        }
        (count > 0).then(|| sum as f64 / count as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub summary: ScenarioSummary,
    pub records: Vec<TtiRecord>,
}

impl ScenarioResult {
    /// Full TTI trace: `tti,kind,node,ue,cqi,mcs,bytes`. UE rows list the
    /// serving node and receiver; backhaul rows list the donor and the
    /// receiving relay. MCS is empty when nothing was served.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("tti,kind,node,ue,cqi,mcs,bytes\n");
        for rec in &self.records {
            for ue in &rec.ues {
                out.push_str(&format!(
                    "{},{},{},ue{},{},{},{}\n",
                    rec.tti,
                    rec.kind,
                    ue.node,
                    ue.ue,
                    ue.cqi,
                    ue.mcs.map(|m| m.to_string()).unwrap_or_default(),
                    ue.bytes
                ));
            }
            for bh in &rec.backhaul {
                out.push_str(&format!(
                    "{},{},donor,rn{},{},{},{}\n",
                    rec.tti,
                    rec.kind,
                    bh.rn,
                    bh.cqi,
                    bh.mcs.map(|m| m.to_string()).unwrap_or_default(),
                    bh.bytes
                ));
            }
        }
        out
    }

    /// Per-UE summary table.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "ue,class,bytes,mean_cqi,mean_served_mcs,\
             bytes_b,bytes_d,bytes_u,mean_mcs_b,mean_mcs_d,mean_mcs_u\n",
        );
        let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for ue in &self.summary.ues {
            let total = ue.total();
            let mean_cqi = (total.ttis > 0)
                .then(|| total.cqi_sum as f64 / total.ttis as f64);
            let mean_mcs = (total.served_ttis > 0)
                .then(|| total.mcs_sum as f64 / total.served_ttis as f64);
            out.push_str(&format!(
                "ue{},{},{},{},{},{},{},{},{},{},{}\n",
                ue.ue,
                ue.class,
                ue.bytes,
                fmt_opt(mean_cqi),
                fmt_opt(mean_mcs),
                ue.kind(SubframeKind::B).bytes,
                ue.kind(SubframeKind::D).bytes,
                ue.kind(SubframeKind::U).bytes,
                fmt_opt(ue.kind(SubframeKind::B).mean_served_mcs()),
                fmt_opt(ue.kind(SubframeKind::D).mean_served_mcs()),
                fmt_opt(ue.kind(SubframeKind::U).mean_served_mcs()),
            ));
        }
        out
    }
}

enum DonorFlow {
    Direct(usize),
    Backhaul(usize),
}

enum Queue {
    Infinite,
    Finite(u64),
}

impl Queue {
    fn add(&mut self, bytes: u64) {
        if let Queue::Finite(q) = self {
            *q += bytes;
        }
    }

    fn has_data(&self) -> bool {
        match self {
            Queue::Infinite => true,
            Queue::Finite(q) => *q > 0,
        }
    }

    fn take(&mut self, cap: u64) -> u64 {
        match self {
            Queue::Infinite => cap,
            Queue::Finite(q) => {
                let t = cap.min(*q);
                *q -= t;
                t
            }
        }
    }
}

/// Unit-mean exponential block-fading multiplier for one directed link in
/// one plan period, by inverse CDF on a counter-indexed stream (fixed word
/// consumption keeps random access exact).
fn fading_multiplier(seed: u64, tx: TransmitterId, rx: ReceiverId, period_idx: u64) -> f64 {
    let t = match tx {
        TransmitterId::Donor => 0u64,
        TransmitterId::Relay(k) => 1 + k as u64,
    };
    let r = match rx {
        ReceiverId::User(j) => j as u64,
        ReceiverId::Relay(k) => (1 << 20) + k as u64,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((t << 21) | (r + 1));
    rng.set_word_pos(period_idx as u128 * 2);
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

fn capacity_bytes(efficiency: f64, symbols_per_rb: u32, rb: u32) -> u64 {
    (efficiency * symbols_per_rb as f64 * rb as f64 / 8.0).floor() as u64
}

/// Smallest MCS not above the reported CQI whose capacity covers the
/// delivered bytes; transmitting harder than necessary buys nothing.
fn served_mcs(cqi_cfg: &CqiConfig, cqi: u8, symbols_per_rb: u32, rb: u32, delivered: u64) -> Option<u8> {
    if delivered == 0 || cqi == 0 {
        return None;
    }
    (1..=cqi).find(|&m| capacity_bytes(cqi_cfg.efficiency(m), symbols_per_rb, rb) >= delivered)
}

/// Splits a subframe's RBs among candidate flows. `candidates` holds
/// ascending keys into the node's flow list of length `cycle`;
/// `cursor` persists rotation state across TTIs.
fn allocate(
    policy: SchedulerPolicy,
    rb_alloc: RbAllocation,
    candidates: &[usize],
    metric: impl Fn(usize) -> f64,
    cursor: &mut usize,
    cycle: usize,
    rb: u32,
) -> Vec<(usize, u32)> {
    if candidates.is_empty() {
        return Vec::new();
    }
    match rb_alloc {
        RbAllocation::WholeSubframe => {
            let winner = match policy {
                SchedulerPolicy::RoundRobin => {
                    let mut pick = candidates[0];
                    for k in 0..cycle {
                        let key = (*cursor + k) % cycle;
                        if candidates.contains(&key) {
                            pick = key;
                            break;
                        }
                    }
                    *cursor = (pick + 1) % cycle;
                    pick
                }
                SchedulerPolicy::ProportionalFair => {
                    let mut best = candidates[0];
                    let mut best_m = metric(best);
                    for &c in &candidates[1..] {
                        let m = metric(c);
                        if m > best_m {
                            best = c;
                            best_m = m;
                        }
                    }
                    best
                }
            };
            vec![(winner, rb)]
        }
        RbAllocation::PerRbRoundRobin => {
            // Policy-free rotation at RB granularity.
            let mut grants: Vec<(usize, u32)> = candidates.iter().map(|&c| (c, 0)).collect();
            let mut pos = *cursor % cycle;
            for _ in 0..rb {
                for _ in 0..cycle {
                    if let Some(g) = grants.iter_mut().find(|(c, _)| *c == pos) {
                        g.1 += 1;
                        pos = (pos + 1) % cycle;
                        break;
                    }
                    pos = (pos + 1) % cycle;
                }
            }
            *cursor = pos;
            grants.retain(|(_, n)| *n > 0);
            grants
        }
    }
}

/// Runs the scenario TTI by TTI. Bit-identical output for identical
/// configs; see the module docs for the fading scheme.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let geom: NodeGeometry = cfg.geometry();
    let n_ue = cfg.ues.len();
    let n_rn = cfg.relays.len();
    let period = cfg.plan.period();
    let rb = cfg.rb_per_subframe;
    let symbols = cfg.symbols_per_rb;
    let eps = cfg.pf_epsilon;
    let seed = cfg.seed;

    let serving: Vec<TransmitterId> = cfg
        .ues
        .iter()
        .map(|u| match u.attach {
            Attachment::Donor => TransmitterId::Donor,
            Attachment::Relay(k) => TransmitterId::Relay(k),
        })
        .collect();
    // One donor flow per UE: direct service or backhaul toward its relay.
    let donor_flows: Vec<DonorFlow> = cfg
        .ues
        .iter()
        .enumerate()
        .map(|(j, u)| match u.attach {
            Attachment::Donor => DonorFlow::Direct(j),
            Attachment::Relay(_) => DonorFlow::Backhaul(j),
        })
        .collect();
    let mut donor_queues: Vec<Queue> = cfg
        .ues
        .iter()
        .map(|u| match u.traffic {
            Traffic::FullBuffer => Queue::Infinite,
            Traffic::Cbr { .. } => Queue::Finite(0),
        })
        .collect();
    let rn_of_ue: Vec<Option<usize>> = cfg
        .ues
        .iter()
        .map(|u| match u.attach {
            Attachment::Donor => None,
            Attachment::Relay(k) => Some(k),
        })
        .collect();
    let rn_ues: Vec<Vec<usize>> = (0..n_rn)
        .map(|k| (0..n_ue).filter(|&j| rn_of_ue[j] == Some(k)).collect())
        .collect();
    let mut buffers: Vec<Option<RelayBuffer>> = (0..n_ue)
        .map(|j| {
            rn_of_ue[j]
                .map(|_| RelayBuffer::new(cfg.relay_buffer_bytes))
                .transpose()
        })
        .collect::<Result<_>>()?;

    let mut donor_theta = vec![1.0f64; n_ue];
    let mut donor_cursor = 0usize;
    let mut rn_theta = vec![1.0f64; n_ue];
    let mut rn_cursors = vec![0usize; n_rn];

    let mut ue_summaries: Vec<UeSummary> = cfg
        .ues
        .iter()
        .map(|u| UeSummary {
            ue: u.id,
            class: u.class(),
            bytes: 0,
            per_kind: [KindStats::default(); 3],
        })
        .collect();
    let mut rn_idle_rb = vec![0u64; n_rn];
    let mut rn_tx_ttis = vec![0u64; n_rn];
    let mut half_duplex_violations = 0u64;
    let mut u_ttis = 0u64;
    let mut u_ttis_with_rn_tx = 0u64;
    let (mut backhaul_bits, mut backhaul_symbols) = (0u64, 0u64);
    let (mut access_bits, mut access_symbols) = (0u64, 0u64);
    let mut records = Vec::with_capacity(cfg.ttis as usize);

    for tti in 0..cfg.ttis {
        let kind = cfg.plan.kind_at(tti);
        let pidx = tti / period;

        for (j, u) in cfg.ues.iter().enumerate() {
            if let Traffic::Cbr { bytes_per_tti } = u.traffic {
                donor_queues[j].add(bytes_per_tti);
            }
        }

        // Active transmitters are fixed before CQI is known: a node with
        // queued data radiates even if the realized grant ends up empty.
        let donor_candidates: Vec<usize> = (0..n_ue)
            .filter(|&j| {
                let kind_ok = match (&donor_flows[j], kind) {
                    (_, SubframeKind::B) => true,
                    (DonorFlow::Direct(_), _) => true,
                    (DonorFlow::Backhaul(_), _) => false,
                };
                kind_ok && donor_queues[j].has_data()
            })
            .collect();
        let rn_has_data: Vec<bool> = (0..n_rn)
            .map(|k| {
                rn_ues[k]
                    .iter()
                    .any(|&j| buffers[j].as_ref().expect("relayed ue").queued() > 0)
            })
            .collect();
        let mut active: Vec<TransmitterId> = Vec::new();
        if !donor_candidates.is_empty() {
            active.push(TransmitterId::Donor);
        }
        if kind == SubframeKind::U {
            u_ttis += 1;
            for k in 0..n_rn {
                if rn_has_data[k] {
                    active.push(TransmitterId::Relay(k));
                    rn_tx_ttis[k] += 1;
                }
            }
            if rn_has_data.iter().any(|&b| b) {
                u_ttis_with_rn_tx += 1;
            }
        }

        // CQI reports: every UE against its serving node, every listening
        // relay against the donor.
        let mut ue_links: Vec<LinkState> = Vec::with_capacity(n_ue);
        for j in 0..n_ue {
            let rx = ReceiverId::User(j);
            let ls = link_state(&geom, &active, serving[j], rx, &cfg.cqi, |tx| {
                fading_multiplier(seed, tx, rx, pidx)
            })?;
            ue_links.push(ls);
        }
        let bh_links: Vec<Option<LinkState>> = (0..n_rn)
            .map(|k| -> Result<Option<LinkState>> {
                if active.contains(&TransmitterId::Relay(k)) {
                    return Ok(None);
                }
                let rx = ReceiverId::Relay(k);
                link_state(&geom, &active, TransmitterId::Donor, rx, &cfg.cqi, |tx| {
                    fading_multiplier(seed, tx, rx, pidx)
                })
                .map(Some)
            })
            .collect::<Result<_>>()?;

        let mut ue_rows: Vec<TtiUeRecord> = (0..n_ue)
            .map(|j| TtiUeRecord {
                ue: cfg.ues[j].id,
                node: serving[j],
                sinr_db: ue_links[j].sinr_db,
                cqi: ue_links[j].cqi,
                mcs: None,
                bytes: 0,
            })
            .collect();
        let mut bh_rows: Vec<TtiBackhaulRecord> = Vec::new();
        let mut bh_row_of_rn = vec![usize::MAX; n_rn];
        for (k, ls) in bh_links.iter().enumerate() {
            if let Some(ls) = ls {
                bh_row_of_rn[k] = bh_rows.len();
                bh_rows.push(TtiBackhaulRecord {
                    rn: k,
                    sinr_db: ls.sinr_db,
                    cqi: ls.cqi,
                    mcs: None,
                    bytes: 0,
                });
            }
        }

        // Donor scheduling: candidates must also be in CQI range.
        let flow_cqi = |j: usize| -> u8 {
            match donor_flows[j] {
                DonorFlow::Direct(u) => ue_links[u].cqi,
                DonorFlow::Backhaul(u) => {
                    let k = rn_of_ue[u].expect("backhaul flow");
                    bh_links[k].map(|l| l.cqi).unwrap_or(0)
                }
            }
        };
        let usable: Vec<usize> = donor_candidates
            .iter()
            .copied()
            .filter(|&j| flow_cqi(j) >= 1)
            .collect();
        let grants = allocate(
            cfg.donor_scheduler,
            cfg.rb_allocation,
            &usable,
            |j| cfg.cqi.efficiency(flow_cqi(j)) / donor_theta[j],
            &mut donor_cursor,
            n_ue,
            rb,
        );
        let mut donor_credit = vec![0u64; n_ue];
        for &(j, rb_k) in &grants {
            let cqi = flow_cqi(j);
            let cap = capacity_bytes(cfg.cqi.efficiency(cqi), symbols, rb_k);
            let delivered = donor_queues[j].take(cap);
            if delivered == 0 {
                continue;
            }
            let mcs = served_mcs(&cfg.cqi, cqi, symbols, rb_k, delivered);
            donor_credit[j] = delivered;
            match donor_flows[j] {
                DonorFlow::Direct(u) => {
                    ue_rows[u].bytes += delivered;
                    ue_rows[u].mcs = mcs;
                }
                DonorFlow::Backhaul(u) => {
                    let k = rn_of_ue[u].expect("backhaul flow");
                    if active.contains(&TransmitterId::Relay(k)) {
                        half_duplex_violations += 1;
                    }
                    buffers[u].as_mut().expect("relayed ue").offer(delivered);
                    let row = &mut bh_rows[bh_row_of_rn[k]];
                    row.bytes += delivered;
                    row.mcs = match (row.mcs, mcs) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        (a, b) => a.or(b),
                    };
                    backhaul_bits += delivered * 8;
                    backhaul_symbols += rb_k as u64 * symbols as u64;
                }
            }
        }
        for j in 0..n_ue {
            // Floor keeps the PF denominator positive for starved flows.
            donor_theta[j] = ((1.0 - eps) * donor_theta[j] + eps * donor_credit[j] as f64)
                .max(1e-9);
        }

        // Relay scheduling in normal access subframes.
        let mut rn_credit = vec![0u64; n_ue];
        if kind == SubframeKind::U {
            for k in 0..n_rn {
                if !rn_has_data[k] {
                    rn_idle_rb[k] += rb as u64;
                    continue;
                }
                let list = &rn_ues[k];
                let candidates: Vec<usize> = (0..list.len())
                    .filter(|&pos| {
                        let j = list[pos];
                        buffers[j].as_ref().expect("relayed ue").queued() > 0
                            && ue_links[j].cqi >= 1
                    })
                    .collect();
                let grants = allocate(
                    cfg.relay_scheduler,
                    cfg.rb_allocation,
                    &candidates,
                    |pos| cfg.cqi.efficiency(ue_links[list[pos]].cqi) / rn_theta[list[pos]],
                    &mut rn_cursors[k],
                    list.len(),
                    rb,
                );
                let mut used_rb = 0u64;
                for &(pos, rb_k) in &grants {
                    let j = list[pos];
                    let cqi = ue_links[j].cqi;
                    let per_rb = cfg.cqi.efficiency(cqi) * symbols as f64 / 8.0;
                    let cap = capacity_bytes(cfg.cqi.efficiency(cqi), symbols, rb_k);
                    let delivered = buffers[j].as_mut().expect("relayed ue").take(cap);
                    if delivered == 0 {
                        continue;
                    }
                    rn_credit[j] = delivered;
                    ue_rows[j].bytes += delivered;
                    ue_rows[j].mcs = served_mcs(&cfg.cqi, cqi, symbols, rb_k, delivered);
                    access_bits += delivered * 8;
                    access_symbols += rb_k as u64 * symbols as u64;
                    used_rb += ((delivered as f64 / per_rb).ceil() as u64).min(rb_k as u64);
                }
                rn_idle_rb[k] += rb as u64 - used_rb.min(rb as u64);
            }
        }
        for j in 0..n_ue {
            if rn_of_ue[j].is_some() {
                rn_theta[j] = ((1.0 - eps) * rn_theta[j] + eps * rn_credit[j] as f64).max(1e-9);
            }
        }

        for j in 0..n_ue {
            let stats = &mut ue_summaries[j].per_kind[kind.index()];
            stats.ttis += 1;
            stats.cqi_sum += ue_rows[j].cqi as u64;
            stats.bytes += ue_rows[j].bytes;
            if let Some(m) = ue_rows[j].mcs {
                stats.served_ttis += 1;
                stats.mcs_sum += m as u64;
            }
            ue_summaries[j].bytes += ue_rows[j].bytes;
        }

        records.push(TtiRecord {
            tti,
            kind,
            active,
            ues: ue_rows,
            backhaul: bh_rows,
        });
    }

    let rns: Vec<RnSummary> = (0..n_rn)
        .map(|k| {
            let (mut arrivals, mut departures, mut drops, mut queued) = (0u64, 0u64, 0u64, 0u64);
            for &j in &rn_ues[k] {
                let b = buffers[j].as_ref().expect("relayed ue");
                arrivals += b.arrivals();
                departures += b.departures();
                drops += b.drops();
                queued += b.queued();
            }
            RnSummary {
                rn: k,
                arrivals,
                departures,
                drops,
                queued,
                idle_access_rb: rn_idle_rb[k],
                tx_ttis: rn_tx_ttis[k],
            }
        })
        .collect();

    let direct_bytes: u64 = ue_summaries
        .iter()
        .filter(|u| u.class == FlowClass::Direct)
        .map(|u| u.bytes)
        .sum();
    let relayed_bytes: u64 = ue_summaries
        .iter()
        .filter(|u| u.class == FlowClass::Relayed)
        .map(|u| u.bytes)
        .sum();

    Ok(ScenarioResult {
        summary: ScenarioSummary {
            plan: cfg.plan.to_string(),
            alpha: cfg.plan.alpha(),
            period,
            ttis: cfg.ttis,
            rb_per_subframe: rb,
            ues: ue_summaries,
            rns,
            direct_bytes,
            relayed_bytes,
            half_duplex_violations,
            u_ttis,
            u_ttis_with_rn_tx,
            backhaul_bits,
            backhaul_symbols,
            access_bits,
            access_symbols,
        },
        records,
    })
}

/// Which plan won a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Better {
    A,
    B,
    Tie,
}

impl std::fmt::Display for Better {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Better::A => write!(f, "a"),
            Better::B => write!(f, "b"),
            Better::Tie => write!(f, "tie"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub name: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub better: Better,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanComparison {
    pub plan_a: String,
    pub plan_b: String,
    pub rows: Vec<MetricRow>,
    pub summary_a: ScenarioSummary,
    pub summary_b: ScenarioSummary,
}

impl PlanComparison {
    pub fn to_csv(&self) -> String {
        let mut out = format!("metric,plan_a_{},plan_b_{},better\n", self.plan_a, self.plan_b);
        let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.name,
                fmt_opt(row.a),
                fmt_opt(row.b),
                row.better
            ));
        }
        out
    }

    pub fn row(&self, name: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

fn metric_row(name: &str, a: Option<f64>, b: Option<f64>, higher_is_better: bool) -> MetricRow {
    let better = match (a, b) {
        (Some(x), Some(y)) if x != y => {
            if (x > y) == higher_is_better {
                Better::A
            } else {
                Better::B
            }
        }
        _ => Better::Tie,
    };
    MetricRow {
        name: name.to_string(),
        a,
        b,
        better,
    }
}

/// Runs the same scenario under two plans and tabulates the headline
/// metrics. Plans must share a period so the per-period fading draws pair
/// up; otherwise the comparison would confound plan structure with fading.
pub fn compare_plans(cfg: &ScenarioConfig, plan_b: &SubframePlan) -> Result<PlanComparison> {
    if plan_b.period() != cfg.plan.period() {
        return Err(Error::domain(format!(
            "compared plans must share a period: {} vs {}",
            cfg.plan.period(),
            plan_b.period()
        )));
    }
    let a = run_scenario(cfg)?;
    let mut cfg_b = cfg.clone();
    cfg_b.plan = plan_b.clone();
    let b = run_scenario(&cfg_b)?;
    let (sa, sb) = (a.summary, b.summary);

    let per_tti = |bytes: u64, ttis: u64| Some(bytes as f64 / ttis as f64);
    let drops = |s: &ScenarioSummary| Some(s.rns.iter().map(|r| r.drops).sum::<u64>() as f64);
    let rows = vec![
        metric_row(
            "direct_bytes_per_tti",
            per_tti(sa.direct_bytes, sa.ttis),
            per_tti(sb.direct_bytes, sb.ttis),
            true,
        ),
        metric_row(
            "relayed_bytes_per_tti",
            per_tti(sa.relayed_bytes, sa.ttis),
            per_tti(sb.relayed_bytes, sb.ttis),
            true,
        ),
        metric_row("buffer_drop_bytes", drops(&sa), drops(&sb), false),
        metric_row(
            "mean_cqi_b",
            sa.mean_cqi_by_kind(SubframeKind::B),
            sb.mean_cqi_by_kind(SubframeKind::B),
            true,
        ),
        metric_row(
            "mean_cqi_d",
            sa.mean_cqi_by_kind(SubframeKind::D),
            sb.mean_cqi_by_kind(SubframeKind::D),
            true,
        ),
        metric_row(
            "mean_cqi_u",
            sa.mean_cqi_by_kind(SubframeKind::U),
            sb.mean_cqi_by_kind(SubframeKind::U),
            true,
        ),
        metric_row(
            "mean_direct_mcs_d",
            sa.mean_direct_mcs_by_kind(SubframeKind::D),
            sb.mean_direct_mcs_by_kind(SubframeKind::D),
            true,
        ),
        metric_row(
            "mean_direct_mcs_u",
            sa.mean_direct_mcs_by_kind(SubframeKind::U),
            sb.mean_direct_mcs_by_kind(SubframeKind::U),
            true,
        ),
    ];
    Ok(PlanComparison {
        plan_a: sa.plan.clone(),
        plan_b: sb.plan.clone(),
        rows,
        summary_a: sa,
        summary_b: sb,
    })
}

/// Provisioning verdict from the measured two-hop efficiencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceVerdict {
    /// Backhaul share below the optimal split: relays starve, access RBs idle.
    BackhaulUnderProvisioned,
    /// Backhaul share above the optimal split: buffers fill, drops appear.
    AccessUnderProvisioned,
    Balanced,
    /// One of the hops never carried data.
    Indeterminate,
}

impl std::fmt::Display for BalanceVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BalanceVerdict::BackhaulUnderProvisioned => "backhaul_under_provisioned",
            BalanceVerdict::AccessUnderProvisioned => "access_under_provisioned",
            BalanceVerdict::Balanced => "balanced",
            BalanceVerdict::Indeterminate => "indeterminate",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnBalance {
    pub rn: usize,
    pub inbound_bytes_per_tti: f64,
    pub outbound_bytes_per_tti: f64,
    pub drops: u64,
    pub queued: u64,
    pub idle_access_rb: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BufferBalanceReport {
    pub rho_r: Option<f64>,
    pub rho_a: Option<f64>,
    /// Optimal backhaul share for the measured efficiencies.
    pub alpha_star: Option<f64>,
    pub actual_alpha: f64,
    pub verdict: BalanceVerdict,
    pub rns: Vec<RnBalance>,
}

impl BufferBalanceReport {
    /// Key-value CSV: headline figures then per-relay rows.
    pub fn to_csv(&self) -> String {
        let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("key,value\n");
        out.push_str(&format!("rho_r,{}\n", fmt_opt(self.rho_r)));
        out.push_str(&format!("rho_a,{}\n", fmt_opt(self.rho_a)));
        out.push_str(&format!("alpha_star,{}\n", fmt_opt(self.alpha_star)));
        out.push_str(&format!("actual_alpha,{}\n", self.actual_alpha));
        out.push_str(&format!("verdict,{}\n", self.verdict));
        for rn in &self.rns {
            out.push_str(&format!(
                "rn{}_inbound_bytes_per_tti,{}\n",
                rn.rn, rn.inbound_bytes_per_tti
            ));
            out.push_str(&format!(
                "rn{}_outbound_bytes_per_tti,{}\n",
                rn.rn, rn.outbound_bytes_per_tti
            ));
            out.push_str(&format!("rn{}_drop_bytes,{}\n", rn.rn, rn.drops));
            out.push_str(&format!("rn{}_queued_bytes,{}\n", rn.rn, rn.queued));
            out.push_str(&format!("rn{}_idle_access_rb,{}\n", rn.rn, rn.idle_access_rb));
        }
        out
    }
}

/// Compares the plan's backhaul share against the optimal split implied by
/// the measured per-hop efficiencies. Balanced means within half a subframe
/// per period.
pub fn buffer_balance_report(result: &ScenarioResult) -> BufferBalanceReport {
    let s = &result.summary;
    let rho_r = s.rho_r();
    let rho_a = s.rho_a();
    let alpha_star = match (rho_r, rho_a) {
        (Some(r), Some(a)) => Some(a / (r + a)),
        _ => None,
    };
    let verdict = match alpha_star {
        None => BalanceVerdict::Indeterminate,
        Some(astar) => {
            let band = 0.5 / s.period as f64;
            if (s.alpha - astar).abs() <= band {
                BalanceVerdict::Balanced
            } else if s.alpha < astar {
                BalanceVerdict::BackhaulUnderProvisioned
            } else {
                BalanceVerdict::AccessUnderProvisioned
            }
        }
    };
    let rns = s
        .rns
        .iter()
        .map(|r| RnBalance {
            rn: r.rn,
            inbound_bytes_per_tti: r.arrivals as f64 / s.ttis as f64,
            outbound_bytes_per_tti: r.departures as f64 / s.ttis as f64,
            drops: r.drops,
            queued: r.queued,
            idle_access_rb: r.idle_access_rb,
        })
        .collect();
    BufferBalanceReport {
        rho_r,
        rho_a,
        alpha_star,
        actual_alpha: s.alpha,
        verdict,
        rns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::NodeSpec;
    use crate::sim::UeSpec;

    fn scenario() -> ScenarioConfig {
        ScenarioConfig {
            donor: NodeSpec {
                x: 0.0,
                y: 0.0,
                power_dbm: 46.0,
            },
            relays: vec![NodeSpec {
                x: 500.0,
                y: 0.0,
                power_dbm: 30.0,
            }],
            ues: vec![
                UeSpec {
                    id: 0,
                    x: 700.0,
                    y: 0.0,
                    attach: Attachment::Donor,
                    traffic: Traffic::FullBuffer,
                },
                UeSpec {
                    id: 1,
                    x: 560.0,
                    y: 0.0,
                    attach: Attachment::Relay(0),
                    traffic: Traffic::Cbr { bytes_per_tti: 240 },
                },
            ],
            plan: SubframePlan::parse("BDDDUU").unwrap(),
            ttis: 600,
            seed: 7,
            rb_per_subframe: 50,
            symbols_per_rb: 168,
            relay_buffer_bytes: 1_000_000,
            noise_floor_dbm: -100.0,
            pathloss_exponent: 3.5,
            reference_loss_db: 30.0,
            donor_scheduler: SchedulerPolicy::ProportionalFair,
            relay_scheduler: SchedulerPolicy::ProportionalFair,
            rb_allocation: RbAllocation::WholeSubframe,
            pf_epsilon: 0.1,
            cqi: CqiConfig::default(),
        }
    }

    #[test]
    fn reruns_are_bit_identical() {
        let cfg = scenario();
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a, b);
        let mut cfg2 = cfg.clone();
        cfg2.seed = 8;
        let c = run_scenario(&cfg2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gating_and_conservation() {
        let cfg = scenario();
        let res = run_scenario(&cfg).unwrap();
        assert_eq!(res.summary.half_duplex_violations, 0);
        for rec in &res.records {
            for ue in &rec.ues {
                if ue.node != TransmitterId::Donor && rec.kind != SubframeKind::U {
                    assert_eq!(ue.bytes, 0, "relayed UE served outside U at tti {}", rec.tti);
                }
            }
            for bh in &rec.backhaul {
                if rec.kind != SubframeKind::B {
                    assert_eq!(bh.bytes, 0, "backhaul bytes outside B at tti {}", rec.tti);
                }
                assert!(
                    !rec.active.contains(&TransmitterId::Relay(bh.rn)),
                    "listening relay also active at tti {}",
                    rec.tti
                );
            }
        }
        let rn = &res.summary.rns[0];
        assert_eq!(rn.arrivals, rn.departures + rn.drops + rn.queued);
        assert!(rn.arrivals > 0, "backhaul never carried data");
        assert!(res.summary.relayed_bytes > 0, "relayed UE never served");
    }

    #[test]
    fn silent_relay_u_subframes_match_d_subframes_exactly() {
        // Light CBR drains the buffer in the first U subframe of each
        // period, leaving the second one silent.
        let cfg = scenario();
        let res = run_scenario(&cfg).unwrap();
        let period = cfg.plan.period() as usize;
        let mut checked = 0;
        for chunk in res.records.chunks(period) {
            let d_ref = chunk
                .iter()
                .find(|r| r.kind == SubframeKind::D)
                .expect("plan has D subframes");
            for rec in chunk.iter().filter(|r| {
                r.kind == SubframeKind::U
                    && !r.active.iter().any(|t| matches!(t, TransmitterId::Relay(_)))
            }) {
                for (a, b) in rec.ues.iter().zip(d_ref.ues.iter()) {
                    if a.node == TransmitterId::Donor {
                        assert_eq!(a.sinr_db.to_bits(), b.sinr_db.to_bits());
                        assert_eq!(a.cqi, b.cqi);
                    }
                }
                checked += 1;
            }
        }
        assert!(checked > 50, "only {checked} silent U subframes observed");
        assert!(
            res.summary.u_ttis_with_rn_tx > 0,
            "relay never transmitted at all"
        );
    }

    #[test]
    fn direct_mcs_degrades_under_relay_interference() {
        let cfg = scenario();
        let res = run_scenario(&cfg).unwrap();
        let d = res.summary.mean_direct_mcs_by_kind(SubframeKind::D).unwrap();
        let u = res.summary.mean_direct_mcs_by_kind(SubframeKind::U).unwrap();
        assert!(
            d > u,
            "direct MCS should drop when relays interfere: D {d} vs U {u}"
        );
    }

    #[test]
    fn zero_relay_runs_identical_across_same_period_plans() {
        let mut cfg = scenario();
        cfg.relays.clear();
        cfg.ues = vec![
            UeSpec {
                id: 0,
                x: 700.0,
                y: 0.0,
                attach: Attachment::Donor,
                traffic: Traffic::FullBuffer,
            },
            UeSpec {
                id: 1,
                x: 300.0,
                y: 100.0,
                attach: Attachment::Donor,
                traffic: Traffic::Cbr { bytes_per_tti: 500 },
            },
        ];
        cfg.plan = SubframePlan::parse("BDDDUU").unwrap();
        let a = run_scenario(&cfg).unwrap();
        let mut cfg2 = cfg.clone();
        cfg2.plan = SubframePlan::parse("BUUUUU").unwrap();
        let b = run_scenario(&cfg2).unwrap();
        // Subframe labels differ, but the behavior rows must be identical.
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_eq!(ra.ues, rb.ues, "tti {}", ra.tti);
            assert_eq!(ra.active, rb.active);
        }
        assert_eq!(a.summary.direct_bytes, b.summary.direct_bytes);
    }

    #[test]
    fn round_robin_whole_subframe_alternates() {
        let mut cfg = scenario();
        cfg.donor_scheduler = SchedulerPolicy::RoundRobin;
        cfg.ues = vec![
            UeSpec {
                id: 0,
                x: 200.0,
                y: 0.0,
                attach: Attachment::Donor,
                traffic: Traffic::FullBuffer,
            },
            UeSpec {
                id: 1,
                x: 0.0,
                y: 200.0,
                attach: Attachment::Donor,
                traffic: Traffic::FullBuffer,
            },
        ];
        cfg.relays.clear();
        cfg.ttis = 60;
        let res = run_scenario(&cfg).unwrap();
        let served0 = res.summary.ues[0].total().served_ttis;
        let served1 = res.summary.ues[1].total().served_ttis;
        assert_eq!(served0, 30);
        assert_eq!(served1, 30);
    }

    #[test]
    fn per_rb_round_robin_splits_each_subframe() {
        let mut cfg = scenario();
        cfg.rb_allocation = RbAllocation::PerRbRoundRobin;
        cfg.ues = vec![
            UeSpec {
                id: 0,
                x: 200.0,
                y: 0.0,
                attach: Attachment::Donor,
                traffic: Traffic::FullBuffer,
            },
            UeSpec {
                id: 1,
                x: 0.0,
                y: 200.0,
                attach: Attachment::Donor,
                traffic: Traffic::FullBuffer,
            },
        ];
        cfg.relays.clear();
        cfg.ttis = 12;
        let res = run_scenario(&cfg).unwrap();
        for rec in &res.records {
            assert!(rec.ues[0].bytes > 0);
            assert!(rec.ues[1].bytes > 0);
        }
    }

    #[test]
    fn compare_plans_requires_equal_periods() {
        let cfg = scenario();
        let shorter = SubframePlan::parse("BU").unwrap();
        assert!(compare_plans(&cfg, &shorter).is_err());
        let cmp = compare_plans(&cfg, &SubframePlan::parse("BUUUUU").unwrap()).unwrap();
        assert_eq!(cmp.rows.len(), 8);
        assert!(cmp.row("direct_bytes_per_tti").is_some());
        // A's direct UE enjoys relay-silent D subframes; B has none at all.
        let mcs_d = cmp.row("mean_direct_mcs_d").unwrap();
        assert!(mcs_d.a.is_some() && mcs_d.b.is_none());
        assert_eq!(mcs_d.better, Better::Tie);
        let csv = cmp.to_csv();
        assert!(csv.starts_with("metric,"));
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn balance_report_flags_starved_backhaul() {
        // One backhaul subframe in eight with a hungry relayed UE: the
        // access hop can move more than the backhaul supplies.
        let mut cfg = scenario();
        cfg.plan = SubframePlan::parse("BUUUUUUU").unwrap();
        cfg.ues[1].traffic = Traffic::FullBuffer;
        cfg.ttis = 800;
        let res = run_scenario(&cfg).unwrap();
        let report = buffer_balance_report(&res);
        assert!(report.rho_r.is_some() && report.rho_a.is_some());
        let astar = report.alpha_star.unwrap();
        assert!(report.actual_alpha < astar, "alpha {} vs alpha* {astar}", report.actual_alpha);
        assert_eq!(report.verdict, BalanceVerdict::BackhaulUnderProvisioned);
        assert!(report.rns[0].idle_access_rb > 0);
        let csv = report.to_csv();
        assert!(csv.contains("verdict,backhaul_under_provisioned"));
    }

    #[test]
    fn trace_csv_has_expected_columns() {
        let mut cfg = scenario();
        cfg.ttis = 6;
        let res = run_scenario(&cfg).unwrap();
        let csv = res.trace_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "tti,kind,node,ue,cqi,mcs,bytes");
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,B,donor,ue0,"));
        // One line per UE report and per backhaul report, plus the header.
        let rows: usize = res
            .records
            .iter()
            .map(|r| r.ues.len() + r.backhaul.len())
            .sum();
        assert_eq!(csv.lines().count(), 1 + rows);
        assert!(res.records.iter().any(|r| !r.backhaul.is_empty()));
        let summary = res.summary_csv();
        assert!(summary.starts_with("ue,class,bytes,"));
        assert_eq!(summary.lines().count(), 3);
    }
}
