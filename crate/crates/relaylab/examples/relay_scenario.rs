//! Replays a BDDDUU plan over one donor, one relay and two UEs, then prints
//! the per-UE summary and the backhaul/access provisioning verdict.

use relaylab::radio::CqiConfig;
use relaylab::sim::{
    buffer_balance_report, run_scenario, Attachment, NodeSpec, RbAllocation, ScenarioConfig,
    SchedulerPolicy, SubframeKind, SubframePlan, Traffic, UeSpec,
};

fn main() {
    let cfg = ScenarioConfig {
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
    };

    let result = run_scenario(&cfg).unwrap();
    let s = &result.summary;
    println!(
        "plan {} over {} TTIs (alpha = {:.3})",
        s.plan, s.ttis, s.alpha
    );
    println!(
        "half-duplex violations: {}; U subframes with an active relay: {}/{}",
        s.half_duplex_violations, s.u_ttis_with_rn_tx, s.u_ttis
    );
    for ue in &s.ues {
        println!(
            "  ue{} ({}): {} bytes; served MCS means B/D/U = {:?} {:?} {:?}",
            ue.ue,
            ue.class,
            ue.bytes,
            ue.kind(SubframeKind::B).mean_served_mcs().map(|v| (v * 100.0).round() / 100.0),
            ue.kind(SubframeKind::D).mean_served_mcs().map(|v| (v * 100.0).round() / 100.0),
            ue.kind(SubframeKind::U).mean_served_mcs().map(|v| (v * 100.0).round() / 100.0),
        );
    }
    for rn in &s.rns {
        println!(
            "  rn{}: in {} out {} drop {} queued {} bytes, idle access RBs {}",
            rn.rn, rn.arrivals, rn.departures, rn.drops, rn.queued, rn.idle_access_rb
        );
    }

    let report = buffer_balance_report(&result);
    println!(
        "measured rho_r {:?}, rho_a {:?}, alpha* {:?} vs plan alpha {:.3} -> {}",
        report.rho_r.map(|v| (v * 1000.0).round() / 1000.0),
        report.rho_a.map(|v| (v * 1000.0).round() / 1000.0),
        report.alpha_star.map(|v| (v * 1000.0).round() / 1000.0),
        report.actual_alpha,
        report.verdict
    );
}
