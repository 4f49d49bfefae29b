//! Same scenario under two same-period plans: BDDDUU (relay-protecting D
//! subframes) vs BUUUUU (every access subframe open to relays).

use relaylab::radio::CqiConfig;
use relaylab::sim::{
    compare_plans, Attachment, NodeSpec, RbAllocation, ScenarioConfig, SchedulerPolicy,
    SubframePlan, Traffic, UeSpec,
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

    let cmp = compare_plans(&cfg, &SubframePlan::parse("BUUUUU").unwrap()).unwrap();
    print!("{}", cmp.to_csv());
    println!(
        "\nwithin plan {}: direct-UE MCS in D {:?} vs U {:?} (relay interference)",
        cmp.plan_a,
        cmp.summary_a
            .mean_direct_mcs_by_kind(relaylab::sim::SubframeKind::D)
            .map(|v| (v * 100.0).round() / 100.0),
        cmp.summary_a
            .mean_direct_mcs_by_kind(relaylab::sim::SubframeKind::U)
            .map(|v| (v * 100.0).round() / 100.0),
    );
}
