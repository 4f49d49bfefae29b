//! Slot-level Monte-Carlo oracle vs the analytic fixed point: same
//! population, same phase plan, three seeds.

use relaylab::analytic::{fixed_point_relay, SolverOptions};
use relaylab::mc::{run_mc, McConfig, Policy};
use relaylab::{FlowSpec, RelayPhaseConfig};

fn main() {
    let flows = vec![FlowSpec::direct(0, 1.0, 1.0), FlowSpec::relayed(1, 1.0)];
    let phase = RelayPhaseConfig::from_subframes(1, 1, 1.0).unwrap();
    let exact = fixed_point_relay(&flows, &phase, &SolverOptions::default()).unwrap();
    println!(
        "analytic: direct {:.6}, relayed {:.6}",
        exact.theta[0], exact.theta[1]
    );

    for seed in [1, 2, 3] {
        let cfg = McConfig {
            flows: flows.clone(),
            phase: phase.clone(),
            slots: 1_000_000,
            ewma_epsilon: 1e-3,
            seed,
            trace_every: None,
        };
        let res = run_mc(&cfg, Policy::IncentivizedProportionalFair).unwrap();
        let mc = res.empirical_theta();
        println!(
            "seed {seed}: direct {:.6} ({:+.3}%), relayed {:.6} ({:+.3}%), \
             relayed access wins = {}",
            mc[0],
            100.0 * (mc[0] / exact.theta[0] - 1.0),
            mc[1],
            100.0 * (mc[1] / exact.theta[1] - 1.0),
            res.access_phase_wins[1]
        );
    }
}
