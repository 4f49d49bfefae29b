//! Sweeps the relayed-flow incentive beta and shows convergence toward the
//! large-beta asymptote, where the scheduler splits the frame by phase.

use relaylab::analytic::{beta_asymptote, log_space, sweep, SolverOptions, SweepParameter};
use relaylab::{FlowSpec, RelayPhaseConfig};

fn main() {
    let flows = vec![FlowSpec::direct(0, 1.0, 1.0), FlowSpec::relayed(1, 1.0)];
    let phase = RelayPhaseConfig::from_alpha(0.5, 1.0).unwrap();
    let values = log_space(1.0, 1e6, 25).unwrap();
    let table = sweep(
        SweepParameter::Beta,
        &values,
        &flows,
        &phase,
        &SolverOptions::default(),
    )
    .unwrap();

    print!("{}", table.to_csv());

    let limit = beta_asymptote(&flows, &phase).unwrap();
    let last = table.rows.last().unwrap();
    println!(
        "\nasymptote: direct {:.6}, relayed {:.6}", limit[0], limit[1]
    );
    println!(
        "at beta = {:.3e}: direct {:.6}, relayed {:.6}",
        last.value, last.theta[0], last.theta[1]
    );
}
