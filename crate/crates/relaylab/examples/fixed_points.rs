//! Stationary PF throughputs: closed forms, the damped fixed-point solver,
//! and the two-phase relay operating point.

use relaylab::analytic::{
    fixed_point_norelay, fixed_point_relay, pf_closed_form_norelay, rr_closed_form,
    SolverOptions,
};
use relaylab::{FlowSpec, RelayPhaseConfig};

fn main() {
    let opts = SolverOptions::default();

    // Plain PF over n symmetric Rayleigh users: theta_i = (H_n / n) / lambda_i.
    println!("single-phase PF, symmetric users");
    println!("{:>3} {:>12} {:>12} {:>12}", "n", "closed form", "solver", "RR");
    for n in 1..=6 {
        let flows: Vec<FlowSpec> = (0..n).map(|i| FlowSpec::direct(i, 1.0, 1.0)).collect();
        let closed = pf_closed_form_norelay(&flows).unwrap();
        let solved = fixed_point_norelay(&flows, &opts).unwrap();
        let rr = rr_closed_form(&flows).unwrap();
        println!(
            "{n:>3} {:>12.8} {:>12.8} {:>12.8}",
            closed[0], solved.theta[0], rr[0]
        );
    }

    // One direct + one relayed user, half the frame reserved for the relay
    // phase, no incentive: the half-duplex penalty lands on the relayed user.
    let flows = vec![FlowSpec::direct(0, 1.0, 1.0), FlowSpec::relayed(1, 1.0)];
    let phase = RelayPhaseConfig::from_alpha(0.5, 1.0).unwrap();
    let report = fixed_point_relay(&flows, &phase, &opts).unwrap();
    println!("\ntwo-phase relay point (alpha = 0.5, beta = 1)");
    for (flow, theta) in flows.iter().zip(report.theta.iter()) {
        println!("  flow {} ({}): theta = {theta:.6}", flow.id, flow.class);
    }
    println!(
        "  converged = {} after {} iterations, residual {:.3e}",
        report.converged, report.iterations, report.residual
    );
}
