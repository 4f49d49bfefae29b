//! Two one-dimensional studies on the relay fixed point:
//!   - alpha: how much frame to reserve for the relay phase,
//!   - gamma: how badly relay-phase interference degrades direct users'
//!     access-phase gains (lambda_a = lambda_r / gamma).
//! Plus the bandwidth split that maximizes the end-to-end two-hop rate.

use relaylab::analytic::{
    end_to_end_efficiency, lin_space, log_space, optimal_split, recommended_beta, sweep,
    two_hop_rate, SolverOptions, SweepParameter,
};
use relaylab::{FlowSpec, RelayPhaseConfig};

fn main() {
    let flows = vec![FlowSpec::direct(0, 1.0, 1.0), FlowSpec::relayed(1, 1.0)];
    let opts = SolverOptions::default();

    let alphas = lin_space(0.0, 1.0, 11).unwrap();
    let phase = RelayPhaseConfig::from_alpha(0.5, 1.0).unwrap();
    let table = sweep(SweepParameter::Alpha, &alphas, &flows, &phase, &opts).unwrap();
    println!("alpha sweep (beta = 1)");
    print!("{}", table.to_csv());

    let gammas = log_space(1e-3, 1.0, 13).unwrap();
    let table = sweep(SweepParameter::Gamma, &gammas, &flows, &phase, &opts).unwrap();
    println!("\ngamma sweep (alpha = 0.5, beta = 1)");
    print!("{}", table.to_csv());

    // With both classes on the relay-phase rate, beta must offset the
    // direct users' extra access-phase service.
    let beta = recommended_beta(0.5, 1.0, 1.0).unwrap();
    println!("\nrecommended beta at alpha = 0.5, lambda_r = lambda_a = 1: {beta}");

    // Two-hop pipe: backhaul at rho_r, access at rho_a bits/symbol.
    let (rho_r, rho_a) = (4.0, 2.0);
    let alpha_star = optimal_split(rho_r, rho_a).unwrap();
    println!(
        "rho_r = {rho_r}, rho_a = {rho_a}: alpha* = {alpha_star:.4}, \
         end-to-end {:.4} bits/symbol, rate at alpha* = {:.4}",
        end_to_end_efficiency(rho_r, rho_a).unwrap(),
        two_hop_rate(alpha_star, rho_r, rho_a).unwrap()
    );
}
