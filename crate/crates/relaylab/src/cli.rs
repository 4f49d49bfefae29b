//! Command-line front end: JSON configs in, CSV/SVG plus a manifest out.
//!
//! Every run writes `manifest.json` into the output directory echoing the
//! resolved configuration, the config file hash and the tool version, so a
//! directory of outputs is self-describing and reruns can be checked for
//! byte-identical results. Nothing here depends on wall-clock time.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{self, SolverOptions, SweepParameter, SweepTable};
use crate::error::{Error, Result};
use crate::flow::{FlowSpec, RelayPhaseConfig};
use crate::mc::{run_mc, McConfig, Policy};
use crate::radio::{render_sinr_map, NodeGeometry, ScenarioTag};
use crate::sim::{
    buffer_balance_report, compare_plans, run_scenario, ScenarioConfig, SubframePlan,
};

/// Exit code signalling a solver that ran but did not converge.
pub const EXIT_NONCONVERGED: i32 = 2;

#[derive(Parser)]
#[command(
    name = "relaylab",
    version,
    about = "Relay-aware downlink scheduling laboratory",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the stationary PF throughput fixed point for one population.
    Solve(CommonArgs),
    /// Solve across a parameter grid (beta, alpha or gamma).
    Sweep(CommonArgs),
    /// Run the slot-level Monte-Carlo scheduling oracle.
    Mc(CommonArgs),
    /// Replay a subframe plan TTI by TTI over a node geometry.
    Sim(CommonArgs),
    /// Run one scenario under two plans and tabulate the differences.
    Compare(CommonArgs),
    /// Render best-server SINR rasters with relays active and silent.
    Map(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config where one is meaningful.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps and map rendering.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also emit SVG plots where the subcommand supports them.
    #[arg(long)]
    svg: bool,
}

/// Parses `argv` and runs the selected subcommand. Returns the process exit
/// code: 0 on success, 1 on usage or config errors, 2 when a solve ran but
/// failed to converge.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    let (name, args): (&'static str, &CommonArgs) = match command {
        Command::Solve(a) => ("solve", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Mc(a) => ("mc", a),
        Command::Sim(a) => ("sim", a),
        Command::Compare(a) => ("compare", a),
        Command::Map(a) => ("map", a),
    };
    if args.jobs == Some(0) {
        return Err(Error::config("--jobs must be at least 1"));
    }
    let raw = fs::read(&args.config)?;
    let ctx = RunContext {
        name,
        args,
        config_sha256: hex_sha256(&raw),
    };
    let work = || match command {
        Command::Solve(_) => run_solve(&ctx, &raw),
        Command::Sweep(_) => run_sweep(&ctx, &raw),
        Command::Mc(_) => run_mc_cmd(&ctx, &raw),
        Command::Sim(_) => run_sim(&ctx, &raw),
        Command::Compare(_) => run_compare(&ctx, &raw),
        Command::Map(_) => run_map(&ctx, &raw),
    };
    match args.jobs {
        None => work(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))?;
            pool.install(work)
        }
    }
}

fn hex_sha256(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

struct RunContext<'a> {
    name: &'static str,
    args: &'a CommonArgs,
    config_sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    config_path: String,
    out_dir: String,
    seed_override: Option<u64>,
    jobs: Option<usize>,
    svg: bool,
    tool_version: &'a str,
    config_sha256: &'a str,
    resolved_config: serde_json::Value,
}

impl RunContext<'_> {
    fn parse<T: for<'de> Deserialize<'de>>(&self, raw: &[u8]) -> Result<T> {
        serde_json::from_slice(raw).map_err(Error::from)
    }

    fn write(&self, file: &str, text: &str) -> Result<()> {
        fs::create_dir_all(&self.args.out)?;
        fs::write(self.args.out.join(file), text)?;
        Ok(())
    }

    /// The config as it was actually used, seed override applied.
    fn write_manifest<C: Serialize>(&self, resolved: &C) -> Result<()> {
        let manifest = Manifest {
            subcommand: self.name,
            config_path: self.args.config.display().to_string(),
            out_dir: self.args.out.display().to_string(),
            seed_override: self.args.seed,
            jobs: self.args.jobs,
            svg: self.args.svg,
            tool_version: env!("CARGO_PKG_VERSION"),
            config_sha256: &self.config_sha256,
            resolved_config: serde_json::to_value(resolved)?,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        self.write("manifest.json", &text)
    }

    fn warn_seed_ignored(&self) {
        if self.args.seed.is_some() {
            eprintln!("warning: --seed has no effect on `{}`", self.name);
        }
    }
}

// ---------------------------------------------------------------- solve --

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveJob {
    flows: Vec<FlowSpec>,
    /// Absent means a plain single-phase PF population.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase: Option<RelayPhaseConfig>,
    #[serde(default)]
    solver: SolverOptions,
}

fn run_solve(ctx: &RunContext, raw: &[u8]) -> Result<i32> {
    ctx.warn_seed_ignored();
    let job: SolveJob = ctx.parse(raw)?;
    let report = match &job.phase {
        Some(phase) => analytic::fixed_point_relay(&job.flows, phase, &job.solver)?,
        None => analytic::fixed_point_norelay(&job.flows, &job.solver)?,
    };
    let mut csv = String::from("flow_id,class,theta,residual,converged\n");
    for (k, flow) in job.flows.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            flow.id,
            flow.class,
            report.theta[k],
            report.residuals[k],
            report.converged
        ));
    }
    ctx.write("theta.csv", &csv)?;
    ctx.write_manifest(&job)?;
    if !report.converged {
        eprintln!(
            "warning: solve stopped at residual {} after {} iterations",
            report.residual, report.iterations
        );
        return Ok(EXIT_NONCONVERGED);
    }
    Ok(0)
}

// ---------------------------------------------------------------- sweep --

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    from: f64,
    to: f64,
    points: usize,
    #[serde(default)]
    spacing: Spacing,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepJob {
    parameter: SweepParameter,
    /// Explicit grid values; mutually exclusive with `grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
    flows: Vec<FlowSpec>,
    phase: RelayPhaseConfig,
    #[serde(default)]
    solver: SolverOptions,
}

fn run_sweep(ctx: &RunContext, raw: &[u8]) -> Result<i32> {
    ctx.warn_seed_ignored();
    let job: SweepJob = ctx.parse(raw)?;
    let values: Vec<f64> = match (&job.values, &job.grid) {
        (Some(v), None) => v.clone(),
        (None, Some(g)) => match g.spacing {
            Spacing::Log => analytic::log_space(g.from, g.to, g.points)?,
            Spacing::Linear => analytic::lin_space(g.from, g.to, g.points)?,
        },
        _ => {
            return Err(Error::config(
                "sweep config needs exactly one of `values` or `grid`",
            ))
        }
    };
    let table = analytic::sweep(job.parameter, &values, &job.flows, &job.phase, &job.solver)?;
    ctx.write("sweep.csv", &table.to_csv())?;
    if ctx.args.svg {
        ctx.write("sweep.svg", &sweep_svg(&table))?;
    }
    ctx.write_manifest(&job)?;
    let stuck = table.rows.iter().filter(|r| !r.converged).count();
    if stuck > 0 {
        eprintln!("warning: {stuck} of {} sweep points did not converge", table.rows.len());
        return Ok(EXIT_NONCONVERGED);
    }
    Ok(0)
}

/// Minimal line plot: one polyline per flow, log x when the grid spans two
/// decades, min/max tick labels only.
fn sweep_svg(table: &SweepTable) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 20.0;
    const B: f64 = 45.0;
    const PALETTE: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    ];

    let xs: Vec<f64> = table.rows.iter().map(|r| r.value).collect();
    let log_x = xs.first().is_some_and(|&lo| lo > 0.0)
        && xs.last().is_some_and(|&hi| hi / xs[0] >= 100.0);
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let (x_lo, x_hi) = (tx(xs[0]), tx(*xs.last().unwrap()));
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };

    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for row in &table.rows {
        for k in 0..table.flow_ids.len() {
            let v = row.theta[k];
            if v.is_finite() {
                y_lo = y_lo.min(v);
                y_hi = y_hi.max(v);
            }
        }
    }
    if !y_lo.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    let y_span = if y_hi > y_lo { y_hi - y_lo } else { 1.0 };

    let px = |v: f64| L + (tx(v) - x_lo) / x_span * (W - L - R);
    let py = |v: f64| H - B - (v - y_lo) / y_span * (H - T - B);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    svg.push_str(&format!(
        "<line x1=\"{L}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - B,
        W - R
    ));
    svg.push_str(&format!(
        "<line x1=\"{L}\" y1=\"{T}\" x2=\"{L}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - B
    ));
    for (k, (id, class)) in table.flow_ids.iter().zip(&table.flow_classes).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = table
            .rows
            .iter()
            .filter(|r| r.theta[k].is_finite())
            .map(|r| format!("{:.2},{:.2}", px(r.value), py(r.theta[k])))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">flow{id} ({class})</text>\n",
            W - R - 150.0,
            T + 16.0 * (k as f64 + 1.0)
        ));
    }
    let x_label = |v: f64| {
        if log_x {
            format!("{v:.3e}")
        } else {
            format!("{v:.4}")
        }
    };
    svg.push_str(&format!(
        "<text x=\"{L}\" y=\"{}\" font-size=\"12\">{}</text>\n",
        H - B + 18.0,
        x_label(xs[0])
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
        W - R,
        H - B + 18.0,
        x_label(*xs.last().unwrap())
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{y_hi:.4}</text>\n",
        L - 6.0,
        T + 6.0
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{y_lo:.4}</text>\n",
        L - 6.0,
        H - B
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        (L + W - R) / 2.0,
        H - 8.0,
        table.parameter.name()
    ));
    svg.push_str("</svg>\n");
    svg
}

// ------------------------------------------------------------------- mc --

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct McJob {
    #[serde(default = "default_policy")]
    policy: Policy,
    flows: Vec<FlowSpec>,
    phase: RelayPhaseConfig,
    slots: u64,
    ewma_epsilon: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trace_every: Option<u64>,
}

fn default_policy() -> Policy {
    Policy::IncentivizedProportionalFair
}

fn run_mc_cmd(ctx: &RunContext, raw: &[u8]) -> Result<i32> {
    let mut job: McJob = ctx.parse(raw)?;
    if let Some(seed) = ctx.args.seed {
        job.seed = seed;
    }
    let cfg = McConfig {
        flows: job.flows.clone(),
        phase: job.phase.clone(),
        slots: job.slots,
        ewma_epsilon: job.ewma_epsilon,
        seed: job.seed,
        trace_every: job.trace_every,
    };
    if !cfg.meets_convergence_guideline() {
        eprintln!(
            "warning: slots * ewma_epsilon = {:.2} < 10; averages may still carry the transient",
            cfg.slots as f64 * cfg.ewma_epsilon
        );
    }
    let result = run_mc(&cfg, job.policy)?;
    let mut csv = String::from(
        "flow_id,class,theta_mc,theta_ewma,wins,relay_phase_wins,access_phase_wins\n",
    );
    for (k, flow) in cfg.flows.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            flow.id,
            flow.class,
            result.theta_sample_mean[k],
            result.theta_ewma[k],
            result.win_counts[k],
            result.relay_phase_wins[k],
            result.access_phase_wins[k]
        ));
    }
    ctx.write("mc.csv", &csv)?;
    if job.trace_every.is_some() {
        let mut trace = String::from("slot,flow_id,theta_bar\n");
        for point in &result.trace {
            for (k, flow) in cfg.flows.iter().enumerate() {
                trace.push_str(&format!("{},{},{}\n", point.slot, flow.id, point.theta_bar[k]));
            }
        }
        ctx.write("trace.csv", &trace)?;
    }
    ctx.write_manifest(&job)?;
    Ok(0)
}

// ------------------------------------------------------------------ sim --

fn run_sim(ctx: &RunContext, raw: &[u8]) -> Result<i32> {
    let mut cfg: ScenarioConfig = ctx.parse(raw)?;
    if let Some(seed) = ctx.args.seed {
        cfg.seed = seed;
    }
    if !cfg.covers_whole_periods() {
        eprintln!(
            "warning: {} TTIs do not cover whole {}-subframe periods; per-kind stats are uneven",
            cfg.ttis,
            cfg.plan.period()
        );
    }
    let result = run_scenario(&cfg)?;
    ctx.write("trace.csv", &result.trace_csv())?;
    ctx.write("summary.csv", &result.summary_csv())?;
    ctx.write("balance.csv", &buffer_balance_report(&result).to_csv())?;
    ctx.write_manifest(&cfg)?;
    Ok(0)
}

// -------------------------------------------------------------- compare --

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareJob {
    scenario: ScenarioConfig,
    plan_b: SubframePlan,
}

fn run_compare(ctx: &RunContext, raw: &[u8]) -> Result<i32> {
    let mut job: CompareJob = ctx.parse(raw)?;
    if let Some(seed) = ctx.args.seed {
        job.scenario.seed = seed;
    }
    let cmp = compare_plans(&job.scenario, &job.plan_b)?;
    ctx.write("comparison.csv", &cmp.to_csv())?;
    ctx.write_manifest(&job)?;
    Ok(0)
}

// ------------------------------------------------------------------ map --

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapJob {
    geometry: NodeGeometry,
    cell_size_m: f64,
}

fn run_map(ctx: &RunContext, raw: &[u8]) -> Result<i32> {
    ctx.warn_seed_ignored();
    let job: MapJob = ctx.parse(raw)?;
    for (tag, stem) in [
        (ScenarioTag::RelaysActive, "sinr_relays_active"),
        (ScenarioTag::RelaysSilent, "sinr_relays_silent"),
    ] {
        let grid = render_sinr_map(&job.geometry, tag, job.cell_size_m)?;
        ctx.write(&format!("{stem}.csv"), &grid.to_csv())?;
        if ctx.args.svg {
            ctx.write(&format!("{stem}.svg"), &grid.to_svg())?;
        }
    }
    ctx.write_manifest(&job)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn write_config(dir: &TempDir, name: &str, json: &str) -> PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, json).unwrap();
        path
    }

    fn run_args(args: &[&str]) -> i32 {
        run(std::iter::once("relaylab").chain(args.iter().copied()))
    }

    const SOLVE_BASELINE: &str = r#"{
        "flows": [
            {"id": 0, "class": "direct", "lambda_r": 1.0, "lambda_a": 1.0},
            {"id": 1, "class": "relayed", "lambda_r": 1.0}
        ],
        "phase": {"alpha": 0.5, "beta": 1.0}
    }"#;

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run_args(&["--help"]), 0);
        assert_eq!(run_args(&["solve", "--help"]), 0);
        assert_eq!(run_args(&["--version"]), 0);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_args(&["frobnicate"]), 1);
        assert_eq!(run_args(&["solve"]), 1, "--config is required");
        assert_eq!(run_args(&["solve", "--config"]), 1);
    }

    #[test]
    fn missing_config_file_exits_one() {
        let dir = TempDir::new().unwrap();
        let out = dir.path().join("out");
        assert_eq!(
            run_args(&[
                "solve",
                "--config",
                "/nonexistent/config.json",
                "--out",
                out.to_str().unwrap()
            ]),
            1
        );
        assert!(!out.exists());
    }

    #[test]
    fn unknown_config_keys_exit_one() {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(
            &dir,
            "bad.json",
            r#"{"flows": [], "phaze": {"alpha": 0.5}}"#,
        );
        let out = dir.path().join("out");
        assert_eq!(
            run_args(&[
                "solve",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap()
            ]),
            1
        );
    }

    #[test]
    fn solve_writes_theta_and_manifest() {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(&dir, "solve.json", SOLVE_BASELINE);
        let out = dir.path().join("out");
        let code = run_args(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let theta = fs::read_to_string(out.join("theta.csv")).unwrap();
        let mut lines = theta.lines();
        assert_eq!(lines.next().unwrap(), "flow_id,class,theta,residual,converged");
        let row0: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row0[0], "0");
        assert_eq!(row0[1], "direct");
        let t0: f64 = row0[2].parse().unwrap();
        assert!((t0 - 0.79).abs() < 0.01, "direct theta {t0}");
        assert_eq!(row0[4], "true");
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["subcommand"], "solve");
        assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
        assert!(manifest["resolved_config"]["flows"].is_array());
        assert!(manifest.get("timestamp").is_none());
    }

    #[test]
    fn solve_nonconvergence_exits_two() {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(
            &dir,
            "stuck.json",
            r#"{
                "flows": [
                    {"id": 0, "class": "direct", "lambda_r": 1.0, "lambda_a": 1.0},
                    {"id": 1, "class": "relayed", "lambda_r": 1.0}
                ],
                "phase": {"alpha": 0.5, "beta": 1.0},
                "solver": {"tolerance": 1e-14, "max_iter": 3, "damping": 0.5}
            }"#,
        );
        let out = dir.path().join("out");
        let code = run_args(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_NONCONVERGED);
        let theta = fs::read_to_string(out.join("theta.csv")).unwrap();
        assert!(theta.contains("false"), "rows flag non-convergence");
    }

    #[test]
    fn sweep_rejects_ambiguous_grid() {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(
            &dir,
            "sweep.json",
            r#"{
                "parameter": "beta",
                "values": [1.0, 2.0],
                "grid": {"from": 1.0, "to": 10.0, "points": 5},
                "flows": [
                    {"id": 0, "class": "direct", "lambda_r": 1.0, "lambda_a": 1.0},
                    {"id": 1, "class": "relayed", "lambda_r": 1.0}
                ],
                "phase": {"alpha": 0.5}
            }"#,
        );
        let out = dir.path().join("out");
        assert_eq!(
            run_args(&[
                "sweep",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap()
            ]),
            1
        );
    }

    #[test]
    fn sweep_writes_csv_and_optional_svg() {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(
            &dir,
            "sweep.json",
            r#"{
                "parameter": "beta",
                "grid": {"from": 1.0, "to": 1000.0, "points": 7, "spacing": "log"},
                "flows": [
                    {"id": 0, "class": "direct", "lambda_r": 1.0, "lambda_a": 1.0},
                    {"id": 1, "class": "relayed", "lambda_r": 1.0}
                ],
                "phase": {"alpha": 0.5}
            }"#,
        );
        let out = dir.path().join("out");
        let code = run_args(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--svg",
        ]);
        assert_eq!(code, 0);
        let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
        assert!(csv.starts_with("beta,theta_flow0_direct,theta_flow1_relayed,"));
        assert_eq!(csv.lines().count(), 8);
        let svg = fs::read_to_string(out.join("sweep.svg")).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn mc_seed_override_lands_in_manifest_and_outputs() {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(
            &dir,
            "mc.json",
            r#"{
                "flows": [
                    {"id": 0, "class": "direct", "lambda_r": 1.0, "lambda_a": 1.0},
                    {"id": 1, "class": "relayed", "lambda_r": 1.0}
                ],
                "phase": {"tau_r": 1, "tau_a": 1},
                "slots": 20000,
                "ewma_epsilon": 0.001,
                "seed": 1,
                "trace_every": 5000
            }"#,
        );
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        assert_eq!(
            run_args(&[
                "mc",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out_a.to_str().unwrap(),
                "--seed",
                "9"
            ]),
            0
        );
        assert_eq!(
            run_args(&[
                "mc",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out_b.to_str().unwrap()
            ]),
            0
        );
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_a.join("manifest.json")).unwrap())
                .unwrap();
        assert_eq!(manifest["seed_override"], 9);
        assert_eq!(manifest["resolved_config"]["seed"], 9);
        let a = fs::read_to_string(out_a.join("mc.csv")).unwrap();
        let b = fs::read_to_string(out_b.join("mc.csv")).unwrap();
        assert!(a.starts_with("flow_id,class,theta_mc,"));
        assert_ne!(a, b, "different seeds give different runs");
        let trace = fs::read_to_string(out_a.join("trace.csv")).unwrap();
        assert_eq!(trace.lines().next().unwrap(), "slot,flow_id,theta_bar");
    }

    #[test]
    fn map_without_svg_flag_skips_svg() {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(
            &dir,
            "map.json",
            r#"{
                "geometry": {
                    "donor": {"position": {"x": 0.0, "y": 0.0}, "power_dbm": 46.0},
                    "relays": [{"position": {"x": 400.0, "y": 0.0}, "power_dbm": 30.0}],
                    "users": [{"x": 200.0, "y": 100.0}]
                },
                "cell_size_m": 100.0
            }"#,
        );
        let out = dir.path().join("out");
        assert_eq!(
            run_args(&[
                "map",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap()
            ]),
            0
        );
        assert!(out.join("sinr_relays_active.csv").exists());
        assert!(out.join("sinr_relays_silent.csv").exists());
        assert!(!out.join("sinr_relays_active.svg").exists());
    }
}
