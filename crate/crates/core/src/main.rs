use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use dgsched::engine::{run_with_options, Algorithm, RunOptions};
use dgsched::metrics::{
    check_qos, emit_report, emit_trace, overall_mean_delay, MetricsReport, QoSVerdict,
};
use dgsched::model::{load_model, validate, NetworkModel, Scheduler, SimConfig, Variant};
use dgsched::oracle::{compute_constants, solve_capacity_lp};

#[derive(Parser)]
#[command(
    name = "dgsched",
    about = "Delay-guaranteed cross-layer scheduling simulator for multi-hop wireless networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and report per-flow and global metrics.
    Run(RunArgs),
    /// Run a grid of simulations and write one report per run plus an index.
    Sweep(SweepArgs),
    /// Print exact capacity-region rates and the bound constants.
    Oracle(OracleArgs),
    /// Check model/config invariants and the admissibility conditions.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Model/config file (TOML).
    #[arg(long)]
    model: PathBuf,
    /// Algorithm: alg | alg-arb | alg-delayed | alg-general | bp
    /// (default: the config's variant).
    #[arg(long)]
    algo: Option<String>,
    /// Override the config horizon.
    #[arg(long)]
    horizon: Option<u64>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-slot state dumps here (and to <path>.virtual.csv).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Tolerance for the stochastic QoS checks.
    #[arg(long, default_value_t = 0.05)]
    qos_tol: f64,
    /// Suppress the stdout summary.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid file (TOML; see README).
    #[arg(long)]
    grid: PathBuf,
    /// Output directory for the per-run reports and index.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    model: PathBuf,
    /// Interior shrink epsilon for the capacity LP.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Also evaluate the admissibility conditions at this epsilon.
    #[arg(long)]
    epsilon: Option<f64>,
}

fn parse_algo(name: &str) -> Result<Algorithm> {
    Ok(match name {
        "alg" => Algorithm::Alg(Variant::Backlogged),
        "alg-arb" => Algorithm::Alg(Variant::ArbitraryArrivals),
        "alg-delayed" => Algorithm::Alg(Variant::DelayedInfo),
        "alg-general" => Algorithm::Alg(Variant::GeneralInterference),
        "bp" => Algorithm::BpBaseline,
        other => bail!("unknown algorithm {other:?} (alg|alg-arb|alg-delayed|alg-general|bp)"),
    })
}

fn default_algo(config: &SimConfig) -> Algorithm {
    Algorithm::Alg(config.variant)
}

fn gamma_for(model: &NetworkModel, config: &SimConfig) -> f64 {
    match config.scheduler {
        Scheduler::ExactMwm => 1.0,
        Scheduler::Gmm => 0.5,
        Scheduler::GreedyMwis => {
            let delta = model
                .conflict_adjacency()
                .iter()
                .map(|a| a.len())
                .max()
                .unwrap_or(0)
                .max(1);
            1.0 / delta as f64
        }
    }
}

fn print_summary(
    _model: &NetworkModel,
    config: &SimConfig,
    report: &MetricsReport,
    verdict: &QoSVerdict,
) {
    println!(
        "algorithm: {}  horizon: {}  seed: {}",
        report.algorithm, report.horizon, report.seed
    );
    println!("flow  route     a_c     rho_c    admitted  virtual  delay      delay_ok rate_ok");
    for (c, f) in report.flows.iter().enumerate() {
        println!(
            "{:<5} {:<9} {:<7} {:<8} {:<9.4} {:<8.4} {:<10} {:<8} {}",
            c,
            format!("{}->{}", f.source, f.destination),
            f.min_rate,
            f.delay_threshold,
            f.admitted_rate,
            f.virtual_rate,
            f.mean_delay
                .map(|d| format!("{d:.2}"))
                .unwrap_or_else(|| "-".into()),
            verdict.flows[c].delay_ok,
            verdict.flows[c].rate_ok,
        );
    }
    println!(
        "throughput: {:.4} (delivered {:.4}, virtual {:.4})",
        report.throughput, report.delivered_throughput, report.virtual_throughput
    );
    println!(
        "max backlog: {} (q_M = {}, bound {})  vq time-avg: {:.2}",
        report.max_backlog,
        config.q_m,
        if verdict.backlog_ok { "ok" } else { "VIOLATED" },
        report.vq_time_avg
    );
    if let Some(l) = report.lyapunov {
        println!(
            "lyapunov mean/max/last: {:.3e} / {:.3e} / {:.3e}",
            l.mean, l.max, l.last
        );
    }
    if let Some(d) = overall_mean_delay(report) {
        println!("mean end-to-end delay (all flows): {d:.2} slots");
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let (model, mut config) = load_model(&args.model)?;
    if let Some(h) = args.horizon {
        config.horizon = h;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let algo = match &args.algo {
        Some(a) => parse_algo(a)?,
        None => default_algo(&config),
    };
    let options = RunOptions {
        record_slots: args.trace.is_some(),
    };
    let report = run_with_options(&model, &config, algo, config.horizon, options)?;
    let mut verdict = check_qos(&report, &model, &config, args.qos_tol);
    if algo == Algorithm::BpBaseline {
        // The comparator runs with infinite buffers; q_M does not bind.
        verdict.backlog_ok = true;
    }
    if !args.quiet {
        print_summary(&model, &config, &report, &verdict);
    }
    if let Some(out) = &args.out {
        emit_report(&report, Some(&verdict), out)?;
    }
    if let Some(trace) = &args.trace {
        emit_trace(&report, &model, trace)?;
    }
    if !verdict.backlog_ok {
        bail!(
            "backlog bound violated: max U = {} > q_M = {}",
            report.max_backlog,
            config.q_m
        );
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct GridFile {
    base: String,
    #[serde(default)]
    grid: GridAxes,
    /// When set, every run uses rho_c = rho_per_qm * q_m for all flows.
    #[serde(default)]
    rho_per_qm: Option<f64>,
    #[serde(default)]
    horizon: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
struct GridAxes {
    #[serde(default)]
    q_m: Vec<u32>,
    #[serde(default)]
    mu_m: Vec<u32>,
    #[serde(default)]
    v: Vec<f64>,
    #[serde(default)]
    seed: Vec<u64>,
    #[serde(default)]
    algo: Vec<String>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.grid)
        .with_context(|| format!("failed to read {}", args.grid.display()))?;
    let grid: GridFile = toml::from_str(&text)
        .with_context(|| format!("failed to parse {}", args.grid.display()))?;
    let base_path = args
        .grid
        .parent()
        .unwrap_or(Path::new("."))
        .join(&grid.base);
    let (model, base_config) = load_model(&base_path)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("failed to create {}", args.out.display()))?;

    let q_ms = non_empty(grid.grid.q_m.clone(), base_config.q_m);
    let mu_ms = non_empty(grid.grid.mu_m.clone(), base_config.mu_m);
    let vs = non_empty(grid.grid.v.clone(), base_config.v);
    let seeds = non_empty(grid.grid.seed.clone(), base_config.seed);
    let algos = if grid.grid.algo.is_empty() {
        vec![None]
    } else {
        grid.grid.algo.iter().map(|a| Some(a.clone())).collect()
    };

    let mut index = String::from(
        "run,config_hash,file,algo,q_m,v,seed,horizon,throughput,delivered_throughput,\
mean_delay,max_backlog,qos_pass\n",
    );
    let mut run_id = 0;
    for algo_name in &algos {
        for &q_m in &q_ms {
            for &mu_m in &mu_ms {
                for &v in &vs {
                    for &seed in &seeds {
                        let mut model = model.clone();
                        let mut config = base_config.clone();
                        config.q_m = q_m;
                        config.mu_m = mu_m;
                        config.v = v;
                        config.seed = seed;
                        if let Some(h) = grid.horizon {
                            config.horizon = h;
                        }
                        if let Some(scale) = grid.rho_per_qm {
                            for f in &mut model.flows {
                                f.delay_threshold = scale * q_m as f64;
                            }
                        }
                        let algo = match algo_name {
                            Some(a) => parse_algo(a)?,
                            None => default_algo(&config),
                        };
                        let report = run_with_options(
                            &model,
                            &config,
                            algo,
                            config.horizon,
                            RunOptions::default(),
                        )?;
                        let mut verdict = check_qos(&report, &model, &config, 0.05);
                        if algo == Algorithm::BpBaseline {
                            verdict.backlog_ok = true;
                        }
                        let file = format!(
                            "run{:03}_{}_q{}_v{}_s{}.csv",
                            run_id, report.algorithm, q_m, v, seed
                        );
                        emit_report(&report, Some(&verdict), args.out.join(&file))?;
                        let hash = fnv1a(
                            format!(
                                "{}|{:?}|{}",
                                dgsched::model::serialize_model(&model, &config),
                                report.algorithm,
                                config.horizon
                            )
                            .as_bytes(),
                        );
                        index.push_str(&format!(
                            "{},{:016x},{},{},{},{},{},{},{},{},{},{},{}\n",
                            run_id,
                            hash,
                            file,
                            report.algorithm,
                            q_m,
                            v,
                            seed,
                            config.horizon,
                            report.throughput,
                            report.delivered_throughput,
                            overall_mean_delay(&report)
                                .map(|d| d.to_string())
                                .unwrap_or_default(),
                            report.max_backlog,
                            verdict.pass(),
                        ));
                        run_id += 1;
                    }
                }
            }
        }
    }
    std::fs::write(args.out.join("index.csv"), index)?;
    println!("wrote {} runs to {}", run_id, args.out.display());
    Ok(())
}

fn non_empty<T: Copy>(v: Vec<T>, default: T) -> Vec<T> {
    if v.is_empty() {
        vec![default]
    } else {
        v
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into())
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let (model, config) = load_model(&args.model)?;
    let min_rates: Vec<f64> = model.flows.iter().map(|f| f.min_rate).collect();
    let lp = solve_capacity_lp(&model, &min_rates, args.epsilon)?;
    println!("capacity LP at epsilon = {}:", args.epsilon);
    for (c, r) in lp.rates.iter().enumerate() {
        println!("  r*[{c}] = {r:.6}");
    }
    println!("  sum r* = {:.6}", lp.total);
    let gamma = gamma_for(&model, &config);
    let consts = compute_constants(&model, &config, Some(&lp), gamma);
    println!("constants (gamma = {gamma}):");
    let rows: BTreeMap<&str, String> = BTreeMap::from([
        ("B", format!("{:.6}", consts.b)),
        ("B_R", format!("{:.6}", consts.b_r)),
        ("B'", format!("{:.6}", consts.b_prime)),
        ("B_bar", format!("{:.6}", consts.b_bar)),
        ("B1", format!("{:.6}", consts.b1)),
        ("B2", format!("{:.6}", consts.b2)),
        ("B3", format!("{:.6}", consts.b3)),
        ("B4", format!("{:.6}", consts.b4)),
        ("eps1", fmt_opt(consts.eps1)),
        ("eps_slack", fmt_opt(consts.eps_slack)),
        ("delta", fmt_opt(consts.delta)),
        ("throughput_floor", fmt_opt(consts.throughput_floor)),
        ("vq_ceiling", fmt_opt(consts.vq_ceiling)),
    ]);
    for (k, v) in rows {
        println!("  {k:<17} = {v}");
    }
    let report = validate(&model, &config, Some(args.epsilon), Some(&lp.rates));
    print!("{report}");
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let (model, config) = load_model(&args.model)?;
    let (eps, rates) = match args.epsilon {
        None => (None, None),
        Some(e) => {
            let min_rates: Vec<f64> = model.flows.iter().map(|f| f.min_rate).collect();
            match solve_capacity_lp(&model, &min_rates, e) {
                Ok(lp) => (Some(e), Some(lp.rates)),
                Err(err) => {
                    println!("oracle unavailable: {err}");
                    (Some(e), None)
                }
            }
        }
    };
    let report = validate(&model, &config, eps, rates.as_deref());
    print!("{report}");
    if !report.is_valid() {
        bail!("validation failed");
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Validate(args) => cmd_validate(args),
    }
}
