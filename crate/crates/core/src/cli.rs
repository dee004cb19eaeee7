//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors and unreadable or malformed
//! input, 2 for domain errors (enumeration or oracle caps, infeasible
//! decompositions). Data goes to standard output or `--output`, diagnostics
//! to standard error.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::assign::solve_exact_detailed;
use crate::harness::{
    compare_params, compare_randomized, default_pi_grid, reserve_sweep, welfare_gain_experiment, write_csv,
    CompareConfig, ExperimentRecord, ReserveSweepConfig, WelfareGainConfig,
};
use crate::model::Instance;
use crate::oracle::brute_force_optimal;
use crate::randomized::{decompose, enumerate_allocations, fractional_vcg, realize};
use crate::simgen::{generate, GenParams};
use crate::vcg::{run_double_auction, run_reserve_auction, ReservePrices};

#[derive(Debug, Parser)]
#[command(name = "mcs-auction", version, about = "Data-reuse task assignment and auctions for mobile crowd sensing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Welfare-optimal assignment.
    Solve {
        #[command(flatten)]
        source: Source,
        /// Also run the brute-force oracle and report its welfare.
        #[arg(long)]
        check_oracle: bool,
        #[command(flatten)]
        out: Output,
    },
    /// VCG double auction with truthful bids taken from the instance.
    Auction {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: Output,
    },
    /// Double auction with per-item reserve prices.
    ReserveAuction {
        #[command(flatten)]
        source: Source,
        /// Uniform reserve price on every item.
        #[arg(long, conflicts_with = "reserve")]
        pi: Option<f64>,
        /// Comma-separated reserve price per item.
        #[arg(long, value_delimiter = ',')]
        reserve: Option<Vec<f64>>,
        #[command(flatten)]
        out: Output,
    },
    /// Randomized baseline: fractional VCG, decomposition and one draw.
    Randomized {
        #[command(flatten)]
        source: Source,
        /// Seed for the lottery draw.
        #[arg(long, default_value_t = 0)]
        draw_seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Welfare with and without data reuse over seeded instances.
    WelfareGain(Experiment),
    /// Uniform reserve prices against welfare and platform budget.
    ReserveSweep {
        #[command(flatten)]
        exp: Experiment,
        /// Comma-separated ascending prices.
        #[arg(long, value_delimiter = ',')]
        pi_grid: Option<Vec<f64>>,
    },
    /// Exact double auction against the randomized baseline on small instances.
    CompareRandomized(Experiment),
}

/// Generator parameters. Unset values fall back to per-command defaults.
#[derive(Debug, Args, Clone, Default)]
struct GenArgs {
    /// Instance seed, or the base seed of an experiment.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of data items. `welfare-gain` takes a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Number of users [default: 8, or 3 for compare-randomized].
    #[arg(long)]
    users: Option<usize>,
    /// Number of tasks [default: 8, or 3 for compare-randomized].
    #[arg(long)]
    tasks: Option<usize>,
    /// Items each task requires [default: 5, or 2 for compare-randomized].
    #[arg(long)]
    items_per_task: Option<usize>,
    /// Side of the square area in km [default: 10].
    #[arg(long)]
    area_km: Option<f64>,
    /// Sensing radius in km [default: 5].
    #[arg(long)]
    radius_km: Option<f64>,
}

impl GenArgs {
    fn params(&self, base: GenParams) -> GenParams {
        GenParams {
            num_users: self.users.unwrap_or(base.num_users),
            num_tasks: self.tasks.unwrap_or(base.num_tasks),
            items_per_task: self.items_per_task.unwrap_or(base.items_per_task),
            area_km: self.area_km.unwrap_or(base.area_km),
            sense_radius_km: self.radius_km.unwrap_or(base.sense_radius_km),
            num_items: self.k.first().copied().unwrap_or(base.num_items),
            seed: self.seed,
            ..base
        }
    }
}

#[derive(Debug, Args)]
struct Source {
    /// Instance JSON file. Without it an instance is generated from the generator flags.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
}

#[derive(Debug, Args, Clone, Default)]
struct Output {
    /// Write data here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum Format {
    /// Summary statistics.
    Json,
    /// One row per trial.
    #[default]
    Csv,
}

#[derive(Debug, Args)]
struct Experiment {
    #[command(flatten)]
    gen: GenArgs,
    #[command(flatten)]
    out: Output,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Worker threads; 0 uses every logical core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write the JSON summary to this file.
    #[arg(long)]
    summary: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Domain(String),
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn domain(e: impl Display) -> Failure {
    Failure::Domain(e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            let rendered = e.render().to_string();
            return if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                let _ = stdout.write_all(rendered.as_bytes());
                0
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
                1
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

fn load(source: &Source) -> Result<Instance, Failure> {
    match &source.input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Instance::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        None => {
            if source.gen.k.len() > 1 {
                return Err(usage("--k takes a single value here"));
            }
            generate(&source.gen.params(GenParams::default())).map_err(usage)
        }
    }
}

fn emit(out: &Output, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    match &out.output {
        Some(path) => fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => stdout.write_all(bytes).map_err(usage),
    }
}

fn emit_json(out: &Output, stdout: &mut dyn Write, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(usage)?;
    text.push('\n');
    emit(out, stdout, text.as_bytes())
}

fn emit_experiment<S: Serialize>(
    exp: &Experiment,
    stdout: &mut dyn Write,
    records: &[ExperimentRecord],
    summary: &S,
) -> Result<(), Failure> {
    let value = serde_json::to_value(summary).map_err(usage)?;
    if let Some(path) = &exp.summary {
        let text = serde_json::to_string_pretty(&value).map_err(usage)? + "\n";
        fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    match exp.format {
        Format::Json => emit_json(&exp.out, stdout, &value),
        Format::Csv => {
            let mut bytes = Vec::new();
            write_csv(&mut bytes, records).map_err(usage)?;
            emit(&exp.out, stdout, &bytes)
        }
    }
}

fn pairs_json(x: &[Vec<bool>]) -> Value {
    let pairs: Vec<[usize; 2]> =
        x.iter().enumerate().flat_map(|(i, row)| row.iter().enumerate().filter(|e| *e.1).map(move |(k, _)| [i, k])).collect();
    json!(pairs)
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Gen { gen, out } => {
            if gen.k.len() > 1 {
                return Err(usage("--k takes a single value here"));
            }
            let inst = generate(&gen.params(GenParams::default())).map_err(usage)?;
            emit(&out, stdout, (inst.to_json() + "\n").as_bytes())
        }
        Command::Solve { source, check_oracle, out } => {
            let inst = load(&source)?;
            let sol = solve_exact_detailed(&inst);
            let mut value = json!({
                "welfare": sol.welfare,
                "root_bound": sol.root_bound,
                "nodes": sol.nodes,
                "x": pairs_json(&sol.assignment.x),
                "z": sol.assignment.z,
            });
            if check_oracle {
                let oracle = brute_force_optimal(&inst).map_err(domain)?;
                value["oracle_welfare"] = json!(oracle.welfare);
            }
            emit_json(&out, stdout, &value)
        }
        Command::Auction { source, out } => {
            let inst = load(&source)?;
            emit_json(&out, stdout, &run_double_auction(&inst).to_json_value())
        }
        Command::ReserveAuction { source, pi, reserve, out } => {
            let inst = load(&source)?;
            let prices = match (pi, reserve) {
                (Some(pi), None) => ReservePrices::uniform(inst.num_items(), pi),
                (None, Some(per_item)) => ReservePrices::new(per_item),
                _ => return Err(usage("give either --pi or --reserve")),
            }
            .map_err(usage)?;
            let outcome = run_reserve_auction(&inst, &prices).map_err(usage)?;
            let mut value = outcome.to_json_value();
            value["participants"] = json!(outcome.participants);
            emit_json(&out, stdout, &value)
        }
        Command::Randomized { source, draw_seed, out } => {
            let inst = load(&source)?;
            let allocations = enumerate_allocations(&inst).map_err(domain)?;
            let frac = fractional_vcg(&inst);
            let dec = decompose(&inst, &frac, &allocations).map_err(domain)?;
            let draw = realize(&inst, &dec, &frac, draw_seed);
            let chosen = &dec.support[draw.index];
            let value = json!({
                "fractional": {
                    "objective": frac.objective(),
                    "user_payments": frac.user_payments,
                    "task_charges": frac.task_charges,
                },
                "decomposition": dec.to_json_value(),
                "expected_welfare": dec.expected_welfare(&frac),
                "realization": {
                    "index": draw.index,
                    "x": pairs_json(&chosen.x),
                    "z": chosen.z,
                    "user_payments": draw.user_payments,
                    "task_charges": draw.task_charges,
                },
            });
            emit_json(&out, stdout, &value)
        }
        Command::WelfareGain(exp) => {
            let defaults = WelfareGainConfig::default();
            let cfg = WelfareGainConfig {
                params: exp.gen.params(defaults.params),
                k_list: if exp.gen.k.is_empty() { defaults.k_list } else { exp.gen.k.clone() },
                trials: exp.trials,
                base_seed: exp.gen.seed,
                jobs: exp.jobs,
            };
            let report = welfare_gain_experiment(&cfg).map_err(usage)?;
            emit_experiment(&exp, stdout, &report.records, &json!({ "per_k": report.summary }))
        }
        Command::ReserveSweep { exp, pi_grid } => {
            if exp.gen.k.len() > 1 {
                return Err(usage("--k takes a single value here"));
            }
            let defaults = ReserveSweepConfig::default();
            let cfg = ReserveSweepConfig {
                k: exp.gen.k.first().copied().unwrap_or(defaults.k),
                params: exp.gen.params(defaults.params),
                pi_grid: pi_grid.unwrap_or_else(default_pi_grid),
                trials: exp.trials,
                base_seed: exp.gen.seed,
                jobs: exp.jobs,
            };
            let report = reserve_sweep(&cfg).map_err(usage)?;
            let summary = json!({ "per_pi": report.summary, "balancing_pi": report.balancing_pi });
            emit_experiment(&exp, stdout, &report.records, &summary)
        }
        Command::CompareRandomized(exp) => {
            if exp.gen.k.len() > 1 {
                return Err(usage("--k takes a single value here"));
            }
            let cfg = CompareConfig {
                params: exp.gen.params(compare_params()),
                trials: exp.trials,
                base_seed: exp.gen.seed,
                jobs: exp.jobs,
            };
            let report = compare_randomized(&cfg).map_err(usage)?;
            emit_experiment(&exp, stdout, &report.records, &report.summary)
        }
    }
}
