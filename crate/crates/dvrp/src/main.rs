use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use dvrp::bench::{self, ExperimentSpec};
use dvrp::io;
use dvrp::sim::{Algorithm, StrategyConfig};
use dvrp::suite;

#[derive(Parser)]
#[command(name = "dvrp", about = "Dynamic vehicle-routing solver and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated day simulations and write a results CSV.
    Run(RunArgs),
    /// Summarize a results CSV as a min/avg table with reference columns.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Fit mean wall time against instance size (m^2 ln m least squares).
    Scaling {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write the built-in benchmark instances to a directory.
    GenSuite {
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
    /// Convert a classic static CVRP file plus an arrival-times file into the
    /// canonical dynamic format.
    Convert {
        /// Static instance in the classic node-coordinate format.
        tsplib: PathBuf,
        /// One "id arrival" pair per line.
        times: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Instance files; repeat the flag or list several paths.
    #[arg(long = "instance", required = true, num_args = 1..)]
    instances: Vec<PathBuf>,
    /// Strategy. Repeat to build a grid.
    #[arg(long = "algo", value_parser = parse_algo, required = true, num_args = 1..)]
    algos: Vec<Algorithm>,
    /// Time slices per day; strategy default when omitted.
    #[arg(long)]
    slices: Option<usize>,
    /// Parallel portfolio workers per slice.
    #[arg(long)]
    workers: Option<usize>,
    /// Swarm size for the swarm strategies.
    #[arg(long)]
    swarm: Option<usize>,
    /// Swarm iterations per slice.
    #[arg(long)]
    iters: Option<usize>,
    /// Cut-off fraction of the working day.
    #[arg(long, default_value_t = 0.5)]
    cutoff: f64,
    /// Repetitions per (instance, strategy); seeds are seed, seed+1, ...
    #[arg(long, default_value_t = 30)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Advisory seconds-per-slice budget; overruns warn on stderr.
    #[arg(long)]
    slice_deadline: Option<f64>,
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn build_configs(args: &RunArgs) -> Vec<StrategyConfig> {
    args.algos
        .iter()
        .map(|&algo| {
            let mut cfg = StrategyConfig::for_algorithm(algo);
            if let Some(s) = args.slices {
                cfg.time_slices = s;
            }
            if let Some(w) = args.workers {
                cfg.workers = w;
            }
            if let Some(s) = args.swarm {
                cfg.pso.swarm_size = s;
            }
            if let Some(i) = args.iters {
                cfg.pso.iterations = i;
            }
            cfg.t_co = args.cutoff;
            cfg
        })
        .collect()
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let spec = ExperimentSpec {
                instances: args.instances.clone(),
                configs: build_configs(&args),
                repetitions: args.reps,
                base_seed: args.seed,
                output: Some(args.out.clone()),
                slice_deadline: args.slice_deadline,
            };
            let rows = bench::run_experiment(&spec)?;
            print!("{}", bench::report(&rows));
            eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
        }
        Command::Report { input } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let rows = bench::parse_csv(&text)?;
            print!("{}", bench::report(&rows));
        }
        Command::Scaling { input } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let rows = bench::parse_csv(&text)?;
            let fit = bench::fit_scaling(&rows)?;
            println!(
                "wall_time_s ~ {:.3e} * m^2 ln(m) + {:.3e}   (R^2 = {:.4}, {} sizes)",
                fit.slope, fit.intercept, fit.r_squared, fit.sizes
            );
        }
        Command::GenSuite { out } => {
            let paths = suite::write_all(&out)?;
            eprintln!("wrote {} instances to {}", paths.len(), out.display());
        }
        Command::Convert { tsplib, times, out } => {
            let t = std::fs::read_to_string(&tsplib)
                .with_context(|| format!("reading {}", tsplib.display()))?;
            let a = std::fs::read_to_string(&times)
                .with_context(|| format!("reading {}", times.display()))?;
            let raw = io::convert_tsplib(&t, &a)?;
            std::fs::write(&out, io::serialize_instance(&raw))
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote {}", out.display());
        }
    }
    Ok(())
}
