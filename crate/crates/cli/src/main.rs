use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use capsketch::estimators::Mode;
use capsketch_cli::commands::{self, BenchArgs, BuildArgs, EstimateArgs};
use capsketch_cli::CliResult;

/// Sketches for capped, soft-capped and other concave frequency statistics.
#[derive(Parser)]
#[command(name = "capsketch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a sketch file from `key<TAB>value` lines.
    Build {
        /// Input file; stdin when absent or `-`.
        input: Option<PathBuf>,
        /// Statistic descriptor, e.g. `softcapT=5`, `capT=5`, `sqrt`.
        #[arg(long)]
        stat: String,
        #[arg(long, default_value = "point")]
        mode: Mode,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Replicas per element; derived from epsilon when absent.
        #[arg(long)]
        r: Option<u32>,
        /// Sketch size; `⌈ε^-2⌉ + 2` when absent.
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shard nonce. Sketches merge byte-exactly only when built with
        /// explicit shards (or one shard and consistent offsets).
        #[arg(long)]
        shard: Option<u64>,
        /// Index of the first input element within its shard.
        #[arg(long, default_value_t = 0)]
        offset: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Merge sketch files built with the same parameters.
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the estimate stored in a sketch file.
    Estimate {
        sketch: PathBuf,
        /// Statistic to query (fullrange sketches only).
        #[arg(long)]
        stat: Option<String>,
        /// Point query `t` (fullrange sketches only).
        #[arg(long)]
        t: Option<f64>,
    },
    /// Compute a statistic exactly.
    Exact {
        input: Option<PathBuf>,
        #[arg(long)]
        stat: String,
    },
    /// Soft-cap point experiments on Zipf data, as CSV.
    Bench {
        #[arg(long = "alpha", value_delimiter = ',', default_value = "1.1,1.2,1.5,2.0")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long = "T", value_delimiter = ',', default_value = "1,5,20,100,500")]
        caps: Vec<f64>,
        #[arg(long = "r", value_delimiter = ',', default_value = "1,10,100")]
        replicas: Vec<u32>,
        #[arg(long, default_value_t = 100)]
        k: u32,
        #[arg(long, default_value_t = 200)]
        reps: u32,
        /// Size of the Zipf key universe.
        #[arg(long, default_value_t = capsketch::oracle::ZIPF_KEYS)]
        keys: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    match cli.command {
        Command::Build { input, stat, mode, epsilon, r, k, seed, shard, offset, output } => {
            let args = BuildArgs { input, stat, mode, epsilon, r, k, seed, shard, offset, output };
            commands::cmd_build(&args, &mut out, &mut err)
        }
        Command::Merge { inputs, output } => commands::cmd_merge(&inputs, &output),
        Command::Estimate { sketch, stat, t } => {
            commands::cmd_estimate(&EstimateArgs { sketch, stat, t }, &mut out, &mut err)
        }
        Command::Exact { input, stat } => commands::cmd_exact(input.as_deref(), &stat, &mut out),
        Command::Bench { alphas, n, caps, replicas, k, reps, keys, seed, out: path } => {
            let args = BenchArgs { alphas, n, caps, replicas, k, reps, keys, seed, out: path };
            commands::cmd_bench(&args, &mut out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("capsketch: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
