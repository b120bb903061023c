use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use modlab::harness::{
    run, DecoderKind, ExperimentKind, ExperimentSpec, DEFAULT_M, DEFAULT_TRIALS,
};
use modlab::multilevel::MultilevelConfig;
use modlab::{Error, Result};

/// Simulations and bounds for weight-3 parity modulation codes.
#[derive(Parser)]
#[command(name = "modlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo BER sweep; with --lambda, a frozen-bit sweep.
    Simulate(SimulateArgs),
    /// Tabulate the analytical BER bounds.
    Bounds(BoundsArgs),
    /// Minimum SNR of the multilevel scheme for each depth b.
    Capacity(CapacityArgs),
    /// Tabulate the offset-moment map on [0, 1].
    Fixedpoint(FixedpointArgs),
    /// Monte-Carlo run of the multilevel polar scheme.
    Multilevel(MultilevelArgs),
    /// Run an experiment described by a JSON spec file.
    Run(RunArgs),
}

#[derive(Args)]
struct Output {
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SnrGrid {
    /// SNR per information bit in dB, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    snr: Vec<f64>,
}

#[derive(Args)]
struct MonteCarlo {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// BP iterations (default: ceil(2 ln m / ln c) at each SNR).
    #[arg(long)]
    iters: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    #[command(flatten)]
    grid: SnrGrid,
    /// Fractions of frozen information bits, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    #[command(flatten)]
    mc: MonteCarlo,
    #[arg(long, value_enum, default_value_t = Decoder::Simplified)]
    decoder: Decoder,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Decoder {
    Simplified,
    Full,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    #[command(flatten)]
    grid: SnrGrid,
    /// Also tabulate the frozen-bit bound at these fractions.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CapacityArgs {
    /// Interleaving depths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    b: Vec<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FixedpointArgs {
    #[command(flatten)]
    grid: SnrGrid,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MultilevelArgs {
    /// JSON scheme configuration; replaces --snr, --b, --mu and --margin.
    #[arg(long, conflicts_with_all = ["snr", "b", "mu", "margin"])]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Vec<f64>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    mu: Option<usize>,
    /// Capacity back-off of every round's polar rate.
    #[arg(long)]
    margin: Option<f64>,
    /// Freeze the transmitted symbols instead of the decoded ones.
    #[arg(long)]
    genie: bool,
    #[command(flatten)]
    mc: MonteCarlo,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment spec.
    spec: PathBuf,
    /// Overrides the spec's output path.
    #[command(flatten)]
    output: Output,
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn apply_mc(spec: &mut ExperimentSpec, mc: MonteCarlo) {
    spec.trials = mc.trials;
    spec.seed = mc.seed;
    spec.iterations = mc.iters;
}

fn build(command: Command) -> Result<ExperimentSpec> {
    let spec = match command {
        Command::Simulate(a) => {
            let kind = if a.lambda.is_empty() {
                ExperimentKind::BerSweep
            } else {
                ExperimentKind::FrozenSweep
            };
            let mut spec = ExperimentSpec::new(kind);
            spec.m = a.m;
            spec.snr_db = a.grid.snr;
            spec.lambda = a.lambda;
            spec.decoder = match a.decoder {
                Decoder::Simplified => DecoderKind::Simplified,
                Decoder::Full => DecoderKind::Full,
            };
            apply_mc(&mut spec, a.mc);
            spec.output = a.output.out;
            spec
        }
        Command::Bounds(a) => {
            let mut spec = ExperimentSpec::new(ExperimentKind::BoundsTable);
            spec.m = a.m;
            spec.snr_db = a.grid.snr;
            spec.lambda = a.lambda;
            spec.output = a.output.out;
            spec
        }
        Command::Capacity(a) => {
            let mut spec = ExperimentSpec::new(ExperimentKind::CapacityTable);
            spec.b = a.b;
            spec.output = a.output.out;
            spec
        }
        Command::Fixedpoint(a) => {
            let mut spec = ExperimentSpec::new(ExperimentKind::FixedPointPlot);
            spec.snr_db = a.grid.snr;
            spec.output = a.output.out;
            spec
        }
        Command::Multilevel(a) => {
            let mut spec = ExperimentSpec::new(ExperimentKind::MultilevelRun);
            spec.snr_db = a.snr;
            let ml = &mut spec.multilevel;
            if let Some(path) = &a.config {
                let config: MultilevelConfig =
                    serde_json::from_str(&read(path)?).map_err(|e| Error::InvalidField {
                        path: "multilevel.config".into(),
                        reason: e.to_string(),
                    })?;
                ml.config = Some(config);
            }
            ml.b = a.b.unwrap_or(ml.b);
            ml.mu = a.mu.unwrap_or(ml.mu);
            ml.margin = a.margin.unwrap_or(ml.margin);
            ml.genie = a.genie;
            apply_mc(&mut spec, a.mc);
            spec.output = a.output.out;
            spec
        }
        Command::Run(a) => {
            let mut spec = ExperimentSpec::from_json(&read(&a.spec)?)?;
            if a.output.out.is_some() {
                spec.output = a.output.out;
            }
            spec
        }
    };
    Ok(spec)
}

fn execute(command: Command) -> Result<()> {
    let spec = build(command)?;
    let table = run(&spec)?;
    match &spec.output {
        Some(path) => table.write(path),
        None => std::io::stdout()
            .write_all(table.to_csv().as_bytes())
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("modlab: {e}");
            ExitCode::FAILURE
        }
    }
}
