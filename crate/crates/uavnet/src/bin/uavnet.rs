use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uavnet::ledger::{parse_chain_export, verify_blocks};
use uavnet::sweep::{run_sweep, SweepSpec};
use uavnet::{load_config, run, ConfigError, MetricsReport, Scheme, SimConfig, SimError};

const EXIT_INVALID: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "uavnet",
    version,
    about = "Simulates node-to-node data delivery in a 5G cell over three schemes: \
             direct base-station relay, an open UAV relay fleet, and a UAV fleet \
             authenticated against a permissioned ledger."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its metrics as CSV.
    Run(RunArgs),
    /// Run a node-density sweep and write aggregated CSV files.
    Sweep(SweepArgs),
    /// Check the integrity of an exported chain file.
    VerifyChain(VerifyChainArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML); defaults to the built-in scenario.
    #[arg(long, env = "UAVNET_CONFIG")]
    config: Option<PathBuf>,
    /// Override the configured delivery scheme.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Override the configured node count.
    #[arg(long)]
    nodes: Option<u32>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Repeat the run over consecutive seeds, one CSV row per seed.
    #[arg(long, default_value_t = 1)]
    replicate: u32,
    /// Directory for chain exports (ledger scheme only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario file (TOML); defaults to the built-in scenario.
    #[arg(long, env = "UAVNET_CONFIG")]
    config: Option<PathBuf>,
    /// Sweep a single scheme instead of all three.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Node counts, comma-separated and strictly increasing.
    #[arg(long, default_value = "10,20,30,40,50,60,70,80,90,100")]
    nodes: String,
    /// First seed of the replicate block.
    #[arg(long)]
    seed: Option<u64>,
    /// Seeds per grid point.
    #[arg(long, default_value_t = 5)]
    replicate: u32,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct VerifyChainArgs {
    /// Chain export (JSONL, one block per line).
    file: PathBuf,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run_command(args),
        Command::Sweep(args) => sweep_command(args),
        Command::VerifyChain(args) => verify_chain_command(args),
    }
    .unwrap_or_else(|e| {
        eprintln!("error: {}", e.message);
        ExitCode::from(e.code)
    })
}

struct CliError {
    code: u8,
    message: String,
}

fn invalid(message: impl ToString) -> CliError {
    CliError { code: EXIT_INVALID, message: message.to_string() }
}

fn io_error(message: impl ToString) -> CliError {
    CliError { code: EXIT_IO, message: message.to_string() }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> CliError {
        let code = match e {
            ConfigError::Parse(_) => EXIT_IO,
            _ => EXIT_INVALID,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> CliError {
        match e {
            SimError::Config(c) => c.into(),
            SimError::Ledger(l) => invalid(l),
        }
    }
}

fn load_base_config(path: &Option<PathBuf>) -> Result<SimConfig, CliError> {
    match path {
        None => Ok(SimConfig::default_config()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| io_error(format!("cannot read {}: {e}", path.display())))?;
            Ok(load_config(&text)?)
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| io_error(format!("cannot write {}: {e}", path.display())))
}

fn run_command(args: RunArgs) -> Result<ExitCode, CliError> {
    if args.replicate == 0 {
        return Err(invalid("--replicate must be at least 1"));
    }
    let mut config = load_base_config(&args.config)?;
    if let Some(scheme) = args.scheme {
        config.scenario.scheme = scheme;
    }
    if let Some(nodes) = args.nodes {
        config.scenario.n_nodes = nodes;
    }
    if let Some(seed) = args.seed {
        config.scenario.seed = seed;
    }
    config.validate()?;

    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)
            .map_err(|e| io_error(format!("cannot create {}: {e}", out.display())))?;
    }

    println!("{}", MetricsReport::csv_header());
    let first_seed = config.scenario.seed;
    for r in 0..args.replicate {
        config.scenario.seed = first_seed + u64::from(r);
        let output = run(&config)?;
        println!("{}", output.report.csv_row());
        // Replicated runs overwrite, leaving the last seed's chains.
        if let Some(out) = &args.out {
            if let Some(chain) = &output.public_chain {
                write_file(out, "public_chain.jsonl", &chain.export_jsonl())?;
            }
            if let Some(chain) = &output.private_chain {
                write_file(out, "private_chain.jsonl", &chain.export_jsonl())?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_node_counts(text: &str) -> Result<Vec<u32>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| invalid(format!("--nodes: {:?} is not a node count", part.trim())))
        })
        .collect()
}

fn sweep_command(args: SweepArgs) -> Result<ExitCode, CliError> {
    if args.replicate == 0 {
        return Err(invalid("--replicate must be at least 1"));
    }
    let mut base_config = load_base_config(&args.config)?;
    if let Some(seed) = args.seed {
        base_config.scenario.seed = seed;
    }
    let first_seed = base_config.scenario.seed;
    let spec = SweepSpec {
        node_counts: parse_node_counts(&args.nodes)?,
        schemes: match args.scheme {
            Some(s) => vec![s],
            None => Scheme::ALL.to_vec(),
        },
        seeds: (0..args.replicate).map(|i| first_seed + u64::from(i)).collect(),
        base_config,
    };
    let workers = args.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });

    let result = run_sweep(&spec, workers)?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| io_error(format!("cannot create {}: {e}", args.out.display())))?;
    write_file(&args.out, "sweep.csv", &result.runs_csv())?;
    write_file(&args.out, "success_rate_series.csv", &result.success_rate_series_csv())?;
    write_file(&args.out, "total_messages_series.csv", &result.total_messages_series_csv())?;

    println!(
        "swept {} grid points x {} seeds into {}",
        spec.schemes.len() * spec.node_counts.len(),
        spec.seeds.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn verify_chain_command(args: VerifyChainArgs) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| io_error(format!("cannot read {}: {e}", args.file.display())))?;
    let blocks = parse_chain_export(&text)
        .map_err(|e| io_error(format!("{}: {e}", args.file.display())))?;
    match verify_blocks(&blocks) {
        Ok(()) => {
            println!("{}: ok ({} blocks)", args.file.display(), blocks.len());
            Ok(ExitCode::SUCCESS)
        }
        Err(failure) => {
            eprintln!(
                "{}: verification failed at block {}: {}",
                args.file.display(),
                failure.index,
                failure.reason
            );
            Ok(ExitCode::from(EXIT_VERIFY))
        }
    }
}
