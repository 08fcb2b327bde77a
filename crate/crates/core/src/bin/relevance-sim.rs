use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use relevance_sim::harness::{
    emit_csv, emit_gnuplot, parse_config, run_sweep, run_sweep_with_threads, ResultTable,
};
use relevance_sim::oracle::run_oracle_suite;
use relevance_sim::{Error, ExperimentSpec, Preset};

const THREADS_ENV: &str = "RELEVANCE_SIM_THREADS";

#[derive(Parser)]
#[command(name = "relevance-sim", version, about = "Relevance-aware V2X message selection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated sweep and write the result table as CSV.
    Run(RunArgs),
    /// Parse and validate a configuration file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the ideal selector against exhaustive search on random instances.
    Oracle {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<u32>,
    #[arg(long)]
    slots: Option<usize>,
    /// Also write a whitespace-separated `.dat` file for gnuplot.
    #[arg(long)]
    gnuplot: bool,
}

enum Failure {
    Usage(String),
    Config(Error),
    Runtime(Error),
    Oracle(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Runtime(_) => 1,
            Failure::Config(_) => 2,
            Failure::Oracle(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Oracle(m) => f.write_str(m),
            Failure::Config(e) | Failure::Runtime(e) => write!(f, "{e}"),
        }
    }
}

fn read_config(path: &Path) -> Result<ExperimentSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|source| {
        Failure::Config(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })?;
    parse_config(&text).map_err(Failure::Config)
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let (mut spec, name) = match (&args.preset, &args.config) {
        (Some(p), _) => {
            let preset = Preset::parse(p).map_err(|e| Failure::Usage(e.to_string()))?;
            (preset.spec(), preset.name().to_string())
        }
        (None, Some(path)) => {
            let spec = read_config(path)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "results".into());
            (spec, name)
        }
        (None, None) => return Err(Failure::Usage("either --preset or --config is required".into())),
    };
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(r) = args.replications {
        spec.replications = r;
    }
    if let Some(s) = args.slots {
        spec.slots_per_episode = s;
    }
    spec.validate().map_err(Failure::Config)?;

    let csv_path = match &spec.output_path {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => args.out.join(p),
        None => args.out.join(format!("{name}.csv")),
    };

    info!(
        "running {} scheme(s) x {} budget(s) x {} replication(s), {} slots each",
        spec.schemes.len(),
        spec.gammas.len(),
        spec.replications,
        spec.slots_per_episode
    );
    let table: ResultTable = match thread_cap()? {
        Some(n) => run_sweep_with_threads(&spec, n),
        None => run_sweep(&spec),
    }
    .map_err(Failure::Runtime)?;

    emit_csv(&table, &csv_path).map_err(Failure::Runtime)?;
    info!("wrote {}", csv_path.display());
    if args.gnuplot {
        let dat = csv_path.with_extension("dat");
        emit_gnuplot(&table, &dat).map_err(Failure::Runtime)?;
        info!("wrote {}", dat.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { config } => {
            read_config(&config)?;
            println!("{}: ok", config.display());
            Ok(())
        }
        Command::Oracle { instances, seed } => {
            let report = run_oracle_suite(instances, seed);
            println!(
                "oracle: {} instance(s), {} mismatch(es)",
                report.instances,
                report.mismatches.len()
            );
            if report.passed() {
                Ok(())
            } else {
                for m in report.mismatches.iter().take(5) {
                    eprintln!("{m:?}");
                }
                Err(Failure::Oracle("ideal selector disagrees with exhaustive search".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            error!("{f}");
            ExitCode::from(f.code())
        }
    }
}
