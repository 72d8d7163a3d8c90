use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use omffm_cli::commands::{self, RunArgs};
use omffm_cli::{write_atomic, CliError, CliResult, Solver};

/// Exit codes: 0 ok, 2 unknown problem, 3 configuration error, 4 data error,
/// 5 internal error. Set OMFFM_LOG to error, warn, info or debug for logging.
#[derive(Parser)]
#[command(name = "omffm", version, about = "Multi-objective filled function solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one registered problem
    Run {
        #[arg(long)]
        problem: String,
        /// Solver configuration (flat JSON, unknown keys rejected)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "omffm")]
        solver: Solver,
    },
    /// Run a benchmark campaign and write metrics.json plus profile_<metric>.csv
    ///
    /// Purity and hypervolume are maximized, so their profiles use the cost
    /// 1/(value + 1e-12).
    Bench {
        /// Campaign JSON: {problems, solver, config, repeats, output_dir}
        campaign: PathBuf,
        /// Worker threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        repeats: Option<usize>,
        /// Overrides the campaign's base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the campaign's output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score front CSV files against each other
    Metrics {
        #[arg(required = true)]
        fronts: Vec<PathBuf>,
        /// Reference front CSV; defaults to the non-dominated union of the inputs
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Hypervolume reference point, comma separated
        #[arg(long)]
        hv_ref: Option<String>,
        /// Write the reports here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild profile CSVs from a campaign's metrics.json
    Profile {
        metrics: PathBuf,
        /// Output directory; defaults to the directory of the metrics file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered problems
    ListProblems,
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Run { problem, config, seed, out, solver } => commands::cmd_run(&RunArgs {
            problem: &problem,
            config: config.as_deref(),
            seed,
            out: &out,
            solver,
        }),
        Command::Bench { campaign, jobs, repeats, seed, out } => {
            let dir = commands::cmd_bench(&campaign, jobs, repeats, seed, out.as_deref())?;
            println!("{}", dir.display());
            Ok(())
        }
        Command::Metrics { fronts, reference, hv_ref, out } => {
            let hv = hv_ref.as_deref().map(commands::parse_hv_ref).transpose()?;
            let reports = commands::cmd_metrics(&fronts, reference.as_deref(), hv.as_deref())?;
            let json = commands::metrics_json(&reports)?;
            match out {
                Some(p) => write_atomic(&p, json.as_bytes()),
                None => {
                    print!("{json}");
                    Ok(())
                }
            }
        }
        Command::Profile { metrics, out } => {
            let dir = out.unwrap_or_else(|| {
                metrics.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
            });
            commands::cmd_profile(&metrics, &dir)
        }
        Command::ListProblems => {
            print!("{}", commands::list_problems());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OMFFM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                // usage errors share the configuration code; 2 is reserved
                _ => ExitCode::from(3),
            };
        }
    };
    let result = std::panic::catch_unwind(|| dispatch(cli.command))
        .unwrap_or_else(|_| Err(CliError::Internal("unexpected panic".into())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("omffm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
