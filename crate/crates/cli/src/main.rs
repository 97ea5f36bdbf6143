use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qfeo_cli::{report, run, study, synth, CliError, CliResult, ConfigSource};

#[derive(Parser)]
#[command(name = "qfeo", version, about = "Quantum feature-encoding optimization experiments")]
struct Cli {
    /// Worker threads for projection, folds, grid points and batches (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file, or a manifest written by a previous run.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a shipped config instead of --config.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the master seed of the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn source(&self) -> CliResult<ConfigSource> {
        match (&self.config, &self.preset) {
            (Some(p), _) => Ok(ConfigSource::File(p.clone())),
            (None, Some(n)) => Ok(ConfigSource::Preset(n.clone())),
            (None, None) => Err(CliError::Config("give --config or --preset".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured experiment and write results under --out.
    Run(Common),
    /// Singular-value expressibility study of one feature map.
    Expressibility(Common),
    /// Aggregate a finished run directory into percent-change and importance tables.
    Report {
        /// Directory written by `qfeo run`.
        results: PathBuf,
        /// Defaults to RESULTS/report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic planted-signal dataset.
    Synth(Common),
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Run(c) => {
            let outcome = run::cmd_run(&c.source()?, &c.out, c.seed)?;
            println!(
                "{} jobs finished; summary at {}",
                outcome.results.len(),
                outcome.out_dir.join("summary.csv").display()
            );
        }
        Command::Expressibility(c) => {
            let outcome = study::cmd_expressibility(&c.source()?, &c.out, c.seed)?;
            println!("curves written to {}", outcome.out_dir.display());
        }
        Command::Report { results, out } => {
            let outcome = report::cmd_report(&results, out.as_deref())?;
            println!("report written to {}", outcome.out_dir.display());
        }
        Command::Synth(c) => {
            let path = synth::cmd_synth(&c.source()?, &c.out, c.seed)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QFEO_LOG", "warn")).init();
    let cli = Cli::parse();
    if cli.workers > 0 && !qfeo_core::par::is_parallel() {
        log::warn!("built without the parallel feature; --workers is ignored");
    }
    let command = cli.command;
    match qfeo_core::par::with_workers(cli.workers, move || dispatch(command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
