use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polycoprime_cli::{run, CliError, Experiment, ExperimentConfig, Format, Manifest};

#[derive(Parser, Debug)]
#[command(name = "polycoprime", version, about = "Coprimality density experiments for real polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report file; a `<out>.manifest.json` is written next to it. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "POLYCOPRIME_THREADS")]
    threads: Option<usize>,

    /// Largest working precision, in bits, for certified refinement.
    #[arg(long, global = true, env = "POLYCOPRIME_PRECISION_CEILING",
          default_value_t = polycoprime::constants::DEFAULT_PRECISION_CEILING)]
    precision_ceiling: u32,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    #[command(flatten)]
    Experiment(Experiment),
    /// Re-run the experiment recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn config(cli: Cli) -> Result<ExperimentConfig, CliError> {
    match cli.command {
        Command::Experiment(experiment) => Ok(ExperimentConfig {
            experiment,
            out: cli.out,
            format: cli.format,
            threads: cli.threads.unwrap_or_else(default_threads),
            precision_ceiling: cli.precision_ceiling,
            seed: cli.seed,
        }),
        Command::Replay { manifest } => {
            let mut config = Manifest::load(&manifest)?.config;
            if cli.out.is_some() {
                config.out = cli.out;
            }
            Ok(config)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = config(cli).and_then(|c| run(&c));
    match outcome {
        Ok(Some(text)) => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
