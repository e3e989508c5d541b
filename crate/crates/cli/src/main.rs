use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spinguide_cli::{run_file, Experiment, Overrides, DEFAULT_OUT_DIR, OUT_DIR_ENV};

/// Guided magnon transport experiments on a Heisenberg spin chain.
#[derive(Debug, Parser)]
#[command(name = "spinguide", version)]
struct Args {
    experiment: Experiment,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the `seed` key of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the `jobs` key.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let out = args.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let overrides = Overrides {
        seed: args.seed,
        jobs: args.jobs,
    };
    match run_file(args.experiment, &args.config, &out, overrides) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            println!("wrote {}", outcome.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spinguide: {e}");
            e.exit_code()
        }
    }
}
