use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod run;

use config::RunConfig;
use run::{Context, Failure, Outputs};

type Runner = fn(&Context) -> Result<Outputs, Failure>;

#[derive(Parser, Debug)]
#[command(name = "toral", version, about = "Eigenfunction equidistribution experiments on flat 2-tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config; default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distinct Laplace eigenvalues up to `cutoff` with multiplicities.
    Spectrum(Common),
    /// Good-set scan up to `X = cutoff`.
    Goodset(Common),
    /// Galerkin eigenpairs with eigenvector dump.
    Solve(Common),
    /// Eigenpairs plus discrepancies for the configured observables.
    Equidist(Common),
    /// Weak-disorder and norm checks over an N- or L-sweep.
    Disorder(Common),
    /// Localization length lower bound.
    Locbound(Common),
}

fn load(common: &Common) -> Result<(Context, PathBuf), Failure> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Failure::Validation(format!("{}: {e}", common.config.display())))?;
    let mut config = RunConfig::parse(&text).map_err(Failure::Validation)?;
    if common.seed.is_some() {
        config.seed = common.seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let base_dir = common
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    Ok((Context::new(config, base_dir)?, out))
}

fn execute(cli: Cli) -> Result<(Outputs, PathBuf), Failure> {
    let (common, f): (&Common, Runner) = match &cli.command {
        Command::Spectrum(c) => (c, run::spectrum),
        Command::Goodset(c) => (c, run::goodset),
        Command::Solve(c) => (c, run::solve),
        Command::Equidist(c) => (c, run::equidist),
        Command::Disorder(c) => (c, run::disorder),
        Command::Locbound(c) => (c, run::locbound),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build_global()
        .map_err(|e| Failure::Other(e.into()))?;
    let (ctx, out) = load(common)?;
    Ok((f(&ctx)?, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(cli).and_then(|(outputs, dir)| {
        outputs.write(&dir).map_err(Failure::Other)?;
        for (name, _) in &outputs.files {
            println!("{}", dir.join(name).display());
        }
        match outputs.tolerance {
            Some(msg) => Err(Failure::Tolerance(msg)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Failure::Validation(_) => 2,
                Failure::Tolerance(_) => 3,
                Failure::Other(_) => 1,
            })
        }
    }
}
