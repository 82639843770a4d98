use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pseudoconvex::pipeline::{resolve_cache_dir, run_pipeline, GramCache, Pipeline, PipelineConfig};

/// Constructions and numerical checks for pseudoconvex domains.
#[derive(Parser)]
#[command(name = "pseudoconvex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the Cantor-bump function and check its schedule (claims 1-3).
    ConstructF(Common),
    /// Classify the boundary of the Hartogs domains on a grid (claims 4, 8).
    ClassifyBoundary(Common),
    /// Check the Levi disc expansion on seeded cases (claim 5).
    LeviProbe(Common),
    /// Kernel oracles and the slit-domain blow-up scan (claims 6, 7).
    BergmanScan(Common),
    /// Sup-regularized and greedy witnesses (claims 9, 10).
    Witness(Common),
    /// Every claim, with a consolidated report.
    VerifyAll(Common),
    /// Print the default configuration.
    DefaultConfig,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's output_dir, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gram cache directory (overrides PSCVX_CACHE_DIR and the config).
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn run(pipeline: Pipeline, args: Common) -> pseudoconvex::Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let cache = resolve_cache_dir(args.cache.as_deref(), &cfg).map(GramCache::new).transpose()?;
    let report = run_pipeline(&cfg, pipeline, Some(&out), cache.as_ref())?;
    print!("{}", report.to_text());
    println!("wrote {}", out.display());
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (pipeline, args) = match cli.command {
        Command::ConstructF(a) => (Pipeline::ConstructF, a),
        Command::ClassifyBoundary(a) => (Pipeline::ClassifyBoundary, a),
        Command::LeviProbe(a) => (Pipeline::LeviProbe, a),
        Command::BergmanScan(a) => (Pipeline::BergmanScan, a),
        Command::Witness(a) => (Pipeline::Witness, a),
        Command::VerifyAll(a) => (Pipeline::VerifyAll, a),
        Command::DefaultConfig => {
            return match PipelineConfig::default().to_json() {
                Ok(text) => {
                    println!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
    };
    match run(pipeline, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
