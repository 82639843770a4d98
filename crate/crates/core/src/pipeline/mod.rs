//! Config-driven pipelines: run a set of claims, write their artifacts and a
//! consolidated report.

pub mod cache;
pub mod config;
pub mod criteria;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use cache::{CacheOutcome, GramCache, CACHE_ENV};
pub use config::PipelineConfig;
pub use criteria::{run_claim, Artifact, ClaimOutput, Context};
pub use report::{ClaimRecord, ClaimStatus, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    ConstructF,
    ClassifyBoundary,
    LeviProbe,
    BergmanScan,
    Witness,
    VerifyAll,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::ConstructF => "construct-f",
            Pipeline::ClassifyBoundary => "classify-boundary",
            Pipeline::LeviProbe => "levi-probe",
            Pipeline::BergmanScan => "bergman-scan",
            Pipeline::Witness => "witness",
            Pipeline::VerifyAll => "verify-all",
        }
    }

    pub fn claims(self) -> &'static [u32] {
        match self {
            Pipeline::ConstructF => &[1, 2, 3],
            Pipeline::ClassifyBoundary => &[4, 8],
            Pipeline::LeviProbe => &[5],
            Pipeline::BergmanScan => &[6, 7],
            Pipeline::Witness => &[9, 10],
            Pipeline::VerifyAll => &criteria::CLAIM_IDS,
        }
    }
}

/// SHA-256 of the config's canonical JSON, ignoring the output and cache paths.
pub fn config_hash(cfg: &PipelineConfig) -> Result<String> {
    let mut canonical = cfg.clone();
    canonical.output_dir = None;
    canonical.cache_dir = None;
    Ok(hex::encode(Sha256::digest(serde_json::to_string(&canonical)?.as_bytes())))
}

/// Cache directory: explicit flag, then the environment, then the config.
pub fn resolve_cache_dir(flag: Option<&Path>, cfg: &PipelineConfig) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.cache_dir.as_ref().map(PathBuf::from))
}

/// Assemble a report from claim outputs, in the order given.
pub fn assemble(pipeline: Pipeline, cfg: &PipelineConfig, outputs: &[ClaimOutput]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(pipeline.name(), cfg.seed, config_hash(cfg)?);
    report.claims = outputs.iter().map(|o| o.record.clone()).collect();
    Ok(report)
}

/// Write every artifact plus `report.json` and `report.txt` into `dir`.
pub fn write_outputs(dir: &Path, report: &VerificationReport, outputs: &[ClaimOutput]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for a in outputs.iter().flat_map(|o| &o.artifacts) {
        if a.name.contains(['/', '\\']) || a.name.starts_with('.') {
            return Err(Error::Config(format!("bad artifact name {}", a.name)));
        }
        fs::write(dir.join(&a.name), &a.contents)?;
    }
    fs::write(dir.join("report.json"), report.to_json()?)?;
    fs::write(dir.join("report.txt"), report.to_text())?;
    Ok(())
}

/// Run the claims of `pipeline`. Artifacts and the report are written to
/// `out` when given.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    pipeline: Pipeline,
    out: Option<&Path>,
    cache: Option<&GramCache>,
) -> Result<VerificationReport> {
    cfg.validate()?;
    let ctx = Context {
        config: cfg,
        cache,
        artifacts: out.is_some(),
    };
    let outputs: Vec<ClaimOutput> = pipeline
        .claims()
        .iter()
        .map(|&id| {
            log::info!("claim {id}");
            run_claim(&ctx, id)
        })
        .collect();
    let report = assemble(pipeline, cfg, &outputs)?;
    if let Some(dir) = out {
        write_outputs(dir, &report, &outputs)?;
    }
    Ok(report)
}
