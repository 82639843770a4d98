//! Versioned JSON configuration. Reals are 17-significant-digit strings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real17;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_240_611;
const MAX_SAMPLES: usize = 100_000_000;
/// Deepest tree the Hartogs domain builder accepts.
pub const MAX_CONFIG_DEPTH: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Construction {
    #[serde(with = "real17")]
    pub eps: f64,
    #[serde(with = "real17")]
    pub c1: f64,
    #[serde(with = "real17")]
    pub c2: f64,
    #[serde(with = "real17")]
    pub r0: f64,
    #[serde(with = "real17")]
    pub smoothing: f64,
    pub depth: usize,
    /// Rows of the `construct-f` profile table.
    pub profile_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub plateau_points: usize,
    pub holder_pairs: usize,
    pub grid: usize,
    #[serde(with = "real17")]
    pub classify_tol: f64,
    pub levi_cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bergman {
    pub samples: usize,
    pub disc_degree: u32,
    pub product_degree: (u32, u32),
    pub slit_degree: (u32, u32),
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    pub boundary_points: usize,
    pub domain_samples: usize,
    pub probes: usize,
    pub levels: usize,
    pub convexity_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub construction: Construction,
    pub sampling: Sampling,
    pub bergman: Bergman,
    pub witness: Witness,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub cache_dir: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: DEFAULT_SEED,
            construction: Construction {
                eps: 0.5,
                c1: 1.0,
                c2: 1.0,
                r0: 0.3,
                smoothing: 0.01,
                depth: 10,
                profile_points: 2001,
            },
            sampling: Sampling {
                plateau_points: 1000,
                holder_pairs: 100_000,
                grid: 512,
                classify_tol: 1e-6,
                levi_cases: 20,
            },
            bergman: Bergman {
                samples: 100_000,
                disc_degree: 8,
                product_degree: (8, 8),
                slit_degree: (10, 6),
                steps: 8,
            },
            witness: Witness {
                boundary_points: 16,
                domain_samples: 100_000,
                probes: 1000,
                levels: 5,
                convexity_pairs: 10_000,
            },
            output_dir: None,
            cache_dir: None,
        }
    }
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(what.to_string()))
    }
}

fn finite_in(x: f64, lo: f64, hi: f64) -> bool {
    x.is_finite() && lo < x && x < hi
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.schema_version == CONFIG_SCHEMA_VERSION, "unsupported schema_version")?;
        let c = &self.construction;
        check(finite_in(c.eps, 0.0, 1.0), "eps must lie in (0, 1)")?;
        check(finite_in(c.c1, 0.0, 1e6), "c1 must lie in (0, 1e6)")?;
        check(finite_in(c.c2, 0.0, 1e6), "c2 must lie in (0, 1e6)")?;
        check(finite_in(c.r0, 0.0, 1.0 / 3.0), "r0 must lie in (0, 1/3)")?;
        check(finite_in(c.smoothing, 0.0, c.r0 / 4.0), "smoothing must lie in (0, r0/4)")?;
        check((1..=MAX_CONFIG_DEPTH).contains(&c.depth), "depth must lie in 1..=12")?;
        check((2..=1_000_000).contains(&c.profile_points), "profile_points must lie in 2..=1e6")?;
        let s = &self.sampling;
        check((1..=MAX_SAMPLES).contains(&s.plateau_points), "plateau_points out of range")?;
        check((2..=MAX_SAMPLES).contains(&s.holder_pairs), "holder_pairs out of range")?;
        check((8..=4096).contains(&s.grid), "grid must lie in 8..=4096")?;
        check(finite_in(s.classify_tol, 0.0, 1.0), "classify_tol must lie in (0, 1)")?;
        check((1..=10_000).contains(&s.levi_cases), "levi_cases out of range")?;
        let b = &self.bergman;
        check((1000..=MAX_SAMPLES).contains(&b.samples), "bergman samples must lie in 1e3..=1e8")?;
        check(b.disc_degree <= 64, "disc_degree at most 64")?;
        check(b.product_degree.0 <= 32 && b.product_degree.1 <= 32, "product_degree at most 32")?;
        check(b.slit_degree.0 <= 32 && b.slit_degree.1 <= 32, "slit_degree at most 32")?;
        check((3..=40).contains(&b.steps), "steps must lie in 3..=40")?;
        let w = &self.witness;
        check((1..=64).contains(&w.boundary_points), "boundary_points must lie in 1..=64")?;
        check((1000..=MAX_SAMPLES).contains(&w.domain_samples), "domain_samples out of range")?;
        check((1..=1_000_000).contains(&w.probes), "probes out of range")?;
        check((1..=10).contains(&w.levels), "levels must lie in 1..=10")?;
        check((1..=MAX_SAMPLES).contains(&w.convexity_pairs), "convexity_pairs out of range")?;
        Ok(())
    }
}
