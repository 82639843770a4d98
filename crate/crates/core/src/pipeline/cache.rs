//! On-disk cache of Monte Carlo Gram batches.
//!
//! Entries are keyed by the SHA-256 of every input that determines the
//! matrices (domain, basis, sampler, sample count, seed) and carry a hash of
//! their own payload. An entry whose payload hash does not match is reported
//! as corrupt and recomputed.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bergman::{self, BasisFamily, GramSystem};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::real17;
use crate::sampling::ImportanceSampler;

pub const CACHE_ENV: &str = "PSCVX_CACHE_DIR";
const CACHE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Miss,
    /// A corrupt entry was found, discarded and rebuilt.
    Recomputed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GramEntry {
    schema_version: u32,
    key: String,
    dim: usize,
    batches: Vec<Batch>,
    payload_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Batch {
    /// Column-major entries.
    #[serde(with = "real17::cvec")]
    entries: Vec<C>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn payload_hash(dim: usize, batches: &[Batch]) -> Result<String> {
    let text = serde_json::to_string(&(dim, batches))?;
    Ok(sha256_hex(text.as_bytes()))
}

/// Parse and verify one cache entry written under `key`.
pub fn decode_entry(text: &str, key: &str) -> Result<Vec<DMatrix<C>>> {
    let corrupt = || Error::CacheCorruption(key.to_string());
    let entry: GramEntry = serde_json::from_str(text).map_err(|_| corrupt())?;
    let sound = entry.schema_version == CACHE_SCHEMA_VERSION
        && entry.key == key
        && entry.dim <= bergman::MAX_BASIS
        && entry.batches.iter().all(|b| b.entries.len() == entry.dim * entry.dim)
        && payload_hash(entry.dim, &entry.batches)? == entry.payload_sha256;
    if !sound {
        return Err(corrupt());
    }
    Ok(entry
        .batches
        .into_iter()
        .map(|b| DMatrix::from_vec(entry.dim, entry.dim, b.entries))
        .collect())
}

#[derive(Debug, Clone)]
pub struct GramCache {
    dir: PathBuf,
}

impl GramCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(GramCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(domain: &dyn Domain, basis: &BasisFamily, sampler: &ImportanceSampler, samples: usize, seed: u64) -> String {
        let material = format!(
            "gram/v{CACHE_SCHEMA_VERSION}\n{}\n{}\n{}\n{samples}\n{seed}",
            domain.label(),
            basis.label(),
            sampler.label()
        );
        sha256_hex(material.as_bytes())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("gram-{key}.json"))
    }

    /// `Ok(None)` when absent, `CacheCorruption` when present but damaged.
    pub fn load(&self, key: &str) -> Result<Option<Vec<DMatrix<C>>>> {
        let path = self.path(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        decode_entry(&text, key)
            .map(Some)
            .map_err(|_| Error::CacheCorruption(path.display().to_string()))
    }

    pub fn store(&self, key: &str, grams: &[DMatrix<C>]) -> Result<()> {
        let dim = grams.first().map_or(0, |g| g.nrows());
        let batches: Vec<Batch> = grams
            .iter()
            .map(|g| Batch {
                entries: g.as_slice().to_vec(),
            })
            .collect();
        let entry = GramEntry {
            schema_version: CACHE_SCHEMA_VERSION,
            key: key.to_string(),
            dim,
            payload_sha256: payload_hash(dim, &batches)?,
            batches,
        };
        let path = self.path(key);
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_string(&entry)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// The Gram system for these inputs, read from the cache when possible.
    pub fn gram_system(
        &self,
        domain: Arc<dyn Domain>,
        basis: BasisFamily,
        sampler: &ImportanceSampler,
        samples: usize,
        seed: u64,
    ) -> Result<(GramSystem, CacheOutcome)> {
        let key = Self::key(domain.as_ref(), &basis, sampler, samples, seed);
        let outcome = match self.load(&key) {
            Ok(Some(grams)) => {
                if let Ok(sys) = GramSystem::from_batches(domain.clone(), basis.clone(), samples, seed, grams) {
                    return Ok((sys, CacheOutcome::Hit));
                }
                CacheOutcome::Recomputed
            }
            Ok(None) => CacheOutcome::Miss,
            Err(Error::CacheCorruption(path)) => {
                log::warn!("discarding corrupt cache entry {path}");
                CacheOutcome::Recomputed
            }
            Err(e) => return Err(e),
        };
        let sys = GramSystem::build(domain, basis, sampler, samples, seed)?;
        self.store(&key, sys.batch_grams())?;
        Ok((sys, outcome))
    }
}

/// Build a Gram system, going through the cache when one is configured.
pub fn gram_system(
    cache: Option<&GramCache>,
    domain: Arc<dyn Domain>,
    basis: BasisFamily,
    sampler: &ImportanceSampler,
    samples: usize,
    seed: u64,
) -> Result<GramSystem> {
    match cache {
        Some(c) => c.gram_system(domain, basis, sampler, samples, seed).map(|(s, _)| s),
        None => GramSystem::build(domain, basis, sampler, samples, seed),
    }
}
