//! Seeded Monte Carlo sampling over domains.
//!
//! Points are drawn from a mixture of axis-aligned boxes; a draw `x` carries
//! weight `1 / (N q(x))` with `q` the mixture density, so `Σ w f(x)`
//! estimates `∫_D f`. Draws that miss the domain are dropped but still count
//! towards `N`. Batch `b` uses the ChaCha stream `b` of the master seed, which
//! makes every batch reproducible on its own and independent of scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{from_reals, Domain};
use crate::error::{Error, Result};
use crate::real17;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub bounds: Vec<(f64, f64)>,
}

impl SampleBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.iter().any(|&(a, b)| !(a < b && a.is_finite() && b.is_finite())) {
            return Err(Error::ConstraintViolation(format!("degenerate sample box {bounds:?}")));
        }
        Ok(SampleBox { bounds })
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.bounds.iter().zip(x).all(|(&(a, b), &v)| a <= v && v < b)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.bounds.iter().map(|&(a, b)| rng.gen_range(a..b)).collect()
    }
}

/// Mixture of boxes with normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceSampler {
    components: Vec<(SampleBox, f64)>,
}

impl ImportanceSampler {
    pub fn uniform(dom: &dyn Domain) -> Self {
        ImportanceSampler {
            components: vec![(SampleBox { bounds: dom.bounding_box() }, 1.0)],
        }
    }

    /// The bounding box keeps weight `1 - Σ w`; every focus box must lie inside it.
    pub fn with_focus(dom: &dyn Domain, focus: Vec<(SampleBox, f64)>) -> Result<Self> {
        let total: f64 = focus.iter().map(|(_, w)| w).sum();
        if !(0.0..1.0).contains(&total) || focus.iter().any(|(_, w)| !(*w > 0.0)) {
            return Err(Error::ConstraintViolation(format!("focus weights sum to {total}")));
        }
        let bbox = dom.bounding_box();
        for (b, _) in &focus {
            let inside = b.bounds.len() == bbox.len()
                && b.bounds.iter().zip(&bbox).all(|(&(a, c), &(lo, hi))| lo <= a && c <= hi);
            if !inside {
                return Err(Error::ConstraintViolation("focus box leaves the bounding box".into()));
            }
        }
        let mut components = vec![(SampleBox { bounds: bbox }, 1.0 - total)];
        components.extend(focus);
        Ok(ImportanceSampler { components })
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .filter(|(b, _)| b.contains(x))
            .map(|(b, w)| w / b.volume())
            .sum()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut u: f64 = rng.gen();
        for (b, w) in &self.components {
            if u < *w {
                return b.draw(rng);
            }
            u -= w;
        }
        self.components[0].0.draw(rng)
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|(b, w)| {
                let bounds: Vec<String> = b
                    .bounds
                    .iter()
                    .map(|(a, c)| format!("{}:{}", real17::format(*a), real17::format(*c)))
                    .collect();
                format!("{}@[{}]", real17::format(*w), bounds.join(","))
            })
            .collect();
        parts.join(";")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint {
    pub z: Vec<Complex64>,
    pub weight: f64,
}

pub const DEFAULT_BATCHES: usize = 10;

/// Batch `batch` of `batches`, drawn from `total` samples overall.
pub fn draw_batch(
    dom: &dyn Domain,
    sampler: &ImportanceSampler,
    total: usize,
    batches: usize,
    seed: u64,
    batch: usize,
) -> Vec<WeightedPoint> {
    let per = batch_len(total, batches, batch);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    (0..per)
        .filter_map(|_| {
            let x = sampler.draw(&mut rng);
            let z = from_reals(&x);
            dom.contains(&z).then(|| WeightedPoint {
                weight: 1.0 / (sampler.density(&x) * total as f64),
                z,
            })
        })
        .collect()
}

fn batch_len(total: usize, batches: usize, batch: usize) -> usize {
    total / batches + usize::from(batch < total % batches)
}

/// All batches, in batch order.
pub fn draw_all(
    dom: &dyn Domain,
    sampler: &ImportanceSampler,
    total: usize,
    batches: usize,
    seed: u64,
) -> Vec<Vec<WeightedPoint>> {
    (0..batches)
        .into_par_iter()
        .map(|b| draw_batch(dom, sampler, total, batches, seed, b))
        .collect()
}

/// Plain uniform draws inside the domain (rejection from the bounding box).
pub fn uniform_points(dom: &dyn Domain, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let bbox = SampleBox {
        bounds: dom.bounding_box(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count.saturating_mul(10_000).max(1_000_000) {
        attempts += 1;
        let z = from_reals(&bbox.draw(&mut rng));
        if dom.contains(&z) {
            out.push(z);
        }
    }
    out
}

/// `(estimate, standard error)` of `∫_D f`, the error from batch spread.
pub fn integrate<F>(
    dom: &dyn Domain,
    sampler: &ImportanceSampler,
    f: F,
    total: usize,
    batches: usize,
    seed: u64,
) -> (f64, f64)
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let sums: Vec<f64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let pts = draw_batch(dom, sampler, total, batches, seed, b);
            pts.iter().map(|p| p.weight * f(&p.z)).sum()
        })
        .collect();
    let est: f64 = sums.iter().sum();
    // each batch sum scaled to a full-sample estimate
    let scaled: Vec<f64> = (0..batches)
        .map(|b| sums[b] * total as f64 / batch_len(total, batches, b) as f64)
        .collect();
    let mean = scaled.iter().sum::<f64>() / batches as f64;
    let var = scaled.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0).max(1.0);
    (est, (var / batches as f64).sqrt())
}
