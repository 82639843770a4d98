//! Bergman kernels: exact series on discs, annuli and their products, and
//! Monte Carlo Gram systems over a finite monomial span on sampled domains.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Planar, Side};
use crate::error::{Error, Result};
use crate::real17;
use crate::sampling::{self, ImportanceSampler, SampleBox, WeightedPoint};

type C = Complex64;

/// Relative size of the last series term at which summation stops.
pub const SERIES_TOL: f64 = 1e-14;
const SERIES_MAX_TERMS: usize = 50_000_000;
/// Below this relative gap to the boundary the series needs too many terms
/// and the closed form is summed instead.
const CLOSED_FORM_GAP: f64 = 1e-5;
/// Gram regularization, relative to `trace / dim` of the diagonally scaled matrix.
pub const GRAM_EPS: f64 = 1e-10;
pub const MAX_CONDITION: f64 = 1e12;
pub const MAX_BASIS: usize = 512;
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelMethod {
    Series,
    MonteCarloGram,
}

impl KernelMethod {
    pub fn name(self) -> &'static str {
        match self {
            KernelMethod::Series => "series",
            KernelMethod::MonteCarloGram => "mc-gram",
        }
    }
}

/// Diagonal kernel value and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimate {
    #[serde(with = "real17::cvec")]
    pub point: Vec<C>,
    #[serde(with = "real17")]
    pub value: f64,
    pub method: KernelMethod,
    pub truncation: String,
    pub samples: usize,
    #[serde(with = "real17")]
    pub stderr: f64,
}

fn outside(_z: C) -> Error {
    Error::OutsideDomain
}

/// `‖w^k‖²` on the disc of radius `radius`.
pub fn disc_norm_sq(k: u32, radius: f64) -> f64 {
    PI * radius.powi(2 * k as i32 + 2) / (k as f64 + 1.0)
}

/// `‖w^k‖²` on `{inner < |w| < outer}`.
pub fn annulus_norm_sq(k: i32, inner: f64, outer: f64) -> f64 {
    if k == -1 {
        2.0 * PI * (outer / inner).ln()
    } else {
        let e = 2 * k + 2;
        2.0 * PI * (outer.powi(e) - inner.powi(e)) / e as f64
    }
}

/// `K(z)` for the disc of radius `radius`, summed until the tail rule fires.
pub fn disc_kernel(z: C, radius: f64) -> Result<f64> {
    disc_series(z, radius, None)
}

/// The disc series cut at `degree`: the kernel of the span of `1, w, …, w^degree`.
pub fn disc_kernel_truncated(z: C, radius: f64, degree: u32) -> Result<f64> {
    disc_series(z, radius, Some(degree as usize))
}

fn disc_series(z: C, radius: f64, degree: Option<usize>) -> Result<f64> {
    if !(radius > 0.0) || !(z.norm() < radius) {
        return Err(outside(z));
    }
    let x = z.norm_sqr() / (radius * radius);
    let lead = 1.0 / (PI * radius * radius);
    if degree.is_none() && 1.0 - x < CLOSED_FORM_GAP {
        return Ok(lead / ((1.0 - x) * (1.0 - x)));
    }
    let limit = degree.map_or(SERIES_MAX_TERMS, |d| d + 1);
    let (mut sum, mut pow) = (0.0, 1.0);
    for k in 0..limit {
        let term = lead * (k as f64 + 1.0) * pow;
        sum += term;
        if degree.is_none() && k > 0 && term < SERIES_TOL * sum {
            break;
        }
        pow *= x;
    }
    Ok(sum)
}

/// `K(z)` for `{inner < |w| < outer}`, all `k ∈ Z`.
pub fn annulus_kernel(z: C, inner: f64, outer: f64) -> Result<f64> {
    annulus_series(z, inner, outer, None)
}

/// Kernel of the span of `w^k`, `lo ≤ k ≤ hi`.
pub fn annulus_kernel_truncated(z: C, inner: f64, outer: f64, lo: i32, hi: i32) -> Result<f64> {
    annulus_series(z, inner, outer, Some((lo, hi)))
}

fn annulus_term(k: i32, r: f64, inner: f64, outer: f64) -> f64 {
    let rho = (inner / outer).powi(2);
    if k == -1 {
        1.0 / (r * r * annulus_norm_sq(-1, inner, outer))
    } else if k >= 0 {
        let k = k as f64;
        (k + 1.0) / (PI * outer * outer) * (r / outer).powf(2.0 * k) / (1.0 - rho.powf(k + 1.0))
    } else {
        let j = (-k - 2) as f64;
        (j + 1.0) / PI * (inner * inner / r.powi(4)) * (inner / r).powf(2.0 * j) / (1.0 - rho.powf(j + 1.0))
    }
}

fn annulus_series(z: C, inner: f64, outer: f64, range: Option<(i32, i32)>) -> Result<f64> {
    let r = z.norm();
    if !(0.0 < inner && inner < outer) || !(inner < r && r < outer) {
        return Err(outside(z));
    }
    if let Some((lo, hi)) = range {
        return Ok((lo..=hi).map(|k| annulus_term(k, r, inner, outer)).sum());
    }
    if 1.0 - (r / outer).powi(2) < CLOSED_FORM_GAP || 1.0 - (inner / r).powi(2) < CLOSED_FORM_GAP {
        return Ok(planar_kernel_offdiag(&Planar::Annulus { inner, outer }, z, z)?.re);
    }
    let mut sum = annulus_term(0, r, inner, outer) + annulus_term(-1, r, inner, outer);
    let mut k = 1i32;
    loop {
        let up = annulus_term(k, r, inner, outer);
        let down = annulus_term(-k - 1, r, inner, outer);
        sum += up + down;
        if (up < SERIES_TOL * sum && down < SERIES_TOL * sum) || k as usize > SERIES_MAX_TERMS {
            return Ok(sum);
        }
        k += 1;
    }
}

pub fn planar_kernel(f: &Planar, z: C) -> Result<f64> {
    match *f {
        Planar::Disc { radius } => disc_kernel(z, radius),
        Planar::Annulus { inner, outer } => annulus_kernel(z, inner, outer),
    }
}

pub fn product_kernel(ka: f64, kb: f64) -> f64 {
    ka * kb
}

/// Off-diagonal `K(z, w)` on a planar factor, in closed form.
pub fn planar_kernel_offdiag(f: &Planar, z: C, w: C) -> Result<C> {
    if !f.contains(z) {
        return Err(outside(z));
    }
    if !f.contains(w) {
        return Err(outside(w));
    }
    let u = z * w.conj();
    Ok(match *f {
        Planar::Disc { radius } => {
            let r2 = radius * radius;
            let d = C::new(1.0, 0.0) - u / r2;
            C::new(1.0 / (PI * r2), 0.0) / (d * d)
        }
        Planar::Annulus { inner, outer } => {
            let (r2, big2) = (inner * inner, outer * outer);
            let rho = r2 / big2;
            let (v, s) = (u / big2, C::new(r2, 0.0) / u);
            let one = C::new(1.0, 0.0);
            let (mut pos, mut neg) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
            let mut p = 1.0;
            while p > 1e-18 {
                let a = one - v * p;
                let b = one - s * p;
                pos += p / (a * a);
                neg += p / (b * b);
                p *= rho;
            }
            pos / (PI * big2) + neg * r2 / (PI * u * u) + one / (2.0 * PI * (outer / inner).ln() * u)
        }
    })
}

/// Anything that can evaluate a reproducing kernel.
pub trait ReproducingKernel: Sync {
    fn dim(&self) -> usize;
    /// `K(z, w)`, holomorphic in `z`.
    fn kernel(&self, z: &[C], w: &[C]) -> Result<C>;
    fn estimate(&self, z: &[C]) -> Result<KernelEstimate>;
}

/// Exact kernel of a product of centered discs and annuli.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductKernel {
    pub factors: Vec<Planar>,
}

impl ProductKernel {
    pub fn new(factors: Vec<Planar>) -> Self {
        ProductKernel { factors }
    }

    fn check_dim(&self, z: &[C]) -> Result<()> {
        if z.len() != self.factors.len() {
            return Err(Error::ConstraintViolation(format!(
                "point has {} coordinates, kernel expects {}",
                z.len(),
                self.factors.len()
            )));
        }
        Ok(())
    }
}

impl ReproducingKernel for ProductKernel {
    fn dim(&self) -> usize {
        self.factors.len()
    }

    fn kernel(&self, z: &[C], w: &[C]) -> Result<C> {
        self.check_dim(z)?;
        self.check_dim(w)?;
        let mut k = C::new(1.0, 0.0);
        for ((f, &a), &b) in self.factors.iter().zip(z).zip(w) {
            k *= planar_kernel_offdiag(f, a, b)?;
        }
        Ok(k)
    }

    fn estimate(&self, z: &[C]) -> Result<KernelEstimate> {
        self.check_dim(z)?;
        let mut value = 1.0;
        for (f, &a) in self.factors.iter().zip(z) {
            value = product_kernel(value, planar_kernel(f, a)?);
        }
        Ok(KernelEstimate {
            point: z.to_vec(),
            value,
            method: KernelMethod::Series,
            truncation: format!("tail<{SERIES_TOL:e}"),
            samples: 0,
            stderr: 0.0,
        })
    }
}

/// Monomials `Π (z_j - c_j)^{k_j}` with `lo_j ≤ k_j ≤ hi_j`, optionally
/// multiplied by the indicator of one side of the slit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFamily {
    #[serde(with = "real17::cvec")]
    pub center: Vec<C>,
    pub ranges: Vec<(i32, i32)>,
    pub restrict: Option<Side>,
}

impl BasisFamily {
    pub fn monomials(center: Vec<C>, ranges: Vec<(i32, i32)>) -> Result<Self> {
        let b = BasisFamily {
            center,
            ranges,
            restrict: None,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn restricted(mut self, side: Side) -> Self {
        self.restrict = Some(side);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.center.is_empty() || self.center.len() != self.ranges.len() {
            return Err(Error::ConstraintViolation("basis center and ranges disagree".into()));
        }
        if self.ranges.iter().any(|&(lo, hi)| lo > hi || lo < -64 || hi > 64) {
            return Err(Error::ConstraintViolation(format!("bad exponent ranges {:?}", self.ranges)));
        }
        if self.center.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::ConstraintViolation("non-finite basis center".into()));
        }
        if self.len() > MAX_BASIS {
            return Err(Error::ConstraintViolation(format!("{} basis functions exceed {MAX_BASIS}", self.len())));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn len(&self) -> usize {
        self.ranges.iter().map(|&(lo, hi)| (hi - lo + 1).max(0) as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exponent tuples, last coordinate varying fastest.
    pub fn exponents(&self) -> Vec<Vec<i32>> {
        let mut out = vec![vec![]];
        for &(lo, hi) in &self.ranges {
            out = out
                .into_iter()
                .flat_map(|e| {
                    (lo..=hi).map(move |k| {
                        let mut e = e.clone();
                        e.push(k);
                        e
                    })
                })
                .collect();
        }
        out
    }

    /// All basis values at `z`, where `side` is the side label of `z`.
    pub fn eval(&self, z: &[C], side: Side) -> DVector<C> {
        let n = self.len();
        if self.restrict.is_some_and(|s| s != side) {
            return DVector::zeros(n);
        }
        let powers: Vec<Vec<C>> = self
            .ranges
            .iter()
            .zip(z.iter().zip(&self.center))
            .map(|(&(lo, hi), (&zj, &cj))| (lo..=hi).map(|k| (zj - cj).powi(k)).collect())
            .collect();
        let mut out = DVector::from_element(n, C::new(1.0, 0.0));
        let mut stride = n;
        for p in &powers {
            stride /= p.len();
            for (i, v) in out.iter_mut().enumerate() {
                *v *= p[(i / stride) % p.len()];
            }
        }
        out
    }

    pub fn label(&self) -> String {
        let c: Vec<String> = self
            .center
            .iter()
            .map(|c| format!("{}{:+}i", real17::format(c.re), real17::format(c.im)))
            .collect();
        let r: Vec<String> = self.ranges.iter().map(|(a, b)| format!("{a}..{b}")).collect();
        format!("center=[{}] ranges=[{}] side={:?}", c.join(","), r.join(","), self.restrict)
    }
}

#[derive(Debug, Clone)]
struct Factor {
    scale: DVector<f64>,
    chol: Cholesky<C, Dyn>,
}

impl Factor {
    /// Diagonal scaling then `H + ε I`; returns the factor and its condition number.
    fn new(h: &DMatrix<C>, check: bool) -> Result<(Factor, f64)> {
        let n = h.nrows();
        let mut scale = DVector::zeros(n);
        for i in 0..n {
            let d = h[(i, i)].re;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::SingularGram(f64::INFINITY));
            }
            scale[i] = 1.0 / d.sqrt();
        }
        let mut m = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * (scale[i] * scale[j]));
        // hermitize against round-off from the accumulation order
        for i in 0..n {
            for j in 0..i {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
            m[(i, i)] = C::new(m[(i, i)].re + GRAM_EPS, 0.0);
        }
        let cond = if check {
            let eig = SymmetricEigen::new(m.clone()).eigenvalues;
            let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
            let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            if cond > MAX_CONDITION {
                return Err(Error::SingularGram(cond));
            }
            cond
        } else {
            f64::NAN
        };
        let chol = Cholesky::new(m).ok_or(Error::SingularGram(cond))?;
        Ok((Factor { scale, chol }, cond))
    }

    /// `H⁻¹ v`.
    fn solve(&self, v: &DVector<C>) -> DVector<C> {
        let scaled = v.zip_map(&self.scale, |a, s| a * s);
        self.chol.solve(&scaled).zip_map(&self.scale, |a, s| a * s)
    }

    fn diag(&self, v: &DVector<C>) -> f64 {
        v.dotc(&self.solve(v)).re
    }
}

/// Monte Carlo Gram matrix `H_ab = ∫ f_a conj(f_b)` of a basis over a domain.
///
/// The reproducing kernel of the span is `K(z, w) = F(w)* H⁻¹ F(z)`. The
/// sample is split into batches; the standard error is the leave-one-batch-out
/// jackknife of the diagonal value.
pub struct GramSystem {
    domain: Arc<dyn Domain>,
    basis: BasisFamily,
    samples: usize,
    seed: u64,
    batch_grams: Vec<DMatrix<C>>,
    gram: DMatrix<C>,
    full: Factor,
    jackknife: Vec<Factor>,
    condition: f64,
}

impl std::fmt::Debug for GramSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GramSystem")
            .field("domain", &self.domain.label())
            .field("basis", &self.basis)
            .field("samples", &self.samples)
            .field("seed", &self.seed)
            .field("condition", &self.condition)
            .finish()
    }
}

fn batch_gram(basis: &BasisFamily, dom: &dyn Domain, pts: &[WeightedPoint]) -> DMatrix<C> {
    let n = basis.len();
    let mut g = DMatrix::zeros(n, n);
    for chunk in pts.chunks(1024) {
        let cols: Vec<DVector<C>> = chunk
            .iter()
            .filter_map(|p| {
                let side = dom.side(&p.z);
                if basis.restrict.is_some_and(|s| s != side) {
                    return None;
                }
                Some(basis.eval(&p.z, side) * C::new(p.weight.sqrt(), 0.0))
            })
            .collect();
        if cols.is_empty() {
            continue;
        }
        let m = DMatrix::from_columns(&cols);
        g += &m * m.adjoint();
    }
    g
}

impl GramSystem {
    pub fn build(
        domain: Arc<dyn Domain>,
        basis: BasisFamily,
        sampler: &ImportanceSampler,
        samples: usize,
        seed: u64,
    ) -> Result<GramSystem> {
        basis.validate()?;
        if basis.dim() != domain.dim() {
            return Err(Error::ConstraintViolation("basis and domain dimensions differ".into()));
        }
        if samples < MIN_SAMPLES {
            return Err(Error::ConstraintViolation(format!("{samples} samples, need at least {MIN_SAMPLES}")));
        }
        let batches = sampling::DEFAULT_BATCHES;
        let grams: Vec<DMatrix<C>> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let pts = sampling::draw_batch(domain.as_ref(), sampler, samples, batches, seed, b);
                batch_gram(&basis, domain.as_ref(), &pts)
            })
            .collect();
        GramSystem::from_batches(domain, basis, samples, seed, grams)
    }

    /// Reassemble from per-batch Gram contributions (e.g. read back from a cache).
    pub fn from_batches(
        domain: Arc<dyn Domain>,
        basis: BasisFamily,
        samples: usize,
        seed: u64,
        batch_grams: Vec<DMatrix<C>>,
    ) -> Result<GramSystem> {
        let n = basis.len();
        if batch_grams.len() < 2 || batch_grams.iter().any(|g| g.nrows() != n || g.ncols() != n) {
            return Err(Error::ConstraintViolation("batch Gram shapes do not match the basis".into()));
        }
        let gram = batch_grams.iter().fold(DMatrix::zeros(n, n), |acc, g| acc + g);
        let (full, condition) = Factor::new(&gram, true)?;
        let nb = batch_grams.len() as f64;
        let jackknife = batch_grams
            .par_iter()
            .map(|g| Factor::new(&((&gram - g) * C::new(nb / (nb - 1.0), 0.0)), false).map(|f| f.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(GramSystem {
            domain,
            basis,
            samples,
            seed,
            batch_grams,
            gram,
            full,
            jackknife,
            condition,
        })
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn domain(&self) -> &dyn Domain {
        self.domain.as_ref()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn gram(&self) -> &DMatrix<C> {
        &self.gram
    }

    pub fn batch_grams(&self) -> &[DMatrix<C>] {
        &self.batch_grams
    }

    fn features(&self, z: &[C]) -> Result<DVector<C>> {
        if z.len() != self.basis.dim() || !self.domain.contains(z) {
            return Err(Error::OutsideDomain);
        }
        Ok(self.basis.eval(z, self.domain.side(z)))
    }

    /// Coefficients of the unit-norm extremal function at `z`, and `K(z)`.
    pub fn extremal(&self, z: &[C]) -> Result<(Vec<C>, f64)> {
        let f = self.features(z)?;
        let v = self.full.solve(&f);
        let k = f.dotc(&v).re;
        if !(k > 0.0) {
            return Ok((vec![C::new(0.0, 0.0); f.len()], 0.0));
        }
        let s = 1.0 / k.sqrt();
        Ok((v.iter().map(|c| c.conj() * s).collect(), k))
    }

    /// `Σ c_a f_a(z)`.
    pub fn eval_span(&self, coeffs: &[C], z: &[C]) -> Result<C> {
        let f = self.features(z)?;
        Ok(f.iter().zip(coeffs).map(|(a, b)| a * b).sum())
    }

    /// Squared MC norm `Σ c_a conj(c_b) H_ab`.
    pub fn norm_sq(&self, coeffs: &[C]) -> f64 {
        let c = DVector::from_column_slice(coeffs);
        (c.transpose() * &self.gram * c.map(|x| x.conj()))[(0, 0)].re
    }
}

impl ReproducingKernel for GramSystem {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn kernel(&self, z: &[C], w: &[C]) -> Result<C> {
        let fz = self.features(z)?;
        let fw = self.features(w)?;
        Ok(fw.dotc(&self.full.solve(&fz)))
    }

    fn estimate(&self, z: &[C]) -> Result<KernelEstimate> {
        let f = self.features(z)?;
        let value = self.full.diag(&f);
        let loo: Vec<f64> = self.jackknife.iter().map(|j| j.diag(&f)).collect();
        let nb = loo.len() as f64;
        let mean = loo.iter().sum::<f64>() / nb;
        let var = loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (nb - 1.0) / nb;
        Ok(KernelEstimate {
            point: z.to_vec(),
            value,
            method: KernelMethod::MonteCarloGram,
            truncation: self.basis.label(),
            samples: self.samples,
            stderr: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Blowup,
    Bounded,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Blowup => "blowup",
            Verdict::Bounded => "bounded",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Blowup: the last three values increase and the last exceeds ten times the
/// first. Bounded: every value stays within twice the first.
pub fn classify_trend(values: &[f64]) -> Verdict {
    let n = values.len();
    if n < 3 || !(values[0] > 0.0) {
        return Verdict::Inconclusive;
    }
    let first = values[0];
    if values[n - 3] < values[n - 2] && values[n - 2] < values[n - 1] && values[n - 1] > 10.0 * first {
        Verdict::Blowup
    } else if values.iter().all(|&v| v <= 2.0 * first) {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(with = "real17")]
    pub t: f64,
    pub estimate: KernelEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub rows: Vec<ScanRow>,
    pub verdict: Verdict,
}

impl BlowupReport {
    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.estimate.value).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,estimate,stderr,method\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                real17::format(r.t),
                real17::format(r.estimate.value),
                real17::format(r.estimate.stderr),
                r.estimate.method.name()
            ));
        }
        s
    }
}

/// Kernel values along `t = 1 - 2^{-j}`, `j = 1..=steps`.
pub fn blowup_scan(
    oracle: &dyn ReproducingKernel,
    path: &(dyn Fn(f64) -> Vec<C> + Sync),
    steps: usize,
) -> Result<BlowupReport> {
    let rows = (1..=steps)
        .into_par_iter()
        .map(|j| {
            let t = 1.0 - 0.5f64.powi(j as i32);
            oracle.estimate(&path(t)).map(|estimate| ScanRow { t, estimate })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = classify_trend(&rows.iter().map(|r| r.estimate.value).collect::<Vec<_>>());
    Ok(BlowupReport { rows, verdict })
}

/// The boundary point `a = (1 + i/2, 0)` of the slit.
pub fn slit_target() -> Vec<C> {
    vec![C::new(1.0, 0.5), C::new(0.0, 0.0)]
}

/// Approach to `a` from inside `D1`.
pub fn slit_inside_path(t: f64) -> Vec<C> {
    vec![C::new(1.0, 0.25 + 0.25 * t), C::new(0.0, 0.0)]
}

/// Approach to `a` from the other side of the slit.
pub fn slit_outside_path(t: f64) -> Vec<C> {
    vec![C::new(1.0, 0.75 - 0.25 * t), C::new(0.0, 0.0)]
}

/// Powers of `z1 - 1` and `z2` up to the bidegree, supported on `D ∩ D1`.
pub fn slit_inside_basis(deg1: u32, deg2: u32) -> BasisFamily {
    BasisFamily {
        center: vec![C::new(1.0, 0.0), C::new(0.0, 0.0)],
        ranges: vec![(0, deg1 as i32), (0, deg2 as i32)],
        restrict: Some(Side::InsideD1),
    }
}

/// Laurent powers `z1^k`, `|k| ≤ deg1`, times `z2^j`, `j ≤ deg2`.
pub fn slit_global_basis(deg1: u32, deg2: u32) -> BasisFamily {
    BasisFamily {
        center: vec![C::new(0.0, 0.0); 2],
        ranges: vec![(-(deg1 as i32), deg1 as i32), (0, deg2 as i32)],
        restrict: None,
    }
}

/// Concentrates draws on `D1` and on a neighbourhood of `a`.
pub fn slit_inside_sampler(dom: &dyn Domain) -> Result<ImportanceSampler> {
    let d1 = SampleBox::new(vec![(0.5, 1.5), (0.0, 0.5), (-1.0, 1.0), (-1.0, 1.0)])?;
    let near = SampleBox::new(vec![(0.75, 1.25), (0.25, 0.5), (-0.5, 0.5), (-0.5, 0.5)])?;
    ImportanceSampler::with_focus(dom, vec![(d1, 0.6), (near, 0.3)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Product, SlitDomain};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn disc_at_origin() {
        assert_relative_eq!(disc_kernel(c(0.0, 0.0), 1.0).unwrap(), 1.0 / PI, max_relative = 1e-15);
        for r in [0.5, 1.0, 2.0] {
            assert_relative_eq!(disc_kernel(c(0.0, 0.0), r).unwrap(), 1.0 / (PI * r * r), max_relative = 1e-15);
        }
        assert!(disc_kernel(c(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn disc_matches_closed_form() {
        for x in [0.1, 0.5, 0.9, 0.99] {
            let z = c(x * 0.6, x * 0.8);
            let closed = 1.0 / (PI * (1.0 - x * x).powi(2));
            assert_relative_eq!(disc_kernel(z, 1.0).unwrap(), closed, max_relative = 1e-12);
            let off = planar_kernel_offdiag(&Planar::Disc { radius: 1.0 }, z, z).unwrap();
            assert_relative_eq!(off.re, closed, max_relative = 1e-12);
        }
    }

    #[test]
    fn annulus_log_norm() {
        assert_relative_eq!(annulus_norm_sq(-1, 0.5, 1.5), 2.0 * PI * 3f64.ln(), max_relative = 1e-15);
        // radial quadrature of ∫ r^{2k} dA
        for k in [-3, -2, 0, 2] {
            let n = 20000;
            let h = 1.0 / n as f64;
            let quad: f64 = (0..n)
                .map(|i| {
                    let r = 0.5 + (i as f64 + 0.5) * h;
                    2.0 * PI * r.powi(2 * k + 1) * h
                })
                .sum();
            assert_relative_eq!(annulus_norm_sq(k, 0.5, 1.5), quad, max_relative = 1e-6);
        }
    }

    #[test]
    fn annulus_series_matches_closed_form() {
        let p = Planar::Annulus { inner: 0.5, outer: 1.5 };
        for r in [0.51, 0.8, 1.0, 1.3, 1.49] {
            let z = C::from_polar(r, 0.7);
            let s = annulus_kernel(z, 0.5, 1.5).unwrap();
            let k = planar_kernel_offdiag(&p, z, z).unwrap();
            assert_relative_eq!(s, k.re, max_relative = 1e-11);
            assert!(k.im.abs() < 1e-9 * s);
            // naive sum of the defining series
            let naive: f64 = (-60..=60).map(|k| r.powi(2 * k) / annulus_norm_sq(k, 0.5, 1.5)).sum();
            if r > 0.7 && r < 1.2 {
                assert_relative_eq!(s, naive, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn near_boundary_values_follow_the_closed_form() {
        for gap in [1e-4, 1e-6, 1e-10] {
            let z = c(1.5 - gap, 0.0);
            let k = annulus_kernel(z, 0.5, 1.5).unwrap();
            // leading boundary behaviour 1 / (4π gap^2)
            assert_relative_eq!(k * 4.0 * PI * gap * gap, 1.0, max_relative = 2.0 * gap + 1e-5);
            let d = disc_kernel(c(1.0 - gap, 0.0), 1.0).unwrap();
            assert_relative_eq!(d * 4.0 * PI * gap * gap, 1.0, max_relative = 2.0 * gap + 1e-5);
        }
    }

    #[test]
    fn offdiag_is_hermitian() {
        let p = Planar::Annulus { inner: 0.5, outer: 1.5 };
        let (z, w) = (c(0.9, 0.3), c(-0.4, 1.1));
        let a = planar_kernel_offdiag(&p, z, w).unwrap();
        let b = planar_kernel_offdiag(&p, w, z).unwrap();
        assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
        assert_relative_eq!(a.im, -b.im, max_relative = 1e-12);
    }

    #[test]
    fn product_oracle_composes() {
        let k = ProductKernel::new(Product::annulus_times_disc().factors);
        let e = k.estimate(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_relative_eq!(e.value, annulus_kernel(c(1.0, 0.0), 0.5, 1.5).unwrap() / PI, max_relative = 1e-14);
        let kz = k.kernel(&[c(0.3, 0.9), c(0.2, -0.1)], &[c(0.3, 0.9), c(0.2, -0.1)]).unwrap();
        let ez = k.estimate(&[c(0.3, 0.9), c(0.2, -0.1)]).unwrap();
        assert_relative_eq!(kz.re, ez.value, max_relative = 1e-11);
    }

    #[test]
    fn basis_evaluation_order() {
        let b = BasisFamily::monomials(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![(-1, 1), (0, 2)]).unwrap();
        assert_eq!(b.len(), 9);
        let z = [c(2.0, 0.0), c(4.0, 0.0)];
        let v = b.eval(&z, Side::Unsided);
        for (e, val) in b.exponents().iter().zip(v.iter()) {
            let expect = 2f64.powi(e[0]) * 3f64.powi(e[1]);
            assert_relative_eq!(val.re, expect, max_relative = 1e-15);
        }
        let r = b.clone().restricted(Side::InsideD1);
        assert!(r.eval(&z, Side::OutsideD1).iter().all(|x| x.norm() == 0.0));
        assert!(BasisFamily::monomials(vec![c(0.0, 0.0)], vec![(2, 1)]).is_err());
    }

    fn disc_system(deg: i32, samples: usize, seed: u64) -> GramSystem {
        let dom: Arc<dyn Domain> = Arc::new(Product::disc(1.0));
        let basis = BasisFamily::monomials(vec![c(0.0, 0.0)], vec![(0, deg)]).unwrap();
        let s = ImportanceSampler::uniform(dom.as_ref());
        GramSystem::build(dom, basis, &s, samples, seed).unwrap()
    }

    #[test]
    fn constant_basis_gives_inverse_volume() {
        let g = disc_system(0, 100_000, 5);
        let e = g.estimate(&[c(0.3, -0.2)]).unwrap();
        assert!((e.value - 1.0 / PI).abs() < 3.0 * e.stderr, "{} ± {}", e.value, e.stderr);
    }

    #[test]
    fn mc_gram_matches_truncated_series() {
        let g = disc_system(8, 100_000, 11);
        for z in [c(0.0, 0.0), c(0.3, 0.1), c(-0.2, 0.4)] {
            let e = g.estimate(&[z]).unwrap();
            let exact = disc_kernel_truncated(z, 1.0, 8).unwrap();
            assert!((e.value - exact).abs() < 3.0 * e.stderr, "{z}: {} vs {exact} ± {}", e.value, e.stderr);
        }
    }

    #[test]
    fn extremal_function_attains_the_kernel() {
        let g = disc_system(6, 20_000, 2);
        let z = [c(0.4, 0.2)];
        let (coeffs, k) = g.extremal(&z).unwrap();
        assert_relative_eq!(g.norm_sq(&coeffs), 1.0, max_relative = 1e-6);
        assert_relative_eq!(g.eval_span(&coeffs, &z).unwrap().norm_sqr(), k, max_relative = 1e-6);
        // any other span element stays below
        let other: Vec<C> = (0..coeffs.len()).map(|i| c(1.0 / (i as f64 + 1.0), 0.3)).collect();
        let ratio = g.eval_span(&other, &z).unwrap().norm_sqr() / g.norm_sq(&other);
        assert!(ratio <= k * (1.0 + 1e-9));
    }

    #[test]
    fn over_rich_basis_is_singular() {
        // shifted monomials are far from orthogonal on the disc
        let dom: Arc<dyn Domain> = Arc::new(Product::new(vec![Planar::Disc { radius: 1.0 }; 2]));
        let basis = BasisFamily::monomials(vec![c(3.0, 0.0); 2], vec![(0, 14), (0, 14)]).unwrap();
        let s = ImportanceSampler::uniform(dom.as_ref());
        let r = GramSystem::build(dom, basis, &s, 2000, 1);
        assert!(matches!(r, Err(Error::SingularGram(_))), "{:?}", r.map(|g| g.condition()));
    }

    #[test]
    fn disc_ray_blows_up() {
        let k = ProductKernel::new(vec![Planar::Disc { radius: 1.0 }]);
        let r = blowup_scan(&k, &|t| vec![c(t, 0.0)], 8).unwrap();
        assert_eq!(r.verdict, Verdict::Blowup);
        for row in &r.rows {
            assert_relative_eq!(row.estimate.value, 1.0 / (PI * (1.0 - row.t * row.t).powi(2)), max_relative = 1e-9);
        }
        assert!(r.to_csv().starts_with("t,estimate,stderr,method\n"));
    }

    #[test]
    fn trend_rules() {
        assert_eq!(classify_trend(&[1.0, 1.5, 1.9, 1.2]), Verdict::Bounded);
        assert_eq!(classify_trend(&[1.0, 3.0, 9.0, 11.0]), Verdict::Blowup);
        assert_eq!(classify_trend(&[1.0, 3.0, 2.5, 2.0]), Verdict::Inconclusive);
    }

    #[test]
    fn slit_paths_stay_on_their_sides() {
        let d = SlitDomain::new();
        for j in 1..=12 {
            let t = 1.0 - 0.5f64.powi(j);
            assert!(d.contains(&slit_inside_path(t)));
            assert_eq!(d.side(&slit_inside_path(t)), Side::InsideD1);
            assert!(d.contains(&slit_outside_path(t)));
            assert_eq!(d.side(&slit_outside_path(t)), Side::OutsideD1);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn annulus_rotation_invariant(r in 0.51f64..1.49, th in 0.0f64..std::f64::consts::TAU) {
            let a = annulus_kernel(C::from_polar(r, 0.0), 0.5, 1.5).unwrap();
            let b = annulus_kernel(C::from_polar(r, th), 0.5, 1.5).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn disc_truncation_monotone(x in 0.0f64..0.99, d in 0u32..30) {
            let z = c(x, 0.0);
            let lo = disc_kernel_truncated(z, 1.0, d).unwrap();
            let hi = disc_kernel_truncated(z, 1.0, d + 1).unwrap();
            prop_assert!(lo <= hi && hi <= disc_kernel(z, 1.0).unwrap() * (1.0 + 1e-12));
        }

        #[test]
        fn disc_monotone_along_rays(x in 0.0f64..0.98, th in 0.0f64..std::f64::consts::TAU) {
            let a = disc_kernel(C::from_polar(x, th), 1.0).unwrap();
            let b = disc_kernel(C::from_polar(x + 0.01, th), 1.0).unwrap();
            prop_assert!(a < b);
        }
    }
}
