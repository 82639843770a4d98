//! Plurisubharmonic peak functions at strictly pseudoconvex boundary points,
//! their normalized supremum, and a greedy L² holomorphic function that is
//! unbounded near a boundary point.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bergman::ReproducingKernel;
use crate::domain::{norm, Domain};
use crate::error::{Error, Result};
use crate::levi::{tangential_spectrum, DefiningFn, BOUNDARY_TOL};
use crate::real17;
use crate::sampling::{self, ImportanceSampler};

type C = Complex64;

/// Fraction of the Levi curvature kept when checking `Re P ≤ -κ c |h|²` on samples.
pub const PEAK_MARGIN: f64 = 0.45;
pub const PEAK_SHRINK: f64 = 0.8;
pub const PEAK_SAMPLES: usize = 4000;
const CONVEXIFY_MAX: f64 = 1e12;
const CIRCLE_POINTS: usize = 64;

/// `max(Re P(z - a), -s)` on `|z - a| < radius`, `-s` elsewhere, where `P`
/// is the Levi polynomial of a (possibly convexified) defining function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PshWitness {
    #[serde(with = "real17::cvec")]
    pub base: Vec<C>,
    #[serde(with = "real17::cvec")]
    pub gradient: Vec<C>,
    /// Holomorphic Hessian, row-major.
    #[serde(with = "real17::cvec")]
    pub hessian: Vec<C>,
    #[serde(with = "real17")]
    pub convexity: f64,
    #[serde(with = "real17")]
    pub curvature: f64,
    #[serde(with = "real17")]
    pub radius: f64,
    #[serde(with = "real17")]
    pub floor: f64,
}

impl PshWitness {
    pub fn levi_polynomial(&self, z: &[C]) -> C {
        let n = self.base.len();
        let h: Vec<C> = z.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let mut p = C::new(0.0, 0.0);
        for j in 0..n {
            p += self.gradient[j] * h[j];
            for k in 0..n {
                p += 0.5 * self.hessian[j * n + k] * h[j] * h[k];
            }
        }
        p
    }

    pub fn eval(&self, z: &[C]) -> f64 {
        let d: f64 = z.iter().zip(&self.base).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        if d < self.radius {
            self.levi_polynomial(z).re.max(-self.floor)
        } else {
            -self.floor
        }
    }

    /// Outward unit normal `conj(∂r)/|∂r|`.
    pub fn outward_normal(&self) -> Vec<C> {
        let len = self.gradient.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
        self.gradient.iter().map(|g| g.conj() / len).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakOptions {
    pub max_radius: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for PeakOptions {
    fn default() -> Self {
        PeakOptions {
            max_radius: 0.5,
            samples: PEAK_SAMPLES,
            seed: 0,
        }
    }
}

fn min_eigenvalue(m: &DMatrix<C>) -> f64 {
    let h = (m + m.adjoint()) * C::from(0.5);
    h.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Uniform point of the real `2n`-ball of radius `r` about `a`.
fn ball_point(rng: &mut ChaCha8Rng, a: &[C], r: f64) -> Vec<C> {
    loop {
        let x: Vec<f64> = (0..2 * a.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() < 1.0 {
            return a.iter().enumerate().map(|(j, c)| c + C::new(x[2 * j], x[2 * j + 1]) * r).collect();
        }
    }
}

/// Builds the peak function at the boundary point `a` of `dom = {r < 0}`.
///
/// `r` is replaced by `(exp(A r) - 1) / A` with `A` doubled until the full
/// complex Hessian is positive definite; the glue radius shrinks until the
/// sampled part of `dom` near `a` satisfies `Re P ≤ -κ c |h|²`.
pub fn levi_peak_function(r: &dyn DefiningFn, a: &[C], dom: &dyn Domain, opts: PeakOptions) -> Result<PshWitness> {
    let n = r.dim();
    if a.len() != n {
        return Err(Error::ConstraintViolation("point dimension".into()));
    }
    let g = r.gradient(a);
    let gnorm = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if r.value(a).abs() > BOUNDARY_TOL * gnorm.max(1.0) {
        return Err(Error::ConstraintViolation(format!("r(a) = {} is not on the boundary", r.value(a))));
    }
    let tangential = tangential_spectrum(r, a)?.first().map_or(f64::INFINITY, |e| e.0);
    if !(tangential > BOUNDARY_TOL) {
        return Err(Error::NotStrictlyPseudoconvex(tangential));
    }
    let gv = DVector::from_vec(g.clone());
    let levi = r.complex_hessian(a);
    let mut big_a = 0.0;
    let curvature = loop {
        let m = min_eigenvalue(&(&levi + &gv * gv.adjoint() * C::from(big_a)));
        if m > 0.0 {
            break m;
        }
        big_a = if big_a == 0.0 { 1.0 } else { 2.0 * big_a };
        if big_a > CONVEXIFY_MAX {
            return Err(Error::NotStrictlyPseudoconvex(tangential));
        }
    };
    let hol = r.holomorphic_hessian(a) + &gv * gv.transpose() * C::from(big_a);
    let mut w = PshWitness {
        base: a.to_vec(),
        gradient: g,
        hessian: (0..n * n).map(|i| hol[(i / n, i % n)]).collect(),
        convexity: big_a,
        curvature,
        radius: opts.max_radius,
        floor: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while w.radius > 1e-6 {
        let ok = (0..opts.samples).all(|_| {
            let z = ball_point(&mut rng, a, w.radius);
            if !dom.contains(&z) {
                return true;
            }
            let h2: f64 = z.iter().zip(a).map(|(p, q)| (p - q).norm_sqr()).sum();
            w.levi_polynomial(&z).re <= -PEAK_MARGIN * curvature * h2
        });
        if ok {
            w.floor = PEAK_MARGIN * curvature * w.radius * w.radius / 2.0;
            return Ok(w);
        }
        w.radius *= PEAK_SHRINK;
    }
    Err(Error::NotStrictlyPseudoconvex(curvature))
}

/// `D_j = {z ∈ D : dist(z, ∂D) ≥ δ_j}` with decreasing `δ_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exhaustion {
    #[serde(with = "real17::vec")]
    pub deltas: Vec<f64>,
}

impl Exhaustion {
    /// `count` levels from `first` down to `last`, geometrically.
    pub fn geometric(count: usize, first: f64, last: f64) -> Result<Self> {
        if count == 0 || !(first >= last && last > 0.0) {
            return Err(Error::ConstraintViolation("exhaustion needs first ≥ last > 0".into()));
        }
        let deltas = (0..count)
            .map(|j| first * (last / first).powf(j as f64 / (count - 1).max(1) as f64))
            .collect();
        Ok(Exhaustion { deltas })
    }

    pub fn is_nested(&self) -> bool {
        self.deltas.windows(2).all(|w| w[0] >= w[1]) && self.deltas.iter().all(|&d| d > 0.0)
    }

    pub fn contains(&self, dom: &dyn Domain, j: usize, z: &[C]) -> bool {
        dom.contains(z) && dom.boundary_distance(z) >= self.deltas[j]
    }
}

/// `u = max_j u_j / m_j` with `m_j = -sup_{D_j} u_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupRegularized {
    pub witnesses: Vec<PshWitness>,
    #[serde(with = "real17::vec")]
    pub scales: Vec<f64>,
}

impl SupRegularized {
    pub fn eval(&self, z: &[C]) -> f64 {
        self.witnesses
            .iter()
            .zip(&self.scales)
            .map(|(w, m)| w.eval(z) / m)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Normalizes the witnesses against an exhaustion, using `samples` uniform
/// points of `dom` plus `samples / 10` points near each base point.
pub fn sup_regularized(
    witnesses: Vec<PshWitness>,
    exh: &Exhaustion,
    dom: &dyn Domain,
    samples: usize,
    seed: u64,
) -> Result<SupRegularized> {
    if witnesses.is_empty() || exh.deltas.len() < witnesses.len() || !exh.is_nested() {
        return Err(Error::ConstraintViolation("need one exhaustion level per witness".into()));
    }
    let global = sampling::uniform_points(dom, samples, seed);
    let scales = witnesses
        .par_iter()
        .enumerate()
        .map(|(j, w)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(j as u64 + 1)));
            let local: Vec<Vec<C>> = (0..samples / 10)
                .map(|_| ball_point(&mut rng, &w.base, w.radius))
                .filter(|z| dom.contains(z))
                .collect();
            let mut sup = f64::NEG_INFINITY;
            for z in global.iter().chain(&local) {
                let u = w.eval(z);
                if u >= 0.0 {
                    return Err(Error::NonNegativeWitness { index: j, value: u });
                }
                // the constant floor is attained somewhere deep inside, so only
                // points above it need the distance test
                if u > sup && (u <= -w.floor || exh.contains(dom, j, z)) {
                    sup = u;
                }
            }
            if !(sup < 0.0) {
                return Err(Error::ConstraintViolation(format!("D_{j} has no samples")));
            }
            Ok(-sup)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SupRegularized { witnesses, scales })
}

pub fn neg_log_transform(u: f64) -> Result<f64> {
    if u < 0.0 {
        Ok(-(-u).ln())
    } else {
        Err(Error::DomainError(u))
    }
}

/// A circle `z + ρ e^{iθ} w` used to test the sub-mean value property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    #[serde(with = "real17::cvec")]
    pub center: Vec<C>,
    #[serde(with = "real17::cvec")]
    pub direction: Vec<C>,
    #[serde(with = "real17")]
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PshViolation {
    pub probe: Probe,
    #[serde(with = "real17")]
    pub value: f64,
    #[serde(with = "real17")]
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PshReport {
    pub probes: usize,
    pub violations: Vec<PshViolation>,
}

impl PshReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    loop {
        let v: Vec<C> = (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let l = norm(&v);
        if l > 0.1 && l <= 1.0 {
            return v.into_iter().map(|c| c / l).collect();
        }
    }
}

/// Probe circles: half centered uniformly in `dom`, half near the `focus`
/// points. Radii are at most half the boundary distance and at most `cap`.
pub fn make_probes(dom: &dyn Domain, count: usize, seed: u64, focus: &[(Vec<C>, f64)], cap: f64) -> Vec<Probe> {
    let near = if focus.is_empty() { 0 } else { count / 2 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = sampling::uniform_points(dom, count - near, seed ^ 0x51ed);
    let mut guard = 0usize;
    while centers.len() < count && guard < 1000 * count {
        guard += 1;
        let (a, r) = &focus[guard % focus.len()];
        let z = ball_point(&mut rng, a, *r);
        if dom.contains(&z) {
            centers.push(z);
        }
    }
    let dirs: Vec<Vec<C>> = centers.iter().map(|z| unit_direction(&mut rng, z.len())).collect();
    centers
        .into_par_iter()
        .zip(dirs)
        .map(|(center, direction)| {
            let radius = (0.5 * dom.boundary_distance(&center)).min(cap);
            Probe {
                center,
                direction,
                radius,
            }
        })
        .collect()
}

fn circle_mean(u: &(dyn Fn(&[C]) -> f64 + Sync), p: &Probe) -> f64 {
    (0..CIRCLE_POINTS)
        .map(|k| {
            let e = C::from_polar(p.radius, TAU * k as f64 / CIRCLE_POINTS as f64);
            let z: Vec<C> = p.center.iter().zip(&p.direction).map(|(c, w)| c + e * w).collect();
            u(&z)
        })
        .sum::<f64>()
        / CIRCLE_POINTS as f64
}

/// Sub-mean value test on the given probes, tolerance `1e-6 (1 + |u(z)|)`.
pub fn psh_check_on(u: &(dyn Fn(&[C]) -> f64 + Sync), probes: &[Probe]) -> PshReport {
    let violations = probes
        .par_iter()
        .filter_map(|p| {
            let value = u(&p.center);
            let mean = circle_mean(u, p);
            (value > mean + 1e-6 * (1.0 + value.abs())).then(|| PshViolation {
                probe: p.clone(),
                value,
                mean,
            })
        })
        .collect();
    PshReport {
        probes: probes.len(),
        violations,
    }
}

pub fn psh_check(u: &(dyn Fn(&[C]) -> f64 + Sync), dom: &dyn Domain, probes: usize, seed: u64) -> PshReport {
    psh_check_on(u, &make_probes(dom, probes, seed, &[], f64::INFINITY))
}

/// Boundary points of the unit ball in `C^2` with `|Re z| ≥ min_abs_re`,
/// spread over both signs of `Re z`, two moduli, two arguments and two fibre angles.
pub fn ball_boundary_samples(count: usize, min_abs_re: f64) -> Vec<Vec<C>> {
    let moduli = [min_abs_re + 0.05, (min_abs_re + 0.2).min(0.95)];
    (0..count)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let rho = moduli[(k / 2) % 2];
            let alpha = ((rho * rho - min_abs_re * min_abs_re).max(0.0).sqrt() / rho).min(0.5)
                * if (k / 4) % 2 == 0 { 0.5 } else { -0.5 };
            let theta = TAU * (k / 8) as f64 / count.div_ceil(8) as f64 + 0.3 * (k % 8) as f64;
            let z = C::from_polar(rho, alpha) * sign;
            vec![z, C::from_polar((1.0 - rho * rho).sqrt(), theta)]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyOptions {
    pub levels: usize,
    /// Starting offset of the first point from `a`.
    pub delta0: f64,
    /// Smallest offset tried before giving up on a level.
    pub floor: f64,
    pub sup_samples: usize,
    pub norm_samples: usize,
    pub seed: u64,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            levels: 5,
            delta0: 0.25,
            floor: 1e-14,
            sup_samples: 512,
            norm_samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyLevel {
    pub k: usize,
    #[serde(with = "real17::cvec")]
    pub z: Vec<C>,
    #[serde(with = "real17")]
    pub offset: f64,
    #[serde(with = "real17")]
    pub dist: f64,
    #[serde(with = "real17")]
    pub d: f64,
    #[serde(with = "real17")]
    pub f_norm: f64,
    #[serde(with = "real17")]
    pub g_at_z: f64,
    #[serde(rename = "M", with = "real17")]
    pub m: f64,
    #[serde(with = "real17")]
    pub target: f64,
    pub met: bool,
    #[serde(with = "real17")]
    pub h_at_z: f64,
    #[serde(with = "real17")]
    pub telescoping_bound: f64,
    #[serde(with = "real17")]
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    #[serde(with = "real17")]
    pub c: f64,
    #[serde(with = "real17::cvec")]
    pub a: Vec<C>,
    pub levels: Vec<GreedyLevel>,
    #[serde(with = "real17")]
    pub kernel_norm: f64,
    #[serde(with = "real17")]
    pub mc_norm: f64,
    #[serde(with = "real17")]
    pub mc_norm_stderr: f64,
}

impl GreedyTrace {
    /// `|h(z_k)| ≥ k - 1` for every `k ≥ 2`.
    pub fn growth_holds(&self) -> bool {
        self.levels.iter().filter(|l| l.k >= 2).all(|l| l.h_at_z >= l.k as f64 - 1.0)
    }
}

/// `h = Σ_j g_j / j²` with `g_j = K(·, z_j) / (sqrt(K(z_j)) d_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyWitness {
    pub points: Vec<Vec<C>>,
    pub kernel_diag: Vec<f64>,
    pub d: Vec<f64>,
}

impl GreedyWitness {
    fn coefficient(&self, j: usize) -> f64 {
        let k = (j + 1) as f64;
        1.0 / (self.kernel_diag[j].sqrt() * self.d[j] * k * k)
    }

    /// `g_j(ζ)`, zero-based `j`.
    pub fn term(&self, oracle: &dyn ReproducingKernel, j: usize, zeta: &[C]) -> Result<C> {
        Ok(oracle.kernel(zeta, &self.points[j])? / (self.kernel_diag[j].sqrt() * self.d[j]))
    }

    pub fn eval(&self, oracle: &dyn ReproducingKernel, zeta: &[C]) -> Result<C> {
        let mut acc = C::new(0.0, 0.0);
        for j in 0..self.points.len() {
            acc += oracle.kernel(zeta, &self.points[j])? * self.coefficient(j);
        }
        Ok(acc)
    }

    /// `‖h‖` from the reproducing identity `<K_w, K_z> = K(z, w)`.
    pub fn kernel_norm(&self, oracle: &dyn ReproducingKernel) -> Result<f64> {
        let n = self.points.len();
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                acc += (oracle.kernel(&self.points[k], &self.points[j])? * self.coefficient(j) * self.coefficient(k)).re;
            }
        }
        Ok(acc.max(0.0).sqrt())
    }
}

/// Greedy construction along `a + δ ν`, `ν` the inward direction.
///
/// At level `k` the offset is halved from the previous one until the unit
/// extremal function at `z_k` reaches `|g_k(z_k)| ≥ k³ + k² Σ_{j<k} M_j`.
/// `d_1 = c = π^n` and `d_k = max(c dist(z_{k-1})^n, max_{i<k} |f_k(z_i)|)`,
/// which keeps `|g_k| ≤ 1` at the earlier points.
pub fn greedy_unbounded_witness(
    dom: &dyn Domain,
    oracle: &dyn ReproducingKernel,
    a: &[C],
    inward: &[C],
    opts: GreedyOptions,
) -> Result<(GreedyWitness, GreedyTrace)> {
    let n = dom.dim();
    if a.len() != n || inward.len() != n || opts.levels == 0 || !(opts.delta0 > opts.floor && opts.floor > 0.0) {
        return Err(Error::ConstraintViolation("greedy witness options".into()));
    }
    let nu_len = norm(inward);
    let nu: Vec<C> = inward.iter().map(|c| c / nu_len).collect();
    let at = |delta: f64| -> Vec<C> { a.iter().zip(&nu).map(|(p, v)| p + v * delta).collect() };
    let c = PI.powi(n as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut wit = GreedyWitness {
        points: vec![],
        kernel_diag: vec![],
        d: vec![],
    };
    let mut offsets: Vec<f64> = vec![];
    let mut dists: Vec<f64> = vec![];
    let mut ms: Vec<f64> = vec![];
    let mut targets: Vec<f64> = vec![];
    let mut gz: Vec<f64> = vec![];
    for k in 1..=opts.levels {
        let kf = k as f64;
        let target = kf.powi(3) + kf * kf * ms.iter().sum::<f64>();
        let mut delta = if k == 1 { opts.delta0 } else { offsets[k - 2] * 0.5 };
        let mut best = 0.0f64;
        let chosen = loop {
            if delta < opts.floor {
                return Err(Error::GrowthTargetUnreachable {
                    level: k,
                    achieved: best,
                    target,
                });
            }
            let z = at(delta);
            let fresh = dom.contains(&z) && delta < 1.0 / kf;
            let dist = if fresh { dom.boundary_distance(&z) } else { f64::INFINITY };
            if fresh && (k == 1 || dist < dists[k - 2]) {
                let kz = oracle.estimate(&z)?.value;
                if kz > 0.0 {
                    let mut d = if k == 1 { c } else { c * dists[k - 2].powi(n as i32) };
                    for p in &wit.points {
                        d = d.max(oracle.kernel(p, &z)?.norm() / kz.sqrt());
                    }
                    let g = kz.sqrt() / d;
                    best = best.max(g);
                    if g >= target {
                        break (z, delta, dist, kz, d, g);
                    }
                }
            }
            delta *= 0.5;
        };
        let (z, delta, dist, kz, d, g) = chosen;
        wit.points.push(z);
        wit.kernel_diag.push(kz);
        wit.d.push(d);
        offsets.push(delta);
        dists.push(dist);
        targets.push(target);
        gz.push(g);
        // sup of |g_k| over the rest of the normal ray and a ball around a
        let mut cands: Vec<Vec<C>> = Vec::new();
        let mut t = delta * 0.5;
        while t >= opts.floor {
            cands.push(at(t));
            t *= 0.5;
        }
        while cands.len() < opts.sup_samples + 64 {
            let p = ball_point(&mut rng, a, 2.0 * delta);
            if dom.contains(&p) {
                cands.push(p);
            }
        }
        let j = k - 1;
        let sup = cands
            .par_iter()
            .filter(|p| dom.contains(p))
            .map(|p| wit.term(oracle, j, p).map(|v| v.norm()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(g, f64::max);
        ms.push(sup.max(1.0));
    }
    let levels = (0..opts.levels)
        .map(|i| {
            let k = i + 1;
            let kf = k as f64;
            let z = &wit.points[i];
            let h = wit.eval(oracle, z)?.norm();
            let mut bound = gz[i] / (kf * kf);
            for (j, m) in ms.iter().enumerate().take(i) {
                bound -= m / ((j + 1) as f64).powi(2);
            }
            for j in k..opts.levels {
                bound -= wit.term(oracle, j, z)?.norm() / ((j + 1) as f64).powi(2);
            }
            let f_norm = oracle.kernel(z, z)?.re.max(0.0).sqrt() / wit.kernel_diag[i].sqrt();
            Ok(GreedyLevel {
                k,
                z: z.clone(),
                offset: offsets[i],
                dist: dists[i],
                d: wit.d[i],
                f_norm,
                g_at_z: gz[i],
                m: ms[i],
                target: targets[i],
                met: gz[i] >= targets[i],
                h_at_z: h,
                telescoping_bound: bound,
                reference: kf - 1.0 / 6.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kernel_norm = wit.kernel_norm(oracle)?;
    let sampler = ImportanceSampler::uniform(dom);
    let (mc, err) = sampling::integrate(
        dom,
        &sampler,
        |z| wit.eval(oracle, z).map_or(f64::NAN, |v| v.norm_sqr()),
        opts.norm_samples,
        sampling::DEFAULT_BATCHES,
        opts.seed ^ 0xa11ce,
    );
    let trace = GreedyTrace {
        c,
        a: a.to_vec(),
        levels,
        kernel_norm,
        mc_norm: mc.max(0.0).sqrt(),
        mc_norm_stderr: if mc > 0.0 { err / (2.0 * mc.sqrt()) } else { err.sqrt() },
    };
    Ok((wit, trace))
}

/// Witnesses at `points` for the defining function `r`, in parallel.
pub fn peak_family(
    r: Arc<dyn DefiningFn>,
    points: &[Vec<C>],
    dom: &dyn Domain,
    opts: PeakOptions,
) -> Result<Vec<PshWitness>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            levi_peak_function(
                r.as_ref(),
                a,
                dom,
                PeakOptions {
                    seed: opts.seed.wrapping_add(i as u64),
                    ..opts
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::ProductKernel;
    use crate::domain::{Ball, Planar, Product, SlitDomain};
    use crate::levi::{QuadricFn, SphereFn};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn ball() -> Ball {
        Ball { dim: 2, radius: 1.0 }
    }

    fn sphere() -> SphereFn {
        SphereFn { dim: 2, radius: 1.0 }
    }

    #[test]
    fn neg_log_values() {
        assert_eq!(neg_log_transform(-1.0).unwrap(), 0.0);
        assert_relative_eq!(neg_log_transform(-(-1f64).exp()).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(neg_log_transform(-1e-6).unwrap(), 13.815510557964274, max_relative = 1e-14);
        assert!(matches!(neg_log_transform(0.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn ball_peak_at_pole() {
        let a = [c(1.0, 0.0), c(0.0, 0.0)];
        let w = levi_peak_function(&sphere(), &a, &ball(), PeakOptions::default()).unwrap();
        assert_eq!(w.convexity, 0.0);
        assert_relative_eq!(w.curvature, 1.0, max_relative = 1e-12);
        // P(z) = z1 - 1
        let z = [c(0.3, 0.2), c(0.1, -0.4)];
        assert_relative_eq!(w.levi_polynomial(&z).re, -0.7, max_relative = 1e-12);
        for p in sampling::uniform_points(&ball(), 2000, 3) {
            assert!(w.eval(&p) < 0.0);
        }
        let far = [c(-0.5, 0.0), c(0.0, 0.0)];
        assert_eq!(w.eval(&far), -w.floor);
        let mut last = f64::NEG_INFINITY;
        for j in 1..12 {
            let t = 0.5f64.powi(j);
            let v = w.eval(&[c(1.0 - t, 0.0), c(0.0, 0.0)]);
            assert!(v >= last && v < 0.0);
            last = v;
        }
        assert!(last > -1e-3);
    }

    #[test]
    fn concave_point_is_rejected() {
        // r = |z1|^2 - |z2|^2 + Re z1 ... tangent direction along z2 is concave
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let q = DMatrix::zeros(2, 2);
        let l = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let r = QuadricFn::new(h, q, l, 0.0).unwrap();
        let a = [c(0.0, 0.0), c(0.0, 0.0)];
        let dom = Product::new(vec![Planar::Disc { radius: 1.0 }; 2]);
        assert!(matches!(
            levi_peak_function(&r, &a, &dom, PeakOptions::default()),
            Err(Error::NotStrictlyPseudoconvex(_))
        ));
    }

    /// `{r < 0}` inside the unit bidisc.
    struct SubLevel {
        r: QuadricFn,
    }

    impl Domain for SubLevel {
        fn dim(&self) -> usize {
            2
        }
        fn contains(&self, z: &[C]) -> bool {
            z.iter().all(|c| c.norm() < 1.0) && self.r.value(z) < 0.0
        }
        fn bounding_box(&self) -> Vec<(f64, f64)> {
            vec![(-1.0, 1.0); 4]
        }
        fn boundary_distance(&self, z: &[C]) -> f64 {
            crate::domain::ray_distance(self, z)
        }
        fn label(&self) -> String {
            "sublevel".into()
        }
    }

    #[test]
    fn convexification_kicks_in() {
        // tangentially convex, normally concave: r = -4|z1|^2 + |z2|^2 + 2 Re z1
        let h = DMatrix::from_row_slice(2, 2, &[c(-4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let l = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let r = QuadricFn::new(h, DMatrix::zeros(2, 2), l, 0.0).unwrap();
        let a = [c(0.0, 0.0), c(0.0, 0.0)];
        let dom = SubLevel { r: r.clone() };
        let w = levi_peak_function(&r, &a, &dom, PeakOptions { max_radius: 0.2, ..Default::default() }).unwrap();
        assert!(w.convexity >= 4.0);
        assert!(w.curvature > 0.0);
    }

    #[test]
    fn psh_controls() {
        let dom = ball();
        let probes = make_probes(&dom, 300, 5, &[], f64::INFINITY);
        assert_eq!(probes.len(), 300);
        assert!(psh_check_on(&|z: &[C]| z[0].re, &probes).passed());
        assert!(psh_check_on(&|z: &[C]| norm(z).powi(2), &probes).passed());
        // the circle mean of -|z|^2 drops by exactly radius^2
        let bad = psh_check_on(&|z: &[C]| -norm(z).powi(2), &probes);
        let expected = probes.iter().filter(|p| p.radius.powi(2) > 1.01e-6 * (1.0 + norm(&p.center).powi(2))).count();
        assert!(bad.violations.len() >= expected && bad.violations.len() * 10 >= probes.len() * 9);
        assert!(psh_check(&|z: &[C]| z[1].im, &dom, 50, 1).passed());
    }

    fn antipodal() -> (Vec<PshWitness>, SupRegularized) {
        let pts = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]];
        let opts = PeakOptions {
            max_radius: 1.0,
            ..Default::default()
        };
        let ws = peak_family(Arc::new(sphere()), &pts, &ball(), opts).unwrap();
        let exh = Exhaustion::geometric(2, 0.2, 0.1).unwrap();
        let u = sup_regularized(ws.clone(), &exh, &ball(), 5000, 9).unwrap();
        (ws, u)
    }

    #[test]
    fn sup_normalization_and_limits() {
        let (ws, u) = antipodal();
        for (w, m) in ws.iter().zip(&u.scales) {
            assert!(*m > 0.0 && *m <= w.floor * (1.0 + 1e-12));
        }
        for p in sampling::uniform_points(&ball(), 3000, 1) {
            assert!(u.eval(&p) < 0.0);
        }
        let near = [c(1.0 - 1e-3, 0.0), c(0.0, 0.0)];
        assert!(u.eval(&near) >= -1e-2, "{}", u.eval(&near));
        let single = sup_regularized(vec![ws[0].clone()], &Exhaustion { deltas: vec![0.2] }, &ball(), 5000, 9).unwrap();
        let m = single.scales[0];
        assert_relative_eq!(single.eval(&[c(0.0, 0.0), c(0.0, 0.0)]), -ws[0].floor / m, max_relative = 1e-14);
        assert!(single.eval(&[c(0.0, 0.0), c(0.0, 0.0)]) >= -1.0 - 1e-12);
    }

    #[test]
    fn sup_and_its_log_are_psh() {
        let (ws, u) = antipodal();
        let focus: Vec<(Vec<C>, f64)> = ws.iter().map(|w| (w.base.clone(), w.radius)).collect();
        let cap = ws.iter().map(|w| w.radius).fold(f64::INFINITY, f64::min) / 4.0;
        let probes = make_probes(&ball(), 400, 4, &focus, cap);
        assert!(psh_check_on(&|z: &[C]| u.eval(z), &probes).passed());
        assert!(psh_check_on(&|z: &[C]| neg_log_transform(u.eval(z)).unwrap(), &probes).passed());
    }

    #[test]
    fn nonnegative_witness_is_reported() {
        let mut w = levi_peak_function(&sphere(), &[c(1.0, 0.0), c(0.0, 0.0)], &ball(), PeakOptions::default()).unwrap();
        w.gradient = vec![c(-1.0, 0.0), c(0.0, 0.0)];
        let exh = Exhaustion { deltas: vec![0.1] };
        assert!(matches!(
            sup_regularized(vec![w], &exh, &ball(), 2000, 1),
            Err(Error::NonNegativeWitness { index: 0, .. })
        ));
    }

    #[test]
    fn mean_value_bound_on_deep_points() {
        // the bidisc of radius 3 contains unit balls about the origin
        let k = ProductKernel::new(vec![Planar::Disc { radius: 3.0 }; 2]);
        let e = k.estimate(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(e.value.sqrt() <= PI * PI);
    }

    #[test]
    fn greedy_single_level() {
        let dom = SlitDomain::new();
        let k = ProductKernel::new(Product::annulus_times_disc().factors);
        let a = [c(1.5, 0.0), c(0.0, 0.0)];
        let opts = GreedyOptions {
            levels: 1,
            norm_samples: 2000,
            ..Default::default()
        };
        let (_, trace) = greedy_unbounded_witness(&dom, &k, &a, &[c(-1.0, 0.0), c(0.0, 0.0)], opts).unwrap();
        let l = &trace.levels[0];
        assert!(l.met && l.g_at_z >= 1.0);
        assert_relative_eq!(l.d, PI * PI, max_relative = 1e-15);
        assert_relative_eq!(l.h_at_z, l.g_at_z, max_relative = 1e-12);
        assert_relative_eq!(l.f_norm, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn ball_samples_avoid_the_cap() {
        let pts = ball_boundary_samples(16, 0.65);
        assert_eq!(pts.len(), 16);
        for p in &pts {
            assert!(p[0].re.abs() >= 0.65 - 1e-12);
            assert_relative_eq!(norm(p), 1.0, max_relative = 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn neg_log_is_increasing(u in -10.0f64..-1e-9, v in -10.0f64..-1e-9) {
            prop_assume!(u < v);
            prop_assert!(neg_log_transform(u).unwrap() < neg_log_transform(v).unwrap());
        }

        #[test]
        fn exhaustion_is_nested(n in 1usize..40, first in 0.01f64..1.0, ratio in 0.01f64..1.0) {
            let e = Exhaustion::geometric(n, first, first * ratio).unwrap();
            prop_assert!(e.is_nested());
            prop_assert_eq!(e.deltas.len(), n);
        }

        #[test]
        fn ball_peak_negative_inside(x in -1.0f64..1.0, y in -1.0f64..1.0, u in -1.0f64..1.0, v in -1.0f64..1.0) {
            let z = [c(x, y), c(u, v)];
            prop_assume!(norm(&z) < 1.0);
            let w = PshWitness {
                base: vec![c(0.0, 1.0), c(0.0, 0.0)],
                gradient: vec![c(0.0, -1.0), c(0.0, 0.0)],
                hessian: vec![c(0.0, 0.0); 4],
                convexity: 0.0,
                curvature: 1.0,
                radius: 0.5,
                floor: 0.45 * 0.25 / 2.0,
            };
            prop_assert!(w.eval(&z) < 0.0);
        }
    }
}
