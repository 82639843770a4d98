//! The verification claims. Each runner is deterministic in `(config, seed)`
//! and returns one record plus the artifacts it can emit.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bergman::{
    self, disc_kernel, disc_kernel_truncated, annulus_kernel_truncated, BasisFamily, ProductKernel, ReproducingKernel,
    Verdict,
};
use crate::cantor_bump::{build_base_bump, solve_parameters, CantorBumpFn, PairSample};
use crate::dd::Dd;
use crate::domain::{convexity_check, Domain, DomainSpec, Planar, Product, SlitDomain, SlitInterior};
use crate::error::Result;
use crate::hartogs::{self, on_plateau_line, scan_boundary, BoundaryClass, GridSpec, HartogsField, ScalarField2};
use crate::levi::{levi_disc, log_radii, taylor_residual, DefiningFn, HartogsGraphFn, QuadricFn, SphereFn};
use crate::real17;
use crate::sampling::{self, ImportanceSampler};
use crate::witness::{
    ball_boundary_samples, greedy_unbounded_witness, make_probes, neg_log_transform, peak_family, psh_check_on,
    sup_regularized, Exhaustion, GreedyOptions, PeakOptions,
};

use super::cache::{gram_system, GramCache};
use super::config::PipelineConfig;
use super::report::{ClaimRecord, ClaimStatus};

pub const CLAIM_IDS: [u32; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// A named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct ClaimOutput {
    pub record: ClaimRecord,
    pub artifacts: Vec<Artifact>,
}

/// Shared inputs of the runners.
pub struct Context<'a> {
    pub config: &'a PipelineConfig,
    pub cache: Option<&'a GramCache>,
    /// Skip building artifact text when nobody will write it.
    pub artifacts: bool,
}

impl Context<'_> {
    /// Independent per-claim seed derived from the master seed.
    pub fn seed(&self, claim: u32, stream: u32) -> u64 {
        let mut h = Sha256::new();
        h.update(self.config.seed.to_le_bytes());
        h.update(claim.to_le_bytes());
        h.update(stream.to_le_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
    }
}

fn title_anchor(id: u32) -> (&'static str, &'static str) {
    match id {
        1 => ("parameter feasibility", "schedule inequalities for the Cantor-bump construction"),
        2 => ("plateau concavity", "F'' <= -4 B A^n on level-n plateaus"),
        3 => ("regularity", "F in C^{2-eps} with |F| < C1"),
        4 => ("boundary classification map", "2 - C2/r0^2 < -2 on plateau lines; D0 concave near 0"),
        5 => ("Levi disc identity", "r(phi(lambda)) = L r(z, a) |lambda|^2 + o(|lambda|^2)"),
        6 => ("kernel oracles", "disc and product kernels"),
        7 => ("slit-domain dichotomy", "kernel unbounded at S from D1, bounded from the other side"),
        8 => ("convexity of the base domain", "D^0 convex"),
        9 => ("sup-regularized witness", "psh exhaustion built from local peak functions"),
        10 => ("greedy witness trace", "telescoping growth |h(z_k)| > k - 1/6"),
        _ => ("unknown", ""),
    }
}

/// Run one claim. Errors inside a runner become a failed record.
pub fn run_claim(ctx: &Context, id: u32) -> ClaimOutput {
    let (title, anchor) = title_anchor(id);
    let mut record = ClaimRecord::new(id, title, anchor);
    let result = match id {
        1 => claim_feasibility(ctx, &mut record),
        2 => claim_plateau(ctx, &mut record),
        3 => claim_regularity(ctx, &mut record),
        4 => claim_classification(ctx, &mut record),
        5 => claim_levi(ctx, &mut record),
        6 => claim_kernel_oracles(ctx, &mut record),
        7 => claim_slit(ctx, &mut record),
        8 => claim_convexity(ctx, &mut record),
        9 => claim_sup_witness(ctx, &mut record),
        10 => claim_greedy(ctx, &mut record),
        _ => Err(crate::Error::Config(format!("no claim {id}"))),
    };
    match result {
        Ok(artifacts) => ClaimOutput { record, artifacts },
        Err(e) => ClaimOutput {
            record: ClaimRecord::failed(id, title, anchor, &e),
            artifacts: Vec::new(),
        },
    }
}

fn artifact(name: &str, contents: String) -> Artifact {
    Artifact {
        name: name.to_string(),
        contents,
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn fail_note(record: &mut ClaimRecord, ok: bool, what: &str) {
    if !ok {
        if !record.note.is_empty() {
            record.note.push_str("; ");
        }
        record.note.push_str(what);
    }
}

fn construct(ctx: &Context, depth: usize) -> Result<CantorBumpFn> {
    let c = &ctx.config.construction;
    CantorBumpFn::construct(c.eps, c.c1, c.c2, depth)
}

fn claim_feasibility(_ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    let profile = build_base_bump(0.5)?;
    let mut ok = true;
    let mut schedules = Vec::new();
    for eps in [0.1, 0.5, 0.9] {
        let s = solve_parameters(eps, 1.0, 1.0, &profile)?;
        for inv in s.invariants() {
            let key = format!("eps={}:{}", eps, inv.name);
            rec.measure(&format!("{key}:lhs"), inv.lhs).measure(&format!("{key}:rhs"), inv.rhs);
            fail_note(rec, inv.holds, &format!("{key} violated"));
            ok &= inv.holds;
        }
        ok &= s.is_valid();
        schedules.push(s);
    }
    rec.status = ClaimStatus::from_bool(ok);
    Ok(vec![artifact("schedules.json", json(&schedules)?)])
}

fn claim_plateau(ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    const MAX_LEVEL: usize = 8;
    const FD_STEP: f64 = 1e-5;
    const FD_TOL: f64 = 1e-4;
    let depth = 10.min(ctx.config.construction.depth.max(MAX_LEVEL));
    let f = construct(ctx, depth)?;
    let s = f.schedule().clone();
    let tree = f.tree();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(2, 0));
    let points: Vec<(usize, f64)> = (0..ctx.config.sampling.plateau_points)
        .map(|_| {
            let n = rng.gen_range(0..=MAX_LEVEL);
            let i = rng.gen_range(0..1usize << n);
            let (lo, hi) = tree.plateau(n, i);
            let (c, q) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            (n, c + 0.9 * q * rng.gen_range(-1.0..1.0))
        })
        .collect();
    let rows: Vec<(usize, f64, f64, f64)> = points
        .par_iter()
        .map(|&(n, x)| {
            let exact = f.second_on_plateau(x)?;
            let h = FD_STEP * tree.width(n);
            let xd = Dd::new(x);
            let hd = Dd::new(h);
            let fd = (f.value_dd(xd + hd, depth) - f.value_dd(xd, depth).scale(2.0) + f.value_dd(xd - hd, depth)).hi
                / (h * h);
            Ok((n, x, exact, fd))
        })
        .collect::<Result<_>>()?;
    let mut worst_c2 = f64::NEG_INFINITY;
    let mut worst_level = f64::NEG_INFINITY;
    let mut worst_fd: f64 = 0.0;
    for &(n, _, exact, fd) in &rows {
        worst_c2 = worst_c2.max(exact + s.c2);
        worst_level = worst_level.max(exact / (4.0 * s.scale * s.growth.powi(n as i32)) + 1.0);
        worst_fd = worst_fd.max((fd - exact).abs() / exact.abs());
    }
    let ok_c2 = worst_c2 <= 0.0;
    let ok_level = worst_level <= 0.0;
    let ok_fd = worst_fd <= FD_TOL;
    rec.measure("points", rows.len() as f64)
        .measure("max F''+C2", worst_c2)
        .measure("max F''/(4 B A^n)+1", worst_level)
        .measure("max fd relative error", worst_fd)
        .tolerance("fd relative error", FD_TOL)
        .tolerance("fd step / p_n", FD_STEP);
    fail_note(rec, ok_c2, "F'' > -C2 somewhere");
    fail_note(rec, ok_level, "F'' > -4 B A^n somewhere");
    fail_note(rec, ok_fd, "finite differences disagree");
    rec.status = ClaimStatus::from_bool(ok_c2 && ok_level && ok_fd);
    if !ctx.artifacts {
        return Ok(Vec::new());
    }
    let full = construct(ctx, ctx.config.construction.depth)?;
    let m = ctx.config.construction.profile_points;
    let mut csv = String::from("x,F,dF,d2F\n");
    for k in 0..m {
        let x = -1.0 + 2.0 * k as f64 / (m - 1) as f64;
        let d = full.depth();
        csv.push_str(&format!(
            "{},{},{},{}\n",
            real17::format(x),
            real17::format(full.layered(x, d, 0)),
            real17::format(full.layered(x, d, 1)),
            real17::format(full.layered(x, d, 2))
        ));
    }
    Ok(vec![
        artifact("f_profile.csv", csv),
        artifact("schedule.json", full.document().to_json()? + "\n"),
    ])
}

fn claim_regularity(ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    const STABILITY: f64 = 0.1;
    let eps = ctx.config.construction.eps;
    let f = construct(ctx, 10)?;
    let pairs = PairSample::new(ctx.config.sampling.holder_pairs, ctx.seed(3, 0));
    let h8 = crate::cantor_bump::holder_seminorm(&f, 8, eps, &pairs);
    let h10 = crate::cantor_bump::holder_seminorm(&f, 10, eps, &pairs);
    let change = (h10 - h8).abs() / h8;
    let s = f.schedule();
    let grid = 100_001;
    let sampled_sup = (0..grid)
        .into_par_iter()
        .map(|k| f.value(-1.0 + 2.0 * k as f64 / (grid - 1) as f64).abs())
        .reduce(|| 0.0, f64::max);
    let tail = s.tail_bound(10);
    let ok_holder = change <= STABILITY && h8.is_finite() && h8 > 0.0;
    let ok_sup = sampled_sup + tail < s.c1 && s.sup_bound() < s.c1;
    rec.measure("holder depth 8", h8)
        .measure("holder depth 10", h10)
        .measure("holder relative change", change)
        .measure("sampled sup |F|", sampled_sup)
        .measure("tail bound", tail)
        .measure("sup bound", s.sup_bound())
        .measure("C1", s.c1)
        .tolerance("holder relative change", STABILITY);
    fail_note(rec, ok_holder, "Holder seminorm not stable");
    fail_note(rec, ok_sup, "sup norm reaches C1");
    rec.status = ClaimStatus::from_bool(ok_holder && ok_sup);
    Ok(Vec::new())
}

fn map_csv(field: &dyn ScalarField2, grid: GridSpec) -> Result<(hartogs::ClassificationMap, String)> {
    let map = scan_boundary(field, grid);
    let mut buf = Vec::new();
    map.write_csv(&mut buf)?;
    Ok((map, String::from_utf8(buf).expect("csv is ascii")))
}

fn claim_classification(ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    const PLATEAU_LEVEL: usize = 8;
    const LAPLACIAN_TOL: f64 = 1e-3;
    let c = &ctx.config.construction;
    let pair = hartogs::build_pair(c.r0, c.smoothing, c.eps, c.depth.max(PLATEAU_LEVEL))?;
    let mut grid = GridSpec::new(ctx.config.sampling.grid);
    grid.tol = ctx.config.sampling.classify_tol;
    let field: &HartogsField = pair.d.field();
    let cap = field.cap().expect("D carries the cap");
    let (map, csv_d) = map_csv(field, grid)?;
    let (map0, csv_d0) = map_csv(pair.d0.field(), grid)?;
    let r0 = c.r0;

    let (mut n_a, mut bad_a) = (0usize, 0usize);
    let (mut n_b, mut bad_b) = (0usize, 0usize);
    let mut max_lap_b = f64::NEG_INFINITY;
    for cell in &map.cells {
        let convex = cell.class == BoundaryClass::StrictlyPseudoconvex;
        if cell.x.abs() > r0 {
            n_a += 1;
            bad_a += usize::from(!convex);
        }
        if cell.y.abs() <= r0 && on_plateau_line(cap, cell.x, PLATEAU_LEVEL) {
            n_b += 1;
            let lap = cell.laplacian.unwrap_or(f64::INFINITY);
            max_lap_b = max_lap_b.max(lap);
            bad_b += usize::from(!(convex && lap < -2.0));
        }
    }
    let (mut n_c, mut bad_c) = (0usize, 0usize);
    let mut max_dev_c: f64 = 0.0;
    for cell in &map0.cells {
        if cell.x.hypot(cell.y) < r0 / 2.0 {
            n_c += 1;
            let dev = cell.laplacian.map_or(f64::INFINITY, |l| (l - 2.0).abs());
            max_dev_c = max_dev_c.max(dev);
            bad_c += usize::from(!(cell.class == BoundaryClass::StrictlyPseudoconcave && dev <= LAPLACIAN_TOL));
        }
    }
    let dense = map.is_dense();
    let counts = map.counts();
    rec.measure("grid", grid.n as f64)
        .measure("cells", map.cells.len() as f64)
        .measure("pseudoconvex cells", counts.pseudoconvex as f64)
        .measure("pseudoconcave cells", counts.pseudoconcave as f64)
        .measure("indeterminate cells", counts.indeterminate as f64)
        .measure("(a) cells |x| > r0", n_a as f64)
        .measure("(a) failures", bad_a as f64)
        .measure("(b) plateau-line cells", n_b as f64)
        .measure("(b) failures", bad_b as f64)
        .measure("(b) max laplacian", max_lap_b)
        .measure("(c) cells |z| < r0/2", n_c as f64)
        .measure("(c) failures", bad_c as f64)
        .measure("(c) max |laplacian - 2|", max_dev_c)
        .measure("(d) sparse 2x2 blocks", map.sparse_blocks().len() as f64)
        .tolerance("(b) laplacian below", -2.0)
        .tolerance("(c) laplacian deviation", LAPLACIAN_TOL);
    let ok = [
        (n_a > 0 && bad_a == 0, "(a) fails"),
        (n_b > 0 && bad_b == 0, "(b) fails"),
        (n_c > 0 && bad_c == 0, "(c) fails"),
        (dense, "(d) fails"),
    ];
    for (good, what) in ok {
        fail_note(rec, good, what);
    }
    rec.status = ClaimStatus::from_bool(ok.iter().all(|p| p.0));
    if !ctx.artifacts {
        return Ok(Vec::new());
    }
    Ok(vec![
        artifact("classification_d.csv", csv_d),
        artifact("classification_d0.csv", csv_d0),
    ])
}

/// One seeded Levi-disc case.
pub struct LeviCase {
    pub label: String,
    pub r: Box<dyn DefiningFn>,
    pub point: Vec<C>,
    pub direction: Vec<C>,
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    let v: Vec<C> = (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}

/// Balls, quadrics with holomorphic terms, and Hartogs graphs of `D0` and `D`
/// away from the cap, in rotation.
pub fn levi_cases(count: usize, seed: u64, r0: f64, smoothing: f64, eps: f64) -> Result<Vec<LeviCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = hartogs::build_pair(r0, smoothing, eps, 6)?;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let case = match k % 4 {
            0 => {
                let dim = 2 + k % 3;
                let radius = rng.gen_range(0.5..2.0);
                let point: Vec<C> = unit_vector(&mut rng, dim).into_iter().map(|c| c * radius).collect();
                LeviCase {
                    label: format!("ball(dim={dim})"),
                    r: Box::new(SphereFn { dim, radius }),
                    point,
                    direction: unit_vector(&mut rng, dim),
                }
            }
            1 => {
                let h = DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        C::new(rng.gen_range(1.0..2.0), 0.0),
                        C::new(0.2, 0.1),
                        C::new(0.2, -0.1),
                        C::new(rng.gen_range(1.0..2.0), 0.0),
                    ],
                );
                let q01 = C::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
                let q = DMatrix::from_row_slice(
                    2,
                    2,
                    &[C::new(rng.gen_range(-0.3..0.3), 0.0), q01, q01, C::new(0.0, rng.gen_range(-0.3..0.3))],
                );
                let r = QuadricFn::new(h, q, DVector::zeros(2), -1.0)?;
                let v = unit_vector(&mut rng, 2);
                let t = 1.0 / (r.value(&v) + 1.0).sqrt();
                let point: Vec<C> = v.iter().map(|c| c * t).collect();
                LeviCase {
                    label: "quadric".into(),
                    r: Box::new(r),
                    point,
                    direction: unit_vector(&mut rng, 2),
                }
            }
            kind => {
                let (field, z) = if kind == 2 {
                    let z = C::from_polar(rng.gen_range(0.0..0.15 * r0), rng.gen_range(0.0..std::f64::consts::TAU));
                    (pair.d0.field().clone(), z)
                } else {
                    let x = rng.gen_range(r0 + 0.25..r0 + 0.4) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    (pair.d.field().clone(), C::new(x, rng.gen_range(-0.2..0.2)))
                };
                let w = C::from_polar(field.value(z.re, z.im).exp(), rng.gen_range(0.0..std::f64::consts::TAU));
                let a1 = C::from_polar(0.5, rng.gen_range(0.0..std::f64::consts::TAU));
                let label = if kind == 2 { "hartogs(D0)" } else { "hartogs(D)" };
                LeviCase {
                    label: label.into(),
                    r: Box::new(HartogsGraphFn { field }),
                    point: vec![z, w],
                    direction: vec![a1, C::new(0.0, 0.0)],
                }
            }
        };
        out.push(case);
    }
    Ok(out)
}

fn claim_levi(ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    const MIN_SLOPE: f64 = 0.9;
    const INTERCEPT_TOL: f64 = 1e-3;
    let c = &ctx.config.construction;
    let cases = levi_cases(ctx.config.sampling.levi_cases, ctx.seed(5, 0), c.r0, c.smoothing, c.eps)?;
    let radii = log_radii(1e-3, 1e-1, 9);
    let mut csv = String::from("case,label,levi,slope,intercept,relative_error,pass\n");
    let mut failures = 0usize;
    let mut worst_slope = f64::INFINITY;
    let mut worst_err: f64 = 0.0;
    for (k, case) in cases.iter().enumerate() {
        let disc = levi_disc(case.r.as_ref(), &case.point, &case.direction)?;
        let report = taylor_residual(case.r.as_ref(), &disc, &radii);
        let slope = report.slope.unwrap_or(f64::INFINITY);
        let err = report.intercept_error();
        let pass = report.decays(MIN_SLOPE) && err <= INTERCEPT_TOL;
        failures += usize::from(!pass);
        worst_slope = worst_slope.min(slope);
        worst_err = worst_err.max(err);
        csv.push_str(&format!(
            "{k},{},{},{},{},{},{}\n",
            case.label,
            real17::format(report.levi),
            real17::format(slope),
            real17::format(report.intercept),
            real17::format(err),
            u8::from(pass)
        ));
    }
    rec.measure("cases", cases.len() as f64)
        .measure("failures", failures as f64)
        .measure("min slope", worst_slope)
        .measure("max intercept relative error", worst_err)
        .tolerance("slope", MIN_SLOPE)
        .tolerance("intercept relative error", INTERCEPT_TOL);
    fail_note(rec, failures == 0, "some cases fail");
    rec.status = ClaimStatus::from_bool(failures == 0 && !cases.is_empty());
    Ok(vec![artifact("levi_cases.csv", csv)])
}

fn claim_kernel_oracles(ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    const SIGMAS: f64 = 3.0;
    const PRODUCT_TOL: f64 = 0.05;
    let b = &ctx.config.bergman;
    let zero = C::new(0.0, 0.0);
    let mut csv = String::from("domain,z1,z2,mc,stderr,series_truncated,series_full\n");

    let disc: Arc<dyn Domain> = Arc::new(Product::disc(1.0));
    let basis = BasisFamily::monomials(vec![zero], vec![(0, b.disc_degree as i32)])?;
    let sampler = ImportanceSampler::uniform(disc.as_ref());
    let sys = gram_system(ctx.cache, disc, basis, &sampler, b.samples, ctx.seed(6, 0))?;
    let disc_points = [
        C::new(0.0, 0.0),
        C::new(0.25, 0.0),
        C::new(0.0, 0.3),
        C::new(-0.2, -0.35),
        C::from_polar(0.5, 2.0),
    ];
    let mut worst_sigma: f64 = 0.0;
    for z in disc_points {
        let est = sys.estimate(&[z])?;
        let oracle = disc_kernel_truncated(z, 1.0, b.disc_degree)?;
        worst_sigma = worst_sigma.max((est.value - oracle).abs() / est.stderr);
        csv.push_str(&format!(
            "disc,{},,{},{},{},{}\n",
            crate::domain::format_point(&[z]),
            real17::format(est.value),
            real17::format(est.stderr),
            real17::format(oracle),
            real17::format(disc_kernel(z, 1.0)?)
        ));
    }

    let prod = Product::annulus_times_disc();
    let factors = prod.factors.clone();
    let (d1, d2) = b.product_degree;
    let basis = BasisFamily::monomials(vec![zero, zero], vec![(-(d1 as i32), d1 as i32), (0, d2 as i32)])?;
    let prod: Arc<dyn Domain> = Arc::new(prod);
    let sampler = ImportanceSampler::uniform(prod.as_ref());
    let sys = gram_system(ctx.cache, prod, basis, &sampler, b.samples, ctx.seed(6, 1))?;
    let exact = ProductKernel::new(factors.clone());
    let (inner, outer) = match factors[0] {
        Planar::Annulus { inner, outer } => (inner, outer),
        Planar::Disc { .. } => unreachable!("the first factor is an annulus"),
    };
    let prod_points = [
        [C::new(1.0, 0.0), zero],
        [C::new(0.0, -0.8), C::new(0.3, 0.0)],
        [C::new(0.7, 0.5), C::new(0.0, -0.2)],
        [C::new(-0.9, 0.3), C::new(0.1, 0.25)],
        [C::new(-0.6, -0.7), C::new(-0.3, 0.1)],
    ];
    let mut worst_rel: f64 = 0.0;
    for z in prod_points {
        let est = sys.estimate(&z)?;
        let truncated = bergman::product_kernel(
            annulus_kernel_truncated(z[0], inner, outer, -(d1 as i32), d1 as i32)?,
            disc_kernel_truncated(z[1], 1.0, d2)?,
        );
        worst_rel = worst_rel.max((est.value - truncated).abs() / truncated);
        csv.push_str(&format!(
            "annulus x disc,{},{},{},{},{}\n",
            crate::domain::format_point(&z),
            real17::format(est.value),
            real17::format(est.stderr),
            real17::format(truncated),
            real17::format(exact.estimate(&z)?.value)
        ));
    }
    let ok_disc = worst_sigma <= SIGMAS;
    let ok_prod = worst_rel <= PRODUCT_TOL;
    rec.measure("disc max |mc - series| / stderr", worst_sigma)
        .measure("product max relative error", worst_rel)
        .measure("samples", b.samples as f64)
        .tolerance("disc stderr multiple", SIGMAS)
        .tolerance("product relative error", PRODUCT_TOL);
    fail_note(rec, ok_disc, "disc kernel off the series");
    fail_note(rec, ok_prod, "product rule off");
    rec.status = ClaimStatus::from_bool(ok_disc && ok_prod);
    Ok(vec![artifact("kernel_oracles.csv", csv)])
}

#[derive(Serialize)]
struct SlitScan<'a> {
    target: String,
    inside: &'a bergman::BlowupReport,
    outside: &'a bergman::BlowupReport,
    #[serde(with = "real17")]
    inside_condition: f64,
    #[serde(with = "real17")]
    outside_condition: f64,
}

fn claim_slit(ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    let b = &ctx.config.bergman;
    let dom: Arc<dyn Domain> = Arc::new(SlitDomain::new());
    let (i1, i2) = b.slit_degree;
    let inside_sampler = bergman::slit_inside_sampler(dom.as_ref())?;
    let inside = gram_system(
        ctx.cache,
        dom.clone(),
        bergman::slit_inside_basis(i1, i2),
        &inside_sampler,
        b.samples,
        ctx.seed(7, 0),
    )?;
    let outside = gram_system(
        ctx.cache,
        dom.clone(),
        bergman::slit_global_basis(i1, i2),
        &ImportanceSampler::uniform(dom.as_ref()),
        b.samples,
        ctx.seed(7, 1),
    )?;
    let up = bergman::blowup_scan(&inside, &bergman::slit_inside_path, b.steps)?;
    let other = bergman::blowup_scan(&outside, &bergman::slit_outside_path, b.steps)?;
    let ends = |r: &bergman::BlowupReport| {
        let v = r.values();
        (v[0], v[v.len() - 1])
    };
    let (ui, uo) = ends(&up);
    let (oi, oo) = ends(&other);
    rec.measure("inside first", ui)
        .measure("inside last", uo)
        .measure("inside condition", inside.condition())
        .measure("outside first", oi)
        .measure("outside last", oo)
        .measure("outside condition", outside.condition())
        .tolerance("blowup factor", 10.0)
        .tolerance("bounded factor", 2.0);
    let ok_in = up.verdict == Verdict::Blowup;
    let ok_out = other.verdict == Verdict::Bounded;
    fail_note(rec, ok_in, &format!("inside verdict {}", up.verdict.name()));
    fail_note(rec, ok_out, &format!("outside verdict {}", other.verdict.name()));
    rec.status = ClaimStatus::from_bool(ok_in && ok_out);
    if !ctx.artifacts {
        return Ok(Vec::new());
    }
    let doc = SlitScan {
        target: crate::domain::format_point(&bergman::slit_target()),
        inside: &up,
        outside: &other,
        inside_condition: inside.condition(),
        outside_condition: outside.condition(),
    };
    Ok(vec![
        artifact("bergman_inside.csv", up.to_csv()),
        artifact("bergman_outside.csv", other.to_csv()),
        artifact("bergman_scan.json", json(&doc)?),
    ])
}

fn claim_convexity(ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    let pairs = ctx.config.witness.convexity_pairs;
    let base = convexity_check(&SlitInterior, pairs, ctx.seed(8, 0));
    let control = convexity_check(&Product::annulus(0.5, 1.5), pairs, ctx.seed(8, 1));
    rec.measure("pairs", pairs as f64)
        .measure("base counterexamples", f64::from(u8::from(base.is_some())))
        .measure("annulus counterexamples", f64::from(u8::from(control.is_some())));
    fail_note(rec, base.is_none(), "base domain not convex");
    fail_note(rec, control.is_some(), "annulus control passed");
    rec.status = ClaimStatus::from_bool(base.is_none() && control.is_some());
    Ok(Vec::new())
}

/// Witness base points keep `|Re z1|` this large, where `D` agrees with the ball.
pub const WITNESS_MIN_RE: f64 = 0.65;
pub const WITNESS_RADIUS: f64 = 0.3;
const INWARD_STEP: f64 = 1e-3;

#[derive(Serialize)]
struct SupSummary {
    #[serde(with = "real17::vec")]
    radii: Vec<f64>,
    #[serde(with = "real17::vec")]
    scales: Vec<f64>,
    #[serde(with = "real17::vec")]
    inward_values: Vec<f64>,
    #[serde(with = "real17")]
    max_u: f64,
    probes: usize,
    violations_u: usize,
    violations_neg_log: usize,
}

fn claim_sup_witness(ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    const NEAR_FLOOR: f64 = -0.1;
    let w = &ctx.config.witness;
    let c = &ctx.config.construction;
    let dom = DomainSpec::CantorHartogs {
        r0: c.r0,
        eps: c.eps,
        depth: c.depth,
    }
    .build()?;
    let points = ball_boundary_samples(w.boundary_points, WITNESS_MIN_RE);
    let opts = PeakOptions {
        max_radius: WITNESS_RADIUS,
        seed: ctx.seed(9, 0),
        ..Default::default()
    };
    let ws = peak_family(Arc::new(SphereFn { dim: 2, radius: 1.0 }), &points, dom.as_ref(), opts)?;
    let exh = Exhaustion::geometric(ws.len(), 0.2, 0.02)?;
    let u = sup_regularized(ws.clone(), &exh, dom.as_ref(), w.domain_samples, ctx.seed(9, 1))?;
    let samples = sampling::uniform_points(dom.as_ref(), w.domain_samples, ctx.seed(9, 2));
    let max_u = samples.par_iter().map(|z| u.eval(z)).reduce(|| f64::NEG_INFINITY, f64::max);
    let inward: Vec<f64> = ws
        .iter()
        .map(|wj| {
            let nu = wj.outward_normal();
            let z: Vec<C> = wj.base.iter().zip(&nu).map(|(a, n)| a - n * INWARD_STEP).collect();
            u.eval(&z)
        })
        .collect();
    let focus: Vec<(Vec<C>, f64)> = ws.iter().map(|wj| (wj.base.clone(), wj.radius)).collect();
    let cap = ws.iter().map(|wj| wj.radius).fold(f64::INFINITY, f64::min) / 4.0;
    let probes = make_probes(dom.as_ref(), w.probes, ctx.seed(9, 3), &focus, cap);
    let r_u = psh_check_on(&|z: &[C]| u.eval(z), &probes);
    let r_log = psh_check_on(&|z: &[C]| neg_log_transform(u.eval(z)).unwrap_or(f64::INFINITY), &probes);
    let min_inward = inward.iter().copied().fold(f64::INFINITY, f64::min);
    rec.measure("witnesses", ws.len() as f64)
        .measure("domain samples", samples.len() as f64)
        .measure("max u", max_u)
        .measure("min inward value", min_inward)
        .measure("probes", probes.len() as f64)
        .measure("psh violations u", r_u.violations.len() as f64)
        .measure("psh violations -log(-u)", r_log.violations.len() as f64)
        .tolerance("inward value above", NEAR_FLOOR)
        .tolerance("inward distance", INWARD_STEP);
    let ok_neg = max_u < 0.0;
    let ok_psh = r_u.passed() && r_log.passed();
    let ok_near = min_inward > NEAR_FLOOR;
    fail_note(rec, ok_neg, "u >= 0 at a sample");
    fail_note(rec, ok_psh, "sub-mean-value violations");
    fail_note(rec, ok_near, "u too negative near a base point");
    rec.status = ClaimStatus::from_bool(ok_neg && ok_psh && ok_near);
    let summary = SupSummary {
        radii: ws.iter().map(|wj| wj.radius).collect(),
        scales: u.scales.clone(),
        inward_values: inward,
        max_u,
        probes: probes.len(),
        violations_u: r_u.violations.len(),
        violations_neg_log: r_log.violations.len(),
    };
    Ok(vec![artifact("sup_witness.json", json(&summary)?)])
}

fn claim_greedy(ctx: &Context, rec: &mut ClaimRecord) -> Result<Vec<Artifact>> {
    let slit = SlitDomain::new();
    let oracle = ProductKernel::new(Product::annulus_times_disc().factors);
    let zero = C::new(0.0, 0.0);
    let opts = GreedyOptions {
        levels: ctx.config.witness.levels,
        norm_samples: ctx.config.bergman.samples,
        seed: ctx.seed(10, 0),
        ..Default::default()
    };
    let (_, trace) = greedy_unbounded_witness(&slit, &oracle, &[C::new(1.5, 0.0), zero], &[C::new(-1.0, 0.0), zero], opts)?;
    for l in &trace.levels {
        rec.measure(&format!("|h(z_{})|", l.k), l.h_at_z)
            .measure(&format!("telescoping bound {}", l.k), l.telescoping_bound);
    }
    rec.measure("kernel norm", trace.kernel_norm)
        .measure("mc norm", trace.mc_norm)
        .measure("mc norm stderr", trace.mc_norm_stderr)
        .tolerance("growth offset", 1.0)
        .tolerance("telescoping offset", 1.0 / 6.0);
    let ok_growth = trace.growth_holds() && trace.levels.len() == opts.levels;
    let ok_norm = trace.mc_norm.is_finite() && trace.kernel_norm.is_finite();
    fail_note(rec, ok_growth, "growth |h(z_k)| >= k - 1 fails");
    fail_note(rec, ok_norm, "norm not finite");
    rec.status = ClaimStatus::from_bool(ok_growth && ok_norm);
    Ok(vec![artifact("greedy_trace.json", json(&trace)?)])
}
