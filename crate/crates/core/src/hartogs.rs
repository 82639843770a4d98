//! Hartogs domains `{|z| < 1, log|w| < phi(z)}` over the unit disc.
//!
//! `D0` uses `phi = psi(|z|) / 2`, which is strictly pseudoconcave over a
//! small disc around the origin. `D` adds the non-negative cap
//! `Phi(x + iy) = F(x / r0) chi(y / r0)` built from the Cantor-bump function,
//! making strictly pseudoconvex points dense along the boundary while the
//! Cantor remainder stays pseudoconcave through the inclusion `D0 ⊆ D`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cantor_bump::{CantorBumpFn, Membership};
use crate::error::{Error, Result};
use crate::real17;

pub const DEFAULT_R0: f64 = 0.3;
pub const DEFAULT_SMOOTHING: f64 = 0.01;
pub const DEFAULT_TOL: f64 = 1e-6;
/// Support of `chi` is `[-CHI_OUTER, CHI_OUTER]`.
pub const CHI_OUTER: f64 = 1.9;

const RADIAL_GRID: usize = 20_000;

/// A real function on a planar region. `hessian` is `None` where the field
/// is not twice differentiable (or the value is not computable exactly).
pub trait ScalarField2: Sync {
    fn value(&self, x: f64, y: f64) -> f64;
    fn gradient(&self, x: f64, y: f64) -> [f64; 2];
    /// `[f_xx, f_xy, f_yy]`
    fn hessian(&self, x: f64, y: f64) -> Option<[f64; 3]>;

    fn laplacian(&self, x: f64, y: f64) -> Option<f64> {
        self.hessian(x, y).map(|h| h[0] + h[2])
    }

    /// A representative point of the cell `[x0, x1] × [y0, y1]` at which the
    /// field is twice differentiable, if one is cheaply available.
    fn regular_point(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> (f64, f64) {
        (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }
}

fn smin_profile(u: f64) -> (f64, f64, f64) {
    // q(u) = (-u^4 + 6u^2 + 3) / 8 joins |u| with matching value, slope and curvature at |u| = 1
    if u.abs() >= 1.0 {
        (u.abs(), u.signum(), 0.0)
    } else {
        let u2 = u * u;
        (
            (-u2 * u2 + 6.0 * u2 + 3.0) / 8.0,
            (-4.0 * u2 * u + 12.0 * u) / 8.0,
            (12.0 - 12.0 * u2) / 8.0,
        )
    }
}

/// `psi(rho)`, a `C^2` regularization of `min{log(1 - rho^2), rho^2 - r0^2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    r0: f64,
    width: f64,
    crossing: f64,
}

impl RadialProfile {
    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn smoothing_width(&self) -> f64 {
        self.width
    }

    /// Where the two branches of the raw minimum cross.
    pub fn crossing(&self) -> f64 {
        self.crossing
    }

    pub fn raw(&self, rho: f64) -> f64 {
        (1.0 - rho * rho).ln().min(rho * rho - self.r0 * self.r0)
    }

    fn branches(&self, rho: f64) -> ([f64; 3], [f64; 3]) {
        let q = 1.0 - rho * rho;
        let f = [q.ln(), -2.0 * rho / q, -2.0 * (1.0 + rho * rho) / (q * q)];
        let g = [rho * rho - self.r0 * self.r0, 2.0 * rho, 2.0];
        (f, g)
    }

    fn split(&self, rho: f64) -> f64 {
        let (f, g) = self.branches(rho);
        0.5 * (f[0] - g[0])
    }

    /// `(psi, psi', psi'')` at radius `rho ∈ [0, 1)`.
    pub fn jet(&self, rho: f64) -> [f64; 3] {
        let (f, g) = self.branches(rho);
        let s = [0.5 * (f[0] - g[0]), 0.5 * (f[1] - g[1]), 0.5 * (f[2] - g[2])];
        let (m0, m1, m2) = smin_profile(s[0] / self.width);
        let m = [self.width * m0, m1, m2 / self.width];
        [
            0.5 * (f[0] + g[0]) - m[0],
            0.5 * (f[1] + g[1]) - m[1] * s[1],
            0.5 * (f[2] + g[2]) - m[2] * s[1] * s[1] - m[1] * s[2],
        ]
    }

    pub fn value(&self, rho: f64) -> f64 {
        self.jet(rho)[0]
    }

    /// Planar Laplacian of `psi(|z|)`, i.e. `psi'' + psi' / rho`.
    pub fn laplacian(&self, rho: f64) -> f64 {
        let [_, d1, d2] = self.jet(rho);
        if rho < 1e-8 {
            2.0 * d2
        } else {
            d2 + d1 / rho
        }
    }

    /// True where `psi` coincides with the raw minimum.
    pub fn is_unsmoothed(&self, rho: f64) -> bool {
        self.split(rho).abs() >= self.width
    }

    /// Hessian of `psi(|z|)` in the real coordinates of `z = x + iy`.
    pub fn planar_hessian(&self, x: f64, y: f64) -> [f64; 3] {
        let rho = x.hypot(y);
        let [_, d1, d2] = self.jet(rho);
        if rho < 1e-8 {
            return [d2, 0.0, d2];
        }
        let (c, s) = (x / rho, y / rho);
        let t = d1 / rho;
        [d2 * c * c + t * s * s, (d2 - t) * c * s, d2 * s * s + t * c * c]
    }

    pub fn planar_gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let rho = x.hypot(y);
        if rho == 0.0 {
            return [0.0, 0.0];
        }
        let d1 = self.jet(rho)[1];
        [d1 * x / rho, d1 * y / rho]
    }
}

/// Builds `psi` and re-checks the Laplacian bullets on a radial grid.
pub fn build_psi(r0: f64, smoothing_width: f64) -> Result<RadialProfile> {
    if !(r0 > 0.0 && r0 < 1.0 / 3.0) {
        return Err(Error::ConstraintViolation(format!("r0 = {r0} outside (0, 1/3)")));
    }
    if !(smoothing_width > 0.0) {
        return Err(Error::ConstraintViolation("smoothing width must be positive".into()));
    }
    let mut profile = RadialProfile {
        r0,
        width: smoothing_width,
        crossing: f64::NAN,
    };
    // the split s = (f - g) / 2 is strictly decreasing, so the zone |s| < w is an interval
    if !(profile.split(r0 / 2.0) >= smoothing_width && profile.split(r0) <= -smoothing_width) {
        return Err(Error::ConstraintViolation(format!(
            "smoothing zone of width {smoothing_width} leaves (r0/2, r0)"
        )));
    }
    let (mut lo, mut hi) = (r0 / 2.0, r0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if profile.split(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    profile.crossing = 0.5 * (lo + hi);

    for k in 0..RADIAL_GRID {
        let rho = 0.999 * k as f64 / RADIAL_GRID as f64;
        let lap = profile.laplacian(rho);
        let bad = lap > 4.0 + 1e-9
            || (rho >= r0 && lap > -4.0)
            || (rho <= r0 / 2.0 && (lap - 4.0).abs() > 1e-9);
        if bad {
            return Err(Error::ConstraintViolation(format!(
                "Laplacian of psi is {lap} at rho = {rho}"
            )));
        }
    }
    Ok(profile)
}

/// Even cutoff: 1 on `[-1, 1]`, a quintic smoothstep down to 0 at `±CHI_OUTER`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    second_sup: f64,
}

impl Cutoff {
    pub fn new() -> Self {
        let mut cut = Cutoff { second_sup: 0.0 };
        let n = 100_000;
        cut.second_sup = (0..=n)
            .map(|k| cut.jet(1.0 + (CHI_OUTER - 1.0) * k as f64 / n as f64)[2].abs())
            .fold(0.0, f64::max);
        cut
    }

    /// Grid sup of `|chi''|`.
    pub fn second_sup(&self) -> f64 {
        self.second_sup
    }

    /// `(chi, chi', chi'')`.
    pub fn jet(&self, t: f64) -> [f64; 3] {
        let a = t.abs();
        if a <= 1.0 {
            return [1.0, 0.0, 0.0];
        }
        if a >= CHI_OUTER {
            return [0.0, 0.0, 0.0];
        }
        let l = CHI_OUTER - 1.0;
        let u = (a - 1.0) / l;
        let s0 = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        let s1 = 30.0 * u * u * (1.0 - u) * (1.0 - u);
        let s2 = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
        let sign = t.signum();
        [1.0 - s0, -sign * s1 / l, -s2 / (l * l)]
    }
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::new()
    }
}

/// `Phi(x + iy) = F(x / r0) chi(y / r0)`.
#[derive(Debug, Clone)]
pub struct CapField {
    f: CantorBumpFn,
    chi: Cutoff,
    r0: f64,
}

impl CapField {
    pub fn new(f: CantorBumpFn, chi: Cutoff, r0: f64) -> Self {
        CapField { f, chi, r0 }
    }

    pub fn bump(&self) -> &CantorBumpFn {
        &self.f
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.chi
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let u = x / self.r0;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        self.f.value(u) * self.chi.jet(y / self.r0)[0]
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let u = x / self.r0;
        if u.abs() >= 1.0 {
            return [0.0, 0.0];
        }
        let c = self.chi.jet(y / self.r0);
        [
            self.f.derivative(u) * c[0] / self.r0,
            self.f.value(u) * c[1] / self.r0,
        ]
    }

    pub fn hessian(&self, x: f64, y: f64) -> Option<[f64; 3]> {
        let u = x / self.r0;
        let c = self.chi.jet(y / self.r0);
        if u.abs() >= 1.0 || c == [0.0; 3] {
            return Some([0.0; 3]);
        }
        let f2 = self.f.second_on_plateau(u).ok()?;
        let r2 = self.r0 * self.r0;
        Some([
            f2 * c[0] / r2,
            self.f.derivative(u) * c[1] / r2,
            self.f.value(u) * c[2] / r2,
        ])
    }
}

/// `phi = psi(|z|) / 2 (+ Phi)`.
#[derive(Debug, Clone)]
pub struct HartogsField {
    psi: RadialProfile,
    cap: Option<CapField>,
}

impl HartogsField {
    pub fn d0(psi: RadialProfile) -> Self {
        HartogsField { psi, cap: None }
    }

    pub fn with_cap(psi: RadialProfile, cap: CapField) -> Self {
        HartogsField {
            psi,
            cap: Some(cap),
        }
    }

    pub fn psi(&self) -> &RadialProfile {
        &self.psi
    }

    pub fn cap(&self) -> Option<&CapField> {
        self.cap.as_ref()
    }
}

impl ScalarField2 for HartogsField {
    fn value(&self, x: f64, y: f64) -> f64 {
        let base = 0.5 * self.psi.value(x.hypot(y));
        base + self.cap.as_ref().map_or(0.0, |c| c.value(x, y))
    }

    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let g = self.psi.planar_gradient(x, y);
        let c = self.cap.as_ref().map_or([0.0; 2], |c| c.gradient(x, y));
        [0.5 * g[0] + c[0], 0.5 * g[1] + c[1]]
    }

    fn hessian(&self, x: f64, y: f64) -> Option<[f64; 3]> {
        let h = self.psi.planar_hessian(x, y);
        let c = match &self.cap {
            Some(cap) => cap.hessian(x, y)?,
            None => [0.0; 3],
        };
        Some([0.5 * h[0] + c[0], 0.5 * h[1] + c[1], 0.5 * h[2] + c[2]])
    }

    fn regular_point(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> (f64, f64) {
        let center = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let Some(cap) = &self.cap else {
            return center;
        };
        if self.hessian(center.0, center.1).is_some() {
            return center;
        }
        let r0 = cap.r0;
        let tree = cap.f.tree();
        match tree.find_plateau(x0 / r0, x1 / r0, tree.depth()) {
            Some((_, _, (lo, hi))) => (0.5 * (lo + hi) * r0, center.1),
            None => center,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryClass {
    StrictlyPseudoconvex,
    StrictlyPseudoconcave,
    Indeterminate,
}

impl BoundaryClass {
    pub fn code(self) -> &'static str {
        match self {
            BoundaryClass::StrictlyPseudoconvex => "PSC+",
            BoundaryClass::StrictlyPseudoconcave => "PSC-",
            BoundaryClass::Indeterminate => "IND",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointClass {
    pub class: BoundaryClass,
    pub laplacian: Option<f64>,
}

/// Sign of `Δphi(z0)`: negative means the boundary over `z0` is strictly pseudoconvex.
pub fn classify_point(field: &dyn ScalarField2, z0: Complex64, tol: f64) -> PointClass {
    let laplacian = field.laplacian(z0.re, z0.im);
    let class = match laplacian {
        Some(l) if l < -tol => BoundaryClass::StrictlyPseudoconvex,
        Some(l) if l > tol => BoundaryClass::StrictlyPseudoconcave,
        _ => BoundaryClass::Indeterminate,
    };
    PointClass { class, laplacian }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub margin: f64,
    pub tol: f64,
}

impl GridSpec {
    pub fn new(n: usize) -> Self {
        GridSpec {
            n,
            margin: 0.02,
            tol: DEFAULT_TOL,
        }
    }

    pub fn cell_size(&self) -> f64 {
        2.0 / self.n as f64
    }

    pub fn cell_bounds(&self, ix: usize, iy: usize) -> (f64, f64, f64, f64) {
        let h = self.cell_size();
        let x0 = -1.0 + ix as f64 * h;
        let y0 = -1.0 + iy as f64 * h;
        (x0, x0 + h, y0, y0 + h)
    }

    pub fn cell_in_disc(&self, ix: usize, iy: usize) -> bool {
        let (x0, x1, y0, y1) = self.cell_bounds(ix, iy);
        (0.5 * (x0 + x1)).hypot(0.5 * (y0 + y1)) < 1.0 - self.margin
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellClass {
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    pub y: f64,
    pub laplacian: Option<f64>,
    pub class: BoundaryClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub pseudoconvex: usize,
    pub pseudoconcave: usize,
    pub indeterminate: usize,
}

#[derive(Debug, Clone)]
pub struct ClassificationMap {
    pub grid: GridSpec,
    /// Cells inside the disc, in row-major `(iy, ix)` order.
    pub cells: Vec<CellClass>,
}

impl ClassificationMap {
    pub fn counts(&self) -> ClassCounts {
        let mut c = ClassCounts::default();
        for cell in &self.cells {
            match cell.class {
                BoundaryClass::StrictlyPseudoconvex => c.pseudoconvex += 1,
                BoundaryClass::StrictlyPseudoconcave => c.pseudoconcave += 1,
                BoundaryClass::Indeterminate => c.indeterminate += 1,
            }
        }
        c
    }

    /// Every 2×2 block whose four cells all lie inside the disc contains a
    /// strictly pseudoconvex cell. Returns the offending blocks.
    pub fn sparse_blocks(&self) -> Vec<(usize, usize)> {
        let n = self.grid.n;
        let mut grid = vec![None; n * n];
        for c in &self.cells {
            grid[c.iy * n + c.ix] = Some(c.class);
        }
        let mut bad = Vec::new();
        for by in 0..n / 2 {
            for bx in 0..n / 2 {
                let block: Vec<_> = [(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|(dx, dy)| grid[(2 * by + dy) * n + 2 * bx + dx])
                    .collect();
                if block.iter().all(Option::is_some)
                    && !block.contains(&Some(BoundaryClass::StrictlyPseudoconvex))
                {
                    bad.push((bx, by));
                }
            }
        }
        bad
    }

    pub fn is_dense(&self) -> bool {
        self.sparse_blocks().is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,laplacian,class")?;
        for c in &self.cells {
            let lap = c.laplacian.map(real17::format).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{}",
                real17::format(c.x),
                real17::format(c.y),
                lap,
                c.class.code()
            )?;
        }
        Ok(())
    }
}

pub fn scan_boundary(field: &dyn ScalarField2, grid: GridSpec) -> ClassificationMap {
    let n = grid.n;
    let cells = (0..n * n)
        .into_par_iter()
        .filter_map(|k| {
            let (ix, iy) = (k % n, k / n);
            if !grid.cell_in_disc(ix, iy) {
                return None;
            }
            let (x0, x1, y0, y1) = grid.cell_bounds(ix, iy);
            let (x, y) = field.regular_point(x0, x1, y0, y1);
            let pc = classify_point(field, Complex64::new(x, y), grid.tol);
            Some(CellClass {
                ix,
                iy,
                x,
                y,
                laplacian: pc.laplacian,
                class: pc.class,
            })
        })
        .collect();
    ClassificationMap { grid, cells }
}

/// `{(z, w) : |z| < 1, log|w| < phi(z)}`.
#[derive(Debug, Clone)]
pub struct HartogsDomain {
    field: HartogsField,
}

impl HartogsDomain {
    pub fn new(field: HartogsField) -> Self {
        HartogsDomain { field }
    }

    pub fn field(&self) -> &HartogsField {
        &self.field
    }

    pub fn phi(&self, z: Complex64) -> f64 {
        self.field.value(z.re, z.im)
    }

    pub fn contains(&self, z: Complex64, w: Complex64) -> bool {
        if !(z.norm() < 1.0) {
            return false;
        }
        w == Complex64::new(0.0, 0.0) || w.norm().ln() < self.phi(z)
    }
}

pub fn membership(dom: &HartogsDomain, z: Complex64, w: Complex64) -> bool {
    dom.contains(z, w)
}

/// Constants consumed from the Cantor-bump construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapConstants {
    #[serde(with = "real17")]
    pub c1: f64,
    #[serde(with = "real17")]
    pub c2: f64,
    #[serde(with = "real17")]
    pub chi_second_sup: f64,
}

/// `C1` keeps `Phi`'s cutoff curvature below the `-2` margin of `psi / 2`
/// outside `|z| < r0`; `C2` makes `F''(x / r0) / r0^2` dominate `Δ(psi / 2) = 2`.
pub fn cap_constants(r0: f64, chi: &Cutoff) -> CapConstants {
    CapConstants {
        c1: 0.9 * r0 * r0 / chi.second_sup(),
        c2: (16.0 * r0 * r0).max(1.0),
        chi_second_sup: chi.second_sup(),
    }
}

/// Both domains of the construction.
#[derive(Debug, Clone)]
pub struct HartogsPair {
    pub d0: HartogsDomain,
    pub d: HartogsDomain,
    pub constants: CapConstants,
}

pub fn build_pair(r0: f64, smoothing_width: f64, eps: f64, depth: usize) -> Result<HartogsPair> {
    let psi = build_psi(r0, smoothing_width)?;
    let chi = Cutoff::new();
    let constants = cap_constants(r0, &chi);
    let f = CantorBumpFn::construct(eps, constants.c1, constants.c2, depth)?;
    let cap = CapField::new(f, chi, r0);
    Ok(HartogsPair {
        d0: HartogsDomain::new(HartogsField::d0(psi)),
        d: HartogsDomain::new(HartogsField::with_cap(psi, cap)),
        constants,
    })
}

/// True when `x` lies on a plateau line `x ∈ r0·U` resolved at or before `max_level`.
pub fn on_plateau_line(cap: &CapField, x: f64, max_level: usize) -> bool {
    matches!(cap.f.tree().membership(x / cap.r0), Membership::InOpenSet { level } if level <= max_level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair() -> HartogsPair {
        build_pair(DEFAULT_R0, DEFAULT_SMOOTHING, 0.5, 8).unwrap()
    }

    #[test]
    fn psi_reference_values() {
        let psi = build_psi(0.3, 0.01).unwrap();
        assert_eq!(psi.raw(0.0), -0.09);
        assert!((psi.value(0.0) + 0.09).abs() < 1e-15);
        assert!(psi.crossing() > 0.15 && psi.crossing() < 0.3);
        assert!((psi.laplacian(0.3 * 0.3 / 4.0) - 4.0).abs() < 1e-12);
        assert!(psi.is_unsmoothed(0.15) && psi.is_unsmoothed(0.3));
        assert!(!psi.is_unsmoothed(psi.crossing()));
    }

    #[test]
    fn psi_rejects_wide_smoothing() {
        assert!(matches!(build_psi(0.3, 0.2), Err(Error::ConstraintViolation(_))));
        assert!(build_psi(0.4, 0.01).is_err());
    }

    #[test]
    fn radial_laplacian_matches_finite_differences() {
        let psi = build_psi(0.3, 0.01).unwrap();
        let h = 1e-4;
        for &rho in &[0.05, 0.1, 0.14, 0.35, 0.5, 0.8] {
            let (x, y) = (rho * 0.6, rho * 0.8);
            let f = |a: f64, b: f64| psi.value(a.hypot(b));
            let fd = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
            let exact = psi.laplacian(rho);
            assert!((fd - exact).abs() <= 1e-3 * exact.abs(), "rho {rho}: {fd} vs {exact}");
        }
    }

    #[test]
    fn cutoff_shape() {
        let chi = Cutoff::new();
        assert_eq!(chi.jet(0.5), [1.0, 0.0, 0.0]);
        assert_eq!(chi.jet(-1.95), [0.0, 0.0, 0.0]);
        let expected = 10.0 / 3f64.sqrt() / 0.81;
        assert!((chi.second_sup() - expected).abs() < 1e-6);
        let t = 1.4;
        let h = 1e-5;
        let fd = (chi.jet(t + h)[0] - chi.jet(t - h)[0]) / (2.0 * h);
        assert!((fd - chi.jet(t)[1]).abs() < 1e-8);
    }

    #[test]
    fn membership_examples() {
        let p = pair();
        let z = |a: f64| Complex64::new(a, 0.0);
        assert!(membership(&p.d, z(0.0), z(0.0)));
        assert!(!membership(&p.d0, z(0.99), z(0.99)));
        assert!(!membership(&p.d, z(1.0), z(0.0)));
    }

    #[test]
    fn d_is_the_ball_outside_r0() {
        let p = pair();
        for &(zr, zi, w) in &[(0.5, 0.1, 0.8), (0.5, 0.1, 0.85), (-0.2, 0.7, 0.5), (0.0, 0.9, 0.43)] {
            let z = Complex64::new(zr, zi);
            let w = Complex64::new(w, 0.0);
            let in_ball = z.norm_sqr() + w.norm_sqr() < 1.0;
            assert_eq!(p.d.contains(z, w), in_ball);
            assert_eq!(p.d0.contains(z, w), in_ball);
        }
    }

    #[test]
    fn classify_examples() {
        let p = pair();
        let d = p.d.field();
        let d0 = p.d0.field();
        let convex = classify_point(d, Complex64::new(0.6, 0.3), DEFAULT_TOL);
        assert_eq!(convex.class, BoundaryClass::StrictlyPseudoconvex);
        let on_line = classify_point(d, Complex64::new(0.0, 0.2), DEFAULT_TOL);
        assert_eq!(on_line.class, BoundaryClass::StrictlyPseudoconvex);
        assert!(on_line.laplacian.unwrap() < -2.0);
        let concave = classify_point(d0, Complex64::new(0.05, -0.1), DEFAULT_TOL);
        assert_eq!(concave.class, BoundaryClass::StrictlyPseudoconcave);
        assert!((concave.laplacian.unwrap() - 2.0).abs() < 1e-9);
        // Cantor endpoint x / r0 = 1 is outside the cap's support, pick an interior candidate
        let cap = d.cap().unwrap();
        let edge = cap.bump().tree().plateau(0, 0).1 * DEFAULT_R0;
        let ind = classify_point(d, Complex64::new(edge, 0.0), DEFAULT_TOL);
        assert_eq!(ind.class, BoundaryClass::Indeterminate);
    }

    #[test]
    fn cap_hessian_matches_finite_differences() {
        let p = pair();
        let field = p.d.field();
        let cap = field.cap().unwrap();
        // on the level-0 plateau with y inside the cutoff's transition
        let (x, y) = (0.001, 0.4);
        let h = field.hessian(x, y).unwrap();
        let step = 1e-5;
        let gx = |a: f64, b: f64| field.gradient(a, b);
        let fxx = (gx(x + step, y)[0] - gx(x - step, y)[0]) / (2.0 * step);
        let fyy = (gx(x, y + step)[1] - gx(x, y - step)[1]) / (2.0 * step);
        let fxy = (gx(x, y + step)[0] - gx(x, y - step)[0]) / (2.0 * step);
        assert!((fxx - h[0]).abs() < 1e-5 * h[0].abs().max(1.0));
        assert!((fxy - h[1]).abs() < 1e-5 * h[1].abs().max(1.0));
        assert!((fyy - h[2]).abs() < 1e-5 * h[2].abs().max(1.0));
        assert!(cap.value(x, y) > 0.0);
    }

    #[test]
    fn small_scan_is_dense() {
        let p = pair();
        let map = scan_boundary(p.d.field(), GridSpec::new(64));
        assert!(map.is_dense());
        let counts = map.counts();
        assert_eq!(counts.pseudoconvex + counts.pseudoconcave + counts.indeterminate, map.cells.len());
        let mut csv = Vec::new();
        map.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("x,y,laplacian,class\n"));
        assert_eq!(text.lines().count(), map.cells.len() + 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn cap_is_non_negative_and_d0_inside_d(zr in -1.0f64..1.0, zi in -1.0f64..1.0, wr in -1.0f64..1.0, wi in -1.0f64..1.0) {
            let p = pair();
            let cap = p.d.field().cap().unwrap();
            prop_assert!(cap.value(zr, zi) >= 0.0);
            prop_assert!(cap.value(zr, zi) <= p.constants.c1);
            if zr.abs() >= DEFAULT_R0 {
                prop_assert_eq!(cap.value(zr, zi), 0.0);
            }
            let z = Complex64::new(zr, zi);
            let w = Complex64::new(wr, wi);
            if p.d0.contains(z, w) {
                prop_assert!(p.d.contains(z, w));
            }
        }

        #[test]
        fn annulus_margin(rho in 0.3f64..0.98, theta in 0.0f64..std::f64::consts::TAU) {
            let p = pair();
            let (x, y) = (rho * theta.cos(), rho * theta.sin());
            if let Some(lap) = p.d.field().laplacian(x, y) {
                if (x / DEFAULT_R0).abs() < 1.0 && (y / DEFAULT_R0).abs() < 1.0 {
                    // plateau lines inside the square carry the strong bound instead
                    prop_assert!(lap < -2.0);
                } else {
                    prop_assert!(lap <= -1.0);
                }
            }
        }
    }
}
