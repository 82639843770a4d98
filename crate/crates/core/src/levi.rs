//! Levi forms, tangent adjustment and second-order analytic discs.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::hartogs::{HartogsField, ScalarField2};

type C = Complex64;

const FD_GRADIENT_STEP: f64 = 1e-6;
const FD_HESSIAN_STEP: f64 = 1e-4;
const DEGENERATE_GRADIENT: f64 = 1e-12;

/// A real function `r` near a boundary piece, `D = {r < 0}` locally.
///
/// `gradient` is `(∂r/∂z_j)_j`, `complex_hessian` is `(∂²r/∂z_j∂z̄_k)` and
/// `holomorphic_hessian` is `(∂²r/∂z_j∂z_k)`. The defaults use central finite
/// differences with one Richardson step.
pub trait DefiningFn: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, z: &[C]) -> f64;

    fn gradient(&self, z: &[C]) -> Vec<C> {
        fd_gradient(self, z)
    }

    fn complex_hessian(&self, z: &[C]) -> DMatrix<C> {
        fd_hessians(self, z).0
    }

    fn holomorphic_hessian(&self, z: &[C]) -> DMatrix<C> {
        fd_hessians(self, z).1
    }

    fn analytic(&self) -> bool {
        false
    }
}

fn local_scale(z: &[C]) -> f64 {
    z.iter().map(|c| c.re.abs().max(c.im.abs())).fold(1.0, f64::max)
}

fn shifted(z: &[C], moves: &[(usize, f64)]) -> Vec<C> {
    let mut p = z.to_vec();
    for &(k, t) in moves {
        let j = k / 2;
        if k % 2 == 0 {
            p[j].re += t;
        } else {
            p[j].im += t;
        }
    }
    p
}

fn fd_real_gradient<R: DefiningFn + ?Sized>(r: &R, z: &[C], h: f64) -> Vec<f64> {
    (0..2 * z.len())
        .map(|k| (r.value(&shifted(z, &[(k, h)])) - r.value(&shifted(z, &[(k, -h)]))) / (2.0 * h))
        .collect()
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

pub fn fd_gradient<R: DefiningFn + ?Sized>(r: &R, z: &[C]) -> Vec<C> {
    let h = FD_GRADIENT_STEP * local_scale(z);
    let g1 = fd_real_gradient(r, z, h);
    let g2 = fd_real_gradient(r, z, h / 2.0);
    (0..z.len())
        .map(|j| {
            let rx = richardson(g1[2 * j], g2[2 * j]);
            let ry = richardson(g1[2 * j + 1], g2[2 * j + 1]);
            C::new(0.5 * rx, -0.5 * ry)
        })
        .collect()
}

fn fd_real_hessian<R: DefiningFn + ?Sized>(r: &R, z: &[C], h: f64) -> DMatrix<f64> {
    let m = 2 * z.len();
    let f0 = r.value(z);
    let mut out = DMatrix::zeros(m, m);
    for u in 0..m {
        let fp = r.value(&shifted(z, &[(u, h)]));
        let fm = r.value(&shifted(z, &[(u, -h)]));
        out[(u, u)] = (fp - 2.0 * f0 + fm) / (h * h);
        for v in u + 1..m {
            let pp = r.value(&shifted(z, &[(u, h), (v, h)]));
            let pm = r.value(&shifted(z, &[(u, h), (v, -h)]));
            let mp = r.value(&shifted(z, &[(u, -h), (v, h)]));
            let mm = r.value(&shifted(z, &[(u, -h), (v, -h)]));
            let d = (pp - pm - mp + mm) / (4.0 * h * h);
            out[(u, v)] = d;
            out[(v, u)] = d;
        }
    }
    out
}

/// Complex and holomorphic Hessians assembled from the real Hessian.
pub fn fd_hessians<R: DefiningFn + ?Sized>(r: &R, z: &[C]) -> (DMatrix<C>, DMatrix<C>) {
    let h = FD_HESSIAN_STEP * local_scale(z);
    let coarse = fd_real_hessian(r, z, h);
    let fine = fd_real_hessian(r, z, h / 2.0);
    let real = fine.zip_map(&coarse, |f, c| richardson(c, f));
    complex_parts(&real)
}

/// Splits a real Hessian in `(x_1, y_1, ..., x_n, y_n)` order.
pub fn complex_parts(real: &DMatrix<f64>) -> (DMatrix<C>, DMatrix<C>) {
    let n = real.nrows() / 2;
    let mut levi = DMatrix::zeros(n, n);
    let mut holo = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let xx = real[(2 * j, 2 * k)];
            let yy = real[(2 * j + 1, 2 * k + 1)];
            let xy = real[(2 * j, 2 * k + 1)];
            let yx = real[(2 * j + 1, 2 * k)];
            levi[(j, k)] = C::new(0.25 * (xx + yy), 0.25 * (xy - yx));
            holo[(j, k)] = C::new(0.25 * (xx - yy), -0.25 * (xy + yx));
        }
    }
    (levi, holo)
}

/// `|z|^2 - R^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereFn {
    pub dim: usize,
    pub radius: f64,
}

impl DefiningFn for SphereFn {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &[C]) -> f64 {
        z.iter().map(|c| c.norm_sqr()).sum::<f64>() - self.radius * self.radius
    }

    fn gradient(&self, z: &[C]) -> Vec<C> {
        z.iter().map(|c| c.conj()).collect()
    }

    fn complex_hessian(&self, _z: &[C]) -> DMatrix<C> {
        DMatrix::identity(self.dim, self.dim)
    }

    fn holomorphic_hessian(&self, _z: &[C]) -> DMatrix<C> {
        DMatrix::zeros(self.dim, self.dim)
    }

    fn analytic(&self) -> bool {
        true
    }
}

/// `z^T H z̄ + Re(z^T Q z) + Re(l^T z) + c` with `H` Hermitian and `Q` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadricFn {
    pub h: DMatrix<C>,
    pub q: DMatrix<C>,
    pub l: DVector<C>,
    pub c: f64,
}

impl QuadricFn {
    pub fn new(h: DMatrix<C>, q: DMatrix<C>, l: DVector<C>, c: f64) -> Result<Self> {
        let n = h.nrows();
        let shapes = h.ncols() == n && q.nrows() == n && q.ncols() == n && l.len() == n;
        if !shapes || (&h - h.adjoint()).norm() > 1e-14 || (&q - q.transpose()).norm() > 1e-14 {
            return Err(Error::ConstraintViolation(
                "quadric needs Hermitian H, symmetric Q and matching sizes".into(),
            ));
        }
        Ok(QuadricFn { h, q, l, c })
    }
}

impl DefiningFn for QuadricFn {
    fn dim(&self) -> usize {
        self.h.nrows()
    }

    fn value(&self, z: &[C]) -> f64 {
        let v = DVector::from_column_slice(z);
        let herm = (v.transpose() * &self.h * v.map(|c| c.conj()))[(0, 0)].re;
        let quad = (v.transpose() * &self.q * &v)[(0, 0)].re;
        let lin = (self.l.transpose() * &v)[(0, 0)].re;
        herm + quad + lin + self.c
    }

    fn gradient(&self, z: &[C]) -> Vec<C> {
        let v = DVector::from_column_slice(z);
        let g = &self.h * v.map(|c| c.conj()) + &self.q * &v + self.l.map(|c| c * 0.5);
        g.iter().copied().collect()
    }

    fn complex_hessian(&self, _z: &[C]) -> DMatrix<C> {
        self.h.clone()
    }

    fn holomorphic_hessian(&self, _z: &[C]) -> DMatrix<C> {
        self.q.clone()
    }

    fn analytic(&self) -> bool {
        true
    }
}

/// `log|w| - phi(z)` for a Hartogs domain over the disc, in coordinates `(z, w)`.
#[derive(Debug, Clone)]
pub struct HartogsGraphFn {
    pub field: HartogsField,
}

impl DefiningFn for HartogsGraphFn {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, p: &[C]) -> f64 {
        p[1].norm().ln() - self.field.value(p[0].re, p[0].im)
    }

    fn gradient(&self, p: &[C]) -> Vec<C> {
        let [gx, gy] = self.field.gradient(p[0].re, p[0].im);
        vec![C::new(-0.5 * gx, 0.5 * gy), 0.5 / p[1]]
    }

    fn complex_hessian(&self, p: &[C]) -> DMatrix<C> {
        match self.field.hessian(p[0].re, p[0].im) {
            Some([xx, _, yy]) => {
                DMatrix::from_row_slice(2, 2, &[C::new(-0.25 * (xx + yy), 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)])
            }
            None => fd_hessians(self, p).0,
        }
    }

    fn holomorphic_hessian(&self, p: &[C]) -> DMatrix<C> {
        match self.field.hessian(p[0].re, p[0].im) {
            Some([xx, xy, yy]) => DMatrix::from_row_slice(
                2,
                2,
                &[C::new(-0.25 * (xx - yy), 0.5 * xy), C::new(0.0, 0.0), C::new(0.0, 0.0), -0.5 / (p[1] * p[1])],
            ),
            None => fd_hessians(self, p).1,
        }
    }

    fn analytic(&self) -> bool {
        true
    }
}

/// `r_A = (exp(A r) - 1) / A`, same zero set, Levi form gains `A |∂r|^2`.
#[derive(Clone)]
pub struct ExpConvexified {
    pub inner: Arc<dyn DefiningFn>,
    pub a: f64,
}

impl DefiningFn for ExpConvexified {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, z: &[C]) -> f64 {
        (self.a * self.inner.value(z)).exp_m1() / self.a
    }

    fn gradient(&self, z: &[C]) -> Vec<C> {
        let e = (self.a * self.inner.value(z)).exp();
        self.inner.gradient(z).into_iter().map(|g| g * e).collect()
    }

    fn complex_hessian(&self, z: &[C]) -> DMatrix<C> {
        let e = (self.a * self.inner.value(z)).exp();
        let g = DVector::from_vec(self.inner.gradient(z));
        (self.inner.complex_hessian(z) + &g * g.adjoint() * C::from(self.a)) * C::from(e)
    }

    fn holomorphic_hessian(&self, z: &[C]) -> DMatrix<C> {
        let e = (self.a * self.inner.value(z)).exp();
        let g = DVector::from_vec(self.inner.gradient(z));
        (self.inner.holomorphic_hessian(z) + &g * g.transpose() * C::from(self.a)) * C::from(e)
    }

    fn analytic(&self) -> bool {
        self.inner.analytic()
    }
}

/// `Σ ∂²r/∂z_j∂z̄_k a_j ā_k` without discarding the imaginary residue.
pub fn levi_form_complex(r: &dyn DefiningFn, z: &[C], a: &[C]) -> C {
    hermitian_form(&r.complex_hessian(z), a)
}

fn hermitian_form(h: &DMatrix<C>, a: &[C]) -> C {
    let mut acc = C::new(0.0, 0.0);
    for j in 0..a.len() {
        for k in 0..a.len() {
            acc += h[(j, k)] * a[j] * a[k].conj();
        }
    }
    acc
}

pub fn levi_form(r: &dyn DefiningFn, z: &[C], a: &[C]) -> f64 {
    levi_form_complex(r, z, a).re
}

fn pivot(grad: &[C]) -> Result<usize> {
    let (p, m) = grad
        .iter()
        .enumerate()
        .map(|(j, g)| (j, g.norm()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if m < DEGENERATE_GRADIENT {
        return Err(Error::DegenerateGradient(m));
    }
    Ok(p)
}

fn pairing(grad: &[C], a: &[C]) -> C {
    grad.iter().zip(a).map(|(g, x)| g * x).sum()
}

/// Projects `a` onto the complex tangent space by correcting the coordinate
/// where `|∂r/∂z_j|` is largest. Returns the new vector and that coordinate.
pub fn tangent_adjust_with_pivot(r: &dyn DefiningFn, z: &[C], a: &[C]) -> Result<(Vec<C>, usize)> {
    let grad = r.gradient(z);
    let p = pivot(&grad)?;
    let mut out = a.to_vec();
    out[p] -= pairing(&grad, a) / grad[p];
    Ok((out, p))
}

pub fn tangent_adjust(r: &dyn DefiningFn, z: &[C], a: &[C]) -> Result<Vec<C>> {
    Ok(tangent_adjust_with_pivot(r, z, a)?.0)
}

/// `λ ↦ z + λ a(z) + λ^2 b1 e_p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticDisc {
    #[serde(with = "crate::real17::cvec")]
    pub base: Vec<C>,
    #[serde(with = "crate::real17::cvec")]
    pub direction: Vec<C>,
    #[serde(with = "crate::real17::cvec")]
    pub adjusted: Vec<C>,
    pub pivot: usize,
    #[serde(with = "crate::real17::complex")]
    pub b1: C,
}

impl AnalyticDisc {
    pub fn eval(&self, lambda: C) -> Vec<C> {
        let mut p: Vec<C> = self.base.iter().zip(&self.adjusted).map(|(z, a)| z + lambda * a).collect();
        p[self.pivot] += lambda * lambda * self.b1;
        p
    }
}

pub const BOUNDARY_TOL: f64 = 1e-8;

/// The second-order disc tangent to `∂D` at `z` in direction `a`, with the
/// quadratic coefficient cancelling the holomorphic Hessian term of `r ∘ φ`.
pub fn levi_disc(r: &dyn DefiningFn, z: &[C], a: &[C]) -> Result<AnalyticDisc> {
    let rz = r.value(z);
    if rz.abs() > BOUNDARY_TOL {
        return Err(Error::ConstraintViolation(format!("base point has r = {rz:e}, not on the boundary")));
    }
    let grad = r.gradient(z);
    let (adjusted, p) = tangent_adjust_with_pivot(r, z, a)?;
    let q = r.holomorphic_hessian(z);
    let mut qaa = C::new(0.0, 0.0);
    for j in 0..a.len() {
        for k in 0..a.len() {
            qaa += q[(j, k)] * adjusted[j] * adjusted[k];
        }
    }
    Ok(AnalyticDisc {
        base: z.to_vec(),
        direction: a.to_vec(),
        adjusted,
        pivot: p,
        b1: -qaa / (2.0 * grad[p]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    #[serde(with = "crate::real17")]
    pub radius: f64,
    #[serde(with = "crate::real17")]
    pub sup_residual: f64,
    #[serde(with = "crate::real17")]
    pub circle_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorReport {
    #[serde(with = "crate::real17")]
    pub levi: f64,
    pub rows: Vec<ResidualRow>,
    /// Log-log slope of the residual; `None` when the residual sits at the noise floor.
    pub slope: Option<f64>,
    /// Circle mean of `r ∘ φ / |λ|^2` at the smallest radius.
    #[serde(with = "crate::real17")]
    pub intercept: f64,
    pub exact: bool,
}

impl TaylorReport {
    pub fn decays(&self, min_slope: f64) -> bool {
        self.exact || self.slope.is_some_and(|s| s >= min_slope)
    }

    pub fn intercept_error(&self) -> f64 {
        (self.intercept - self.levi).abs() / self.levi.abs().max(1e-300)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("radius,sup_residual,circle_mean\n");
        for row in &self.rows {
            s.push_str(&format!(
                "{},{},{}\n",
                crate::real17::format(row.radius),
                crate::real17::format(row.sup_residual),
                crate::real17::format(row.circle_mean)
            ));
        }
        s
    }
}

const CIRCLE_POINTS: usize = 64;

/// `sup_{|λ| = ρ} |r(φ(λ)) / |λ|^2 - L r(z, a(z))|` for each radius.
pub fn taylor_residual(r: &dyn DefiningFn, disc: &AnalyticDisc, radii: &[f64]) -> TaylorReport {
    let levi = levi_form(r, &disc.base, &disc.adjusted);
    let rows: Vec<ResidualRow> = radii
        .iter()
        .filter(|&&rho| rho > 0.0)
        .map(|&rho| {
            let mut sup: f64 = 0.0;
            let mut mean = 0.0;
            for k in 0..CIRCLE_POINTS {
                let theta = std::f64::consts::TAU * k as f64 / CIRCLE_POINTS as f64;
                let lambda = C::from_polar(rho, theta);
                let q = r.value(&disc.eval(lambda)) / (rho * rho);
                sup = sup.max((q - levi).abs());
                mean += q / CIRCLE_POINTS as f64;
            }
            ResidualRow {
                radius: rho,
                sup_residual: sup,
                circle_mean: mean,
            }
        })
        .collect();
    let floor = 1e-8 * levi.abs().max(1.0);
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.sup_residual > floor)
        .map(|row| (row.radius.ln(), row.sup_residual.ln()))
        .collect();
    let exact = fit.len() < 2;
    let slope = (!exact).then(|| {
        let n = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    let intercept = rows
        .iter()
        .min_by(|a, b| a.radius.total_cmp(&b.radius))
        .map_or(levi, |row| row.circle_mean);
    TaylorReport {
        levi,
        rows,
        slope,
        intercept,
        exact,
    }
}

/// Log-spaced radii from `hi` down to `lo`.
pub fn log_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| hi * (lo / hi).powf(k as f64 / (count - 1).max(1) as f64))
        .collect()
}

/// Orthonormal basis of the complex tangent space `{a : Σ a_j ∂r/∂z_j = 0}`.
pub fn tangent_frame(r: &dyn DefiningFn, z: &[C]) -> Result<Vec<DVector<C>>> {
    let grad = r.gradient(z);
    let gnorm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
    if gnorm < DEGENERATE_GRADIENT {
        return Err(Error::DegenerateGradient(gnorm));
    }
    let n = grad.len();
    let normal = DVector::from_iterator(n, grad.iter().map(|g| g.conj() / gnorm));
    let mut frame: Vec<DVector<C>> = vec![normal];
    for k in 0..n {
        let mut v = DVector::from_element(n, C::new(0.0, 0.0));
        v[k] = C::new(1.0, 0.0);
        for e in &frame {
            let proj = e.dotc(&v);
            v -= e * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            frame.push(v / C::from(norm));
        }
        if frame.len() == n {
            break;
        }
    }
    frame.remove(0);
    Ok(frame)
}

/// Eigenvalues (ascending) and eigenvectors of the Levi form restricted to
/// the complex tangent space.
pub fn tangential_spectrum(r: &dyn DefiningFn, z: &[C]) -> Result<Vec<(f64, Vec<C>)>> {
    let frame = tangent_frame(r, z)?;
    let h = r.complex_hessian(z);
    let m = frame.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    // L(Σ c_a E_a) = x* T x with x = conj(c)
    let t = DMatrix::from_fn(m, m, |a, b| {
        let mut acc = C::new(0.0, 0.0);
        for j in 0..h.nrows() {
            for k in 0..h.ncols() {
                acc += frame[a][j] * h[(j, k)] * frame[b][k].conj();
            }
        }
        acc
    });
    let t = (&t + t.adjoint()) * C::from(0.5);
    let eig = t.symmetric_eigen();
    let mut out: Vec<(f64, Vec<C>)> = (0..m)
        .map(|i| {
            let x = eig.eigenvectors.column(i);
            let mut dir = DVector::from_element(h.nrows(), C::new(0.0, 0.0));
            for a in 0..m {
                dir += &frame[a] * x[a].conj();
            }
            (eig.eigenvalues[i], dir.iter().copied().collect())
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// A complex tangent direction along which the Levi form is below `-tol`.
pub fn find_concave_direction(r: &dyn DefiningFn, z: &[C], tol: f64) -> Result<Option<(Vec<C>, f64)>> {
    let spectrum = tangential_spectrum(r, z)?;
    Ok(spectrum
        .into_iter()
        .next()
        .filter(|(lambda, _)| *lambda < -tol)
        .map(|(lambda, dir)| (dir, lambda)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscFamilyReport {
    #[serde(with = "crate::real17")]
    pub center_distance: f64,
    #[serde(with = "crate::real17")]
    pub edge_distance: f64,
    pub violation: bool,
}

const DISC_RADII: usize = 9;

/// Samples `disc` on `|ζ| ≤ rho` and compares the boundary distance of the
/// center with that of the edge circle.
pub fn continuity_violation(
    dom: &dyn Domain,
    disc: &dyn Fn(C) -> Vec<C>,
    rho: f64,
) -> Result<DiscFamilyReport> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::ConstraintViolation(format!("disc radius {rho} must be positive")));
    }
    let mut edge = f64::INFINITY;
    for i in 0..=DISC_RADII {
        let s = rho * i as f64 / DISC_RADII as f64;
        for k in 0..CIRCLE_POINTS {
            let zeta = C::from_polar(s, std::f64::consts::TAU * k as f64 / CIRCLE_POINTS as f64);
            let p = disc(zeta);
            if !dom.contains(&p) {
                return Err(Error::DiscExits(format!("{zeta}")));
            }
            if i == DISC_RADII {
                edge = edge.min(dom.boundary_distance(&p));
            }
            if i == 0 {
                break;
            }
        }
    }
    let center = dom.boundary_distance(&disc(C::new(0.0, 0.0)));
    Ok(DiscFamilyReport {
        center_distance: center,
        edge_distance: edge,
        violation: center < edge,
    })
}

/// A Hartogs figure in the slit domain: the fibre disc over a point just
/// outside `D1` above the apex of `S`.
pub fn slit_certificate_disc(zeta: C) -> Vec<C> {
    vec![C::new(1.0, 0.51), zeta * 0.6]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Ball, SlitDomain};
    use crate::hartogs;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn quadric(h: [[f64; 2]; 2], q: [[f64; 2]; 2], l: [f64; 2], k: f64) -> QuadricFn {
        let m = |a: [[f64; 2]; 2]| DMatrix::from_row_slice(2, 2, &[c(a[0][0], 0.0), c(a[0][1], 0.0), c(a[1][0], 0.0), c(a[1][1], 0.0)]);
        QuadricFn::new(m(h), m(q), DVector::from_vec(vec![c(l[0], 0.0), c(l[1], 0.0)]), k).unwrap()
    }

    /// The quadric with finite-difference derivatives only.
    struct Numeric<'a>(&'a QuadricFn);

    impl DefiningFn for Numeric<'_> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, z: &[C]) -> f64 {
            self.0.value(z)
        }
    }

    #[test]
    fn levi_examples() {
        let sphere = SphereFn { dim: 2, radius: 1.0 };
        let a = [c(0.3, -1.0), c(2.0, 0.5)];
        assert_relative_eq!(levi_form(&sphere, &[c(0.6, 0.0), c(0.8, 0.0)], &a), 0.09 + 1.0 + 4.0 + 0.25);
        let split = quadric([[1.0, 0.0], [0.0, -1.0]], [[0.0; 2]; 2], [0.0; 2], 0.3);
        assert_eq!(levi_form(&split, &[c(0.1, 0.0), c(0.2, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]), -1.0);
    }

    #[test]
    fn finite_differences_agree_with_analytic_quadric() {
        let mut q = quadric([[1.0, 0.0], [0.0, 2.0]], [[0.3, 0.1], [0.1, -0.5]], [0.4, -0.2], -1.0);
        q.h[(0, 1)] = c(0.2, 0.3);
        q.h[(1, 0)] = c(0.2, -0.3);
        let z = [c(0.3, -0.4), c(0.5, 0.1)];
        let num = Numeric(&q);
        for (a, b) in q.gradient(&z).iter().zip(num.gradient(&z)) {
            assert!((a - b).norm() < 1e-9);
        }
        assert!((q.complex_hessian(&z) - num.complex_hessian(&z)).norm() < 1e-7);
        assert!((q.holomorphic_hessian(&z) - num.holomorphic_hessian(&z)).norm() < 1e-7);
    }

    #[test]
    fn tangent_adjust_examples() {
        let sphere = SphereFn { dim: 2, radius: 1.0 };
        let z = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(tangent_adjust(&sphere, &z, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap(), vec![c(0.0, 0.0); 2]);
        assert_eq!(tangent_adjust(&sphere, &z, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap(), vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let origin = [c(0.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(tangent_adjust(&sphere, &origin, &[c(1.0, 0.0), c(0.0, 0.0)]), Err(Error::DegenerateGradient(_))));
    }

    #[test]
    fn levi_disc_examples() {
        let sphere = SphereFn { dim: 2, radius: 1.0 };
        let z = [c(0.6, 0.0), c(0.0, 0.8)];
        let disc = levi_disc(&sphere, &z, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(disc.b1, c(0.0, 0.0));
        assert_eq!(disc.eval(c(0.0, 0.0)), z.to_vec());
        let tangency: C = sphere.gradient(&z).iter().zip(&disc.adjusted).map(|(g, a)| g * a).sum();
        assert!(tangency.norm() < 1e-12);

        let r = quadric([[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [0.0, 1.0]], [0.0; 2], -1.0);
        let disc = levi_disc(&r, &[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(disc.b1, c(-0.5, 0.0));
        assert!(levi_disc(&r, &[c(0.5, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn taylor_identity_on_a_quadric_with_holomorphic_terms() {
        let r = quadric([[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [0.0, 1.0]], [0.0; 2], -1.0);
        let disc = levi_disc(&r, &[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let report = taylor_residual(&r, &disc, &log_radii(1e-3, 1e-1, 9));
        assert!(report.decays(0.9), "{report:?}");
        assert!(report.intercept_error() < 1e-3);
        assert!(report.levi > 0.0);
    }

    #[test]
    fn concave_direction_enters_the_domain() {
        let r = quadric([[1.0, 0.0], [0.0, -1.0]], [[0.0; 2]; 2], [0.0; 2], -1.0);
        let z = [c(1.0, 0.0), c(0.0, 0.0)];
        let (dir, lambda) = find_concave_direction(&r, &z, 1e-9).unwrap().unwrap();
        assert!((lambda + 1.0).abs() < 1e-12);
        let disc = levi_disc(&r, &z, &dir).unwrap();
        for k in 0..16 {
            let lam = C::from_polar(1e-2, k as f64);
            assert!(r.value(&disc.eval(lam)) < 0.0);
        }
    }

    #[test]
    fn no_concave_direction_on_the_ball_or_a_flat_piece() {
        let sphere = SphereFn { dim: 2, radius: 1.0 };
        assert!(find_concave_direction(&sphere, &[c(0.6, 0.0), c(0.0, 0.8)], 1e-9).unwrap().is_none());
        let flat = quadric([[0.0; 2]; 2], [[0.0; 2]; 2], [1.0, 0.0], 0.0);
        assert!(find_concave_direction(&flat, &[c(0.0, 0.0), c(0.3, 0.0)], 1e-9).unwrap().is_none());
    }

    #[test]
    fn hartogs_levi_value_and_classification_agree() {
        let pair = hartogs::build_pair(0.3, 0.01, 0.5, 6).unwrap();
        for (field, z0) in [
            (pair.d0.field().clone(), c(0.05, 0.02)),
            (pair.d.field().clone(), c(0.6, 0.3)),
            (pair.d.field().clone(), c(0.0, 0.1)),
        ] {
            let r = HartogsGraphFn { field: field.clone() };
            let w = C::from_polar(field.value(z0.re, z0.im).exp(), 0.7);
            let p = [z0, w];
            let lap = field.laplacian(z0.re, z0.im).unwrap();
            assert_relative_eq!(levi_form(&r, &p, &[c(1.0, 0.0), c(0.0, 0.0)]), -lap / 4.0, max_relative = 1e-12);
            let concave = find_concave_direction(&r, &p, 1e-9).unwrap().is_some();
            let class = hartogs::classify_point(&field, z0, hartogs::DEFAULT_TOL).class;
            assert_eq!(concave, class == hartogs::BoundaryClass::StrictlyPseudoconcave);
        }
    }

    #[test]
    fn hermitian_polarization() {
        let mut r = quadric([[2.0, 0.0], [0.0, -1.0]], [[0.5, 0.0], [0.0, 0.0]], [0.0; 2], 0.0);
        r.h[(0, 1)] = c(0.1, 0.4);
        r.h[(1, 0)] = c(0.1, -0.4);
        let z = [c(0.1, 0.2), c(0.3, 0.4)];
        let a = [c(1.0, 2.0), c(-0.5, 0.3)];
        let b = [c(0.2, -0.1), c(0.7, 0.7)];
        let plus: Vec<C> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let minus: Vec<C> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let lhs = levi_form(&r, &z, &plus) + levi_form(&r, &z, &minus);
        let rhs = 2.0 * levi_form(&r, &z, &a) + 2.0 * levi_form(&r, &z, &b);
        assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs());
        assert!(levi_form_complex(&r, &z, &a).im.abs() < 1e-12);
    }

    #[test]
    fn continuity_principle_examples() {
        let slit = SlitDomain::new();
        let report = continuity_violation(&slit, &slit_certificate_disc, 1.0).unwrap();
        assert!(report.violation, "{report:?}");
        let ball = Ball { dim: 2, radius: 1.0 };
        let inside = |zeta: C| vec![zeta * 0.3, c(0.2, 0.0)];
        assert!(!continuity_violation(&ball, &inside, 1.0).unwrap().violation);
        let leaving = |zeta: C| vec![zeta * 2.0, c(0.0, 0.0)];
        assert!(matches!(continuity_violation(&ball, &leaving, 1.0), Err(Error::DiscExits(_))));
        assert!(continuity_violation(&ball, &inside, 0.0).is_err());
    }
}
