//! Bounded regions of `C^n` given by a membership test, a bounding box and a
//! boundary-distance oracle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hartogs::{self, HartogsDomain};
use crate::real17;

/// Relative position with respect to the half-ellipsoid `D1` of the slit domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    InsideD1,
    OutsideD1,
    Unsided,
}

pub trait Domain: Send + Sync {
    fn dim(&self) -> usize;
    fn contains(&self, z: &[Complex64]) -> bool;
    /// `2 * dim` real intervals, `(re, im)` for each coordinate in turn.
    fn bounding_box(&self) -> Vec<(f64, f64)>;
    /// Distance to the boundary for points of the domain, 0 outside.
    fn boundary_distance(&self, z: &[Complex64]) -> f64;
    fn side(&self, _z: &[Complex64]) -> Side {
        Side::Unsided
    }
    /// Canonical description, stable across runs; used in cache keys.
    fn label(&self) -> String;
}

pub fn to_reals(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn from_reals(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Centered planar disc or annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Planar {
    Disc { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Planar {
    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        match *self {
            Planar::Disc { radius } => r < radius,
            Planar::Annulus { inner, outer } => inner < r && r < outer,
        }
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let d = match *self {
            Planar::Disc { radius } => radius - r,
            Planar::Annulus { inner, outer } => (r - inner).min(outer - r),
        };
        d.max(0.0)
    }

    pub fn outer(&self) -> f64 {
        match *self {
            Planar::Disc { radius } => radius,
            Planar::Annulus { outer, .. } => outer,
        }
    }

    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Planar::Disc { radius } => PI * radius * radius,
            Planar::Annulus { inner, outer } => PI * (outer * outer - inner * inner),
        }
    }

    fn label(&self) -> String {
        match *self {
            Planar::Disc { radius } => format!("disc({})", real17::format(radius)),
            Planar::Annulus { inner, outer } => {
                format!("annulus({},{})", real17::format(inner), real17::format(outer))
            }
        }
    }
}

/// Product of centered planar sets; a single factor is a planar domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub factors: Vec<Planar>,
}

impl Product {
    pub fn new(factors: Vec<Planar>) -> Self {
        Product { factors }
    }

    pub fn disc(radius: f64) -> Self {
        Product::new(vec![Planar::Disc { radius }])
    }

    pub fn annulus(inner: f64, outer: f64) -> Self {
        Product::new(vec![Planar::Annulus { inner, outer }])
    }

    /// `P × D` with `P = {1/2 < |z| < 3/2}`.
    pub fn annulus_times_disc() -> Self {
        Product::new(vec![
            Planar::Annulus {
                inner: 0.5,
                outer: 1.5,
            },
            Planar::Disc { radius: 1.0 },
        ])
    }

    pub fn volume(&self) -> f64 {
        self.factors.iter().map(Planar::area).product()
    }
}

impl Domain for Product {
    fn dim(&self) -> usize {
        self.factors.len()
    }

    fn contains(&self, z: &[Complex64]) -> bool {
        z.len() == self.factors.len() && self.factors.iter().zip(z).all(|(f, &c)| f.contains(c))
    }

    fn bounding_box(&self) -> Vec<(f64, f64)> {
        self.factors
            .iter()
            .flat_map(|f| {
                let r = f.outer();
                [(-r, r), (-r, r)]
            })
            .collect()
    }

    fn boundary_distance(&self, z: &[Complex64]) -> f64 {
        if !self.contains(z) {
            return 0.0;
        }
        self.factors
            .iter()
            .zip(z)
            .map(|(f, &c)| f.distance(c))
            .fold(f64::INFINITY, f64::min)
    }

    fn label(&self) -> String {
        let parts: Vec<_> = self.factors.iter().map(Planar::label).collect();
        format!("product[{}]", parts.join("x"))
    }
}

/// Euclidean ball centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub dim: usize,
    pub radius: f64,
}

impl Domain for Ball {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, z: &[Complex64]) -> bool {
        z.len() == self.dim && norm(z) < self.radius
    }

    fn bounding_box(&self) -> Vec<(f64, f64)> {
        vec![(-self.radius, self.radius); 2 * self.dim]
    }

    fn boundary_distance(&self, z: &[Complex64]) -> f64 {
        if self.contains(z) {
            self.radius - norm(z)
        } else {
            0.0
        }
    }

    fn label(&self) -> String {
        format!("ball({},{})", self.dim, real17::format(self.radius))
    }
}

pub fn norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `k(t) = (1 + t^2) / (1 - t^2)`, the `y1^2` weight of the slit surface at `|z2| = t`.
pub fn slit_weight(t: f64) -> f64 {
    (1.0 + t * t) / (1.0 - t * t)
}

/// `(x1 - 1)^2 + k(|z2|) y1^2`; the slit `S` is where this equals 1/4 with `y1 > 0`.
pub fn slit_value(z: &[Complex64]) -> f64 {
    let (x1, y1) = (z[0].re, z[0].im);
    (x1 - 1.0).powi(2) + slit_weight(z[1].norm()) * y1 * y1
}

pub const SLIT_BAND: f64 = 1e-12;

/// `(P × D) \ S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitDomain {
    base: Product,
}

impl SlitDomain {
    pub fn new() -> Self {
        SlitDomain {
            base: Product::annulus_times_disc(),
        }
    }

    pub fn base(&self) -> &Product {
        &self.base
    }

    pub fn on_slit(z: &[Complex64]) -> bool {
        z[0].im > 0.0 && (slit_value(z) - 0.25).abs() <= SLIT_BAND
    }

    /// Distance from `z` to the closure of `S`.
    pub fn slit_distance(z: &[Complex64]) -> f64 {
        let s = z[1].norm();
        let target = z[0];
        let d2 = |theta: f64, t: f64| {
            let theta = theta.clamp(0.0, std::f64::consts::PI);
            let t = t.clamp(0.0, 1.0 - 1e-15);
            let p = Complex64::new(1.0 + 0.5 * theta.cos(), 0.5 * theta.sin() / slit_weight(t).sqrt());
            (target - p).norm_sqr() + (s - t) * (s - t)
        };
        let n = 64;
        let (mut best, mut bt, mut bs) = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=n {
            let theta = std::f64::consts::PI * i as f64 / n as f64;
            for j in 0..=n {
                let t = (1.0 - 1e-15) * j as f64 / n as f64;
                let v = d2(theta, t);
                if v < best {
                    (best, bt, bs) = (v, theta, t);
                }
            }
        }
        let (mut ht, mut hs) = (std::f64::consts::PI / n as f64, 1.0 / n as f64);
        while ht > 1e-13 || hs > 1e-13 {
            let mut improved = false;
            for (dt, ds) in [(ht, 0.0), (-ht, 0.0), (0.0, hs), (0.0, -hs)] {
                let th = (bt + dt).clamp(0.0, std::f64::consts::PI);
                let tt = (bs + ds).clamp(0.0, 1.0 - 1e-15);
                let v = d2(th, tt);
                if v < best {
                    (best, bt, bs) = (v, th, tt);
                    improved = true;
                }
            }
            if !improved {
                ht *= 0.5;
                hs *= 0.5;
            }
        }
        best.sqrt()
    }
}

impl Default for SlitDomain {
    fn default() -> Self {
        SlitDomain::new()
    }
}

impl Domain for SlitDomain {
    fn dim(&self) -> usize {
        2
    }

    fn contains(&self, z: &[Complex64]) -> bool {
        self.base.contains(z) && !SlitDomain::on_slit(z)
    }

    fn bounding_box(&self) -> Vec<(f64, f64)> {
        self.base.bounding_box()
    }

    fn boundary_distance(&self, z: &[Complex64]) -> f64 {
        if !self.contains(z) {
            return 0.0;
        }
        self.base.boundary_distance(z).min(SlitDomain::slit_distance(z))
    }

    fn side(&self, z: &[Complex64]) -> Side {
        if z[0].im > 0.0 && slit_value(z) < 0.25 {
            Side::InsideD1
        } else {
            Side::OutsideD1
        }
    }

    fn label(&self) -> String {
        "slit".into()
    }
}

/// The open half-ellipsoid `D^0 = {slit_value < 1/4, y1 > 0, |z2| < 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlitInterior;

impl Domain for SlitInterior {
    fn dim(&self) -> usize {
        2
    }

    fn contains(&self, z: &[Complex64]) -> bool {
        z.len() == 2 && z[1].norm() < 1.0 && z[0].im > 0.0 && slit_value(z) < 0.25
    }

    fn bounding_box(&self) -> Vec<(f64, f64)> {
        vec![(0.5, 1.5), (0.0, 0.5), (-1.0, 1.0), (-1.0, 1.0)]
    }

    fn boundary_distance(&self, z: &[Complex64]) -> f64 {
        ray_distance(self, z)
    }

    fn label(&self) -> String {
        "slit-interior".into()
    }
}

/// The Hartogs domain `D` of the Cantor-bump construction as a `Domain`.
#[derive(Debug, Clone)]
pub struct HartogsRegion {
    inner: HartogsDomain,
    label: String,
    w_bound: f64,
}

impl HartogsRegion {
    pub fn new(inner: HartogsDomain, label: String) -> Self {
        let cap = inner.field().cap().map_or(0.0, |c| c.bump().schedule().sup_bound());
        HartogsRegion {
            inner,
            label,
            w_bound: cap.exp(),
        }
    }

    pub fn hartogs(&self) -> &HartogsDomain {
        &self.inner
    }
}

impl Domain for HartogsRegion {
    fn dim(&self) -> usize {
        2
    }

    fn contains(&self, z: &[Complex64]) -> bool {
        z.len() == 2 && self.inner.contains(z[0], z[1])
    }

    fn bounding_box(&self) -> Vec<(f64, f64)> {
        let b = self.w_bound;
        vec![(-1.0, 1.0), (-1.0, 1.0), (-b, b), (-b, b)]
    }

    fn boundary_distance(&self, z: &[Complex64]) -> f64 {
        ray_distance(self, z)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

const RAY_COUNT: usize = 24;

fn ray_directions(real_dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for k in 0..real_dim {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; real_dim];
            d[k] = s;
            dirs.push(d);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d15c);
    while dirs.len() < RAY_COUNT.max(2 * real_dim) {
        let d: Vec<f64> = (0..real_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 {
            dirs.push(d.into_iter().map(|x| x / n).collect());
        }
    }
    dirs
}

/// Smallest exit distance along a fixed set of rays, found by bisection.
/// An upper bound for the true boundary distance.
pub fn ray_distance(dom: &dyn Domain, z: &[Complex64]) -> f64 {
    if !dom.contains(z) {
        return 0.0;
    }
    let x = to_reals(z);
    let bbox = dom.bounding_box();
    let diam = bbox.iter().map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
    let inside = |t: f64, d: &[f64]| {
        let p: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
        dom.contains(&from_reals(&p))
    };
    let mut best = diam;
    for d in ray_directions(x.len()) {
        let mut hi = best;
        if inside(hi, &d) {
            continue;
        }
        let mut lo = 0.0;
        // bracket from below so that disconnected pieces along the ray are not skipped
        let mut t = hi / 64.0;
        while t < hi {
            if !inside(t, &d) {
                hi = t;
                break;
            }
            lo = t;
            t += best / 64.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inside(mid, &d) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = best.min(hi);
    }
    best
}

/// JSON description of a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Disc {
        #[serde(with = "real17")]
        radius: f64,
    },
    Annulus {
        #[serde(with = "real17")]
        inner: f64,
        #[serde(with = "real17")]
        outer: f64,
    },
    Ball {
        dim: usize,
        #[serde(with = "real17")]
        radius: f64,
    },
    Product {
        factors: Vec<DomainSpec>,
    },
    Slit,
    SlitInterior,
    /// The Hartogs domain `D` built from the Cantor-bump function.
    CantorHartogs {
        #[serde(with = "real17")]
        r0: f64,
        #[serde(with = "real17")]
        eps: f64,
        depth: usize,
    },
}

pub const MAX_DIM: usize = 4;

impl DomainSpec {
    pub fn from_json(text: &str) -> Result<DomainSpec> {
        let spec: DomainSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    fn planar(&self) -> Result<Planar> {
        match *self {
            DomainSpec::Disc { radius } => Ok(Planar::Disc { radius }),
            DomainSpec::Annulus { inner, outer } => Ok(Planar::Annulus { inner, outer }),
            _ => Err(Error::Parse("product factors must be discs or annuli".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        match self {
            DomainSpec::Disc { radius } if positive(*radius) => Ok(()),
            DomainSpec::Annulus { inner, outer } if positive(*inner) && positive(*outer) && inner < outer => {
                Ok(())
            }
            DomainSpec::Ball { dim, radius } if (1..=MAX_DIM).contains(dim) && positive(*radius) => Ok(()),
            DomainSpec::Product { factors } if (1..=MAX_DIM).contains(&factors.len()) => {
                for f in factors {
                    f.planar()?;
                    f.validate()?;
                }
                Ok(())
            }
            DomainSpec::Slit | DomainSpec::SlitInterior => Ok(()),
            DomainSpec::CantorHartogs { r0, eps, depth }
                if *r0 > 0.0 && *r0 < 1.0 / 3.0 && *eps > 0.0 && *eps < 1.0 && *depth <= 12 =>
            {
                Ok(())
            }
            other => Err(Error::Parse(format!("invalid domain parameters: {other:?}"))),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Domain>> {
        self.validate()?;
        Ok(match self {
            DomainSpec::Disc { .. } | DomainSpec::Annulus { .. } => Box::new(Product::new(vec![self.planar()?])),
            DomainSpec::Ball { dim, radius } => Box::new(Ball {
                dim: *dim,
                radius: *radius,
            }),
            DomainSpec::Product { factors } => Box::new(Product::new(
                factors.iter().map(DomainSpec::planar).collect::<Result<_>>()?,
            )),
            DomainSpec::Slit => Box::new(SlitDomain::new()),
            DomainSpec::SlitInterior => Box::new(SlitInterior),
            DomainSpec::CantorHartogs { r0, eps, depth } => {
                let pair = hartogs::build_pair(*r0, hartogs::DEFAULT_SMOOTHING, *eps, *depth)?;
                let label = format!("cantor-hartogs({},{},{depth})", real17::format(*r0), real17::format(*eps));
                Box::new(HartogsRegion::new(pair.d, label))
            }
        })
    }
}

/// Parses one complex number: `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`, `a+i`).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("not a complex number: {s:?}"));
    if t.is_empty() || t.len() > 128 {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        let re = real17::parse(&t).map_err(|_| bad())?;
        return if re.is_finite() { Ok(Complex64::new(re, 0.0)) } else { Err(bad()) };
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => real17::parse(x).map_err(|_| bad())?,
    };
    let re = real17::parse(re).map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Parses a point of `C^n` written as comma-separated complex numbers.
pub fn parse_point(s: &str) -> Result<Vec<Complex64>> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() > MAX_DIM {
        return Err(Error::Parse(format!("too many coordinates in {s:?}")));
    }
    parts.into_iter().map(parse_complex).collect()
}

pub fn format_point(z: &[Complex64]) -> String {
    z.iter()
        .map(|c| {
            let im = real17::format(c.im);
            let sign = if im.starts_with('-') { "" } else { "+" };
            format!("{}{sign}{im}i", real17::format(c.re))
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Checks segment membership `(1 - t) p + t q` for `t ∈ {1/4, 1/2, 3/4}` over
/// seeded pairs drawn from the bounding box. Returns a failing pair, if any.
pub fn convexity_check(dom: &dyn Domain, pairs: usize, seed: u64) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let bbox = dom.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| loop {
        let x: Vec<f64> = bbox.iter().map(|&(a, b)| rng.gen_range(a..b)).collect();
        let z = from_reals(&x);
        if dom.contains(&z) {
            return z;
        }
    };
    for _ in 0..pairs {
        let p = draw(&mut rng);
        let q = draw(&mut rng);
        for t in [0.25, 0.5, 0.75] {
            let m: Vec<Complex64> = p.iter().zip(&q).map(|(a, b)| a * (1.0 - t) + b * t).collect();
            if !dom.contains(&m) {
                return Some((p, q));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn slit_examples() {
        let d = SlitDomain::new();
        let inside = [c(1.0, 0.49), c(0.0, 0.0)];
        assert!(d.contains(&inside));
        assert_eq!(d.side(&inside), Side::InsideD1);
        assert!((slit_value(&inside) - 0.2401).abs() < 1e-15);
        assert!(!d.contains(&[c(1.0, 0.5), c(0.0, 0.0)]));
        let below = [c(1.0, -0.3), c(0.9, 0.0)];
        assert!(d.contains(&below));
        assert_eq!(d.side(&below), Side::OutsideD1);
    }

    #[test]
    fn slit_distance_reference() {
        // straight above the apex of the z2 = 0 slice
        let d = SlitDomain::slit_distance(&[c(1.0, 0.6), c(0.0, 0.0)]);
        assert!((d - 0.1).abs() < 1e-9, "{d}");
        let d = SlitDomain::slit_distance(&[c(1.0, 0.25), c(0.0, 0.0)]);
        assert!((d - 0.25).abs() < 1e-9, "{d}");
        let dom = SlitDomain::new();
        let dist = dom.boundary_distance(&[c(1.0, 0.49), c(0.0, 0.0)]);
        assert!((dist - 0.01).abs() < 1e-9);
    }

    #[test]
    fn product_distance_and_volume() {
        let p = Product::annulus_times_disc();
        assert!((p.boundary_distance(&[c(1.0, 0.0), c(0.0, 0.0)]) - 0.5).abs() < 1e-15);
        assert!((p.boundary_distance(&[c(1.0, 0.0), c(0.8, 0.0)]) - 0.2).abs() < 1e-15);
        assert!((p.volume() - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn ray_distance_on_the_ball_is_close() {
        let b = Ball { dim: 2, radius: 1.0 };
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        let exact = b.boundary_distance(&z);
        let ray = ray_distance(&b, &z);
        assert!(ray >= exact - 1e-12);
        assert!(ray <= exact * 1.5);
    }

    #[test]
    fn convexity_of_the_half_ellipsoid() {
        assert!(convexity_check(&SlitInterior, 2000, 1).is_none());
        assert!(convexity_check(&Product::annulus(0.5, 1.5), 2000, 1).is_some());
        assert!(convexity_check(&Ball { dim: 2, radius: 1.0 }, 2000, 1).is_none());
    }

    #[test]
    fn parse_points() {
        assert_eq!(parse_complex("1+0.5i").unwrap(), c(1.0, 0.5));
        assert_eq!(parse_complex("-2.5e-3-1e2i").unwrap(), c(-2.5e-3, -100.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("3").unwrap(), c(3.0, 0.0));
        assert_eq!(parse_complex("1e-3i").unwrap(), c(0.0, 1e-3));
        assert_eq!(parse_point("1+0.5i, 0").unwrap(), vec![c(1.0, 0.5), c(0.0, 0.0)]);
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+2j").is_err());
        assert!(parse_complex("nan").is_err());
    }

    #[test]
    fn domain_spec_json() {
        let spec = DomainSpec::Product {
            factors: vec![
                DomainSpec::Annulus { inner: 0.5, outer: 1.5 },
                DomainSpec::Disc { radius: 1.0 },
            ],
        };
        let text = spec.to_json().unwrap();
        assert_eq!(DomainSpec::from_json(&text).unwrap(), spec);
        let dom = spec.build().unwrap();
        assert_eq!(dom.label(), Product::annulus_times_disc().label());
        assert!(DomainSpec::from_json(r#"{"kind":"slit"}"#).is_ok());
        assert!(DomainSpec::from_json(r#"{"kind":"disc","radius":"-1"}"#).is_err());
        assert!(DomainSpec::from_json(r#"{"kind":"annulus","inner":"2","outer":"1"}"#).is_err());
        assert!(DomainSpec::from_json(r#"{"kind":"product","factors":[{"kind":"slit"}]}"#).is_err());
        assert!(DomainSpec::from_json(r#"{"kind":"disc","radius":"1","extra":1}"#).is_err());
    }

    #[test]
    fn cantor_hartogs_region_is_the_ball_away_from_the_cap() {
        let dom = DomainSpec::CantorHartogs { r0: 0.3, eps: 0.5, depth: 6 }.build().unwrap();
        assert!(dom.contains(&[c(0.6, 0.0), c(0.79, 0.0)]));
        assert!(!dom.contains(&[c(0.6, 0.0), c(0.81, 0.0)]));
        let d = dom.boundary_distance(&[c(0.6, 0.0), c(0.7, 0.0)]);
        let ball = 1.0 - (0.36f64 + 0.49).sqrt();
        assert!(d >= ball - 1e-9 && d < ball * 1.5, "{d} vs {ball}");
    }

    proptest! {
        #[test]
        fn point_text_round_trip(a in -1e3f64..1e3, b in -1e3f64..1e3, x in -1e3f64..1e3, y in -1e3f64..1e3) {
            let z = vec![c(a, b), c(x, y)];
            prop_assert_eq!(parse_point(&format_point(&z)).unwrap(), z);
        }

        #[test]
        fn slit_distance_is_a_lower_bound_for_nearby_slit_points(theta in 0.01f64..3.13, t in 0.0f64..0.95, dx in -0.2f64..0.2, dy in -0.2f64..0.2) {
            let p = c(1.0 + 0.5 * theta.cos(), 0.5 * theta.sin() / slit_weight(t).sqrt());
            let z = [p + c(dx, dy), c(t, 0.0)];
            let d = SlitDomain::slit_distance(&z);
            prop_assert!(d <= (dx * dx + dy * dy).sqrt() + 1e-12);
        }
    }
}
