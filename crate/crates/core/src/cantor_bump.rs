//! The Cantor-bump function `F`.
//!
//! `F = sum_n f_n` where layer `f_n` places one scaled copy `a_n b(x / p_n)` of
//! a base bump at the center of every interval of generation `n`. The
//! intervals are obtained by repeatedly removing the central plateau
//! `J_{n,i} = [c - p_n/4, c + p_n/4]` from `I_{n,i}`; on each plateau the
//! corresponding bump is exactly quadratic and every deeper layer vanishes,
//! so `F''` is known in closed form there. What is left after all removals is
//! a Cantor set on which `F` vanishes to first order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::real17;

pub const QUADRATIC_RADIUS: f64 = 0.25;
pub const SUPPORT_RADIUS: f64 = 0.75;
/// Largest tree depth we are willing to materialize (2^20 intervals at the last level).
pub const MAX_DEPTH: usize = 20;
pub const DEFAULT_DEPTH: usize = 10;

const PROFILE_GRID: usize = 200_000;

/// Even bump `b`, equal to `1 - 4x^2` on `|x| <= 1/4`, glued to zero by a
/// quintic Hermite piece on `[1/4, 1/4 + w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpProfile {
    transition_width: f64,
    // coefficients of the glue polynomial in t = (|x| - 1/4) / w
    glue: [f64; 6],
    c3: f64,
    c4: f64,
}

impl BumpProfile {
    pub fn transition_width(&self) -> f64 {
        self.transition_width
    }

    pub fn quadratic_radius(&self) -> f64 {
        QUADRATIC_RADIUS
    }

    pub fn support_radius(&self) -> f64 {
        SUPPORT_RADIUS
    }

    /// sup |b'| measured on the profile grid.
    pub fn c3(&self) -> f64 {
        self.c3
    }

    /// sup b''.
    pub fn c4(&self) -> f64 {
        self.c4
    }

    pub fn glue_coefficients(&self) -> [f64; 6] {
        self.glue
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `b^{(order)}(x)` for order 0, 1 or 2.
    pub fn derivative(&self, x: f64, order: u8) -> f64 {
        let ax = x.abs();
        let v = if ax <= QUADRATIC_RADIUS {
            match order {
                0 => 1.0 - 4.0 * ax * ax,
                1 => -8.0 * ax,
                _ => -8.0,
            }
        } else if ax >= QUADRATIC_RADIUS + self.transition_width {
            0.0
        } else {
            let w = self.transition_width;
            let t = (ax - QUADRATIC_RADIUS) / w;
            let c = &self.glue;
            match order {
                0 => c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5])))),
                1 => {
                    (c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5]))))
                        / w
                }
                _ => (2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]))) / (w * w),
            }
        };
        if order == 1 && x < 0.0 {
            -v
        } else {
            v
        }
    }

    pub fn value_dd(&self, x: Dd) -> Dd {
        let ax = x.abs();
        if ax.hi <= QUADRATIC_RADIUS {
            return Dd::new(1.0) - (ax * ax).scale(4.0);
        }
        if ax.hi >= QUADRATIC_RADIUS + self.transition_width {
            return Dd::ZERO;
        }
        let t = (ax - Dd::new(QUADRATIC_RADIUS)).div_f64(self.transition_width);
        let c = &self.glue;
        let mut acc = Dd::new(c[5]);
        for k in (0..5).rev() {
            acc = acc * t + Dd::new(c[k]);
        }
        acc
    }
}

/// Builds the base bump with a glue zone of the given width.
pub fn build_base_bump(transition_width: f64) -> Result<BumpProfile> {
    let w = transition_width;
    if !(w > 0.0 && w <= SUPPORT_RADIUS - QUADRATIC_RADIUS) {
        return Err(Error::ConstraintViolation(format!(
            "transition width {w} outside (0, 1/2]"
        )));
    }
    // value, slope and curvature of 1 - 4x^2 at x = 1/4, in the t variable
    let y0 = 0.75;
    let y1 = -2.0 * w;
    let y2 = -8.0 * w * w;
    let r0 = -(y0 + y1 + 0.5 * y2);
    let r1 = -(y1 + y2);
    let r2 = -y2;
    let glue = [
        y0,
        y1,
        0.5 * y2,
        10.0 * r0 - 4.0 * r1 + 0.5 * r2,
        -15.0 * r0 + 7.0 * r1 - r2,
        6.0 * r0 - 3.0 * r1 + 0.5 * r2,
    ];
    let mut profile = BumpProfile {
        transition_width: w,
        glue,
        c3: 0.0,
        c4: 0.0,
    };

    let mut c3: f64 = 0.0;
    let mut c4: f64 = f64::NEG_INFINITY;
    for k in 0..=PROFILE_GRID {
        let x = SUPPORT_RADIUS * k as f64 / PROFILE_GRID as f64;
        let b = profile.derivative(x, 0);
        let b1 = profile.derivative(x, 1);
        let b2 = profile.derivative(x, 2);
        if b2 < -8.0 - 1e-9 {
            return Err(Error::ConstraintViolation(format!(
                "b''({x}) = {b2} < -8 for transition width {w}"
            )));
        }
        if b1 > 1e-12 || b < -1e-12 {
            return Err(Error::ConstraintViolation(format!(
                "b not decreasing and non-negative at {x} (b = {b}, b' = {b1})"
            )));
        }
        c3 = c3.max(b1.abs());
        c4 = c4.max(b2);
    }
    // b'' on the glue is a cubic in t; add its interior critical points so C4 is a true sup
    let [_, _, g2, g3, g4, g5] = glue;
    let (qa, qb, qc) = (60.0 * g5, 24.0 * g4, 6.0 * g3);
    let mut crit = Vec::new();
    if qa.abs() > 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            crit.push((-qb + disc.sqrt()) / (2.0 * qa));
            crit.push((-qb - disc.sqrt()) / (2.0 * qa));
        }
    } else if qb != 0.0 {
        crit.push(-qc / qb);
    }
    for t in crit.into_iter().filter(|t| (0.0..=1.0).contains(t)) {
        let b2 = (2.0 * g2 + t * (6.0 * g3 + t * (12.0 * g4 + t * 20.0 * g5))) / (w * w);
        c4 = c4.max(b2);
    }
    profile.c3 = c3;
    profile.c4 = c4;
    Ok(profile)
}

/// Constants of the construction. The sequences `a_n = a0 gamma^n` and
/// `p_n = p0 delta^n` are closed-form and not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    #[serde(with = "real17")]
    pub eps: f64,
    #[serde(with = "real17")]
    pub c1: f64,
    #[serde(with = "real17")]
    pub c2: f64,
    /// sup b'' of the profile the schedule was solved against
    #[serde(with = "real17")]
    pub c4: f64,
    #[serde(with = "real17")]
    pub transition_width: f64,
    /// A in `a_n / p_n^2 = B A^n`
    #[serde(with = "real17")]
    pub growth: f64,
    /// B in `a_n / p_n^2 = B A^n`
    #[serde(with = "real17")]
    pub scale: f64,
    #[serde(with = "real17")]
    pub gamma: f64,
    #[serde(with = "real17")]
    pub delta: f64,
    #[serde(with = "real17")]
    pub a0: f64,
    #[serde(with = "real17")]
    pub p0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl ParamSchedule {
    pub fn amplitude(&self, n: usize) -> f64 {
        self.a0 * self.gamma.powi(n as i32)
    }

    pub fn width(&self, n: usize) -> f64 {
        self.p0 * self.delta.powi(n as i32)
    }

    /// `a0 / (1 - gamma)`, the sup-norm bound for every truncation.
    pub fn sup_bound(&self) -> f64 {
        self.a0 / (1.0 - self.gamma)
    }

    pub fn tail_bound(&self, depth: usize) -> f64 {
        self.a0 * self.gamma.powi(depth as i32 + 1) / (1.0 - self.gamma)
    }

    /// The five defining inequalities, evaluated exactly as stated.
    pub fn invariants(&self) -> Vec<InvariantCheck> {
        let geom_a0 = self.scale * self.p0 * self.p0;
        let geom_growth = self.gamma / (self.delta * self.delta);
        let geom_ok = rel_eq(self.a0, geom_a0, 1e-14) && rel_eq(self.growth, geom_growth, 1e-14);
        vec![
            InvariantCheck {
                name: "geom",
                holds: geom_ok,
                lhs: self.a0 / (self.p0 * self.p0),
                rhs: self.scale,
            },
            InvariantCheck {
                name: "condA",
                holds: self.growth > 1.0 + self.c4 / 4.0,
                lhs: self.growth,
                rhs: 1.0 + self.c4 / 4.0,
            },
            InvariantCheck {
                name: "condc1",
                holds: self.gamma / self.delta < 1.0,
                lhs: self.gamma / self.delta,
                rhs: 1.0,
            },
            InvariantCheck {
                name: "holder",
                holds: self.gamma * self.delta.powf(-2.0 + self.eps) <= 1.0,
                lhs: self.gamma * self.delta.powf(-2.0 + self.eps),
                rhs: 1.0,
            },
            InvariantCheck {
                name: "sup-norm",
                holds: self.sup_bound() < self.c1,
                lhs: self.sup_bound(),
                rhs: self.c1,
            },
        ]
    }

    pub fn is_valid(&self) -> bool {
        let ranges = self.eps > 0.0
            && self.eps < 1.0
            && self.c1 > 0.0
            && self.c2 > 0.0
            && self.gamma > 0.0
            && self.gamma < 1.0
            && self.delta > 0.0
            && self.delta < 0.5
            && self.p0 > 0.0
            && self.p0 < 0.5
            && self.a0 > 0.0;
        ranges && self.invariants().iter().all(|c| c.holds)
    }
}

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Finds `(gamma, delta, p0)` for the given targets. The largest feasible
/// `delta` on a log-spaced grid is taken, `gamma` is the geometric mean of its
/// feasible window and `p0` is shrunk until the sup-norm bound drops below `c1`.
pub fn solve_parameters(eps: f64, c1: f64, c2: f64, profile: &BumpProfile) -> Result<ParamSchedule> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::ConstraintViolation(format!("eps = {eps} outside (0, 1)")));
    }
    if !(c1 > 0.0 && c1.is_finite() && c2 > 0.0 && c2.is_finite()) {
        return Err(Error::ConstraintViolation(format!(
            "C1 = {c1} and C2 = {c2} must be positive"
        )));
    }
    let kappa = 1.0 + profile.c4 / 4.0;
    let (gamma, delta) = (1..=640)
        .map(|i| 0.5 * 10f64.powf(-(i as f64) / 40.0))
        .find_map(|delta| {
            let lower = kappa * delta * delta;
            let upper = delta.powf(2.0 - eps).min(delta);
            (lower < upper * (1.0 - 1e-9)).then(|| ((lower * upper).sqrt(), delta))
        })
        .ok_or_else(|| Error::Infeasible(format!("no (gamma, delta) for eps = {eps}")))?;

    let scale = c2 / 4.0;
    let mut p0: f64 = 0.45;
    let mut guard = 0;
    while scale * p0 * p0 / (1.0 - gamma) >= c1 {
        p0 *= 0.9;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Infeasible(format!("p0 underflow for C1 = {c1}")));
        }
    }
    let schedule = ParamSchedule {
        eps,
        c1,
        c2,
        c4: profile.c4,
        transition_width: profile.transition_width,
        growth: gamma / (delta * delta),
        scale,
        gamma,
        delta,
        a0: scale * p0 * p0,
        p0,
    };
    if !schedule.is_valid() {
        let failed: Vec<_> = schedule
            .invariants()
            .into_iter()
            .filter(|c| !c.holds)
            .map(|c| c.name)
            .collect();
        return Err(Error::Infeasible(format!("solved schedule fails {failed:?}")));
    }
    Ok(schedule)
}

/// Nested generations of intervals; level `n` holds `2^n` open intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalTree {
    widths: Vec<f64>,
    levels: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Membership {
    /// `x` lies in the interior of a plateau of this generation.
    InOpenSet { level: usize },
    /// `x` survived every split down to `depth`.
    CantorCandidate { depth: usize },
}

pub fn build_interval_tree(schedule: &ParamSchedule, depth: usize) -> Result<IntervalTree> {
    if depth > MAX_DEPTH {
        return Err(Error::ConstraintViolation(format!(
            "depth {depth} exceeds {MAX_DEPTH}"
        )));
    }
    let widths: Vec<f64> = (0..=depth).map(|n| schedule.width(n)).collect();
    let mut levels = vec![vec![(-1.0, 1.0)]];
    for n in 0..depth {
        let q = widths[n] / 4.0;
        let next = levels[n]
            .iter()
            .flat_map(|&(lo, hi)| {
                let c = 0.5 * (lo + hi);
                [(lo, c - q), (c + q, hi)]
            })
            .collect();
        levels.push(next);
    }
    let tree = IntervalTree { widths, levels };
    tree.check()?;
    Ok(tree)
}

impl IntervalTree {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn width(&self, n: usize) -> f64 {
        self.widths[n]
    }

    pub fn intervals(&self, n: usize) -> &[(f64, f64)] {
        &self.levels[n]
    }

    pub fn interval(&self, n: usize, i: usize) -> (f64, f64) {
        self.levels[n][i]
    }

    /// Center `c_{n,i}` (0-based `i`).
    pub fn center(&self, n: usize, i: usize) -> f64 {
        let (lo, hi) = self.levels[n][i];
        0.5 * (lo + hi)
    }

    /// Plateau `J_{n,i}` as a closed interval.
    pub fn plateau(&self, n: usize, i: usize) -> (f64, f64) {
        let c = self.center(n, i);
        let q = self.widths[n] / 4.0;
        (c - q, c + q)
    }

    /// Length of every interval at level `n` (they all agree).
    pub fn interval_length(&self, n: usize) -> f64 {
        let (lo, hi) = self.levels[n][0];
        hi - lo
    }

    /// Verifies the structural invariants; used after building and after parsing.
    pub fn check(&self) -> Result<()> {
        if self.levels.is_empty() || self.widths.len() != self.levels.len() {
            return Err(Error::ConstraintViolation("malformed tree".into()));
        }
        if self.levels[0] != [(-1.0, 1.0)] {
            return Err(Error::ConstraintViolation("root must be (-1, 1)".into()));
        }
        for (n, level) in self.levels.iter().enumerate() {
            if level.len() != 1usize << n {
                return Err(Error::ConstraintViolation(format!(
                    "level {n} has {} intervals",
                    level.len()
                )));
            }
            let p = self.widths[n];
            let len0 = self.interval_length(n);
            if !(p > 0.0) {
                return Err(Error::ConstraintViolation(format!("p_{n} = {p} not positive")));
            }
            let mut prev_hi = f64::NEG_INFINITY;
            for (i, &(lo, hi)) in level.iter().enumerate() {
                let len = hi - lo;
                if !(lo < hi) || lo < prev_hi {
                    return Err(Error::ConstraintViolation(format!("I_{{{n},{i}}} out of order")));
                }
                if !(p < len / 2.0) {
                    return Err(Error::ConstraintViolation(format!(
                        "condpn fails at level {n}: p = {p}, |I| = {len}"
                    )));
                }
                if (len - len0).abs() > 1e-9 * len0 {
                    return Err(Error::ConstraintViolation(format!(
                        "level {n} lengths differ ({len} vs {len0})"
                    )));
                }
                prev_hi = hi;
            }
            if n > 0 && !(len0 < self.interval_length(n - 1) / 2.0) {
                return Err(Error::ConstraintViolation(format!("no length halving at level {n}")));
            }
            if n > 0 {
                let q = self.widths[n - 1] / 4.0;
                for (i, parent) in self.levels[n - 1].iter().enumerate() {
                    let c = 0.5 * (parent.0 + parent.1);
                    let left = level[2 * i];
                    let right = level[2 * i + 1];
                    if left.0 != parent.0 || right.1 != parent.1 || left.1 != c - q || right.0 != c + q
                    {
                        return Err(Error::ConstraintViolation(format!(
                            "children of I_{{{},{i}}} are not the components of I \\ J",
                            n - 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Walks the unique chain of intervals containing `x`, calling
    /// `visit(level, index, center, in_plateau)` until a plateau is hit or the
    /// depth limit is reached.
    fn descend(&self, x: f64, max_level: usize, mut visit: impl FnMut(usize, usize, f64, bool)) {
        if !(x > -1.0 && x < 1.0) {
            return;
        }
        let mut i = 0;
        for n in 0..=max_level.min(self.depth()) {
            let c = self.center(n, i);
            let q = self.widths[n] / 4.0;
            let on_plateau = (x - c).abs() <= q;
            visit(n, i, c, on_plateau);
            if on_plateau {
                return;
            }
            i = 2 * i + usize::from(x > c);
        }
    }

    /// First level whose plateau interior contains `x`.
    pub fn membership(&self, x: f64) -> Membership {
        let mut found = None;
        if x > -1.0 && x < 1.0 {
            let mut i = 0;
            for n in 0..=self.depth() {
                let c = self.center(n, i);
                let q = self.widths[n] / 4.0;
                if (x - c).abs() < q {
                    found = Some(n);
                    break;
                }
                if (x - c).abs() <= q {
                    // plateau endpoint: not interior, and every deeper interval excludes it
                    break;
                }
                i = 2 * i + usize::from(x > c);
            }
        }
        match found {
            Some(level) => Membership::InOpenSet { level },
            None => Membership::CantorCandidate { depth: self.depth() },
        }
    }

    /// The shallowest plateau interior meeting `(u0, u1)`, as
    /// `(level, index, intersection)`. Among plateaus of that level the one
    /// with the longest intersection wins.
    pub fn find_plateau(&self, u0: f64, u1: f64, max_level: usize) -> Option<(usize, usize, (f64, f64))> {
        if !(u0 < u1) {
            return None;
        }
        let mut frontier = vec![0usize];
        for n in 0..=max_level.min(self.depth()) {
            let mut best: Option<(usize, (f64, f64))> = None;
            for &i in &frontier {
                let (jlo, jhi) = self.plateau(n, i);
                let lo = jlo.max(u0);
                let hi = jhi.min(u1);
                if lo < hi && best.is_none_or(|(_, (a, b))| hi - lo > b - a) {
                    best = Some((i, (lo, hi)));
                }
            }
            if let Some((i, seg)) = best {
                return Some((n, i, seg));
            }
            if n == self.depth() {
                break;
            }
            frontier = frontier
                .iter()
                .flat_map(|&i| [2 * i, 2 * i + 1])
                .filter(|&k| {
                    let (lo, hi) = self.interval(n + 1, k);
                    lo < u1 && hi > u0
                })
                .collect();
            if frontier.is_empty() {
                break;
            }
        }
        None
    }
}

pub fn cantor_membership(tree: &IntervalTree, x: f64) -> Membership {
    tree.membership(x)
}

/// `F` truncated at the tree depth, together with everything needed to
/// evaluate it.
#[derive(Debug, Clone)]
pub struct CantorBumpFn {
    schedule: ParamSchedule,
    profile: BumpProfile,
    tree: IntervalTree,
}

impl CantorBumpFn {
    pub fn new(schedule: ParamSchedule, profile: BumpProfile, tree: IntervalTree) -> Result<Self> {
        if profile.transition_width != schedule.transition_width || profile.c4 != schedule.c4 {
            return Err(Error::ConstraintViolation(
                "profile does not match the schedule it was solved against".into(),
            ));
        }
        for n in 0..=tree.depth() {
            if tree.width(n) != schedule.width(n) {
                return Err(Error::ConstraintViolation(format!("tree width p_{n} disagrees")));
            }
        }
        Ok(CantorBumpFn {
            schedule,
            profile,
            tree,
        })
    }

    /// Convenience: profile, schedule and tree in one go.
    pub fn construct(eps: f64, c1: f64, c2: f64, depth: usize) -> Result<Self> {
        let profile = build_base_bump(0.5)?;
        let schedule = solve_parameters(eps, c1, c2, &profile)?;
        let tree = build_interval_tree(&schedule, depth)?;
        CantorBumpFn::new(schedule, profile, tree)
    }

    pub fn schedule(&self) -> &ParamSchedule {
        &self.schedule
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }

    pub fn tree(&self) -> &IntervalTree {
        &self.tree
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    /// `d^order/dx^order F_depth (x)`, summing the single active bump of each level.
    pub fn layered(&self, x: f64, depth: usize, order: u8) -> f64 {
        let mut acc = 0.0;
        self.tree.descend(x, depth, |n, _, c, _| {
            let a = self.schedule.amplitude(n);
            let p = self.tree.width(n);
            acc += a * p.powi(-(order as i32)) * self.profile.derivative((x - c) / p, order);
        });
        acc
    }

    pub fn value(&self, x: f64) -> f64 {
        self.layered(x, self.depth(), 0)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.layered(x, self.depth(), 1)
    }

    /// `F_depth''`; equals the true `F''` only on plateaus of level <= depth.
    pub fn second_truncated(&self, x: f64) -> f64 {
        self.layered(x, self.depth(), 2)
    }

    /// `(F_depth(x), sup |F - F_depth|)`.
    pub fn eval(&self, x: f64, depth: usize) -> (f64, f64) {
        let depth = depth.min(self.depth());
        (self.layered(x, depth, 0), self.schedule.tail_bound(depth))
    }

    /// Exact `F''(x)` for `x` inside a plateau interior.
    pub fn second_on_plateau(&self, x: f64) -> Result<f64> {
        match self.tree.membership(x) {
            Membership::InOpenSet { level } => Ok(self.layered(x, level, 2)),
            Membership::CantorCandidate { .. } => Err(Error::NotOnPlateau(x)),
        }
    }

    /// `F_depth(x)` in double-double arithmetic.
    pub fn value_dd(&self, x: Dd, depth: usize) -> Dd {
        let mut acc = Dd::ZERO;
        self.tree.descend(x.hi, depth, |n, _, c, _| {
            let a = self.schedule.amplitude(n);
            let p = self.tree.width(n);
            let u = (x - Dd::new(c)).div_f64(p);
            acc = acc + self.profile.value_dd(u).scale(a);
        });
        acc
    }

    pub fn document(&self) -> ScheduleDocument {
        ScheduleDocument {
            schema_version: SCHEDULE_SCHEMA_VERSION,
            schedule: self.schedule.clone(),
            tree: Some(TreeDoc::from(&self.tree)),
        }
    }
}

pub fn eval_f(f: &CantorBumpFn, x: f64, depth: usize) -> (f64, f64) {
    f.eval(x, depth)
}

pub fn eval_f_second_on_plateau(f: &CantorBumpFn, x: f64) -> Result<f64> {
    f.second_on_plateau(x)
}

/// Deterministic seeded point pairs in `[-1, 1]^2` with log-uniform separations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub count: usize,
    pub seed: u64,
    pub min_log10_sep: f64,
    pub max_log10_sep: f64,
}

impl PairSample {
    pub fn new(count: usize, seed: u64) -> Self {
        PairSample {
            count,
            seed,
            min_log10_sep: -12.0,
            max_log10_sep: 0.3,
        }
    }

    /// Pairs are generated sequentially, so a smaller sample is a prefix of a larger one.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| {
                let x: f64 = rng.gen_range(-1.0..1.0);
                let sep = 10f64.powf(rng.gen_range(self.min_log10_sep..self.max_log10_sep));
                let y = if rng.gen::<bool>() { x + sep } else { x - sep };
                (x, y.clamp(-1.0, 1.0))
            })
            .collect()
    }
}

/// `max |F'(x) - F'(y)| / |x - y|^(1 - eps)` over the sampled pairs, with
/// `F'` taken from the truncation at `depth`.
pub fn holder_seminorm(f: &CantorBumpFn, depth: usize, eps: f64, pairs: &PairSample) -> f64 {
    let depth = depth.min(f.depth());
    pairs
        .pairs()
        .par_iter()
        .filter(|(x, y)| (x - y).abs() > 1e-15)
        .map(|&(x, y)| {
            let dx = f.layered(x, depth, 1);
            let dy = f.layered(y, depth, 1);
            (dx - dy).abs() / (x - y).abs().powf(1.0 - eps)
        })
        .reduce(|| 0.0, f64::max)
}

pub const SCHEDULE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub depth: usize,
    #[serde(with = "real17::vec")]
    pub widths: Vec<f64>,
    pub levels: Vec<LevelDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDoc {
    #[serde(with = "real17::pairs")]
    pub intervals: Vec<(f64, f64)>,
}

impl From<&IntervalTree> for TreeDoc {
    fn from(t: &IntervalTree) -> Self {
        TreeDoc {
            depth: t.depth(),
            widths: t.widths.clone(),
            levels: t
                .levels
                .iter()
                .map(|l| LevelDoc { intervals: l.clone() })
                .collect(),
        }
    }
}

impl TryFrom<TreeDoc> for IntervalTree {
    type Error = Error;

    fn try_from(doc: TreeDoc) -> Result<Self> {
        if doc.depth > MAX_DEPTH || doc.levels.len() != doc.depth + 1 {
            return Err(Error::Parse(format!("tree depth {} inconsistent", doc.depth)));
        }
        let tree = IntervalTree {
            widths: doc.widths,
            levels: doc.levels.into_iter().map(|l| l.intervals).collect(),
        };
        tree.check().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(tree)
    }
}

/// The JSON document emitted by `construct-f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub schema_version: u32,
    pub schedule: ParamSchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeDoc>,
}

impl ScheduleDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates; the schedule must satisfy its invariants and the
    /// tree (if present) must be the one the schedule generates.
    pub fn from_json(text: &str) -> Result<(ParamSchedule, Option<IntervalTree>)> {
        let doc: ScheduleDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEDULE_SCHEMA_VERSION {
            return Err(Error::Parse(format!("unknown schema {}", doc.schema_version)));
        }
        if !doc.schedule.is_valid() {
            return Err(Error::Parse("schedule violates its invariants".into()));
        }
        let tree = match doc.tree {
            Some(t) => {
                let tree = IntervalTree::try_from(t)?;
                for n in 0..=tree.depth() {
                    if tree.width(n) != doc.schedule.width(n) {
                        return Err(Error::Parse(format!("p_{n} disagrees with the schedule")));
                    }
                }
                Some(tree)
            }
            None => None,
        };
        Ok((doc.schedule, tree))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f_half(depth: usize) -> CantorBumpFn {
        CantorBumpFn::construct(0.5, 1.0, 1.0, depth).unwrap()
    }

    #[test]
    fn bump_reference_values() {
        let b = build_base_bump(0.5).unwrap();
        assert_eq!(b.value(0.0), 1.0);
        assert_eq!(b.value(0.25), 0.75);
        assert_eq!(b.value(0.8), 0.0);
        assert_eq!(b.value(-0.8), 0.0);
        assert_eq!(b.derivative(0.1, 2), -8.0);
        assert!((b.derivative(0.3, 1) + b.derivative(-0.3, 1)).abs() < 1e-15);
    }

    #[test]
    fn bump_glue_is_c2() {
        let b = build_base_bump(0.5).unwrap();
        let x = 0.25 + 1e-12;
        assert!((b.value(x) - 0.75).abs() < 1e-10);
        assert!((b.derivative(x, 1) + 2.0).abs() < 1e-9);
        assert!((b.derivative(x, 2) + 8.0).abs() < 1e-8);
        let y = 0.75 - 1e-9;
        assert!(b.value(y).abs() < 1e-14);
        assert!(b.derivative(y, 1).abs() < 1e-14);
        assert!(b.derivative(y, 2).abs() < 1e-6);
    }

    #[test]
    fn narrow_glue_is_rejected() {
        assert!(matches!(build_base_bump(0.3), Err(Error::ConstraintViolation(_))));
        assert!(build_base_bump(0.0).is_err());
        assert!(build_base_bump(0.6).is_err());
    }

    #[test]
    fn schedule_invariants_and_geom() {
        let profile = build_base_bump(0.5).unwrap();
        let s = solve_parameters(0.5, 1.0, 1.0, &profile).unwrap();
        assert!(s.invariants().iter().all(|c| c.holds));
        assert!((s.a0 - 0.25 * s.p0 * s.p0).abs() <= 1e-16);
        for n in 0..12 {
            let lhs = s.amplitude(n) / s.width(n).powi(2);
            let rhs = s.scale * s.growth.powi(n as i32);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn sup_norm_constraint_binds_p0() {
        let profile = build_base_bump(0.5).unwrap();
        let loose = solve_parameters(0.5, 1.0, 1.0, &profile).unwrap();
        let tight = solve_parameters(0.9, 0.01, 10.0, &profile).unwrap();
        assert!(tight.is_valid());
        assert!(tight.p0 < loose.p0);
        // shrinking p0 once more would have been unnecessary
        assert!(tight.scale * (tight.p0 / 0.9).powi(2) / (1.0 - tight.gamma) >= tight.c1);
    }

    #[test]
    fn rejects_bad_eps() {
        let profile = build_base_bump(0.5).unwrap();
        assert!(solve_parameters(1.5, 1.0, 1.0, &profile).is_err());
        assert!(solve_parameters(0.0, 1.0, 1.0, &profile).is_err());
        assert!(solve_parameters(0.5, -1.0, 1.0, &profile).is_err());
    }

    #[test]
    fn tree_first_generations() {
        let f = f_half(3);
        let t = f.tree();
        let p0 = f.schedule().p0;
        assert_eq!(t.interval(0, 0), (-1.0, 1.0));
        assert_eq!(t.plateau(0, 0), (-p0 / 4.0, p0 / 4.0));
        assert_eq!(t.interval(1, 0), (-1.0, -p0 / 4.0));
        assert_eq!(t.interval(1, 1), (p0 / 4.0, 1.0));
        for n in 0..=3 {
            assert_eq!(t.intervals(n).len(), 1 << n);
        }
    }

    #[test]
    fn membership_examples() {
        let f = f_half(6);
        let t = f.tree();
        assert_eq!(cantor_membership(t, 0.0), Membership::InOpenSet { level: 0 });
        assert_eq!(cantor_membership(t, 1.0), Membership::CantorCandidate { depth: 6 });
        assert_eq!(cantor_membership(t, -1.0), Membership::CantorCandidate { depth: 6 });
        let c23 = t.center(2, 2);
        assert_eq!(cantor_membership(t, c23), Membership::InOpenSet { level: 2 });
        // plateau endpoints are not interior points
        let (_, hi) = t.plateau(0, 0);
        assert!(matches!(cantor_membership(t, hi), Membership::CantorCandidate { .. }));
    }

    #[test]
    fn eval_examples() {
        let f = f_half(4);
        let s = f.schedule().clone();
        let (v, tail) = f.eval(2.0, 4);
        assert_eq!(v, 0.0);
        assert_eq!(tail, s.tail_bound(4));
        let (v0, _) = f.eval(0.0, 4);
        assert!(v0 >= s.a0);
        // center of I_{1,1}: level-1 bump peak plus the level-0 contribution there
        let c11 = f.tree().center(1, 0);
        let layer0 = s.a0 * f.profile().value(c11 / s.p0);
        let (v1, _) = f.eval(c11, 1);
        assert!((v1 - (s.amplitude(1) + layer0)).abs() < 1e-15);
    }

    #[test]
    fn plateau_second_derivative() {
        let f = f_half(6);
        let s = f.schedule();
        let at0 = f.second_on_plateau(0.0).unwrap();
        assert!((at0 + 8.0 * s.a0 / (s.p0 * s.p0)).abs() < 1e-12);
        assert!(at0 <= -2.0 * s.c2);
        for n in 0..=6 {
            for i in [0, (1 << n) - 1] {
                let x = f.tree().center(n, i) + 0.1 * s.width(n);
                let v = f.second_on_plateau(x).unwrap();
                assert!(v <= -4.0 * s.scale * s.growth.powi(n as i32));
            }
        }
        assert!(matches!(f.second_on_plateau(0.99), Err(Error::NotOnPlateau(_))));
    }

    #[test]
    fn find_plateau_prefers_shallow_levels() {
        let f = f_half(8);
        let t = f.tree();
        let (n, i, (lo, hi)) = t.find_plateau(-0.5, 0.5, 8).unwrap();
        assert_eq!((n, i), (0, 0));
        assert!(lo < hi);
        let c = t.center(3, 5);
        let (n, _, _) = t.find_plateau(c - 1e-6, c + 1e-6, 8).unwrap();
        assert_eq!(n, 3);
    }

    #[test]
    fn complement_has_no_interior_at_resolution() {
        let f = f_half(8);
        let t = f.tree();
        let len = t.interval_length(8);
        let mut x = -1.0;
        while x + len <= 1.0 {
            assert!(t.find_plateau(x, x + len, 8).is_some(), "gap at {x}");
            x += len / 3.0;
        }
    }

    #[test]
    fn document_round_trip() {
        let f = f_half(3);
        let text = f.document().to_json().unwrap();
        let (s, tree) = ScheduleDocument::from_json(&text).unwrap();
        assert_eq!(&s, f.schedule());
        assert_eq!(tree.as_ref(), Some(f.tree()));
    }

    #[test]
    fn tampered_document_is_rejected() {
        let f = f_half(2);
        let mut doc = f.document();
        doc.schedule.gamma = 0.9;
        assert!(ScheduleDocument::from_json(&doc.to_json().unwrap()).is_err());
        let mut doc = f.document();
        doc.tree.as_mut().unwrap().levels[1].intervals[0].1 = 0.0;
        assert!(ScheduleDocument::from_json(&doc.to_json().unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_supported(x in -3.0f64..3.0) {
            let f = f_half(8);
            let s = f.schedule();
            let (v, _) = f.eval(x, 8);
            prop_assert!(v >= 0.0);
            prop_assert!(v <= s.sup_bound());
            prop_assert!(s.sup_bound() < s.c1);
            if x.abs() >= 1.0 {
                prop_assert_eq!(v, 0.0);
            }
        }

        #[test]
        fn holder_is_monotone_in_sample_size(seed in 0u64..1000) {
            let f = f_half(6);
            let small = holder_seminorm(&f, 6, 0.5, &PairSample::new(200, seed));
            let large = holder_seminorm(&f, 6, 0.5, &PairSample::new(400, seed));
            prop_assert!(large >= small);
        }
    }
}
