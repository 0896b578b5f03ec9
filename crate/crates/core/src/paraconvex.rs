//! Weak-convexity constants and γ-paraconvexity inequalities.
//!
//! In two dimensions convexity is tested along the axes and both diagonals
//! only, which is necessary but not sufficient for convexity.

use crate::envelopes::is_discretely_convex;
use crate::grid::{sqnorm, Grid, GridFunction, Point};
use crate::slopes::{grid_constraints, SlopeBuilder};
use crate::subdiff::verify;
use crate::tolerance::Tolerance;
use crate::witness::{Scope, SubgradientWitness};
use crate::{Error, Result};

/// Refinement ratio above which the required constant counts as diverging.
pub const DIVERGENCE_RATIO: f64 = 1.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constant {
    Finite(f64),
    NoFiniteConstant,
}

/// A triple `(x, y, t)`; for second differences `t = ½` and the midpoint is
/// the node where the difference was taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub x: Point,
    pub y: Point,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParaconvexityReport {
    pub constant: Constant,
    pub gamma: f64,
    pub region: (Point, Point),
    pub evidence: Option<Triple>,
    /// Required constant at the base mesh and, when the function has a
    /// source expression, at two successive halvings.
    pub required: Vec<f64>,
}

/// Least `c ≥ 0` making every second difference of `f + c‖·‖²` nonnegative,
/// with the triple that forces it. `None` when some finite pair straddles an
/// infinite node, which no `c` can repair.
fn required_constant(grid: &Grid, values: &[f64]) -> Option<(f64, Option<Triple>)> {
    let mut c: f64 = 0.0;
    let mut ev = None;
    for d in grid.line_offsets() {
        let off = grid.offset_vector(d);
        let step2 = sqnorm(&off);
        for i in 0..grid.len() {
            let (Some(a), Some(b)) = (grid.shift(i, d, -1), grid.shift(i, d, 1)) else {
                continue;
            };
            let (fa, fm, fb) = (values[a], values[i], values[b]);
            if !(fa.is_finite() && fb.is_finite()) {
                continue;
            }
            if !fm.is_finite() {
                return None;
            }
            let need = -(fa + fb - 2.0 * fm) / (2.0 * step2);
            if need > c {
                c = need;
                ev = Some(Triple {
                    x: grid.node(a),
                    y: grid.node(b),
                    t: 0.5,
                });
            }
        }
    }
    Some((c, ev))
}

/// Weak-convexity constant of `f` on the sub-box `[lo, hi]`.
///
/// The constant is computed in closed form from second differences. If the
/// function came from an expression, it is recomputed on meshes refined by 2
/// and 4; two successive growth ratios of at least [`DIVERGENCE_RATIO`] with a
/// base value above `tol` give [`Constant::NoFiniteConstant`].
pub fn paraconvexity_constant(
    f: &GridFunction,
    lo: &[f64],
    hi: &[f64],
    tol: f64,
) -> Result<ParaconvexityReport> {
    let u = f.restrict(lo, hi)?;
    let region = (u.grid().lo(), u.grid().hi());
    let report = |constant, evidence, required| ParaconvexityReport {
        constant,
        gamma: 2.0,
        region,
        evidence,
        required,
    };
    let Some((c1, ev)) = required_constant(u.grid(), u.values()) else {
        return Ok(report(
            Constant::NoFiniteConstant,
            None,
            vec![f64::INFINITY],
        ));
    };
    let mut required = vec![c1];
    if u.source().is_some() {
        for factor in [2, 4] {
            let r = u.refined(factor).expect("source checked")?;
            match required_constant(r.grid(), r.values()) {
                Some((c, _)) => required.push(c),
                None => required.push(f64::INFINITY),
            }
        }
        let (c2, c3) = (required[1], required[2]);
        if c1 > tol && c2 >= DIVERGENCE_RATIO * c1 && c3 >= DIVERGENCE_RATIO * c2 {
            return Ok(report(Constant::NoFiniteConstant, ev, required));
        }
    }
    debug_assert!(is_discretely_convex(
        u.grid(),
        &u.plus_quadratic(c1),
        1e-9 * (1.0 + u.max_abs_finite() + c1 * sqnorm(&u.grid().hi()).max(sqnorm(&u.grid().lo())))
    ));
    Ok(report(Constant::Finite(c1), ev, required))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSampleSpec {
    /// `t` runs over `k / t_steps`, `k = 0..=t_steps`.
    pub t_steps: usize,
    pub pair_cap: usize,
    pub tol: Tolerance,
}

impl Default for GammaSampleSpec {
    fn default() -> Self {
        GammaSampleSpec {
            t_steps: 8,
            pair_cap: 200_000,
            tol: Tolerance::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaViolation {
    pub triple: Triple,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    pub holds: bool,
    pub pairs_checked: usize,
    pub worst: Option<GammaViolation>,
}

/// Node pairs ordered by separation, shortest first, up to `cap`.
fn pairs_by_distance(grid: &Grid, cap: usize) -> Vec<(usize, usize)> {
    let [n1, n2] = grid.shape();
    let h = grid.spacing();
    let mut offsets: Vec<[isize; 2]> = Vec::new();
    for b in 0..n2 as isize {
        for a in -(n1 as isize - 1)..n1 as isize {
            if b > 0 || a > 0 {
                offsets.push([a, b]);
            }
        }
    }
    let len2 = |d: &[isize; 2]| (d[0] as f64 * h[0]).powi(2) + (d[1] as f64 * h[1]).powi(2);
    offsets.sort_by(|p, q| len2(p).total_cmp(&len2(q)).then(p.cmp(q)));
    let mut out = Vec::new();
    for d in offsets {
        for i in 0..grid.len() {
            if let Some(j) = grid.shift(i, d, 1) {
                out.push((i, j));
                if out.len() >= cap {
                    return out;
                }
            }
        }
    }
    out
}

fn gamma_scan(
    f: &GridFunction,
    gamma: f64,
    cc: f64,
    spec: &GammaSampleSpec,
    strong: bool,
) -> Result<GammaReport> {
    if !(gamma > 0.0 && cc > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need gamma > 0 and C > 0, got gamma = {gamma}, C = {cc}"
        )));
    }
    if spec.t_steps < 1 {
        return Err(Error::InvalidArgument("t_steps must be at least 1".into()));
    }
    let g = f.grid();
    let pairs = pairs_by_distance(g, spec.pair_cap);
    let mut worst: Option<GammaViolation> = None;
    let mut holds = true;
    for &(i, j) in &pairs {
        let (fx, fy) = (f.value(i), f.value(j));
        if !(fx.is_finite() && fy.is_finite()) {
            continue;
        }
        let (x, y) = (g.node(i), g.node(j));
        let d = sqnorm(&[x[0] - y[0], x[1] - y[1]]).sqrt();
        let pen = cc * d.powf(gamma);
        for k in 1..spec.t_steps {
            let t = k as f64 / spec.t_steps as f64;
            let z = [t * x[0] + (1.0 - t) * y[0], t * x[1] + (1.0 - t) * y[1]];
            let fz = f.eval_at(&z);
            let w = if strong { t.min(1.0 - t) } else { 1.0 };
            let rhs = t * fx + (1.0 - t) * fy + w * pen;
            let amount = fz - rhs;
            let allow = spec
                .tol
                .allowance(fz.abs() + t * fx.abs() + (1.0 - t) * fy.abs() + w * pen);
            if amount > allow {
                holds = false;
            }
            if worst.is_none_or(|v| amount > v.amount) {
                worst = Some(GammaViolation {
                    triple: Triple { x, y, t },
                    amount,
                });
            }
        }
    }
    Ok(GammaReport {
        holds,
        pairs_checked: pairs.len(),
        worst,
    })
}

/// `f(tx + (1−t)y) ≤ t f(x) + (1−t) f(y) + C‖x−y‖^γ` over sampled triples.
/// Values between nodes come from [`GridFunction::eval_at`].
pub fn check_gamma_paraconvex(
    f: &GridFunction,
    gamma: f64,
    c: f64,
    spec: &GammaSampleSpec,
) -> Result<GammaReport> {
    gamma_scan(f, gamma, c, spec, false)
}

/// As [`check_gamma_paraconvex`] with the penalty weighted by `min{t, 1−t}`.
pub fn check_strong_gamma_paraconvex(
    f: &GridFunction,
    gamma: f64,
    c: f64,
    spec: &GammaSampleSpec,
) -> Result<GammaReport> {
    gamma_scan(f, gamma, c, spec, true)
}

/// `(c, v)` with `v` the minimal-norm supporting slope of `f + c‖·‖²` at `x̄`,
/// verified on the whole grid of `f`.
pub fn paraconvex_subgradient(
    f: &GridFunction,
    c: f64,
    xbar: usize,
    tol: Tolerance,
) -> Result<SubgradientWitness> {
    if xbar >= f.grid().len() {
        return Err(Error::InvalidArgument(format!("node {xbar} out of range")));
    }
    if !f.in_domain(xbar) {
        return Err(Error::OutsideDomain { node: xbar });
    }
    if !(c >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "constant must be >= 0, got {c}"
        )));
    }
    let mut b = SlopeBuilder::new(f.dim());
    grid_constraints(f, xbar, c, 0.0, None, &mut b);
    let v = b.build().min_norm().ok_or_else(|| Error::NoContact {
        node: xbar,
        reason: format!("hull of f + {c}|x|^2 does not touch"),
    })?;
    let w = verify(f, xbar, c, v, 0.0, tol, None, Scope::Global);
    if w.is_verified() {
        Ok(w)
    } else {
        Err(Error::VerificationFailed(Box::new(w)))
    }
}
