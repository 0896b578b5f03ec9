use crate::envelopes::CurvatureSchedule;
use crate::grid::{dot, point_from, sqnorm, GridFunction, Point};
use crate::slopes::{grid_constraints, probe_constraints, SlopeBuilder};
use crate::tolerance::Tolerance;
use crate::witness::{Scope, SubgradientWitness, Verification};
use crate::{Error, Result};

pub(crate) fn validate_base(f: &GridFunction, xbar: usize) -> Result<()> {
    if xbar >= f.grid().len() {
        return Err(Error::InvalidArgument(format!("node {xbar} out of range")));
    }
    if !f.in_domain(xbar) {
        return Err(Error::OutsideDomain { node: xbar });
    }
    Ok(())
}

pub(crate) fn slope_point(f: &GridFunction, v: &[f64]) -> Result<Point> {
    if v.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: v.len(),
        });
    }
    point_from(v)
}

/// Nodewise test of `f(x) − f(x̄) ≥ ⟨v, x−x̄⟩ − a‖x‖² + a‖x̄‖² − eps`, within
/// `tol`, over `nodes` (every node when `None`).
pub(crate) fn verify(
    f: &GridFunction,
    xbar: usize,
    a: f64,
    v: Point,
    eps: f64,
    tol: Tolerance,
    nodes: Option<&[usize]>,
    scope: Scope,
) -> SubgradientWitness {
    let g = f.grid();
    let xb = g.node(xbar);
    let fb = f.value(xbar);
    let nb = sqnorm(&xb);
    let mut worst: Option<(usize, f64, f64)> = None; // (node, excess, raw)
    let mut visit = |i: usize| {
        let fx = f.value(i);
        if !fx.is_finite() {
            return;
        }
        let x = g.node(i);
        let d = [x[0] - xb[0], x[1] - xb[1]];
        let s = [x[0] + xb[0], x[1] + xb[1]];
        let lin = dot(&v, &d);
        let lhs = fx - fb;
        let rhs = lin - a * dot(&d, &s) - eps;
        let raw = rhs - lhs;
        let mag = fx.abs() + fb.abs() + lin.abs() + a * (sqnorm(&x) + nb) + eps;
        let excess = raw - tol.allowance(mag);
        if worst.is_none_or(|w| excess > w.1) {
            worst = Some((i, excess, raw));
        }
    };
    match nodes {
        Some(list) => list.iter().copied().for_each(&mut visit),
        None => (0..g.len()).for_each(&mut visit),
    }
    let (status, worst_node, worst_amount) = match worst {
        Some((node, excess, raw)) if excess > 0.0 => {
            (Verification::Refuted { node, amount: raw }, Some(node), raw)
        }
        Some((node, _, raw)) => (Verification::VerifiedOnGrid, Some(node), raw),
        None => (Verification::VerifiedOnGrid, None, 0.0),
    };
    SubgradientWitness {
        node: xbar,
        point: xb,
        dim: f.dim(),
        a,
        v,
        eps,
        scope,
        status,
        worst_node,
        worst_amount,
    }
}

/// Checks that `(a, v)` is an `eps`-subgradient of `f` at node `xbar` on the grid.
pub fn check_eps_subgradient(
    f: &GridFunction,
    xbar: usize,
    a: f64,
    v: &[f64],
    eps: f64,
    tol: Tolerance,
) -> Result<SubgradientWitness> {
    validate_base(f, xbar)?;
    if !(a >= 0.0 && eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need a >= 0 and eps >= 0, got a = {a}, eps = {eps}"
        )));
    }
    let v = slope_point(f, v)?;
    Ok(verify(f, xbar, a, v, eps, tol, None, Scope::Global))
}

/// Searches the schedule for the smallest curvature with a supporting slope
/// at `xbar`, returning the minimal-norm slope for it.
///
/// When `f` was sampled from an expression, candidate slopes are also tested
/// against the expression at points between `xbar` and its neighbours, so a
/// slope that only works because the grid is coarse is discarded.
pub fn find_eps_subgradient(
    f: &GridFunction,
    xbar: usize,
    eps: f64,
    sched: &CurvatureSchedule,
    tol: Tolerance,
) -> Result<Option<SubgradientWitness>> {
    validate_base(f, xbar)?;
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be >= 0, got {eps}"
        )));
    }
    for &a in sched.values() {
        let mut b = SlopeBuilder::new(f.dim());
        grid_constraints(f, xbar, a, eps, None, &mut b);
        probe_constraints(f, xbar, a, eps, &mut b);
        let Some(v) = b.build().min_norm() else {
            continue;
        };
        let w = verify(f, xbar, a, v, eps, tol, None, Scope::Global);
        if w.is_verified() {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn ball_nodes(f: &GridFunction, xbar: usize, delta: f64) -> Result<Vec<usize>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {delta}"
        )));
    }
    let nodes = f.grid().ball(&f.grid().node(xbar), delta);
    if nodes.iter().all(|&i| i == xbar) {
        return Err(Error::EmptyBall {
            node: xbar,
            radius: delta,
        });
    }
    Ok(nodes)
}

/// Same inequality as [`check_eps_subgradient`] with `eps = 0`, over the
/// nodes of the open ball `B(delta, x̄)`.
pub fn check_local_subgradient(
    f: &GridFunction,
    xbar: usize,
    a: f64,
    v: &[f64],
    delta: f64,
    tol: Tolerance,
) -> Result<SubgradientWitness> {
    validate_base(f, xbar)?;
    if !(a >= 0.0) {
        return Err(Error::InvalidArgument(format!("need a >= 0, got {a}")));
    }
    let v = slope_point(f, v)?;
    let nodes = ball_nodes(f, xbar, delta)?;
    Ok(verify(
        f,
        xbar,
        a,
        v,
        0.0,
        tol,
        Some(&nodes),
        Scope::Local(delta),
    ))
}

/// Smallest schedule curvature admitting a local subgradient on `B(delta, x̄)`,
/// with the minimal-norm slope.
pub fn find_local_subgradient(
    f: &GridFunction,
    xbar: usize,
    delta: f64,
    sched: &CurvatureSchedule,
    tol: Tolerance,
) -> Result<Option<SubgradientWitness>> {
    validate_base(f, xbar)?;
    let nodes = ball_nodes(f, xbar, delta)?;
    for &a in sched.values() {
        let mut b = SlopeBuilder::new(f.dim());
        grid_constraints(f, xbar, a, 0.0, Some(&nodes), &mut b);
        let Some(v) = b.build().min_norm() else {
            continue;
        };
        let w = verify(f, xbar, a, v, 0.0, tol, Some(&nodes), Scope::Local(delta));
        if w.is_verified() {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
