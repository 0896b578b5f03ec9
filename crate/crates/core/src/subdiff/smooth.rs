use crate::grid::{dist, sqnorm, GridFunction, Point};
use crate::subdiff::eps::{validate_base, verify};
use crate::tolerance::Tolerance;
use crate::witness::{Scope, SubgradientWitness};
use crate::{Error, Result};

fn ball(f: &GridFunction, y: usize, delta: f64) -> Result<Vec<usize>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {delta}"
        )));
    }
    let nodes = f.grid().ball(&f.grid().node(y), delta);
    if nodes.len() < 2 {
        return Err(Error::EmptyBall {
            node: y,
            radius: delta,
        });
    }
    Ok(nodes)
}

/// `(λ/2, ∇f(y) + λy)` for a gradient that is `λ`-Lipschitz on `B(delta, y)`.
///
/// The Lipschitz claim is sampled over all node pairs of the ball.
pub fn smooth_local_subgradient(
    f: &GridFunction,
    grad: impl Fn(&Point) -> Point,
    y: usize,
    lambda: f64,
    delta: f64,
    tol: Tolerance,
) -> Result<SubgradientWitness> {
    validate_base(f, y)?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let nodes = ball(f, y, delta)?;
    let g = f.grid();
    let grads: Vec<Point> = nodes.iter().map(|&i| grad(&g.node(i))).collect();
    for (p, &i) in nodes.iter().enumerate() {
        for (q, &j) in nodes.iter().enumerate().skip(p + 1) {
            let dg = dist(&grads[p], &grads[q]);
            let dx = dist(&g.node(i), &g.node(j));
            if dg > lambda * dx * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::RejectedInput(format!(
                    "gradient difference {dg} exceeds {lambda}·{dx} between nodes {i} and {j}"
                )));
            }
        }
    }
    let yp = g.node(y);
    let gy = grad(&yp);
    let v = [gy[0] + lambda * yp[0], gy[1] + lambda * yp[1]];
    Ok(verify(
        f,
        y,
        0.5 * lambda,
        v,
        0.0,
        tol,
        Some(&nodes),
        Scope::Local(delta),
    ))
}

/// `(γ/2, ∇f(x) + γx)` when `γ` bounds the second derivative on `B(delta, x)`.
///
/// The bound is sampled with second differences along grid lines inside the ball.
pub fn c2_local_subgradient(
    f: &GridFunction,
    grad: impl Fn(&Point) -> Point,
    gamma: f64,
    x: usize,
    delta: f64,
    tol: Tolerance,
) -> Result<SubgradientWitness> {
    validate_base(f, x)?;
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    let nodes = ball(f, x, delta)?;
    let g = f.grid();
    let inside = |i: usize| dist(&g.node(i), &g.node(x)) < delta;
    for d in g.line_offsets() {
        let step2 = sqnorm(&g.offset_vector(d));
        for &i in &nodes {
            if let (Some(a), Some(b)) = (g.shift(i, d, -1), g.shift(i, d, 1)) {
                if !(inside(a) && inside(b)) {
                    continue;
                }
                let (fa, fm, fb) = (f.value(a), f.value(i), f.value(b));
                if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
                    continue;
                }
                let second = (fa + fb - 2.0 * fm) / step2;
                if second.abs() > gamma * (1.0 + 1e-9) + 1e-9 {
                    return Err(Error::RejectedInput(format!(
                        "second difference {second} at node {i} exceeds gamma = {gamma}"
                    )));
                }
            }
        }
    }
    let xp = g.node(x);
    let gx = grad(&xp);
    let v = [gx[0] + gamma * xp[0], gx[1] + gamma * xp[1]];
    Ok(verify(
        f,
        x,
        0.5 * gamma,
        v,
        0.0,
        tol,
        Some(&nodes),
        Scope::Local(delta),
    ))
}
