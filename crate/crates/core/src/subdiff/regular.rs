use crate::grid::{dot, sqnorm, GridFunction, Point};
use crate::subdiff::eps::{slope_point, validate_base};
use crate::tolerance::Tolerance;
use crate::{Error, Result};

/// Worst failure of the prox-regularity inequality found by the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxRegularViolation {
    pub x: usize,
    pub x_prime: usize,
    pub u: Point,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxRegularReport {
    pub holds: bool,
    pub pairs_checked: usize,
    pub candidates_passed: usize,
    pub worst: Option<ProxRegularViolation>,
}

/// Semi-decision for prox-regularity of `f` at `x̄` for the slope `v`.
///
/// Base points are the nodes `x` of `B(x̄, r)` with `|f(x) − f(x̄)| < r`.
/// Candidate slopes `u` are `v` and 5 shells × 8 directions (2 in 1D)
/// inside `B(v, r)`; a candidate is kept at `x` when the proximal inequality
/// holds against the grid neighbours of `x`. Every kept `(x, u)` is then
/// tested against all nodes `x'` of the ball.
pub fn check_prox_regular(
    f: &GridFunction,
    xbar: usize,
    v: &[f64],
    rho: f64,
    r: f64,
    tol: Tolerance,
) -> Result<ProxRegularReport> {
    validate_base(f, xbar)?;
    let v = slope_point(f, v)?;
    if !(rho >= 0.0 && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need rho >= 0 and r > 0, got rho = {rho}, r = {r}"
        )));
    }
    let g = f.grid();
    let xb = g.node(xbar);
    let ball = g.ball(&xb, r);
    if ball.len() < 2 {
        return Err(Error::EmptyBall {
            node: xbar,
            radius: r,
        });
    }
    let fb = f.value(xbar);
    let base: Vec<usize> = ball
        .iter()
        .copied()
        .filter(|&i| f.value(i).is_finite() && (f.value(i) - fb).abs() < r)
        .collect();

    let dirs: Vec<Point> = if g.dim() == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        (0..8)
            .map(|k| {
                let t = std::f64::consts::FRAC_PI_4 * k as f64;
                [t.cos(), t.sin()]
            })
            .collect()
    };
    let mut cands = vec![v];
    for k in 1..=5 {
        let s = 0.999 * r * k as f64 / 5.0;
        for d in &dirs {
            cands.push([v[0] + s * d[0], v[1] + s * d[1]]);
        }
    }

    let gap = |x: usize, xp: usize, u: &Point| -> (f64, f64) {
        let (p, q) = (g.node(x), g.node(xp));
        let d = [q[0] - p[0], q[1] - p[1]];
        let (fx, fq) = (f.value(x), f.value(xp));
        let lin = dot(u, &d);
        let quad = 0.5 * rho * sqnorm(&d);
        let raw = (fx + lin - quad) - fq;
        (raw, tol.allowance(fx.abs() + fq.abs() + lin.abs() + quad))
    };

    let mut pairs = 0;
    let mut passed = 0;
    let mut worst: Option<ProxRegularViolation> = None;
    let mut holds = true;
    for &x in &base {
        for u in &cands {
            let local_ok = g
                .axis_neighbors(x)
                .filter(|&j| f.value(j).is_finite())
                .all(|j| {
                    let (raw, allow) = gap(x, j, u);
                    raw <= allow
                });
            if !local_ok {
                continue;
            }
            passed += 1;
            for &xp in &ball {
                if !f.value(xp).is_finite() {
                    continue;
                }
                pairs += 1;
                let (raw, allow) = gap(x, xp, u);
                if raw > allow {
                    holds = false;
                }
                if worst.is_none_or(|w| raw > w.amount) {
                    worst = Some(ProxRegularViolation {
                        x,
                        x_prime: xp,
                        u: *u,
                        amount: raw,
                    });
                }
            }
        }
    }
    Ok(ProxRegularReport {
        holds,
        pairs_checked: pairs,
        candidates_passed: passed,
        worst,
    })
}
