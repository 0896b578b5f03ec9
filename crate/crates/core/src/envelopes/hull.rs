use crate::envelopes::CurvatureSchedule;
use crate::grid::{sqnorm, Grid, GridFunction};
use crate::Result;

/// Largest discretely convex function below `g`.
///
/// One dimension: exact lower hull of the finite `(node, value)` pairs, `+∞`
/// outside the span of the finite nodes. Two dimensions: discrete
/// Legendre–Fenchel biconjugate over a slope grid spanning the largest
/// divided difference on each axis; nodes where `g = +∞` stay `+∞`.
pub fn convex_hull_grid(g: &GridFunction) -> Result<GridFunction> {
    let values = hull_values(g.grid(), g.values());
    g.with_values(values)
}

pub(crate) fn hull_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    if grid.dim() == 1 {
        lower_hull_1d(grid, values)
    } else {
        legendre_2d(grid, values)
    }
}

fn lower_hull_1d(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let pts: Vec<(f64, f64)> = (0..grid.len())
        .filter(|&i| values[i].is_finite())
        .map(|i| (grid.node(i)[0], values[i]))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = vec![f64::INFINITY; grid.len()];
    let mut seg = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let x = grid.node(i)[0];
        if x < hull[0].0 || x > hull[hull.len() - 1].0 {
            continue;
        }
        while seg + 1 < hull.len() && hull[seg + 1].0 < x {
            seg += 1;
        }
        *slot = if seg + 1 == hull.len() || hull[seg].0 == x {
            hull[seg].1
        } else {
            let (p, q) = (hull[seg], hull[seg + 1]);
            if q.0 == x {
                q.1
            } else {
                let t = (x - p.0) / (q.0 - p.0);
                p.1 + t * (q.1 - p.1)
            }
        };
    }
    // Clamp roundoff so the hull never exceeds the data.
    for (o, v) in out.iter_mut().zip(values) {
        if *o > *v {
            *o = *v;
        }
    }
    out
}

fn legendre_2d(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let [n1, n2] = grid.shape();
    let xs1: Vec<f64> = (0..n1).map(|i| grid.node(grid.flat([i, 0]))[0]).collect();
    let xs2: Vec<f64> = (0..n2).map(|j| grid.node(grid.flat([0, j]))[1]).collect();
    let h = grid.spacing();
    let mut lip = [0.0f64; 2];
    for j in 0..n2 {
        for i in 0..n1 {
            let v = values[grid.flat([i, j])];
            if !v.is_finite() {
                continue;
            }
            if i + 1 < n1 {
                let w = values[grid.flat([i + 1, j])];
                if w.is_finite() {
                    lip[0] = lip[0].max((w - v).abs() / h[0]);
                }
            }
            if j + 1 < n2 {
                let w = values[grid.flat([i, j + 1])];
                if w.is_finite() {
                    lip[1] = lip[1].max((w - v).abs() / h[1]);
                }
            }
        }
    }
    let slopes = |l: f64, n: usize| -> Vec<f64> {
        let l = if l > 0.0 { l } else { 1.0 };
        let m = 2 * n + 1;
        (0..m)
            .map(|k| -l + 2.0 * l * k as f64 / (m - 1) as f64)
            .collect()
    };
    let s1 = slopes(lip[0], n1);
    let s2 = slopes(lip[1], n2);
    let (m1, m2) = (s1.len(), s2.len());
    let neg = f64::NEG_INFINITY;

    // a[p][j] = max_i s1[p]·x1[i] − g(i, j)
    let mut a = vec![neg; m1 * n2];
    for j in 0..n2 {
        for (p, &s) in s1.iter().enumerate() {
            let mut best = neg;
            for i in 0..n1 {
                let v = values[grid.flat([i, j])];
                if v.is_finite() {
                    best = best.max(s * xs1[i] - v);
                }
            }
            a[p * n2 + j] = best;
        }
    }
    // conj[p][q] = max_j s2[q]·x2[j] + a[p][j]
    let mut conj = vec![neg; m1 * m2];
    for p in 0..m1 {
        for (q, &s) in s2.iter().enumerate() {
            let mut best = neg;
            for j in 0..n2 {
                let t = a[p * n2 + j];
                if t > neg {
                    best = best.max(s * xs2[j] + t);
                }
            }
            conj[p * m2 + q] = best;
        }
    }
    // c[p][j] = max_q s2[q]·x2[j] − conj[p][q]
    let mut c = vec![neg; m1 * n2];
    for p in 0..m1 {
        for j in 0..n2 {
            let mut best = neg;
            for (q, &s) in s2.iter().enumerate() {
                let t = conj[p * m2 + q];
                if t.is_finite() {
                    best = best.max(s * xs2[j] - t);
                }
            }
            c[p * n2 + j] = best;
        }
    }
    let mut out = vec![f64::INFINITY; grid.len()];
    for j in 0..n2 {
        for (i, &x1) in xs1.iter().enumerate().take(n1) {
            let k = grid.flat([i, j]);
            if !values[k].is_finite() {
                continue;
            }
            let mut best = neg;
            for p in 0..m1 {
                let t = c[p * n2 + j];
                if t > neg {
                    best = best.max(s1[p] * x1 + t);
                }
            }
            out[k] = best.min(values[k]);
        }
    }
    out
}

/// `H(x) = max_a [hull(f + a‖·‖²)(x) − a‖x‖²]` over the schedule, clamped to `≤ f`.
pub fn phi_hull(f: &GridFunction, sched: &CurvatureSchedule) -> Result<GridFunction> {
    let grid = f.grid();
    let norms: Vec<f64> = grid.nodes().map(|p| sqnorm(&p)).collect();
    let mut h = vec![f64::NEG_INFINITY; grid.len()];
    for &a in sched.values() {
        let lifted = f.plus_quadratic(a);
        let hull = hull_values(grid, &lifted);
        for i in 0..grid.len() {
            if hull[i].is_finite() {
                h[i] = h[i].max(hull[i] - a * norms[i]);
            } else if hull[i] == f64::INFINITY && !f.value(i).is_finite() {
                h[i] = f64::INFINITY;
            }
        }
    }
    for (i, v) in h.iter_mut().enumerate() {
        *v = v.min(f.value(i));
        if *v == f64::NEG_INFINITY {
            // Outside every hull's span: the only minorant information left is
            // the infinite value itself.
            *v = f.value(i);
        }
    }
    f.with_values(h)
}

/// Nodewise `f − phi_hull(f)`; `+∞` where `f = +∞` but the hull is finite.
pub fn hull_gap(f: &GridFunction, sched: &CurvatureSchedule) -> Result<Vec<f64>> {
    let h = phi_hull(f, sched)?;
    Ok(f.values()
        .iter()
        .zip(h.values())
        .map(|(&fv, &hv)| if fv == hv { 0.0 } else { fv - hv })
        .collect())
}

/// True when the largest hull gap is at most `tol`.
pub fn is_phi_convex(f: &GridFunction, sched: &CurvatureSchedule, tol: f64) -> Result<bool> {
    Ok(hull_gap(f, sched)?.iter().all(|&g| g <= tol))
}

/// Default grid tolerance `4·h·L`, with `L` the largest first divided difference.
pub fn tol_grid(f: &GridFunction) -> f64 {
    4.0 * f.grid().h_max() * f.lipschitz_estimate().max(1e-12)
}

/// All second differences along grid lines (and diagonals in 2D) are `≥ −tol`.
pub fn is_discretely_convex(grid: &Grid, values: &[f64], tol: f64) -> bool {
    for d in grid.line_offsets() {
        for i in 0..grid.len() {
            if let (Some(a), Some(b)) = (grid.shift(i, d, -1), grid.shift(i, d, 1)) {
                let (fa, fm, fb) = (values[a], values[i], values[b]);
                if fm.is_finite() && fa.is_finite() && fb.is_finite() && fa + fb - 2.0 * fm < -tol {
                    return false;
                }
                if !fm.is_finite() && fa.is_finite() && fb.is_finite() {
                    return false;
                }
            }
        }
    }
    true
}
