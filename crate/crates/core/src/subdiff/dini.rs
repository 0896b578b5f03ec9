use crate::grid::{GridFunction, Point};
use crate::subdiff::eps::{slope_point, validate_base};
use crate::{Error, Result};

/// Step sizes for difference quotients, in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiniSchedule {
    pub ts: Vec<f64>,
    /// Clarke base points lie within `base_span · t` of `x̄`.
    pub base_span: usize,
}

impl DiniSchedule {
    /// `t = 2^{-k}·width` for `k = 3..=12`.
    pub fn default_for(f: &GridFunction) -> Self {
        let w = f.grid().width();
        DiniSchedule {
            ts: (3..=12).map(|k| w * 0.5f64.powi(k)).collect(),
            base_span: 8,
        }
    }
}

/// Limit estimate from the finest scales.
///
/// When the last two increments shrink by a ratio `ρ ∈ (0, 0.95)` the value is
/// the Aitken limit `q_K + d_K·ρ/(1−ρ)`, which is exact for quotients that
/// converge like a power of `t`. Otherwise it is `2q_K − q_{K−1}`. The error
/// proxy is the last increment `|q_K − q_{K−1}|` in both cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub error: f64,
    pub finest: f64,
    pub previous: f64,
}

fn extrapolate(qs: &[f64]) -> Result<DerivativeEstimate> {
    match qs {
        [] => Err(Error::OutOfBox),
        [q] => Ok(DerivativeEstimate {
            value: *q,
            error: f64::INFINITY,
            finest: *q,
            previous: f64::NAN,
        }),
        [.., p, q] => {
            let d = q - p;
            let mut value = 2.0 * q - p;
            if let [.., o, _, _] = qs {
                let rho = d / (p - o);
                if rho > 0.0 && rho < 0.95 {
                    value = q + d * rho / (1.0 - rho);
                }
            }
            Ok(DerivativeEstimate {
                value,
                error: d.abs(),
                finest: *q,
                previous: *p,
            })
        }
    }
}

fn unit_offsets(dim: usize) -> Vec<Point> {
    if dim == 1 {
        vec![[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.5, 0.0], [-0.5, 0.0]]
    } else {
        let mut out = vec![[0.0, 0.0]];
        for r in [0.5, 1.0] {
            for k in 0..8 {
                let a = std::f64::consts::FRAC_PI_4 * k as f64;
                out.push([r * a.cos(), r * a.sin()]);
            }
        }
        out
    }
}

/// Lower Dini derivative `liminf (f(x̄ + t·u) − f(x̄))/t` with `u → h`.
///
/// At scale `t` the minimum runs over `u` within distance `min(t, ‖h‖/2)` of `h`.
pub fn dini_derivative(
    f: &GridFunction,
    xbar: usize,
    h: &[f64],
    sched: &DiniSchedule,
) -> Result<DerivativeEstimate> {
    validate_base(f, xbar)?;
    let h = slope_point(f, h)?;
    let g = f.grid();
    let xb = g.node(xbar);
    let fb = f.value(xbar);
    let offs = unit_offsets(g.dim());
    let hn = (h[0] * h[0] + h[1] * h[1]).sqrt();
    let mut qs = Vec::new();
    for &t in &sched.ts {
        let r = t.min(0.5 * hn);
        let mut q = f64::INFINITY;
        let mut any = false;
        for w in &offs {
            let u = [h[0] + r * w[0], h[1] + r * w[1]];
            let y = [xb[0] + t * u[0], xb[1] + t * u[1]];
            if !g.contains(&y) {
                continue;
            }
            let fy = f.eval_at(&y);
            if !fy.is_finite() {
                continue;
            }
            any = true;
            q = q.min((fy - fb) / t);
        }
        if any {
            qs.push(q);
        }
    }
    extrapolate(&qs)
}

/// Clarke derivative `limsup (f(x + t·h) − f(x))/t` with `x → x̄`.
///
/// At scale `t` the maximum runs over base points `x̄ + t·j` for integer
/// offsets `|j_k| ≤ base_span`.
pub fn clarke_derivative(
    f: &GridFunction,
    xbar: usize,
    h: &[f64],
    sched: &DiniSchedule,
) -> Result<DerivativeEstimate> {
    validate_base(f, xbar)?;
    let h = slope_point(f, h)?;
    let g = f.grid();
    let xb = g.node(xbar);
    let span = sched.base_span as i64;
    let js: Vec<[i64; 2]> = if g.dim() == 1 {
        (-span..=span).map(|j| [j, 0]).collect()
    } else {
        (-span..=span)
            .flat_map(|a| (-span..=span).map(move |b| [a, b]))
            .collect()
    };
    let mut qs = Vec::new();
    for &t in &sched.ts {
        let mut q = f64::NEG_INFINITY;
        for j in &js {
            let x = [xb[0] + t * j[0] as f64, xb[1] + t * j[1] as f64];
            let y = [x[0] + t * h[0], x[1] + t * h[1]];
            if !(g.contains(&x) && g.contains(&y)) {
                continue;
            }
            let (fx, fy) = (f.eval_at(&x), f.eval_at(&y));
            if fx.is_finite() && fy.is_finite() {
                q = q.max((fy - fx) / t);
            }
        }
        if q > f64::NEG_INFINITY {
            qs.push(q);
        }
    }
    extrapolate(&qs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiniInterval {
    /// `[lo, hi]`; an infinite end means that direction left the box.
    Interval {
        lo: f64,
        hi: f64,
    },
    Empty {
        lo: f64,
        hi: f64,
    },
}

impl DiniInterval {
    pub fn is_empty(&self) -> bool {
        matches!(self, DiniInterval::Empty { .. })
    }
}

/// `[−d(x̄; −1), d(x̄; 1)]` in one dimension.
///
/// Nonempty when `lo ≤ hi` up to the two error proxies.
pub fn dini_interval_1d(
    f: &GridFunction,
    xbar: usize,
    sched: &DiniSchedule,
) -> Result<DiniInterval> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    let side = |dir: f64| match dini_derivative(f, xbar, &[dir], sched) {
        Ok(e) => Ok((e.value, if e.error.is_finite() { e.error } else { 0.0 })),
        Err(Error::OutOfBox) => Ok((f64::INFINITY, 0.0)),
        Err(e) => Err(e),
    };
    let (dp, ep) = side(1.0)?;
    let (dm, em) = side(-1.0)?;
    let (lo, hi) = (-dm, dp);
    if lo <= hi + ep + em + 1e-9 {
        Ok(DiniInterval::Interval { lo, hi })
    } else {
        Ok(DiniInterval::Empty { lo, hi })
    }
}
