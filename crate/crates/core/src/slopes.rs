//! Sets of supporting slopes.
//!
//! For a base node `x̄`, curvature `a` and slack `eps`, the slope set is
//!
//! ```text
//! P = { v : ⟨v, x − x̄⟩ ≤ f(x) − f(x̄) + a(‖x‖² − ‖x̄‖²) + eps  for every node x }
//! ```
//!
//! so `(a, v)` is an `eps`-subgradient on the grid exactly when `v ∈ P`.
//! In one dimension `P` is an interval; in two it is a convex polygon, kept as
//! a cyclic list of bounding lines and clipped one constraint at a time.

use crate::grid::{dot, sqnorm, GridFunction, Point};

/// Half-widths of the starting square in two dimensions. Unbounded slope
/// sets are truncated to it.
pub const SLOPE_BOX: f64 = 1e6;

/// `⟨v, d⟩ ≤ b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfplane {
    pub d: Point,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SlopeSet {
    Empty,
    /// Closed interval, possibly with infinite ends.
    Interval {
        lo: f64,
        hi: f64,
    },
    /// Convex polygon: counter-clockwise vertices and the bounding lines
    /// they come from.
    Polygon {
        vertices: Vec<Point>,
        lines: Vec<Halfplane>,
    },
}

impl SlopeSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, SlopeSet::Empty)
    }

    /// Minimal-norm element.
    pub fn min_norm(&self) -> Option<Point> {
        match self {
            SlopeSet::Empty => None,
            SlopeSet::Interval { lo, hi } => Some([0.0f64.clamp(*lo, *hi), 0.0]),
            SlopeSet::Polygon { vertices, .. } => Some(polygon_min_norm(vertices)),
        }
    }

    pub fn contains_origin(&self) -> bool {
        match self {
            SlopeSet::Empty => false,
            SlopeSet::Interval { lo, hi } => *lo <= 0.0 && 0.0 <= *hi,
            SlopeSet::Polygon { lines, .. } => lines.iter().all(|h| h.b >= 0.0),
        }
    }

    /// Extreme points. Infinite interval ends are replaced by `±SLOPE_BOX`.
    pub fn vertices(&self) -> Vec<Point> {
        match self {
            SlopeSet::Empty => vec![],
            SlopeSet::Interval { lo, hi } => {
                let l = lo.max(-SLOPE_BOX);
                let h = hi.min(SLOPE_BOX);
                if l == h {
                    vec![[l, 0.0]]
                } else {
                    vec![[l, 0.0], [h, 0.0]]
                }
            }
            SlopeSet::Polygon { vertices, .. } => vertices.clone(),
        }
    }
}

/// Collects constraints and reduces them to a [`SlopeSet`].
#[derive(Debug, Clone)]
pub struct SlopeBuilder {
    dim: usize,
    constraints: Vec<Halfplane>,
}

impl SlopeBuilder {
    pub fn new(dim: usize) -> Self {
        SlopeBuilder {
            dim,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, d: Point, b: f64) {
        self.constraints.push(Halfplane { d, b });
    }

    pub fn build(&self) -> SlopeSet {
        if self.dim == 1 {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for h in &self.constraints {
                let d = h.d[0];
                if d > 0.0 {
                    hi = hi.min(h.b / d);
                } else if d < 0.0 {
                    lo = lo.max(h.b / d);
                } else if h.b < 0.0 {
                    return SlopeSet::Empty;
                }
            }
            if lo <= hi {
                SlopeSet::Interval { lo, hi }
            } else {
                SlopeSet::Empty
            }
        } else {
            let mut poly = LinePolygon::square(SLOPE_BOX);
            for h in &self.constraints {
                if sqnorm(&h.d) == 0.0 {
                    if h.b < 0.0 {
                        return SlopeSet::Empty;
                    }
                    continue;
                }
                if !poly.clip(h) {
                    return SlopeSet::Empty;
                }
            }
            SlopeSet::Polygon {
                vertices: poly.vertices(),
                lines: poly.lines,
            }
        }
    }
}

/// Grid constraints of the slope set at `xbar`, over `nodes` (all nodes when
/// `None`). Right sides carry a floating-point roundoff allowance only.
pub fn grid_constraints(
    f: &GridFunction,
    xbar: usize,
    a: f64,
    eps: f64,
    nodes: Option<&[usize]>,
    out: &mut SlopeBuilder,
) {
    let g = f.grid();
    let xb = g.node(xbar);
    let fb = f.value(xbar);
    let nb = sqnorm(&xb);
    let mut visit = |i: usize| {
        if i == xbar {
            return;
        }
        let fx = f.value(i);
        if !fx.is_finite() {
            return;
        }
        let x = g.node(i);
        let d = [x[0] - xb[0], x[1] - xb[1]];
        let s = [x[0] + xb[0], x[1] + xb[1]];
        let b = (fx - fb) + a * dot(&d, &s) + eps;
        let mag = fx.abs() + fb.abs() + a * (sqnorm(&x) + nb) + eps;
        out.push(d, b + 4.0 * f64::EPSILON * mag);
    };
    match nodes {
        Some(list) => list.iter().copied().for_each(&mut visit),
        None => (0..g.len()).for_each(&mut visit),
    }
}

/// Constraints from the source expression at points `x̄ + s·u` with
/// `s = h·2^{-k}`, `k = 1..=30`, in 2 (1D) or 8 (2D) unit directions `u`.
/// The right sides carry only a floating-point roundoff allowance.
///
/// Returns false when the function has no source expression.
pub fn probe_constraints(
    f: &GridFunction,
    xbar: usize,
    a: f64,
    eps: f64,
    out: &mut SlopeBuilder,
) -> bool {
    let Some(src) = f.source() else {
        return false;
    };
    let g = f.grid();
    let xb = g.node(xbar);
    let fb = f.value(xbar);
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
    let twice = [2.0 * xb[0], 2.0 * xb[1]];
    for k in 1..=30 {
        let s = g.h_min() * 0.5f64.powi(k);
        for u in &dirs {
            let d = [s * u[0], s * u[1]];
            let y = [xb[0] + d[0], xb[1] + d[1]];
            if !g.contains(&y) {
                continue;
            }
            let fy = src.eval(&y);
            if !fy.is_finite() {
                continue;
            }
            let quad = a * dot(&d, &[twice[0] + d[0], twice[1] + d[1]]);
            let round = 8.0 * f64::EPSILON * (fy.abs() + fb.abs() + quad.abs() + eps);
            out.push(d, (fy - fb) + quad + eps + round);
        }
    }
    true
}

/// Slope set on all grid nodes, optionally narrowed by source probes.
pub fn contact_slopes(f: &GridFunction, xbar: usize, a: f64, eps: f64, probe: bool) -> SlopeSet {
    let mut b = SlopeBuilder::new(f.dim());
    grid_constraints(f, xbar, a, eps, None, &mut b);
    if probe {
        probe_constraints(f, xbar, a, eps, &mut b);
    }
    b.build()
}

/// Bounded convex polygon stored as its bounding lines in counter-clockwise
/// order; vertex `i` is the meet of lines `i` and `i + 1`.
#[derive(Debug, Clone)]
struct LinePolygon {
    lines: Vec<Halfplane>,
}

fn meet(l1: &Halfplane, l2: &Halfplane) -> Option<Point> {
    let det = l1.d[0] * l2.d[1] - l1.d[1] * l2.d[0];
    let scale = (sqnorm(&l1.d) * sqnorm(&l2.d)).sqrt();
    if det.abs() <= 1e-14 * scale {
        return None;
    }
    Some([
        (l1.b * l2.d[1] - l2.b * l1.d[1]) / det,
        (l1.d[0] * l2.b - l2.d[0] * l1.b) / det,
    ])
}

impl LinePolygon {
    fn square(s: f64) -> Self {
        let mk = |d: Point| Halfplane { d, b: s };
        LinePolygon {
            lines: vec![
                mk([1.0, 0.0]),
                mk([0.0, 1.0]),
                mk([-1.0, 0.0]),
                mk([0.0, -1.0]),
            ],
        }
    }

    fn vertex(&self, i: usize) -> Point {
        let n = self.lines.len();
        let (l1, l2) = (&self.lines[i % n], &self.lines[(i + 1) % n]);
        meet(l1, l2).unwrap_or_else(|| {
            // Parallel neighbours only arise from degenerate slivers; fall back
            // to the foot of the origin on the first line.
            let t = l1.b / sqnorm(&l1.d);
            [l1.d[0] * t, l1.d[1] * t]
        })
    }

    fn vertices(&self) -> Vec<Point> {
        (0..self.lines.len()).map(|i| self.vertex(i)).collect()
    }

    /// Intersects with `h`. Returns false when the result is empty.
    fn clip(&mut self, h: &Halfplane) -> bool {
        let n = self.lines.len();
        let verts = self.vertices();
        let outside: Vec<bool> = verts
            .iter()
            .map(|p| {
                let lhs = dot(&h.d, p);
                let slack = 1e-12 * (h.b.abs() + sqnorm(&h.d).sqrt() * sqnorm(p).sqrt());
                lhs > h.b + slack
            })
            .collect();
        let count = outside.iter().filter(|&&o| o).count();
        if count == 0 {
            return true;
        }
        if count == n {
            return false;
        }
        // Start of the cyclic run of outside vertices.
        let s = (0..n)
            .find(|&i| outside[i] && !outside[(i + n - 1) % n])
            .unwrap();
        let mut e = s;
        while outside[(e + 1) % n] {
            e = (e + 1) % n;
        }
        // Lines s+1..=e lie entirely outside; line s keeps its inside end and
        // line e+1 keeps its inside start.
        let mut next = Vec::with_capacity(n + 1);
        let mut i = (e + 1) % n;
        loop {
            next.push(self.lines[i]);
            if i == s {
                break;
            }
            i = (i + 1) % n;
        }
        next.push(*h);
        self.lines = next;
        true
    }
}

fn polygon_min_norm(vs: &[Point]) -> Point {
    if point_in_polygon(vs, &[0.0, 0.0]) {
        return [0.0, 0.0];
    }
    let mut best = vs[0];
    let mut best_n = sqnorm(&best);
    let n = vs.len();
    for i in 0..n {
        let p = vs[i];
        let q = vs[(i + 1) % n];
        let e = [q[0] - p[0], q[1] - p[1]];
        let ee = sqnorm(&e);
        let t = if ee > 0.0 {
            (-dot(&p, &e) / ee).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let c = [p[0] + t * e[0], p[1] + t * e[1]];
        let cn = sqnorm(&c);
        if cn < best_n {
            best = c;
            best_n = cn;
        }
    }
    best
}

/// Membership in a counter-clockwise convex polygon, boundary included.
pub fn point_in_polygon(vs: &[Point], x: &Point) -> bool {
    let n = vs.len();
    if n == 0 {
        return false;
    }
    if n == 1 {
        return vs[0] == *x;
    }
    (0..n).all(|i| {
        let p = vs[i];
        let q = vs[(i + 1) % n];
        let e = [q[0] - p[0], q[1] - p[1]];
        let len = sqnorm(&e).sqrt();
        if len == 0.0 {
            return true;
        }
        let cross = e[0] * (x[1] - p[1]) - e[1] * (x[0] - p[0]);
        let size = 1.0 + sqnorm(&p).sqrt().max(sqnorm(x).sqrt());
        cross / len >= -1e-12 * size
    })
}
