use std::sync::Arc;

use crate::expr::FunctionExpr;
use crate::{Error, Result};

/// A point of ℝ¹ or ℝ². In one dimension the second coordinate is zero.
pub type Point = [f64; 2];

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn sqnorm(a: &Point) -> f64 {
    a[0] * a[0] + a[1] * a[1]
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dist(a: &Point, b: &Point) -> f64 {
    sqnorm(&sub(a, b)).sqrt()
}

/// Builds a [`Point`] from a slice of length 1 or 2.
pub fn point_from(xs: &[f64]) -> Result<Point> {
    match xs {
        [x] => Ok([*x, 0.0]),
        [x, y] => Ok([*x, *y]),
        _ => Err(Error::DimensionMismatch {
            expected: 2,
            found: xs.len(),
        }),
    }
}

/// Uniform box grid in ℝ¹ or ℝ².
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    lo: Point,
    hi: Point,
    h: Point,
    n: [usize; 2],
}

impl Grid {
    /// Box `[lo, hi]` with the given per-axis spacing. The spacing must divide
    /// each axis length and give at least 3 nodes per axis.
    pub fn new(lo: &[f64], hi: &[f64], spacing: &[f64]) -> Result<Self> {
        let dim = lo.len();
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} not in {{1, 2}}"
            )));
        }
        if hi.len() != dim || spacing.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if hi.len() != dim {
                    hi.len()
                } else {
                    spacing.len()
                },
            });
        }
        let mut g = Grid {
            dim,
            lo: [0.0; 2],
            hi: [0.0; 2],
            h: [1.0; 2],
            n: [1, 1],
        };
        for k in 0..dim {
            let (l, u, h) = (lo[k], hi[k], spacing[k]);
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: need finite lo < hi, got [{l}, {u}]"
                )));
            }
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: spacing must be positive, got {h}"
                )));
            }
            let steps = (u - l) / h;
            let rounded = steps.round();
            if (steps - rounded).abs() > 1e-9 * steps.max(1.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: spacing {h} does not divide the interval [{l}, {u}]"
                )));
            }
            let count = rounded as usize + 1;
            if count < 3 {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: {count} nodes, need at least 3"
                )));
            }
            if count > 1 << 20 {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: {count} nodes is too many"
                )));
            }
            g.lo[k] = l;
            g.hi[k] = u;
            g.h[k] = (u - l) / rounded;
            g.n[k] = count;
        }
        Ok(g)
    }

    /// One-dimensional grid on `[lo, hi]`.
    pub fn line(lo: f64, hi: f64, h: f64) -> Result<Self> {
        Grid::new(&[lo], &[hi], &[h])
    }

    /// Square grid `[lo, hi]²` with equal spacing.
    pub fn square(lo: f64, hi: f64, h: f64) -> Result<Self> {
        Grid::new(&[lo, lo], &[hi, hi], &[h, h])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> [usize; 2] {
        self.n
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    pub fn spacing(&self) -> Point {
        self.h
    }

    pub fn h_min(&self) -> f64 {
        if self.dim == 1 {
            self.h[0]
        } else {
            self.h[0].min(self.h[1])
        }
    }

    pub fn h_max(&self) -> f64 {
        if self.dim == 1 {
            self.h[0]
        } else {
            self.h[0].max(self.h[1])
        }
    }

    /// Largest axis length.
    pub fn width(&self) -> f64 {
        (0..self.dim)
            .map(|k| self.hi[k] - self.lo[k])
            .fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        dist(&self.lo, &self.hi)
    }

    #[inline]
    pub fn multi(&self, i: usize) -> [usize; 2] {
        [i % self.n[0], i / self.n[0]]
    }

    #[inline]
    pub fn flat(&self, m: [usize; 2]) -> usize {
        m[0] + self.n[0] * m[1]
    }

    #[inline]
    pub fn node(&self, i: usize) -> Point {
        let m = self.multi(i);
        let mut p = [0.0; 2];
        for k in 0..self.dim {
            p[k] = if m[k] + 1 == self.n[k] {
                self.hi[k]
            } else {
                self.lo[k] + m[k] as f64 * self.h[k]
            };
        }
        p
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn contains(&self, x: &Point) -> bool {
        let slack = 1e-12 * self.width().max(1.0);
        (0..self.dim).all(|k| x[k] >= self.lo[k] - slack && x[k] <= self.hi[k] + slack)
    }

    /// Node index whose coordinates coincide with `x` up to a small fraction of the spacing.
    pub fn node_at(&self, x: &Point) -> Option<usize> {
        let mut m = [0usize; 2];
        for k in 0..self.dim {
            let s = (x[k] - self.lo[k]) / self.h[k];
            let r = s.round();
            if (s - r).abs() > 1e-6 || r < 0.0 || r as usize >= self.n[k] {
                return None;
            }
            m[k] = r as usize;
        }
        Some(self.flat(m))
    }

    /// Nearest node to `x` (clamped to the box).
    pub fn nearest(&self, x: &Point) -> usize {
        let mut m = [0usize; 2];
        for k in 0..self.dim {
            let s = ((x[k] - self.lo[k]) / self.h[k]).round();
            m[k] = s.clamp(0.0, (self.n[k] - 1) as f64) as usize;
        }
        self.flat(m)
    }

    /// True when the node is not on the boundary of the box.
    pub fn is_interior(&self, i: usize) -> bool {
        let m = self.multi(i);
        (0..self.dim).all(|k| m[k] > 0 && m[k] + 1 < self.n[k])
    }

    /// Nodes strictly inside the open ball `B(radius, center)`.
    pub fn ball(&self, center: &Point, radius: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| dist(&self.node(i), center) < radius)
            .collect()
    }

    /// Sub-grid on the box `[lo, hi]` snapped inward to nodes, together with
    /// the parent indices of its nodes.
    pub fn restrict(&self, lo: &[f64], hi: &[f64]) -> Result<(Grid, Vec<usize>)> {
        if lo.len() != self.dim || hi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: lo.len(),
            });
        }
        let mut first = [0usize; 2];
        let mut last = [0usize; 2];
        for k in 0..self.dim {
            let a = ((lo[k] - self.lo[k]) / self.h[k] - 1e-9).ceil().max(0.0) as usize;
            let b = ((hi[k] - self.lo[k]) / self.h[k] + 1e-9).floor();
            let b = (b.max(0.0) as usize).min(self.n[k] - 1);
            if b < a + 2 {
                return Err(Error::InvalidGrid(format!(
                    "sub-box [{}, {}] on axis {k} holds fewer than 3 nodes",
                    lo[k], hi[k]
                )));
            }
            first[k] = a;
            last[k] = b;
        }
        let sub_lo: Vec<f64> = (0..self.dim)
            .map(|k| self.node(self.flat(first))[k])
            .collect();
        let sub_hi: Vec<f64> = (0..self.dim)
            .map(|k| self.node(self.flat(last))[k])
            .collect();
        let sub_h: Vec<f64> = (0..self.dim).map(|k| self.h[k]).collect();
        let sub = Grid::new(&sub_lo, &sub_hi, &sub_h)?;
        let mut map = Vec::with_capacity(sub.len());
        for j in 0..sub.len() {
            let m = sub.multi(j);
            map.push(self.flat([
                m[0] + first[0],
                if self.dim == 2 { m[1] + first[1] } else { 0 },
            ]));
        }
        Ok((sub, map))
    }

    /// Same box with every spacing divided by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Grid> {
        let lo: Vec<f64> = self.lo[..self.dim].to_vec();
        let hi: Vec<f64> = self.hi[..self.dim].to_vec();
        let h: Vec<f64> = self.h[..self.dim]
            .iter()
            .map(|h| h / factor as f64)
            .collect();
        Grid::new(&lo, &hi, &h)
    }

    /// Grid-line neighbours one step away along each axis.
    pub fn axis_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let m = self.multi(i);
        let mut out = [usize::MAX; 4];
        for k in 0..self.dim {
            if m[k] > 0 {
                let mut q = m;
                q[k] -= 1;
                out[2 * k] = self.flat(q);
            }
            if m[k] + 1 < self.n[k] {
                let mut q = m;
                q[k] += 1;
                out[2 * k + 1] = self.flat(q);
            }
        }
        out.into_iter().filter(|&j| j != usize::MAX)
    }

    /// Offsets (in index units) of the lines used for discrete second differences:
    /// the axis directions, plus both diagonals in two dimensions.
    pub(crate) fn line_offsets(&self) -> Vec<[isize; 2]> {
        if self.dim == 1 {
            vec![[1, 0]]
        } else {
            vec![[1, 0], [0, 1], [1, 1], [1, -1]]
        }
    }

    pub(crate) fn shift(&self, i: usize, d: [isize; 2], times: isize) -> Option<usize> {
        let m = self.multi(i);
        let mut q = [0usize; 2];
        for k in 0..2 {
            let v = m[k] as isize + d[k] * times;
            if v < 0 || v as usize >= self.n[k] {
                return None;
            }
            q[k] = v as usize;
        }
        Some(self.flat(q))
    }

    pub(crate) fn offset_vector(&self, d: [isize; 2]) -> Point {
        [d[0] as f64 * self.h[0], d[1] as f64 * self.h[1]]
    }
}

/// A function sampled on a [`Grid`] with values in ℝ ∪ {+∞}.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    source: Option<Arc<FunctionExpr>>,
}

impl GridFunction {
    /// Wraps raw node values. Rejects NaN and −∞ and requires at least one finite value.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidFunction(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|v| v.is_nan() || *v == f64::NEG_INFINITY)
        {
            return Err(Error::InvalidFunction(format!(
                "value {} at node {i}",
                values[i]
            )));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::InvalidFunction("empty effective domain".into()));
        }
        Ok(GridFunction {
            grid,
            values,
            source: None,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = grid.nodes().map(|p| f(&p)).collect();
        GridFunction::new(grid, values)
    }

    /// Samples an expression at every node. The expression is kept for
    /// off-grid evaluation.
    pub fn sample(expr: FunctionExpr, grid: Grid) -> Result<Self> {
        if expr.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: expr.dim(),
            });
        }
        let mut values = Vec::with_capacity(grid.len());
        for (i, p) in grid.nodes().enumerate() {
            let v = expr.eval(&p);
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::NonTotal { node: i, value: v });
            }
            values.push(v);
        }
        let mut f = GridFunction::new(grid, values)?;
        f.source = Some(Arc::new(expr));
        Ok(f)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn source(&self) -> Option<&FunctionExpr> {
        self.source.as_deref()
    }

    /// Replaces the values, keeping grid and dropping the source expression.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        GridFunction::new(self.grid.clone(), values)
    }

    pub fn in_domain(&self, i: usize) -> bool {
        self.values[i].is_finite()
    }

    /// Value at an arbitrary point: exact when the function came from an
    /// expression, otherwise (bi)linear interpolation. +∞ outside the box.
    pub fn eval_at(&self, x: &Point) -> f64 {
        if let Some(src) = &self.source {
            return src.eval(x);
        }
        if !self.grid.contains(x) {
            return f64::INFINITY;
        }
        let g = &self.grid;
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for k in 0..g.dim {
            let s = ((x[k] - g.lo[k]) / g.h[k]).clamp(0.0, (g.n[k] - 1) as f64);
            let b = (s.floor() as usize).min(g.n[k] - 2);
            base[k] = b;
            frac[k] = s - b as f64;
        }
        let mut acc = 0.0;
        let corners: &[[usize; 2]] = if g.dim == 1 {
            &[[0, 0], [1, 0]]
        } else {
            &[[0, 0], [1, 0], [0, 1], [1, 1]]
        };
        for c in corners {
            let mut w = 1.0;
            for k in 0..g.dim {
                w *= if c[k] == 1 { frac[k] } else { 1.0 - frac[k] };
            }
            if w == 0.0 {
                continue;
            }
            let v = self.values[g.flat([base[0] + c[0], base[1] + c[1]])];
            if v.is_infinite() {
                return f64::INFINITY;
            }
            acc += w * v;
        }
        acc
    }

    /// Node values of `f + a‖·‖²`.
    pub fn plus_quadratic(&self, a: f64) -> Vec<f64> {
        self.grid
            .nodes()
            .zip(&self.values)
            .map(|(p, v)| {
                if v.is_finite() {
                    v + a * sqnorm(&p)
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }

    /// Restriction to a sub-box; keeps the source expression.
    pub fn restrict(&self, lo: &[f64], hi: &[f64]) -> Result<GridFunction> {
        let (grid, map) = self.grid.restrict(lo, hi)?;
        let values = map.iter().map(|&i| self.values[i]).collect();
        let mut f = GridFunction::new(grid, values)?;
        f.source = self.source.clone();
        Ok(f)
    }

    /// Re-samples the source expression on a grid refined by `factor`.
    pub fn refined(&self, factor: usize) -> Option<Result<GridFunction>> {
        let src = self.source.as_ref()?;
        Some(
            self.grid
                .refined(factor)
                .and_then(|g| GridFunction::sample((**src).clone(), g)),
        )
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_abs_finite(&self) -> f64 {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest first divided difference between finite neighbours along grid lines.
    pub fn lipschitz_estimate(&self) -> f64 {
        let mut l: f64 = 0.0;
        for d in self.grid.line_offsets() {
            let step = sqnorm(&self.grid.offset_vector(d)).sqrt();
            for i in 0..self.grid.len() {
                if let Some(j) = self.grid.shift(i, d, 1) {
                    let (a, b) = (self.values[i], self.values[j]);
                    if a.is_finite() && b.is_finite() {
                        l = l.max((b - a).abs() / step);
                    }
                }
            }
        }
        l
    }

    /// Largest magnitude of the discrete second derivative along grid lines.
    pub fn max_second_difference(&self) -> f64 {
        let mut m: f64 = 0.0;
        for d in self.grid.line_offsets() {
            let step2 = sqnorm(&self.grid.offset_vector(d));
            for i in 0..self.grid.len() {
                if let (Some(a), Some(b)) = (self.grid.shift(i, d, -1), self.grid.shift(i, d, 1)) {
                    let (fa, fm, fb) = (self.values[a], self.values[i], self.values[b]);
                    if fa.is_finite() && fm.is_finite() && fb.is_finite() {
                        m = m.max((fa + fb - 2.0 * fm).abs() / step2);
                    }
                }
            }
        }
        m
    }
}
