use std::collections::HashMap;

use crate::envelopes::{is_phi_convex, tol_grid, CurvatureSchedule};
use crate::expr::FunctionExpr;
use crate::grid::{Grid, GridFunction, Point};
use crate::minimax::region::intersection_property;
use crate::minimax::zs::cancel;
use crate::minorant::{is_support, QuadraticMinorant};
use crate::paraconvex::{paraconvexity_constant, Constant};
use crate::slopes::contact_slopes;
use crate::subdiff::verify;
use crate::tolerance::Tolerance;
use crate::witness::{Scope, SubgradientWitness};
use crate::{Error, Result};

/// A function `a(x, y)` sampled on an X-grid (dimension 1 or 2) times a
/// one-dimensional Y-grid.
#[derive(Debug, Clone)]
pub struct SaddleGrid {
    xgrid: Grid,
    ygrid: Grid,
    /// Row `j` holds `a(·, y_j)`.
    values: Vec<f64>,
}

impl SaddleGrid {
    pub fn new(xgrid: Grid, ygrid: Grid, values: Vec<f64>) -> Result<Self> {
        if ygrid.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: ygrid.dim(),
            });
        }
        if values.len() != xgrid.len() * ygrid.len() {
            return Err(Error::InvalidFunction(format!(
                "{} values for a {}×{} saddle grid",
                values.len(),
                xgrid.len(),
                ygrid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonTotal {
                node: k,
                value: values[k],
            });
        }
        Ok(SaddleGrid {
            xgrid,
            ygrid,
            values,
        })
    }

    pub fn from_fn(xgrid: Grid, ygrid: Grid, f: impl Fn(&Point, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(xgrid.len() * ygrid.len());
        for y in ygrid.nodes() {
            values.extend(xgrid.nodes().map(|x| f(&x, y[0])));
        }
        SaddleGrid::new(xgrid, ygrid, values)
    }

    /// Variables are `x, y` for a one-dimensional X and `x1, x2, y` otherwise.
    pub fn from_expr(text: &str, xgrid: Grid, ygrid: Grid) -> Result<Self> {
        let expr = if xgrid.dim() == 1 {
            FunctionExpr::parse_with(text, &[("x", 0), ("y", 1)])?
        } else {
            FunctionExpr::parse_with(text, &[("x1", 0), ("x2", 1), ("y", 2)])?
        };
        let k = xgrid.dim();
        SaddleGrid::from_fn(xgrid, ygrid, |x, y| {
            let mut args = [x[0], x[1], 0.0];
            args[k] = y;
            expr.eval(&args[..k + 1])
        })
    }

    pub fn xgrid(&self) -> &Grid {
        &self.xgrid
    }

    pub fn ygrid(&self) -> &Grid {
        &self.ygrid
    }

    pub fn nx(&self) -> usize {
        self.xgrid.len()
    }

    pub fn ny(&self) -> usize {
        self.ygrid.len()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.ygrid.node(j)[0]
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx() + i]
    }

    /// `a(·, y_j)` as a grid function.
    pub fn slice(&self, j: usize) -> GridFunction {
        let n = self.nx();
        GridFunction::new(self.xgrid.clone(), self.values[j * n..(j + 1) * n].to_vec())
            .expect("finite values checked on construction")
    }

    fn scale(&self) -> f64 {
        1.0 + self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest difference quotient along `y`.
    fn y_lipschitz(&self) -> f64 {
        let h = self.ygrid.spacing()[0];
        let mut l: f64 = 0.0;
        for j in 1..self.ny() {
            for i in 0..self.nx() {
                l = l.max((self.value(i, j) - self.value(i, j - 1)).abs() / h);
            }
        }
        l
    }

    /// `L_y·h_y/2` plus a relative roundoff term: how far the discrete values
    /// can sit from the continuous ones in `y`.
    pub fn grid_tolerance(&self) -> f64 {
        0.5 * self.y_lipschitz() * self.ygrid.spacing()[0] + 1e-9 * self.scale()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleValues {
    pub supinf: f64,
    pub infsup: f64,
    /// `infsup − supinf`.
    pub gap: f64,
    /// Y-index attaining `supinf`.
    pub y_star: usize,
    /// X-index attaining `infsup`.
    pub x_star: usize,
    pub concave_in_y: bool,
    /// Largest positive second difference along `y`.
    pub concavity_violation: f64,
}

/// Discrete `sup_y inf_x` and `inf_x sup_y`, with a concavity check in `y`.
pub fn saddle_values(a: &SaddleGrid) -> SaddleValues {
    let (nx, ny) = (a.nx(), a.ny());
    let mut supinf = (f64::NEG_INFINITY, 0);
    for j in 0..ny {
        let m = (0..nx).map(|i| a.value(i, j)).fold(f64::INFINITY, f64::min);
        if m > supinf.0 {
            supinf = (m, j);
        }
    }
    let mut infsup = (f64::INFINITY, 0);
    for i in 0..nx {
        let m = (0..ny)
            .map(|j| a.value(i, j))
            .fold(f64::NEG_INFINITY, f64::max);
        if m < infsup.0 {
            infsup = (m, i);
        }
    }
    let h2 = a.ygrid.spacing()[0].powi(2);
    let mut worst: f64 = 0.0;
    for j in 1..ny.saturating_sub(1) {
        for i in 0..nx {
            let s = (a.value(i, j - 1) + a.value(i, j + 1) - 2.0 * a.value(i, j)) / h2;
            worst = worst.max(s);
        }
    }
    let conc_tol = 1e-9 * a.scale() / h2;
    SaddleValues {
        supinf: supinf.0,
        infsup: infsup.0,
        gap: infsup.0 - supinf.0,
        y_star: supinf.1,
        x_star: infsup.1,
        concave_in_y: worst <= conc_tol,
        concavity_violation: worst,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateMode {
    /// Level `β = infsup` with `ε = 0`.
    Exact,
    /// Every `ε` in the list against five levels `β` below `infsup`.
    EpsSweep(Vec<f64>),
}

impl CertificateMode {
    pub fn default_sweep() -> Self {
        CertificateMode::EpsSweep(vec![1e-1, 1e-2, 1e-3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Every sampled `a(·, y)` is Φ_lsc-convex on the grid.
    PhiConvex,
    /// Every sampled `a(·, y)` has a finite paraconvexity constant.
    Paraconvex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpec {
    pub hypothesis: Hypothesis,
    /// Restrict `x̄` to interior X-nodes.
    pub interior_only: bool,
    /// Number of `y` values on which the hypothesis is sampled.
    pub y_samples: usize,
    pub tol: Tolerance,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            hypothesis: Hypothesis::PhiConvex,
            interior_only: false,
            y_samples: 9,
            tol: Tolerance::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    NotFound,
    /// A zero-subgradient certificate was found but the recomputed gap
    /// exceeds the certificate tolerance.
    Refuted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// First `(y₁, y₂, x̄)` hit at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub j1: usize,
    pub j2: usize,
    pub xbar: usize,
    pub lambda: f64,
    pub mu: f64,
    pub w1: Option<SubgradientWitness>,
    pub w2: Option<SubgradientWitness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutcome {
    pub beta: f64,
    pub eps: f64,
    pub hit: Option<Hit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxCertificate {
    pub verdict: Verdict,
    pub y1: Option<f64>,
    pub y2: Option<f64>,
    pub xbar: Option<Point>,
    pub eps: f64,
    pub beta: f64,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub witnesses: Vec<SubgradientWitness>,
    pub supinf: f64,
    pub infsup: f64,
    pub gap: f64,
    pub tol_cert: f64,
    pub hypothesis_checks: Vec<HypothesisCheck>,
    pub levels: Vec<LevelOutcome>,
}

impl MinimaxCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// Evenly spaced Y-indices, ends included.
fn sampled_ys(ny: usize, k: usize) -> Vec<usize> {
    if ny <= k || k < 2 {
        return (0..ny).collect();
    }
    let mut out: Vec<usize> = (0..k)
        .map(|m| (m * (ny - 1) + (k - 1) / 2) / (k - 1))
        .collect();
    out.dedup();
    out
}

fn check_hypotheses(
    a: &SaddleGrid,
    vals: &SaddleValues,
    spec: &SearchSpec,
) -> Vec<HypothesisCheck> {
    let mut out = vec![HypothesisCheck {
        name: "concave_in_y".into(),
        passed: vals.concave_in_y,
        detail: format!("max second difference {:e}", vals.concavity_violation),
    }];
    let (lo, hi) = (a.xgrid.lo(), a.xgrid.hi());
    let dim = a.xgrid.dim();
    for j in sampled_ys(a.ny(), spec.y_samples) {
        let s = a.slice(j);
        let (name, passed, detail) = match spec.hypothesis {
            Hypothesis::PhiConvex => {
                let tol = tol_grid(&s);
                let ok =
                    is_phi_convex(&s, &CurvatureSchedule::default_for(&s), tol).unwrap_or(false);
                ("phi_convex", ok, format!("tol {tol:e}"))
            }
            Hypothesis::Paraconvex => {
                match paraconvexity_constant(&s, &lo[..dim], &hi[..dim], spec.tol.abs) {
                    Ok(r) => match r.constant {
                        Constant::Finite(c) => ("paraconvex", true, format!("c = {c}")),
                        Constant::NoFiniteConstant => {
                            ("paraconvex", false, "no finite constant".to_string())
                        }
                    },
                    Err(e) => ("paraconvex", false, e.to_string()),
                }
            }
        };
        out.push(HypothesisCheck {
            name: format!("{name}(y = {})", a.y(j)),
            passed,
            detail,
        });
    }
    out
}

struct SliceData {
    zero: Option<SubgradientWitness>,
    samples: Vec<Point>,
}

/// Lazily computed `a = 0` slope data of `a(·, y_j)` at `x̄`.
struct Slices<'a> {
    fns: &'a [GridFunction],
    eps: f64,
    tol: Tolerance,
    cache: HashMap<(usize, usize), SliceData>,
}

impl Slices<'_> {
    fn get(&mut self, j: usize, i: usize) -> &SliceData {
        let (fns, eps, tol) = (self.fns, self.eps, self.tol);
        self.cache.entry((j, i)).or_insert_with(|| {
            let f = &fns[j];
            let set = contact_slopes(f, i, 0.0, eps, false);
            let zero = if set.contains_origin() {
                Some(verify(f, i, 0.0, [0.0, 0.0], eps, tol, None, Scope::Global))
                    .filter(|w| w.is_verified())
            } else {
                None
            };
            SliceData {
                zero,
                samples: set.vertices(),
            }
        })
    }
}

/// Lexicographic search over `j₁` ascending, `j₂` descending from the top
/// down to `j₁`, then `x̄`.
fn search_level(
    a: &SaddleGrid,
    fns: &[GridFunction],
    beta: f64,
    eps: f64,
    spec: &SearchSpec,
) -> Option<Hit> {
    let mut sl = Slices {
        fns,
        eps,
        tol: spec.tol,
        cache: HashMap::new(),
    };
    let (nx, ny) = (a.nx(), a.ny());
    let dim = a.xgrid.dim();
    let xs: Vec<usize> = (0..nx)
        .filter(|&i| !spec.interior_only || a.xgrid.is_interior(i))
        .collect();
    for j1 in 0..ny {
        for j2 in (j1..ny).rev() {
            for &i in &xs {
                if a.value(i, j1) < beta || a.value(i, j2) < beta {
                    continue;
                }
                if let Some(w) = sl.get(j1, i).zero.clone() {
                    return Some(Hit {
                        j1,
                        j2,
                        xbar: i,
                        lambda: 1.0,
                        mu: 0.0,
                        w1: Some(w),
                        w2: None,
                    });
                }
                if let Some(w) = sl.get(j2, i).zero.clone() {
                    return Some(Hit {
                        j1,
                        j2,
                        xbar: i,
                        lambda: 0.0,
                        mu: 1.0,
                        w1: None,
                        w2: Some(w),
                    });
                }
                if j1 == j2 {
                    continue;
                }
                let s1 = sl.get(j1, i).samples.clone();
                let s2 = &sl.get(j2, i).samples;
                let Some((lambda, v1, v2)) = cancel(&s1, s2, dim) else {
                    continue;
                };
                let w1 = verify(&fns[j1], i, 0.0, v1, eps, spec.tol, None, Scope::Global);
                let w2 = verify(&fns[j2], i, 0.0, v2, eps, spec.tol, None, Scope::Global);
                if w1.is_verified() && w2.is_verified() {
                    return Some(Hit {
                        j1,
                        j2,
                        xbar: i,
                        lambda,
                        mu: 1.0 - lambda,
                        w1: Some(w1),
                        w2: Some(w2),
                    });
                }
            }
        }
    }
    None
}

/// Searches for a zero-subgradient certificate of the minimax equality.
///
/// Each level `(β, ε)` asks for `y₁, y₂` and `x̄` with `a(x̄, y_k) ≥ β` and
/// `0 ∈ co(∂ε a(·,y₁)(x̄) ∪ ∂ε a(·,y₂)(x̄))`. All levels must succeed for
/// [`Verdict::Certified`]; the recomputed gap is then compared with
/// `tol_cert = min over levels of (infsup − β + ε)` plus the grid tolerance.
pub fn minimax_certificate(
    a: &SaddleGrid,
    mode: &CertificateMode,
    spec: &SearchSpec,
) -> Result<MinimaxCertificate> {
    let vals = saddle_values(a);
    let checks = check_hypotheses(a, &vals, spec);
    if let Some(bad) = checks.iter().find(|c| !c.passed) {
        return Err(Error::Hypothesis(format!(
            "{} failed ({})",
            bad.name, bad.detail
        )));
    }
    let levels: Vec<(f64, f64)> = match mode {
        CertificateMode::Exact => vec![(vals.infsup, 0.0)],
        CertificateMode::EpsSweep(list) => {
            if list.is_empty() || list.iter().any(|e| !(*e > 0.0)) {
                return Err(Error::InvalidArgument(
                    "eps sweep needs positive values".into(),
                ));
            }
            let d = 0.1 * (1.0 + vals.infsup.abs());
            (0..5)
                .flat_map(|k| {
                    let beta = vals.infsup - d * 0.5f64.powi(k);
                    list.iter().map(move |&e| (beta, e))
                })
                .collect()
        }
    };
    let fns: Vec<GridFunction> = (0..a.ny()).map(|j| a.slice(j)).collect();
    let mut outcomes = Vec::with_capacity(levels.len());
    let mut slack = f64::INFINITY;
    for &(beta, eps) in &levels {
        let hit = search_level(a, &fns, beta, eps, spec);
        slack = slack.min(vals.infsup - beta + eps);
        let found = hit.is_some();
        outcomes.push(LevelOutcome { beta, eps, hit });
        if !found {
            break;
        }
    }
    let tol_cert = a.grid_tolerance() + slack;
    let all = outcomes.len() == levels.len() && outcomes.iter().all(|o| o.hit.is_some());
    let verdict = if !all {
        Verdict::NotFound
    } else if vals.gap <= tol_cert {
        Verdict::Certified
    } else {
        Verdict::Refuted
    };
    let last = outcomes.last().expect("at least one level");
    let mut cert = MinimaxCertificate {
        verdict,
        y1: None,
        y2: None,
        xbar: None,
        eps: last.eps,
        beta: last.beta,
        lambda: None,
        mu: None,
        witnesses: Vec::new(),
        supinf: vals.supinf,
        infsup: vals.infsup,
        gap: vals.gap,
        tol_cert,
        hypothesis_checks: checks,
        levels: Vec::new(),
    };
    if let Some(h) = &last.hit {
        cert.y1 = Some(a.y(h.j1));
        cert.y2 = Some(a.y(h.j2));
        cert.xbar = Some(a.xgrid.node(h.xbar));
        cert.lambda = Some(h.lambda);
        cert.mu = Some(h.mu);
        cert.witnesses = h.w1.iter().chain(h.w2.iter()).cloned().collect();
    }
    cert.levels = outcomes;
    Ok(cert)
}

/// Supports `φ₁ ≤ a(·,y₁)`, `φ₂ ≤ a(·,y₂)` with `[φ₁ < α] ∩ [φ₂ < α] = ∅`.
#[derive(Debug, Clone, PartialEq)]
pub struct IpHit {
    pub y1: f64,
    pub y2: f64,
    pub phi1: QuadraticMinorant,
    pub phi2: QuadraticMinorant,
}

/// Affine supports of a slice: lower-hull edge lines in 1D, minimal-norm flat
/// slopes at up to 16 spread-out nodes in 2D.
fn affine_supports(f: &GridFunction) -> Vec<QuadraticMinorant> {
    let g = f.grid();
    let round = 8.0 * f64::EPSILON * (1.0 + f.max_abs_finite());
    let mut out = Vec::new();
    if g.dim() == 1 {
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for i in 0..g.len() {
            let p = (g.node(i)[0], f.value(i));
            while hull.len() >= 2 {
                let (o, q) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if (q.0 - o.0) * (p.1 - o.1) - (q.1 - o.1) * (p.0 - o.0) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        for w in hull.windows(2) {
            let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let c = w[0].1 - s * w[0].0 - round * (1.0 + w[0].0.abs());
            if let Ok(phi) = QuadraticMinorant::new(0.0, &[s], c) {
                out.push(phi);
            }
        }
    } else {
        let stride = (g.len() / 16).max(1);
        for i in (0..g.len()).step_by(stride) {
            if let Some(v) = contact_slopes(f, i, 0.0, 0.0, false).min_norm() {
                let x = g.node(i);
                let c = f.value(i)
                    - v[0] * x[0]
                    - v[1] * x[1]
                    - round * (1.0 + x[0].abs() + x[1].abs());
                if let Ok(phi) = QuadraticMinorant::new(0.0, &v, c) {
                    out.push(phi);
                }
            }
        }
    }
    out
}

/// Cross-check search for the intersection property at level `alpha`.
///
/// Pairs of affine supports are tried first (same Y-order as the certificate
/// search), then a single constant support `min a(·,y) ≥ alpha`.
pub fn ip_search(a: &SaddleGrid, alpha: f64, tol: Tolerance) -> Result<Option<IpHit>> {
    let vals = saddle_values(a);
    if !(alpha < vals.infsup) {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} must be below infsup = {}",
            vals.infsup
        )));
    }
    let fns: Vec<GridFunction> = (0..a.ny()).map(|j| a.slice(j)).collect();
    let sup: Vec<Vec<QuadraticMinorant>> = fns.iter().map(affine_supports).collect();
    let accept = |j1: usize,
                  j2: usize,
                  p1: &QuadraticMinorant,
                  p2: &QuadraticMinorant|
     -> Result<Option<IpHit>> {
        let t1 = tol.allowance(fns[j1].max_abs_finite() + 1.0);
        let t2 = tol.allowance(fns[j2].max_abs_finite() + 1.0);
        if is_support(p1, &fns[j1], t1)?
            && is_support(p2, &fns[j2], t2)?
            && intersection_property(p1, p2, alpha)?.is_empty()
        {
            return Ok(Some(IpHit {
                y1: a.y(j1),
                y2: a.y(j2),
                phi1: *p1,
                phi2: *p2,
            }));
        }
        Ok(None)
    };
    let ny = a.ny();
    for j1 in 0..ny {
        for j2 in (j1 + 1..ny).rev() {
            for p1 in &sup[j1] {
                for p2 in &sup[j2] {
                    if let Some(h) = accept(j1, j2, p1, p2)? {
                        return Ok(Some(h));
                    }
                }
            }
        }
    }
    let dim = a.xgrid.dim();
    for (j, f) in fns.iter().enumerate() {
        if f.min_value() >= alpha {
            let c = QuadraticMinorant::constant(dim, alpha)?;
            if let Some(h) = accept(j, j, &c, &c)? {
                return Ok(Some(h));
            }
        }
    }
    Ok(None)
}
