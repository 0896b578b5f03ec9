use crate::grid::{sqnorm, GridFunction, Point};
use crate::minimax::region::intersection_property;
use crate::minorant::{is_support, QuadraticMinorant};
use crate::slopes::{contact_slopes, SlopeSet};
use crate::subdiff::verify;
use crate::tolerance::Tolerance;
use crate::witness::{Scope, SubgradientWitness};
use crate::{Error, Result};

/// Data for the zero-subgradient condition at `(x₁, x₂)` with slack `eps`.
#[derive(Debug, Clone)]
pub struct ZsInstance<'a> {
    pub f: &'a GridFunction,
    pub g: &'a GridFunction,
    pub x1: usize,
    pub x2: usize,
    pub eps: f64,
    /// Verified witnesses of `f` at `x₁`.
    pub witnesses1: Vec<SubgradientWitness>,
    /// Verified witnesses of `g` at `x₂`.
    pub witnesses2: Vec<SubgradientWitness>,
    /// Slopes `v` with `(0, v)` an `eps`-subgradient of `f` at `x₁`.
    pub slice1: SlopeSet,
    pub slice2: SlopeSet,
    pub tol: Tolerance,
}

fn base_ok(f: &GridFunction, x: usize) -> Result<()> {
    if x >= f.grid().len() {
        return Err(Error::InvalidArgument(format!("node {x} out of range")));
    }
    if !f.in_domain(x) {
        return Err(Error::OutsideDomain { node: x });
    }
    Ok(())
}

impl<'a> ZsInstance<'a> {
    /// Computes both `a = 0` slices and seeds each witness list with the
    /// minimal-norm slice element when it verifies.
    pub fn new(
        f: &'a GridFunction,
        g: &'a GridFunction,
        x1: usize,
        x2: usize,
        eps: f64,
        tol: Tolerance,
    ) -> Result<Self> {
        if f.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found: g.dim(),
            });
        }
        if !(eps >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must be >= 0, got {eps}"
            )));
        }
        base_ok(f, x1)?;
        base_ok(g, x2)?;
        let slice1 = contact_slopes(f, x1, 0.0, eps, true);
        let slice2 = contact_slopes(g, x2, 0.0, eps, true);
        let seed = |h: &GridFunction, x: usize, s: &SlopeSet| -> Vec<SubgradientWitness> {
            s.min_norm()
                .map(|v| verify(h, x, 0.0, v, eps, tol, None, Scope::Global))
                .filter(|w| w.is_verified())
                .into_iter()
                .collect()
        };
        let witnesses1 = seed(f, x1, &slice1);
        let witnesses2 = seed(g, x2, &slice2);
        Ok(ZsInstance {
            f,
            g,
            x1,
            x2,
            eps,
            witnesses1,
            witnesses2,
            slice1,
            slice2,
            tol,
        })
    }

    /// Adds a witness for `f` (`first`) or `g`; it is kept only if it verifies.
    pub fn push_witness(&mut self, first: bool, a: f64, v: Point) -> bool {
        let (h, x) = if first {
            (self.f, self.x1)
        } else {
            (self.g, self.x2)
        };
        let w = verify(h, x, a, v, self.eps, self.tol, None, Scope::Global);
        if !w.is_verified() {
            return false;
        }
        if first {
            self.witnesses1.push(w);
        } else {
            self.witnesses2.push(w);
        }
        true
    }

    /// Candidate `a = 0` slopes: slice extreme points plus listed flat witnesses.
    fn samples(&self, first: bool) -> Vec<Point> {
        let (s, ws) = if first {
            (&self.slice1, &self.witnesses1)
        } else {
            (&self.slice2, &self.witnesses2)
        };
        let mut out = s.vertices();
        out.extend(ws.iter().filter(|w| w.a == 0.0).map(|w| w.v));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ZsOutcome {
    /// `λ·w₁ + μ·w₂ = 0` with `λ + μ = 1`; a side with zero weight has no witness.
    Holds {
        lambda: f64,
        mu: f64,
        w1: Option<SubgradientWitness>,
        w2: Option<SubgradientWitness>,
    },
    /// No combination found among the sampled slopes.
    FailsOnSample { reason: String },
}

impl ZsOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, ZsOutcome::Holds { .. })
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Lower+upper monotone chain; collinear points dropped.
fn hull(mut pts: Vec<(Point, bool)>) -> Vec<(Point, bool)> {
    pts.sort_by(|p, q| p.0[0].total_cmp(&q.0[0]).then(p.0[1].total_cmp(&q.0[1])));
    pts.dedup_by(|p, q| p.0 == q.0);
    if pts.len() < 3 {
        return pts;
    }
    let mut h: Vec<(Point, bool)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &(Point, bool)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while h.len() >= start + 2 && cross(&h[h.len() - 2].0, &h[h.len() - 1].0, &p.0) <= 0.0 {
                h.pop();
            }
            h.push(*p);
        }
        h.pop();
    }
    h
}

/// Solves `λv₁ + (1−λ)v₂ = 0` with `λ ∈ (0,1)`, `v₁ ∈ co(p1)`, `v₂ ∈ co(p2)`.
///
/// Returns `(λ, v₁, v₂)` with `v₂ = −λ/(1−λ)·v₁` exactly.
pub(crate) fn cancel(p1: &[Point], p2: &[Point], dim: usize) -> Option<(f64, Point, Point)> {
    if p1.is_empty() || p2.is_empty() {
        return None;
    }
    let finish = |lambda: f64, s: Point| -> Option<(f64, Point, Point)> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return None;
        }
        let mu = 1.0 - lambda;
        Some((
            lambda,
            [s[0] / lambda, s[1] / lambda],
            [-s[0] / mu, -s[1] / mu],
        ))
    };
    if dim == 1 {
        let range = |p: &[Point]| {
            p.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                    (l.min(v[0]), h.max(v[0]))
                })
        };
        let (l1, h1) = range(p1);
        let (l2, h2) = range(p2);
        let (v1, v2) = if h1 < 0.0 && l2 > 0.0 {
            (h1, l2)
        } else if l1 > 0.0 && h2 < 0.0 {
            (l1, h2)
        } else {
            return None;
        };
        let lambda = v2.abs() / (v1.abs() + v2.abs());
        return finish(lambda, [lambda * v1, 0.0]);
    }

    let tagged: Vec<(Point, bool)> = p1
        .iter()
        .map(|p| (*p, true))
        .chain(p2.iter().map(|p| (*p, false)))
        .collect();
    let scale = tagged
        .iter()
        .fold(0.0f64, |m, p| m.max(sqnorm(&p.0).sqrt()));
    let h = hull(tagged);
    let o = [0.0, 0.0];
    let weights: Vec<(f64, &(Point, bool))> = match h.len() {
        0 | 1 => return None,
        2 => {
            let (p, q) = (&h[0], &h[1]);
            if cross(&p.0, &q.0, &o).abs() > 1e-12 * scale * scale {
                return None;
            }
            let e = [q.0[0] - p.0[0], q.0[1] - p.0[1]];
            let t = -(p.0[0] * e[0] + p.0[1] * e[1]) / sqnorm(&e);
            if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                return None;
            }
            vec![(1.0 - t, p), (t, q)]
        }
        n => {
            let mut found = None;
            for k in 1..n - 1 {
                let (a, b, c) = (&h[0], &h[k], &h[k + 1]);
                let area = cross(&a.0, &b.0, &c.0);
                if area <= 0.0 {
                    continue;
                }
                let wa = cross(&b.0, &c.0, &o) / area;
                let wb = cross(&c.0, &a.0, &o) / area;
                let wc = cross(&a.0, &b.0, &o) / area;
                if wa >= -1e-12 && wb >= -1e-12 && wc >= -1e-12 {
                    found = Some(vec![(wa.max(0.0), a), (wb.max(0.0), b), (wc.max(0.0), c)]);
                    break;
                }
            }
            found?
        }
    };
    let total: f64 = weights.iter().map(|w| w.0).sum();
    let mut lambda = 0.0;
    let mut s = [0.0, 0.0];
    for (w, (p, first)) in &weights {
        if *first {
            let w = w / total;
            lambda += w;
            s[0] += w * p[0];
            s[1] += w * p[1];
        }
    }
    finish(lambda, s)
}

/// Semi-decision for `0 ∈ co(∂ε f(x₁) ∪ ∂ε g(x₂))`.
///
/// Tries the zero witness for `f`, then for `g`, then cancels slopes of the
/// two `a = 0` slices. Every returned witness has been verified.
pub fn zs_check(inst: &ZsInstance) -> ZsOutcome {
    let zero = |h: &GridFunction, x: usize| {
        verify(
            h,
            x,
            0.0,
            [0.0, 0.0],
            inst.eps,
            inst.tol,
            None,
            Scope::Global,
        )
    };
    let w = zero(inst.f, inst.x1);
    if w.is_verified() {
        return ZsOutcome::Holds {
            lambda: 1.0,
            mu: 0.0,
            w1: Some(w),
            w2: None,
        };
    }
    let w = zero(inst.g, inst.x2);
    if w.is_verified() {
        return ZsOutcome::Holds {
            lambda: 0.0,
            mu: 1.0,
            w1: None,
            w2: Some(w),
        };
    }
    let (s1, s2) = (inst.samples(true), inst.samples(false));
    if s1.is_empty() || s2.is_empty() {
        let side = if s1.is_empty() && s2.is_empty() {
            "both slices"
        } else if s1.is_empty() {
            "the first slice"
        } else {
            "the second slice"
        };
        return ZsOutcome::FailsOnSample {
            reason: format!("no flat supporting slope in {side} and no zero witness"),
        };
    }
    let Some((lambda, v1, v2)) = cancel(&s1, &s2, inst.f.dim()) else {
        return ZsOutcome::FailsOnSample {
            reason: "sampled flat slopes admit no cancelling combination".into(),
        };
    };
    let w1 = verify(
        inst.f,
        inst.x1,
        0.0,
        v1,
        inst.eps,
        inst.tol,
        None,
        Scope::Global,
    );
    let w2 = verify(
        inst.g,
        inst.x2,
        0.0,
        v2,
        inst.eps,
        inst.tol,
        None,
        Scope::Global,
    );
    if !(w1.is_verified() && w2.is_verified()) {
        return ZsOutcome::FailsOnSample {
            reason: "cancelling combination failed re-verification".into(),
        };
    }
    ZsOutcome::Holds {
        lambda,
        mu: 1.0 - lambda,
        w1: Some(w1),
        w2: Some(w2),
    }
}

fn support_tol(f: &GridFunction, tol: Tolerance) -> f64 {
    tol.allowance(1.0 + f.max_abs_finite())
}

fn constant_support(f: &GridFunction) -> Result<QuadraticMinorant> {
    QuadraticMinorant::constant(f.dim(), f.min_value())
}

/// Builds a pair of supports with disjoint strict sublevel sets at
/// `alpha − eps` from a zero-subgradient certificate at the common point `x̄`.
pub fn zs_to_ip(
    f: &GridFunction,
    g: &GridFunction,
    xbar: usize,
    eps: f64,
    alpha: f64,
    tol: Tolerance,
) -> Result<(QuadraticMinorant, QuadraticMinorant)> {
    let inst = ZsInstance::new(f, g, xbar, xbar, eps, tol)?;
    let (fb, gb) = (f.value(xbar), g.value(xbar));
    if !(fb >= alpha && gb >= alpha) {
        return Err(Error::Precondition(format!(
            "f(x̄) = {fb} and g(x̄) = {gb} must both be >= alpha = {alpha}"
        )));
    }
    let dim = f.dim();
    let level = alpha - eps;
    let affine = |h: &GridFunction, v: Point| {
        let p = f.grid().node(xbar);
        let c = h.value(xbar) - eps - (v[0] * p[0] + v[1] * p[1]);
        QuadraticMinorant::from_parts(0.0, v, c, dim)
    };
    let (phi1, phi2) = match zs_check(&inst) {
        ZsOutcome::FailsOnSample { reason } => {
            return Err(Error::Precondition(format!(
                "zero-subgradient condition not found: {reason}"
            )))
        }
        ZsOutcome::Holds { lambda: 1.0, .. } => (
            QuadraticMinorant::constant(dim, level)?,
            constant_support(g)?,
        ),
        ZsOutcome::Holds { lambda: 0.0, .. } => (
            constant_support(f)?,
            QuadraticMinorant::constant(dim, level)?,
        ),
        ZsOutcome::Holds { w1, w2, .. } => {
            let (w1, w2) = (
                w1.expect("interior case has both witnesses"),
                w2.expect("interior case has both witnesses"),
            );
            (affine(f, w1.v)?, affine(g, w2.v)?)
        }
    };
    if !is_support(&phi1, f, support_tol(f, tol))? || !is_support(&phi2, g, support_tol(g, tol))? {
        return Err(Error::Inconsistent(
            "constructed minorant is not below the function".into(),
        ));
    }
    if !intersection_property(&phi1, &phi2, level)?.is_empty() {
        return Err(Error::Inconsistent(format!(
            "sublevel sets at {level} intersect"
        )));
    }
    Ok((phi1, phi2))
}

fn argmin_gap(f: &GridFunction, phi: &QuadraticMinorant) -> usize {
    let g = f.grid();
    let mut best = (usize::MAX, f64::INFINITY);
    for i in 0..g.len() {
        let d = f.value(i) - phi.eval(&g.node(i));
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Recovers a zero-subgradient certificate from supports `φ₁ ≤ f`, `φ₂ ≤ g`
/// whose strict sublevel sets at `alpha` are disjoint.
///
/// `x₁` and `x₂` minimize `f − φ₁` and `g − φ₂` over the grid; the minorant
/// parameters become witnesses at slack `eps`.
pub fn ip_to_zs<'a>(
    f: &'a GridFunction,
    g: &'a GridFunction,
    phi1: &QuadraticMinorant,
    phi2: &QuadraticMinorant,
    eps: f64,
    alpha: f64,
    tol: Tolerance,
) -> Result<(ZsInstance<'a>, ZsOutcome)> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be > 0, got {eps}")));
    }
    if !is_support(phi1, f, support_tol(f, tol))? || !is_support(phi2, g, support_tol(g, tol))? {
        return Err(Error::Precondition(
            "minorants must lie below their functions".into(),
        ));
    }
    if !intersection_property(phi1, phi2, alpha)?.is_empty() {
        return Err(Error::Precondition(format!(
            "sublevel sets at {alpha} intersect"
        )));
    }
    let x1 = argmin_gap(f, phi1);
    let x2 = argmin_gap(g, phi2);
    let mut inst = ZsInstance::new(f, g, x1, x2, eps, tol)?;
    if !inst.push_witness(true, phi1.a(), phi1.v()) || !inst.push_witness(false, phi2.a(), phi2.v())
    {
        return Err(Error::Inconsistent(
            "minorant parameters failed verification at the near-minimizer".into(),
        ));
    }
    let out = zs_check(&inst);
    Ok((inst, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{FunctionExpr, Grid};

    fn sample(text: &str, lo: f64, hi: f64, h: f64) -> GridFunction {
        GridFunction::sample(
            FunctionExpr::parse(text, 1).unwrap(),
            Grid::line(lo, hi, h).unwrap(),
        )
        .unwrap()
    }

    fn at(f: &GridFunction, x: f64) -> usize {
        f.grid().node_at(&[x, 0.0]).unwrap()
    }

    #[test]
    fn global_minimum_gives_lambda_one() {
        let f = sample("x*x", -1.0, 1.0, 0.0625);
        let inst =
            ZsInstance::new(&f, &f, at(&f, 0.0), at(&f, 0.5), 0.0, Tolerance::default()).unwrap();
        let ZsOutcome::Holds { lambda, .. } = zs_check(&inst) else {
            panic!()
        };
        assert_eq!(lambda, 1.0);
    }

    #[test]
    fn opposite_slopes_cancel() {
        let f = sample("x", -1.0, 1.0, 0.0625);
        let g = sample("-x", -1.0, 1.0, 0.0625);
        let x0 = at(&f, 0.0);
        let inst = ZsInstance::new(&f, &g, x0, x0, 0.0, Tolerance::default()).unwrap();
        let ZsOutcome::Holds { lambda, w1, w2, .. } = zs_check(&inst) else {
            panic!()
        };
        assert!((lambda - 0.5).abs() < 1e-12);
        assert!((w1.unwrap().v[0] - 1.0).abs() < 1e-9 && (w2.unwrap().v[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn example_one_fails_at_zero_slack() {
        let f = sample("exp(x)", -6.0, 2.0, 0.125);
        let g = sample("-x*x+4", -6.0, 2.0, 0.125);
        let inst =
            ZsInstance::new(&f, &g, at(&f, 0.0), at(&g, 1.0), 0.0, Tolerance::default()).unwrap();
        assert!(!zs_check(&inst).holds());
    }

    #[test]
    fn zs_to_ip_examples() {
        let tol = Tolerance::default();
        let f = sample("x*x", -1.0, 1.0, 0.0625);
        let (p1, _) = zs_to_ip(&f, &f, at(&f, 0.0), 0.0, 0.0, tol).unwrap();
        assert_eq!((p1.a(), p1.v()[0], p1.c()), (0.0, 0.0, 0.0));

        let f = sample("x*x+x", -1.0, 1.0, 0.0625);
        let g = sample("x*x-x", -1.0, 1.0, 0.0625);
        let (p1, p2) = zs_to_ip(&f, &g, at(&f, 0.0), 0.0, 0.0, tol).unwrap();
        assert!((p1.v()[0] - 1.0).abs() < 1e-9 && (p2.v()[0] + 1.0).abs() < 1e-9);

        let g = sample("x*x+1", -1.0, 1.0, 0.0625);
        assert!(matches!(
            zs_to_ip(&f, &g, at(&f, -0.5), 0.0, 0.0, tol),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ip_to_zs_example_one() {
        let f = sample("exp(x)", -6.0, 2.0, 0.125);
        let g = sample("-x*x+4", -6.0, 2.0, 0.125);
        let p1 = QuadraticMinorant::constant(1, 0.0).unwrap();
        let p2 = QuadraticMinorant::new(1.0, &[0.0], 0.0).unwrap();
        for eps in [0.1, 0.01] {
            let (inst, out) = ip_to_zs(&f, &g, &p1, &p2, eps, 0.0, Tolerance::default()).unwrap();
            assert_eq!(inst.x1, 0);
            assert!(out.holds());
        }
        assert!(ip_to_zs(&f, &g, &p1, &p2, 0.0, 0.0, Tolerance::default()).is_err());
    }

    #[test]
    fn cancel_in_the_plane() {
        let p1 = [[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]];
        let p2 = [[-1.0, -1.0], [-3.0, -1.0]];
        let (l, v1, v2) = cancel(&p1, &p2, 2).unwrap();
        assert!(l > 0.0 && l < 1.0);
        assert!((l * v1[0] + (1.0 - l) * v2[0]).abs() < 1e-12);
        assert!((l * v1[1] + (1.0 - l) * v2[1]).abs() < 1e-12);
        assert!(cancel(&p1, &[[1.0, -5.0]], 2).is_none());
    }
}
