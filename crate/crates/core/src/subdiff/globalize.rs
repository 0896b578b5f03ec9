use crate::grid::{dot, sqnorm, GridFunction};
use crate::minorant::QuadraticMinorant;
use crate::subdiff::eps::{slope_point, validate_base, verify};
use crate::tolerance::Tolerance;
use crate::witness::{Scope, SubgradientWitness};
use crate::{Error, Result};

/// `f(x) ≥ −a0‖x‖² + c0` for every `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalMinorantBound {
    pub a0: f64,
    pub c0: f64,
}

impl GlobalMinorantBound {
    /// Checks the bound on every node of `f`.
    pub fn new(f: &GridFunction, a0: f64, c0: f64, tol: Tolerance) -> Result<Self> {
        let b = GlobalMinorantBound { a0, c0 };
        if !(a0 >= 0.0 && c0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bound needs a0 >= 0 and finite c0, got ({a0}, {c0})"
            )));
        }
        if !b.holds_on(f, tol) {
            return Err(Error::Precondition(format!(
                "f is not bounded below by -{a0}|x|^2 + {c0}"
            )));
        }
        Ok(b)
    }

    /// `(0, min f)`.
    pub fn from_grid(f: &GridFunction) -> Self {
        GlobalMinorantBound {
            a0: 0.0,
            c0: f.min_value(),
        }
    }

    pub fn holds_on(&self, f: &GridFunction, tol: Tolerance) -> bool {
        f.grid().nodes().zip(f.values()).all(|(x, &v)| {
            let q = -self.a0 * sqnorm(&x) + self.c0;
            q <= v + tol.allowance(v.abs() + q.abs())
        })
    }
}

/// Centred bound below a minorant, from `⟨v,x⟩ ≥ −½‖v‖² − ½‖x‖²`.
pub fn center_minorant(phi: &QuadraticMinorant) -> GlobalMinorantBound {
    GlobalMinorantBound {
        a0: phi.a() + 0.5,
        c0: phi.c() - 0.5 * sqnorm(&phi.v()),
    }
}

/// Curvature from which a local witness `(a, v)` on `B(delta, x̄)` becomes global.
pub fn globalizing_curvature(
    f: &GridFunction,
    xbar: usize,
    a: f64,
    v: &[f64],
    delta: f64,
    bound: &GlobalMinorantBound,
) -> Result<f64> {
    let v = slope_point(f, v)?;
    let xb = f.grid().node(xbar);
    let u = [v[0] - 2.0 * a * xb[0], v[1] - 2.0 * a * xb[1]];
    // h = f − ⟨u, · − x̄⟩ ≥ −a0‖x‖² − ⟨u,x⟩ + c0 + ⟨u,x̄⟩, then centred.
    let shifted =
        QuadraticMinorant::from_parts(bound.a0, [-u[0], -u[1]], bound.c0 + dot(&u, &xb), f.dim())?;
    let GlobalMinorantBound { a0: ah, c0: ch } = center_minorant(&shifted);
    let nx = sqnorm(&xb).sqrt();
    let abar =
        (f.value(xbar) + ah * nx * nx - ch) / (delta * delta) + ah * (1.0 + 2.0 * nx / delta);
    Ok(abar.max(a))
}

/// Promotes a local witness to a global one and verifies it on the whole grid.
///
/// If the closed-form curvature fails verification (roundoff on a loose
/// bound), it is doubled up to ten times before giving up.
pub fn globalize(
    f: &GridFunction,
    xbar: usize,
    a: f64,
    v: &[f64],
    delta: f64,
    bound: &GlobalMinorantBound,
    tol: Tolerance,
) -> Result<SubgradientWitness> {
    validate_base(f, xbar)?;
    if !(delta > 0.0 && a >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need delta > 0 and a >= 0, got delta = {delta}, a = {a}"
        )));
    }
    let vp = slope_point(f, v)?;
    let rho = globalizing_curvature(f, xbar, a, v, delta, bound)?;
    let xb = f.grid().node(xbar);
    let mut last = None;
    for k in 0..=10 {
        let r = rho * f64::from(1u32 << k);
        let w = [
            vp[0] - 2.0 * a * xb[0] + 2.0 * r * xb[0],
            vp[1] - 2.0 * a * xb[1] + 2.0 * r * xb[1],
        ];
        let out = verify(f, xbar, r, w, 0.0, tol, None, Scope::Global);
        if out.is_verified() {
            return Ok(out);
        }
        last = Some(out);
        if r == 0.0 {
            break;
        }
    }
    Err(Error::VerificationFailed(Box::new(last.unwrap())))
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

    #[test]
    fn centring_examples() {
        let b = center_minorant(&QuadraticMinorant::new(0.0, &[0.0], 3.0).unwrap());
        assert_eq!((b.a0, b.c0), (0.5, 3.0));
        let b = center_minorant(&QuadraticMinorant::new(1.0, &[2.0], 0.0).unwrap());
        assert_eq!((b.a0, b.c0), (1.5, -2.0));
        let b = center_minorant(&QuadraticMinorant::new(0.0, &[1.0], 0.0).unwrap());
        assert_eq!((b.a0, b.c0), (0.5, -0.5));
    }

    #[test]
    fn two_wells_needs_quarter() {
        let f = sample("min(x*x,(x-2)*(x-2)-1)", -2.0, 4.0, 0.0625);
        let x0 = f.grid().node_at(&[0.0, 0.0]).unwrap();
        let bound = GlobalMinorantBound::from_grid(&f);
        let w = globalize(&f, x0, 0.0, &[0.0], 1.0, &bound, Tolerance::default()).unwrap();
        assert!(w.is_verified());
        assert!(w.a >= 0.25);
        assert_eq!(w.v[0], 0.0);
    }

    #[test]
    fn already_global() {
        let f = sample("-x*x", -2.0, 2.0, 0.0625);
        let x0 = f.grid().node_at(&[0.0, 0.0]).unwrap();
        let bound = GlobalMinorantBound::new(&f, 1.0, 0.0, Tolerance::default()).unwrap();
        let w = globalize(&f, x0, 1.0, &[0.0], 1.0, &bound, Tolerance::default()).unwrap();
        assert!(w.a >= 1.0 && w.v[0] == 0.0 && w.is_verified());
    }

    #[test]
    fn bad_bound_rejected() {
        let f = sample("-x*x", -2.0, 2.0, 0.0625);
        assert!(GlobalMinorantBound::new(&f, 0.0, 0.0, Tolerance::default()).is_err());
    }
}
