use crate::grid::{dot, sqnorm, GridFunction, Point};
use crate::subdiff::eps::{slope_point, validate_base, verify};
use crate::subdiff::globalize::{globalize, GlobalMinorantBound};
use crate::tolerance::Tolerance;
use crate::witness::{Scope, SubgradientWitness, Verification};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Finite(f64),
    Unbounded,
}

/// `f(x) ≥ f(x̄) + ⟨v, x−x̄⟩ − ½ρ‖x−x̄‖²` on `B(delta, x̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximalWitness {
    pub v: Point,
    pub rho: f64,
    pub delta: Radius,
}

impl ProximalWitness {
    pub fn new(v: Point, rho: f64, delta: Radius) -> Result<Self> {
        if !(rho >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rho must be >= 0, got {rho}"
            )));
        }
        if let Radius::Finite(d) = delta {
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "delta must be positive, got {d}"
                )));
            }
        }
        Ok(ProximalWitness { v, rho, delta })
    }
}

/// `(a, v)` at `x̄` becomes `(v − 2a·x̄, ρ = 2a)` with no radius restriction.
pub fn phi_to_proximal(w: &SubgradientWitness) -> ProximalWitness {
    let x = w.point;
    ProximalWitness {
        v: [w.v[0] - 2.0 * w.a * x[0], w.v[1] - 2.0 * w.a * x[1]],
        rho: 2.0 * w.a,
        delta: Radius::Unbounded,
    }
}

/// Outcome of a direct nodewise check of the proximal inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximalCheck {
    pub status: Verification,
    pub worst_amount: f64,
    pub nodes_checked: usize,
}

impl ProximalCheck {
    pub fn holds(&self) -> bool {
        self.status == Verification::VerifiedOnGrid
    }
}

/// Evaluates the proximal inequality as written, node by node.
pub fn check_proximal(
    f: &GridFunction,
    xbar: usize,
    pw: &ProximalWitness,
    tol: Tolerance,
) -> Result<ProximalCheck> {
    validate_base(f, xbar)?;
    let g = f.grid();
    let xb = g.node(xbar);
    let fb = f.value(xbar);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_node = xbar;
    let mut count = 0;
    for i in 0..g.len() {
        let fx = f.value(i);
        if !fx.is_finite() {
            continue;
        }
        let x = g.node(i);
        let d = [x[0] - xb[0], x[1] - xb[1]];
        if let Radius::Finite(r) = pw.delta {
            if sqnorm(&d).sqrt() >= r {
                continue;
            }
        }
        count += 1;
        let lin = dot(&pw.v, &d);
        let quad = 0.5 * pw.rho * sqnorm(&d);
        let raw = (fb + lin - quad) - fx;
        let excess = raw - tol.allowance(fx.abs() + fb.abs() + lin.abs() + quad);
        if excess > worst_excess {
            worst_excess = excess;
            worst = raw;
            worst_node = i;
        }
    }
    let status = if worst_excess > 0.0 {
        Verification::Refuted {
            node: worst_node,
            amount: worst,
        }
    } else {
        Verification::VerifiedOnGrid
    };
    Ok(ProximalCheck {
        status,
        worst_amount: worst,
        nodes_checked: count,
    })
}

/// Turns a proximal witness into `(ρ/2, v + ρ·x̄)`. With an unbounded radius
/// that pair is already global and is only re-verified; otherwise it is local
/// on `B(delta, x̄)` and goes through [`globalize`].
pub fn proximal_to_phi(
    f: &GridFunction,
    xbar: usize,
    pw: &ProximalWitness,
    bound: &GlobalMinorantBound,
    tol: Tolerance,
) -> Result<SubgradientWitness> {
    validate_base(f, xbar)?;
    let xb = f.grid().node(xbar);
    let a = 0.5 * pw.rho;
    let v = [pw.v[0] + pw.rho * xb[0], pw.v[1] + pw.rho * xb[1]];
    match pw.delta {
        Radius::Unbounded => {
            let w = verify(f, xbar, a, v, 0.0, tol, None, Scope::Global);
            if w.is_verified() {
                Ok(w)
            } else {
                Err(Error::VerificationFailed(Box::new(w)))
            }
        }
        Radius::Finite(delta) => {
            let vs = &v[..f.dim()];
            slope_point(f, vs)?;
            globalize(f, xbar, a, vs, delta, bound, tol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subdiff::check_eps_subgradient;
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
    fn forward_examples() {
        let f = sample("-x*x+4", -2.0, 2.0, 0.1);
        let w = check_eps_subgradient(&f, at(&f, 0.0), 1.0, &[2.0], 0.0, Tolerance::ZERO).unwrap();
        let p = phi_to_proximal(&w);
        assert_eq!((p.v[0], p.rho), (2.0, 2.0));
        let w = check_eps_subgradient(&f, at(&f, 1.0), 1.0, &[2.0], 0.0, Tolerance::ZERO).unwrap();
        let p = phi_to_proximal(&w);
        assert_eq!((p.v[0], p.rho), (0.0, 2.0));

        let w =
            check_eps_subgradient(&f, at(&f, 0.7), 1.0, &[0.0], 0.0, Tolerance::default()).unwrap();
        let p = phi_to_proximal(&w);
        assert!((p.v[0] + 1.4).abs() < 1e-15 && p.rho == 2.0);
        assert!(
            check_proximal(&f, at(&f, 0.7), &p, Tolerance::relative(1e-12))
                .unwrap()
                .holds()
        );
    }

    #[test]
    fn backward_examples() {
        let tol = Tolerance::default();
        let f = sample("x*x", -2.0, 2.0, 0.0625);
        let b = GlobalMinorantBound::from_grid(&f);
        let pw = ProximalWitness::new([0.0, 0.0], 0.0, Radius::Unbounded).unwrap();
        let w = proximal_to_phi(&f, at(&f, 0.0), &pw, &b, tol).unwrap();
        assert_eq!((w.a, w.v[0]), (0.0, 0.0));

        let f = sample("-x*x", -2.0, 2.0, 0.0625);
        let b = GlobalMinorantBound::from_grid(&f);
        let pw = ProximalWitness::new([0.0, 0.0], 2.0, Radius::Unbounded).unwrap();
        let w = proximal_to_phi(&f, at(&f, 0.0), &pw, &b, tol).unwrap();
        assert_eq!((w.a, w.v[0]), (1.0, 0.0));

        let f = sample("min(x*x,(x-2)*(x-2)-1)", -2.0, 4.0, 0.0625);
        let b = GlobalMinorantBound::from_grid(&f);
        let pw = ProximalWitness::new([0.0, 0.0], 0.0, Radius::Finite(1.0)).unwrap();
        let w = proximal_to_phi(&f, at(&f, 0.0), &pw, &b, tol).unwrap();
        assert!(w.a >= 0.25 && w.is_verified());
    }

    #[test]
    fn invalid_witnesses() {
        assert!(ProximalWitness::new([0.0, 0.0], -1.0, Radius::Unbounded).is_err());
        assert!(ProximalWitness::new([0.0, 0.0], 1.0, Radius::Finite(0.0)).is_err());
    }
}
