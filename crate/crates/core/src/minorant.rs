use crate::grid::{dot, point_from, sqnorm, GridFunction, Point};
use crate::{Error, Result};

/// `x ↦ −a‖x‖² + ⟨v,x⟩ + c` with `a ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticMinorant {
    a: f64,
    v: Point,
    c: f64,
    dim: usize,
}

impl QuadraticMinorant {
    pub fn new(a: f64, v: &[f64], c: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "curvature must be a finite a >= 0, got {a}"
            )));
        }
        if !c.is_finite() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "slope and offset must be finite".into(),
            ));
        }
        Ok(QuadraticMinorant {
            a,
            v: point_from(v)?,
            c,
            dim: v.len(),
        })
    }

    /// Constant function `c` in dimension `dim`.
    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        QuadraticMinorant::new(0.0, &[0.0, 0.0][..dim.clamp(1, 2)], c)
    }

    pub(crate) fn from_parts(a: f64, v: Point, c: f64, dim: usize) -> Result<Self> {
        QuadraticMinorant::new(a, &v[..dim], c)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn v(&self) -> Point {
        self.v
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates at a point whose unused coordinates are zero.
    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        -self.a * sqnorm(x) + dot(&self.v, x) + self.c
    }

    /// Coefficient-wise combination `λ·self + (1−λ)·other`.
    pub fn combine(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mu = 1.0 - lambda;
        let v = [
            lambda * self.v[0] + mu * other.v[0],
            lambda * self.v[1] + mu * other.v[1],
        ];
        QuadraticMinorant::from_parts(
            lambda * self.a + mu * other.a,
            v,
            lambda * self.c + mu * other.c,
            self.dim,
        )
    }
}

pub fn eval_minorant(phi: &QuadraticMinorant, x: &[f64]) -> Result<f64> {
    if x.len() != phi.dim {
        return Err(Error::DimensionMismatch {
            expected: phi.dim,
            found: x.len(),
        });
    }
    Ok(phi.eval(&point_from(x)?))
}

/// `φ ≤ f + tol` at every node; nodes where `f = +∞` pass.
pub fn is_support(phi: &QuadraticMinorant, f: &GridFunction, tol: f64) -> Result<bool> {
    if phi.dim != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: phi.dim,
        });
    }
    Ok(f.grid()
        .nodes()
        .zip(f.values())
        .all(|(x, &fx)| phi.eval(&x) <= fx + tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{FunctionExpr, Grid};

    #[test]
    fn evaluation_examples() {
        let phi = QuadraticMinorant::new(0.0, &[0.0], 5.0).unwrap();
        assert_eq!(eval_minorant(&phi, &[17.0]).unwrap(), 5.0);
        let phi = QuadraticMinorant::new(1.0, &[0.0], 0.0).unwrap();
        assert_eq!(eval_minorant(&phi, &[2.0]).unwrap(), -4.0);
        let phi = QuadraticMinorant::new(1.0, &[2.0], 3.0).unwrap();
        assert_eq!(eval_minorant(&phi, &[1.0]).unwrap(), 4.0);
        assert!(eval_minorant(&phi, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn negative_curvature_rejected() {
        assert!(QuadraticMinorant::new(-1e-3, &[0.0], 0.0).is_err());
    }

    #[test]
    fn support_examples() {
        let g = Grid::line(-3.0, 3.0, 0.125).unwrap();
        let ex =
            GridFunction::sample(FunctionExpr::parse("exp(x)", 1).unwrap(), g.clone()).unwrap();
        let zero = QuadraticMinorant::constant(1, 0.0).unwrap();
        let one = QuadraticMinorant::constant(1, 1.0).unwrap();
        assert!(is_support(&zero, &ex, 0.0).unwrap());
        assert!(!is_support(&one, &ex, 0.0).unwrap());

        let q = GridFunction::sample(FunctionExpr::parse("-x*x+4", 1).unwrap(), g).unwrap();
        let phi = QuadraticMinorant::new(1.0, &[0.0], 0.0).unwrap();
        assert!(is_support(&phi, &q, 0.0).unwrap());
    }
}
