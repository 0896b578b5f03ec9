use crate::grid::GridFunction;
use crate::{Error, Result};

/// `e_λf(x) = min_y f(y) + ‖x − y‖²/(2λ)` with `y` over grid nodes.
///
/// The quadratic is separable, so the 2D case runs the 1D minimisation along
/// each axis in turn.
pub fn moreau_envelope(f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let g = f.grid();
    let [n1, n2] = g.shape();
    let inv = 1.0 / (2.0 * lambda);
    let xs1: Vec<f64> = (0..n1).map(|i| g.node(g.flat([i, 0]))[0]).collect();
    let mut pass = vec![f64::INFINITY; g.len()];
    for j in 0..n2 {
        for i in 0..n1 {
            let mut best = f64::INFINITY;
            for k in 0..n1 {
                let v = f.value(g.flat([k, j]));
                if v.is_finite() {
                    let d = xs1[i] - xs1[k];
                    best = best.min(v + d * d * inv);
                }
            }
            pass[g.flat([i, j])] = best;
        }
    }
    if g.dim() == 1 {
        return f.with_values(pass);
    }
    let xs2: Vec<f64> = (0..n2).map(|j| g.node(g.flat([0, j]))[1]).collect();
    let mut out = vec![f64::INFINITY; g.len()];
    for i in 0..n1 {
        for j in 0..n2 {
            let mut best = f64::INFINITY;
            for k in 0..n2 {
                let v = pass[g.flat([i, k])];
                if v.is_finite() {
                    let d = xs2[j] - xs2[k];
                    best = best.min(v + d * d * inv);
                }
            }
            out[g.flat([i, j])] = best;
        }
    }
    f.with_values(out)
}
