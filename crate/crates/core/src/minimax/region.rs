use crate::grid::{dot, sqnorm, Point};
use crate::minorant::QuadraticMinorant;
use crate::{Error, Result};

/// Shape of a strict sublevel set `[φ < α]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Empty,
    WholeSpace,
    /// `{x : ⟨normal, x⟩ < bound}`, `normal ≠ 0`.
    OpenHalfspace {
        normal: Point,
        bound: f64,
    },
    /// `{x : ‖x − center‖ > radius}`.
    BallExterior {
        center: Point,
        radius: f64,
    },
}

impl Region {
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            Region::Empty => false,
            Region::WholeSpace => true,
            Region::OpenHalfspace { normal, bound } => dot(normal, x) < *bound,
            Region::BallExterior { center, radius } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                sqnorm(&d).sqrt() > *radius
            }
        }
    }
}

/// Classifies `[φ < α]`.
///
/// For `a > 0`, `φ(x) < α` iff `‖x − v/(2a)‖² > (c − α)/a + ‖v‖²/(4a²)`.
pub fn sublevel_region(phi: &QuadraticMinorant, alpha: f64) -> Region {
    let (a, v, c) = (phi.a(), phi.v(), phi.c());
    if a > 0.0 {
        let center = [v[0] / (2.0 * a), v[1] / (2.0 * a)];
        let r2 = (c - alpha) / a + sqnorm(&v) / (4.0 * a * a);
        if r2 < 0.0 {
            Region::WholeSpace
        } else {
            Region::BallExterior {
                center,
                radius: r2.sqrt(),
            }
        }
    } else if sqnorm(&v) > 0.0 {
        Region::OpenHalfspace {
            normal: v,
            bound: alpha - c,
        }
    } else if c >= alpha {
        Region::Empty
    } else {
        Region::WholeSpace
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntersectionResult {
    /// `[φ₁ < α] ∩ [φ₂ < α] = ∅`.
    Empty,
    /// A point of both sets, checked by direct evaluation. It may lie
    /// outside any grid box.
    Witness(Point),
}

impl IntersectionResult {
    pub fn is_empty(&self) -> bool {
        matches!(self, IntersectionResult::Empty)
    }
}

fn unit(v: &Point) -> Point {
    let n = sqnorm(v).sqrt();
    [v[0] / n, v[1] / n]
}

/// Some point of a nonempty region.
fn point_in(r: &Region) -> Option<Point> {
    match *r {
        Region::Empty => None,
        Region::WholeSpace => Some([0.0, 0.0]),
        Region::OpenHalfspace { normal, bound } => {
            let n2 = sqnorm(&normal);
            let s = bound - 1.0 - bound.abs();
            Some([normal[0] * s / n2, normal[1] * s / n2])
        }
        Region::BallExterior { center, radius } => {
            Some([center[0] + 2.0 * radius + 1.0, center[1]])
        }
    }
}

/// Candidate common point; `scale ≥ 1` pushes far-field candidates outward.
fn candidate(r1: &Region, r2: &Region, scale: f64) -> Option<Point> {
    use Region::*;
    match (*r1, *r2) {
        (Empty, _) | (_, Empty) => None,
        (WholeSpace, r) | (r, WholeSpace) => point_in(&r),
        (
            BallExterior {
                center: p1,
                radius: q1,
            },
            BallExterior {
                center: p2,
                radius: q2,
            },
        ) => {
            let d = [p1[0] - p2[0], p1[1] - p2[1]];
            let n = sqnorm(&d).sqrt();
            let e = if n > 0.0 {
                [d[0] / n, d[1] / n]
            } else {
                [1.0, 0.0]
            };
            let t = scale * (q1 + q2 + n + 1.0);
            Some([p1[0] + t * e[0], p1[1] + t * e[1]])
        }
        (BallExterior { center, radius }, OpenHalfspace { normal, bound })
        | (OpenHalfspace { normal, bound }, BallExterior { center, radius }) => {
            let u = unit(&normal);
            let nv = sqnorm(&normal).sqrt();
            let t = scale * ((-bound / nv).max(0.0) + sqnorm(&center).sqrt() + radius + 1.0);
            Some([-t * u[0], -t * u[1]])
        }
        (
            OpenHalfspace {
                normal: v1,
                bound: b1,
            },
            OpenHalfspace {
                normal: v2,
                bound: b2,
            },
        ) => {
            let (n1, n2) = (sqnorm(&v1).sqrt(), sqnorm(&v2).sqrt());
            let cross = v1[0] * v2[1] - v1[1] * v2[0];
            if cross.abs() <= 1e-12 * n1 * n2 && dot(&v1, &v2) < 0.0 {
                // v2 = −κ v1: the sets are ⟨v1,x⟩ < b1 and ⟨v1,x⟩ > −b2/κ.
                let kappa = n2 / n1;
                if kappa * b1 + b2 <= 1e-12 * (kappa * b1.abs() + b2.abs()) {
                    return None;
                }
                let lower = -b2 / kappa;
                let m = 0.5 * (lower + b1);
                let s = m / (n1 * n1);
                Some([v1[0] * s, v1[1] * s])
            } else {
                let (u1, u2) = (unit(&v1), unit(&v2));
                let w = [-(u1[0] + u2[0]), -(u1[1] + u2[1])];
                let k1 = -dot(&v1, &w);
                let k2 = -dot(&v2, &w);
                let t = scale * ((-b1 / k1).max(0.0) + (-b2 / k2).max(0.0) + 1.0);
                Some([t * w[0], t * w[1]])
            }
        }
    }
}

/// Decides whether `[φ₁ < α]` and `[φ₂ < α]` are disjoint.
pub fn intersection_property(
    phi1: &QuadraticMinorant,
    phi2: &QuadraticMinorant,
    alpha: f64,
) -> Result<IntersectionResult> {
    if phi1.dim() != phi2.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi1.dim(),
            found: phi2.dim(),
        });
    }
    let (r1, r2) = (sublevel_region(phi1, alpha), sublevel_region(phi2, alpha));
    let mut scale = 1.0;
    for _ in 0..64 {
        let Some(x) = candidate(&r1, &r2, scale) else {
            return Ok(IntersectionResult::Empty);
        };
        if phi1.eval(&x) < alpha && phi2.eval(&x) < alpha {
            return Ok(IntersectionResult::Witness(x));
        }
        scale *= 2.0;
    }
    // The regions overlap only in a sliver too thin to exhibit in floating
    // point; report it as disjoint.
    Ok(IntersectionResult::Empty)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: f64, v: f64, c: f64) -> QuadraticMinorant {
        QuadraticMinorant::new(a, &[v], c).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            sublevel_region(&q(1.0, 0.0, 0.0), -1.0),
            Region::BallExterior {
                center: [0.0, 0.0],
                radius: 1.0
            }
        );
        assert_eq!(sublevel_region(&q(1.0, 0.0, 0.0), 1.0), Region::WholeSpace);
        assert_eq!(sublevel_region(&q(0.0, 0.0, 0.0), 0.0), Region::Empty);
        assert_eq!(sublevel_region(&q(0.0, 0.0, -1.0), 0.0), Region::WholeSpace);
        assert_eq!(
            sublevel_region(&q(0.0, 2.0, 1.0), 0.0),
            Region::OpenHalfspace {
                normal: [2.0, 0.0],
                bound: -1.0
            }
        );
    }

    #[test]
    fn decision_examples() {
        let zero = q(0.0, 0.0, 0.0);
        let negsq = q(1.0, 0.0, 0.0);
        assert!(intersection_property(&zero, &negsq, 0.0)
            .unwrap()
            .is_empty());
        assert!(
            intersection_property(&q(0.0, 1.0, 0.0), &q(0.0, -1.0, 0.0), 0.0)
                .unwrap()
                .is_empty()
        );
        let IntersectionResult::Witness(x) = intersection_property(&negsq, &negsq, -1.0).unwrap()
        else {
            panic!()
        };
        assert!(negsq.eval(&x) < -1.0);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn antiparallel_overlap_gets_midpoint() {
        // x < 1 and x > -1.
        let r = intersection_property(&q(0.0, 1.0, 0.0), &q(0.0, -1.0, 0.0), 1.0).unwrap();
        assert_eq!(r, IntersectionResult::Witness([0.0, 0.0]));
    }

    #[test]
    fn two_dimensional_halfspaces() {
        let p1 = QuadraticMinorant::new(0.0, &[1.0, 0.0], 0.0).unwrap();
        let p2 = QuadraticMinorant::new(0.0, &[0.0, 1.0], 0.0).unwrap();
        let IntersectionResult::Witness(x) = intersection_property(&p1, &p2, -5.0).unwrap() else {
            panic!()
        };
        assert!(p1.eval(&x) < -5.0 && p2.eval(&x) < -5.0);
        let p3 = QuadraticMinorant::new(0.0, &[-2.0, 0.0], 0.0).unwrap();
        assert!(intersection_property(&p1, &p3, 0.0).unwrap().is_empty());
    }
}
