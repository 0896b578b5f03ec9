/// Slack allowed when comparing the two sides of a nodewise inequality.
///
/// The allowance at a node is `abs + rel * magnitude`, where `magnitude` is the
/// sum of absolute values of the terms that entered the comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const ZERO: Tolerance = Tolerance { abs: 0.0, rel: 0.0 };

    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }

    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    #[inline]
    pub fn allowance(&self, magnitude: f64) -> f64 {
        self.abs + self.rel * magnitude
    }

    pub fn is_valid(&self) -> bool {
        self.abs >= 0.0 && self.rel >= 0.0 && self.abs.is_finite() && self.rel.is_finite()
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-9,
            rel: 1e-12,
        }
    }
}

impl From<f64> for Tolerance {
    fn from(abs: f64) -> Self {
        Tolerance::absolute(abs)
    }
}
