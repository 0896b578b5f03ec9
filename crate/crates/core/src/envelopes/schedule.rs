use crate::grid::GridFunction;
use crate::{Error, Result};

/// Candidate curvatures `0 = a₀ < a₁ < … < a_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSchedule(Vec<f64>);

impl CurvatureSchedule {
    /// Accepts a strictly increasing list of finite values starting at 0.
    /// The single-element schedule `{0}` is allowed.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.first() != Some(&0.0) {
            return Err(Error::InvalidArgument(
                "curvature schedule must start at 0".into(),
            ));
        }
        if values.iter().any(|a| !a.is_finite()) || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "curvature schedule must be finite and strictly increasing".into(),
            ));
        }
        Ok(CurvatureSchedule(values))
    }

    /// `{0, ½, 1, 2, …, 2^k}` with `2^k` the first power of two `≥ max`.
    pub fn up_to(max: f64) -> Self {
        let mut v = vec![0.0, 0.5];
        let mut a = 1.0;
        loop {
            v.push(a);
            if a >= max || a >= 2f64.powi(60) {
                break;
            }
            a *= 2.0;
        }
        CurvatureSchedule(v)
    }

    /// Geometric schedule whose top exceeds the largest discrete second
    /// difference of `f`.
    pub fn default_for(f: &GridFunction) -> Self {
        let m = f.max_second_difference();
        let mut s = CurvatureSchedule::up_to(m.max(1.0));
        if *s.0.last().unwrap() <= m {
            let top = s.0.last().unwrap() * 2.0;
            s.0.push(top);
        }
        s
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        *self.0.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Union with another schedule.
    pub fn merged(&self, other: &CurvatureSchedule) -> CurvatureSchedule {
        let mut v: Vec<f64> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        CurvatureSchedule(v)
    }
}
