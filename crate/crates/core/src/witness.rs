use crate::grid::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scope {
    Global,
    /// Quantified over the open ball of this radius.
    Local(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verification {
    Unverified,
    VerifiedOnGrid,
    /// The inequality fails at `node` by `amount` beyond tolerance.
    Refuted {
        node: usize,
        amount: f64,
    },
}

/// A candidate `(a, v)` at a base node, with slack `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientWitness {
    pub node: usize,
    pub point: Point,
    pub dim: usize,
    pub a: f64,
    pub v: Point,
    pub eps: f64,
    pub scope: Scope,
    pub status: Verification,
    /// Node with the largest `rhs − lhs`, even when within tolerance.
    pub worst_node: Option<usize>,
    pub worst_amount: f64,
}

impl SubgradientWitness {
    pub fn is_verified(&self) -> bool {
        self.status == Verification::VerifiedOnGrid
    }

    pub fn v_slice(&self) -> &[f64] {
        &self.v[..self.dim]
    }
}
