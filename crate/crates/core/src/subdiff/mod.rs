//! ε-subgradients with quadratic curvature, their local and proximal forms,
//! and difference-quotient estimates of Dini and Clarke derivatives.

mod dini;
mod eps;
mod globalize;
mod prox;
mod regular;
mod smooth;

pub use dini::{
    clarke_derivative, dini_derivative, dini_interval_1d, DerivativeEstimate, DiniInterval,
    DiniSchedule,
};
pub use eps::{
    check_eps_subgradient, check_local_subgradient, find_eps_subgradient, find_local_subgradient,
};
pub use globalize::{center_minorant, globalize, globalizing_curvature, GlobalMinorantBound};
pub use prox::{
    check_proximal, phi_to_proximal, proximal_to_phi, ProximalCheck, ProximalWitness, Radius,
};
pub use regular::{check_prox_regular, ProxRegularReport, ProxRegularViolation};
pub use smooth::{c2_local_subgradient, smooth_local_subgradient};

pub(crate) use eps::verify;
