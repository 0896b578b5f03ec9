//! Convex hulls, the curvature-sweep hull and Moreau envelopes.

mod hull;
mod moreau;
mod schedule;

pub use hull::{
    convex_hull_grid, hull_gap, is_discretely_convex, is_phi_convex, phi_hull, tol_grid,
};
pub use moreau::moreau_envelope;
pub use schedule::CurvatureSchedule;
