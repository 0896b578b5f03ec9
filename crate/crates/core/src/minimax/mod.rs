//! Strict sublevel geometry of quadratic minorants, the intersection
//! property, the zero-subgradient condition and minimax certificates for
//! saddle functions sampled on grids.

mod region;
mod saddle;
mod zs;

pub use region::{intersection_property, sublevel_region, IntersectionResult, Region};
pub use saddle::{
    ip_search, minimax_certificate, saddle_values, CertificateMode, Hit, Hypothesis,
    HypothesisCheck, IpHit, LevelOutcome, MinimaxCertificate, SaddleGrid, SaddleValues, SearchSpec,
    Verdict,
};
pub use zs::{ip_to_zs, zs_check, zs_to_ip, ZsInstance, ZsOutcome};
