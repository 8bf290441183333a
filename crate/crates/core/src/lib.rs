//! Geometry of the left-invariant sub-Riemannian metric on SO(3) whose
//! horizontal plane at the identity is spanned by the generators `a`, `b`
//! and which is right-invariant under the subgroup SO(2) = exp(ℝc).
//!
//! The crate covers exact geodesics from the identity, their projections to
//! the unit sphere, cut times and the cut locus, the diameter, and the
//! sub-Riemannian logarithm/distance. Every headline formula has an
//! independent numerical route next to it (matrix products, RK4, spherical
//! polygon areas, parallel transport, a brute-force control search) so the
//! results can be cross-checked.

pub mod cut;
pub mod distance;
mod error;
pub mod geodesic;
pub mod lie;
pub mod sphere;
pub mod verify;

pub use cut::{cut_endpoint, cut_symmetry_partner, cut_time, diameter, Branch, CutPoint};
pub use distance::{brute_force_distance, distance, sr_log, DistanceResult, Multiplicity};
pub use error::{Error, Result};
pub use geodesic::{geodesic, geodesic_closed_form, GeodesicParam};
pub use lie::{LieVector, Rotation};
pub use sphere::{DigonGeometry, S2Point};

/// 1/√3, the |β| at which the cut time peaks.
pub const CRITICAL_BETA: f64 = 0.577_350_269_189_625_8;
