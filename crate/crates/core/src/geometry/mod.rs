//! Sphere primitives, the Wasserstein-like distance and its geodesics, the
//! Monte-Carlo `L2` distance, and pairwise distance matrices.

pub mod distance;
pub mod matrix;
pub mod sphere;

pub use distance::{l2_distance_mc, l2_estimate, variance_transport, wl_distance, wl_interpolate, L2Config, L2Estimate};
pub use matrix::{pairwise_matrix, DistanceMatrix, Metric};
pub use sphere::{exp_map, geodesic_distance, log_map, project, TangentVector};
