//! # vmfgeom
//!
//! Geometry on the space of non-degenerate von Mises-Fisher (vMF) laws.
//!
//! Two laws `vMF(mu1, k1)` and `vMF(mu2, k2)` on `S^{d-1}` are compared with the
//! Wasserstein-like distance
//!
//! ```text
//! WL^2 = arccos^2 <mu1, mu2> + (d - 1) (1/sqrt(k1) - 1/sqrt(k2))^2
//! ```
//!
//! a geodesic term for the mean directions plus a Bures-Wasserstein term between
//! the isotropic tangent covariances `I/k1` and `I/k2`. The distance is the
//! geodesic distance of the product manifold `S^{d-1} x R+` (with `R+` carried
//! by the coordinate `s = 1/sqrt(k)`), which gives closed-form interpolation and
//! barycenters with a closed-form concentration.
//!
//! ## Modules
//!
//! | module | contents |
//! |--------|----------|
//! | [`vmf`] | parameter and mixture types, log-density, samplers |
//! | [`geometry`] | sphere maps, the WL distance, interpolation, Monte-Carlo L2, distance matrices |
//! | [`barycenter`] | closed-form concentration and Riemannian Frechet mean |
//! | [`reduction`] | greedy and partitional mixture reduction |
//! | [`fit`] | EM fitting, concentration MLE, BIC |
//! | [`eval`] | KNN over distance rows, classical and SMACOF MDS, k-means purity |
//! | [`io`] | JSON/CSV file formats |
//! | [`experiment`] | the two simulated studies |

pub mod barycenter;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod fit;
pub mod geometry;
pub mod io;
pub mod reduction;
pub mod rng;
pub mod special;
#[cfg(test)]
mod testing;
pub mod vmf;

pub use barycenter::{barycenter, frechet_mean, optimal_kappa, BarycenterConfig, BarycenterResult, FrechetMeanResult};
pub use error::{Error, Result};
pub use geometry::{
    exp_map, geodesic_distance, l2_distance_mc, log_map, pairwise_matrix, wl_distance, wl_interpolate,
    DistanceMatrix, L2Config, Metric, TangentVector,
};
pub use vmf::{log_density, log_normalizing_constant, sample, sample_mixture, SampleSet, VmfMixture, VmfParams};
pub use eval::{knn_predict, kmeans, mds_embed, mds_smacof, purity, Embedding, SmacofConfig};
pub use experiment::Scenario;
pub use fit::{bic, fit_em, kappa_mle, FitConfig, FitResult};
pub use reduction::{reduce, ReductionMethod, ReductionTrace};
