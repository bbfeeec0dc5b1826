//! Distances between vMF laws: the Wasserstein-like distance, its geodesics,
//! and a Monte-Carlo `L2` distance between densities for comparison.

use crate::error::{Error, Result};
use crate::geometry::sphere::{exp_map, geodesic_distance, log_map};
use crate::rng;
use crate::special::log_sphere_area;
use crate::vmf::{dot, uniform_on_sphere, VmfParams};

fn same_dim(p: &VmfParams, q: &VmfParams) -> Result<()> {
    if p.dim() == q.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: p.dim(), found: q.dim() })
    }
}

/// `sqrt(d_geo(mu1, mu2)^2 + (d - 1) (1/sqrt(k1) - 1/sqrt(k2))^2)`.
pub fn wl_distance(p: &VmfParams, q: &VmfParams) -> Result<f64> {
    same_dim(p, q)?;
    let angle = geodesic_distance(p.mu(), q.mu())?;
    let ds = p.spread() - q.spread();
    Ok((angle * angle + (p.dim() - 1) as f64 * ds * ds).sqrt())
}

/// Squared concentration part of the WL distance, `(d - 1) (1/sqrt(k1) - 1/sqrt(k2))^2`.
pub fn variance_transport(p: &VmfParams, q: &VmfParams) -> Result<f64> {
    same_dim(p, q)?;
    let ds = p.spread() - q.spread();
    Ok((p.dim() - 1) as f64 * ds * ds)
}

/// Point at time `t` on the WL geodesic from `p` to `q`.
///
/// The mean direction follows the great circle and `1/sqrt(kappa)` moves
/// linearly, so the path has constant WL speed.
pub fn wl_interpolate(p: &VmfParams, q: &VmfParams, t: f64) -> Result<VmfParams> {
    same_dim(p, q)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("interpolation time {t} outside [0, 1]")));
    }
    let log = log_map(p.mu(), q.mu())?;
    if t == 0.0 {
        return Ok(p.clone());
    }
    if t == 1.0 {
        return Ok(q.clone());
    }
    let mu = exp_map(&log.scaled(t));
    let s = (1.0 - t) * p.spread() + t * q.spread();
    VmfParams::from_direction(mu, 1.0 / (s * s))
}

/// Sampling schedule for the Monte-Carlo `L2` distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Config {
    /// Stop once doubling the sample moves the estimate by less than this, relatively.
    pub rel_tol: f64,
    /// Size of the first batch; each later batch doubles the total.
    pub initial_draws: usize,
    /// Hard cap on the total number of sphere points.
    pub max_draws: usize,
}

impl Default for L2Config {
    fn default() -> Self {
        Self { rel_tol: 1e-6, initial_draws: 1 << 10, max_draws: 1 << 22 }
    }
}

impl L2Config {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

/// Outcome of a Monte-Carlo `L2` estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Estimate {
    pub value: f64,
    pub draws: usize,
    /// False when `max_draws` was reached before the relative-change test passed.
    pub converged: bool,
}

/// Monte-Carlo estimate of `(int_{S^{d-1}} (f_p - f_q)^2)^{1/2}` from uniform
/// sphere points, doubling the sample until the relative change drops below
/// `rel_tol`.
pub fn l2_distance_mc(p: &VmfParams, q: &VmfParams, seed: u64, rel_tol: f64) -> Result<f64> {
    Ok(l2_estimate(p, q, seed, &L2Config::with_rel_tol(rel_tol))?.value)
}

pub fn l2_estimate(p: &VmfParams, q: &VmfParams, seed: u64, cfg: &L2Config) -> Result<L2Estimate> {
    same_dim(p, q)?;
    l2_estimate_cached(p, p.log_normalizer(), q, q.log_normalizer(), seed, cfg)
}

pub(crate) fn l2_estimate_cached(
    p: &VmfParams,
    log_cp: f64,
    q: &VmfParams,
    log_cq: f64,
    seed: u64,
    cfg: &L2Config,
) -> Result<L2Estimate> {
    if !(cfg.rel_tol > 0.0) || cfg.initial_draws == 0 || cfg.max_draws < cfg.initial_draws {
        return Err(Error::InvalidArgument(format!("invalid L2 schedule {cfg:?}")));
    }
    let d = p.dim();
    let log_area = log_sphere_area(d);
    let mut rng = rng::stream(seed, rng::TAG_SPHERE_MC);
    let mut x = vec![0.0; d];
    let mut sum_sq = 0.0;
    let mut draws = 0usize;
    let mut batch = cfg.initial_draws;
    let mut previous: Option<f64> = None;
    loop {
        for _ in 0..batch {
            uniform_on_sphere(d, &mut rng, &mut x);
            let fp = (log_cp + p.kappa() * dot(p.mu(), &x)).exp();
            let fq = (log_cq + q.kappa() * dot(q.mu(), &x)).exp();
            let diff = fp - fq;
            sum_sq += diff * diff;
        }
        draws += batch;
        let value = (log_area.exp() * sum_sq / draws as f64).sqrt();
        if !value.is_finite() {
            return Err(Error::Numerical("non-finite density in L2 estimate".into()));
        }
        if let Some(prev) = previous {
            let change = (value - prev).abs();
            if change <= cfg.rel_tol * value || value == 0.0 {
                return Ok(L2Estimate { value, draws, converged: true });
            }
        }
        if draws >= cfg.max_draws {
            return Ok(L2Estimate { value, draws, converged: false });
        }
        previous = Some(value);
        batch = draws.min(cfg.max_draws - draws);
    }
}
