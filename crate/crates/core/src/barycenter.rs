//! Weighted barycenters of vMF laws under the WL distance.
//!
//! The objective `F(mu, k) = sum_i w_i WL^2((mu, k), (mu_i, k_i))` splits into a
//! spherical Frechet-mean problem in `mu` and a one-dimensional least-squares
//! problem in `1/sqrt(k)`. The second has the closed form
//! `k = (sum_i w_i / sqrt(k_i))^{-2}`; the first is solved by fixed-step
//! Riemannian gradient descent started from the normalized extrinsic mean.

use std::f64::consts::FRAC_PI_2;

use log::warn;

use crate::error::{Error, Result};
use crate::geometry::sphere::{exp_map, geodesic_distance, log_map, TangentVector};
use crate::vmf::{norm, VmfParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycenterConfig {
    /// Fixed step size of the gradient iteration.
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop when the ambient `l2` change between iterates falls below this.
    pub tol: f64,
}

impl Default for BarycenterConfig {
    fn default() -> Self {
        Self { step_size: 0.25, max_iters: 1000, tol: 1e-9 }
    }
}

impl BarycenterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::InvalidArgument(format!("step size {} must be positive", self.step_size)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }
}

/// Spherical Frechet mean with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FrechetMeanResult {
    pub mean: Vec<f64>,
    pub iterations: usize,
    pub final_change: f64,
    pub converged: bool,
    /// `|sum_i w_i Log_mean(mu_i)|` at the returned point.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterResult {
    pub params: VmfParams,
    pub iterations: usize,
    pub final_change: f64,
    pub converged: bool,
    pub gradient_norm: f64,
}

/// Checks lengths and non-negativity, and returns the weights scaled to sum to one.
fn simplex_weights(n: usize, weights: &[f64]) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Empty("no inputs to average"));
    }
    if weights.len() != n {
        return Err(Error::InvalidWeights(format!("{n} inputs but {} weights", weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative or not finite")));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidWeights("weights sum to zero".into()));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// `(sum_i w_i / sqrt(k_i))^{-2}`.
pub fn optimal_kappa(kappas: &[f64], weights: &[f64]) -> Result<f64> {
    let w = simplex_weights(kappas.len(), weights)?;
    if let Some(k) = kappas.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
        return Err(Error::InvalidKappa(*k));
    }
    let s: f64 = kappas.iter().zip(&w).map(|(k, wi)| wi / k.sqrt()).sum();
    Ok(1.0 / (s * s))
}

/// `sum_i w_i Log_x(mu_i)`, the negative half Riemannian gradient of
/// `G(x) = sum_i w_i d_geo^2(x, mu_i)`.
fn weighted_log_sum<M: AsRef<[f64]>>(x: &[f64], mus: &[M], w: &[f64]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    for (i, (m, wi)) in mus.iter().zip(w).enumerate() {
        if *wi == 0.0 {
            continue;
        }
        let v = log_map(x, m.as_ref()).map_err(|e| match e {
            Error::Antipodal(_) => Error::Antipodal(format!(" (input {i} is antipodal to the current mean)")),
            other => other,
        })?;
        g.iter_mut().zip(v.vec()).for_each(|(a, b)| *a += wi * b);
    }
    Ok(g)
}

/// Weighted Frechet mean of unit vectors by Riemannian gradient descent.
///
/// Non-convergence within `max_iters` is reported through `converged`, not as
/// an error. Inputs outside the open `pi/2` ball around the initializer only
/// produce a warning.
pub fn frechet_mean<M: AsRef<[f64]>>(
    mus: &[M],
    weights: &[f64],
    cfg: &BarycenterConfig,
) -> Result<FrechetMeanResult> {
    cfg.validate()?;
    let w = simplex_weights(mus.len(), weights)?;
    let d = mus[0].as_ref().len();
    for m in mus {
        let m = m.as_ref();
        if m.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.len() });
        }
        let r = norm(m);
        if (r - 1.0).abs() > crate::vmf::NORM_TOLERANCE {
            return Err(Error::NotUnitNorm(r));
        }
    }

    let mut mean = vec![0.0; d];
    for (m, wi) in mus.iter().zip(&w) {
        mean.iter_mut().zip(m.as_ref()).for_each(|(a, b)| *a += wi * b);
    }
    let r = norm(&mean);
    if r <= 1e-12 {
        return Err(Error::ZeroExtrinsicMean);
    }
    mean.iter_mut().for_each(|a| *a /= r);

    let outside = mus
        .iter()
        .zip(&w)
        .filter(|(m, wi)| **wi > 0.0 && geodesic_distance(&mean, m.as_ref()).map_or(true, |g| g >= FRAC_PI_2))
        .count();
    if outside > 0 {
        warn!("{outside} direction(s) lie outside the pi/2 ball around the extrinsic mean; the Frechet mean may not be unique");
    }

    let mut iterations = 0;
    let mut final_change = f64::INFINITY;
    let mut converged = false;
    while iterations < cfg.max_iters {
        iterations += 1;
        let g = weighted_log_sum(&mean, mus, &w)?;
        let step: Vec<f64> = g.iter().map(|v| 2.0 * cfg.step_size * v).collect();
        let next = exp_map(&TangentVector::new(mean.clone(), step)?);
        final_change = norm(&next.iter().zip(&mean).map(|(a, b)| a - b).collect::<Vec<_>>());
        mean = next;
        if final_change < cfg.tol {
            converged = true;
            break;
        }
    }
    let gradient_norm = norm(&weighted_log_sum(&mean, mus, &w)?);
    Ok(FrechetMeanResult { mean, iterations, final_change, converged, gradient_norm })
}

/// WL barycenter: Frechet mean of the directions with the closed-form concentration.
pub fn barycenter(components: &[VmfParams], weights: &[f64], cfg: &BarycenterConfig) -> Result<BarycenterResult> {
    if components.is_empty() {
        return Err(Error::Empty("no components to average"));
    }
    let kappas: Vec<f64> = components.iter().map(VmfParams::kappa).collect();
    let kappa = optimal_kappa(&kappas, weights)?;
    let mus: Vec<&[f64]> = components.iter().map(VmfParams::mu).collect();
    let fm = frechet_mean(&mus, weights, cfg)?;
    Ok(BarycenterResult {
        params: VmfParams::from_direction(fm.mean, kappa)?,
        iterations: fm.iterations,
        final_change: fm.final_change,
        converged: fm.converged,
        gradient_norm: fm.gradient_norm,
    })
}
