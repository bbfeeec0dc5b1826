//! Maximum-likelihood fitting of vMF mixtures by EM, and BIC scoring.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::sphere::geodesic_distance;
use crate::rng;
use crate::special::mean_resultant_length;
use crate::vmf::{dot, log_normalizing_constant, log_sum_exp, norm, SampleSet, VmfMixture, VmfParams};

/// Lower bound applied to fitted concentrations; keeps laws non-degenerate
/// when a component's resultant length vanishes.
pub const KAPPA_FLOOR: f64 = 1e-8;

const NEWTON_STEPS: usize = 25;

/// Derivative of `A_d` at `kappa`: `1 - A^2 - (d - 1) A / kappa`.
fn mean_resultant_slope(d: usize, kappa: f64, a: f64) -> f64 {
    1.0 - a * a - (d as f64 - 1.0) * a / kappa
}

/// Concentration whose mean resultant length `A_d(kappa)` equals `r_bar`.
///
/// Starts from `r(d - r^2) / (1 - r^2)` and polishes with safeguarded Newton
/// steps on `A_d(kappa) = r_bar`.
pub fn kappa_mle(r_bar: f64, d: usize) -> Result<f64> {
    kappa_mle_capped(r_bar, d, f64::INFINITY)
}

/// [`kappa_mle`] clipped to `cap`; returns `cap` when `A_d(cap) <= r_bar`.
pub fn kappa_mle_capped(r_bar: f64, d: usize, cap: f64) -> Result<f64> {
    if !(r_bar > 0.0 && r_bar < 1.0) {
        return Err(Error::InvalidArgument(format!("mean resultant length {r_bar} outside (0, 1)")));
    }
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let df = d as f64;
    let mut kappa = r_bar * (df - r_bar * r_bar) / (1.0 - r_bar * r_bar);
    if kappa >= cap {
        if mean_resultant_length(d, cap) <= r_bar {
            return Ok(cap);
        }
        kappa = 0.5 * cap;
    }
    // A_d is increasing, so the root stays bracketed by (lo, hi)
    let (mut lo, mut hi) = (0.0_f64, cap);
    for _ in 0..NEWTON_STEPS {
        let a = mean_resultant_length(d, kappa);
        let f = a - r_bar;
        if f.abs() < 1e-12 * r_bar.max(1e-3) {
            break;
        }
        if f > 0.0 {
            hi = kappa;
        } else {
            lo = kappa;
        }
        let slope = mean_resultant_slope(d, kappa, a);
        let mut next = kappa - f / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * kappa };
        }
        if next == kappa {
            break;
        }
        kappa = next;
    }
    Ok(kappa.min(cap))
}

/// `-2 log L + (k (d + 1) - 1) log n`.
pub fn bic(log_likelihood: f64, k: usize, d: usize, n: usize) -> f64 {
    let params = (k * (d + 1)) as f64 - 1.0;
    -2.0 * log_likelihood + params * (n as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative change of the log-likelihood below which EM stops.
    pub tol: f64,
    pub seed: u64,
    pub kappa_cap: f64,
}

impl FitConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, restarts: 10, max_iters: 500, tol: 1e-8, seed, kappa_cap: 1e5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub mixture: VmfMixture,
    pub log_likelihood: f64,
    pub bic: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Components re-seeded after collapsing below one effective point.
    pub reseeds: usize,
    /// Restart that produced the returned fit.
    pub best_restart: usize,
    /// Log-likelihood after every E-step of the returned run.
    pub log_likelihood_trace: Vec<f64>,
}

struct EmState {
    mus: Vec<Vec<f64>>,
    kappas: Vec<f64>,
    weights: Vec<f64>,
}

struct RunOutcome {
    state: EmState,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
    reseeds: usize,
    trace: Vec<f64>,
}

/// Fits a `cfg.k`-component mixture, keeping the best of `cfg.restarts` EM runs.
pub fn fit_em(data: &SampleSet, cfg: &FitConfig) -> Result<FitResult> {
    let n = data.len();
    if n == 0 {
        return Err(Error::Empty("no observations to fit"));
    }
    if cfg.k == 0 || cfg.k >= n {
        return Err(Error::TargetOutOfRange { target: cfg.k, n });
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    if !(cfg.kappa_cap.is_finite() && cfg.kappa_cap > KAPPA_FLOOR) {
        return Err(Error::InvalidArgument(format!("kappa cap {} is not usable", cfg.kappa_cap)));
    }
    let mut best: Option<(usize, RunOutcome)> = None;
    for restart in 0..cfg.restarts {
        let seed = rng::derive_seed(cfg.seed, &[restart as u64]);
        let run = run_em(data, cfg, seed)?;
        let better = best.as_ref().map_or(true, |(_, b)| run.log_likelihood > b.log_likelihood);
        if better {
            best = Some((restart, run));
        }
    }
    let (best_restart, run) = best.expect("at least one restart");
    let components = run
        .state
        .mus
        .into_iter()
        .zip(run.state.kappas)
        .map(|(m, k)| VmfParams::from_direction(m, k))
        .collect::<Result<Vec<_>>>()?;
    let mixture = VmfMixture::from_unnormalized(components, run.state.weights)?;
    Ok(FitResult {
        bic: bic(run.log_likelihood, cfg.k, data.dim(), n),
        mixture,
        log_likelihood: run.log_likelihood,
        iterations: run.iterations,
        converged: run.converged,
        reseeds: run.reseeds,
        best_restart,
        log_likelihood_trace: run.trace,
    })
}

/// k-means++ style seeding with squared geodesic distances.
fn seed_centers(data: &SampleSet, k: usize, seed: u64) -> Vec<usize> {
    let mut r = rng::stream(seed, rng::TAG_EM_INIT);
    let n = data.len();
    let mut centers = vec![r.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| geodesic_distance(data.row(i), data.row(centers[0])).unwrap().powi(2))
        .collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let u = r.random::<f64>() * total;
            let mut acc = 0.0;
            nearest
                .iter()
                .position(|&v| {
                    acc += v;
                    u < acc
                })
                .unwrap_or(n - 1)
        } else {
            // every point coincides with a center already; fall back to any unused index
            (0..n).find(|i| !centers.contains(i)).unwrap_or(0)
        };
        centers.push(next);
        for (i, v) in nearest.iter_mut().enumerate() {
            let g = geodesic_distance(data.row(i), data.row(next)).unwrap().powi(2);
            *v = v.min(g);
        }
    }
    centers
}

/// M-step for one component from responsibilities `resp[i]`.
fn component_update(data: &SampleSet, resp: impl Iterator<Item = f64>, cap: f64) -> (f64, Vec<f64>, f64) {
    let d = data.dim();
    let mut sum = vec![0.0; d];
    let mut mass = 0.0;
    for (x, g) in data.rows().zip(resp) {
        mass += g;
        sum.iter_mut().zip(x).for_each(|(s, xi)| *s += g * xi);
    }
    let r = norm(&sum);
    let r_bar = if mass > 0.0 { r / mass } else { 0.0 };
    let kappa = if r_bar >= 1.0 {
        cap
    } else if r_bar <= 0.0 {
        KAPPA_FLOOR
    } else {
        kappa_mle_capped(r_bar, d, cap).expect("r_bar inside (0, 1)").max(KAPPA_FLOOR)
    };
    let mu = if r > 0.0 { sum.iter().map(|s| s / r).collect() } else { data.row(0).to_vec() };
    (mass, mu, kappa)
}

fn run_em(data: &SampleSet, cfg: &FitConfig, seed: u64) -> Result<RunOutcome> {
    let n = data.len();
    let k = cfg.k;
    let d = data.dim();

    // hard assignment to the seeded centers gives the first M-step
    let centers = seed_centers(data, k, seed);
    let mut resp = vec![0.0; n * k];
    for (i, x) in data.rows().enumerate() {
        let best = (0..k)
            .max_by(|&a, &b| dot(x, data.row(centers[a])).total_cmp(&dot(x, data.row(centers[b]))))
            .unwrap();
        resp[i * k + best] = 1.0;
    }
    let mut state = EmState { mus: vec![vec![0.0; d]; k], kappas: vec![1.0; k], weights: vec![0.0; k] };
    let mut reseeds = 0;
    m_step(data, &resp, k, cfg.kappa_cap, &mut state, &mut reseeds, Some(&centers));

    let mut trace = Vec::new();
    let mut previous = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut log_likelihood = f64::NEG_INFINITY;
    while iterations < cfg.max_iters {
        iterations += 1;
        log_likelihood = e_step(data, &state, &mut resp)?;
        trace.push(log_likelihood);
        if (log_likelihood - previous).abs() <= cfg.tol * log_likelihood.abs() {
            converged = true;
            break;
        }
        previous = log_likelihood;
        m_step(data, &resp, k, cfg.kappa_cap, &mut state, &mut reseeds, None);
    }
    if !converged {
        log_likelihood = e_step(data, &state, &mut resp)?;
        trace.push(log_likelihood);
    }
    Ok(RunOutcome { state, log_likelihood, iterations, converged, reseeds, trace })
}

/// Fills `resp` with posterior membership probabilities and returns the log-likelihood.
fn e_step(data: &SampleSet, state: &EmState, resp: &mut [f64]) -> Result<f64> {
    let k = state.mus.len();
    let d = data.dim();
    let log_c = state
        .kappas
        .iter()
        .map(|&kappa| log_normalizing_constant(d, kappa))
        .collect::<Result<Vec<_>>>()?;
    let log_w: Vec<f64> = state.weights.iter().map(|w| w.ln()).collect();
    let mut total = 0.0;
    for (x, row) in data.rows().zip(resp.chunks_mut(k)) {
        for j in 0..k {
            row[j] = log_w[j] + log_c[j] + state.kappas[j] * dot(&state.mus[j], x);
        }
        let lse = log_sum_exp(row);
        row.iter_mut().for_each(|v| *v = (*v - lse).exp());
        total += lse;
    }
    if !total.is_finite() {
        return Err(Error::Numerical("EM log-likelihood is not finite".into()));
    }
    Ok(total)
}

fn m_step(
    data: &SampleSet,
    resp: &[f64],
    k: usize,
    cap: f64,
    state: &mut EmState,
    reseeds: &mut usize,
    centers: Option<&[usize]>,
) {
    let n = data.len();
    for j in 0..k {
        let (mass, mu, kappa) = component_update(data, (0..n).map(|i| resp[i * k + j]), cap);
        if mass < 1.0 {
            // re-seed at the observation the current fit explains least confidently
            let point = match centers {
                Some(c) => c[j],
                None => (0..n)
                    .min_by(|&a, &b| {
                        let ma = resp[a * k..(a + 1) * k].iter().cloned().fold(0.0, f64::max);
                        let mb = resp[b * k..(b + 1) * k].iter().cloned().fold(0.0, f64::max);
                        ma.total_cmp(&mb)
                    })
                    .unwrap(),
            };
            if centers.is_none() {
                *reseeds += 1;
            }
            let others: Vec<f64> = (0..k).filter(|&i| i != j).map(|i| state.kappas[i]).collect();
            state.mus[j] = data.row(point).to_vec();
            state.kappas[j] = if others.is_empty() { 1.0 } else { others.iter().sum::<f64>() / others.len() as f64 };
            state.weights[j] = 1.0 / n as f64;
        } else {
            state.mus[j] = mu;
            state.kappas[j] = kappa;
            state.weights[j] = mass / n as f64;
        }
    }
    let total: f64 = state.weights.iter().sum();
    state.weights.iter_mut().for_each(|w| *w /= total);
}
