//! von Mises-Fisher laws, finite mixtures of them, densities and samplers.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{self, VmfRng};
use crate::special::log_bessel_i;

/// Largest tolerated deviation from unit norm (or unit weight sum) before a
/// constructor refuses to renormalize.
pub const NORM_TOLERANCE: f64 = 1e-6;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Norms this close to 1 are left alone so that normalization is idempotent.
const UNIT_SLACK: f64 = 4.0 * f64::EPSILON;

fn rescale(v: &mut [f64], n: f64) {
    if (n - 1.0).abs() > UNIT_SLACK {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidKappa(kappa))
    }
}

/// A single vMF law: unit mean direction and positive concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfParams {
    mu: Vec<f64>,
    kappa: f64,
}

impl VmfParams {
    /// Builds a law from a direction that is unit-norm up to round-off.
    ///
    /// `mu` is renormalized when its norm is within [`NORM_TOLERANCE`] of 1 and
    /// rejected otherwise. Use [`VmfParams::from_direction`] for arbitrary
    /// non-zero directions.
    pub fn new(mu: Vec<f64>, kappa: f64) -> Result<Self> {
        let n = norm(&mu);
        if !n.is_finite() {
            return Err(Error::NotUnitNorm(n));
        }
        if (n - 1.0).abs() > NORM_TOLERANCE {
            if n == 0.0 {
                return Err(Error::ZeroVector);
            }
            return Err(Error::NotUnitNorm(n));
        }
        Self::from_direction(mu, kappa)
    }

    /// Builds a law from any non-zero direction, scaling it onto the sphere.
    pub fn from_direction(mut mu: Vec<f64>, kappa: f64) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::InvalidDimension(mu.len()));
        }
        check_kappa(kappa)?;
        let n = norm(&mu);
        if !n.is_finite() {
            return Err(Error::NotUnitNorm(n));
        }
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        rescale(&mut mu, n);
        Ok(Self { mu, kappa })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// `1 / sqrt(kappa)`, the coordinate in which concentration geodesics are linear.
    pub fn spread(&self) -> f64 {
        1.0 / self.kappa.sqrt()
    }

    pub fn log_normalizer(&self) -> f64 {
        // validity of (d, kappa) is a type invariant
        log_normalizing_constant(self.dim(), self.kappa).expect("valid vMF parameters")
    }
}

/// A finite mixture of vMF laws with weights on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfMixture {
    components: Vec<VmfParams>,
    weights: Vec<f64>,
}

impl VmfMixture {
    /// Weights must be positive and sum to 1 within [`NORM_TOLERANCE`]; they are
    /// renormalized exactly.
    pub fn new(components: Vec<VmfParams>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        Self::from_unnormalized(components, weights)
    }

    /// Accepts any positive weights and scales them onto the simplex.
    pub fn from_unnormalized(components: Vec<VmfParams>, mut weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("mixture has no components"));
        }
        if components.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        let d = components[0].dim();
        if let Some(bad) = components.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {w} is not strictly positive")));
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { components, weights })
    }

    pub fn single(p: VmfParams) -> Self {
        Self { components: vec![p], weights: vec![1.0] }
    }

    pub fn components(&self) -> &[VmfParams] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    /// Total log-likelihood of the rows of `data`.
    pub fn log_likelihood(&self, data: &SampleSet) -> Result<f64> {
        if data.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: data.dim() });
        }
        let log_c: Vec<f64> = self.components.iter().map(VmfParams::log_normalizer).collect();
        let log_w: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();
        let mut buf = vec![0.0; self.len()];
        let mut total = 0.0;
        for x in data.rows() {
            for (k, c) in self.components.iter().enumerate() {
                buf[k] = log_w[k] + log_c[k] + c.kappa * dot(&c.mu, x);
            }
            total += log_sum_exp(&buf);
        }
        Ok(total)
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `n` points on `S^{d-1}`, stored row-major, with optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    points: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl SampleSet {
    /// Rows must be unit-norm within [`NORM_TOLERANCE`]; they are renormalized.
    pub fn new(dim: usize, mut points: Vec<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if points.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form rows of length {dim}",
                points.len()
            )));
        }
        let n = points.len() / dim;
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidArgument(format!("{} labels for {n} rows", l.len())));
            }
        }
        for row in points.chunks_mut(dim) {
            let r = norm(row);
            if !r.is_finite() || (r - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::NotUnitNorm(r));
            }
            rescale(row, r);
        }
        Ok(Self { dim, points, labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.dim)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Sum of the rows divided by `n`.
    pub fn mean_vector(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for row in self.rows() {
            m.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }
}

/// `log C_d(kappa) = (d/2 - 1) log kappa - (d/2) log(2 pi) - log I_{d/2-1}(kappa)`.
pub fn log_normalizing_constant(d: usize, kappa: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    check_kappa(kappa)?;
    let nu = 0.5 * d as f64 - 1.0;
    let value = nu * kappa.ln() - 0.5 * d as f64 * std::f64::consts::TAU.ln() - log_bessel_i(nu, kappa);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Numerical(format!("log C_{d}({kappa}) is not finite")))
    }
}

/// `log C_d(kappa) + kappa <mu, x>` for a unit vector `x`.
pub fn log_density(p: &VmfParams, x: &[f64]) -> Result<f64> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x.len() });
    }
    let r = norm(x);
    if (r - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotUnitNorm(r));
    }
    Ok(p.log_normalizer() + p.kappa * dot(&p.mu, x))
}

/// A point drawn uniformly on `S^{d-1}` (normalized isotropic Gaussian).
pub(crate) fn uniform_on_sphere(d: usize, rng: &mut VmfRng, out: &mut [f64]) {
    loop {
        for v in out.iter_mut().take(d) {
            *v = rng.sample(StandardNormal);
        }
        let r = norm(out);
        if r > 1e-300 {
            out.iter_mut().for_each(|v| *v /= r);
            return;
        }
    }
}

/// Wood's rejection sampler for the cosine `w = <mu, x>` of a vMF draw.
struct CosineSampler {
    kappa: f64,
    dm1: f64,
    b: f64,
    x0: f64,
    c: f64,
    beta: Beta<f64>,
}

impl CosineSampler {
    fn new(d: usize, kappa: f64) -> Self {
        let dm1 = (d - 1) as f64;
        // b = (-2k + sqrt(4k^2 + (d-1)^2)) / (d-1), rationalized against cancellation
        let b = dm1 / (2.0 * kappa + (4.0 * kappa * kappa + dm1 * dm1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + dm1 * (1.0 - x0 * x0).ln();
        let beta = Beta::new(0.5 * dm1, 0.5 * dm1).expect("positive shape parameters");
        Self { kappa, dm1, b, x0, c, beta }
    }

    fn draw(&self, rng: &mut VmfRng) -> f64 {
        loop {
            let z: f64 = self.beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = rng.random();
            if self.kappa * w + self.dm1 * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                return w;
            }
        }
    }
}

/// Per-law sampling state: cosine sampler plus the Householder vector taking
/// the last basis vector `e_d` to `mu`.
struct LawSampler<'a> {
    mu: &'a [f64],
    cosine: CosineSampler,
    householder: Option<Vec<f64>>,
}

impl<'a> LawSampler<'a> {
    fn new(p: &'a VmfParams) -> Self {
        let d = p.dim();
        let mut u: Vec<f64> = p.mu.iter().map(|m| -m).collect();
        u[d - 1] += 1.0;
        let un = norm(&u);
        let householder = if un < 1e-12 {
            None
        } else {
            u.iter_mut().for_each(|v| *v /= un);
            Some(u)
        };
        Self { mu: &p.mu, cosine: CosineSampler::new(d, p.kappa), householder }
    }

    fn draw_into(&self, rng: &mut VmfRng, tangent: &mut [f64], out: &mut [f64]) {
        let d = self.mu.len();
        let w = self.cosine.draw(rng);
        uniform_on_sphere(d - 1, rng, tangent);
        let s = (1.0 - w * w).max(0.0).sqrt();
        out[..d - 1].iter_mut().zip(tangent.iter()).for_each(|(o, t)| *o = s * t);
        out[d - 1] = w;
        if let Some(u) = &self.householder {
            let proj = 2.0 * dot(u, out);
            out.iter_mut().zip(u).for_each(|(o, ui)| *o -= proj * ui);
        }
        let r = norm(out);
        out.iter_mut().for_each(|v| *v /= r);
    }
}

/// `n` independent draws from `vMF(mu, kappa)`, reproducible from `seed`.
pub fn sample(p: &VmfParams, n: usize, seed: u64) -> SampleSet {
    let mut rng = rng::stream(seed, rng::TAG_DRAW);
    let d = p.dim();
    let sampler = LawSampler::new(p);
    let mut points = vec![0.0; n * d];
    let mut tangent = vec![0.0; d - 1];
    for row in points.chunks_mut(d) {
        sampler.draw_into(&mut rng, &mut tangent, row);
    }
    SampleSet { dim: d, points, labels: None }
}

/// `n` draws from a mixture; labels record the component of each draw.
///
/// Component labels come from their own stream, and draws are taken in order
/// from the same stream [`sample`] uses, so a one-component mixture reproduces
/// [`sample`] exactly.
pub fn sample_mixture(m: &VmfMixture, n: usize, seed: u64) -> SampleSet {
    let mut select = rng::stream(seed, rng::TAG_SELECT);
    let mut cumulative = Vec::with_capacity(m.len());
    let mut acc = 0.0;
    for w in &m.weights {
        acc += w;
        cumulative.push(acc);
    }
    let labels: Vec<usize> = (0..n)
        .map(|_| {
            if m.len() == 1 {
                return 0;
            }
            let u: f64 = select.random::<f64>() * acc;
            cumulative.iter().position(|&c| u < c).unwrap_or(m.len() - 1)
        })
        .collect();

    let mut rng = rng::stream(seed, rng::TAG_DRAW);
    let d = m.dim();
    let samplers: Vec<LawSampler> = m.components.iter().map(LawSampler::new).collect();
    let mut points = vec![0.0; n * d];
    let mut tangent = vec![0.0; d - 1];
    for (row, &k) in points.chunks_mut(d).zip(&labels) {
        samplers[k].draw_into(&mut rng, &mut tangent, row);
    }
    SampleSet { dim: d, points, labels: Some(labels) }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use super::*;
    use crate::special::mean_resultant_length;
    use std::f64::consts::PI;

    fn law(mu: &[f64], kappa: f64) -> VmfParams {
        VmfParams::from_direction(mu.to_vec(), kappa).unwrap()
    }

    #[test]
    fn constructor_contract() {
        assert!(matches!(VmfParams::new(vec![0.0, 0.0], 1.0), Err(Error::ZeroVector)));
        assert!(matches!(VmfParams::new(vec![1.0, 0.0], 0.0), Err(Error::InvalidKappa(_))));
        assert!(matches!(VmfParams::new(vec![1.0, 0.0], f64::INFINITY), Err(Error::InvalidKappa(_))));
        assert!(matches!(VmfParams::new(vec![1.0, 0.0], -2.0), Err(Error::InvalidKappa(_))));
        assert!(matches!(VmfParams::new(vec![2.0, 0.0], 1.0), Err(Error::NotUnitNorm(_))));
        assert!(matches!(VmfParams::new(vec![1.0], 1.0), Err(Error::InvalidDimension(1))));
        let p = VmfParams::new(vec![0.6, 0.8 + 5e-7], 1.0).unwrap();
        assert!((norm(p.mu()) - 1.0).abs() < 1e-15);
        let q = VmfParams::from_direction(vec![3.0, 4.0], 1.0).unwrap();
        assert!((q.mu()[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn mixture_contract() {
        let a = law(&[1.0, 0.0], 1.0);
        let b = law(&[1.0, 0.0, 0.0], 1.0);
        assert!(matches!(
            VmfMixture::new(vec![a.clone(), b], vec![0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(VmfMixture::new(vec![a.clone(), a.clone()], vec![0.5, 0.6]).is_err());
        assert!(VmfMixture::new(vec![a.clone(), a.clone()], vec![1.0, 0.0]).is_err());
        let m = VmfMixture::from_unnormalized(vec![a.clone(), a], vec![1.0, 3.0]).unwrap();
        assert_eq!(m.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn normalizer_closed_forms() {
        // C_3(k) = k / (4 pi sinh k); log value from 50-digit evaluation
        let got = log_normalizing_constant(3, 2.0).unwrap();
        assert!((got - -3.126244439023513613614506).abs() < 1e-10 * 3.13);
        let exact = (2.0 / (4.0 * PI * 2.0_f64.sinh())).ln();
        assert!(((got - exact) / exact).abs() < 1e-12);
        // d = 10, kappa = 50 against mpmath besseli(4, 50)
        let got = log_normalizing_constant(10, 50.0).unwrap();
        assert!(((got - -40.50732355537736964050481) / 40.507).abs() < 1e-10);
        // circle, kappa -> 0: uniform density 1 / (2 pi)
        let got = log_normalizing_constant(2, 1e-12).unwrap();
        assert!((got + (2.0 * PI).ln()).abs() < 1e-12);
        assert!(log_normalizing_constant(1, 1.0).is_err());
        assert!(log_normalizing_constant(3, 0.0).is_err());
        assert!(log_normalizing_constant(3, f64::NAN).is_err());
    }

    #[test]
    fn normalizer_is_finite_across_the_grid() {
        for d in [2usize, 3, 10, 100, 768] {
            let mut prev = f64::INFINITY;
            let mut k = 1e-6;
            while k <= 1e6 {
                let v = log_normalizing_constant(d, k).unwrap();
                assert!(v.is_finite() && v.exp() >= 0.0, "d={d} k={k}");
                // d/dk log C_d(k) = -A_d(k) < 0; below ~1e-3 the decrease is under one ulp
                assert!(v <= prev, "d={d} k={k}");
                if k > 1e-3 {
                    assert!(v < prev, "d={d} k={k}");
                }
                prev = v;
                k *= 3.7;
            }
        }
        assert!(log_normalizing_constant(768, 1e4).unwrap().is_finite());
    }

    #[test]
    fn log_density_examples() {
        let p = law(&[1.0, 0.0], 1.0);
        let got = log_density(&p, &[1.0, 0.0]).unwrap();
        assert!((got - (log_normalizing_constant(2, 1.0).unwrap() + 1.0)).abs() < 1e-15);
        assert!((got - (-2.073791424916524132250074 + 1.0)).abs() < 1e-12);

        let p = law(&[1.0, 0.0, 0.0], 2.0);
        let got = log_density(&p, &[-1.0, 0.0, 0.0]).unwrap();
        assert!((got - (-3.126244439023513613614506 - 2.0)).abs() < 1e-10);

        let p = law(&[0.0, 0.6, 0.8], 7.0);
        let got = log_density(&p, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(got, p.log_normalizer());

        assert!(matches!(log_density(&p, &[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(log_density(&p, &[1.0, 0.1, 0.0]), Err(Error::NotUnitNorm(_))));
    }

    #[test]
    fn circle_density_integrates_to_one() {
        let steps = 20_000;
        for kappa in [0.5, 1.0, 10.0, 100.0] {
            let p = law(&[0.3, -0.7], kappa);
            let h = 2.0 * PI / steps as f64;
            // periodic integrand: the trapezoid rule is the plain Riemann sum
            let total: f64 = (0..steps)
                .map(|i| {
                    let t = i as f64 * h;
                    log_density(&p, &[t.cos(), t.sin()]).unwrap().exp()
                })
                .sum::<f64>()
                * h;
            assert!((total - 1.0).abs() < 1e-6, "kappa={kappa}: {total}");
        }
    }

    #[test]
    fn sampler_is_deterministic_and_unit_norm() {
        let p = law(&[0.2, -0.4, 0.9, 0.1], 3.0);
        let a = sample(&p, 500, 42);
        let b = sample(&p, 500, 42);
        assert_eq!(a, b);
        assert_ne!(a, sample(&p, 500, 43));
        for row in a.rows() {
            assert!((norm(row) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_moments_d3() {
        let p = law(&[0.0, 0.0, 1.0], 5.0);
        let s = sample(&p, 100_000, 7);
        let rbar = norm(&s.mean_vector());
        assert!((rbar - 0.80009080398201937554).abs() < 0.01, "rbar={rbar}");
    }

    #[test]
    fn sampler_consistency_grid() {
        for d in [2usize, 3, 10] {
            let mut mu = vec![0.0; d];
            mu[0] = 1.0;
            mu[d - 1] = -2.0;
            for kappa in [1.0, 10.0] {
                let p = law(&mu, kappa);
                let s = sample(&p, 100_000, 11 + d as u64);
                let m = s.mean_vector();
                let rbar = norm(&m);
                assert!((rbar - mean_resultant_length(d, kappa)).abs() < 0.01, "d={d} k={kappa}");
                if kappa == 10.0 {
                    assert!(dot(&m, p.mu()) / rbar > 0.999, "d={d}");
                }
            }
        }
    }

    #[test]
    fn near_uniform_sampler_has_zero_mean() {
        let p = law(&[0.0, 1.0, 0.0], 1e-4);
        let s = sample(&p, 100_000, 3);
        assert!(norm(&s.mean_vector()) < 0.02);
    }

    #[test]
    fn high_concentration_sampler() {
        let p = law(&[1.0; 768], 1e4);
        let s = sample(&p, 200, 5);
        let m = s.mean_vector();
        let rbar = norm(&m);
        assert!((rbar - mean_resultant_length(768, 1e4)).abs() < 0.01);
    }

    #[test]
    fn mixture_sampler() {
        let p = law(&[0.6, 0.8], 4.0);
        let single = sample_mixture(&VmfMixture::single(p.clone()), 300, 9);
        let plain = sample(&p, 300, 9);
        assert_eq!(single.rows().collect::<Vec<_>>(), plain.rows().collect::<Vec<_>>());
        assert!(single.labels().unwrap().iter().all(|&l| l == 0));

        let comps: Vec<VmfParams> =
            [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]].iter().map(|m| law(m, 10.0)).collect();
        let m = VmfMixture::new(comps, vec![0.25; 4]).unwrap();
        let n = 400_000;
        let s = sample_mixture(&m, n, 1);
        let mut counts = [0usize; 4];
        s.labels().unwrap().iter().for_each(|&l| counts[l] += 1);
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn mixture_log_likelihood_matches_density() {
        let p = law(&[0.0, 1.0], 2.0);
        let s = sample(&p, 50, 2);
        let ll = VmfMixture::single(p.clone()).log_likelihood(&s).unwrap();
        let direct: f64 = s.rows().map(|x| log_density(&p, x).unwrap()).sum();
        assert!((ll - direct).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn samples_are_unit_and_reproducible(seed in any::<u64>(), d in 2usize..50, log_k in -4.0f64..10.0) {
            let mut r = crate::testing::stream(seed);
            let mu = crate::testing::unit(&mut r, d);
            let p = VmfParams::new(mu, 10f64.powf(log_k)).unwrap();
            let a = sample(&p, 64, seed);
            for x in a.rows() {
                prop_assert!((norm(x) - 1.0).abs() <= 1e-12);
            }
            prop_assert_eq!(a, sample(&p, 64, seed));
        }

        #[test]
        fn log_normalizer_is_finite_and_decreasing(d in 2usize..1000, log_k in -6.0f64..7.0) {
            let k = 10f64.powf(log_k);
            let a = log_normalizing_constant(d, k).unwrap();
            let b = log_normalizing_constant(d, 1.5 * k).unwrap();
            prop_assert!(a.is_finite() && b.is_finite());
            // d/dk log C_d = -A_d(k), and A_d is increasing
            let slack = 64.0 * f64::EPSILON * a.abs().max(1.0);
            let drop = a - b;
            prop_assert!(drop >= 0.5 * k * mean_resultant_length(d, k) - slack);
            prop_assert!(drop <= 0.5 * k * mean_resultant_length(d, 1.5 * k) + slack);
        }
    }
}
