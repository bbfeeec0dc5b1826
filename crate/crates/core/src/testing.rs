//! Random inputs for property tests.

use rand::Rng;

use crate::geometry::{exp_map, TangentVector};
use crate::rng::{self, VmfRng};
use crate::vmf::{uniform_on_sphere, VmfParams};

pub(crate) fn stream(seed: u64) -> VmfRng {
    rng::stream(seed, 0)
}

pub(crate) fn unit(r: &mut VmfRng, d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    uniform_on_sphere(d, r, &mut x);
    x
}

/// Concentration log-uniform on `[lo, hi]`.
pub(crate) fn kappa(r: &mut VmfRng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + r.random::<f64>() * (hi / lo).ln()).exp()
}

pub(crate) fn law(r: &mut VmfRng, d: usize, lo: f64, hi: f64) -> VmfParams {
    let mu = unit(r, d);
    VmfParams::new(mu, kappa(r, lo, hi)).unwrap()
}

/// Direction at geodesic distance below `radius` from the unit vector `center`.
pub(crate) fn in_cap(r: &mut VmfRng, center: &[f64], radius: f64) -> Vec<f64> {
    let z = unit(r, center.len());
    let t = TangentVector::new(center.to_vec(), z).unwrap();
    let len = r.random::<f64>() * radius;
    exp_map(&t.scaled(len / t.norm()))
}
