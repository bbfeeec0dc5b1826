//! Primitives on the unit sphere `S^{d-1}`.

use crate::error::{Error, Result};
use crate::vmf::{dot, norm, NORM_TOLERANCE};

/// Inner products at or below `-1 + ANTIPODAL_EPS` have no unique logarithm.
pub const ANTIPODAL_EPS: f64 = 1e-12;

fn same_dim(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() == y.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: x.len(), found: y.len() })
    }
}

/// Great-circle distance `arccos <x, y>` in `[0, pi]`.
///
/// Evaluated as `2 atan2(|x - y|, |x + y|)`, which equals the arccosine for
/// unit vectors but stays accurate (and exactly zero) for coincident points,
/// where `arccos` of a rounded inner product loses half the digits.
pub fn geodesic_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    same_dim(x, y)?;
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    Ok(2.0 * diff.sqrt().atan2(sum.sqrt()))
}

/// `z - <x, z> x`, the orthogonal projection onto `T_x S^{d-1}`.
pub fn project(x: &[f64], z: &[f64]) -> Vec<f64> {
    let c = dot(x, z);
    z.iter().zip(x).map(|(zi, xi)| zi - c * xi).collect()
}

/// A vector in the tangent space at a point of the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: Vec<f64>,
    vec: Vec<f64>,
}

impl TangentVector {
    /// Re-projects `vec` onto the tangent space at `base`.
    pub fn new(base: Vec<f64>, vec: Vec<f64>) -> Result<Self> {
        same_dim(&base, &vec)?;
        let r = norm(&base);
        if (r - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotUnitNorm(r));
        }
        let base: Vec<f64> = base.iter().map(|b| b / r).collect();
        let vec = project(&base, &vec);
        Ok(Self { base, vec })
    }

    pub fn zero(base: Vec<f64>) -> Result<Self> {
        let d = base.len();
        Self::new(base, vec![0.0; d])
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn vec(&self) -> &[f64] {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        norm(&self.vec)
    }

    /// Same base, vector multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self { base: self.base.clone(), vec: self.vec.iter().map(|v| v * s).collect() }
    }
}

/// `Exp_x(v) = cos|v| x + sin|v| / |v| v`.
pub fn exp_map(t: &TangentVector) -> Vec<f64> {
    let n = t.norm();
    if n < 1e-12 {
        return t.base.clone();
    }
    let (s, c) = n.sin_cos();
    let mut out: Vec<f64> = t.base.iter().zip(&t.vec).map(|(x, v)| c * x + s / n * v).collect();
    let r = norm(&out);
    out.iter_mut().for_each(|o| *o /= r);
    out
}

/// `Log_x(y)`: the tangent vector at `x` of length `d_geo(x, y)` pointing at `y`.
///
/// Fails for (numerically) antipodal points.
pub fn log_map(x: &[f64], y: &[f64]) -> Result<TangentVector> {
    same_dim(x, y)?;
    let c = dot(x, y);
    if c <= -1.0 + ANTIPODAL_EPS {
        return Err(Error::Antipodal(String::new()));
    }
    let u = project(x, y);
    let un = norm(&u);
    let theta = geodesic_distance(x, y)?;
    if un < 1e-300 || theta < 1e-12 {
        return TangentVector::zero(x.to_vec());
    }
    let scale = theta / un;
    TangentVector::new(x.to_vec(), u.iter().map(|v| v * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::vmf::uniform_on_sphere;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn geodesic_examples() {
        assert_eq!(geodesic_distance(&[0.6, 0.8], &[0.6, 0.8]).unwrap(), 0.0);
        assert!((geodesic_distance(&[0.6, 0.8], &[-0.6, -0.8]).unwrap() - PI).abs() < 1e-15);
        assert!((geodesic_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(geodesic_distance(&[1.0, 0.0], &[0.0, 1.0, 0.0]).is_err());
        // agrees with arccos away from the ill-conditioned ends
        let (x, y) = ([0.36, 0.48, 0.8], [0.0, 0.6, 0.8]);
        let acos = dot(&x, &y).clamp(-1.0, 1.0).acos();
        assert!((geodesic_distance(&x, &y).unwrap() - acos).abs() < 1e-14);
    }

    #[test]
    fn exp_log_examples() {
        let z = TangentVector::zero(vec![1.0, 0.0]).unwrap();
        assert_eq!(exp_map(&z), vec![1.0, 0.0]);
        let v = TangentVector::new(vec![1.0, 0.0], vec![0.0, FRAC_PI_2]).unwrap();
        let y = exp_map(&v);
        assert!(y[0].abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);

        let l = log_map(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(l.vec()[0].abs() < 1e-15 && (l.vec()[1] - FRAC_PI_2).abs() < 1e-15);
        let l = log_map(&[0.6, 0.8], &[0.6, 0.8]).unwrap();
        assert_eq!(l.norm(), 0.0);
        assert!(matches!(log_map(&[1.0, 0.0], &[-1.0, 0.0]), Err(Error::Antipodal(_))));
    }

    #[test]
    fn tangent_vectors_are_projected() {
        let t = TangentVector::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.vec(), &[1.0, 2.0, 0.0]);
    }

    #[test]
    fn exp_log_round_trips() {
        let mut r = rng::stream(99, 0);
        for d in [2usize, 3, 5, 50] {
            let mut x = vec![0.0; d];
            let mut y = vec![0.0; d];
            for _ in 0..2_500 {
                uniform_on_sphere(d, &mut r, &mut x);
                uniform_on_sphere(d, &mut r, &mut y);
                if dot(&x, &y) < -1.0 + 1e-6 {
                    continue;
                }
                let v = log_map(&x, &y).unwrap();
                assert!((v.norm() - geodesic_distance(&x, &y).unwrap()).abs() < 1e-12);
                assert!(dot(v.base(), v.vec()).abs() < 1e-9);
                let back = exp_map(&v);
                let err = norm(&back.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
                assert!(err < 1e-10, "d={d} err={err}");
                let again = log_map(&x, &back).unwrap();
                let verr = norm(&again.vec().iter().zip(v.vec()).map(|(a, b)| a - b).collect::<Vec<_>>());
                assert!(verr < 1e-10, "d={d} verr={verr}");
            }
        }
    }
}
