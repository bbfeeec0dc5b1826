//! Log-domain modified Bessel functions of the first kind.
//!
//! `log I_nu(x)` is assembled from three branches, none of which ever forms
//! `I_nu(x)` itself:
//!
//! - a rescaled power series, used while `x` is small relative to the order;
//! - the uniform (Debye/Olver) expansion `I_nu(nu z)` for orders `nu >= 20`;
//! - the large-argument Hankel expansion for orders below 20.
//!
//! The ratio `I_{nu+1}(x) / I_nu(x)` is evaluated separately by continued
//! fraction so that it keeps full relative precision when both functions are
//! astronomically large.

use std::f64::consts::{LN_10, PI};
use std::sync::OnceLock;

/// Orders at or above this use the uniform expansion outside the series range.
pub(crate) const UNIFORM_MIN_ORDER: f64 = 20.0;

const UNIFORM_TERMS: usize = 16;
const SERIES_RESCALE: f64 = 1e280;

/// Argument at which a given order switches from the series to an expansion.
pub(crate) fn series_cutoff(nu: f64) -> f64 {
    if nu >= UNIFORM_MIN_ORDER {
        nu
    } else {
        50.0 + 2.0 * nu * nu
    }
}

/// `log I_nu(x)` for `nu >= 0` and `x > 0`.
///
/// Returns NaN for arguments outside that domain.
pub fn log_bessel_i(nu: f64, x: f64) -> f64 {
    if !(nu >= 0.0 && x > 0.0) || !nu.is_finite() || !x.is_finite() {
        return f64::NAN;
    }
    if x <= series_cutoff(nu) {
        log_bessel_i_series(nu, x)
    } else if nu >= UNIFORM_MIN_ORDER {
        log_bessel_i_uniform(nu, x)
    } else {
        log_bessel_i_hankel(nu, x)
    }
}

/// Ascending series `(x/2)^nu sum_k (x^2/4)^k / (k! Gamma(nu + k + 1))`.
pub(crate) fn log_bessel_i_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    // sum = head + tail, with the k = 0 term kept apart so ln_1p keeps precision
    let mut head = 1.0_f64;
    let mut tail = 0.0_f64;
    let mut log_scale = 0.0_f64;
    let mut k = 1.0_f64;
    loop {
        term *= q / (k * (nu + k));
        tail += term;
        if tail > SERIES_RESCALE {
            head /= SERIES_RESCALE;
            tail /= SERIES_RESCALE;
            term /= SERIES_RESCALE;
            log_scale += 280.0 * LN_10;
        }
        // terms grow until k ~ x/2, so only stop once past the peak
        if term < (head + tail) * 1e-17 && k * (nu + k) > q {
            break;
        }
        k += 1.0;
    }
    let log_sum = if log_scale == 0.0 { tail.ln_1p() } else { (head + tail).ln() + log_scale };
    nu * (0.5 * x).ln() - libm::lgamma(nu + 1.0) + log_sum
}

/// Hankel expansion `e^x / sqrt(2 pi x) sum_k (-1)^k a_k(nu) / x^k`.
pub(crate) fn log_bessel_i_hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut prev_abs = f64::INFINITY;
    for k in 1..2000 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * x);
        let abs = term.abs();
        if abs > prev_abs {
            // asymptotic series started diverging; the previous partial sum is optimal
            break;
        }
        sum += term;
        if abs < sum.abs() * 1e-17 {
            break;
        }
        prev_abs = abs;
    }
    x - 0.5 * (2.0 * PI * x).ln() + sum.ln()
}

/// Polynomial coefficients (ascending powers of `p`) of the Debye polynomials
/// `u_0 .. u_{UNIFORM_TERMS - 1}`.
fn debye_polynomials() -> &'static [Vec<f64>] {
    static POLYS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let mut polys = vec![vec![1.0]];
        for _ in 1..UNIFORM_TERMS {
            let prev = polys.last().unwrap();
            let mut next = vec![0.0; prev.len() + 3];
            for (i, &c) in prev.iter().enumerate() {
                let fi = i as f64;
                // 1/2 p^2 (1 - p^2) u'(p)
                if i > 0 {
                    next[i + 1] += 0.5 * fi * c;
                    next[i + 3] -= 0.5 * fi * c;
                }
                // 1/8 int_0^p (1 - 5 t^2) u(t) dt
                next[i + 1] += c / (8.0 * (fi + 1.0));
                next[i + 3] -= 5.0 * c / (8.0 * (fi + 3.0));
            }
            polys.push(next);
        }
        polys
    })
}

fn eval_poly(coeffs: &[f64], p: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * p + c)
}

/// Uniform asymptotic expansion of `I_nu(nu z)`.
pub(crate) fn log_bessel_i_uniform(nu: f64, x: f64) -> f64 {
    let z = x / nu;
    let root = z.hypot(1.0);
    let p = 1.0 / root;
    let eta = root + (z / (1.0 + root)).ln();
    let mut sum = 1.0;
    let mut nu_pow = 1.0;
    for poly in debye_polynomials().iter().skip(1) {
        nu_pow *= nu;
        let term = eval_poly(poly, p) / nu_pow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    nu * eta - 0.5 * (2.0 * PI * nu).ln() - 0.5 * root.ln() + sum.ln()
}

/// `I_{nu+1}(x) / I_nu(x)` by the Gauss continued fraction (modified Lentz).
pub fn bessel_i_ratio(nu: f64, x: f64) -> f64 {
    if !(nu >= 0.0 && x > 0.0) {
        return f64::NAN;
    }
    const TINY: f64 = 1e-300;
    let b = |j: f64| 2.0 * (nu + j) / x;
    let mut f = b(1.0);
    let mut c = f;
    let mut d = 0.0_f64;
    let mut j = 2.0;
    loop {
        let bj = b(j);
        d = bj + d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = bj + 1.0 / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 || j > 1e8 {
            break;
        }
        j += 1.0;
    }
    1.0 / f
}

/// Mean resultant length of `vMF(mu, kappa)` on `S^{d-1}`:
/// `A_d(kappa) = I_{d/2}(kappa) / I_{d/2-1}(kappa)`.
pub fn mean_resultant_length(d: usize, kappa: f64) -> f64 {
    bessel_i_ratio(0.5 * d as f64 - 1.0, kappa)
}

/// Log of the surface area of `S^{d-1}`: `log(2 pi^{d/2} / Gamma(d/2))`.
pub fn log_sphere_area(d: usize) -> f64 {
    let half = 0.5 * d as f64;
    std::f64::consts::LN_2 + half * PI.ln() - libm::lgamma(half)
}
