//! Gaussian density, distribution function and the image kernel
//! `r_θ(t, x) = exp(-θ²/(2t) + θx/t)`, kept in exponent space.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// `(2π)^{-1/2}`
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal distribution function.
///
/// Evaluated through `erfc`, so the lower tail keeps full relative accuracy
/// and `Φ(z) + Φ(-z) = 1` holds to rounding.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// A space-time point paired with an image location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub t: f64,
    pub x: f64,
    pub theta: f64,
}

impl KernelPoint {
    pub fn new(t: f64, x: f64, theta: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("kernel time must be positive, got {t}")));
        }
        Ok(Self { t, x, theta })
    }
}

/// Exponent of the image kernel, without any range checks.
#[inline]
pub(crate) fn log_kernel(t: f64, x: f64, theta: f64) -> f64 {
    -theta * theta / (2.0 * t) + theta * x / t
}

/// Kernel exponent at `x = b0 + rise`, grouped so that `θ = 2b0` cancels
/// exactly.
#[inline]
pub(crate) fn log_kernel_rise(t: f64, b0: f64, rise: f64, theta: f64) -> f64 {
    (theta * (b0 - 0.5 * theta) + theta * rise) / t
}

/// `log r_θ(t, x) = -θ²/(2t) + θx/t`.
pub fn log_r_theta(p: &KernelPoint) -> Result<f64> {
    if !(p.t > 0.0) {
        return Err(Error::Domain(format!("kernel time must be positive, got {}", p.t)));
    }
    Ok(log_kernel(p.t, p.x, p.theta))
}

/// `log(r_θ(p) / r_θ(q))` for two points sharing the same θ.
pub fn log_r_ratio(p: &KernelPoint, q: &KernelPoint) -> Result<f64> {
    if p.theta != q.theta {
        return Err(Error::Domain(format!(
            "kernel ratio needs a common theta, got {} and {}",
            p.theta, q.theta
        )));
    }
    Ok(log_r_theta(p)? - log_r_theta(q)?)
}
