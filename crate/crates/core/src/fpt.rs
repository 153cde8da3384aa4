//! First-passage distribution recovered from an image measure, the ζ
//! certificate bounding its error, and the closed form for linear boundaries.

use serde::{Deserialize, Serialize};

use crate::boundary::Boundary;
use crate::cutting_plane::{log_mu_constraint, REFINE_TOL, T_SCAN_FLOOR};
use crate::error::{Error, Result};
use crate::kernel::{norm_cdf, norm_pdf};
use crate::measure::AtomicMeasure;
use crate::search::{geometric_grid, scan_refine, Extremum};

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be positive, got {t}")))
    }
}

/// `F(t) = Φ(-b(t)/√t) + Σ w_i Φ((b(t) - θ_i)/√t)`.
pub fn cdf_from_measure(mu: &AtomicMeasure, b: &Boundary, t: f64) -> Result<f64> {
    check_time(t)?;
    cdf_at_level(mu, t, b.eval(t)?)
}

/// The distribution formula with the boundary value `x = b(t)` supplied.
pub fn cdf_at_level(mu: &AtomicMeasure, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    let s = t.sqrt();
    let images: f64 = mu.iter().map(|(theta, w)| w * norm_cdf((x - theta) / s)).sum();
    Ok(norm_cdf(-x / s) + images)
}

/// `f(t) = (2t^{3/2})^{-1} Σ w_i θ_i φ((θ_i - b(t))/√t)`.
pub fn density_from_measure(mu: &AtomicMeasure, b: &Boundary, t: f64) -> Result<f64> {
    check_time(t)?;
    density_at_level(mu, t, b.eval(t)?)
}

/// The density formula with the boundary value `x = b(t)` supplied.
pub fn density_at_level(mu: &AtomicMeasure, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    let s = t.sqrt();
    let sum: f64 = mu.iter().map(|(theta, w)| w * theta * norm_pdf((theta - x) / s)).sum();
    Ok(sum / (2.0 * t * s))
}

fn check_linear(a: f64, m: f64, t: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain(format!("intercept must be positive, got {a}")));
    }
    if !m.is_finite() {
        return Err(Error::Domain("slope must be finite".into()));
    }
    check_time(t)
}

/// Hitting probability of `a + m·t` by time `t`.
pub fn bachelier_levy(a: f64, m: f64, t: f64) -> Result<f64> {
    check_linear(a, m, t)?;
    let s = t.sqrt();
    let reflected = norm_cdf((m * t - a) / s);
    let image = if reflected > 0.0 { (-2.0 * a * m + reflected.ln()).exp() } else { 0.0 };
    Ok(norm_cdf(-(a + m * t) / s) + image)
}

/// Density `a t^{-3/2} φ((a + m t)/√t)` of the hitting time of `a + m·t`.
pub fn bachelier_levy_density(a: f64, m: f64, t: f64) -> Result<f64> {
    check_linear(a, m, t)?;
    Ok(a / (t * t.sqrt()) * norm_pdf((a + m * t) / t.sqrt()))
}

/// Bounds `1 - ζ₁ ≤ 1/r_μ(t, b(t)) ≤ 1 + ζ₂` over `(0, t0]`. The extrema come
/// from a finite scan plus the analytic limit at `t ↓ 0`, so the bound is a
/// numerical surrogate for the supremum over the whole interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaCertificate {
    #[serde(with = "crate::serde_util::extended_f64")]
    pub min_inv_r: f64,
    #[serde(with = "crate::serde_util::extended_f64")]
    pub max_inv_r: f64,
    pub argmin: f64,
    pub argmax: f64,
    /// `lim_{t↓0} 1/r_μ(t, b(t))`
    #[serde(with = "crate::serde_util::extended_f64")]
    pub limit_at_zero: f64,
    #[serde(with = "crate::serde_util::extended_f64")]
    pub zeta1: f64,
    #[serde(with = "crate::serde_util::extended_f64")]
    pub zeta2: f64,
    pub surrogate: bool,
}

impl ZetaCertificate {
    /// Bound on `sup |F - F̃|` over `(0, t0]`.
    pub fn sup_error_bound(&self) -> f64 {
        self.zeta1.max(self.zeta2)
    }
}

fn inverse_limit_at_zero(mu: &AtomicMeasure, b: &Boundary) -> f64 {
    let edge = 2.0 * b.b0();
    let tol = 1e-12 * edge.abs().max(1.0);
    if mu.iter().any(|(theta, _)| theta < edge - tol) {
        return 0.0;
    }
    let w: f64 = mu.iter().filter(|(theta, _)| (theta - edge).abs() <= tol).map(|(_, w)| w).sum();
    if w > 0.0 {
        1.0 / (w * (edge * b.slope0()).exp())
    } else {
        f64::INFINITY
    }
}

pub fn zeta_certificate(mu: &AtomicMeasure, b: &Boundary, t0: f64, grid_size: usize) -> Result<ZetaCertificate> {
    check_time(t0)?;
    if grid_size < 100 {
        return Err(Error::Domain(format!("certificate grid needs at least 100 points, got {grid_size}")));
    }
    if t0 > b.horizon() {
        return Err(Error::OutOfRange { t: t0, lo: 0.0, hi: b.horizon() });
    }
    let grid = geometric_grid(t0 * T_SCAN_FLOOR, t0, grid_size);
    let inv_r = |t: f64| log_mu_constraint(mu, b, t).map(|v| (-v).exp()).unwrap_or(f64::NAN);
    let (argmin, mut min_inv_r) = scan_refine(inv_r, &grid, Extremum::Min, REFINE_TOL);
    let (argmax, mut max_inv_r) = scan_refine(inv_r, &grid, Extremum::Max, REFINE_TOL);
    if min_inv_r.is_nan() || max_inv_r.is_nan() {
        return Err(Error::NonFinite("inverse kernel sum".into()));
    }
    let limit = inverse_limit_at_zero(mu, b);
    let (mut argmin, mut argmax) = (argmin, argmax);
    if limit < min_inv_r {
        min_inv_r = limit;
        argmin = 0.0;
    }
    if limit > max_inv_r {
        max_inv_r = limit;
        argmax = 0.0;
    }
    Ok(ZetaCertificate {
        min_inv_r,
        max_inv_r,
        argmin,
        argmax,
        limit_at_zero: limit,
        zeta1: (1.0 - min_inv_r).max(0.0),
        zeta2: (max_inv_r - 1.0).max(0.0),
        surrogate: true,
    })
}

/// Distribution and density of the first-passage time on a time grid,
/// together with the certificate that bounds their error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FptCurve {
    pub times: Vec<f64>,
    pub cdf: Vec<f64>,
    pub density: Vec<f64>,
    #[serde(with = "crate::serde_util::extended_f64")]
    pub zeta1: f64,
    #[serde(with = "crate::serde_util::extended_f64")]
    pub zeta2: f64,
    #[serde(with = "crate::serde_util::extended_f64")]
    pub sup_error_bound: f64,
}

impl FptCurve {
    /// Evaluates on `t0·k/points`, `k = 1..points`.
    pub fn from_measure(mu: &AtomicMeasure, b: &Boundary, t0: f64, points: usize, grid_size: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::Domain("curve needs at least one point".into()));
        }
        let times: Vec<f64> = (1..=points).map(|k| t0 * k as f64 / points as f64).collect();
        let cdf = times.iter().map(|&t| cdf_from_measure(mu, b, t)).collect::<Result<Vec<_>>>()?;
        let density = times.iter().map(|&t| density_from_measure(mu, b, t)).collect::<Result<Vec<_>>>()?;
        let z = zeta_certificate(mu, b, t0, grid_size)?;
        Ok(Self { times, cdf, density, zeta1: z.zeta1, zeta2: z.zeta2, sup_error_bound: z.sup_error_bound() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2() -> f64 {
        (-2.0f64).exp()
    }

    fn lin() -> Boundary {
        Boundary::linear(1.0, 1.0).unwrap()
    }

    // 1 - Φ(2) + e^{-2}/2 with Φ(2) from a 30-digit reference
    const BL_111: f64 = 1.0 - 0.977249868051820792799717362833 + 0.5 * 0.1353352832366126918939994949724844;

    #[test]
    fn cdf_examples() {
        let mu = AtomicMeasure::dirac(2.0, e2()).unwrap();
        let f = cdf_from_measure(&mu, &lin(), 1.0).unwrap();
        assert!((f - BL_111).abs() < 1e-15);
        assert!((f - 0.0904178).abs() < 1e-7);
        assert!((f - bachelier_levy(1.0, 1.0, 1.0).unwrap()).abs() < 1e-15);
        let empty = cdf_from_measure(&AtomicMeasure::empty(), &lin(), 1.0).unwrap();
        assert!((empty - 0.0227501319481792).abs() < 1e-15);
        assert!(cdf_from_measure(&mu, &lin(), 1e-8).unwrap() < 1e-12);
        assert!(cdf_from_measure(&mu, &lin(), 0.0).is_err());
    }

    #[test]
    fn density_examples() {
        let mu = AtomicMeasure::dirac(2.0, e2()).unwrap();
        let f = density_from_measure(&mu, &lin(), 1.0).unwrap();
        // e^{-2} φ(0) = φ(2)
        assert!((f - 0.05399096651318806).abs() < 1e-15);
        assert!((f - bachelier_levy_density(1.0, 1.0, 1.0).unwrap()).abs() < 1e-15);
        assert_eq!(density_from_measure(&AtomicMeasure::empty(), &lin(), 1.0).unwrap(), 0.0);
        assert!(density_from_measure(&mu, &lin(), -1.0).is_err());
    }

    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
        let left = (c - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + c)) + f(c));
        let right = (b - c) / 6.0 * (f(c) + 4.0 * f(0.5 * (c + b)) + f(b));
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson(f, a, c, tol / 2.0, depth - 1) + simpson(f, c, b, tol / 2.0, depth - 1)
        }
    }

    #[test]
    fn density_integrates_to_cdf() {
        for (a, m) in [(1.0, 1.0), (0.5, -0.5), (2.0, 0.3)] {
            let b = Boundary::linear(a, m).unwrap();
            let mu = AtomicMeasure::dirac(2.0 * a, (-2.0 * a * m).exp()).unwrap();
            let f = |t: f64| density_from_measure(&mu, &b, t).unwrap();
            for (ta, tb) in [(1e-6, 1.0), (0.2, 0.7)] {
                let integral = simpson(&f, ta, tb, 1e-10, 40);
                let diff = cdf_from_measure(&mu, &b, tb).unwrap() - cdf_from_measure(&mu, &b, ta).unwrap();
                assert!((integral - diff).abs() < 1e-6, "{a} {m}: {integral} vs {diff}");
            }
        }
    }

    #[test]
    fn bachelier_levy_examples() {
        assert!((bachelier_levy(1.0, 1.0, 1.0).unwrap() - BL_111).abs() < 1e-15);
        assert!((bachelier_levy(1.0, 0.0, 1e6).unwrap() - 1.0).abs() < 1e-3);
        for (a, m) in [(1.0, 1.0), (0.5, -2.0), (3.0, 0.0)] {
            assert!(bachelier_levy(a, m, 1e-12).unwrap() < 1e-15);
        }
        assert!(bachelier_levy(0.0, 1.0, 1.0).is_err());
        assert!(bachelier_levy(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn exact_representer_certificate() {
        let mu = AtomicMeasure::dirac(2.0, e2()).unwrap();
        let z = zeta_certificate(&mu, &lin(), 1.0, 1000).unwrap();
        assert!(z.zeta1 < 1e-12 && z.zeta2 < 1e-12, "{z:?}");
        assert!((z.limit_at_zero - 1.0).abs() < 1e-14);
        assert!(z.surrogate);
    }

    #[test]
    fn certificate_limits() {
        // no atom at 2b(0): r → 0 as t ↓ 0
        let mu = AtomicMeasure::dirac(2.5, 1.0).unwrap();
        let z = zeta_certificate(&mu, &lin(), 1.0, 200).unwrap();
        assert_eq!(z.zeta2, f64::INFINITY);
        // an atom below 2b(0): r → ∞
        let mu = AtomicMeasure::from_pairs([(1.5, 0.1), (2.0, 0.1)]).unwrap();
        let z = zeta_certificate(&mu, &lin(), 1.0, 200).unwrap();
        assert_eq!(z.min_inv_r, 0.0);
        assert_eq!(z.zeta1, 1.0);
        assert!(zeta_certificate(&mu, &lin(), 1.0, 50).is_err());
        let json = serde_json::to_string(&zeta_certificate(&AtomicMeasure::dirac(3.0, 1.0).unwrap(), &lin(), 1.0, 100).unwrap()).unwrap();
        assert!(json.contains("\"inf\""));
    }

    #[test]
    fn curve_is_consistent() {
        let mu = AtomicMeasure::dirac(2.0, e2()).unwrap();
        let c = FptCurve::from_measure(&mu, &lin(), 1.0, 50, 200).unwrap();
        assert_eq!(c.times.len(), 50);
        assert_eq!(c.times[49], 1.0);
        assert!(c.cdf.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert_eq!(c.sup_error_bound, c.zeta1.max(c.zeta2));
    }
}
