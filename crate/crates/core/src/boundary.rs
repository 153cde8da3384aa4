//! One-sided boundaries and the forward method of images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::log_kernel_rise;
use crate::measure::AtomicMeasure;

/// Closed-form catalogue entries plus user-supplied knot tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `a + m t`
    Linear { a: f64, m: f64 },
    /// `sqrt(c + t)`
    SqrtShift { c: f64 },
    /// `ln(c + t)`
    LogShift { c: f64 },
    /// `a + t²`
    Quadratic { a: f64 },
    /// Monotone cubic interpolation through `(t, b(t))` knots starting at `t = 0`.
    Tabulated(Tabulated),
}

/// A boundary curve together with its value and slope at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundaryKind", into = "BoundaryKind")]
pub struct Boundary {
    kind: BoundaryKind,
    b0: f64,
    slope0: f64,
    concave: bool,
}

impl Boundary {
    pub fn new(kind: BoundaryKind) -> Result<Self> {
        let (b0, slope0, concave) = match &kind {
            BoundaryKind::Linear { a, m } => {
                check_finite(&[*a, *m])?;
                (*a, *m, true)
            }
            BoundaryKind::SqrtShift { c } => {
                check_finite(&[*c])?;
                if !(*c > 0.0) {
                    return Err(Error::InvalidBoundary(format!("sqrt shift needs c > 0, got {c}")));
                }
                (c.sqrt(), 0.5 / c.sqrt(), true)
            }
            BoundaryKind::LogShift { c } => {
                check_finite(&[*c])?;
                if !(*c > 1.0) {
                    return Err(Error::InvalidBoundary(format!("log shift needs c > 1, got {c}")));
                }
                (c.ln(), 1.0 / c, true)
            }
            BoundaryKind::Quadratic { a } => {
                check_finite(&[*a])?;
                (*a, 0.0, false)
            }
            BoundaryKind::Tabulated(tab) => (tab.values[0], tab.slopes[0], tab.data_concave()),
        };
        if !(b0 > 0.0) {
            return Err(Error::InvalidBoundary(format!("b(0) must be positive, got {b0}")));
        }
        if !slope0.is_finite() {
            return Err(Error::InvalidBoundary("slope at zero is not finite".into()));
        }
        Ok(Self { kind, b0, slope0, concave })
    }

    pub fn linear(a: f64, m: f64) -> Result<Self> {
        Self::new(BoundaryKind::Linear { a, m })
    }

    pub fn sqrt_shift(c: f64) -> Result<Self> {
        Self::new(BoundaryKind::SqrtShift { c })
    }

    pub fn log_shift(c: f64) -> Result<Self> {
        Self::new(BoundaryKind::LogShift { c })
    }

    pub fn quadratic(a: f64) -> Result<Self> {
        Self::new(BoundaryKind::Quadratic { a })
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(BoundaryKind::Tabulated(Tabulated::new(knots)?))
    }

    pub fn kind(&self) -> &BoundaryKind {
        &self.kind
    }

    /// `b(0)`
    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// `b'(0)`
    pub fn slope0(&self) -> f64 {
        self.slope0
    }

    /// Declared concavity: analytic for the catalogue, from the knot data
    /// for tables.
    pub fn is_concave(&self) -> bool {
        self.concave
    }

    /// Largest time at which the boundary can be evaluated.
    pub fn horizon(&self) -> f64 {
        match &self.kind {
            BoundaryKind::Tabulated(tab) => *tab.times.last().unwrap(),
            _ => f64::INFINITY,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("boundary time must be nonnegative, got {t}")));
        }
        Ok(match &self.kind {
            BoundaryKind::Linear { a, m } => a + m * t,
            BoundaryKind::SqrtShift { c } => (c + t).sqrt(),
            BoundaryKind::LogShift { c } => (c + t).ln(),
            BoundaryKind::Quadratic { a } => a + t * t,
            BoundaryKind::Tabulated(tab) => tab.eval(t)?,
        })
    }

    /// `b(t) - b(0)`, computed without cancellation for small `t`.
    pub fn rise(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("boundary time must be nonnegative, got {t}")));
        }
        Ok(match &self.kind {
            BoundaryKind::Linear { m, .. } => m * t,
            BoundaryKind::SqrtShift { c } => t / ((c + t).sqrt() + c.sqrt()),
            BoundaryKind::LogShift { c } => (t / c).ln_1p(),
            BoundaryKind::Quadratic { .. } => t * t,
            BoundaryKind::Tabulated(tab) => tab.rise(t)?,
        })
    }

    /// `log r_θ(t, b(t))` written as `(θ(b(0) - θ/2) + θ(b(t) - b(0)))/t`,
    /// which stays accurate near `θ = 2b(0)` as `t ↓ 0`.
    pub fn log_kernel_on(&self, t: f64, theta: f64) -> Result<f64> {
        Ok(log_kernel_rise(t, self.b0, self.rise(t)?, theta))
    }

    /// Short label such as `linear:1,1`, matching the command-line syntax.
    pub fn label(&self) -> String {
        match &self.kind {
            BoundaryKind::Linear { a, m } => format!("linear:{a},{m}"),
            BoundaryKind::SqrtShift { c } => format!("sqrt:{c}"),
            BoundaryKind::LogShift { c } => format!("log:{c}"),
            BoundaryKind::Quadratic { a } => format!("quadratic:{a}"),
            BoundaryKind::Tabulated(tab) => format!("tabulated:{}", tab.times.len()),
        }
    }
}

impl TryFrom<BoundaryKind> for Boundary {
    type Error = Error;

    fn try_from(kind: BoundaryKind) -> Result<Self> {
        Self::new(kind)
    }
}

impl From<Boundary> for BoundaryKind {
    fn from(b: Boundary) -> Self {
        b.kind
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidBoundary("parameters must be finite".into()))
    }
}

/// Knot table with Fritsch–Carlson (PCHIP) derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KnotTable", into = "KnotTable")]
pub struct Tabulated {
    times: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Tabulated {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidBoundary("a table needs at least two knots".into()));
        }
        let (times, values): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
        check_finite(&times)?;
        check_finite(&values)?;
        if times[0] != 0.0 {
            return Err(Error::InvalidBoundary(format!("first knot must be at t = 0, got {}", times[0])));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidBoundary("knot times must be strictly increasing".into()));
        }
        let slopes = pchip_slopes(&times, &values);
        Ok(Self { times, values, slopes })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Knot index `k` of the cell holding `t` and `b(t) - b(t_k)`.
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let lo = self.times[0];
        let hi = *self.times.last().unwrap();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let k = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            p if p >= self.times.len() => self.times.len() - 2,
            p => p - 1,
        };
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let (d0, d1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let local = (3.0 * s2 - 2.0 * s3) * (self.values[k + 1] - self.values[k]) + (s3 - 2.0 * s2 + s) * d0 + (s3 - s2) * d1;
        Ok((k, local))
    }

    fn eval(&self, t: f64) -> Result<f64> {
        let (k, local) = self.locate(t)?;
        Ok(self.values[k] + local)
    }

    fn rise(&self, t: f64) -> Result<f64> {
        let (k, local) = self.locate(t)?;
        Ok((self.values[k] - self.values[0]) + local)
    }

    fn data_concave(&self) -> bool {
        concave_on(&self.times, &self.values)
    }
}

#[derive(Serialize, Deserialize)]
struct KnotTable {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<KnotTable> for Tabulated {
    type Error = Error;

    fn try_from(t: KnotTable) -> Result<Self> {
        Self::new(t.knots)
    }
}

impl From<Tabulated> for KnotTable {
    fn from(t: Tabulated) -> Self {
        KnotTable { knots: t.knots().collect() }
    }
}

/// Monotone piecewise-cubic derivatives (Fritsch–Carlson with the
/// three-point shape-preserving end conditions).
fn pchip_slopes(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = pchip_end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = pchip_end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn pchip_end(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Second divided differences of sampled values are all at most
/// `1e-12 * scale`, where the scale absorbs rounding in `b / h²`.
fn concave_on(t: &[f64], y: &[f64]) -> bool {
    if t.len() < 3 {
        return true;
    }
    let ymax = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let hmin = t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * ymax / (hmin * hmin).min(1.0);
    t.windows(3).zip(y.windows(3)).all(|(tw, yw)| {
        let left = (yw[1] - yw[0]) / (tw[1] - tw[0]);
        let right = (yw[2] - yw[1]) / (tw[2] - tw[1]);
        (right - left) / (tw[2] - tw[0]) <= tol
    })
}

/// Checks concavity of `b` on a sorted grid of at least three points.
pub fn concavity_check(b: &Boundary, grid: &[f64]) -> Result<bool> {
    if grid.len() < 3 {
        return Err(Error::Domain("concavity check needs at least three grid points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("concavity grid must be strictly increasing".into()));
    }
    let values = grid.iter().map(|&t| b.eval(t)).collect::<Result<Vec<_>>>()?;
    Ok(concave_on(grid, &values))
}

/// `lim_{t↓0} b(t) = θ*/2`, with `θ*` the smallest charged atom.
pub fn limit_at_zero(mu: &AtomicMeasure) -> Result<f64> {
    mu.smallest_atom()
        .map(|a| a / 2.0)
        .ok_or_else(|| Error::InvalidMeasure("empty measure generates no boundary".into()))
}

/// Solves `r_μ(t, x) = 1` for `x` by bracketing and bisection.
pub fn forward_images(mu: &AtomicMeasure, t: f64, tol: f64) -> Result<f64> {
    let (Some(lo_atom), Some(hi_atom)) = (mu.smallest_atom(), mu.largest_atom()) else {
        return Err(Error::InvalidMeasure("empty measure generates no boundary".into()));
    };
    if !(lo_atom > 0.0) {
        return Err(Error::InvalidMeasure(format!("atoms must be positive, got {lo_atom}")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let log_r = |x: f64| -> Result<f64> {
        let v = mu.integrate_r(t, x)?.log_value;
        if v.is_nan() {
            return Err(Error::NonFinite(format!("log r_mu({t}, {x})")));
        }
        Ok(v)
    };

    let mut lo = lo_atom / 2.0 - 1.0;
    let mut hi = hi_atom / 2.0 + 1.0;
    let mut step = 1.0;
    while log_r(lo)? >= 0.0 {
        lo -= step;
        step *= 2.0;
        if !lo.is_finite() || step > 1e300 {
            return Err(Error::NonFinite("lower bracket diverged".into()));
        }
    }
    step = 1.0;
    while log_r(hi)? <= 0.0 {
        hi += step;
        step *= 2.0;
        if !hi.is_finite() || step > 1e300 {
            return Err(Error::NonFinite("upper bracket diverged".into()));
        }
    }

    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_r(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(x: f64) -> f64 {
        x.exp()
    }

    #[test]
    fn catalogue_values() {
        assert_eq!(Boundary::linear(1.0, 1.0).unwrap().eval(1.0).unwrap(), 2.0);
        assert_eq!(Boundary::sqrt_shift(1.0).unwrap().eval(0.0).unwrap(), 1.0);
        let log = Boundary::log_shift(2.0).unwrap();
        assert!((log.eval(0.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-10);
        assert!((log.b0() - 2f64.ln()).abs() < 1e-16);
        assert_eq!(log.slope0(), 0.5);
        assert_eq!(Boundary::sqrt_shift(4.0).unwrap().slope0(), 0.25);
        assert!(!Boundary::quadratic(1.0).unwrap().is_concave());
    }

    #[test]
    fn rejects_invalid() {
        assert!(Boundary::linear(0.0, 1.0).is_err());
        assert!(Boundary::linear(-1.0, 1.0).is_err());
        assert!(Boundary::log_shift(1.0).is_err());
        assert!(Boundary::sqrt_shift(0.0).is_err());
        assert!(Boundary::linear(f64::NAN, 1.0).is_err());
        assert!(Boundary::linear(1.0, 1.0).unwrap().eval(-0.1).is_err());
        assert!(Boundary::tabulated(vec![(0.1, 1.0), (1.0, 1.5)]).is_err());
        assert!(Boundary::tabulated(vec![(0.0, 1.0), (0.0, 1.5)]).is_err());
        assert!(Boundary::tabulated(vec![(0.0, -1.0), (1.0, 1.5)]).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_refuses_extrapolation() {
        let knots: Vec<(f64, f64)> = (0..=20).map(|i| {
            let t = i as f64 * 0.1;
            (t, (1.0 + t).sqrt())
        }).collect();
        let b = Boundary::tabulated(knots.clone()).unwrap();
        for &(t, v) in &knots {
            assert!((b.eval(t).unwrap() - v).abs() < 1e-15);
        }
        assert!((b.eval(0.55).unwrap() - 1.55f64.sqrt()).abs() < 1e-4);
        assert!(matches!(b.eval(2.5), Err(Error::OutOfRange { .. })));
        assert_eq!(b.horizon(), 2.0);
        assert!(b.is_concave());
        assert!((b.slope0() - 0.5).abs() < 0.02);
        let json = serde_json::to_string(&b).unwrap();
        let back: Boundary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn concavity_examples() {
        let lin = Boundary::linear(1.0, 1.0).unwrap();
        let fine: Vec<f64> = (0..=1000).map(|i| i as f64 * 1e-3).collect();
        assert!(concavity_check(&lin, &[0.0, 0.3, 0.31, 2.0]).unwrap());
        assert!(concavity_check(&lin, &fine).unwrap());
        let quad = Boundary::quadratic(1.0).unwrap();
        assert!(!concavity_check(&quad, &[0.0, 0.5, 1.0]).unwrap());
        let sqrt = Boundary::sqrt_shift(1.0).unwrap();
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
        assert!(concavity_check(&sqrt, &grid).unwrap());
        assert!(concavity_check(&sqrt, &fine).unwrap());
        assert!(concavity_check(&sqrt, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn limit_examples() {
        let m = AtomicMeasure::dirac(2.0, e(-2.0)).unwrap();
        assert_eq!(limit_at_zero(&m).unwrap(), 1.0);
        let m = AtomicMeasure::from_pairs([(1.0, 0.2), (1.5, 0.6)]).unwrap();
        assert_eq!(limit_at_zero(&m).unwrap(), 0.5);
        let m = AtomicMeasure::from_pairs([(3.0, 0.0), (4.0, 0.1)]).unwrap();
        assert_eq!(limit_at_zero(&m).unwrap(), 2.0);
        assert!(limit_at_zero(&AtomicMeasure::empty()).is_err());
    }

    #[test]
    fn forward_linear_representer() {
        let m = AtomicMeasure::dirac(2.0, e(-2.0)).unwrap();
        assert!((forward_images(&m, 0.5, 1e-13).unwrap() - 1.5).abs() < 1e-12);
        assert!((forward_images(&m, 2.0, 1e-13).unwrap() - 3.0).abs() < 1e-12);
        // a - t/2 from exp(-2am) δ_{2a} with m = -1/2
        let a = 1.3;
        let m = AtomicMeasure::dirac(2.0 * a, e(-2.0 * a * -0.5)).unwrap();
        for &t in &[0.1, 0.7, 2.0] {
            assert!((forward_images(&m, t, 1e-13).unwrap() - (a - t / 2.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn forward_two_atom_measure() {
        let m = AtomicMeasure::from_pairs([(1.0, 0.2), (1.5, 0.6)]).unwrap();
        for &t in &[0.2, 0.35, 0.5] {
            let x = forward_images(&m, t, 1e-14).unwrap();
            let r = m.integrate_r(t, x).unwrap().value;
            assert!((r - 1.0).abs() < 1e-12, "r = {r}");
        }
        let near_zero = forward_images(&m, 1e-6, 1e-14).unwrap();
        assert!((near_zero - 0.5).abs() < 1e-3);
    }

    #[test]
    fn forward_errors() {
        assert!(forward_images(&AtomicMeasure::empty(), 1.0, 1e-10).is_err());
        let m = AtomicMeasure::dirac(0.0, 1.0).unwrap();
        assert!(forward_images(&m, 1.0, 1e-10).is_err());
        let m = AtomicMeasure::dirac(2.0, 1.0).unwrap();
        assert!(forward_images(&m, 0.0, 1e-10).is_err());
    }

    fn measure_strategy() -> impl Strategy<Value = AtomicMeasure> {
        prop::collection::vec((0.5f64..6.0, 0.01f64..2.0), 1..6)
            .prop_map(|p| AtomicMeasure::from_pairs(p).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn forward_boundary_is_concave(m in measure_strategy(),
                                       t1 in 0.01f64..2.0, g1 in 0.01f64..1.0, g2 in 0.01f64..1.0) {
            let t2 = t1 + g1;
            let t3 = t2 + g2;
            let b = |t| forward_images(&m, t, 1e-13).unwrap();
            let lam = (t3 - t2) / (t3 - t1);
            let chord = lam * b(t1) + (1.0 - lam) * b(t3);
            prop_assert!(b(t2) >= chord - 1e-8);
        }

        #[test]
        fn forward_solves_unit_equation(m in measure_strategy(), t in 0.05f64..3.0) {
            let x = forward_images(&m, t, 1e-14).unwrap();
            let r = m.integrate_r(t, x).unwrap().value;
            prop_assert!((r - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn forward_small_time_limit(m in measure_strategy()) {
            let x = forward_images(&m, 1e-6, 1e-14).unwrap();
            prop_assert!((x - limit_at_zero(&m).unwrap()).abs() <= 1e-3);
        }
    }
}
