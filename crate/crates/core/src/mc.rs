//! Monte Carlo reference values for first-passage and last-passage laws.
//!
//! Every path draws from its own ChaCha8 stream keyed by `(seed, path)`, so
//! estimates do not depend on how paths are spread over threads. Per-path
//! results are reduced with pairwise summation in path order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::kernel::log_kernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub paths: usize,
    /// time steps per unit time
    pub steps: usize,
    pub seed: u64,
    pub bridge_correction: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { paths: 100_000, steps: 1000, seed: 20240610, bridge_correction: true }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths < 1000 {
            return Err(Error::Config(format!("need at least 1000 paths, got {}", self.paths)));
        }
        if self.steps < 100 {
            return Err(Error::Config(format!("need at least 100 steps per unit time, got {}", self.steps)));
        }
        Ok(())
    }

    fn rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        rng
    }

    fn grid(&self, t: f64) -> (usize, f64) {
        let n = ((self.steps as f64 * t).ceil() as usize).max(1);
        (n, t / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub paths: usize,
}

impl McEstimate {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = pairwise_sum(values) / n;
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&sq) / (n - 1.0).max(1.0);
        Self { estimate: mean, std_error: (var / n).sqrt(), paths: values.len() }
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.std_error
    }
}

pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn boundary_on_grid(b: &Boundary, n: usize, dt: f64, t: f64) -> Result<Vec<f64>> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    (0..=n).map(|k| b.eval(if k == n { t } else { k as f64 * dt })).collect()
}

/// Probability that a Brownian bridge over `dt` between two points below a
/// linear segment touches it.
#[inline]
fn crossing_probability(gap_left: f64, gap_right: f64, dt: f64) -> f64 {
    (-2.0 * gap_left * gap_right / dt).exp()
}

/// `P(τ ≤ t)` for Brownian motion from 0. With bridge correction each path
/// contributes the conditional probability that it crossed given the
/// simulated grid values.
pub fn mc_fpt_cdf(b: &Boundary, t: f64, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let (n, dt) = cfg.grid(t);
    let bv = boundary_on_grid(b, n, dt, t)?;
    let sd = dt.sqrt();
    let values: Vec<f64> = (0..cfg.paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = cfg.rng(path);
            let mut x = 0.0;
            let mut survive = 1.0;
            for k in 1..=n {
                let z: f64 = rng.sample(StandardNormal);
                let next = x + sd * z;
                if next >= bv[k] {
                    return 1.0;
                }
                if cfg.bridge_correction {
                    survive *= 1.0 - crossing_probability(bv[k - 1] - x, bv[k] - next, dt);
                }
                x = next;
            }
            1.0 - survive
        })
        .collect();
    Ok(McEstimate::from_values(&values))
}

fn check_endpoint(b: &Boundary, t0: f64, x0: f64) -> Result<()> {
    let bt0 = b.eval(t0)?;
    if !(x0.is_finite() && x0 < bt0) {
        return Err(Error::Domain(format!("x0 = {x0} must lie below b(t0) = {bt0}")));
    }
    Ok(())
}

/// Grid values of a Brownian bridge from `(0, 0)` to `(t0, x0)`.
fn bridge_path(rng: &mut ChaCha8Rng, n: usize, dt: f64, t0: f64, x0: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(0.0);
    let mut x = 0.0;
    for k in 1..n {
        let rem = t0 - (k - 1) as f64 * dt;
        let mean = x + (x0 - x) * dt / rem;
        let var = (dt * (rem - dt) / rem).max(0.0);
        let z: f64 = rng.sample(StandardNormal);
        x = mean + var.sqrt() * z;
        out.push(x);
    }
    out.push(x0);
}

/// `P(τ ≤ t0 | W_{t0} = x0)`, which equals `r(t0, x0)`.
pub fn mc_conditional_hit(b: &Boundary, t0: f64, x0: f64, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    check_endpoint(b, t0, x0)?;
    let (n, dt) = cfg.grid(t0);
    let bv = boundary_on_grid(b, n, dt, t0)?;
    let values: Vec<f64> = (0..cfg.paths)
        .into_par_iter()
        .map_init(Vec::new, |path_buf, path| {
            let mut rng = cfg.rng(path);
            bridge_path(&mut rng, n, dt, t0, x0, path_buf);
            let mut survive = 1.0;
            for k in 1..=n {
                if path_buf[k] >= bv[k] {
                    return 1.0;
                }
                if cfg.bridge_correction {
                    survive *= 1.0 - crossing_probability(bv[k - 1] - path_buf[k - 1], bv[k] - path_buf[k], dt);
                }
            }
            1.0 - survive
        })
        .collect();
    Ok(McEstimate::from_values(&values))
}

/// Distribution of the last time before `t0` at which a bridge to
/// `(t0, x0)` touches the boundary. Paths that never touch it are counted
/// in `non_crossing` and not in the bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LastPassageHistogram {
    pub t0: f64,
    pub edges: Vec<f64>,
    pub mass: Vec<f64>,
    pub non_crossing: f64,
    pub paths: usize,
}

impl LastPassageHistogram {
    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.mass)
    }

    /// Mass on `(lo, hi]` counting whole bins whose midpoint lies inside.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        (0..self.bins())
            .filter(|&j| {
                let mid = 0.5 * (self.edges[j] + self.edges[j + 1]);
                mid > lo && mid <= hi
            })
            .map(|j| self.mass[j])
            .sum()
    }

    /// `Σ_j mass_j r_θ(t_j, b(t_j))` at bin midpoints, with its standard error.
    pub fn moment(&self, b: &Boundary, theta: f64) -> Result<McEstimate> {
        let mut m1 = Vec::with_capacity(self.bins());
        let mut m2 = Vec::with_capacity(self.bins());
        for j in 0..self.bins() {
            let t = 0.5 * (self.edges[j] + self.edges[j + 1]);
            let g = log_kernel(t, b.eval(t)?, theta).exp();
            m1.push(self.mass[j] * g);
            m2.push(self.mass[j] * g * g);
        }
        let est = pairwise_sum(&m1);
        let var = (pairwise_sum(&m2) - est * est).max(0.0);
        Ok(McEstimate { estimate: est, std_error: (var / self.paths as f64).sqrt(), paths: self.paths })
    }
}

/// Does the bridge over `[tl, tr]` between `xl` and `xr` touch `b`?
#[inline]
fn step_crosses(rng: &mut ChaCha8Rng, xl: f64, bl: f64, xr: f64, br: f64, dt: f64) -> bool {
    if xl >= bl || xr >= br {
        return true;
    }
    let u: f64 = rng.random();
    u < crossing_probability(bl - xl, br - xr, dt)
}

pub fn mc_last_passage(b: &Boundary, t0: f64, x0: f64, cfg: &McConfig, bins: usize) -> Result<LastPassageHistogram> {
    cfg.validate()?;
    check_endpoint(b, t0, x0)?;
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let (n, dt) = cfg.grid(t0);
    let bv = boundary_on_grid(b, n, dt, t0)?;
    let times: Vec<f64> = (0..=n).map(|k| if k == n { t0 } else { k as f64 * dt }).collect();
    let passages: Vec<Option<f64>> = (0..cfg.paths)
        .into_par_iter()
        .map_init(Vec::new, |path_buf, path| -> Result<Option<f64>> {
            let mut rng = cfg.rng(path);
            bridge_path(&mut rng, n, dt, t0, x0, path_buf);
            for k in (1..=n).rev() {
                let (xl, xr) = (path_buf[k - 1], path_buf[k]);
                if !step_crosses(&mut rng, xl, bv[k - 1], xr, bv[k], dt) {
                    continue;
                }
                // one bisection level: keep the right half if it crosses
                let (tl, tr) = (times[k - 1], times[k]);
                let tm = 0.5 * (tl + tr);
                let z: f64 = rng.sample(StandardNormal);
                let xm = 0.5 * (xl + xr) + 0.5 * (tr - tl).sqrt() * z;
                let bm = b.eval(tm)?;
                let right = step_crosses(&mut rng, xm, bm, xr, bv[k], tr - tm);
                let sigma = if right { 0.5 * (tm + tr) } else { 0.5 * (tl + tm) };
                return Ok(Some(sigma));
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut counts = vec![0usize; bins];
    let mut missing = 0usize;
    for p in &passages {
        match p {
            Some(s) => {
                let j = ((s / t0 * bins as f64).ceil() as usize).clamp(1, bins) - 1;
                counts[j] += 1;
            }
            None => missing += 1,
        }
    }
    let total = cfg.paths as f64;
    Ok(LastPassageHistogram {
        t0,
        edges: (0..=bins).map(|j| if j == bins { t0 } else { t0 * j as f64 / bins as f64 }).collect(),
        mass: counts.iter().map(|&c| c as f64 / total).collect(),
        non_crossing: missing as f64 / total,
        paths: cfg.paths,
    })
}
