//! Finite nonnegative atomic measures and their image kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::log_kernel;

/// Relative weight floor applied during canonicalization.
pub const WEIGHT_FLOOR: f64 = 1e-15;

/// A finite combination of point masses in canonical form: atoms strictly
/// increasing, weights positive, negligible weights removed.
///
/// Serializes as a JSON array of `[atom, weight]` pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct AtomicMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

/// `r_μ(t, x)` in linear scale alongside its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub log_value: f64,
}

impl AtomicMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a canonical measure from `(atom, weight)` pairs. Duplicate atoms
    /// are merged, zero and sub-floor weights dropped.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        for &(a, w) in &pairs {
            if !a.is_finite() || !w.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite atom ({a}, {w})")));
            }
            if w < 0.0 {
                return Err(Error::InvalidMeasure(format!("negative weight {w} at {a}")));
            }
        }
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));

        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (a, w) in pairs {
            match atoms.last() {
                Some(&last) if last == a => *weights.last_mut().unwrap() += w,
                _ => {
                    atoms.push(a);
                    weights.push(w);
                }
            }
        }

        let total: f64 = weights.iter().sum();
        let floor = WEIGHT_FLOOR * total;
        let (atoms, weights) = atoms
            .into_iter()
            .zip(weights)
            .filter(|&(_, w)| w > 0.0 && w >= floor)
            .unzip();
        Ok(Self { atoms, weights })
    }

    /// A single point mass.
    pub fn dirac(atom: f64, weight: f64) -> Result<Self> {
        Self::from_pairs([(atom, weight)])
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.weights.iter().copied())
    }

    /// `‖μ‖`, the sum of the weights.
    pub fn total_variation(&self) -> f64 {
        self.weights.iter().fold(0.0, |acc, w| acc + w)
    }

    /// Smallest atom carrying positive weight.
    pub fn smallest_atom(&self) -> Option<f64> {
        self.atoms.first().copied()
    }

    pub fn largest_atom(&self) -> Option<f64> {
        self.atoms.last().copied()
    }

    /// Weight of the atom at exactly `atom`, zero if absent.
    pub fn weight_at(&self, atom: f64) -> f64 {
        match self.atoms.binary_search_by(|a| a.total_cmp(&atom)) {
            Ok(i) => self.weights[i],
            Err(_) => 0.0,
        }
    }

    /// Mass carried by atoms in the half-open interval `(lo, hi]`.
    pub fn restrict_mass(&self, lo: f64, hi: f64) -> f64 {
        self.iter().filter(|&(a, _)| a > lo && a <= hi).map(|(_, w)| w).fold(0.0, |acc, w| acc + w)
    }

    /// `α μ`
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::from_pairs(self.iter().map(|(a, w)| (a, alpha * w)))
    }

    /// `μ + ν`
    pub fn sum(&self, other: &Self) -> Result<Self> {
        Self::from_pairs(self.iter().chain(other.iter()))
    }

    /// `r_μ(t, x) = Σ w_i exp(-θ_i²/(2t) + θ_i x/t)`, accumulated with a
    /// max-exponent shift.
    pub fn integrate_r(&self, t: f64, x: f64) -> Result<KernelValue> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("kernel time must be positive, got {t}")));
        }
        let log_value = self.log_sum(|theta| log_kernel(t, x, theta));
        Ok(KernelValue { value: log_value.exp(), log_value })
    }

    /// `log Σ w_i exp(f(θ_i))` with a max shift. Returns `-∞` for the empty
    /// measure.
    pub(crate) fn log_sum<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        log_sum_exp(self.iter().map(|(a, w)| w.ln() + f(a)))
    }
}

/// Stable `log Σ exp(e_i)`.
pub(crate) fn log_sum_exp<I: IntoIterator<Item = f64>>(exps: I) -> f64 {
    let exps: Vec<f64> = exps.into_iter().collect();
    let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = exps.iter().map(|e| (e - max).exp()).sum();
    max + s.ln()
}

impl TryFrom<Vec<(f64, f64)>> for AtomicMeasure {
    type Error = Error;

    fn try_from(pairs: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_pairs(pairs)
    }
}

impl From<AtomicMeasure> for Vec<(f64, f64)> {
    fn from(m: AtomicMeasure) -> Self {
        m.iter().collect()
    }
}
