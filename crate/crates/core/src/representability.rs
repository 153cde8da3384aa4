//! Verdict on whether a boundary admits a representing measure, assembled
//! from the four optimal values, the λ mass near `t0` and the ζ certificate.

use serde::{Deserialize, Serialize};

use crate::cutting_plane::{solve_program, FourResults, ProblemSpec, Program, ProgramResult};
use crate::error::{Error, Result};
use crate::fpt::{zeta_certificate, ZetaCertificate};

pub const DEFAULT_REP_TOL: f64 = 1e-4;
pub const DEFAULT_MASS_TOL: f64 = 1e-3;
const CERTIFICATE_POINTS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Representable,
    NotRepresentable,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Representable => "representable",
            Verdict::NotRepresentable => "not_representable",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentabilityReport {
    pub d1: f64,
    pub p1: f64,
    pub d2: f64,
    pub p2: f64,
    /// `|p2 - d1|`
    pub cross_gap: f64,
    /// `(|p1 - d1|, |p2 - d2|)`
    pub within_gaps: (f64, f64),
    /// mass of the D2 solution on `((n_λ-1)t0/n_λ, t0]`
    pub lambda2_tail_mass: f64,
    /// weight of the P1 solution at `t0`, reported only
    pub lambda1_t0_mass: f64,
    /// certificate of whichever μ solution has the smaller bound
    pub zeta: ZetaCertificate,
    pub zeta_from: Program,
    /// `d1 ≤ p1`, `d2 ≤ p2` and `d1 ≤ p2` within `chain_tol`
    pub chain_holds: bool,
    pub chain_tol: f64,
    pub rep_tol: f64,
    pub mass_tol: f64,
    pub verdict: Verdict,
}

/// How far the optimal value of an unconverged solve may sit on the wrong
/// side of the true value, judged from its residual constraint violation.
pub fn value_slack(r: &ProgramResult) -> f64 {
    let v = r.final_violation();
    if !v.is_finite() {
        return f64::INFINITY;
    }
    let excess = if r.which.satisfied(v, 0.0) { 0.0 } else { v.abs() };
    r.optimal_value.abs() * excess
}

/// Tolerance for the weak-duality comparison `lo ≤ hi`.
pub fn chain_tolerance(lo: &ProgramResult, hi: &ProgramResult) -> f64 {
    lo.spec.violation_tol * (1.0 + hi.optimal_value.abs()) + value_slack(lo) + value_slack(hi)
}

/// Mass a λ solution puts on the last atom cell `((n_λ-1)t0/n_λ, t0]`.
pub fn tail_mass(r: &ProgramResult) -> f64 {
    let s = &r.spec;
    r.measure.restrict_mass((s.n_lambda - 1) as f64 * s.t0 / s.n_lambda as f64, s.t0)
}

pub fn assess(spec: &ProblemSpec, results: &FourResults, rep_tol: f64, mass_tol: f64) -> Result<RepresentabilityReport> {
    for p in Program::ALL {
        let r = results.get(p);
        if r.which != p || r.spec != *spec {
            return Err(Error::MismatchedSpecs);
        }
    }
    if !(rep_tol > 0.0 && mass_tol >= 0.0) {
        return Err(Error::Config("tolerances must be positive".into()));
    }
    let [d1, p1, d2, p2] = results.values();
    let chains = [(&results.d1, &results.p1), (&results.d2, &results.p2), (&results.d1, &results.p2)];
    let chain_tol = chains.iter().map(|(a, b)| chain_tolerance(a, b)).fold(0.0, f64::max);
    let chain_holds = chains.iter().all(|(a, b)| a.optimal_value <= b.optimal_value + chain_tolerance(a, b));

    let z1 = zeta_certificate(&results.d1.measure, &spec.boundary, spec.t0, CERTIFICATE_POINTS)?;
    let z2 = zeta_certificate(&results.p2.measure, &spec.boundary, spec.t0, CERTIFICATE_POINTS)?;
    let (zeta, zeta_from) =
        if z2.sup_error_bound() < z1.sup_error_bound() { (z2, Program::P2) } else { (z1, Program::D1) };

    let cross_gap = (p2 - d1).abs();
    let lambda2_tail_mass = tail_mass(&results.d2);
    let scale = 1.0 + p2.abs();
    let verdict = if cross_gap <= rep_tol * scale && lambda2_tail_mass > mass_tol {
        Verdict::Representable
    } else if cross_gap > 10.0 * rep_tol * scale {
        Verdict::NotRepresentable
    } else {
        Verdict::Inconclusive
    };
    Ok(RepresentabilityReport {
        d1,
        p1,
        d2,
        p2,
        cross_gap,
        within_gaps: ((p1 - d1).abs(), (p2 - d2).abs()),
        lambda2_tail_mass,
        lambda1_t0_mass: results.p1.measure.weight_at(spec.t0),
        zeta,
        zeta_from,
        chain_holds,
        chain_tol,
        rep_tol,
        mass_tol,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailMassRow {
    pub n_lambda: usize,
    pub tail_mass: f64,
    pub d2: f64,
    pub converged: bool,
}

/// Solves D2 for each grid size and records the mass near `t0`.
pub fn tail_mass_sweep(spec: &ProblemSpec, n_lambda_list: &[usize]) -> Result<Vec<TailMassRow>> {
    n_lambda_list
        .iter()
        .map(|&n_lambda| {
            let s = ProblemSpec { n_lambda, ..spec.clone() };
            let r = solve_program(&s, Program::D2)?;
            Ok(TailMassRow { n_lambda, tail_mass: tail_mass(&r), d2: r.optimal_value, converged: r.converged })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Boundary;
    use crate::cutting_plane::solve_all;

    fn report(b: Boundary, offset: f64) -> RepresentabilityReport {
        let spec = ProblemSpec::standard(b).unwrap().with_x0_offset(offset).unwrap();
        let r = solve_all(&spec).unwrap();
        assess(&spec, &r, DEFAULT_REP_TOL, DEFAULT_MASS_TOL).unwrap()
    }

    #[test]
    fn linear_is_representable_close_to_the_boundary() {
        let r = report(Boundary::linear(1.0, 1.0).unwrap(), 0.1);
        assert!(r.cross_gap < 1e-9 && r.chain_holds);
        assert!(r.lambda2_tail_mass > 0.4);
        assert_eq!(r.verdict, Verdict::Representable);
    }

    #[test]
    fn linear_tail_mass_is_capped_far_from_the_boundary() {
        // λ(t0) r_θ(t0, b(t0)) ≤ r_θ(t0, x0) at θ = 2b(0) + l_θ caps the t0 weight
        let spec = ProblemSpec::standard(Boundary::linear(1.0, 1.0).unwrap()).unwrap();
        let r = report(spec.boundary.clone(), 1.0);
        assert!(r.cross_gap < 1e-9);
        let cap = (-(spec.theta_min() + spec.l_theta) * 1.0f64).exp();
        assert!(r.lambda2_tail_mass <= cap * (1.0 + 1e-9) && cap < DEFAULT_MASS_TOL);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn quadratic_gap_is_large() {
        let r = report(Boundary::quadratic(1.0).unwrap(), 1.0);
        assert!(r.cross_gap > 0.5);
        assert_eq!(r.verdict, Verdict::NotRepresentable);
        assert_eq!(r.zeta_from, Program::P2);
    }

    #[test]
    fn sqrt_is_representable_close_to_the_boundary() {
        let r = report(Boundary::sqrt_shift(1.0).unwrap(), 0.1);
        assert!(r.lambda2_tail_mass > 0.15);
        assert_eq!(r.verdict, Verdict::Representable);
    }

    #[test]
    fn rejects_mismatched_results() {
        let spec = ProblemSpec::standard(Boundary::linear(1.0, 1.0).unwrap()).unwrap();
        let mut r = solve_all(&spec).unwrap();
        assert!(assess(&spec, &r, 0.0, 1e-3).is_err());
        r.p1 = r.d1.clone();
        assert!(matches!(assess(&spec, &r, 1e-4, 1e-3), Err(Error::MismatchedSpecs)));
        let other = ProblemSpec { n: 40, ..spec.clone() };
        let r = solve_all(&spec).unwrap();
        assert!(matches!(assess(&other, &r, 1e-4, 1e-3), Err(Error::MismatchedSpecs)));
    }

    #[test]
    fn sweep_reports_each_grid() {
        let spec = ProblemSpec::standard(Boundary::quadratic(1.0).unwrap()).unwrap().with_x0_offset(0.1).unwrap();
        let rows = tail_mass_sweep(&spec, &[100, 200]).unwrap();
        assert_eq!(rows.iter().map(|r| r.n_lambda).collect::<Vec<_>>(), [100, 200]);
        assert!(rows.iter().all(|r| r.tail_mass < 1e-3));
    }
}
