//! The four discretized programs and their cutting-plane solver.
//!
//! μ-programs put atoms on the θ-grid `2b(0) + (i-1)l/n` and add cuts in
//! time; λ-programs put atoms on `j·t0/n_λ` and add cuts in θ. Every LP is
//! assembled in log space and column-scaled before leaving log space, so
//! kernel entries that differ by dozens of orders of magnitude never meet in
//! the same floating-point column.

use serde::{Deserialize, Serialize};

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::kernel::{log_kernel, log_kernel_rise};
use crate::lp::{solve_lp, DenseLp, RowSense, Sense};
use crate::measure::{log_sum_exp, AtomicMeasure};
use crate::search::{geometric_grid, scan_refine, uniform_grid, Extremum};

/// Ratio between the smallest and largest time of the cut scan.
pub const T_SCAN_FLOOR: f64 = 1e-6;
/// Relative location tolerance of the golden-section refinement.
pub const REFINE_TOL: f64 = 1e-10;
/// Cuts closer than this to an existing cut stop the loop.
pub const DUPLICATE_CUT_TOL: f64 = 1e-12;
/// Relative objective bonus of the atom at `t0` in D2. It only breaks ties
/// between optimal solutions and moves the value by at most this fraction.
pub const TAIL_PREFERENCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub boundary: Boundary,
    pub t0: f64,
    pub x0: f64,
    /// number of θ atoms for μ-programs
    pub n: usize,
    /// length of the θ atom grid
    pub l: f64,
    /// number of time atoms for λ-programs
    pub n_lambda: usize,
    /// length of the θ window searched for λ-program cuts
    pub l_theta: f64,
    pub k_max: usize,
    pub violation_tol: f64,
    pub scan_points: usize,
}

impl ProblemSpec {
    /// Default settings: `t0 = 1`, `x0 = b(1) - 1`, 100 atoms on a grid of
    /// length 5 for both families, at most 20 iterations.
    pub fn standard(boundary: Boundary) -> Result<Self> {
        let x0 = boundary.eval(1.0)? - 1.0;
        let spec = Self {
            boundary,
            t0: 1.0,
            x0,
            n: 100,
            l: 5.0,
            n_lambda: 100,
            l_theta: 5.0,
            k_max: 20,
            violation_tol: 1e-9,
            scan_points: 2048,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Moves the evaluation point to `x0 = b(t0) - delta`.
    pub fn with_x0_offset(mut self, delta: f64) -> Result<Self> {
        self.x0 = self.boundary.eval(self.t0)? - delta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return bad(format!("t0 must be positive, got {}", self.t0));
        }
        if self.t0 > self.boundary.horizon() {
            return bad(format!("t0 = {} exceeds the boundary table ending at {}", self.t0, self.boundary.horizon()));
        }
        let bt0 = self.boundary.eval(self.t0)?;
        if !(self.x0.is_finite() && self.x0 < bt0) {
            return bad(format!("x0 = {} must lie below b(t0) = {bt0}", self.x0));
        }
        if self.n < 2 || self.n_lambda < 2 {
            return bad(format!("need at least two atoms, got n = {}, n_lambda = {}", self.n, self.n_lambda));
        }
        if !(self.l.is_finite() && self.l > 0.0 && self.l_theta.is_finite() && self.l_theta > 0.0) {
            return bad("grid lengths must be positive".into());
        }
        if self.k_max < 1 {
            return bad("k_max must be at least 1".into());
        }
        if !(self.violation_tol.is_finite() && self.violation_tol > 0.0) {
            return bad("violation tolerance must be positive".into());
        }
        if self.scan_points < 16 {
            return bad(format!("scan needs at least 16 points, got {}", self.scan_points));
        }
        Ok(())
    }

    pub fn theta_min(&self) -> f64 {
        2.0 * self.boundary.b0()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Program {
    /// maximise `∫ r_θ(t0,x0) μ(dθ)` with `r_μ(t,b(t)) ≤ 1`
    D1,
    /// minimise `∫ r_θ(t0,x0) μ(dθ)` with `r_μ(t,b(t)) ≥ 1`
    P2,
    /// minimise `‖λ‖` with `∫ r_θ(t,b(t)) λ(dt) ≥ r_θ(t0,x0)`
    P1,
    /// maximise `‖λ‖` with `∫ r_θ(t,b(t)) λ(dt) ≤ r_θ(t0,x0)`
    D2,
}

impl Program {
    pub const ALL: [Program; 4] = [Program::D1, Program::P1, Program::D2, Program::P2];

    /// True for programs over measures in θ.
    pub fn is_mu(self) -> bool {
        matches!(self, Program::D1 | Program::P2)
    }

    pub fn sense(self) -> Sense {
        match self {
            Program::D1 | Program::D2 => Sense::Maximize,
            Program::P1 | Program::P2 => Sense::Minimize,
        }
    }

    pub fn row_sense(self) -> RowSense {
        match self {
            Program::D1 | Program::D2 => RowSense::Le,
            Program::P1 | Program::P2 => RowSense::Ge,
        }
    }

    /// The formal dual of this program.
    pub fn partner(self) -> Program {
        match self {
            Program::D1 => Program::P1,
            Program::P1 => Program::D1,
            Program::D2 => Program::P2,
            Program::P2 => Program::D2,
        }
    }

    fn extremum(self) -> Extremum {
        match self.row_sense() {
            RowSense::Le => Extremum::Max,
            RowSense::Ge => Extremum::Min,
        }
    }

    /// Whether a signed violation (constraint minus bound) is acceptable.
    pub fn satisfied(self, violation: f64, tol: f64) -> bool {
        match self.row_sense() {
            RowSense::Le => violation <= tol,
            RowSense::Ge => violation >= -tol,
        }
    }
}

impl std::fmt::Display for Program {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Program::D1 => "D1",
            Program::P2 => "P2",
            Program::P1 => "P1",
            Program::D2 => "D2",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub k: usize,
    pub cut_location: f64,
    pub violation: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CutState {
    /// constraint locations in the order they were added
    pub gamma: Vec<f64>,
    pub history: Vec<CutRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramResult {
    pub spec: ProblemSpec,
    pub which: Program,
    pub optimal_value: f64,
    pub measure: AtomicMeasure,
    pub cut_state: CutState,
    pub converged: bool,
    /// Worst signed violation just beyond the θ window (λ-programs only).
    pub tail_violation: Option<f64>,
}

impl ProgramResult {
    pub fn final_violation(&self) -> f64 {
        self.cut_state.history.last().map(|r| r.violation).unwrap_or(f64::NAN)
    }
}

/// Atom locations `2b(0) + (i-1)l/n`, `i = 1..n`.
pub fn theta_grid(spec: &ProblemSpec) -> Vec<f64> {
    let start = spec.theta_min();
    (0..spec.n).map(|i| start + i as f64 * spec.l / spec.n as f64).collect()
}

/// Atom locations `j·t0/n_λ`, `j = 1..n_λ`.
pub fn lambda_grid(spec: &ProblemSpec) -> Vec<f64> {
    (1..=spec.n_lambda).map(|j| j as f64 * spec.t0 / spec.n_lambda as f64).collect()
}

/// `log r_μ(t, b(t))`.
pub fn log_mu_constraint(mu: &AtomicMeasure, b: &Boundary, t: f64) -> Result<f64> {
    let rise = b.rise(t)?;
    Ok(mu.log_sum(|theta| log_kernel_rise(t, b.b0(), rise, theta)))
}

/// `log( Σ_j λ_j r_θ(t_j, b(t_j)) / r_θ(t0, x0) )`.
pub fn log_lambda_constraint(lambda: &AtomicMeasure, spec: &ProblemSpec, theta: f64) -> Result<f64> {
    let anchor = log_kernel(spec.t0, spec.x0, theta);
    let terms = lambda
        .iter()
        .map(|(t, w)| Ok(w.ln() + spec.boundary.log_kernel_on(t, theta)? - anchor))
        .collect::<Result<Vec<f64>>>()?;
    Ok(log_sum_exp(terms))
}

fn scan_grid(spec: &ProblemSpec, which: Program) -> Vec<f64> {
    if which.is_mu() {
        geometric_grid(spec.t0 * T_SCAN_FLOOR, spec.t0, spec.scan_points)
    } else {
        let lo = spec.theta_min();
        uniform_grid(lo, lo + spec.l_theta, spec.scan_points)
    }
}

fn constraint_fn<'a>(weights: &'a AtomicMeasure, spec: &'a ProblemSpec, which: Program) -> impl Fn(f64) -> f64 + Sync + 'a {
    move |s: f64| {
        let v = if which.is_mu() {
            log_mu_constraint(weights, &spec.boundary, s)
        } else {
            log_lambda_constraint(weights, spec, s)
        };
        v.map(f64::exp).unwrap_or(f64::NAN)
    }
}

/// Location of the most violated constraint for the current weights and the
/// signed violation there (constraint function minus its bound of 1).
pub fn find_worst_cut(weights: &AtomicMeasure, spec: &ProblemSpec, which: Program) -> Result<(f64, f64)> {
    let grid = scan_grid(spec, which);
    let f = constraint_fn(weights, spec, which);
    let (loc, value) = scan_refine(&f, &grid, which.extremum(), REFINE_TOL);
    if value.is_nan() {
        return Err(Error::NonFinite(format!("constraint function of {which} at {loc}")));
    }
    Ok((loc, value - 1.0))
}

fn log_row(spec: &ProblemSpec, which: Program, atoms: &[f64], cut: f64) -> Result<Vec<f64>> {
    if which.is_mu() {
        atoms.iter().map(|&theta| spec.boundary.log_kernel_on(cut, theta)).collect()
    } else {
        let anchor = log_kernel(spec.t0, spec.x0, cut);
        atoms.iter().map(|&t| Ok(spec.boundary.log_kernel_on(t, cut)? - anchor)).collect()
    }
}

/// Runs the cutting-plane loop for any of the four programs.
pub fn solve_program(spec: &ProblemSpec, which: Program) -> Result<ProgramResult> {
    spec.validate()?;
    let (atoms, first_cut) = if which.is_mu() {
        (theta_grid(spec), spec.t0)
    } else {
        (lambda_grid(spec), spec.theta_min())
    };
    let mut log_cost: Vec<f64> = if which.is_mu() {
        atoms.iter().map(|&theta| log_kernel(spec.t0, spec.x0, theta)).collect()
    } else {
        vec![0.0; atoms.len()]
    };
    if which == Program::D2 {
        // among optimal λ prefer those charging t0
        *log_cost.last_mut().unwrap() = TAIL_PREFERENCE.ln_1p();
    }

    let mut state = CutState { gamma: vec![first_cut], history: Vec::new() };
    let mut log_rows = vec![log_row(spec, which, &atoms, first_cut)?];
    let mut converged = false;
    let mut optimal_value = f64::NAN;
    let mut measure = AtomicMeasure::empty();

    for k in 1..=spec.k_max {
        let log_scale: Vec<f64> = (0..atoms.len())
            .map(|i| log_rows.iter().map(|r| r[i]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        if let Some(i) = log_scale.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite(format!("column {i} of {which} has no finite entry")));
        }
        let matrix: Vec<Vec<f64>> = log_rows
            .iter()
            .map(|r| r.iter().zip(&log_scale).map(|(v, s)| (v - s).exp()).collect())
            .collect();
        let cost: Vec<f64> = log_cost.iter().zip(&log_scale).map(|(c, s)| (c - s).exp()).collect();
        let m = matrix.len();
        let lp = DenseLp::new(which.sense(), cost, matrix, vec![1.0; m], vec![which.row_sense(); m])?;
        let sol = solve_lp(&lp);
        if !sol.is_optimal() {
            return Err(Error::Solver {
                program: which,
                iteration: k,
                status: sol.status.to_string(),
                gamma: state.gamma.clone(),
            });
        }
        let weights: Vec<f64> = sol.primal.iter().zip(&log_scale).map(|(z, s)| z * (-s).exp()).collect();
        optimal_value = if which.is_mu() { sol.objective_value } else { weights.iter().sum() };
        measure = AtomicMeasure::from_pairs(atoms.iter().copied().zip(weights))?;

        let (loc, violation) = find_worst_cut(&measure, spec, which)?;
        state.history.push(CutRecord { k, cut_location: loc, violation, objective: optimal_value });
        if which.satisfied(violation, spec.violation_tol) {
            converged = true;
            break;
        }
        let duplicate = state.gamma.iter().any(|&g| (g - loc).abs() <= DUPLICATE_CUT_TOL * g.abs().max(1.0));
        if duplicate || k == spec.k_max {
            break;
        }
        state.gamma.push(loc);
        log_rows.push(log_row(spec, which, &atoms, loc)?);
    }

    let tail_violation = if which.is_mu() { None } else { Some(tail_check(&measure, spec, which)?) };
    Ok(ProgramResult {
        spec: spec.clone(),
        which,
        optimal_value,
        measure,
        cut_state: state,
        converged,
        tail_violation,
    })
}

/// Worst signed violation of a λ-program constraint on θ beyond the window.
fn tail_check(lambda: &AtomicMeasure, spec: &ProblemSpec, which: Program) -> Result<f64> {
    let edge = spec.theta_min() + spec.l_theta;
    let probes = uniform_grid(edge, edge + spec.l_theta, 64);
    let mut worst = match which.extremum() {
        Extremum::Max => f64::NEG_INFINITY,
        Extremum::Min => f64::INFINITY,
    };
    for theta in probes {
        let v = log_lambda_constraint(lambda, spec, theta)?.exp() - 1.0;
        worst = match which.extremum() {
            Extremum::Max => worst.max(v),
            Extremum::Min => worst.min(v),
        };
    }
    Ok(worst)
}

pub fn solve_mu_program(spec: &ProblemSpec, which: Program) -> Result<ProgramResult> {
    if !which.is_mu() {
        return Err(Error::InvalidSpec(format!("{which} is not a program over θ")));
    }
    solve_program(spec, which)
}

pub fn solve_lambda_program(spec: &ProblemSpec, which: Program) -> Result<ProgramResult> {
    if which.is_mu() {
        return Err(Error::InvalidSpec(format!("{which} is not a program over t")));
    }
    solve_program(spec, which)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourResults {
    pub d1: ProgramResult,
    pub p1: ProgramResult,
    pub d2: ProgramResult,
    pub p2: ProgramResult,
}

impl FourResults {
    pub fn get(&self, which: Program) -> &ProgramResult {
        match which {
            Program::D1 => &self.d1,
            Program::P1 => &self.p1,
            Program::D2 => &self.d2,
            Program::P2 => &self.p2,
        }
    }

    /// Optimal values in the order d1, p1, d2, p2.
    pub fn values(&self) -> [f64; 4] {
        [self.d1.optimal_value, self.p1.optimal_value, self.d2.optimal_value, self.p2.optimal_value]
    }
}

/// Solves all four programs, concurrently where threads are available.
pub fn solve_all(spec: &ProblemSpec) -> Result<FourResults> {
    let ((d1, p2), (p1, d2)) = rayon::join(
        || rayon::join(|| solve_program(spec, Program::D1), || solve_program(spec, Program::P2)),
        || rayon::join(|| solve_program(spec, Program::P1), || solve_program(spec, Program::D2)),
    );
    Ok(FourResults { d1: d1?, p1: p1?, d2: d2?, p2: p2? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlacknessReport {
    /// `(t_j, |r_μ(t_j, b(t_j)) - 1|)` for every charged λ atom
    pub lambda_side: Vec<(f64, f64)>,
    /// `(θ_i, relative defect of the λ constraint at θ_i)` for every charged μ atom
    pub mu_side: Vec<(f64, f64)>,
    pub max_lambda_side: f64,
    pub max_mu_side: f64,
    /// no λ atom carries weight above the threshold
    pub degenerate: bool,
}

const SLACKNESS_WEIGHT: f64 = 1e-10;

/// Complementary slackness defects of a μ solution against its dual λ.
pub fn slackness_report(mu_result: &ProgramResult, lambda_result: &ProgramResult) -> Result<SlacknessReport> {
    if !mu_result.which.is_mu() || lambda_result.which != mu_result.which.partner() {
        return Err(Error::InvalidSpec(format!(
            "{} and {} are not a dual pair",
            mu_result.which, lambda_result.which
        )));
    }
    if mu_result.spec != lambda_result.spec {
        return Err(Error::MismatchedSpecs);
    }
    let spec = &mu_result.spec;
    let mu = &mu_result.measure;
    let lambda = &lambda_result.measure;
    let lambda_side = lambda
        .iter()
        .filter(|&(_, w)| w > SLACKNESS_WEIGHT)
        .map(|(t, _)| Ok((t, (log_mu_constraint(mu, &spec.boundary, t)?.exp() - 1.0).abs())))
        .collect::<Result<Vec<_>>>()?;
    let mu_side = mu
        .iter()
        .filter(|&(_, w)| w > SLACKNESS_WEIGHT)
        .map(|(theta, _)| Ok((theta, (log_lambda_constraint(lambda, spec, theta)?.exp() - 1.0).abs())))
        .collect::<Result<Vec<_>>>()?;
    let max = |v: &[(f64, f64)]| v.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(SlacknessReport {
        max_lambda_side: max(&lambda_side),
        max_mu_side: max(&mu_side),
        degenerate: lambda_side.is_empty(),
        lambda_side,
        mu_side,
    })
}
