//! Dense two-phase primal simplex for small inequality-form LPs.
//!
//! Problems have the shape `min|max cᵀa` subject to `G a ≥|≤ h` row-wise and
//! `a ≥ 0`. Columns and then rows are equilibrated by their largest absolute
//! entry before the tableau is built, which keeps kernel matrices whose
//! entries span dozens of orders of magnitude well conditioned. Pricing is
//! Dantzig's rule until too many degenerate pivots accumulate, then Bland's
//! rule for the rest of the solve. The optimal basis is re-solved with an LU
//! factorization so that primal and dual vectors satisfy their defining
//! equations to rounding.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    /// `g·a ≥ h`
    Ge,
    /// `g·a ≤ h`
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLp {
    sense: Sense,
    objective: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    row_sense: Vec<RowSense>,
}

impl DenseLp {
    pub fn new(
        sense: Sense,
        objective: Vec<f64>,
        matrix: Vec<Vec<f64>>,
        rhs: Vec<f64>,
        row_sense: Vec<RowSense>,
    ) -> Result<Self> {
        let n = objective.len();
        if matrix.len() != rhs.len() || matrix.len() != row_sense.len() {
            return Err(Error::InvalidLp(format!(
                "{} rows, {} right-hand sides, {} senses",
                matrix.len(),
                rhs.len(),
                row_sense.len()
            )));
        }
        if let Some(i) = matrix.iter().position(|row| row.len() != n) {
            return Err(Error::InvalidLp(format!("row {i} has {} entries, expected {n}", matrix[i].len())));
        }
        let all_finite = objective.iter().chain(rhs.iter()).chain(matrix.iter().flatten()).all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidLp("entries must be finite".into()));
        }
        Ok(Self { sense, objective, matrix, rhs, row_sense })
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn row_sense(&self) -> &[RowSense] {
        &self.row_sense
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    /// Phase one ended with this row's artificial variable still positive.
    Infeasible { row: usize },
    /// The entering column had no blocking row. Indices below `num_vars`
    /// are structural; `num_vars + i` is the slack of row `i`.
    Unbounded { column: usize },
    IterationLimit,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpStatus::Optimal => write!(f, "optimal"),
            LpStatus::Infeasible { row } => write!(f, "infeasible (row {row})"),
            LpStatus::Unbounded { column } => write!(f, "unbounded (column {column})"),
            LpStatus::IterationLimit => write!(f, "stopped at the iteration limit"),
        }
    }
}

/// Solution of a [`DenseLp`]. Duals follow the convention `hᵀy = cᵀa` at
/// optimality: for minimization `y ≥ 0` on `≥` rows and `y ≤ 0` on `≤` rows,
/// signs reversed for maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

const PIVOT_TOL: f64 = 1e-11;
const OPT_TOL: f64 = 1e-11;
const RATIO_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pricing {
    Dantzig,
    Bland,
}

struct Tableau {
    m: usize,
    cols: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    pricing: Pricing,
    degenerate: usize,
    degenerate_limit: usize,
    iterations: usize,
    max_iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded(usize),
    IterationLimit,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    fn set_costs(&mut self, costs: &[f64]) {
        self.reduced = costs.to_vec();
        for i in 0..self.m {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i * self.cols..(i + 1) * self.cols];
                for (d, &v) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * v;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.at(r, q);
        {
            let row = &mut self.a[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        self.rhs[r] /= p;
        let pivot_row: Vec<f64> = self.a[r * cols..(r + 1) * cols].to_vec();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.at(i, q);
            if f != 0.0 {
                let row = &mut self.a[i * cols..(i + 1) * cols];
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
                if self.rhs[i] < 0.0 && self.rhs[i] > -1e-13 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (d, &pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= f * pv;
            }
            self.reduced[q] = 0.0;
        }
        self.basis[r] = q;
    }

    fn run(&mut self, allowed: usize, opt_tol: f64) -> Outcome {
        let mut is_basic = vec![false; self.cols];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        loop {
            if self.iterations >= self.max_iterations {
                return Outcome::IterationLimit;
            }
            let entering = match self.pricing {
                Pricing::Dantzig => {
                    let mut best: Option<(usize, f64)> = None;
                    for j in 0..allowed {
                        let d = self.reduced[j];
                        if !is_basic[j] && d < -opt_tol && best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((j, d));
                        }
                    }
                    best.map(|(j, _)| j)
                }
                Pricing::Bland => (0..allowed).find(|&j| !is_basic[j] && self.reduced[j] < -opt_tol),
            };
            let Some(q) = entering else {
                return Outcome::Optimal;
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let v = self.at(i, q);
                if v <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / v;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= RATIO_TIE * best.abs().max(1.0);
                        let better = if tie {
                            match self.pricing {
                                Pricing::Bland => self.basis[i] < self.basis[r],
                                Pricing::Dantzig => v > self.at(r, q),
                            }
                        } else {
                            ratio < best
                        };
                        if better { Some((i, ratio)) } else { Some((r, best)) }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Outcome::Unbounded(q);
            };
            if ratio <= RATIO_TIE {
                self.degenerate += 1;
                if self.degenerate > self.degenerate_limit {
                    self.pricing = Pricing::Bland;
                }
            }
            is_basic[self.basis[r]] = false;
            is_basic[q] = true;
            self.pivot(r, q);
            self.iterations += 1;
        }
    }
}

/// Solves a dense LP with the two-phase primal simplex method.
pub fn solve_lp(p: &DenseLp) -> LpSolution {
    let n = p.num_vars();
    let m = p.num_rows();

    // column equilibration
    let col_scale: Vec<f64> = (0..n)
        .map(|j| {
            let s = p.matrix.iter().map(|row| row[j].abs()).fold(0.0, f64::max);
            if s > 0.0 { s } else { 1.0 }
        })
        .collect();
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let cost: Vec<f64> = (0..n).map(|j| sign * p.objective[j] / col_scale[j]).collect();

    // row equilibration and sign normalization so every rhs is nonnegative
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut row_factor = Vec::with_capacity(m);
    let mut senses = Vec::with_capacity(m);
    for i in 0..m {
        let scaled: Vec<f64> = (0..n).map(|j| p.matrix[i][j] / col_scale[j]).collect();
        let rho = scaled.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let rho = if rho > 0.0 { rho } else { 1.0 };
        let flip = if p.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        rows.push(scaled.iter().map(|v| flip * v / rho).collect());
        rhs.push(flip * p.rhs[i] / rho);
        row_factor.push(flip / rho);
        senses.push(match (p.row_sense[i], flip < 0.0) {
            (RowSense::Ge, false) | (RowSense::Le, true) => RowSense::Ge,
            _ => RowSense::Le,
        });
    }

    let ge_rows: Vec<usize> = (0..m).filter(|&i| senses[i] == RowSense::Ge).collect();
    let n_art = ge_rows.len();
    let cols = n + m + n_art;
    let mut a = vec![0.0; m * cols];
    let mut basis = vec![0usize; m];
    let mut identity_col = vec![0usize; m];
    let mut art = 0;
    for i in 0..m {
        a[i * cols..i * cols + n].copy_from_slice(&rows[i]);
        match senses[i] {
            RowSense::Le => {
                a[i * cols + n + i] = 1.0;
                basis[i] = n + i;
            }
            RowSense::Ge => {
                a[i * cols + n + i] = -1.0;
                a[i * cols + n + m + art] = 1.0;
                basis[i] = n + m + art;
                art += 1;
            }
        }
        identity_col[i] = basis[i];
    }
    let standard = a.clone();

    let mut tab = Tableau {
        m,
        cols,
        a,
        rhs: rhs.clone(),
        basis,
        reduced: vec![0.0; cols],
        pricing: Pricing::Dantzig,
        degenerate: 0,
        degenerate_limit: 5 * (m + n),
        iterations: 0,
        max_iterations: 100 * (m + n) + 1000,
    };

    let fail = |status: LpStatus, iterations: usize| LpSolution {
        status,
        primal: vec![0.0; n],
        dual: vec![0.0; m],
        objective_value: f64::NAN,
        iterations,
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        tab.set_costs(&phase1);
        match tab.run(n + m, OPT_TOL) {
            Outcome::Optimal => {}
            Outcome::IterationLimit => return fail(LpStatus::IterationLimit, tab.iterations),
            // phase one is bounded below by zero
            Outcome::Unbounded(_) => return fail(LpStatus::IterationLimit, tab.iterations),
        }
        let hmax = rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let infeasibility: f64 = (0..m).filter(|&i| tab.basis[i] >= n + m).map(|i| tab.rhs[i]).sum();
        if infeasibility > 1e-9 * (1.0 + hmax) {
            let row = (0..m)
                .filter(|&i| tab.basis[i] >= n + m)
                .max_by(|&i, &j| tab.rhs[i].total_cmp(&tab.rhs[j]))
                .map(|i| ge_rows[tab.basis[i] - n - m])
                .unwrap_or(0);
            return fail(LpStatus::Infeasible { row }, tab.iterations);
        }
        // drive remaining zero-level artificials out of the basis
        for i in 0..m {
            if tab.basis[i] < n + m {
                continue;
            }
            let candidate = (0..n + m)
                .filter(|&j| !tab.basis.contains(&j))
                .map(|j| (j, tab.at(i, j).abs()))
                .filter(|&(_, v)| v > 1e-9)
                .max_by(|x, y| x.1.total_cmp(&y.1));
            if let Some((j, _)) = candidate {
                tab.pivot(i, j);
            }
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(&cost);
    tab.set_costs(&phase2);
    let cmax = cost.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    match tab.run(n + m, OPT_TOL * cmax) {
        Outcome::Optimal => {}
        Outcome::IterationLimit => return fail(LpStatus::IterationLimit, tab.iterations),
        Outcome::Unbounded(q) => return fail(LpStatus::Unbounded { column: q }, tab.iterations),
    }

    // re-solve the optimal basis for accurate primal and dual vectors
    let mut z = vec![0.0; cols];
    let mut x_basic: Vec<f64> = tab.rhs.iter().map(|v| v.max(0.0)).collect();
    let mut y_std: Vec<f64> = (0..m).map(|i| -tab.reduced[identity_col[i]] + phase2[identity_col[i]]).collect();
    if m > 0 {
        let bmat = DMatrix::from_fn(m, m, |i, k| standard[i * cols + tab.basis[k]]);
        let lu = bmat.clone().lu();
        let h = DVector::from_column_slice(&rhs);
        let cb = DVector::from_iterator(m, tab.basis.iter().map(|&j| phase2[j]));
        if let (Some(xb), Some(y)) = (lu.solve(&h), bmat.transpose().lu().solve(&cb)) {
            let scale = 1.0 + x_basic.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let consistent = xb.iter().zip(&x_basic).all(|(p, t)| (p - t).abs() <= 1e-6 * scale);
            if consistent && xb.iter().all(|v| v.is_finite()) && y.iter().all(|v| v.is_finite()) {
                x_basic = xb.iter().map(|v| v.max(0.0)).collect();
                y_std = y.iter().copied().collect();
            }
        }
    }
    for (i, &b) in tab.basis.iter().enumerate() {
        z[b] = x_basic[i];
    }

    let primal: Vec<f64> = (0..n).map(|j| z[j] / col_scale[j]).collect();
    // `+ 0.0` turns a signed zero into 0
    let dual: Vec<f64> = (0..m).map(|i| sign * y_std[i] * row_factor[i] + 0.0).collect();
    let objective_value = p.objective.iter().zip(&primal).map(|(c, a)| c * a).sum();
    LpSolution { status: LpStatus::Optimal, primal, dual, objective_value, iterations: tab.iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use RowSense::{Ge, Le};

    fn lp(sense: Sense, c: &[f64], g: &[&[f64]], h: &[f64], s: &[RowSense]) -> DenseLp {
        DenseLp::new(sense, c.to_vec(), g.iter().map(|r| r.to_vec()).collect(), h.to_vec(), s.to_vec()).unwrap()
    }

    #[test]
    fn single_variable() {
        let sol = solve_lp(&lp(Sense::Minimize, &[1.0], &[&[1.0]], &[1.0], &[Ge]));
        assert!(sol.is_optimal());
        assert!((sol.primal[0] - 1.0).abs() < 1e-14);
        assert!((sol.objective_value - 1.0).abs() < 1e-14);
        assert!((sol.dual[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_variable_vertex() {
        let sol = solve_lp(&lp(Sense::Minimize, &[2.0, 3.0], &[&[1.0, 1.0]], &[2.0], &[Ge]));
        assert!(sol.is_optimal());
        assert!((sol.primal[0] - 2.0).abs() < 1e-14);
        assert!(sol.primal[1].abs() < 1e-14);
        assert!((sol.objective_value - 4.0).abs() < 1e-14);
    }

    #[test]
    fn first_cutting_plane_lp_for_linear_boundary() {
        let c = (-2.0f64).exp();
        let sol = solve_lp(&lp(Sense::Minimize, &[c], &[&[1.0]], &[1.0], &[Ge]));
        assert!((sol.primal[0] - 1.0).abs() < 1e-15);
        assert!((sol.objective_value - 0.1353352832).abs() < 1e-10);
    }

    #[test]
    fn maximization_with_dual() {
        // max x + 2y s.t. x + y ≤ 4, y ≤ 3, 2x + y ≥ 2 → (1, 3), value 7
        let p = lp(
            Sense::Maximize,
            &[1.0, 2.0],
            &[&[1.0, 1.0], &[0.0, 1.0], &[2.0, 1.0]],
            &[4.0, 3.0, 2.0],
            &[Le, Le, Ge],
        );
        let sol = solve_lp(&p);
        assert!(sol.is_optimal());
        assert!((sol.objective_value - 7.0).abs() < 1e-12);
        assert!((sol.primal[0] - 1.0).abs() < 1e-12 && (sol.primal[1] - 3.0).abs() < 1e-12);
        let dual_obj: f64 = p.rhs().iter().zip(&sol.dual).map(|(h, y)| h * y).sum();
        assert!((dual_obj - 7.0).abs() < 1e-12);
        assert!(sol.dual[0] >= 0.0 && sol.dual[1] >= 0.0 && sol.dual[2] <= 1e-14);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(Sense::Minimize, &[1.0], &[&[1.0], &[1.0]], &[2.0, 1.0], &[Ge, Le]);
        assert!(matches!(solve_lp(&p).status, LpStatus::Infeasible { .. }));
        let p = lp(Sense::Maximize, &[1.0, 0.0], &[&[0.0, 1.0]], &[1.0], &[Le]);
        assert_eq!(solve_lp(&p).status, LpStatus::Unbounded { column: 0 });
        let p = lp(Sense::Minimize, &[-1.0], &[], &[], &[]);
        assert!(matches!(solve_lp(&p).status, LpStatus::Unbounded { .. }));
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // min x s.t. -x ≤ -3 → x = 3
        let sol = solve_lp(&lp(Sense::Minimize, &[1.0], &[&[-1.0]], &[-3.0], &[Le]));
        assert!((sol.primal[0] - 3.0).abs() < 1e-14);
        assert!((sol.dual[0] * -3.0 - 3.0).abs() < 1e-14);
    }

    #[test]
    fn redundant_equal_rows() {
        let p = lp(
            Sense::Minimize,
            &[1.0, 1.0],
            &[&[1.0, 2.0], &[1.0, 2.0], &[2.0, 4.0]],
            &[2.0, 2.0, 4.0],
            &[Ge, Ge, Ge],
        );
        let sol = solve_lp(&p);
        assert!(sol.is_optimal());
        assert!((sol.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling LP, written as minimization
        let p = lp(
            Sense::Minimize,
            &[-0.75, 150.0, -0.02, 6.0],
            &[&[0.25, -60.0, -0.04, 9.0], &[0.5, -90.0, -0.02, 3.0], &[0.0, 0.0, 1.0, 0.0]],
            &[0.0, 0.0, 1.0],
            &[Le, Le, Le],
        );
        let sol = solve_lp(&p);
        assert!(sol.is_optimal());
        assert!((sol.objective_value + 0.05).abs() < 1e-12);
    }

    #[test]
    fn ill_scaled_kernel_columns() {
        // columns spanning e^-30 .. e^0, as in kernel matrices
        let w: Vec<f64> = (0..6).map(|k| (-6.0 * k as f64).exp()).collect();
        let row1: Vec<f64> = w.iter().map(|v| v * 2.0).collect();
        let row2: Vec<f64> = w.iter().enumerate().map(|(k, v)| v * (1.0 + k as f64)).collect();
        let p = DenseLp::new(Sense::Minimize, w.clone(), vec![row1, row2], vec![1.0, 1.0], vec![Ge, Ge]).unwrap();
        let sol = solve_lp(&p);
        assert!(sol.is_optimal());
        let dual_obj: f64 = sol.dual.iter().sum();
        assert!((dual_obj - sol.objective_value).abs() <= 1e-12 * sol.objective_value.abs());
    }

    #[test]
    fn rejects_malformed() {
        assert!(DenseLp::new(Sense::Minimize, vec![1.0], vec![vec![1.0, 2.0]], vec![1.0], vec![Ge]).is_err());
        assert!(DenseLp::new(Sense::Minimize, vec![1.0], vec![vec![1.0]], vec![], vec![Ge]).is_err());
        assert!(DenseLp::new(Sense::Minimize, vec![f64::NAN], vec![], vec![], vec![]).is_err());
    }
}
