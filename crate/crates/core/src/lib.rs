//! Representing measures for the inverse method of images.
//!
//! Given a one-sided boundary `b` with `b(0) > 0`, the crate searches for a
//! nonnegative measure `μ` on `[2 b(0), ∞)` whose image kernel
//! `r_μ(t, x) = ∫ exp(-θ²/(2t) + θx/t) μ(dθ)` equals one along the boundary.
//! Such a measure makes the first-passage-time distribution of Brownian
//! motion explicit.
//!
//! The search is posed as four infinite linear programs (two dual pairs),
//! each solved by a cutting-plane loop over a dense simplex:
//!
//! | program | variable | objective | constraint family |
//! |---------|----------|-----------|-------------------|
//! | `D1` | μ on θ | max `r_μ(t0, x0)` | `r_μ(t, b(t)) ≤ 1` for `t ∈ (0, t0]` |
//! | `P2` | μ on θ | min `r_μ(t0, x0)` | `r_μ(t, b(t)) ≥ 1` for `t ∈ (0, t0]` |
//! | `P1` | λ on t | min `‖λ‖` | `∫ r_θ(t, b(t)) λ(dt) ≥ r_θ(t0, x0)` for θ |
//! | `D2` | λ on t | max `‖λ‖` | `∫ r_θ(t, b(t)) λ(dt) ≤ r_θ(t0, x0)` for θ |
//!
//! Agreement of the optimal values certifies representability, and the
//! measure's deviation from `r = 1` bounds the sup-norm error of the
//! reconstructed distribution function. An independent Monte Carlo engine
//! cross-checks both.
//!
//! ```
//! use fpt_images::{Boundary, ProblemSpec, Program, solve_program};
//!
//! let spec = ProblemSpec::standard(Boundary::linear(1.0, 1.0).unwrap()).unwrap();
//! let d1 = solve_program(&spec, Program::D1).unwrap();
//! assert!((d1.optimal_value - (-2.0f64).exp()).abs() < 1e-9);
//! ```

// `!(x > 0.0)` is how NaN gets rejected alongside nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod cli;
pub mod cutting_plane;
pub mod error;
pub mod fpt;
pub mod kernel;
pub mod lp;
pub mod mc;
pub mod measure;
pub mod representability;
pub mod search;
mod serde_util;

pub use boundary::{concavity_check, forward_images, limit_at_zero, Boundary, BoundaryKind};
pub use cutting_plane::{
    find_worst_cut, slackness_report, solve_all, solve_lambda_program, solve_mu_program,
    solve_program, theta_grid, CutRecord, CutState, FourResults, ProblemSpec, Program,
    ProgramResult, SlacknessReport,
};
pub use error::{Error, Result};
pub use fpt::{
    bachelier_levy, cdf_from_measure, density_from_measure, zeta_certificate, FptCurve,
    ZetaCertificate,
};
pub use kernel::{log_r_ratio, log_r_theta, norm_cdf, norm_pdf, KernelPoint};
pub use lp::{solve_lp, DenseLp, LpSolution, LpStatus, RowSense, Sense};
pub use mc::{
    mc_conditional_hit, mc_fpt_cdf, mc_last_passage, LastPassageHistogram, McConfig, McEstimate,
};
pub use measure::AtomicMeasure;
pub use representability::{assess, tail_mass_sweep, RepresentabilityReport, TailMassRow, Verdict};
