//! Recover the image measure of a straight line and map it back.
//!
//! For `b(t) = 1 + t` the exact representer is the point mass `e^{-2} δ_2`.

use fpt_images::{forward_images, solve_program, Boundary, ProblemSpec, Program};

fn main() -> fpt_images::Result<()> {
    let spec = ProblemSpec::standard(Boundary::linear(1.0, 1.0)?)?;
    let d1 = solve_program(&spec, Program::D1)?;
    println!("D1 = {:.12} after {} cuts (e^-2 = {:.12})", d1.optimal_value, d1.cut_state.history.len(), (-2.0f64).exp());
    for (theta, w) in d1.measure.iter() {
        println!("  atom θ = {theta:.6}  weight {w:.12}");
    }
    println!("\n     t     b(t)   forward");
    for t in [0.01, 0.5, 1.0, 2.0, 3.0] {
        println!("{t:6.2} {:8.4} {:9.6}", 1.0 + t, forward_images(&d1.measure, t, 1e-13)?);
    }
    Ok(())
}
