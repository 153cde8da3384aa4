//! First-passage distribution through `1 + t` from the recovered measure,
//! against the closed form.

use fpt_images::{bachelier_levy, solve_program, Boundary, FptCurve, ProblemSpec, Program};

fn main() -> fpt_images::Result<()> {
    let b = Boundary::linear(1.0, 1.0)?;
    let spec = ProblemSpec::standard(b.clone())?;
    let p2 = solve_program(&spec, Program::P2)?;
    let curve = FptCurve::from_measure(&p2.measure, &b, spec.t0, 10, 2048)?;
    println!("certified sup error {:.3e}", curve.sup_error_bound);
    println!("\n    t         F(t)   closed form     f(t)");
    for ((t, f), d) in curve.times.iter().zip(&curve.cdf).zip(&curve.density) {
        println!("{t:5.2} {f:12.9} {:12.9} {d:9.6}", bachelier_levy(1.0, 1.0, *t)?);
    }
    Ok(())
}
