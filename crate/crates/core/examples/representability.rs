//! Verdicts for the catalogue, close to the boundary where the λ mass test
//! has room to detect a representer.

use fpt_images::{assess, solve_all, Boundary, ProblemSpec};

fn main() -> fpt_images::Result<()> {
    let catalogue = [
        Boundary::linear(1.0, 1.0)?,
        Boundary::sqrt_shift(1.0)?,
        Boundary::log_shift(2.0)?,
        Boundary::quadratic(1.0)?,
    ];
    println!("{:<12} {:>10} {:>10} {:>8}  verdict", "boundary", "gap", "tail", "chain");
    for b in catalogue {
        let spec = ProblemSpec::standard(b.clone())?.with_x0_offset(0.1)?;
        let r = solve_all(&spec)?;
        let rep = assess(&spec, &r, 1e-4, 1e-3)?;
        println!(
            "{:<12} {:>10.2e} {:>10.4} {:>8}  {}",
            b.label(),
            rep.cross_gap,
            rep.lambda2_tail_mass,
            rep.chain_holds,
            rep.verdict
        );
    }
    Ok(())
}
