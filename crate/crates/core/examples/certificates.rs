//! Extrema of `1 / r_μ(t, b(t))` for the D1 and P2 measures. Their distance
//! from one bounds the error of the reconstructed distribution function.

use fpt_images::{solve_all, zeta_certificate, Boundary, ProblemSpec};

fn main() -> fpt_images::Result<()> {
    let catalogue = [
        Boundary::linear(1.0, 1.0)?,
        Boundary::sqrt_shift(1.0)?,
        Boundary::log_shift(2.0)?,
        Boundary::quadratic(1.0)?,
    ];
    println!("{:<12} {:>8} {:>14} {:>14} {:>12}", "boundary", "measure", "min 1/r", "max 1/r", "sup bound");
    for b in catalogue {
        let spec = ProblemSpec::standard(b.clone())?;
        let r = solve_all(&spec)?;
        for (name, mu) in [("mu1", &r.d1.measure), ("mu2", &r.p2.measure)] {
            let z = zeta_certificate(mu, &b, spec.t0, 2048)?;
            println!(
                "{:<12} {name:>8} {:>14.9} {:>14.9} {:>12.3e}",
                b.label(),
                z.min_inv_r,
                z.max_inv_r,
                z.sup_error_bound()
            );
        }
    }
    Ok(())
}
