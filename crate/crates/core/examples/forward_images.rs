//! The classical direction: pick a measure, obtain its boundary.
//!
//! `μ = 0.2 δ_1 + 0.6 δ_1.5` gives a concave boundary starting at
//! `θ*/2 = 0.5`.

use fpt_images::{density_from_measure, forward_images, limit_at_zero, AtomicMeasure, Boundary};

fn main() -> fpt_images::Result<()> {
    let mu = AtomicMeasure::from_pairs([(1.0, 0.2), (1.5, 0.6)])?;
    println!("b(0+) = {}", limit_at_zero(&mu)?);

    let times: Vec<f64> = (1..=30).map(|k| k as f64 / 10.0).collect();
    let knots: Vec<(f64, f64)> = std::iter::once((0.0, limit_at_zero(&mu)?))
        .chain(times.iter().map(|&t| forward_images(&mu, t, 1e-13).map(|x| (t, x))).collect::<Result<Vec<_>, _>>()?)
        .collect();
    let b = Boundary::tabulated(knots.clone())?;

    println!("\n    t      b(t)   density");
    for &(t, x) in knots.iter().skip(1).step_by(3) {
        println!("{t:5.1} {x:9.6} {:9.6}", density_from_measure(&mu, &b, t)?);
    }
    Ok(())
}
