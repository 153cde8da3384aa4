//! Optimal values of the four programs on the catalogue boundaries, with
//! timings. Concave boundaries close the gap; `1 + t^2` does not.

use std::time::Instant;

use fpt_images::{solve_all, Boundary, ProblemSpec};

fn main() -> fpt_images::Result<()> {
    let catalogue = [
        Boundary::linear(1.0, 1.0)?,
        Boundary::sqrt_shift(1.0)?,
        Boundary::log_shift(2.0)?,
        Boundary::quadratic(1.0)?,
    ];
    println!("{:<12} {:>12} {:>12} {:>12} {:>12} {:>8}", "boundary", "d1", "p1", "d2", "p2", "ms");
    for b in catalogue {
        let start = Instant::now();
        let r = solve_all(&ProblemSpec::standard(b.clone())?)?;
        let [d1, p1, d2, p2] = r.values();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        println!("{:<12} {d1:>12.9} {p1:>12.9} {d2:>12.9} {p2:>12.9} {ms:>8.1}", b.label());
    }
    Ok(())
}
