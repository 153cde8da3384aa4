//! Mass of the D2 time measure in the last cell before `t0`, evaluated at
//! `x0 = b(t0) - 0.1`. It stays bounded away from zero for the concave
//! boundaries and vanishes for `1 + t^2`.

use fpt_images::{tail_mass_sweep, Boundary, ProblemSpec};

fn main() -> fpt_images::Result<()> {
    let sizes = [100, 200, 500];
    println!("{:<12} {:>8} {:>8} {:>8}", "boundary", 100, 200, 500);
    for b in [Boundary::sqrt_shift(1.0)?, Boundary::log_shift(2.0)?, Boundary::quadratic(1.0)?] {
        let spec = ProblemSpec::standard(b.clone())?.with_x0_offset(0.1)?;
        let rows = tail_mass_sweep(&spec, &sizes)?;
        print!("{:<12}", b.label());
        for row in rows {
            print!(" {:>8.3}", row.tail_mass);
        }
        println!();
    }
    Ok(())
}
