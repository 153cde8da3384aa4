//! A boundary known only through samples: `b(t) = 1 + 0.8 t - 0.1 t^2`
//! on a coarse table, solved and then checked by simulation.

use fpt_images::{assess, mc_conditional_hit, solve_all, Boundary, McConfig, ProblemSpec};

fn main() -> fpt_images::Result<()> {
    let knots: Vec<(f64, f64)> = (0..=20).map(|k| k as f64 / 20.0).map(|t| (t, 1.0 + 0.8 * t - 0.1 * t * t)).collect();
    let b = Boundary::tabulated(knots)?;
    println!("{} concave: {}", b.label(), b.is_concave());

    let spec = ProblemSpec::standard(b.clone())?.with_x0_offset(0.1)?;
    let r = solve_all(&spec)?;
    let [d1, p1, d2, p2] = r.values();
    println!("d1 {d1:.7}  p1 {p1:.7}  d2 {d2:.7}  p2 {p2:.7}");
    println!("verdict: {}", assess(&spec, &r, 1e-4, 1e-3)?.verdict);

    let mc = mc_conditional_hit(&b, spec.t0, spec.x0, &McConfig { paths: 100_000, steps: 400, ..McConfig::default() })?;
    println!("simulated r(t0, x0) = {:.5} ± {:.5}", mc.estimate, mc.std_error);
    Ok(())
}
