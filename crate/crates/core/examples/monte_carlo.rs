//! Monte Carlo cross-checks: crossing probability with and without the
//! Brownian bridge correction, the sandwich on the conditional hitting
//! probability, and the last-passage histogram.

use fpt_images::{
    bachelier_levy, mc_conditional_hit, mc_fpt_cdf, mc_last_passage, solve_all, Boundary, McConfig, ProblemSpec,
};

fn main() -> fpt_images::Result<()> {
    let b = Boundary::sqrt_shift(1.0)?;
    let cfg = McConfig { paths: 200_000, steps: 200, ..McConfig::default() };

    let lin = Boundary::linear(1.0, 1.0)?;
    let on = mc_fpt_cdf(&lin, 1.0, &cfg)?;
    let off = mc_fpt_cdf(&lin, 1.0, &McConfig { bridge_correction: false, ..cfg })?;
    println!("P(τ ≤ 1) for 1 + t: exact {:.5}", bachelier_levy(1.0, 1.0, 1.0)?);
    println!("  corrected   {:.5} ± {:.5}", on.estimate, on.std_error);
    println!("  uncorrected {:.5} ± {:.5}", off.estimate, off.std_error);

    let spec = ProblemSpec::standard(b.clone())?;
    let r = solve_all(&spec)?;
    let lo = r.d1.measure.integrate_r(spec.t0, spec.x0)?.value;
    let hi = r.p2.measure.integrate_r(spec.t0, spec.x0)?.value;
    let hit = mc_conditional_hit(&b, spec.t0, spec.x0, &cfg)?;
    println!("\nsandwich for {}: {lo:.5} ≤ {:.5} ± {:.5} ≤ {hi:.5}", b.label(), hit.estimate, hit.std_error);

    let h = mc_last_passage(&b, spec.t0, spec.x0, &cfg, 10)?;
    println!("\nlast passage before t0 (paths that never cross: {:.4})", h.non_crossing);
    for (k, m) in h.mass.iter().enumerate() {
        println!("  [{:.1}, {:.1})  {m:.4}", h.edges[k], h.edges[k + 1]);
    }
    Ok(())
}
