//! The dense simplex on its own: a small production problem and its dual.

use fpt_images::{solve_lp, DenseLp, RowSense, Sense};

fn main() -> fpt_images::Result<()> {
    // max 3x + 5y  s.t.  x ≤ 4,  2y ≤ 12,  3x + 2y ≤ 18
    let lp = DenseLp::new(
        Sense::Maximize,
        vec![3.0, 5.0],
        vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
        vec![4.0, 12.0, 18.0],
        vec![RowSense::Le; 3],
    )?;
    let sol = solve_lp(&lp);
    println!("status {}  objective {}  after {} pivots", sol.status, sol.objective_value, sol.iterations);
    println!("primal {:?}", sol.primal);
    println!("dual   {:?}", sol.dual);
    Ok(())
}
