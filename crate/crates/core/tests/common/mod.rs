#![allow(dead_code)]

use fpt_images::{Boundary, DenseLp, RowSense, Sense};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Optimal value of a bounded LP by enumerating every basic solution, or
/// `None` when no vertex is feasible.
pub fn vertex_enumeration(lp: &DenseLp) -> Option<f64> {
    let n = lp.num_vars();
    // every constraint as g·a ≥ h
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..lp.num_rows() {
        let g = lp.matrix()[i].clone();
        let h = lp.rhs()[i];
        match lp.row_sense()[i] {
            RowSense::Ge => rows.push((g, h)),
            RowSense::Le => rows.push((g.iter().map(|v| -v).collect(), -h)),
        }
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    for subset in combinations(rows.len(), n) {
        let a = DMatrix::from_fn(n, n, |i, j| rows[subset[i]].0[j]);
        let b = DVector::from_iterator(n, subset.iter().map(|&k| rows[k].1));
        if a.determinant().abs() < 1e-10 {
            continue;
        }
        let Some(x) = a.lu().solve(&b) else { continue };
        let feasible = rows.iter().all(|(g, h)| {
            let lhs: f64 = g.iter().zip(x.iter()).map(|(u, v)| u * v).sum();
            lhs >= h - 1e-9 * (1.0 + h.abs())
        });
        if !feasible {
            continue;
        }
        let obj: f64 = lp.objective().iter().zip(x.iter()).map(|(c, v)| c * v).sum();
        best = Some(match (best, lp.sense()) {
            (None, _) => obj,
            (Some(v), Sense::Minimize) => v.min(obj),
            (Some(v), Sense::Maximize) => v.max(obj),
        });
    }
    best
}

fn combinations(k: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, k: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, r, cur, out);
            cur.pop();
        }
    }
    rec(0, k, r, &mut cur, &mut out);
    out
}

/// Random LP with at most 4 variables and 6 rows, kept bounded by an extra
/// row `Σ a ≤ U`. Every third instance has integer data to provoke
/// degenerate vertices.
pub fn random_bounded_lp(rng: &mut ChaCha8Rng, index: usize) -> DenseLp {
    let n = rng.random_range(1..=4);
    let m = rng.random_range(1..=6);
    let integer = index.is_multiple_of(3);
    let mut draw = |lo: f64, hi: f64| -> f64 {
        let v = rng.random_range(lo..hi);
        if integer { v.round() } else { v }
    };
    let objective: Vec<f64> = (0..n).map(|_| draw(-3.0, 3.0)).collect();
    let mut matrix: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| draw(-3.0, 3.0)).collect()).collect();
    let mut rhs: Vec<f64> = (0..m).map(|_| draw(-2.0, 2.0)).collect();
    let mut senses: Vec<RowSense> = (0..m).map(|_| if rng.random_bool(0.5) { RowSense::Ge } else { RowSense::Le }).collect();
    matrix.push(vec![1.0; n]);
    rhs.push(rng.random_range(1.0..10.0f64).round());
    senses.push(RowSense::Le);
    let sense = if rng.random_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    DenseLp::new(sense, objective, matrix, rhs, senses).unwrap()
}

/// Concave knot table on `[0, 1.2]` with random level and decreasing slopes.
pub fn random_concave_table(rng: &mut ChaCha8Rng) -> Boundary {
    let b0: f64 = rng.random_range(0.5..1.5);
    let mut slope: f64 = rng.random_range(0.0..1.0);
    let mut value = b0;
    let mut knots = vec![(0.0, b0)];
    for k in 1..=12 {
        value += 0.1 * slope;
        knots.push((k as f64 * 0.1, value));
        slope -= rng.random_range(0.0..0.2);
    }
    Boundary::tabulated(knots).unwrap()
}

pub fn catalogue() -> [Boundary; 4] {
    [
        Boundary::linear(1.0, 1.0).unwrap(),
        Boundary::sqrt_shift(1.0).unwrap(),
        Boundary::log_shift(2.0).unwrap(),
        Boundary::quadratic(1.0).unwrap(),
    ]
}
