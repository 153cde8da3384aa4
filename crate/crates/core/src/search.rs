//! One-dimensional global extremum search: dense scan, then golden-section
//! refinement around the most promising grid minima or maxima.

use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Extremum::Min => a < b,
            Extremum::Max => a > b,
        }
    }

    fn key(self, v: f64) -> f64 {
        let v = match self {
            Extremum::Min => v,
            Extremum::Max => -v,
        };
        if v.is_nan() { f64::INFINITY } else { v }
    }
}

/// `n` points from `lo` to `hi` with constant ratio.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// `n` equally spaced points from `lo` to `hi`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(hi >= lo && n >= 2);
    let mut g: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    g[n - 1] = hi;
    g
}

const CANDIDATES: usize = 4;

/// Extremum of `f` over `[grid[0], grid[last]]`. The best few local extrema
/// of the scan are refined by golden section on their neighbouring cells
/// until the bracket is below `rel_tol` relative to the location.
/// Returns `(location, value)`.
pub fn scan_refine<F>(f: F, grid: &[f64], ext: Extremum, rel_tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync,
{
    assert!(!grid.is_empty());
    let values: Vec<f64> = grid.par_iter().map(|&x| f(x)).collect();
    let n = grid.len();
    let mut local: Vec<usize> = (0..n)
        .filter(|&i| {
            let v = ext.key(values[i]);
            (i == 0 || v <= ext.key(values[i - 1])) && (i + 1 == n || v <= ext.key(values[i + 1]))
        })
        .collect();
    local.sort_by(|&i, &j| ext.key(values[i]).total_cmp(&ext.key(values[j])));
    local.truncate(CANDIDATES);

    let best_grid = (0..n).min_by(|&i, &j| ext.key(values[i]).total_cmp(&ext.key(values[j]))).unwrap();
    let (mut best_x, mut best_v) = (grid[best_grid], values[best_grid]);
    for i in local {
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(n - 1)];
        if hi <= lo {
            continue;
        }
        let (x, v) = golden_section(&f, lo, hi, ext, rel_tol);
        if ext.better(v, best_v) {
            best_x = x;
            best_v = v;
        }
    }
    (best_x, best_v)
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, ext: Extremum, rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = ext.key(f(c));
    let mut fd = ext.key(f(d));
    for _ in 0..200 {
        if (b - a) <= rel_tol * c.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ext.key(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ext.key(f(d));
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [a, b] {
        let v = ext.key(f(x));
        if v < best.1 {
            best = (x, v);
        }
    }
    (best.0, f(best.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = geometric_grid(1e-6, 1.0, 7);
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[6], 1.0);
        assert!((g[3] - 1e-3).abs() < 1e-15);
        let u = uniform_grid(2.0, 7.0, 6);
        assert_eq!(u, vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn refines_interior_minimum() {
        let g = uniform_grid(0.0, 3.0, 16);
        let (x, v) = scan_refine(|x| (x - 1.2345678).powi(2), &g, Extremum::Min, 1e-12);
        assert!((x - 1.2345678).abs() < 1e-7);
        assert!(v < 1e-14);
    }

    #[test]
    fn finds_global_among_several() {
        let g = uniform_grid(0.0, 10.0, 200);
        let f = |x: f64| (x).sin() + 0.1 * x;
        let (x, _) = scan_refine(f, &g, Extremum::Max, 1e-12);
        // maxima near π/2 + 2kπ; the last one in range wins
        assert!((x - (2.0 * std::f64::consts::PI + (-0.1f64).acos())).abs() < 1e-6);
    }

    #[test]
    fn endpoint_extremum() {
        let g = geometric_grid(1e-6, 1.0, 64);
        let (x, v) = scan_refine(|t| t, &g, Extremum::Min, 1e-10);
        assert_eq!(x, 1e-6);
        assert_eq!(v, 1e-6);
    }
}
