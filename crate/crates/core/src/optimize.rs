//! One-dimensional maximisation helpers: grid scan followed by golden-section
//! refinement inside the bracket of the best grid point.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Maximum {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while (hi - lo) > x_tol && iters < 200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        iters += 1;
    }
    if f1 >= f2 {
        Maximum { arg: x1, value: f1 }
    } else {
        Maximum { arg: x2, value: f2 }
    }
}

/// Scans `grid` (sorted ascending) and refines around the best node.
///
/// The refined point is only accepted when it improves on the grid value, so
/// the result is never worse than the plain grid maximum.
pub fn grid_then_golden<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> Option<Maximum> {
    let (best_idx, best_val) = grid
        .iter()
        .map(|&x| f(x))
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let mut best = Maximum {
        arg: grid[best_idx],
        value: best_val,
    };
    if grid.len() >= 2 {
        let lo = grid[best_idx.saturating_sub(1)];
        let hi = grid[(best_idx + 1).min(grid.len() - 1)];
        let tol = 1e-12 * (hi.abs() + lo.abs()).max(f64::MIN_POSITIVE);
        let refined = golden_section_max(&f, lo, hi, tol);
        if refined.value > best.value {
            best = refined;
        }
    }
    Some(best)
}

/// `count` log-spaced points between `lo` and `hi` (both > 0).
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (la, lb) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
