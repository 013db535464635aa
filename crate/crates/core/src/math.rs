//! Small numeric helpers.

/// `ln(sum exp(x_i))` with max subtraction; `-inf` entries contribute nothing.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Normalizes log-weights into probabilities.
pub(crate) fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|&x| (x - max).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Outcome of [`bisect_level`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelCrossing {
    /// Feasible end: `f(lo) <= target`.
    pub lo: f64,
    pub hi: f64,
}

/// Bisection for `f(x) = target` on a nondecreasing `f` with
/// `f(lo) <= target <= f(hi)`. Stops when `|f - target| <= tol` or the
/// bracket collapses to floating-point resolution.
pub(crate) fn bisect_level<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol: f64,
    max_iter: usize,
) -> LevelCrossing {
    let mut f_lo = f(lo);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v <= target {
            lo = mid;
            f_lo = v;
        } else {
            hi = mid;
        }
        if (f_lo - target).abs() <= tol {
            break;
        }
    }
    LevelCrossing { lo, hi }
}
