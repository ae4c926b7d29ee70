//! Scalar minimization helpers: golden-section refinement and
//! coarse-grid basin enumeration.

/// Golden-section search for the minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`. Stops when the bracket shrinks below `xtol`
/// or after `max_evals` function evaluations.
pub(crate) fn golden_section_minimize(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_evals: usize,
) -> (f64, f64) {
    const INV_PHI2: f64 = 0.381_966_011_250_105_1; // 2 - phi

    let mut x1 = a + INV_PHI2 * (b - a);
    let mut x2 = b - INV_PHI2 * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;

    while evals < max_evals && (b - a).abs() > xtol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + INV_PHI2 * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - INV_PHI2 * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }

    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Enumerates every local basin of precomputed `values` on the grid `xs`
/// (endpoints included) and golden-refines each, returning `(x, value)`
/// candidates. Infinite values never qualify as basin centers but may
/// serve as shoulders.
pub(crate) fn refine_basins(
    f: impl Fn(f64) -> f64 + Copy,
    xs: &[f64],
    values: &[f64],
    xtol: f64,
) -> Vec<(f64, f64)> {
    let n = xs.len();
    let mut out = Vec::new();
    for i in 0..n {
        let v = values[i];
        if !v.is_finite() {
            continue;
        }
        let left_ok = i == 0 || v <= values[i - 1];
        let right_ok = i == n - 1 || v <= values[i + 1];
        if left_ok && right_ok {
            let lo = xs[i.saturating_sub(1)];
            let hi = xs[(i + 1).min(n - 1)];
            if hi > lo {
                out.push(golden_section_minimize(f, lo, hi, xtol, 200));
            } else {
                out.push((xs[i], v));
            }
        }
    }
    out
}
