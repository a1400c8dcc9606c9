//! Deterministic one- and two-dimensional quadrature.
//!
//! Adaptive Simpson with Richardson correction. Intervals are first split into
//! a fixed number of panels so that narrow peaks inside a wide window are
//! not missed by the initial five-point estimate.

const INITIAL_PANELS: usize = 16;
const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    if b < a {
        return -adaptive_simpson(f, b, a, tol);
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    for i in 0..INITIAL_PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = simpson(lo, hi, flo, fmid, fhi);
        total += refine(&f, lo, hi, flo, fmid, fhi, whole, panel_tol, MAX_DEPTH);
    }
    total
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Nested adaptive Simpson over the rectangle `[x0, x1] x [y0, y1]`.
pub fn adaptive_simpson_2d<F>(f: F, x: (f64, f64), y: (f64, f64), tol: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    adaptive_simpson_2d_region(f, x, |_| y, tol)
}

/// Nested adaptive Simpson over `{(x, y) : x0 <= x <= x1, y in bounds(x)}`.
pub fn adaptive_simpson_2d_region<F, B>(f: F, x: (f64, f64), bounds: B, tol: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> (f64, f64),
{
    let width = (x.1 - x.0).abs().max(f64::MIN_POSITIVE);
    let inner_tol = 0.1 * tol / width.max(1.0);
    adaptive_simpson(
        |xv| {
            let (lo, hi) = bounds(xv);
            if hi <= lo {
                0.0
            } else {
                adaptive_simpson(|yv| f(xv, yv), lo, hi, inner_tol)
            }
        },
        x.0,
        x.1,
        0.9 * tol,
    )
}

/// Composite Simpson rule with `panels` panels (rounded up to even).
pub fn composite_simpson<F>(f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let n = panels.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}

/// Tensor-product composite Simpson over a rectangle.
pub fn composite_simpson_2d<F>(f: F, x: (f64, f64), y: (f64, f64), panels: usize) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    composite_simpson(|xv| composite_simpson(|yv| f(xv, yv), y.0, y.1, panels), x.0, x.1, panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-12);
        assert!((v - (15.0 / 4.0 - 3.0 + 3.0)).abs() < 1e-12);
        assert!((composite_simpson(|x| x * x, 0.0, 3.0, 2) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_gaussian_in_wide_window() {
        let s = 0.05;
        let g = |x: f64| (-(x - 0.3) * (x - 0.3) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt());
        let v = adaptive_simpson(g, -20.0, 20.0, 1e-10);
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn reversed_and_empty_intervals() {
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-9), 0.0);
        let v = adaptive_simpson(|x| x, 2.0, 0.0, 1e-12);
        assert!((v + 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_gaussian() {
        let g = |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp() / (2.0 * PI);
        let v = adaptive_simpson_2d(g, (-10.0, 10.0), (-10.0, 10.0), 1e-9);
        assert!((v - 1.0).abs() < 1e-8);
        let c = composite_simpson_2d(g, (-10.0, 10.0), (-10.0, 10.0), 200);
        assert!((c - 1.0).abs() < 1e-8);
    }

    #[test]
    fn triangular_region() {
        // area of {0 <= x <= 1, 0 <= y <= x}
        let v = adaptive_simpson_2d_region(|_, _| 1.0, (0.0, 1.0), |x| (0.0, x), 1e-10);
        assert!((v - 0.5).abs() < 1e-10);
    }
}
