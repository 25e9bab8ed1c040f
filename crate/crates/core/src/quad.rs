//! Adaptive Simpson quadrature.

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Subintervals are split until the Richardson error estimate of each piece
/// falls below its share of `tol`, or the depth limit is hit.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (a, b, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let tol = tol.abs().max(f64::MIN_POSITIVE);

    // Seed with a few panels so that narrow features are not missed.
    const PANELS: usize = 8;
    let width = (b - a) / PANELS as f64;
    let mut total = 0.0;
    for p in 0..PANELS {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == PANELS { b } else { lo + width };
        let flo = f(lo);
        let fhi = f(hi);
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += refine(&f, lo, hi, flo, fmid, fhi, whole, tol / PANELS as f64, 0);
    }
    sign * total
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn quarter_circle() {
        // the square-root endpoint is the hard part
        let v = adaptive_simpson(|x: f64| (1.0 - x * x).max(0.0).sqrt(), 0.0, 1.0, 1e-10);
        assert!((v - PI / 4.0).abs() < 1e-8);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = adaptive_simpson(f64::exp, 1.0, 0.0, 1e-12);
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-11);
    }
}
