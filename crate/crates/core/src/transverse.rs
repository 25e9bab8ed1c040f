//! Principal Robin eigenpair of `-d²/dy²` on a cross-section `(-f, f)`.
//!
//! With `v = cos(κy + φ)` the boundary conditions
//! `v'(-f) = σ₁ v(-f)` and `v'(f) = -σ₂ v(f)` become
//!
//! ```text
//! κ tan(κf - φ) = σ₁,    κ tan(κf + φ) = σ₂.
//! ```
//!
//! Writing `θ₁ = κf - φ`, `θ₂ = κf + φ` (both in `[0, π/2)` for the principal
//! mode) and adding gives the scalar equation
//! `atan(σ₁/κ) + atan(σ₂/κ) = 2κf`, whose left side decreases and right side
//! increases in `κ`, so it has exactly one root in `(0, π/(2f))`. The symmetric
//! case `σ₁ = σ₂ = σ` is `κ tan(κf) = σ`.

use crate::error::{invalid, Error, Result};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseMode {
    pub kappa: f64,
    pub mu: f64,
    /// Zero for symmetric boundaries.
    pub phase: f64,
    pub f_val: f64,
    pub sigma_vals: (f64, f64),
}

fn check_inputs(f_val: f64, sigmas: &[f64]) -> Result<()> {
    if !(f_val.is_finite() && f_val > 0.0) {
        return Err(invalid(format!("half-width must be positive, got {f_val}")));
    }
    for &s in sigmas {
        if !(s >= 0.0) || s.is_nan() {
            return Err(invalid(format!("Robin coefficient must be nonnegative, got {s}")));
        }
    }
    Ok(())
}

/// Bisection to full precision for an increasing function with `g(lo) < 0 < g(hi)`.
fn bisect_increasing(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= 1e-16 * hi.abs() {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First root of `κ tan(κf) = σ` in `[0, π/(2f))`.
pub fn solve_kappa(f_val: f64, sigma_val: f64) -> Result<TransverseMode> {
    check_inputs(f_val, &[sigma_val])?;
    let kappa = if sigma_val == 0.0 {
        0.0
    } else if sigma_val.is_infinite() {
        FRAC_PI_2 / f_val
    } else {
        // κ sin(κf) - σ cos(κf) has the roots of κ tan(κf) - σ on the bracket
        // but no pole at π/(2f).
        let g = |k: f64| k * (k * f_val).sin() - sigma_val * (k * f_val).cos();
        let hi = FRAC_PI_2 / f_val * (1.0 - 1e-12);
        if g(hi) <= 0.0 {
            hi
        } else {
            bisect_increasing(g, 0.0, hi)
        }
    };
    Ok(TransverseMode {
        kappa,
        mu: kappa * kappa,
        phase: 0.0,
        f_val,
        sigma_vals: (sigma_val, sigma_val),
    })
}

/// `μ f / σ`, which lies in `(0, 1]` and tends to 1 as `σf → 0`.
pub fn mu_over_sigma_ratio(f_val: f64, sigma_val: f64) -> Result<f64> {
    if !(sigma_val > 0.0) {
        return Err(invalid("ratio needs sigma > 0"));
    }
    let mode = solve_kappa(f_val, sigma_val)?;
    Ok(mode.mu * f_val / sigma_val)
}

/// `cos(κy + φ)` for `|y| ≤ f`.
pub fn eval_v(mode: &TransverseMode, y: f64) -> Result<f64> {
    let slack = 1e-12 * mode.f_val;
    if !(y.abs() <= mode.f_val + slack) {
        return Err(invalid(format!(
            "y = {y} outside the cross-section (-{f}, {f})",
            f = mode.f_val
        )));
    }
    Ok((mode.kappa * y + mode.phase).cos())
}

/// Principal mode with `σ₁` at `y = -f` and `σ₂` at `y = f`.
pub fn solve_nonsymmetric(f_val: f64, sigma1: f64, sigma2: f64) -> Result<TransverseMode> {
    check_inputs(f_val, &[sigma1, sigma2])?;
    let theta = |s: f64, k: f64| {
        if s.is_infinite() {
            FRAC_PI_2
        } else {
            (s / k).atan()
        }
    };
    let (kappa, phase) = if sigma1 == 0.0 && sigma2 == 0.0 {
        (0.0, 0.0)
    } else {
        let g = |k: f64| 2.0 * k * f_val - theta(sigma1, k) - theta(sigma2, k);
        let hi = FRAC_PI_2 / f_val;
        let kappa = bisect_increasing(g, 0.0, hi);
        let phase = 0.5 * (theta(sigma2, kappa) - theta(sigma1, kappa));
        (kappa, phase)
    };
    let mode = TransverseMode {
        kappa,
        mu: kappa * kappa,
        phase,
        f_val,
        sigma_vals: (sigma1, sigma2),
    };
    let residual = boundary_residual(&mode);
    let scale = 1.0 + sigma1.min(1e300) + sigma2.min(1e300);
    if !(residual <= 1e-8 * scale) && sigma1.is_finite() && sigma2.is_finite() {
        return Err(Error::NonConvergence {
            iterations: 200,
            residual,
        });
    }
    Ok(mode)
}

/// Largest residual of the two Robin conditions, in the form
/// `κ sin θ - σ cos θ` which stays bounded near the Dirichlet limit.
pub fn boundary_residual(mode: &TransverseMode) -> f64 {
    let k = mode.kappa;
    let (s1, s2) = mode.sigma_vals;
    let t1 = k * mode.f_val - mode.phase;
    let t2 = k * mode.f_val + mode.phase;
    let r = |s: f64, t: f64| {
        if s.is_infinite() {
            t.cos().abs()
        } else {
            (k * t.sin() - s * t.cos()).abs()
        }
    };
    r(s1, t1).max(r(s2, t2))
}

/// `π²/(16 f²)`: Neumann on one side, Dirichlet on the other, width `2f`.
pub fn dn_lowest_mode(f_val: f64) -> Result<f64> {
    check_inputs(f_val, &[])?;
    Ok(std::f64::consts::PI.powi(2) / (16.0 * f_val * f_val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Root of κ tan κ = 1 located by a plain 1e-7 step scan, then refined by
    /// a secant step on the bracketing pair.
    fn scan_root_unit() -> f64 {
        let g = |k: f64| k * k.tan() - 1.0;
        let mut k = 0.0;
        let step = 1e-7;
        while g(k + step) < 0.0 {
            k += step;
        }
        let (a, b) = (k, k + step);
        a - g(a) * (b - a) / (g(b) - g(a))
    }

    #[test]
    fn neumann_and_dirichlet_limits() {
        let m = solve_kappa(1.0, 0.0).unwrap();
        assert_eq!(m.kappa, 0.0);
        assert_eq!(m.mu, 0.0);
        let m = solve_kappa(1.0, 1e6).unwrap();
        assert!((m.kappa - PI / 2.0).abs() < 1e-5);
    }

    #[test]
    fn unit_case_matches_scan_oracle() {
        let oracle = scan_root_unit();
        assert!((oracle - 0.860334).abs() < 1e-6);
        let m = solve_kappa(1.0, 1.0).unwrap();
        assert!((m.kappa - oracle).abs() < 1e-9);
        assert!((m.mu - 0.740174).abs() < 1e-6);
        assert!((mu_over_sigma_ratio(1.0, 1.0).unwrap() - 0.740174).abs() < 1e-6);
    }

    #[test]
    fn thin_section_ratio_near_one() {
        let r = mu_over_sigma_ratio(1e-3, 1.0).unwrap();
        assert!((0.999..1.0).contains(&r), "{r}");
        assert!(mu_over_sigma_ratio(1.0, 0.0).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(solve_kappa(0.0, 1.0).is_err());
        assert!(solve_kappa(1.0, -1.0).is_err());
        assert!(solve_kappa(f64::NAN, 1.0).is_err());
        assert!(solve_nonsymmetric(1.0, 1.0, -2.0).is_err());
        assert!(dn_lowest_mode(-1.0).is_err());
    }

    #[test]
    fn eigenfunction_values() {
        let m = solve_kappa(1.0, 0.0).unwrap();
        assert_eq!(eval_v(&m, 0.3).unwrap(), 1.0);
        let m = TransverseMode {
            kappa: 0.860334,
            mu: 0.860334f64.powi(2),
            phase: 0.0,
            f_val: 1.0,
            sigma_vals: (1.0, 1.0),
        };
        assert!((eval_v(&m, 1.0).unwrap() - 0.652184).abs() < 1e-6);
        assert!(eval_v(&m, 1.01).is_err());
        for y in [0.1, 0.45, 0.99] {
            assert_eq!(eval_v(&m, y).unwrap(), eval_v(&m, -y).unwrap());
        }
    }

    #[test]
    fn nonsymmetric_reduces_to_symmetric() {
        for (f, s) in [(1.0, 1.0), (0.3, 7.0), (2.0, 0.01), (0.01, 100.0)] {
            let a = solve_kappa(f, s).unwrap();
            let b = solve_nonsymmetric(f, s, s).unwrap();
            assert!((a.kappa - b.kappa).abs() <= 1e-12 * (1.0 + a.kappa));
            assert!(b.phase.abs() <= 1e-12);
        }
    }

    #[test]
    fn neumann_dirichlet_quarter_wave() {
        let m = solve_nonsymmetric(1.0, 0.0, 1e8).unwrap();
        assert!((m.kappa - PI / 4.0).abs() < 1e-6);
        let dn = dn_lowest_mode(1.0).unwrap();
        assert_relative_eq!(dn, PI * PI / 16.0);
        assert!((m.mu - dn).abs() / dn < 1e-3);
        assert_relative_eq!(dn_lowest_mode(0.5).unwrap(), PI * PI / 4.0);
    }

    #[test]
    fn nonsymmetric_thin_limit() {
        let m = solve_nonsymmetric(0.01, 1.0, 3.0).unwrap();
        let r = m.mu * 0.01 / 2.0;
        assert!((0.97..1.0).contains(&r), "{r}");
        // eigenfunction peaks away from the stiffer upper boundary
        assert!(m.phase > 0.0);
        assert!(boundary_residual(&m) < 1e-12);
    }

    #[test]
    fn residual_and_mu_bound_on_random_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let f: f64 = rng.gen_range(1e-6..=1.0);
            let s: f64 = rng.gen_range(0.0..=10.0);
            let m = solve_kappa(f, s).unwrap();
            let res = (m.kappa * (m.kappa * f).tan() - s).abs();
            assert!(res <= 1e-10 * (1.0 + s), "f={f} s={s} res={res}");
            assert!(m.mu <= s / f + 1e-12);
            assert!(m.kappa >= 0.0 && m.kappa < PI / (2.0 * f));
        }
    }

    proptest! {
        #[test]
        fn kappa_increases_with_sigma(f in 0.01f64..2.0, mut sig in prop::collection::vec(0.0f64..50.0, 2..12)) {
            sig.sort_by(f64::total_cmp);
            sig.dedup();
            let ks: Vec<f64> = sig.iter().map(|&s| solve_kappa(f, s).unwrap().kappa).collect();
            prop_assert!(ks.windows(2).all(|w| w[1] > w[0]));
        }

        #[test]
        fn nonsymmetric_satisfies_both_conditions(f in 0.01f64..2.0, s1 in 0.0f64..20.0, s2 in 0.0f64..20.0) {
            let m = solve_nonsymmetric(f, s1, s2).unwrap();
            prop_assert!(boundary_residual(&m) <= 1e-10 * (1.0 + s1 + s2));
            // principal mode stays positive on the section
            for y in [-f, -0.5 * f, 0.0, 0.5 * f, f] {
                prop_assert!(eval_v(&m, y).unwrap() > 0.0 || (s1 == 0.0 && s2 == 0.0));
            }
        }
    }
}
