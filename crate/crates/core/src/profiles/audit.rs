//! Finite-sample diagnostics for the standing assumptions on `f` and `σ`.
//!
//! Limits such as `f → 0` cannot be decided from samples. Each trend verdict
//! looks only at the last three probe values and asks whether they are
//! strictly ordered in the required direction.

use super::{eval_w, neumann_discreteness_value, BoundaryCoefficient, CuspProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub probes: Vec<f64>,
    pub values: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// Standing assumptions on `f` and `σ`.
    pub checks: Vec<Check>,
    /// Trend of `(∫_a^x 1/f)(∫_x^∞ f)`; holds when it decays to zero. This is
    /// the Neumann discreteness diagnostic, not one of the assumptions.
    pub neumann_criterion: Check,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Holds)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks
            .iter()
            .chain(std::iter::once(&self.neumann_criterion))
            .find(|c| c.name == name)
    }
}

/// `n` geometrically spaced points on `[lo, hi]`.
pub fn geometric_probes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo * ratio.powi(i as i32) })
        .collect()
}

fn last3(values: &[f64]) -> [f64; 3] {
    let n = values.len();
    [values[n - 3], values[n - 2], values[n - 1]]
}

fn tends_to_zero(values: &[f64]) -> Verdict {
    if values.iter().any(|v| !v.is_finite()) {
        return Verdict::Inconclusive;
    }
    let [a, b, c] = last3(values).map(f64::abs);
    if (a == 0.0 && b == 0.0 && c == 0.0) || (a > b && b > c) {
        Verdict::Holds
    } else if a <= b && b <= c {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

fn grows_unbounded(values: &[f64]) -> Verdict {
    if values.iter().any(|v| v.is_nan()) {
        return Verdict::Inconclusive;
    }
    let [a, b, c] = last3(values);
    if a < b && b < c {
        Verdict::Holds
    } else if a >= b && b >= c {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

fn stays_bounded(values: &[f64]) -> Verdict {
    if values.iter().any(|v| !v.is_finite()) {
        return Verdict::Fails;
    }
    let [a, b, c] = last3(values).map(f64::abs);
    if a >= b && b >= c {
        Verdict::Holds
    } else if a < b && b < c {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

fn eventually_nonpositive(values: &[f64]) -> Verdict {
    let tail = last3(values);
    if tail.iter().all(|v| *v <= 0.0) {
        Verdict::Holds
    } else if tail.iter().all(|v| *v > 0.0) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

fn everywhere(values: &[f64], pred: impl Fn(f64) -> bool) -> Verdict {
    if values.iter().all(|&v| pred(v)) {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

/// Audits positivity, monotonicity and decay of `f`, boundedness of `σ`
/// and its derivatives, and growth of `W_σ` along `probe_grid`.
///
/// Grids with fewer than 8 points, not strictly increasing, or spanning
/// less than two decades produce inconclusive trend verdicts.
pub fn audit_assumptions(
    profile: &CuspProfile,
    sigma: &BoundaryCoefficient,
    probe_grid: &[f64],
) -> AssumptionReport {
    let valid = probe_grid.len() >= 8
        && probe_grid.windows(2).all(|w| w[1] > w[0])
        && probe_grid[0] > 0.0
        && probe_grid[probe_grid.len() - 1] / probe_grid[0] >= 100.0 * (1.0 - 1e-12);
    let probes = probe_grid.to_vec();
    let sample = |g: &dyn Fn(f64) -> f64| probes.iter().map(|&x| g(x)).collect::<Vec<_>>();

    let f_vals = sample(&|x| profile.f(x));
    let f1_vals = sample(&|x| profile.f1(x));
    let f2_vals = sample(&|x| profile.f2(x));
    let s_all: Vec<[f64; 3]> = probes.iter().map(|&x| sigma.eval_all(x)).collect();
    let s0: Vec<f64> = s_all.iter().map(|s| s[0]).collect();
    let s1: Vec<f64> = s_all.iter().map(|s| s[1]).collect();
    let s2: Vec<f64> = s_all.iter().map(|s| s[2]).collect();
    let s_min: Vec<f64> = probes
        .iter()
        .map(|&x| sigma.sigma1(x).min(sigma.sigma2(x)))
        .collect();
    let w_vals = sample(&|x| eval_w(profile, sigma, x).unwrap_or(f64::NAN));
    let neumann_vals = sample(&|x| {
        if x > profile.a() {
            neumann_discreteness_value(profile, x).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        }
    });

    let trend = |v: Verdict| if valid { v } else { Verdict::Inconclusive };
    let mk = |name, values: Vec<f64>, verdict| Check {
        name,
        probes: probes.clone(),
        values,
        verdict,
    };

    let checks = vec![
        mk("f_positive", f_vals.clone(), everywhere(&f_vals, |v| v > 0.0)),
        mk(
            "f_nonincreasing_tail",
            f1_vals.clone(),
            trend(eventually_nonpositive(&f1_vals)),
        ),
        mk("f_to_zero", f_vals.clone(), trend(tends_to_zero(&f_vals))),
        mk("f2_to_zero", f2_vals.clone(), trend(tends_to_zero(&f2_vals))),
        mk("sigma_nonnegative", s_min.clone(), everywhere(&s_min, |v| v >= 0.0)),
        mk("sigma_bounded", s0.clone(), trend(stays_bounded(&s0))),
        mk("sigma1_bounded", s1.clone(), trend(stays_bounded(&s1))),
        mk("sigma2_bounded", s2.clone(), trend(stays_bounded(&s2))),
        mk("w_unbounded", w_vals.clone(), trend(grows_unbounded(&w_vals))),
    ];
    let neumann_verdict = if neumann_vals.iter().any(|v| v.is_infinite()) {
        Verdict::Fails
    } else if neumann_vals.iter().any(|v| v.is_nan()) {
        Verdict::Inconclusive
    } else {
        trend(tends_to_zero(&neumann_vals))
    };
    AssumptionReport {
        checks,
        neumann_criterion: mk("neumann_criterion", neumann_vals, neumann_verdict),
    }
}

/// Both sides of `f'(x)² ≤ 2 M_x M''_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `f'(x)²` with `2 sup f · sup |f''|`, the suprema taken over a
/// geometric grid of `tail_samples` points (at least 64) on `[x, 10³x]`.
pub fn landau_check(profile: &CuspProfile, x: f64, tail_samples: usize) -> LandauCheck {
    let n = tail_samples.max(64);
    let lhs = profile.f1(x).powi(2);
    let (sup_f, sup_f2) = geometric_probes(x, 1e3 * x, n)
        .into_iter()
        .map(|s| profile.eval_all(s))
        .fold((0.0f64, 0.0f64), |(mf, m2), [f, _, f2]| (mf.max(f), m2.max(f2.abs())));
    let rhs = 2.0 * sup_f * sup_f2;
    LandauCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-9),
    }
}

#[cfg(test)]
mod tests {
    use super::super::make_power_profile;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid() -> Vec<f64> {
        geometric_probes(2.0, 400.0, 12)
    }

    #[test]
    fn inverse_square_with_unit_sigma_passes() {
        let p = make_power_profile(2.0).unwrap();
        let s = BoundaryCoefficient::constant(1.0).unwrap();
        let r = audit_assumptions(&p, &s, &grid());
        for c in &r.checks {
            assert_eq!(c.verdict, Verdict::Holds, "{}", c.name);
        }
        assert!(r.all_hold());
        // x⁻² has infinite Neumann spectrum accumulation
        assert_eq!(r.neumann_criterion.verdict, Verdict::Fails);
    }

    #[test]
    fn fast_decaying_sigma_breaks_confinement() {
        let p = make_power_profile(1.0).unwrap();
        let s = BoundaryCoefficient::power(1.0, 2.0).unwrap();
        let r = audit_assumptions(&p, &s, &grid());
        assert_eq!(r.get("w_unbounded").unwrap().verdict, Verdict::Fails);
        assert!(!r.all_hold());
    }

    #[test]
    fn slow_decaying_sigma_confines() {
        let p = make_power_profile(1.0).unwrap();
        let s = BoundaryCoefficient::power(1.0, 0.5).unwrap();
        let r = audit_assumptions(&p, &s, &grid());
        assert_eq!(r.get("w_unbounded").unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn constant_profile_does_not_shrink() {
        let p = CuspProfile::constant(1.0).unwrap();
        let s = BoundaryCoefficient::constant(1.0).unwrap();
        let r = audit_assumptions(&p, &s, &grid());
        assert_eq!(r.get("f_to_zero").unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn gaussian_profile_satisfies_neumann_criterion() {
        let p = CuspProfile::stretched_exponential(1.0, 2.0, 1.0).unwrap();
        let s = BoundaryCoefficient::constant(0.0).unwrap();
        let r = audit_assumptions(&p, &s, &geometric_probes(1.5, 150.0, 10));
        assert_eq!(r.neumann_criterion.verdict, Verdict::Holds);
    }

    #[test]
    fn short_grid_is_inconclusive() {
        let p = make_power_profile(2.0).unwrap();
        let s = BoundaryCoefficient::constant(1.0).unwrap();
        let r = audit_assumptions(&p, &s, &geometric_probes(2.0, 20.0, 12));
        assert_eq!(r.get("f_to_zero").unwrap().verdict, Verdict::Inconclusive);
        let r = audit_assumptions(&p, &s, &[2.0, 20.0, 200.0, 2000.0]);
        assert_eq!(r.get("w_unbounded").unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn landau_examples() {
        let p = make_power_profile(2.0).unwrap();
        let c = landau_check(&p, 10.0, 64);
        assert_relative_eq!(c.lhs, 4e-6, max_relative = 1e-12);
        assert_relative_eq!(c.rhs, 1.2e-5, max_relative = 1e-12);
        assert!(c.holds);

        let c = landau_check(&CuspProfile::constant(2.0).unwrap(), 5.0, 64);
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);

        let e = CuspProfile::exponential(1.0).unwrap();
        let c = landau_check(&e, 1.0, 64);
        let em2 = (-2.0f64).exp();
        assert_relative_eq!(c.lhs, em2, max_relative = 1e-12);
        assert_relative_eq!(c.rhs, 2.0 * em2, max_relative = 1e-12);
        assert!(c.holds);
    }

    proptest! {
        #[test]
        fn landau_holds_for_presets(x in 2.0f64..200.0, alpha in 0.3f64..5.0, c in 0.05f64..2.0) {
            for p in [
                CuspProfile::power(alpha).unwrap(),
                CuspProfile::exponential(c).unwrap(),
                CuspProfile::stretched_exponential(c, 1.5, 1.0).unwrap(),
            ] {
                let chk = landau_check(&p, x, 128);
                prop_assert!(chk.holds, "{p} at {x}: {} > {}", chk.lhs, chk.rhs);
            }
        }
    }
}
