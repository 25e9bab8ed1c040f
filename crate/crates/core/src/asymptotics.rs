//! Closed-form and quadrature predictions for the counting function.

use crate::error::{invalid, Error, Result};
use crate::profiles::{classify_weyl_regime, eval_w, integrate_relative, BoundaryCoefficient, CuspProfile, ProfileKind, WeylRegime};
use crate::quad::adaptive_simpson;
use std::f64::consts::{E, PI};

/// `λ|Ω|/(4π)`.
pub fn weyl_term(volume: f64, lambda: f64) -> Result<f64> {
    if volume.is_infinite() {
        return Err(Error::InfiniteVolume(
            "Weyl term needs a finite area; use the superlinear route".into(),
        ));
    }
    if !(volume > 0.0) || !(lambda >= 0.0) {
        return Err(invalid(format!("need volume > 0 and lambda >= 0, got {volume}, {lambda}")));
    }
    Ok(lambda * volume / (4.0 * PI))
}

/// First point where `q` reaches `lambda` while increasing, with the scan
/// point just before it. `None` when `q(a) >= λ` already holds there.
fn turning_point(q: &dyn Fn(f64) -> f64, lambda: f64, a: f64) -> Result<Option<(f64, f64)>> {
    const LIMIT: f64 = 1e6;
    let mut prev = (a, q(a));
    let mut step = 1e-3 * a.abs().max(1.0);
    loop {
        let x = prev.0 + step;
        if x > LIMIT {
            return Err(Error::NoTurningPoint { lambda, limit: LIMIT });
        }
        let qx = q(x);
        if qx.is_nan() {
            return Err(Error::Evaluation {
                x,
                reason: "potential is NaN".into(),
            });
        }
        if qx >= lambda && qx > prev.1 {
            if prev.1 >= lambda {
                // an upward crossing would have stopped the scan earlier
                return Ok(None);
            }
            let (mut lo, mut hi) = (prev.0, x);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if q(mid) >= lambda {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some((prev.0, lo)));
        }
        prev = (x, qx);
        step *= 1.05;
    }
}

/// `(1/π) ∫ₐ^{x*} √(λ - q)₊ dx` up to the turning point `q(x*) = λ`.
pub fn titchmarsh_count(q: &dyn Fn(f64) -> f64, lambda: f64, a: f64) -> Result<f64> {
    let Some((last, x_star)) = turning_point(q, lambda, a)? else {
        return Ok(0.0);
    };
    let g = |x: f64| (lambda - q(x)).max(0.0).sqrt();
    let head = integrate_relative(g, a, last, 1e-11);
    // u = √(x* - x) removes the square-root zero at the turning point
    let width = (x_star - last).max(0.0).sqrt();
    let rough = 2.0 * width * width * g(last).max(1e-300);
    let tail = adaptive_simpson(
        |u: f64| 2.0 * u * g(x_star - u * u),
        0.0,
        width,
        (1e-11 * rough).max(1e-300),
    );
    Ok((head + tail) / PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TitchmarshVerdict {
    /// Increasing on the whole probe range with `x³q'` growing.
    Titchmarsh,
    /// Increasing and convex on the tail.
    Convex,
    Inconclusive,
}

impl TitchmarshVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            TitchmarshVerdict::Titchmarsh => "titchmarsh",
            TitchmarshVerdict::Convex => "convex",
            TitchmarshVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Trend check of the hypotheses under which the Titchmarsh integral gives
/// the leading behavior of the count, from finite differences at the probes.
pub fn titchmarsh_applicable(q: &dyn Fn(f64) -> f64, probes: &[f64]) -> TitchmarshVerdict {
    if probes.len() < 4 {
        return TitchmarshVerdict::Inconclusive;
    }
    let deriv = |x: f64| {
        let h = 1e-4 * x.abs().max(1e-3);
        let (qm, q0, qp) = (q(x - h), q(x), q(x + h));
        ((qp - qm) / (2.0 * h), (qp - 2.0 * q0 + qm) / (h * h), q0)
    };
    let d: Vec<(f64, f64, f64)> = probes.iter().map(|&x| deriv(x)).collect();
    let scale = |v: f64| 1e-9 * (1.0 + v.abs());
    let tail = &d[d.len() / 2..];
    let tail_x = &probes[d.len() / 2..];
    let increasing = |s: &[(f64, f64, f64)]| s.iter().all(|&(d1, _, q0)| d1 > scale(q0) * 1e-3);

    let x3q: Vec<f64> = probes.iter().zip(&d).map(|(&x, &(d1, _, _))| x.powi(3) * d1).collect();
    let growing = x3q.windows(2).skip(x3q.len() / 2).all(|w| w[1] > w[0]);
    if increasing(&d) && growing {
        return TitchmarshVerdict::Titchmarsh;
    }
    let convex = tail
        .iter()
        .zip(tail_x)
        .all(|(&(_, d2, q0), &x)| d2 >= -scale(q0) / (x * x).max(1e-12));
    if increasing(tail) && convex {
        return TitchmarshVerdict::Convex;
    }
    TitchmarshVerdict::Inconclusive
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let series = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + (i + 1) as f64));
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(invalid(format!("beta needs positive arguments, got ({a}, {b})")));
    }
    Ok((ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp())
}

/// Riemann zeta for real `s > 1`, from the Dirichlet eta series with
/// Borwein's acceleration.
pub fn zeta_fn(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(invalid(format!("zeta needs s > 1, got {s}")));
    }
    const N: usize = 40;
    let nf = N as f64;
    let mut d = Vec::with_capacity(N + 1);
    let mut term = 1.0;
    let mut acc = 1.0;
    d.push(acc);
    for i in 1..=N {
        let fi = i as f64;
        term *= 4.0 * (nf + fi - 1.0) * (nf - fi + 1.0) / ((2.0 * fi) * (2.0 * fi - 1.0));
        acc += term;
        d.push(acc);
    }
    let dn = d[N];
    let eta = -(0..N)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * (d[k] - dn) / ((k + 1) as f64).powf(s)
        })
        .sum::<f64>()
        / dn;
    Ok(eta / (1.0 - 2f64.powf(1.0 - s)))
}

/// Leading term of the count of the one-dimensional operator with potential
/// `σ₀ x^{α-β}` (the boundary part of a power cusp with `σ = σ₀x^{-β}`).
pub fn hsigma_closed_form(alpha: f64, beta: f64, sigma0: f64, lambda: f64) -> Result<f64> {
    if !(alpha > beta && beta >= 0.0 && sigma0 > 0.0) {
        return Err(invalid(format!(
            "need alpha > beta >= 0 and sigma0 > 0, got alpha={alpha}, beta={beta}, sigma0={sigma0}"
        )));
    }
    if !(lambda >= 0.0) {
        return Err(invalid(format!("lambda must be nonnegative, got {lambda}")));
    }
    let g = alpha - beta;
    Ok(sigma0.powf(-1.0 / g) / (g * PI) * beta_fn(1.0 / g, 1.5)? * lambda.powf(0.5 + 1.0 / g))
}

/// Leading term of the Dirichlet count on `{x > 1, |y| < x^{-α}}`, `0 < α ≤ 1`.
pub fn dirichlet_superlinear(alpha: f64, lambda: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!(
            "superlinear term needs 0 < alpha <= 1, got {alpha}; use the Weyl term"
        )));
    }
    if !(lambda > E) {
        return Err(invalid(format!("superlinear term needs lambda > e, got {lambda}")));
    }
    if alpha == 1.0 {
        return Ok(lambda * lambda.ln() / PI);
    }
    let s = 1.0 / alpha;
    Ok((2.0 / PI).powf(s) / PI
        * zeta_fn(s)?
        * beta_fn(1.0 + 0.5 * s, 0.5)?
        * lambda.powf(0.5 + 0.5 * s))
}

/// How each part of a prediction was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartSource {
    WeylLaw,
    ClosedForm,
    Titchmarsh,
    ZetaBeta,
    LogLaw,
    Absent,
}

impl PartSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            PartSource::WeylLaw => "weyl_law",
            PartSource::ClosedForm => "closed_form",
            PartSource::Titchmarsh => "titchmarsh",
            PartSource::ZetaBeta => "zeta_beta",
            PartSource::LogLaw => "log_law",
            PartSource::Absent => "absent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPrediction {
    pub lambda: f64,
    pub weyl_part: f64,
    pub h_sigma_part: f64,
    pub dirichlet_superlinear_part: f64,
    pub total: f64,
    pub regime: WeylRegime,
    pub sources: [PartSource; 3],
    /// `|Ω|/(4π) + |a|/(4√σ)` in the linear regime with constant `σ`.
    pub linear_coefficient: Option<f64>,
}

/// The boundary part: closed form for power cusps with power-law `σ`,
/// otherwise the Titchmarsh integral of `W_σ`.
fn h_sigma_part(profile: &CuspProfile, sigma: &BoundaryCoefficient, lambda: f64) -> Result<(f64, PartSource)> {
    if let (ProfileKind::Power { alpha, amp }, Some((s, beta))) = (profile.kind(), sigma.power_law()) {
        if s > 0.0 && beta < *alpha && beta >= 0.0 {
            return Ok((hsigma_closed_form(*alpha, beta, s / amp, lambda)?, PartSource::ClosedForm));
        }
    }
    let w = |x: f64| eval_w(profile, sigma, x).unwrap_or(f64::INFINITY);
    Ok((titchmarsh_count(&w, lambda, profile.a())?, PartSource::Titchmarsh))
}

/// Interior (Weyl or superlinear Dirichlet) part plus boundary part.
pub fn composite_prediction(profile: &CuspProfile, sigma: &BoundaryCoefficient, lambda: f64) -> Result<SpectralPrediction> {
    let regime = classify_weyl_regime(profile);
    let (weyl, superlinear, interior_src) = match profile.kind() {
        ProfileKind::Constant { .. } => {
            return Err(invalid(
                "a constant profile has infinite area and no power law; no prediction applies",
            ))
        }
        ProfileKind::Power { alpha, amp } if *alpha <= 1.0 => {
            // a scaled horn stretches every mode's classical region by amp^{1/α}
            let part = amp.powf(1.0 / alpha) * dirichlet_superlinear(*alpha, lambda)?;
            let src = if *alpha == 1.0 {
                PartSource::LogLaw
            } else {
                PartSource::ZetaBeta
            };
            (0.0, part, src)
        }
        _ => {
            let volume = profile.volume();
            if volume.is_infinite() {
                return Err(Error::InfiniteVolume(format!(
                    "profile `{profile}` has infinite area but is not a power law with exponent <= 1"
                )));
            }
            (weyl_term(volume, lambda)?, 0.0, PartSource::WeylLaw)
        }
    };
    let (h, h_src) = h_sigma_part(profile, sigma, lambda)?;
    let linear_coefficient = match (regime, sigma.power_law()) {
        (WeylRegime::Linear { a }, Some((s, beta))) if beta == 0.0 && s > 0.0 => {
            Some(profile.volume() / (4.0 * PI) + a.abs() / (4.0 * s.sqrt()))
        }
        _ => None,
    };
    let (weyl_src, sup_src) = if superlinear > 0.0 {
        (PartSource::Absent, interior_src)
    } else {
        (interior_src, PartSource::Absent)
    };
    Ok(SpectralPrediction {
        lambda,
        weyl_part: weyl,
        h_sigma_part: h,
        dirichlet_superlinear_part: superlinear,
        total: weyl + h + superlinear,
        regime,
        sources: [weyl_src, h_src, sup_src],
        linear_coefficient,
    })
}

/// The point where `f(x_λ) = π/(4√λ)`: beyond it the lowest
/// Dirichlet–Neumann transverse level exceeds `λ`.
pub fn dn_threshold_x(profile: &CuspProfile, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let target = PI / (4.0 * lambda.sqrt());
    let a = profile.a();
    let fa = profile.f(a);
    if target > fa {
        return Err(Error::NoSolution(format!(
            "f never reaches {target} on (a, ∞): f(a) = {fa} is already smaller"
        )));
    }
    if target == fa {
        return Ok(a);
    }
    let mut hi = a + 1.0;
    while profile.f(hi) >= target {
        hi = a + 2.0 * (hi - a);
        if hi > 1e12 {
            return Err(Error::NoSolution(format!("f stays above {target} up to x = 1e12")));
        }
    }
    let mut lo = a;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if profile.f(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
