//! Cusp profiles `f`, Robin coefficients `σ`, and the effective potentials
//! derived from them.
//!
//! The domain is `{x > a, |y| < f(x)}`. Presets are addressable by string:
//!
//! | spec                                  | meaning                         |
//! |---------------------------------------|---------------------------------|
//! | `power:alpha=2`                       | `f = x^-2`                      |
//! | `power:alpha=2,amp=3`                 | `f = 3 x^-2`                    |
//! | `exp:c=1`                             | `f = e^(-x)`                    |
//! | `exp:c=1,p=2,amp=1`                   | `f = e^(-x^2)`                  |
//! | `const:v=1`                           | constant profile or coefficient |
//! | `powersigma:s=1,beta=0.5`             | `σ = x^-0.5`                    |
//! | `table:/path/to/samples.csv`          | monotone cubic through `(x, f)` |

mod audit;
mod table;

pub use audit::{
    audit_assumptions, geometric_probes, landau_check, AssumptionReport, Check, LandauCheck,
    Verdict,
};
pub use table::MonotoneCubic;

use crate::error::{invalid, Error, Result};
use crate::quad::adaptive_simpson;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `amp * x^-alpha`
    Power { alpha: f64, amp: f64 },
    /// `amp * exp(-rate * x^power)`
    Exponential { rate: f64, power: f64, amp: f64 },
    Constant { value: f64 },
    Table(Arc<MonotoneCubic>),
}

/// Half-width function `f` of the cusp together with its first two
/// derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspProfile {
    a: f64,
    kind: ProfileKind,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl CuspProfile {
    pub fn power(alpha: f64) -> Result<Self> {
        Self::scaled_power(alpha, 1.0)
    }

    pub fn scaled_power(alpha: f64, amp: f64) -> Result<Self> {
        Ok(Self {
            a: 1.0,
            kind: ProfileKind::Power {
                alpha: positive("alpha", alpha)?,
                amp: positive("amp", amp)?,
            },
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::stretched_exponential(rate, 1.0, 1.0)
    }

    pub fn stretched_exponential(rate: f64, power: f64, amp: f64) -> Result<Self> {
        Ok(Self {
            a: 1.0,
            kind: ProfileKind::Exponential {
                rate: positive("c", rate)?,
                power: positive("p", power)?,
                amp: positive("amp", amp)?,
            },
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Ok(Self {
            a: 1.0,
            kind: ProfileKind::Constant {
                value: positive("v", value)?,
            },
        })
    }

    pub fn from_table(table: MonotoneCubic) -> Result<Self> {
        if table.samples().1.iter().any(|&y| y <= 0.0) {
            return Err(invalid("table profile must be positive"));
        }
        let a = table.x_range().0;
        Ok(Self {
            a,
            kind: ProfileKind::Table(Arc::new(table)),
        })
    }

    /// Moves the left endpoint of the axis.
    pub fn with_left_endpoint(mut self, a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(invalid("left endpoint must be finite"));
        }
        if let ProfileKind::Power { .. } = self.kind {
            positive("left endpoint of a power profile", a)?;
        }
        self.a = a;
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    /// `[f, f', f'']` at `x`.
    pub fn eval_all(&self, x: f64) -> [f64; 3] {
        match &self.kind {
            ProfileKind::Power { alpha, amp } => {
                let f = amp * x.powf(-alpha);
                [f, -alpha * f / x, alpha * (alpha + 1.0) * f / (x * x)]
            }
            ProfileKind::Exponential { rate, power, amp } => {
                let f = amp * (-rate * x.powf(*power)).exp();
                let g = rate * power * x.powf(power - 1.0);
                let dg = rate * power * (power - 1.0) * x.powf(power - 2.0);
                [f, -g * f, (g * g - dg) * f]
            }
            ProfileKind::Constant { value } => [*value, 0.0, 0.0],
            ProfileKind::Table(t) => t.eval(x),
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        self.eval_all(x)[0]
    }

    pub fn f1(&self, x: f64) -> f64 {
        self.eval_all(x)[1]
    }

    pub fn f2(&self, x: f64) -> f64 {
        self.eval_all(x)[2]
    }

    /// Closed form of `∫_a^∞ f` when one is known.
    pub fn tail_integral_hint(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Power { alpha, amp } if alpha > 1.0 => {
                Some(amp * self.a.powf(1.0 - alpha) / (alpha - 1.0))
            }
            ProfileKind::Exponential { rate, power, amp } if power == 1.0 => {
                Some(amp / rate * (-rate * self.a).exp())
            }
            _ => None,
        }
    }

    /// `∫_x^∞ f`, or `+∞` when the integral diverges.
    ///
    /// The integral is truncated where `f < 1e-14 f(x)` and completed with an
    /// analytic remainder for the known kinds.
    /// `ln f(x)`, evaluated without forming `f` for the analytic kinds.
    pub fn ln_f(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Power { alpha, amp } => amp.ln() - alpha * x.ln(),
            ProfileKind::Exponential { rate, power, amp } => amp.ln() - rate * x.powf(*power),
            ProfileKind::Constant { value } => value.ln(),
            ProfileKind::Table(_) => self.f(x).ln(),
        }
    }

    pub fn tail_integral(&self, x: f64) -> f64 {
        let fx = self.f(x);
        match &self.kind {
            ProfileKind::Power { alpha, amp } => {
                if *alpha <= 1.0 {
                    return f64::INFINITY;
                }
                if x > 0.0 {
                    return amp * x.powf(1.0 - alpha) / (alpha - 1.0);
                }
            }
            ProfileKind::Constant { .. } => return f64::INFINITY,
            ProfileKind::Table(t) => {
                let (_, hi) = t.x_range();
                let [yh, dyh, _] = t.eval(hi);
                if dyh >= 0.0 {
                    return f64::INFINITY;
                }
                if x >= hi {
                    return self.f(x) * yh / -dyh;
                }
                let body = integrate_relative(|s| self.f(s), x, hi, 1e-11);
                return body + yh * yh / -dyh;
            }
            ProfileKind::Exponential { .. } => {}
        }
        // locate the truncation point by doubling the distance from x
        let cutoff = 1e-14 * fx;
        let mut step = 1.0_f64.max(x.abs() * 1e-3);
        let mut end = x + step;
        while self.f(end) >= cutoff {
            step *= 2.0;
            end = x + step;
            if !end.is_finite() || step > 1e12 {
                return f64::INFINITY;
            }
        }
        let body = integrate_relative(|s| self.f(s), x, end, 1e-11);
        let remainder = match self.kind {
            ProfileKind::Exponential { rate, power, .. } => {
                self.f(end) * end.powf(1.0 - power) / (rate * power)
            }
            _ => 0.0,
        };
        body + remainder
    }

    /// `|Ω| = 2 ∫_a^∞ f`, or `+∞`.
    pub fn volume(&self) -> f64 {
        2.0 * self
            .tail_integral_hint()
            .unwrap_or_else(|| self.tail_integral(self.a))
    }
}

/// `∫ g` over `[lo, hi]` with a relative tolerance, subdividing
/// geometrically so that power-law and exponential variation both resolve.
pub(crate) fn integrate_relative<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, rel: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut pieces = vec![lo];
    let mut x = lo;
    let mut width = (hi - lo) / 4096.0;
    while x < hi {
        x = (x + width).min(hi);
        pieces.push(x);
        width *= 1.5;
    }
    pieces
        .windows(2)
        .map(|w| {
            let (p, q) = (w[0], w[1]);
            let rough = 0.5 * (q - p) * (g(p).abs() + g(q).abs() + 2.0 * g(0.5 * (p + q)).abs());
            adaptive_simpson(&g, p, q, (rel * rough).max(1e-300))
        })
        .sum()
}

impl FromStr for CuspProfile {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (kind, rest) = split_spec(spec)?;
        match kind {
            "power" => {
                let p = Params::parse(spec, rest, &["alpha", "amp"])?;
                Self::scaled_power(p.req("alpha")?, p.opt("amp", 1.0))
            }
            "exp" => {
                let p = Params::parse(spec, rest, &["c", "p", "amp"])?;
                Self::stretched_exponential(p.req("c")?, p.opt("p", 1.0), p.opt("amp", 1.0))
            }
            "const" => {
                let p = Params::parse(spec, rest, &["v"])?;
                Self::constant(p.req("v")?)
            }
            "table" => Self::from_table(MonotoneCubic::from_csv(Path::new(rest))?),
            other => Err(parse_err(spec, format!("unknown profile kind `{other}`"))),
        }
    }
}

impl fmt::Display for CuspProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ProfileKind::Power { alpha, amp } if *amp == 1.0 => write!(f, "power:alpha={alpha}"),
            ProfileKind::Power { alpha, amp } => write!(f, "power:alpha={alpha},amp={amp}"),
            ProfileKind::Exponential { rate, power, amp } => {
                write!(f, "exp:c={rate},p={power},amp={amp}")
            }
            ProfileKind::Constant { value } => write!(f, "const:v={value}"),
            ProfileKind::Table(t) => write!(f, "table:<{} samples>", t.samples().0.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SigmaKind {
    Constant { value: f64 },
    /// `scale * x^-beta`
    Power { scale: f64, beta: f64 },
    Table(Arc<MonotoneCubic>),
}

impl SigmaKind {
    fn eval_all(&self, x: f64) -> [f64; 3] {
        match self {
            SigmaKind::Constant { value } => [*value, 0.0, 0.0],
            SigmaKind::Power { scale, beta } => {
                let s = scale * x.powf(-beta);
                [s, -beta * s / x, beta * (beta + 1.0) * s / (x * x)]
            }
            SigmaKind::Table(t) => t.eval(x),
        }
    }
}

impl FromStr for SigmaKind {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (kind, rest) = split_spec(spec)?;
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(parse_err(spec, format!("{name} must be nonnegative, got {v}")))
            }
        };
        match kind {
            "const" => {
                let p = Params::parse(spec, rest, &["v"])?;
                Ok(SigmaKind::Constant {
                    value: nonneg("v", p.req("v")?)?,
                })
            }
            "powersigma" => {
                let p = Params::parse(spec, rest, &["s", "beta"])?;
                let beta = p.req("beta")?;
                if !beta.is_finite() {
                    return Err(parse_err(spec, "beta must be finite"));
                }
                Ok(SigmaKind::Power {
                    scale: nonneg("s", p.req("s")?)?,
                    beta,
                })
            }
            "table" => {
                let t = MonotoneCubic::from_csv(Path::new(rest))?;
                if t.samples().1.iter().any(|&v| v < 0.0) {
                    return Err(parse_err(spec, "coefficient table must be nonnegative"));
                }
                Ok(SigmaKind::Table(Arc::new(t)))
            }
            other => Err(parse_err(spec, format!("unknown coefficient kind `{other}`"))),
        }
    }
}

impl fmt::Display for SigmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaKind::Constant { value } => write!(f, "const:v={value}"),
            SigmaKind::Power { scale, beta } => write!(f, "powersigma:s={scale},beta={beta}"),
            SigmaKind::Table(t) => write!(f, "table:<{} samples>", t.samples().0.len()),
        }
    }
}

/// Robin weight `σ` on both boundary curves, or the pair `(σ₁, σ₂)` when the
/// lower (`y = -f`) and upper (`y = f`) boundaries differ.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCoefficient {
    lower: SigmaKind,
    upper: Option<SigmaKind>,
}

impl BoundaryCoefficient {
    pub fn symmetric(kind: SigmaKind) -> Self {
        Self {
            lower: kind,
            upper: None,
        }
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid(format!("sigma must be nonnegative, got {value}")));
        }
        Ok(Self::symmetric(SigmaKind::Constant { value }))
    }

    pub fn power(scale: f64, beta: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0 && beta.is_finite()) {
            return Err(invalid("power coefficient needs finite s >= 0 and beta"));
        }
        Ok(Self::symmetric(SigmaKind::Power { scale, beta }))
    }

    /// `σ₁` on the lower boundary, `σ₂` on the upper one.
    pub fn pair(sigma1: SigmaKind, sigma2: SigmaKind) -> Self {
        Self {
            lower: sigma1,
            upper: Some(sigma2),
        }
    }

    pub fn is_pair(&self) -> bool {
        self.upper.is_some()
    }

    pub fn sigma1(&self, x: f64) -> f64 {
        self.lower.eval_all(x)[0]
    }

    pub fn sigma2(&self, x: f64) -> f64 {
        self.upper.as_ref().unwrap_or(&self.lower).eval_all(x)[0]
    }

    /// `[σ̄, σ̄', σ̄'']` where `σ̄ = (σ₁ + σ₂)/2` (just `σ` when symmetric).
    pub fn eval_all(&self, x: f64) -> [f64; 3] {
        let lo = self.lower.eval_all(x);
        match &self.upper {
            None => lo,
            Some(up) => {
                let hi = up.eval_all(x);
                [
                    0.5 * (lo[0] + hi[0]),
                    0.5 * (lo[1] + hi[1]),
                    0.5 * (lo[2] + hi[2]),
                ]
            }
        }
    }

    pub fn sigma(&self, x: f64) -> f64 {
        self.eval_all(x)[0]
    }

    pub fn sigma_deriv(&self, x: f64) -> f64 {
        self.eval_all(x)[1]
    }

    pub fn sigma_second_deriv(&self, x: f64) -> f64 {
        self.eval_all(x)[2]
    }

    pub fn lower(&self) -> &SigmaKind {
        &self.lower
    }

    pub fn upper(&self) -> Option<&SigmaKind> {
        self.upper.as_ref()
    }

    /// `(s, beta)` when `σ = s x^-beta` (constants have `beta = 0`) and the
    /// coefficient is symmetric.
    pub fn power_law(&self) -> Option<(f64, f64)> {
        if self.upper.is_some() {
            return None;
        }
        match self.lower {
            SigmaKind::Constant { value } => Some((value, 0.0)),
            SigmaKind::Power { scale, beta } => Some((scale, beta)),
            SigmaKind::Table(_) => None,
        }
    }
}

impl FromStr for BoundaryCoefficient {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        Ok(Self::symmetric(spec.parse()?))
    }
}

impl fmt::Display for BoundaryCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.upper {
            None => write!(f, "{}", self.lower),
            Some(up) => write!(f, "({}; {})", self.lower, up),
        }
    }
}

/// `f=x^-alpha` on `(1, ∞)`.
pub fn make_power_profile(alpha: f64) -> Result<CuspProfile> {
    CuspProfile::power(alpha)
}

fn check_eval(x: f64, vals: &[f64]) -> Result<()> {
    if vals[0] == 0.0 {
        return Err(Error::Evaluation {
            x,
            reason: "profile vanishes".into(),
        });
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation {
            x,
            reason: "non-finite profile data".into(),
        });
    }
    Ok(())
}

/// `V = (1/4)(f'/f)² + (1/2)(f'/f)'`.
pub fn eval_v(profile: &CuspProfile, x: f64) -> Result<f64> {
    let fv = profile.eval_all(x);
    check_eval(x, &fv)?;
    let [f, f1, f2] = fv;
    let g = f1 / f;
    // (f'/f)' = f''/f - (f'/f)²
    Ok(0.25 * g * g + 0.5 * (f2 / f - g * g))
}

/// `W_σ = V + σ/f`, with `σ̄` in pair mode.
pub fn eval_w(profile: &CuspProfile, sigma: &BoundaryCoefficient, x: f64) -> Result<f64> {
    let v = eval_v(profile, x)?;
    Ok(v + sigma.sigma(x) / profile.f(x))
}

/// Behaviour of `x² f(x)` at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeylRegime {
    /// `x² f → 0`
    Weyl,
    /// `x² f → a²`
    Linear { a: f64 },
    /// `x² f → ∞`
    Superlinear,
    Inconclusive,
}

impl WeylRegime {
    pub fn tag(&self) -> &'static str {
        match self {
            WeylRegime::Weyl => "weyl",
            WeylRegime::Linear { .. } => "linear",
            WeylRegime::Superlinear => "superlinear",
            WeylRegime::Inconclusive => "inconclusive",
        }
    }
}

pub fn classify_weyl_regime(profile: &CuspProfile) -> WeylRegime {
    match profile.kind {
        ProfileKind::Power { alpha, amp } => {
            if (alpha - 2.0).abs() < 1e-12 {
                WeylRegime::Linear { a: amp.sqrt() }
            } else if alpha > 2.0 {
                WeylRegime::Weyl
            } else {
                WeylRegime::Superlinear
            }
        }
        ProfileKind::Exponential { .. } => WeylRegime::Weyl,
        ProfileKind::Constant { .. } => WeylRegime::Superlinear,
        ProfileKind::Table(_) => WeylRegime::Inconclusive,
    }
}

/// `(∫_a^x dt/f) · (∫_x^∞ f)`; `+∞` when the tail integral diverges.
pub fn neumann_discreteness_value(profile: &CuspProfile, x: f64) -> Result<f64> {
    let a = profile.a();
    if !(x > a) {
        return Err(invalid(format!("need x > a = {a}, got {x}")));
    }
    let exponential = matches!(profile.kind(), ProfileKind::Exponential { .. });
    let tail = if exponential { 0.0 } else { profile.tail_integral(x) };
    if !tail.is_finite() {
        return Ok(f64::INFINITY);
    }
    // written as (∫ₐˣ f(x)/f(t) dt)·(∫ₓ^∞ f(s)/f(x) ds) so fast-decaying
    // profiles neither overflow nor underflow
    let ln_fx = profile.ln_f(x);
    let head = integrate_relative(|t| (ln_fx - profile.ln_f(t)).exp(), a, x, 1e-11);
    let scaled_tail = match profile.kind() {
        ProfileKind::Power { alpha, .. } => x / (alpha - 1.0),
        ProfileKind::Exponential { rate, power, .. } => {
            let g = |s: f64| (profile.ln_f(s) - ln_fx).exp();
            let mut end = x + 1.0_f64.max(x.abs() * 1e-3);
            while g(end) >= 1e-16 {
                end = x + 2.0 * (end - x);
            }
            integrate_relative(g, x, end, 1e-11) + g(end) * end.powf(1.0 - power) / (rate * power)
        }
        _ => tail / profile.f(x),
    };
    Ok(head * scaled_tail)
}

fn split_spec(spec: &str) -> Result<(&str, &str)> {
    spec.trim()
        .split_once(':')
        .ok_or_else(|| parse_err(spec, "expected `kind:params`"))
}

fn parse_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

struct Params<'a> {
    spec: &'a str,
    values: Vec<(&'a str, f64)>,
}

impl<'a> Params<'a> {
    fn parse(spec: &'a str, body: &'a str, allowed: &[&str]) -> Result<Self> {
        let mut values = Vec::new();
        for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| parse_err(spec, format!("expected key=value, got `{item}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if !allowed.contains(&k) {
                return Err(parse_err(spec, format!("unknown key `{k}`")));
            }
            let v: f64 = v
                .parse()
                .map_err(|_| parse_err(spec, format!("`{v}` is not a number")))?;
            values.push((k, v));
        }
        Ok(Self { spec, values })
    }

    fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    fn req(&self, key: &str) -> Result<f64> {
        self.get(key)
            .ok_or_else(|| parse_err(self.spec, format!("missing `{key}`")))
    }

    fn opt(&self, key: &str, default: f64) -> f64 {
        self.get(key).unwrap_or(default)
    }
}
