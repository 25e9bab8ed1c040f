//! One-dimensional Schrödinger operators `-d²/dx² + q(x)` on a truncated
//! half-line, discretized by the three-point stencil and counted exactly
//! through the Sturm sequence of `T - λI`.

use crate::count::{CountMethod, CountResult, Discretization};
use crate::error::{invalid, Error, Result};
use crate::profiles::{eval_w, BoundaryCoefficient, CuspProfile};
use std::f64::consts::PI;
use std::sync::Arc;

/// A potential `x ↦ q(x)`. Points where the cusp has numerically vanished
/// evaluate to `+∞`.
pub type Potential = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bc {
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for Bc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" | "D" => Ok(Bc::Dirichlet),
            "neumann" | "N" => Ok(Bc::Neumann),
            _ => Err(invalid(format!("unknown boundary condition `{s}`"))),
        }
    }
}

/// Uniform grid with `n` interior nodes `a + i h`, `i = 1..=n`, on `(a, x_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub x_max: f64,
    pub n: usize,
    pub h: f64,
}

impl Grid1D {
    pub fn new(a: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(invalid(format!("grid needs at least 16 nodes, got {n}")));
        }
        if !(x_max > a) || !a.is_finite() || !x_max.is_finite() {
            return Err(invalid(format!("empty interval ({a}, {x_max})")));
        }
        Ok(Self {
            a,
            x_max,
            n,
            h: (x_max - a) / (n + 1) as f64,
        })
    }

    /// Finest uniform grid on `(a, x_max)` with spacing at most `h_max`.
    pub fn with_max_spacing(a: f64, x_max: f64, h_max: f64) -> Result<Self> {
        let cells = ((x_max - a) / h_max).ceil().max(17.0) as usize;
        Self::new(a, x_max, cells - 1)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + (i + 1) as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }

    pub fn discretization(&self) -> Discretization {
        Discretization::Line {
            a: self.a,
            x_max: self.x_max,
            n: self.n,
            h: self.h,
        }
    }
}

fn eval_q(q: &Potential, x: f64) -> Result<f64> {
    let v = q(x);
    if v.is_nan() {
        Err(Error::Evaluation {
            x,
            reason: "potential is NaN".into(),
        })
    } else {
        Ok(v)
    }
}

/// First point past `a` where `q` reaches `level` while increasing.
fn confinement_point(q: &Potential, a: f64, level: f64) -> Result<f64> {
    const LIMIT: f64 = 1e6;
    let mut prev_x = a;
    let mut prev_q = eval_q(q, a)?;
    let mut step = 1e-3 * a.abs().max(1.0);
    loop {
        let x = prev_x + step;
        if x > LIMIT {
            return Err(Error::NotConfining {
                target: level,
                limit: LIMIT,
            });
        }
        let qx = eval_q(q, x)?;
        if qx >= level && qx > prev_q {
            if prev_q >= level {
                return Ok(prev_x);
            }
            let (mut lo, mut hi) = (prev_x, x);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if eval_q(q, mid)? >= level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(hi);
        }
        prev_x = x;
        prev_q = qx;
        step *= 1.05;
    }
}

/// Grid for counting below `lambda_max`: truncated at twice the distance to
/// the point where `q ≥ 4 λ_max`, with at least `resolution` points per
/// shortest local wavelength `2π/√λ_max`.
pub fn build_grid(a: f64, lambda_max: f64, q: &Potential, resolution: f64) -> Result<Grid1D> {
    if !(resolution >= 10.0) {
        return Err(invalid(format!("resolution must be >= 10, got {resolution}")));
    }
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(invalid(format!("lambda_max must be positive, got {lambda_max}")));
    }
    let turning = confinement_point(q, a, 4.0 * lambda_max)?;
    let x_max = a + 2.0 * (turning - a);
    let h_max = 2.0 * PI / (resolution * lambda_max.sqrt());
    Grid1D::with_max_spacing(a, x_max.max(a + 17.0 * f64::EPSILON.sqrt()), h_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub bc_left: Bc,
    pub bc_right: Bc,
    pub h: f64,
    pub grid: Grid1D,
}

/// Three-point discretization of `-d²/dx² + q`. A Neumann end uses ghost
/// reflection, so its diagonal carries `1/h²` instead of `2/h²`.
pub fn assemble(grid: &Grid1D, q: &Potential, bc_left: Bc, bc_right: Bc) -> Result<TridiagonalOperator> {
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let mut diag = grid
        .nodes()
        .map(|x| eval_q(q, x).map(|v| 2.0 * inv_h2 + v))
        .collect::<Result<Vec<_>>>()?;
    if bc_left == Bc::Neumann {
        diag[0] -= inv_h2;
    }
    if bc_right == Bc::Neumann {
        let last = diag.len() - 1;
        diag[last] -= inv_h2;
    }
    Ok(TridiagonalOperator {
        diag,
        offdiag: vec![-inv_h2; grid.n - 1],
        bc_left,
        bc_right,
        h: grid.h,
        grid: *grid,
    })
}

impl TridiagonalOperator {
    /// The operator `c T`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.diag.iter_mut().for_each(|d| *d *= c);
        out.offdiag.iter_mut().for_each(|e| *e *= c);
        out
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }
}

/// Negative pivots of the LDLᵀ sweep of `T - λI`, or the index of a
/// vanishing pivot.
pub fn sturm_negatives(diag: &[f64], offdiag: &[f64], lambda: f64) -> std::result::Result<usize, usize> {
    const TINY: f64 = 1e-300;
    let mut count = 0;
    let mut d = diag[0] - lambda;
    for i in 0..diag.len() {
        if i > 0 {
            let e = offdiag[i - 1];
            d = (diag[i] - lambda) - e * e / d;
        }
        if d.abs() < TINY || d.is_nan() {
            return Err(i);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    Ok(count)
}

/// `N_λ(T)`: eigenvalues of the discrete operator strictly below `lambda`.
pub fn count_below(t: &TridiagonalOperator, lambda: f64) -> CountResult {
    let step = 1e-9 * (1.0 + lambda.abs());
    let mut shift = 0.0;
    let count = loop {
        match sturm_negatives(&t.diag, &t.offdiag, lambda + shift) {
            Ok(c) => break c,
            Err(_) => shift -= step,
        }
    };
    CountResult {
        lambda,
        count,
        method: CountMethod::SturmSequence,
        discretization: t.grid.discretization(),
        shift_applied: shift,
        modes_used: None,
    }
}

/// The `k`-th eigenvalue (1-based) of `T`, by bisection on the count.
pub fn eigenvalue_k(t: &TridiagonalOperator, k: usize) -> Result<f64> {
    if k == 0 || k > t.dim() {
        return Err(invalid(format!("index {k} outside 1..={}", t.dim())));
    }
    let spread = 2.0 / (t.h * t.h);
    let finite = t.diag.iter().copied().filter(|d| d.is_finite());
    let lo0 = finite.clone().fold(f64::INFINITY, f64::min) - spread;
    let hi0 = finite.fold(f64::NEG_INFINITY, f64::max) + spread;
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-10 * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
            break;
        }
        if count_below(t, mid).count >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn w_potential(profile: &CuspProfile, sigma: &BoundaryCoefficient) -> impl Fn(f64) -> f64 {
    let (p, s) = (profile.clone(), sigma.clone());
    move |x| eval_w(&p, &s, x).unwrap_or(f64::INFINITY)
}

/// `W_σ + k²π²/(4f²)`; `k = 0` gives `W_σ` itself.
pub fn mode_potential(profile: &CuspProfile, sigma: &BoundaryCoefficient, k: u32) -> Potential {
    let w = w_potential(profile, sigma);
    if k == 0 {
        return Arc::new(w);
    }
    let p = profile.clone();
    let c = (k as f64 * PI).powi(2) / 4.0;
    Arc::new(move |x| {
        let f = p.f(x);
        w(x) + if f > 0.0 { c / (f * f) } else { f64::INFINITY }
    })
}

/// `π²k²/(4f²)`, the mode potentials of the Dirichlet comparison operator.
pub fn dirichlet_mode_potential(profile: &CuspProfile, k: u32) -> Result<Potential> {
    if k == 0 {
        return Err(invalid("Dirichlet mode index starts at 1"));
    }
    let p = profile.clone();
    let c = (k as f64 * PI).powi(2) / 4.0;
    Ok(Arc::new(move |x| {
        let f = p.f(x);
        if f > 0.0 {
            c / (f * f)
        } else {
            f64::INFINITY
        }
    }))
}

/// Which family of transverse modes to sum.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeFamily {
    /// `W_σ + k²π²/(4f²)`, `k ≥ 0`: the reduced Robin operator.
    Robin(BoundaryCoefficient),
    /// `k²π²/(4f²)`, `k ≥ 1`: the Dirichlet comparison operator.
    DirichletB,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSumOptions {
    pub bc_left: Bc,
    pub bc_right: Bc,
    /// Left endpoint; the profile's own when `None`.
    pub a: Option<f64>,
    /// Truncation point; chosen by [`build_grid`] when `None`.
    pub x_max: Option<f64>,
    pub resolution: f64,
}

impl Default for ModeSumOptions {
    fn default() -> Self {
        Self {
            bc_left: Bc::Dirichlet,
            bc_right: Bc::Dirichlet,
            a: None,
            x_max: None,
            resolution: 10.0,
        }
    }
}

impl ModeFamily {
    fn first_mode(&self) -> u32 {
        match self {
            ModeFamily::Robin(_) => 0,
            ModeFamily::DirichletB => 1,
        }
    }

    fn potential(&self, profile: &CuspProfile, k: u32) -> Potential {
        match self {
            ModeFamily::Robin(sigma) => mode_potential(profile, sigma, k),
            ModeFamily::DirichletB => dirichlet_mode_potential(profile, k).expect("k >= 1"),
        }
    }
}

/// The grid shared by every mode of a mode sum below `lambda`.
pub fn mode_sum_grid(
    profile: &CuspProfile,
    family: &ModeFamily,
    lambda: f64,
    opts: &ModeSumOptions,
) -> Result<Grid1D> {
    let a = opts.a.unwrap_or(profile.a());
    match opts.x_max {
        Some(x_max) => {
            if !(opts.resolution >= 10.0) {
                return Err(invalid("resolution must be >= 10"));
            }
            let h_max = 2.0 * PI / (opts.resolution * lambda.max(1.0).sqrt());
            Grid1D::with_max_spacing(a, x_max, h_max)
        }
        None => {
            let q0 = family.potential(profile, family.first_mode());
            build_grid(a, lambda, &q0, opts.resolution)
        }
    }
}

/// `Σ_k N_λ(L_k)` over transverse modes, stopping at the first mode whose
/// potential exceeds `lambda` at every grid node (the discrete count of that
/// and every later mode is then zero).
pub fn mode_sum_count(
    profile: &CuspProfile,
    family: &ModeFamily,
    lambda: f64,
    opts: &ModeSumOptions,
) -> Result<CountResult> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let grid = mode_sum_grid(profile, family, lambda, opts)?;
    mode_sum_on_grid(profile, family, lambda, &grid, opts.bc_left, opts.bc_right)
}

pub fn mode_sum_on_grid(
    profile: &CuspProfile,
    family: &ModeFamily,
    lambda: f64,
    grid: &Grid1D,
    bc_left: Bc,
    bc_right: Bc,
) -> Result<CountResult> {
    let mut total = 0;
    let mut shift: f64 = 0.0;
    let mut k = family.first_mode();
    loop {
        let q = family.potential(profile, k);
        let t = assemble(grid, &q, bc_left, bc_right)?;
        let floor = grid.nodes().map(|x| q(x)).fold(f64::INFINITY, f64::min);
        if floor >= lambda {
            break;
        }
        let c = count_below(&t, lambda);
        total += c.count;
        if c.shift_applied.abs() > shift.abs() {
            shift = c.shift_applied;
        }
        k += 1;
        if k > 1_000_000 {
            return Err(invalid("mode sum did not terminate"));
        }
    }
    Ok(CountResult {
        lambda,
        count: total,
        method: CountMethod::ModeSum,
        discretization: grid.discretization(),
        shift_applied: shift,
        modes_used: Some((k - family.first_mode()) as usize),
    })
}

/// Largest deviation of `N^Neumann - N^Dirichlet` from `{0, 1}` across the
/// sweep, on one grid sized for the largest `λ`.
pub fn rank_one_check(q: &Potential, lambda_sweep: &[f64], a: f64, resolution: f64) -> Result<usize> {
    let lambda_max = lambda_sweep
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if lambda_sweep.is_empty() {
        return Err(invalid("empty lambda sweep"));
    }
    let grid = build_grid(a, lambda_max, q, resolution)?;
    let dir = assemble(&grid, q, Bc::Dirichlet, Bc::Dirichlet)?;
    let neu = assemble(&grid, q, Bc::Neumann, Bc::Dirichlet)?;
    Ok(lambda_sweep
        .iter()
        .map(|&l| {
            let diff = count_below(&neu, l).count as i64 - count_below(&dir, l).count as i64;
            if diff < 0 {
                (-diff) as usize
            } else {
                (diff - 1).max(0) as usize
            }
        })
        .max()
        .unwrap_or(0))
}
