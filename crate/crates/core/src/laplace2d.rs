//! Finite element counting on the truncated cusp `{a < x < X, |y| < f(x)}`.
//!
//! The map `t = y/f(x)` turns the cusp into the strip `(a, X) × (-1, 1)`.
//! With `u(x, t) = φ(x, f(x) t)` the Robin form becomes
//!
//! ```text
//! K[u] = ∬ [(u_x - t (f'/f) u_t)² + f⁻² u_t²] f dx dt + ∫ σ₁ u(x,-1)² dx + ∫ σ₂ u(x,1)² dx
//! M[u] = ∬ u² f dx dt
//! ```
//!
//! which is discretized with bilinear elements on a tensor mesh (2×2 Gauss
//! points per cell, trapezoidal Robin edges). Counting is Sylvester inertia
//! of `K - λM`.

use crate::band::{pencil_count_below, SymBandMatrix};
use crate::count::{CountMethod, CountResult, Discretization};
use crate::error::{invalid, Error, Result};
use crate::profiles::{BoundaryCoefficient, CuspProfile};
use crate::schrodinger1d::{build_grid, dirichlet_mode_potential, mode_potential, Bc, Potential};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

/// Tensor mesh on `[a, X] × [-1, 1]` with uniform `t` spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedMesh {
    x_nodes: Vec<f64>,
    t_nodes: Vec<f64>,
}

impl MappedMesh {
    pub fn new(x_nodes: Vec<f64>, n_t: usize) -> Result<Self> {
        if x_nodes.len() < 8 || n_t < 8 {
            return Err(Error::Mesh(format!(
                "need at least 8×8 nodes, got {}×{n_t}",
                x_nodes.len()
            )));
        }
        Self::raw(x_nodes, n_t)
    }

    fn raw(x_nodes: Vec<f64>, n_t: usize) -> Result<Self> {
        if x_nodes.windows(2).any(|w| !(w[1] > w[0])) || x_nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Mesh("x nodes must be finite and strictly increasing".into()));
        }
        let t_nodes = (0..n_t)
            .map(|j| -1.0 + 2.0 * j as f64 / (n_t - 1) as f64)
            .collect();
        Ok(Self { x_nodes, t_nodes })
    }

    pub fn uniform(a: f64, x_max: f64, n_x: usize, n_t: usize) -> Result<Self> {
        if !(x_max > a) {
            return Err(Error::Mesh(format!("empty interval ({a}, {x_max})")));
        }
        let nodes = (0..n_x)
            .map(|i| a + (x_max - a) * i as f64 / (n_x.max(2) - 1) as f64)
            .collect();
        Self::new(nodes, n_t)
    }

    /// Graded mesh for counting below `lambda`: each x-cell is at most
    /// `2π/(√λ·resolution)` long and short enough that `f` changes by at
    /// most 3% across it. The t-spacing resolves the shortest transverse
    /// wavelength at the widest cross-section. Every breakpoint in `(a, X)`
    /// becomes a node.
    pub fn auto(
        profile: &CuspProfile,
        x_max: f64,
        lambda: f64,
        resolution: f64,
        breakpoints: &[f64],
    ) -> Result<Self> {
        Self::auto_graded(profile, x_max, lambda, resolution, 0.03, breakpoints)
    }

    /// [`MappedMesh::auto`] with `f` allowed to change by the fraction
    /// `grade` across one cell.
    pub fn auto_graded(
        profile: &CuspProfile,
        x_max: f64,
        lambda: f64,
        resolution: f64,
        grade: f64,
        breakpoints: &[f64],
    ) -> Result<Self> {
        if !(grade > 0.0 && grade < 1.0) {
            return Err(invalid(format!("grade must lie in (0, 1), got {grade}")));
        }
        let a = profile.a();
        if !(x_max > a) {
            return Err(Error::Mesh(format!("empty interval ({a}, {x_max})")));
        }
        if !(resolution >= 4.0) || !(lambda > 0.0) {
            return Err(invalid("mesh needs lambda > 0 and resolution >= 4"));
        }
        let wave = 2.0 * PI / (lambda.sqrt() * resolution);
        let step = |x: f64| {
            let [f, f1, _] = profile.eval_all(x);
            let cap = if f1 != 0.0 { grade * f / f1.abs() } else { f64::INFINITY };
            wave.min(cap).max(1e-9 * (1.0 + x.abs()))
        };
        let mut stops: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&b| b > a && b < x_max)
            .collect();
        stops.sort_by(f64::total_cmp);
        stops.dedup();
        stops.push(x_max);

        let mut nodes = vec![a];
        let mut start = a;
        for &end in &stops {
            let mut seg = vec![start];
            let mut x = start;
            while x < end {
                x += step(x);
                seg.push(x);
            }
            let scale = (end - start) / (x - start);
            nodes.extend(seg[1..].iter().map(|&s| start + (s - start) * scale));
            *nodes.last_mut().unwrap() = end;
            start = end;
        }
        while nodes.len() < 8 {
            nodes = refine_nodes(&nodes);
        }
        let f_max = (0..nodes.len() - 1)
            .map(|i| profile.f(nodes[i]).max(profile.f(0.5 * (nodes[i] + nodes[i + 1]))))
            .fold(0.0, f64::max);
        let h_t = 2.0 * PI / (f_max * lambda.sqrt() * resolution);
        let n_t = ((2.0 / h_t).ceil() as usize + 1).max(8);
        Self::new(nodes, n_t)
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn n_x(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn n_t(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn a(&self) -> f64 {
        self.x_nodes[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x_nodes.last().unwrap()
    }

    /// Halves every cell in both directions; existing nodes are kept.
    pub fn refined(&self) -> Self {
        Self {
            x_nodes: refine_nodes(&self.x_nodes),
            t_nodes: refine_nodes(&self.t_nodes),
        }
    }

    pub fn node_index(&self, x: f64) -> Option<usize> {
        let tol = 1e-12 * (1.0 + x.abs());
        self.x_nodes.iter().position(|&n| (n - x).abs() <= tol)
    }

    fn slice_x(&self, lo: usize, hi: usize) -> Self {
        Self {
            x_nodes: self.x_nodes[lo..=hi].to_vec(),
            t_nodes: self.t_nodes.clone(),
        }
    }
}

fn refine_nodes(nodes: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * nodes.len() - 1);
    for w in nodes.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(*nodes.last().unwrap());
    out
}

/// Condition on a lateral edge `t = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeBc {
    Dirichlet,
    Neumann,
    Robin,
}

impl EdgeBc {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeBc::Dirichlet => "dirichlet",
            EdgeBc::Neumann => "neumann",
            EdgeBc::Robin => "robin",
        }
    }
}

impl std::str::FromStr for EdgeBc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(EdgeBc::Dirichlet),
            "neumann" => Ok(EdgeBc::Neumann),
            "robin" => Ok(EdgeBc::Robin),
            _ => Err(invalid(format!("unknown edge condition `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeBcs {
    pub left: Bc,
    pub right: Bc,
    pub bottom: EdgeBc,
    pub top: EdgeBc,
}

impl EdgeBcs {
    /// Dirichlet at both ends of the strip, Robin on both sides.
    pub fn robin() -> Self {
        Self {
            left: Bc::Dirichlet,
            right: Bc::Dirichlet,
            bottom: EdgeBc::Robin,
            top: EdgeBc::Robin,
        }
    }

    pub fn all_dirichlet() -> Self {
        Self {
            bottom: EdgeBc::Dirichlet,
            top: EdgeBc::Dirichlet,
            ..Self::robin()
        }
    }

    pub fn lateral(bottom: EdgeBc, top: EdgeBc) -> Self {
        Self {
            bottom,
            top,
            ..Self::robin()
        }
    }
}

/// Stiffness and mass matrices of one discretized problem.
#[derive(Debug, Clone)]
pub struct GeneralizedPencil {
    pub k: SymBandMatrix,
    pub m: SymBandMatrix,
    pub bcs: EdgeBcs,
    pub mesh: MappedMesh,
}

impl GeneralizedPencil {
    pub fn unknowns(&self) -> usize {
        self.k.dim()
    }

    pub fn bandwidth(&self) -> usize {
        self.k.bandwidth()
    }

    pub fn discretization(&self) -> Discretization {
        Discretization::Mesh {
            n_x: self.mesh.n_x(),
            n_t: self.mesh.n_t(),
            x_max: self.mesh.x_max(),
            bandwidth: self.bandwidth(),
            unknowns: self.unknowns(),
        }
    }
}

#[derive(Clone, Copy)]
enum Form {
    /// The mapped Robin form with Jacobian weight `f`.
    Mapped,
    /// `∬ u_x² + f⁻² u_t²` with unit weight.
    Comparison,
}

const GAUSS: [f64; 2] = [0.5 - 0.5 / 1.732_050_807_568_877_2, 0.5 + 0.5 / 1.732_050_807_568_877_2];

type Element = ([[f64; 4]; 4], [[f64; 4]; 4]);

fn element(profile: &CuspProfile, form: Form, x0: f64, x1: f64, t0: f64, t1: f64) -> Result<Element> {
    let (hx, ht) = (x1 - x0, t1 - t0);
    let w = 0.25 * hx * ht;
    let mut ke = [[0.0; 4]; 4];
    let mut me = [[0.0; 4]; 4];
    for &xi in &GAUSS {
        let x = x0 + xi * hx;
        let [f, f1, _] = profile.eval_all(x);
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::Evaluation {
                x,
                reason: format!("profile must be positive on the mesh, got {f}"),
            });
        }
        let g = f1 / f;
        for &eta in &GAUSS {
            let t = t0 + eta * ht;
            let n = [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta];
            let dx = [-(1.0 - eta) / hx, (1.0 - eta) / hx, -eta / hx, eta / hx];
            let dt = [-(1.0 - xi) / ht, -xi / ht, (1.0 - xi) / ht, xi / ht];
            let (weight, tilt) = match form {
                Form::Mapped => (w * f, t * g),
                Form::Comparison => (w, 0.0),
            };
            let d: [f64; 4] = std::array::from_fn(|i| dx[i] - tilt * dt[i]);
            let inv_f2 = 1.0 / (f * f);
            for i in 0..4 {
                for j in 0..4 {
                    ke[i][j] += weight * (d[i] * d[j] + inv_f2 * dt[i] * dt[j]);
                    me[i][j] += weight * n[i] * n[j];
                }
            }
        }
    }
    Ok((ke, me))
}

/// Degree-of-freedom numbering: x-major, t fastest, Dirichlet nodes removed.
struct Numbering {
    x_lo: usize,
    x_free: usize,
    t_lo: usize,
    t_free: usize,
}

impl Numbering {
    fn new(mesh: &MappedMesh, bcs: &EdgeBcs) -> Self {
        let x_lo = usize::from(bcs.left == Bc::Dirichlet);
        let x_hi = mesh.n_x() - usize::from(bcs.right == Bc::Dirichlet);
        let t_lo = usize::from(bcs.bottom == EdgeBc::Dirichlet);
        let t_hi = mesh.n_t() - usize::from(bcs.top == EdgeBc::Dirichlet);
        Self {
            x_lo,
            x_free: x_hi.saturating_sub(x_lo),
            t_lo,
            t_free: t_hi.saturating_sub(t_lo),
        }
    }

    fn dof(&self, i: usize, j: usize) -> Option<usize> {
        let fi = i.checked_sub(self.x_lo).filter(|&v| v < self.x_free)?;
        let fj = j.checked_sub(self.t_lo).filter(|&v| v < self.t_free)?;
        Some(fi * self.t_free + fj)
    }

    fn unknowns(&self) -> usize {
        self.x_free * self.t_free
    }
}

fn assemble(
    profile: &CuspProfile,
    sigma: Option<&BoundaryCoefficient>,
    mesh: &MappedMesh,
    bcs: EdgeBcs,
    form: Form,
) -> Result<GeneralizedPencil> {
    let num = Numbering::new(mesh, &bcs);
    let n = num.unknowns();
    let bw = num.t_free + 1;
    let mut k = SymBandMatrix::zeros(n, bw);
    let mut m = SymBandMatrix::zeros(n, bw);
    let (xs, ts) = (mesh.x_nodes(), mesh.t_nodes());
    let n_cells_t = ts.len() - 1;

    // element matrices column by column in parallel, scattered in order
    const BLOCK: usize = 256;
    for block_start in (0..xs.len() - 1).step_by(BLOCK) {
        let block_end = (block_start + BLOCK).min(xs.len() - 1);
        let columns: Vec<Vec<Element>> = (block_start..block_end)
            .into_par_iter()
            .map(|i| {
                (0..n_cells_t)
                    .map(|j| element(profile, form, xs[i], xs[i + 1], ts[j], ts[j + 1]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for (ci, column) in columns.iter().enumerate() {
            let i = block_start + ci;
            for (j, (ke, me)) in column.iter().enumerate() {
                let local = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
                let dofs = local.map(|(p, q)| num.dof(p, q));
                for r in 0..4 {
                    let Some(gr) = dofs[r] else { continue };
                    for c in 0..=r {
                        let Some(gc) = dofs[c] else { continue };
                        k.add(gr, gc, ke[r][c]);
                        m.add(gr, gc, me[r][c]);
                    }
                }
            }
        }
    }

    // Robin sides, trapezoidal rule along each edge
    if let Some(sigma) = sigma {
        let sides = [(bcs.bottom, 0, true), (bcs.top, ts.len() - 1, false)];
        for (bc, j, lower) in sides {
            if bc != EdgeBc::Robin {
                continue;
            }
            for i in 0..xs.len() {
                let Some(d) = num.dof(i, j) else { continue };
                let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
                let right = if i + 1 < xs.len() { xs[i + 1] - xs[i] } else { 0.0 };
                let s = if lower { sigma.sigma1(xs[i]) } else { sigma.sigma2(xs[i]) };
                if !(s >= 0.0) {
                    return Err(Error::Evaluation {
                        x: xs[i],
                        reason: format!("boundary coefficient must be nonnegative, got {s}"),
                    });
                }
                k.add(d, d, 0.5 * (left + right) * s);
            }
        }
    } else if bcs.bottom == EdgeBc::Robin || bcs.top == EdgeBc::Robin {
        return Err(invalid("Robin edge needs a boundary coefficient"));
    }

    Ok(GeneralizedPencil {
        k,
        m,
        bcs,
        mesh: mesh.clone(),
    })
}

/// `(unknowns, bandwidth)` of the pencil a mesh would produce, without
/// assembling it.
pub fn pencil_size(mesh: &MappedMesh, bcs: &EdgeBcs) -> (usize, usize) {
    let num = Numbering::new(mesh, bcs);
    (num.unknowns(), num.t_free + 1)
}

/// The mapped Robin form with `σ₁` on `t = -1` and `σ₂` on `t = 1`.
pub fn assemble_robin(
    profile: &CuspProfile,
    sigma: &BoundaryCoefficient,
    mesh: &MappedMesh,
    bcs: EdgeBcs,
) -> Result<GeneralizedPencil> {
    assemble(profile, Some(sigma), mesh, bcs, Form::Mapped)
}

/// The comparison operator `-∂ₓ² - f⁻²∂ₜ²` on the strip, all edges Dirichlet.
pub fn assemble_b(profile: &CuspProfile, mesh: &MappedMesh) -> Result<GeneralizedPencil> {
    assemble(profile, None, mesh, EdgeBcs::all_dirichlet(), Form::Comparison)
}

/// Dirichlet on the upper side, Neumann (or Robin with the constant
/// `sigma_neumann_side`) on the lower side.
pub fn assemble_dn(profile: &CuspProfile, mesh: &MappedMesh, sigma_neumann_side: f64) -> Result<GeneralizedPencil> {
    let bottom = if sigma_neumann_side == 0.0 {
        EdgeBc::Neumann
    } else {
        EdgeBc::Robin
    };
    let sigma = BoundaryCoefficient::constant(sigma_neumann_side)?;
    assemble(
        profile,
        Some(&sigma),
        mesh,
        EdgeBcs::lateral(bottom, EdgeBc::Dirichlet),
        Form::Mapped,
    )
}

/// Number of pencil eigenvalues strictly below `lambda`.
pub fn count_below_2d(pencil: &GeneralizedPencil, lambda: f64) -> Result<CountResult> {
    let (count, shift) = pencil_count_below(&pencil.k, &pencil.m, lambda)?;
    Ok(CountResult {
        lambda,
        count,
        method: CountMethod::BandedLdlt,
        discretization: pencil.discretization(),
        shift_applied: shift,
        modes_used: None,
    })
}

/// The problem being discretized, used to choose a truncation point.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Robin(BoundaryCoefficient),
    ComparisonB,
    DirichletNeumann,
}

/// Truncation point for counting below `lambda`: the one-dimensional grid
/// rule applied to the lowest transverse-mode potential of the problem.
pub fn default_truncation(profile: &CuspProfile, problem: &Problem, lambda: f64) -> Result<f64> {
    let q: Potential = match problem {
        Problem::Robin(sigma) => mode_potential(profile, sigma, 0),
        Problem::ComparisonB => dirichlet_mode_potential(profile, 1)?,
        Problem::DirichletNeumann => {
            let p = profile.clone();
            Arc::new(move |x| {
                let f = p.f(x);
                if f > 0.0 {
                    PI * PI / (16.0 * f * f)
                } else {
                    f64::INFINITY
                }
            })
        }
    };
    Ok(build_grid(profile.a(), lambda, &q, 10.0)?.x_max)
}

/// Counts of the interface-Dirichlet split, the unsplit problem and the
/// interface-Neumann split at `split_x`, all on the same mesh.
pub fn bracketing_check(
    profile: &CuspProfile,
    sigma: &BoundaryCoefficient,
    mesh: &MappedMesh,
    split_x: f64,
    lambda: f64,
) -> Result<(usize, usize, usize)> {
    let s = mesh
        .node_index(split_x)
        .filter(|&s| s > 0 && s + 1 < mesh.n_x())
        .ok_or_else(|| Error::Mesh(format!("split point {split_x} is not an interior mesh node")))?;
    let outer = EdgeBcs::robin();
    let count = |m: &MappedMesh, bcs: EdgeBcs| -> Result<usize> {
        Ok(count_below_2d(&assemble_robin(profile, sigma, m, bcs)?, lambda)?.count)
    };
    let left = mesh.slice_x(0, s);
    let right = mesh.slice_x(s, mesh.n_x() - 1);
    let pieces = |interface: Bc| -> Result<usize> {
        Ok(count(&left, EdgeBcs { right: interface, ..outer })?
            + count(&right, EdgeBcs { left: interface, ..outer })?)
    };
    Ok((pieces(Bc::Dirichlet)?, count(mesh, outer)?, pieces(Bc::Neumann)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::{ldlt_negative_pivots, Sweep};
    use crate::profiles::make_power_profile;
    use crate::schrodinger1d::{mode_sum_count, ModeFamily, ModeSumOptions};
    use nalgebra::DMatrix;

    fn dense(a: &SymBandMatrix) -> DMatrix<f64> {
        let d = a.to_dense();
        DMatrix::from_fn(a.dim(), a.dim(), |i, j| d[i][j])
    }

    /// Generalized eigenvalues of `(k, m)` via Cholesky of `m`.
    fn dense_eigenvalues(p: &GeneralizedPencil) -> Vec<f64> {
        let (k, m) = (dense(&p.k), dense(&p.m));
        let l = m.cholesky().expect("mass matrix is positive definite").l();
        let li = l.clone().try_inverse().unwrap();
        let c = &li * k * li.transpose();
        let c = 0.5 * (&c + c.transpose());
        let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn rectangle() -> CuspProfile {
        CuspProfile::constant(1.0).unwrap()
    }

    #[test]
    fn rectangle_count() {
        for n in [16, 24, 40] {
            let mesh = MappedMesh::uniform(1.0, 2.0, n, n).unwrap();
            let zero = BoundaryCoefficient::constant(0.0).unwrap();
            let p = assemble_robin(&rectangle(), &zero, &mesh, EdgeBcs::all_dirichlet()).unwrap();
            assert_eq!(count_below_2d(&p, 30.0).unwrap().count, 2);
            assert_eq!(count_below_2d(&p, -1.0).unwrap().count, 0);
            let b = assemble_b(&rectangle(), &mesh).unwrap();
            assert_eq!(count_below_2d(&b, 30.0).unwrap().count, 2);
        }
    }

    #[test]
    fn rectangle_eigenvalues_converge() {
        let mesh = MappedMesh::uniform(1.0, 2.0, 33, 33).unwrap();
        let p = assemble_b(&rectangle(), &mesh).unwrap();
        let ev = dense_eigenvalues(&p);
        let exact = PI * PI * 1.25;
        assert!(ev[0] > exact && ev[0] < exact * 1.01, "{}", ev[0]);
    }

    #[test]
    fn bandwidth_and_mesh_validation() {
        let mesh = MappedMesh::uniform(1.0, 3.0, 10, 9).unwrap();
        let s = BoundaryCoefficient::constant(1.0).unwrap();
        let p = assemble_robin(&make_power_profile(2.0).unwrap(), &s, &mesh, EdgeBcs::robin()).unwrap();
        assert_eq!(p.unknowns(), 8 * 9);
        assert_eq!(p.bandwidth(), 10);
        assert!(p.bandwidth() <= 2 * mesh.n_t() + 3);
        assert!(MappedMesh::uniform(1.0, 3.0, 7, 9).is_err());
        assert!(MappedMesh::new(vec![1.0, 2.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 8).is_err());
    }

    #[test]
    fn vanishing_profile_is_rejected() {
        // e^{-1000 x} underflows to zero well inside the mesh
        let p = CuspProfile::exponential(1000.0).unwrap();
        let mesh = MappedMesh::uniform(1.0, 4.0, 10, 8).unwrap();
        assert!(assemble_b(&p, &mesh).is_err());
    }

    #[test]
    fn mass_matrix_is_positive_definite() {
        let s = BoundaryCoefficient::constant(1.0).unwrap();
        for alpha in [1.0, 2.0, 3.0] {
            let prof = make_power_profile(alpha).unwrap();
            let mesh = MappedMesh::auto(&prof, 6.0, 50.0, 6.0, &[]).unwrap();
            for bcs in [EdgeBcs::robin(), EdgeBcs::all_dirichlet(), EdgeBcs::lateral(EdgeBc::Neumann, EdgeBc::Neumann)] {
                let p = assemble_robin(&prof, &s, &mesh, bcs).unwrap();
                assert_eq!(ldlt_negative_pivots(p.m.clone(), 0.0), Sweep::Negatives(0));
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        let prof = make_power_profile(2.0).unwrap();
        let s = BoundaryCoefficient::constant(1.3).unwrap();
        let mesh = MappedMesh::uniform(1.0, 3.0, 9, 9).unwrap();
        let p = assemble_robin(&prof, &s, &mesh, EdgeBcs::robin()).unwrap();
        let nt = 9;
        let reflect = |d: usize| (d / nt) * nt + (nt - 1 - d % nt);
        for i in 0..p.unknowns() {
            for j in 0..p.unknowns() {
                let (a, b) = (p.k.get(i, j), p.k.get(reflect(i), reflect(j)));
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "K({i},{j}) {a} vs {b}");
                let (a, b) = (p.m.get(i, j), p.m.get(reflect(i), reflect(j)));
                assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn zero_sigma_equals_neumann_sides() {
        let prof = make_power_profile(2.0).unwrap();
        let zero = BoundaryCoefficient::constant(0.0).unwrap();
        let mesh = MappedMesh::uniform(1.0, 3.0, 10, 8).unwrap();
        let r = assemble_robin(&prof, &zero, &mesh, EdgeBcs::robin()).unwrap();
        let n = assemble_robin(&prof, &zero, &mesh, EdgeBcs::lateral(EdgeBc::Neumann, EdgeBc::Neumann)).unwrap();
        assert_eq!(r.k, n.k);
        assert_eq!(r.m, n.m);
    }

    #[test]
    fn inertia_matches_dense_eigenvalues() {
        let s = BoundaryCoefficient::pair(
            "const:v=0.5".parse().unwrap(),
            "powersigma:s=2,beta=1".parse().unwrap(),
        );
        let prof = make_power_profile(1.5).unwrap();
        let mesh = MappedMesh::uniform(1.0, 4.0, 30, 12).unwrap();
        let p = assemble_robin(&prof, &s, &mesh, EdgeBcs::robin()).unwrap();
        assert!(p.unknowns() <= 2500);
        let ev = dense_eigenvalues(&p);
        for lambda in [5.0, 20.0, 47.0, 90.0, 200.0] {
            let expect = ev.iter().filter(|&&e| e < lambda).count();
            assert_eq!(count_below_2d(&p, lambda).unwrap().count, expect, "λ={lambda}");
        }
    }

    #[test]
    fn larger_sigma_never_adds_eigenvalues() {
        let prof = make_power_profile(2.0).unwrap();
        let mesh = MappedMesh::auto(&prof, 8.0, 80.0, 6.0, &[]).unwrap();
        let mut last = usize::MAX;
        for c in [0.0, 0.5, 1.0, 4.0, 20.0] {
            let s = BoundaryCoefficient::constant(c).unwrap();
            let p = assemble_robin(&prof, &s, &mesh, EdgeBcs::robin()).unwrap();
            let n = count_below_2d(&p, 80.0).unwrap().count;
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn edge_condition_ordering() {
        let prof = make_power_profile(2.0).unwrap();
        let s = BoundaryCoefficient::constant(1.0).unwrap();
        let mesh = MappedMesh::auto(&prof, 8.0, 100.0, 6.0, &[]).unwrap();
        for lambda in [20.0, 60.0, 100.0] {
            let c = |bcs| count_below_2d(&assemble_robin(&prof, &s, &mesh, bcs).unwrap(), lambda).unwrap().count;
            let d = c(EdgeBcs::all_dirichlet());
            let r = c(EdgeBcs::robin());
            let n = c(EdgeBcs::lateral(EdgeBc::Neumann, EdgeBc::Neumann));
            assert!(d <= r && r <= n, "{d} {r} {n}");
        }
    }

    #[test]
    fn bracketing_is_ordered() {
        let prof = make_power_profile(2.0).unwrap();
        let s = BoundaryCoefficient::constant(1.0).unwrap();
        let x_max = default_truncation(&prof, &Problem::Robin(s.clone()), 50.0).unwrap();
        let mesh = MappedMesh::auto(&prof, x_max, 50.0, 6.0, &[3.0]).unwrap();
        let (lo, mid, hi) = bracketing_check(&prof, &s, &mesh, 3.0, 50.0).unwrap();
        assert!(lo <= mid && mid <= hi, "{lo} {mid} {hi}");
        let thin = mesh.x_nodes()[1];
        let (lo, mid, hi) = bracketing_check(&prof, &s, &mesh, thin, 50.0).unwrap();
        assert!(lo <= mid && mid <= hi);
        assert!(bracketing_check(&prof, &s, &mesh, 3.0001, 50.0).is_err());
        assert!(bracketing_check(&prof, &s, &mesh, 1.0, 50.0).is_err());
    }

    #[test]
    fn auto_mesh_honours_breakpoints_and_grading() {
        let prof = make_power_profile(2.0).unwrap();
        let mesh = MappedMesh::auto(&prof, 20.0, 100.0, 10.0, &[2.5, 7.0]).unwrap();
        assert!(mesh.node_index(2.5).is_some());
        assert!(mesh.node_index(7.0).is_some());
        assert_eq!(mesh.x_max(), 20.0);
        for w in mesh.x_nodes().windows(2) {
            assert!(prof.f(w[1]) >= 0.97 * prof.f(w[0]) - 1e-12);
            assert!(w[1] - w[0] <= 2.0 * PI / (10.0 * 10.0) + 1e-12);
        }
        let r = mesh.refined();
        assert_eq!(r.n_x(), 2 * mesh.n_x() - 1);
        assert_eq!(r.n_t(), 2 * mesh.n_t() - 1);
    }

    #[test]
    fn dirichlet_neumann_cross_section() {
        // f ≡ c: the DN strip has transverse ground state π²/(16c²)
        let c = 0.5;
        let prof = CuspProfile::constant(c).unwrap();
        let len = 40.0;
        let mesh = MappedMesh::uniform(1.0, 1.0 + len, 401, 41).unwrap();
        let p = assemble_dn(&prof, &mesh, 0.0).unwrap();
        let ev = dense_eigenvalues_small(&p);
        let expect = PI * PI / (16.0 * c * c) + PI * PI / (len * len);
        assert!((ev - expect).abs() < 2e-3 * expect, "{ev} vs {expect}");
        assert_eq!(count_below_2d(&p, 0.0).unwrap().count, 0);
    }

    fn dense_eigenvalues_small(p: &GeneralizedPencil) -> f64 {
        // lowest eigenvalue by bisection on the inertia count
        let (mut lo, mut hi) = (0.0, 1e4);
        while hi - lo > 1e-9 * hi {
            let mid = 0.5 * (lo + hi);
            if count_below_2d(p, mid).unwrap().count >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn comparison_operator_matches_mode_sum() {
        let prof = make_power_profile(2.0).unwrap();
        let lambda = 60.0;
        let mesh = MappedMesh::auto(&prof, 6.0, lambda, 10.0, &[]).unwrap().refined();
        let p = assemble_b(&prof, &mesh).unwrap();
        let two_d = count_below_2d(&p, lambda).unwrap().count as f64;
        let opts = ModeSumOptions {
            x_max: Some(6.0),
            resolution: 100.0,
            ..Default::default()
        };
        let one_d = mode_sum_count(&prof, &ModeFamily::DirichletB, lambda, &opts).unwrap().count as f64;
        assert!((two_d - one_d).abs() <= 0.05 * one_d.max(1.0), "{two_d} vs {one_d}");
    }
}
