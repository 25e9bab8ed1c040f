//! Counting routes, λ-sweep comparisons, convergence studies and the
//! scaling check.

use crate::config::{ExperimentConfig, Route, Suite};
use crate::error::{LabError, Result};
use crate::report::{loglog_slope, num, opt, Summary, Table, F17};
use cusp_spectra::asymptotics::{composite_prediction, SpectralPrediction};
use cusp_spectra::laplace2d::{
    assemble_b, assemble_dn, assemble_robin, bracketing_check, count_below_2d, default_truncation, pencil_size,
    EdgeBc, EdgeBcs, MappedMesh, Problem,
};
use cusp_spectra::profiles::{classify_weyl_regime, eval_v};
use cusp_spectra::schrodinger1d::{
    assemble, build_grid, count_below, dirichlet_mode_potential, mode_potential, mode_sum_count, mode_sum_grid,
    mode_sum_on_grid, rank_one_check, Bc, Grid1D, ModeFamily, ModeSumOptions, Potential,
};
use cusp_spectra::{BoundaryCoefficient, CountResult, CuspProfile, Discretization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

/// Upper bound on the memory a banded factorization may claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    pub bytes: u64,
}

impl MemoryBudget {
    pub fn megabytes(mb: u64) -> Self {
        Self { bytes: mb << 20 }
    }

    /// `K`, `M` and one working copy of `K - λM`, each `n·(bw+1)` doubles.
    pub fn pencil_bytes(unknowns: usize, bandwidth: usize) -> u64 {
        3 * 8 * unknowns as u64 * (bandwidth as u64 + 1)
    }

    pub fn check(&self, unknowns: usize, bandwidth: usize, what: &str) -> Result<()> {
        let need = Self::pencil_bytes(unknowns, bandwidth);
        if need > self.bytes {
            return Err(LabError::Resource(format!(
                "{what}: {unknowns} unknowns × bandwidth {bandwidth} needs {:.1} MiB, budget is {:.1} MiB",
                need as f64 / 1048576.0,
                self.bytes as f64 / 1048576.0
            )));
        }
        Ok(())
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self::megabytes(4096)
    }
}

/// The two-dimensional operator to discretize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator2d {
    Robin,
    ComparisonB,
    DirichletNeumann,
}

impl std::str::FromStr for Operator2d {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "robin" => Ok(Operator2d::Robin),
            "b" | "B" => Ok(Operator2d::ComparisonB),
            "dn" => Ok(Operator2d::DirichletNeumann),
            _ => Err(LabError::Config(format!("unknown operator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Count2dSpec {
    pub operator: Operator2d,
    pub bcs: EdgeBcs,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub x_max: Option<f64>,
    pub resolution: f64,
    /// Largest relative change of `f` across one x-cell.
    pub grade: f64,
}

impl Count2dSpec {
    pub fn robin(bottom: EdgeBc, top: EdgeBc, resolution: f64) -> Self {
        Self {
            operator: Operator2d::Robin,
            bcs: EdgeBcs::lateral(bottom, top),
            nx: None,
            nt: None,
            x_max: None,
            resolution,
            grade: 0.03,
        }
    }

    fn edge_bcs(&self) -> EdgeBcs {
        match self.operator {
            Operator2d::Robin => self.bcs,
            Operator2d::ComparisonB => EdgeBcs::all_dirichlet(),
            Operator2d::DirichletNeumann => EdgeBcs::lateral(EdgeBc::Neumann, EdgeBc::Dirichlet),
        }
    }
}

pub fn mesh_for(
    profile: &CuspProfile,
    sigma: &BoundaryCoefficient,
    spec: &Count2dSpec,
    lambda: f64,
) -> Result<MappedMesh> {
    let x_max = match spec.x_max {
        Some(x) => x,
        None => {
            let problem = match spec.operator {
                Operator2d::Robin => Problem::Robin(sigma.clone()),
                Operator2d::ComparisonB => Problem::ComparisonB,
                Operator2d::DirichletNeumann => Problem::DirichletNeumann,
            };
            default_truncation(profile, &problem, lambda)?
        }
    };
    let auto = MappedMesh::auto_graded(profile, x_max, lambda, spec.resolution, spec.grade, &[])?;
    let n_t = spec.nt.unwrap_or(auto.n_t());
    let mesh = match spec.nx {
        Some(nx) => MappedMesh::uniform(profile.a(), x_max, nx, n_t)?,
        None => MappedMesh::new(auto.x_nodes().to_vec(), n_t)?,
    };
    Ok(mesh)
}

/// One 2D count, with the seconds spent in the factorization.
pub fn count2d(
    profile: &CuspProfile,
    sigma: &BoundaryCoefficient,
    spec: &Count2dSpec,
    lambda: f64,
    budget: MemoryBudget,
) -> Result<(CountResult, f64)> {
    let mesh = mesh_for(profile, sigma, spec, lambda)?;
    let (n, bw) = pencil_size(&mesh, &spec.edge_bcs());
    budget.check(n, bw, &format!("count2d at λ={lambda}"))?;
    let pencil = match spec.operator {
        Operator2d::Robin => assemble_robin(profile, sigma, &mesh, spec.bcs)?,
        Operator2d::ComparisonB => assemble_b(profile, &mesh)?,
        Operator2d::DirichletNeumann => assemble_dn(profile, &mesh, 0.0)?,
    };
    let start = Instant::now();
    let result = count_below_2d(&pencil, lambda)?;
    Ok((result, start.elapsed().as_secs_f64()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family1d {
    Robin,
    ComparisonB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelect {
    Single(u32),
    Sum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Count1dSpec {
    pub family: Family1d,
    pub mode: ModeSelect,
    pub bc_left: Bc,
    pub resolution: f64,
    pub x_max: Option<f64>,
}

pub fn count1d(
    profile: &CuspProfile,
    sigma: &BoundaryCoefficient,
    spec: &Count1dSpec,
    lambda: f64,
) -> Result<CountResult> {
    let family = match spec.family {
        Family1d::Robin => ModeFamily::Robin(sigma.clone()),
        Family1d::ComparisonB => ModeFamily::DirichletB,
    };
    match spec.mode {
        ModeSelect::Sum => {
            let opts = ModeSumOptions {
                bc_left: spec.bc_left,
                x_max: spec.x_max,
                resolution: spec.resolution,
                ..Default::default()
            };
            Ok(mode_sum_count(profile, &family, lambda, &opts)?)
        }
        ModeSelect::Single(k) => {
            let q = match spec.family {
                Family1d::Robin => mode_potential(profile, sigma, k),
                Family1d::ComparisonB => dirichlet_mode_potential(profile, k)?,
            };
            let grid = match spec.x_max {
                Some(x) => {
                    Grid1D::with_max_spacing(profile.a(), x, 2.0 * PI / (spec.resolution * lambda.sqrt()))?
                }
                None => build_grid(profile.a(), lambda, &q, spec.resolution)?,
            };
            let t = assemble(&grid, &q, spec.bc_left, Bc::Dirichlet)?;
            Ok(count_below(&t, lambda))
        }
    }
}

/// A count from one route, with its discretization and cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteCount {
    pub count: usize,
    pub discretization: Discretization,
    pub modes_used: Option<usize>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub lambda: f64,
    pub count2d: Option<RouteCount>,
    pub modesum: Option<RouteCount>,
    pub predict: Option<(SpectralPrediction, f64)>,
    pub errors: Vec<String>,
}

impl ComparisonRow {
    pub fn value(&self, route: Route) -> Option<f64> {
        match route {
            Route::Count2d => self.count2d.as_ref().map(|c| c.count as f64),
            Route::ModeSum => self.modesum.as_ref().map(|c| c.count as f64),
            Route::Predict => self.predict.as_ref().map(|p| p.0.total),
        }
    }

    /// `route / predict`, when a positive prediction exists.
    pub fn ratio(&self, route: Route) -> Option<f64> {
        let p = self.value(Route::Predict).filter(|&p| p > 0.0)?;
        Some(self.value(route)? / p)
    }
}

fn timed<T>(timings: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, if timings { start.elapsed().as_secs_f64() } else { 0.0 }))
}

fn comparison_row(
    cfg: &ExperimentConfig,
    profile: &CuspProfile,
    sigma: &BoundaryCoefficient,
    lambda: f64,
) -> ComparisonRow {
    let mut row = ComparisonRow {
        lambda,
        count2d: None,
        modesum: None,
        predict: None,
        errors: Vec::new(),
    };
    let budget = MemoryBudget::megabytes(cfg.mem_budget_mb);
    if cfg.has(Route::Count2d) {
        let spec = Count2dSpec {
            nx: cfg.mesh.nx,
            nt: cfg.mesh.nt,
            x_max: cfg.mesh.x_max,
            ..Count2dSpec::robin(cfg.bc_bottom, cfg.bc_top, cfg.resolution)
        };
        match timed(cfg.timings, || count2d(profile, sigma, &spec, lambda, budget)) {
            Ok(((c, _), secs)) => {
                row.count2d = Some(RouteCount {
                    count: c.count,
                    discretization: c.discretization,
                    modes_used: None,
                    seconds: secs,
                })
            }
            Err(e) => row.errors.push(format!("count2d: {e}")),
        }
    }
    if cfg.has(Route::ModeSum) {
        let spec = Count1dSpec {
            family: Family1d::Robin,
            mode: ModeSelect::Sum,
            bc_left: Bc::Dirichlet,
            resolution: cfg.resolution,
            x_max: cfg.mesh.x_max,
        };
        match timed(cfg.timings, || count1d(profile, sigma, &spec, lambda)) {
            Ok((c, secs)) => {
                row.modesum = Some(RouteCount {
                    count: c.count,
                    discretization: c.discretization,
                    modes_used: c.modes_used,
                    seconds: secs,
                })
            }
            Err(e) => row.errors.push(format!("modesum: {e}")),
        }
    }
    if cfg.has(Route::Predict) {
        match timed(cfg.timings, || Ok(composite_prediction(profile, sigma, lambda)?)) {
            Ok(p) => row.predict = Some(p),
            Err(e) => row.errors.push(format!("predict: {e}")),
        }
    }
    row
}

pub fn comparison_table(cfg: &ExperimentConfig, rows: &[ComparisonRow]) -> Table {
    let mut header = vec!["lambda".to_string()];
    let counted = [Route::Count2d, Route::ModeSum];
    for r in counted.iter().filter(|r| cfg.has(**r)) {
        let n = r.as_str();
        header.extend([n.to_string(), format!("{n}_x_max"), format!("{n}_size"), format!("{n}_seconds")]);
    }
    if cfg.has(Route::Predict) {
        header.extend(["predict".to_string(), "predict_seconds".to_string()]);
        for r in counted.iter().filter(|r| cfg.has(**r)) {
            header.push(format!("{}_over_predict", r.as_str()));
        }
    }
    header.push("errors".into());
    let mut table = Table::new(header);
    for row in rows {
        let mut rec = vec![num(row.lambda)];
        for r in counted.iter().filter(|r| cfg.has(**r)) {
            let c = match r {
                Route::Count2d => row.count2d.as_ref(),
                _ => row.modesum.as_ref(),
            };
            let size = c.map(|c| match c.discretization {
                Discretization::Line { n, .. } => n,
                Discretization::Mesh { unknowns, .. } => unknowns,
            });
            rec.extend([
                opt(c.map(|c| c.count)),
                c.map(|c| num(c.discretization.x_max())).unwrap_or_default(),
                opt(size),
                c.map(|c| num(c.seconds)).unwrap_or_default(),
            ]);
        }
        if cfg.has(Route::Predict) {
            rec.push(row.predict.as_ref().map(|p| num(p.0.total)).unwrap_or_default());
            rec.push(row.predict.as_ref().map(|p| num(p.1)).unwrap_or_default());
            for r in counted.iter().filter(|r| cfg.has(**r)) {
                rec.push(row.ratio(*r).map(num).unwrap_or_default());
            }
        }
        rec.push(row.errors.join("; "));
        table.push(rec);
    }
    table
}

fn suite_outcome(r: Result<bool>) -> String {
    match r {
        Ok(true) => "pass".into(),
        Ok(false) => "fail".into(),
        Err(e) => format!("error: {e}"),
    }
}

fn run_suite(
    suite: Suite,
    cfg: &ExperimentConfig,
    profile: &CuspProfile,
    sigma: &BoundaryCoefficient,
    lambdas: &[f64],
) -> Result<bool> {
    let mid = lambdas[lambdas.len() / 2];
    match suite {
        Suite::RankOne => {
            let q = mode_potential(profile, sigma, 0);
            Ok(rank_one_check(&q, lambdas, profile.a(), cfg.resolution)? == 0)
        }
        Suite::SigmaMonotone => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut scales: Vec<f64> = (0..6).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect();
            scales.sort_by(f64::total_cmp);
            let potential = |c: f64| -> Potential {
                let (p, s) = (profile.clone(), sigma.clone());
                Arc::new(move |x| match eval_v(&p, x) {
                    Ok(v) => v + c * s.sigma(x) / p.f(x),
                    Err(_) => f64::INFINITY,
                })
            };
            let grid = build_grid(profile.a(), mid, &potential(scales[0]), cfg.resolution)?;
            let mut last = usize::MAX;
            for c in scales {
                let t = assemble(&grid, &potential(c), Bc::Dirichlet, Bc::Dirichlet)?;
                let n = count_below(&t, mid).count;
                if n > last {
                    return Ok(false);
                }
                last = n;
            }
            Ok(true)
        }
        Suite::Bracketing => {
            let x_max = match cfg.mesh.x_max {
                Some(x) => x,
                None => default_truncation(profile, &Problem::Robin(sigma.clone()), mid)?,
            };
            let split = profile.a() + 0.5 * (x_max - profile.a());
            let mesh = MappedMesh::auto(profile, x_max, mid, cfg.resolution, &[split])?;
            let (n, bw) = pencil_size(&mesh, &EdgeBcs::robin());
            MemoryBudget::megabytes(cfg.mem_budget_mb).check(n, bw, "bracketing suite")?;
            let (lo, m, hi) = bracketing_check(profile, sigma, &mesh, split, mid)?;
            Ok(lo <= m && m <= hi)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ComparisonRow>,
    pub table: Table,
    pub summary: Summary,
}

impl RunOutput {
    pub fn failed_rows(&self) -> usize {
        self.summary.failed_rows
    }
}

/// Runs every enabled route at every λ (in parallel across λ, rows kept in
/// λ order), then the property suites, and writes the outputs when an
/// output directory is configured.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let profile = cfg.parsed_profile()?;
    let sigma = cfg.parsed_sigma()?;
    let lambdas = cfg.lambda.values();
    let rows: Vec<ComparisonRow> = lambdas
        .par_iter()
        .map(|&l| comparison_row(cfg, &profile, &sigma, l))
        .collect();

    let mut slopes = BTreeMap::new();
    for route in Route::ALL.iter().filter(|r| cfg.has(**r)) {
        let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.lambda, r.value(*route)?))).collect();
        if let Some(s) = loglog_slope(&pts) {
            slopes.insert(route.as_str().to_string(), F17(s));
        }
    }
    let suites = cfg
        .suites
        .iter()
        .map(|&s| {
            (
                s.as_str().to_string(),
                suite_outcome(run_suite(s, cfg, &profile, &sigma, &lambdas)),
            )
        })
        .collect();
    let linear_coefficient = composite_prediction(&profile, &sigma, lambdas[0])
        .ok()
        .and_then(|p| p.linear_coefficient)
        .map(F17);
    let summary = Summary {
        schema_version: 1,
        profile: profile.to_string(),
        sigma: sigma.to_string(),
        regime: classify_weyl_regime(&profile).tag().to_string(),
        linear_coefficient,
        routes: cfg.routes.iter().map(|r| r.as_str().to_string()).collect(),
        lambda: lambdas.iter().copied().map(F17).collect(),
        rows: rows.len(),
        failed_rows: rows.iter().filter(|r| !r.errors.is_empty()).count(),
        slopes,
        suites,
        seed: cfg.seed,
    };
    let table = comparison_table(cfg, &rows);
    let out = RunOutput { rows, table, summary };
    if let Some(dir) = &cfg.out {
        write_run(dir, cfg, &out)?;
    }
    Ok(out)
}

fn write_run(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(LabError::io(dir))?;
    out.table.save(&dir.join("compare.csv"))?;
    for route in Route::ALL.iter().filter(|r| cfg.has(**r)) {
        let mut series = Table::new(["lambda", route.as_str()]);
        for row in &out.rows {
            if let Some(v) = row.value(*route) {
                series.push(vec![num(row.lambda), num(v)]);
            }
        }
        series.save(&dir.join(format!("series_{}.csv", route.as_str())))?;
    }
    out.summary.save(&dir.join("summary.json"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub route: Route,
    pub lambda: f64,
    pub level: usize,
    pub x_max: f64,
    pub size: usize,
    pub count: usize,
    /// Change from the previous level.
    pub delta: Option<i64>,
}

/// Repeats the counting routes with the mesh spacing halved and (unless
/// `xmax` is fixed) the truncation distance doubled at every level.
pub fn convergence_study(cfg: &ExperimentConfig, refinements: usize) -> Result<Vec<ConvergenceRow>> {
    if refinements < 2 {
        return Err(LabError::Config(format!("need at least 2 refinement levels, got {refinements}")));
    }
    cfg.validate()?;
    let routes: Vec<Route> = [Route::Count2d, Route::ModeSum].into_iter().filter(|r| cfg.has(*r)).collect();
    if routes.is_empty() {
        return Err(LabError::Config("convergence needs the count2d or modesum route".into()));
    }
    let profile = cfg.parsed_profile()?;
    let sigma = cfg.parsed_sigma()?;
    let budget = MemoryBudget::megabytes(cfg.mem_budget_mb);
    let a = profile.a();

    let level_spec = |lambda: f64, level: usize| -> Result<Count2dSpec> {
        let x0 = match cfg.mesh.x_max {
            Some(x) => return Ok(spec_at(cfg, Some(x), level)),
            None => default_truncation(&profile, &Problem::Robin(sigma.clone()), lambda)?,
        };
        Ok(spec_at(cfg, Some(a + 2f64.powi(level as i32) * (x0 - a)), level))
    };

    // size every 2D level up front so an oversized study is refused whole
    let lambdas = cfg.lambda.values();
    if routes.contains(&Route::Count2d) {
        let mut report = Vec::new();
        let mut refused = false;
        for &l in &lambdas {
            for level in 0..refinements {
                let spec = level_spec(l, level)?;
                let mesh = mesh_for(&profile, &sigma, &spec, l)?;
                let (n, bw) = pencil_size(&mesh, &spec.bcs);
                let need = MemoryBudget::pencil_bytes(n, bw);
                refused |= need > budget.bytes;
                report.push(format!(
                    "λ={l} level {level}: {n} unknowns, bandwidth {bw}, {:.1} MiB",
                    need as f64 / 1048576.0
                ));
            }
        }
        if refused {
            return Err(LabError::Resource(format!(
                "convergence study exceeds the {} MiB budget:\n  {}",
                cfg.mem_budget_mb,
                report.join("\n  ")
            )));
        }
    }

    let jobs: Vec<(Route, f64)> = routes
        .iter()
        .flat_map(|&r| lambdas.iter().map(move |&l| (r, l)))
        .collect();
    let results: Vec<Result<Vec<ConvergenceRow>>> = jobs
        .par_iter()
        .map(|&(route, lambda)| {
            let mut rows = Vec::new();
            let mut prev: Option<usize> = None;
            for level in 0..refinements {
                let spec = level_spec(lambda, level)?;
                let (count, x_max, size) = match route {
                    Route::Count2d => {
                        let (c, _) = count2d(&profile, &sigma, &spec, lambda, budget)?;
                        let Discretization::Mesh { x_max, unknowns, .. } = c.discretization else {
                            unreachable!("2D counts carry a mesh")
                        };
                        (c.count, x_max, unknowns)
                    }
                    _ => {
                        let s1 = Count1dSpec {
                            family: Family1d::Robin,
                            mode: ModeSelect::Sum,
                            bc_left: Bc::Dirichlet,
                            resolution: spec.resolution,
                            x_max: spec.x_max,
                        };
                        let c = count1d(&profile, &sigma, &s1, lambda)?;
                        let Discretization::Line { x_max, n, .. } = c.discretization else {
                            unreachable!("mode sums carry a line grid")
                        };
                        (c.count, x_max, n)
                    }
                };
                rows.push(ConvergenceRow {
                    route,
                    lambda,
                    level,
                    x_max,
                    size,
                    count,
                    delta: prev.map(|p| count as i64 - p as i64),
                });
                prev = Some(count);
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn spec_at(cfg: &ExperimentConfig, x_max: Option<f64>, level: usize) -> Count2dSpec {
    let scale = 2f64.powi(level as i32);
    Count2dSpec {
        nx: cfg.mesh.nx.map(|n| (n - 1) * scale as usize + 1),
        nt: cfg.mesh.nt.map(|n| (n - 1) * scale as usize + 1),
        x_max,
        grade: 0.03 / scale,
        ..Count2dSpec::robin(cfg.bc_bottom, cfg.bc_top, cfg.resolution * scale)
    }
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(["route", "lambda", "level", "x_max", "size", "count", "delta"]);
    for r in rows {
        t.push(vec![
            r.route.as_str().into(),
            num(r.lambda),
            r.level.to_string(),
            num(r.x_max),
            r.size.to_string(),
            r.count.to_string(),
            opt(r.delta),
        ]);
    }
    t
}

/// Which operator the scaling check perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleTarget {
    /// The reduced one-dimensional operator `-d² + W_σ`.
    Reduced,
    /// The Dirichlet comparison operator, through its mode sum.
    ComparisonB,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub lambda: f64,
    pub epsilon: f64,
    pub n: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    /// `max |N±/N - 1| / ε`.
    pub constant: f64,
}

/// `N_λ((1 ± ε)T)` against `N_λ(T)` on one grid per λ.
pub fn scaling_sweep(cfg: &ExperimentConfig, epsilons: &[f64], target: ScaleTarget) -> Result<Vec<ScalingRow>> {
    if epsilons.is_empty() {
        return Err(LabError::Config("no epsilon values".into()));
    }
    if let Some(bad) = epsilons.iter().find(|e| !(**e > 0.0 && **e <= 0.5)) {
        return Err(LabError::Config(format!("epsilon must lie in (0, 1/2], got {bad}")));
    }
    cfg.lambda.validate_positive()?;
    let profile = cfg.parsed_profile()?;
    let sigma = cfg.parsed_sigma()?;
    let eps_max = epsilons.iter().copied().fold(0.0, f64::max);
    let lambdas = cfg.lambda.values();
    let per_lambda: Vec<Result<Vec<ScalingRow>>> = lambdas
        .par_iter()
        .map(|&lambda| {
            // counting (cT) below λ is counting T below λ/c
            let counter: Box<dyn Fn(f64) -> Result<usize>> = match target {
                ScaleTarget::Reduced => {
                    let q = mode_potential(&profile, &sigma, 0);
                    let grid = match cfg.mesh.x_max {
                        Some(x) => Grid1D::with_max_spacing(
                            profile.a(),
                            x,
                            2.0 * PI / (cfg.resolution * (lambda / (1.0 - eps_max)).sqrt()),
                        )?,
                        None => build_grid(profile.a(), lambda / (1.0 - eps_max), &q, cfg.resolution)?,
                    };
                    let t = assemble(&grid, &q, Bc::Dirichlet, Bc::Dirichlet)?;
                    Box::new(move |l| Ok(count_below(&t, l).count))
                }
                ScaleTarget::ComparisonB => {
                    let opts = ModeSumOptions {
                        x_max: cfg.mesh.x_max,
                        resolution: cfg.resolution,
                        ..Default::default()
                    };
                    let grid = mode_sum_grid(&profile, &ModeFamily::DirichletB, lambda / (1.0 - eps_max), &opts)?;
                    let p = profile.clone();
                    Box::new(move |l| {
                        Ok(mode_sum_on_grid(&p, &ModeFamily::DirichletB, l, &grid, Bc::Dirichlet, Bc::Dirichlet)?.count)
                    })
                }
            };
            let n = counter(lambda)?;
            epsilons
                .iter()
                .map(|&eps| {
                    let n_plus = counter(lambda / (1.0 + eps))?;
                    let n_minus = counter(lambda / (1.0 - eps))?;
                    let constant = if n == 0 {
                        if n_plus == 0 && n_minus == 0 {
                            0.0
                        } else {
                            f64::INFINITY
                        }
                    } else {
                        let d = |m: usize| (m as f64 / n as f64 - 1.0).abs();
                        d(n_plus).max(d(n_minus)) / eps
                    };
                    Ok(ScalingRow {
                        lambda,
                        epsilon: eps,
                        n,
                        n_plus,
                        n_minus,
                        constant,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_lambda {
        out.extend(r?);
    }
    Ok(out)
}

pub fn scaling_table(rows: &[ScalingRow]) -> Table {
    let mut t = Table::new(["lambda", "epsilon", "n", "n_plus", "n_minus", "constant"]);
    for r in rows {
        t.push(vec![
            num(r.lambda),
            num(r.epsilon),
            r.n.to_string(),
            r.n_plus.to_string(),
            r.n_minus.to_string(),
            num(r.constant),
        ]);
    }
    t
}
