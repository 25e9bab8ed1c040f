use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use cusp_lab::config::ExperimentConfig;
use cusp_lab::error::LabError;
use cusp_lab::experiment::{
    self, convergence_table, scaling_table, Count1dSpec, Count2dSpec, Family1d, MemoryBudget, ModeSelect,
    ScaleTarget,
};
use cusp_lab::report::{num, opt, Table};
use cusp_lab::sweep::Sweep;
use cusp_spectra::asymptotics::{composite_prediction, titchmarsh_applicable};
use cusp_spectra::laplace2d::EdgeBcs;
use cusp_spectra::profiles::{audit_assumptions, classify_weyl_regime, eval_w, geometric_probes};
use cusp_spectra::schrodinger1d::Bc;
use cusp_spectra::transverse::{solve_kappa, solve_nonsymmetric};
use cusp_spectra::Discretization;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "cusp-lab", version, about = "Eigenvalue counting experiments on cusp domains")]
struct Cli {
    /// Directory for CSV and JSON outputs; tables go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for λ-parallel work.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the randomized property suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat `key = value` configuration file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write zero in timing columns so outputs are byte-stable.
    #[arg(long, global = true)]
    no_timings: bool,
    /// Refuse any banded factorization needing more memory than this.
    #[arg(long, global = true)]
    mem_budget_mb: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Problem {
    /// Profile preset, e.g. `power:alpha=2`.
    #[arg(long)]
    profile: Option<String>,
    /// Robin coefficient preset, e.g. `const:v=1` (lower side if `--sigma2` is set).
    #[arg(long)]
    sigma: Option<String>,
    /// Upper-side Robin coefficient.
    #[arg(long)]
    sigma2: Option<String>,
    /// λ values: `lo:hi:n[-log|-lin]` or a comma list.
    #[arg(long)]
    lambda: Option<String>,
    /// Grid points per local wavelength (at least 10).
    #[arg(long)]
    resolution: Option<f64>,
    /// Fixed truncation point instead of the automatic rule.
    #[arg(long)]
    xmax: Option<f64>,
    /// Any configuration key, `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Counts of the reduced one-dimensional operators.
    Count1d {
        #[command(flatten)]
        problem: Problem,
        /// `robin` (potential W_σ + k²π²/(4f²)) or `b` (π²k²/(4f²)).
        #[arg(long, default_value = "robin")]
        family: String,
        /// A single mode index, or `sum` for the full mode sum.
        #[arg(long, default_value = "0")]
        mode: String,
        /// Condition at the left endpoint.
        #[arg(long, default_value = "dirichlet")]
        bc_left: String,
    },
    /// Direct finite element counts on the mapped strip.
    Count2d {
        #[command(flatten)]
        problem: Problem,
        /// `robin`, `b` (all Dirichlet comparison) or `dn`.
        #[arg(long, default_value = "robin")]
        operator: String,
        #[arg(long)]
        bc_bottom: Option<String>,
        #[arg(long)]
        bc_top: Option<String>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        nt: Option<usize>,
    },
    /// Principal transverse Robin mode along the horn.
    Transverse {
        #[command(flatten)]
        problem: Problem,
        /// Sample points along the axis.
        #[arg(long, default_value = "1:100:12-log")]
        x: String,
    },
    /// Asymptotic predictions.
    Predict {
        #[command(flatten)]
        problem: Problem,
        /// Emit the individual parts of the prediction.
        #[arg(long)]
        parts: bool,
    },
    /// Full comparison run driven by the configuration.
    Compare {
        #[command(flatten)]
        problem: Problem,
        /// Comma list of routes.
        #[arg(long)]
        routes: Option<String>,
        /// Comma list of property suites.
        #[arg(long)]
        suites: Option<String>,
    },
    /// Refinement study of the counting routes.
    Converge {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        routes: Option<String>,
        #[arg(long, default_value_t = 3)]
        refinements: usize,
    },
    /// Empirical constant in N_λ((1±ε)T) = N_λ(T)(1 + O(ε)).
    Scalecheck {
        #[command(flatten)]
        problem: Problem,
        /// Comma list of ε values in (0, 1/2].
        #[arg(long, default_value = "0.01,0.05,0.1")]
        eps: String,
        /// `h` (reduced operator) or `b` (Dirichlet comparison mode sum).
        #[arg(long, default_value = "h")]
        target: String,
    },
    /// Finite-sample report on the standing assumptions.
    Audit {
        #[command(flatten)]
        problem: Problem,
        /// Probe points, geometric by default.
        #[arg(long)]
        probes: Option<String>,
    },
}

impl Command {
    fn problem(&self) -> &Problem {
        match self {
            Command::Count1d { problem, .. }
            | Command::Count2d { problem, .. }
            | Command::Transverse { problem, .. }
            | Command::Predict { problem, .. }
            | Command::Compare { problem, .. }
            | Command::Converge { problem, .. }
            | Command::Scalecheck { problem, .. }
            | Command::Audit { problem, .. } => problem,
        }
    }
}

/// Defaults, then the configuration file, then command-line flags.
fn build_config(cli: &Cli) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    let p = cli.command.problem();
    let mut set = |k: &str, v: Option<String>| -> Result<(), LabError> {
        match v {
            Some(v) => cfg.apply(k, &v),
            None => Ok(()),
        }
    };
    set("profile", p.profile.clone())?;
    set("sigma", p.sigma.clone())?;
    set("sigma2", p.sigma2.clone())?;
    set("lambda", p.lambda.clone())?;
    set("resolution", p.resolution.map(|r| r.to_string()))?;
    set("xmax", p.xmax.map(|x| x.to_string()))?;
    set("seed", cli.seed.map(|s| s.to_string()))?;
    set("mem_budget_mb", cli.mem_budget_mb.map(|m| m.to_string()))?;
    set("out", cli.out.as_ref().map(|o| o.display().to_string()))?;
    match &cli.command {
        Command::Compare { routes, suites, .. } => {
            set("routes", routes.clone())?;
            set("suites", suites.clone())?;
        }
        Command::Converge { routes, .. } => set("routes", routes.clone())?,
        Command::Count2d { bc_bottom, bc_top, .. } => {
            set("bc_bottom", bc_bottom.clone())?;
            set("bc_top", bc_top.clone())?;
        }
        _ => {}
    }
    for kv in &p.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| LabError::Config(format!("--set expects key=value, got `{kv}`")))?;
        cfg.apply(k, v)?;
    }
    if cli.no_timings {
        cfg.timings = false;
    }
    Ok(cfg)
}

fn emit(table: &Table, out: Option<&Path>, name: &str) -> Result<(), LabError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| LabError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            table.save(&dir.join(name))
        }
        None => {
            print!("{}", table.to_csv_string());
            Ok(())
        }
    }
}

fn parse_bc(s: &str) -> Result<Bc, LabError> {
    Ok(s.parse::<Bc>()?)
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = build_config(cli)?;
    let out = cfg.out.as_deref();
    let budget = MemoryBudget::megabytes(cfg.mem_budget_mb);
    match &cli.command {
        Command::Count1d {
            family, mode, bc_left, ..
        } => {
            cfg.lambda.validate_positive()?;
            let profile = cfg.parsed_profile()?;
            let sigma = cfg.parsed_sigma()?;
            let spec = Count1dSpec {
                family: match family.as_str() {
                    "robin" => Family1d::Robin,
                    "b" | "B" => Family1d::ComparisonB,
                    other => return Err(LabError::Config(format!("unknown family `{other}`")).into()),
                },
                mode: if mode == "sum" {
                    ModeSelect::Sum
                } else {
                    ModeSelect::Single(
                        mode.parse()
                            .map_err(|_| LabError::Config(format!("bad mode `{mode}`")))?,
                    )
                },
                bc_left: parse_bc(bc_left)?,
                resolution: cfg.resolution,
                x_max: cfg.mesh.x_max,
            };
            let mut t = Table::new(["lambda", "count", "X", "h", "modes_used", "shift_applied"]);
            for l in cfg.lambda.values() {
                let c = experiment::count1d(&profile, &sigma, &spec, l)?;
                let Discretization::Line { x_max, h, .. } = c.discretization else {
                    unreachable!("one-dimensional counts carry a line grid")
                };
                t.push(vec![
                    num(l),
                    c.count.to_string(),
                    num(x_max),
                    num(h),
                    opt(c.modes_used),
                    c.shift_applied.to_string(),
                ]);
            }
            emit(&t, out, "count1d.csv")?;
        }
        Command::Count2d { operator, nx, nt, .. } => {
            cfg.lambda.validate_positive()?;
            let profile = cfg.parsed_profile()?;
            let sigma = cfg.parsed_sigma()?;
            let spec = Count2dSpec {
                operator: operator.parse()?,
                bcs: EdgeBcs::lateral(cfg.bc_bottom, cfg.bc_top),
                nx: nx.or(cfg.mesh.nx),
                nt: nt.or(cfg.mesh.nt),
                x_max: cfg.mesh.x_max,
                resolution: cfg.resolution,
                grade: 0.03,
            };
            let mut t = Table::new(["lambda", "count", "nx", "nt", "X", "bandwidth", "factor_seconds"]);
            for l in cfg.lambda.values() {
                let (c, secs) = experiment::count2d(&profile, &sigma, &spec, l, budget)?;
                let Discretization::Mesh {
                    n_x,
                    n_t,
                    x_max,
                    bandwidth,
                    ..
                } = c.discretization
                else {
                    unreachable!("two-dimensional counts carry a mesh")
                };
                t.push(vec![
                    num(l),
                    c.count.to_string(),
                    n_x.to_string(),
                    n_t.to_string(),
                    num(x_max),
                    bandwidth.to_string(),
                    num(if cfg.timings { secs } else { 0.0 }),
                ]);
            }
            emit(&t, out, "count2d.csv")?;
        }
        Command::Transverse { x, .. } => {
            let profile = cfg.parsed_profile()?;
            let sigma = cfg.parsed_sigma()?;
            let xs: Sweep = x.parse()?;
            xs.validate_positive()?;
            let mut t = Table::new(["x", "f", "sigma", "kappa", "mu", "mu_f_over_sigma"]);
            for x in xs.values() {
                let f = profile.f(x);
                let (mode, s) = if sigma.is_pair() {
                    let (s1, s2) = (sigma.sigma1(x), sigma.sigma2(x));
                    (solve_nonsymmetric(f, s1, s2)?, 0.5 * (s1 + s2))
                } else {
                    let s = sigma.sigma(x);
                    (solve_kappa(f, s)?, s)
                };
                let ratio = if s > 0.0 { mode.mu * f / s } else { f64::NAN };
                t.push(vec![num(x), num(f), num(s), num(mode.kappa), num(mode.mu), num(ratio)]);
            }
            emit(&t, out, "transverse.csv")?;
        }
        Command::Predict { parts, .. } => {
            cfg.lambda.validate_positive()?;
            let profile = cfg.parsed_profile()?;
            let sigma = cfg.parsed_sigma()?;
            let mut t = if *parts {
                Table::new([
                    "lambda",
                    "weyl_part",
                    "hsigma_part",
                    "superlinear_part",
                    "total",
                    "regime",
                ])
            } else {
                Table::new(["lambda", "total", "regime"])
            };
            for l in cfg.lambda.values() {
                let p = composite_prediction(&profile, &sigma, l)?;
                let regime = p.regime.tag().to_string();
                t.push(if *parts {
                    vec![
                        num(l),
                        num(p.weyl_part),
                        num(p.h_sigma_part),
                        num(p.dirichlet_superlinear_part),
                        num(p.total),
                        regime,
                    ]
                } else {
                    vec![num(l), num(p.total), regime]
                });
            }
            emit(&t, out, "predict.csv")?;
        }
        Command::Compare { .. } => {
            let result = experiment::run(&cfg)?;
            if out.is_none() {
                print!("{}", result.table.to_csv_string());
                eprintln!("{}", result.summary.to_json());
            }
            for row in result.rows.iter().filter(|r| !r.errors.is_empty()) {
                eprintln!("λ={}: {}", row.lambda, row.errors.join("; "));
            }
            if result.failed_rows() > 0 {
                return Ok(2);
            }
        }
        Command::Converge { refinements, .. } => {
            let rows = experiment::convergence_study(&cfg, *refinements)?;
            emit(&convergence_table(&rows), out, "converge.csv")?;
        }
        Command::Scalecheck { eps, target, .. } => {
            let eps: Vec<f64> = eps
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| LabError::Config(format!("bad epsilon `{s}`")))
                })
                .collect::<Result<_, _>>()?;
            let target = match target.as_str() {
                "h" | "H" => ScaleTarget::Reduced,
                "b" | "B" => ScaleTarget::ComparisonB,
                other => return Err(LabError::Config(format!("unknown target `{other}`")).into()),
            };
            let rows = experiment::scaling_sweep(&cfg, &eps, target)?;
            let worst = rows.iter().map(|r| r.constant).fold(0.0, f64::max);
            emit(&scaling_table(&rows), out, "scalecheck.csv")?;
            eprintln!("max constant: {worst}");
        }
        Command::Audit { probes, .. } => {
            let profile = cfg.parsed_profile()?;
            let sigma = cfg.parsed_sigma()?;
            let grid = match probes {
                Some(s) => {
                    let sw: Sweep = s.parse()?;
                    sw.validate_positive()?;
                    sw.values()
                }
                None => {
                    let lo = profile.a().max(1.0);
                    geometric_probes(lo, 1e4 * lo, 32)
                }
            };
            let report = audit_assumptions(&profile, &sigma, &grid);
            let w = |x: f64| eval_w(&profile, &sigma, x).unwrap_or(f64::INFINITY);
            let mut t = Table::new(["check", "verdict", "last_value"]);
            for c in report.checks.iter().chain(std::iter::once(&report.neumann_criterion)) {
                t.push(vec![
                    c.name.to_string(),
                    c.verdict.as_str().to_string(),
                    c.values.last().copied().map(num).unwrap_or_default(),
                ]);
            }
            t.push(vec![
                "weyl_regime".into(),
                classify_weyl_regime(&profile).tag().into(),
                String::new(),
            ]);
            t.push(vec![
                "titchmarsh".into(),
                titchmarsh_applicable(&w, &grid).as_str().into(),
                String::new(),
            ]);
            emit(&t, out, "audit.csv")?;
            if !report.all_hold() {
                eprintln!("some standing assumptions do not hold on the probe grid");
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<LabError>().map(LabError::exit_code).unwrap_or(2);
            ExitCode::from(code)
        }
    }
}
