use cusp_lab::config::{ExperimentConfig, Route, Suite};
use cusp_lab::experiment::{convergence_study, run, scaling_sweep, ScaleTarget};
use cusp_lab::sweep::Sweep;
use cusp_spectra::laplace2d::EdgeBc;

fn config(profile: &str, sigma: &str, lambda: &str, routes: &[Route]) -> ExperimentConfig {
    ExperimentConfig {
        profile: profile.into(),
        sigma: sigma.into(),
        lambda: lambda.parse().unwrap(),
        routes: routes.to_vec(),
        suites: vec![],
        timings: false,
        ..Default::default()
    }
}

#[test]
fn modesum_against_prediction_trends_to_one() {
    let cfg = config("power:alpha=2", "const:v=1", "100:10000:5-log", &[Route::ModeSum, Route::Predict]);
    let out = run(&cfg).unwrap();
    assert_eq!(out.rows.len(), 5);
    assert_eq!(out.failed_rows(), 0);
    let gaps: Vec<f64> = out
        .rows
        .iter()
        .map(|r| (r.ratio(Route::ModeSum).unwrap() - 1.0).abs())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[4] < 0.1, "{gaps:?}");
    assert!(out.table.header.contains(&"modesum_over_predict".to_string()));
}

#[test]
fn empty_sweep_is_a_config_error() {
    let mut cfg = config("power:alpha=2", "const:v=1", "10", &[Route::Predict]);
    cfg.lambda = Sweep::List(vec![]);
    assert_eq!(run(&cfg).unwrap_err().exit_code(), 1);
    let mut cfg = config("power:alpha=2", "const:v=1", "10", &[Route::Predict]);
    cfg.routes.clear();
    assert_eq!(run(&cfg).unwrap_err().exit_code(), 1);
}

#[test]
fn count2d_alone_has_no_ratio_columns() {
    let mut cfg = config("power:alpha=2", "const:v=1", "20,40", &[Route::Count2d]);
    cfg.mesh.x_max = Some(6.0);
    let out = run(&cfg).unwrap();
    assert!(out.table.header.iter().all(|h| !h.contains("over")));
    assert!(out.rows.iter().all(|r| r.ratio(Route::Count2d).is_none()));
    assert!(out.rows.iter().all(|r| r.count2d.is_some()));
}

#[test]
fn outputs_are_byte_stable() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut cfg = config("power:alpha=2", "const:v=1", "50:400:4", &[Route::ModeSum, Route::Predict]);
    cfg.suites = vec![Suite::RankOne, Suite::SigmaMonotone];
    cfg.seed = 11;
    for d in &dirs {
        cfg.out = Some(d.path().to_path_buf());
        let out = run(&cfg).unwrap();
        assert!(out.summary.suites.values().all(|v| v == "pass"), "{:?}", out.summary.suites);
    }
    for name in ["compare.csv", "series_modesum.csv", "series_predict.csv", "summary.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dirs[0].path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["regime"], "linear");
}

#[test]
fn predict_slope_recovers_power_law() {
    // 1/2 + 1/(α - β) for f = x⁻¹, σ = x^{-1/2}
    let cfg = config("power:alpha=1", "powersigma:s=1,beta=0.5", "1e4:1e6:5-log", &[Route::Predict]);
    let out = run(&cfg).unwrap();
    let slope = out.summary.slopes["predict"].0;
    assert!((slope - 2.5).abs() < 0.025, "slope {slope}");
}

#[test]
fn rectangle_converges_immediately() {
    let mut cfg = config("const:v=1", "const:v=1", "30", &[Route::Count2d]);
    cfg.profile = "const:v=1".into();
    cfg.mesh.x_max = Some(2.0);
    cfg.bc_bottom = EdgeBc::Dirichlet;
    cfg.bc_top = EdgeBc::Dirichlet;
    let rows = convergence_study(&cfg, 3).unwrap();
    let counts: Vec<usize> = rows.iter().map(|r| r.count).collect();
    assert_eq!(counts, vec![2, 2, 2]);
    assert!(rows.iter().skip(1).all(|r| r.delta == Some(0)));
    assert!(convergence_study(&cfg, 1).is_err());
}

#[test]
fn convergence_refuses_over_budget() {
    let mut cfg = config("power:alpha=2", "const:v=1", "100", &[Route::Count2d]);
    cfg.mem_budget_mb = 1;
    let e = convergence_study(&cfg, 3).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    assert!(e.to_string().contains("level 2"), "{e}");
}

#[test]
fn modesum_counts_settle_under_refinement() {
    // finite differences place eigenvalues low, so counts can only drop
    let cfg = config("power:alpha=2", "const:v=1", "300", &[Route::ModeSum]);
    let rows = convergence_study(&cfg, 4).unwrap();
    assert!(rows.windows(2).all(|w| w[1].x_max > w[0].x_max));
    assert!(rows.iter().skip(1).all(|r| r.delta.unwrap() <= 0), "{rows:?}");
    assert_eq!(rows[3].delta, Some(0), "{rows:?}");
}

#[test]
fn scaling_constant_is_moderate() {
    let cfg = config("power:alpha=2", "const:v=1", "1000", &[Route::ModeSum]);
    for target in [ScaleTarget::Reduced, ScaleTarget::ComparisonB] {
        let rows = scaling_sweep(&cfg, &[0.1], target).unwrap();
        assert!(rows[0].constant <= 3.0, "{target:?}: {:?}", rows[0]);
        assert!(rows[0].n_minus >= rows[0].n && rows[0].n >= rows[0].n_plus);
    }
    let tiny = scaling_sweep(&cfg, &[1e-9], ScaleTarget::Reduced).unwrap();
    assert_eq!(tiny[0].n_plus, tiny[0].n);
    assert!(scaling_sweep(&cfg, &[0.6], ScaleTarget::Reduced).is_err());
    assert!(scaling_sweep(&cfg, &[0.0], ScaleTarget::Reduced).is_err());
}

#[test]
fn route_errors_are_recorded_per_row() {
    // a constant profile has no asymptotic prediction but still counts
    let mut cfg = config("const:v=1", "const:v=1", "20,30", &[Route::ModeSum, Route::Predict]);
    cfg.mesh.x_max = Some(3.0);
    let out = run(&cfg).unwrap();
    assert_eq!(out.failed_rows(), 2);
    assert!(out.rows.iter().all(|r| r.modesum.is_some() && r.predict.is_none()));
}
