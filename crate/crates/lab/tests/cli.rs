use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cusp-lab"))
        .args(args)
        .output()
        .expect("running cusp-lab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn cli_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "profile = power:alpha=2\nlambda = 50\nsigma = const:v=1\n").unwrap();
    let cfg = path.to_str().unwrap();
    let o = lab(&["count1d", "--config", cfg]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("50,"));
    let o = lab(&["count1d", "--config", cfg, "--lambda", "80"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("80,"));
    let o = lab(&["count1d", "--config", cfg, "--set", "lambda=90"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("90,"));
}

#[test]
fn column_layouts() {
    let o = lab(&["count1d", "--profile", "power:alpha=2", "--lambda", "100"]);
    assert_eq!(stdout(&o).lines().next(), Some("lambda,count,X,h,modes_used,shift_applied"));
    let o = lab(&["count2d", "--profile", "const:v=1", "--operator", "b", "--lambda", "30", "--xmax", "2"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,count,nx,nt,X,bandwidth,factor_seconds"));
    assert!(lines.next().unwrap().starts_with("30,2,"));
    let o = lab(&["transverse", "--profile", "power:alpha=2", "--x", "1"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("x,f,sigma,kappa,mu,mu_f_over_sigma"));
    assert!(text.lines().nth(1).unwrap().starts_with("1,1,1,0.86033"));
    let o = lab(&["predict", "--profile", "power:alpha=3", "--lambda", "100", "--parts"]);
    assert_eq!(
        stdout(&o).lines().next(),
        Some("lambda,weyl_part,hsigma_part,superlinear_part,total,regime")
    );
}

#[test]
fn exit_codes() {
    assert_eq!(lab(&["predict", "--lambda", ""]).status.code(), Some(1));
    assert_eq!(lab(&["predict", "--set", "colour=red"]).status.code(), Some(1));
    assert_eq!(lab(&["count1d", "--profile", "power:alpha=-2"]).status.code(), Some(1));
    let o = lab(&[
        "compare", "--profile", "const:v=1", "--routes", "predict", "--lambda", "10", "--suites", "",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = lab(&["count2d", "--lambda", "1000", "--mem-budget-mb", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(lab(&["audit", "--profile", "power:alpha=2"]).status.code(), Some(0));
}

#[test]
fn compare_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = lab(&[
        "compare",
        "--out",
        out.to_str().unwrap(),
        "--profile",
        "power:alpha=2",
        "--lambda",
        "100:400:3",
        "--no-timings",
        "--threads",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["compare.csv", "series_modesum.csv", "series_predict.csv", "summary.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let series = std::fs::read_to_string(out.join("series_modesum.csv")).unwrap();
    assert_eq!(series.lines().count(), 4);
}
