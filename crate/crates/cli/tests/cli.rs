use std::process::{Command, Output};

fn aup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aup"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn phi_prints_fixed_decimals() {
    let o = aup(&["phi", "--model", "normal-meanvar", "--theta", "0,1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.0000000000,-2.0000000000");
    let o = aup(&["phi", "--model", "linreg-var", "--theta", "-0.5,2,1"]);
    assert_eq!(stdout(&o).trim(), "0.0000000000,0.0000000000,-2.0000000000");
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(
        aup(&["phi", "--model", "weibull", "--theta", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        aup(&["phi", "--model", "binomial", "--theta", "1.5"])
            .status
            .code(),
        Some(2)
    );
    let o = aup(&["construct-prior", "--model", "gamma", "--theta", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not integrable"));
    assert_eq!(aup(&["simulate", "--reps", "0"]).status.code(), Some(2));
    assert_eq!(
        aup(&["simulate", "--model", "gamma"]).status.code(),
        Some(2)
    );
    assert_eq!(
        aup(&["reproduce", "--figure", "bias", "--reps", "10"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn integrability_and_construction() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.txt");
    std::fs::write(&grid, "# shape\n1, 2, 4\n# scale\n1:4:3\n").unwrap();
    let g = grid.to_str().unwrap();
    let o = aup(&["integrability", "--model", "gamma", "--grid-spec", g]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("integrable: false"));
    assert!(stdout(&o).contains("points_tested: 9"));
    let o = aup(&[
        "integrability",
        "--model",
        "normal-meanvar",
        "--grid-spec",
        g,
    ]);
    assert!(stdout(&o).contains("integrable: true"));
    let o = aup(&[
        "integrability",
        "--model",
        "gamma",
        "--grid-spec",
        "/no/such/file",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = aup(&[
        "construct-prior",
        "--model",
        "normal-meanvar",
        "--anchor",
        "0,1",
        "--theta",
        "0.7,4",
    ]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v + 2.0 * 4f64.ln()).abs() < 1e-6);
}

#[test]
fn simulate_with_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.cfg");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        "prior = au,jeffreys\nm = 10\nreps = 4\nchain = 200\nwarmup = 20\nseed = 3\n",
    )
    .unwrap();
    let o = aup(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--prior",
        "au",
        "--out",
        out.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.starts_with("ner-balanced,au,i,10,5,")));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",4,3")));
    let meta = std::fs::read_to_string(dir.path().join("out.csv.meta")).unwrap();
    assert!(meta.contains("prior = au\n"));

    // Stdout output matches the file for the same settings.
    let o = aup(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--prior",
        "au",
    ]);
    assert_eq!(stdout(&o), text);
}

#[test]
fn aborted_runs_exit_3() {
    let o = aup(&[
        "simulate", "--prior", "au", "--m", "1", "--n", "2", "--reps", "3", "--chain", "50",
        "--warmup", "0",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
