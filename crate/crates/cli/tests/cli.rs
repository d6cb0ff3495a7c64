use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bathent"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let idx = rows[0].iter().position(|h| h == name).unwrap();
    rows[1..].iter().map(|r| r[idx].clone()).collect()
}

fn collective(eta: f64, sigma: f64, omega: f64, lambda: f64, initial: &str) -> String {
    format!(
        r#"{{"bath": {{"collective": {{"eta": {eta}, "sigma": {sigma}, "omega": {omega}, "lambda": {lambda}}}}},
            "initial_state": {initial}}}"#
    )
}

const VACUUM_BATH: &str = r#""eta": [[1, 0], [0, 2]], "sigma": [[1, 0], [0, 0.1]]"#;

#[test]
fn banner_and_usage_errors() {
    let vac = configs().join("vacuum_generation.json");
    let out = run(&["check-cp"], &vac);
    assert!(stdout(&out).starts_with("# bathent "));

    let out = bin().arg("check-cp").output().unwrap();
    assert_eq!(code(&out), 1, "missing --config");
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(code(&out), 1);
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(code(&out), 0);
    let out = run(&["steady", "--tol", "-1"], &vac);
    assert_eq!(code(&out), 1);
}

#[test]
fn check_cp_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = run(&["check-cp"], &configs().join("vacuum_generation.json"));
    assert_eq!(code(&out), 0);

    let non_cp = write(
        &dir,
        "non_cp.json",
        &format!(r#"{{"bath": {{{VACUUM_BATH}, "lambda": [[0, 0], [1.2, 0]]}}}}"#),
    );
    let out = run(&["check-cp"], &non_cp);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("completely positive: false"));

    let malformed = write(&dir, "bad.json", r#"{"bath": {"eta": [[1, 0]]"#);
    assert_eq!(code(&run(&["check-cp"], &malformed)), 1);
    let missing = dir.path().join("absent.json");
    assert_eq!(code(&run(&["check-cp"], &missing)), 1);
}

#[test]
fn non_cp_bath_refused_unless_allowed() {
    let dir = TempDir::new().unwrap();
    let non_cp = write(
        &dir,
        "non_cp.json",
        &format!(r#"{{"bath": {{{VACUUM_BATH}, "lambda": [[0, 0], [1.2, 0]]}}}}"#),
    );
    let out = run(&["witness"], &non_cp);
    assert_eq!(code(&out), 2);
    let out = run(&["witness", "--allow-non-cp"], &non_cp);
    assert!(matches!(code(&out), 0 | 3), "{}", stdout(&out));
    assert!(stdout(&out).contains("warning"));
}

#[test]
fn evolve_zero_bath_is_stationary() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "zero.json",
        r#"{"bath": {}, "initial_state": {"kind": "thermal", "occupations": [0.3, 1.1]},
            "time": {"t_max": 1.0, "dt": 0.1}}"#,
    );
    let path = dir.path().join("traj.csv");
    let out = run(&["evolve", "--output", path.to_str().unwrap()], &cfg);
    assert_eq!(code(&out), 0);
    let rows = csv(&path);
    assert_eq!(rows[0].len(), 35);
    assert_eq!(rows.len(), 12);
    for r in &rows[2..] {
        assert_eq!(r[1..], rows[1][1..]);
    }
}

#[test]
fn evolve_vacuum_becomes_entangled() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("traj.csv");
    let out = run(
        &["evolve", "--output", path.to_str().unwrap()],
        &configs().join("vacuum_generation.json"),
    );
    assert_eq!(code(&out), 0);
    let rows = csv(&path);
    let ent = column(&rows, "entangled");
    assert_eq!(ent[0], "false");
    assert!(ent[1..].iter().all(|e| e == "true"));
    let min_eig: Vec<f64> = column(&rows, "min_pt_eig").iter().map(|s| s.parse().unwrap()).collect();
    assert!(min_eig[0].abs() < 1e-12);
    assert!(min_eig[1] < 0.0);
}

#[test]
fn evolve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("squeezed_generation.json");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let out_a = run(&["evolve", "--output", a.to_str().unwrap()], &cfg);
    let out_b = run(&["evolve", "--output", b.to_str().unwrap()], &cfg);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let strip = |o: &Output| stdout(o).lines().filter(|l| !l.starts_with("wrote")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&out_a), strip(&out_b));
}

#[test]
fn witness_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = run(&["witness"], &configs().join("vacuum_generation.json"));
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("8.5000000000000"), "{text}");
    assert!(text.contains("9.5000000000000"), "{text}");

    let out = run(&["witness"], &configs().join("squeezed_generation.json"));
    assert_eq!(code(&out), 0);

    let no_coupling = write(&dir, "passive.json", &format!(r#"{{"bath": {{{VACUUM_BATH}}}}}"#));
    assert_eq!(code(&run(&["witness"], &no_coupling)), 3);

    let weak = write(
        &dir,
        "weak.json",
        &collective(1.5, 1.0, 0.0, -0.8, r#"{"kind": "pure", "omega1": 0.2, "omega2": 0.2},
            "witness": {"a": -0.7071067811865476, "b": 0.7071067811865476}"#),
    );
    assert_eq!(code(&run(&["witness"], &weak)), 3);

    let thermal = write(
        &dir,
        "thermal.json",
        &format!(
            r#"{{"bath": {{{VACUUM_BATH}, "lambda": [[0, 1.2], [0, 0]]}},
                "initial_state": {{"kind": "thermal", "occupations": [0.5, 0.5]}}}}"#
        ),
    );
    let out = run(&["witness"], &thermal);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("evolve"));
}

#[test]
fn steady_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = run(&["steady"], &configs().join("asymptotic.json"));
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("4.6222222222222"), "{text}");
    assert!(text.contains("verdict: entangled"));

    let mixed = r#"{"kind": "collective_mixed", "beta0": 1.0}"#;
    let weak = write(&dir, "weak.json", &collective(1.0, 0.5, 0.1, 0.6, mixed));
    assert_eq!(code(&run(&["steady"], &weak)), 3);

    let marginal = write(&dir, "marginal.json", &collective(1.0, 1.0, 0.1, 0.5, r#"{"kind": "vacuum"}"#));
    assert_eq!(code(&run(&["steady"], &marginal)), 5);
    let marginal_mixed = write(&dir, "marginal_mixed.json", &collective(1.0, 1.0, 0.1, 0.5, mixed));
    assert_eq!(code(&run(&["steady"], &marginal_mixed)), 5);

    let explicit = run(&["steady"], &configs().join("vacuum_generation.json"));
    assert_eq!(code(&explicit), 0);
}

#[test]
fn sweep_finds_threshold() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("asymptotic.json");
    let path = dir.path().join("sweep.csv");
    let out = run(
        &["sweep", "--param", "lambda_abs", "--range", "0.6:0.75:16", "--output", path.to_str().unwrap()],
        &cfg,
    );
    assert_eq!(code(&out), 0);
    let rows = csv(&path);
    assert_eq!(rows[0].join(","), "param_value,cp_ok,dq0,steady_min_pt_eig,steady_entangled");
    assert_eq!(rows.len(), 17);
    let x: Vec<f64> = column(&rows, "param_value").iter().map(|s| s.parse().unwrap()).collect();
    let cp = column(&rows, "cp_ok");
    let ent = column(&rows, "steady_entangled");
    let threshold = (4.0 * 0.25 * (0.25 + 0.01) / (0.75f64 * 0.75)).sqrt();
    let cp_max = 0.5f64.sqrt();
    for i in 0..x.len() {
        assert_eq!(cp[i] == "true", x[i] <= cp_max + 1e-12, "cp_ok at {}", x[i]);
        if (x[i] - threshold).abs() > 1e-6 {
            assert_eq!(ent[i] == "true", x[i] > threshold, "entangled at {}", x[i]);
        }
    }

    let single = dir.path().join("single.csv");
    let out = run(
        &["sweep", "--param", "eta", "--range", "1.0:2.0:1", "--output", single.to_str().unwrap()],
        &cfg,
    );
    assert_eq!(code(&out), 0);
    assert_eq!(csv(&single).len(), 2);

    let bad = dir.path().join("bad.csv");
    let out = run(
        &["sweep", "--param", "gamma", "--range", "0:1:3", "--output", bad.to_str().unwrap()],
        &cfg,
    );
    assert_eq!(code(&out), 1);
    assert!(!bad.exists());
    let out = run(
        &["sweep", "--param", "eta", "--range", "0:1", "--output", bad.to_str().unwrap()],
        &cfg,
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn sweep_reports_witness_when_configured() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(
        &["sweep", "--param", "lambda_abs", "--range", "0.8:1.0:2", "--output", path.to_str().unwrap()],
        &configs().join("squeezed_generation.json"),
    );
    assert_eq!(code(&out), 0);
    let dq: Vec<f64> = column(&csv(&path), "dq0").iter().map(|s| s.parse().unwrap()).collect();
    // The configured phase gives lambda = -|lambda|, so the sign flips
    // between |lambda| = 0.8 and 1.0.
    assert!(dq[0] > 0.0 && dq[1] < 0.0, "{dq:?}");
}

#[test]
fn oracle_compare_agrees_on_small_runs() {
    let dir = TempDir::new().unwrap();
    let zero = write(
        &dir,
        "zero.json",
        r#"{"bath": {}, "initial_state": {"kind": "thermal", "occupations": [0.2, 0.1]},
            "time": {"t_max": 0.2, "dt": 0.1}, "oracle": {"cutoff": 10, "dt": 0.01}}"#,
    );
    let out = run(&["oracle-compare"], &zero);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let vacuum = write(
        &dir,
        "vacuum.json",
        &format!(
            r#"{{"bath": {{{VACUUM_BATH}, "lambda": [[0, 1.2], [0, 0]]}},
                "time": {{"t_max": 0.2, "dt": 0.05}}, "oracle": {{"cutoff": 10, "dt": 0.01}}}}"#
        ),
    );
    let out = run(&["oracle-compare"], &vacuum);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("verdict disagreements: 0"));
}

#[test]
fn oracle_compare_flags_truncation() {
    let dir = TempDir::new().unwrap();
    let pumped = write(
        &dir,
        "pumped.json",
        r#"{"bath": {"eta": [[0.1, 0], [0, 0.1]], "sigma": [[2, 0], [0, 2]]},
            "time": {"t_max": 2.0, "dt": 0.5}, "oracle": {"dt": 0.01}}"#,
    );
    let out = run(&["oracle-compare", "--cutoff", "3"], &pumped);
    assert_eq!(code(&out), 6);

    let blocks = write(
        &dir,
        "blocks.json",
        r#"{"bath": {}, "initial_state": {"kind": "blocks", "alpha": [[0, 0], [0, 0]], "beta": [[1, 0], [0, 1]]},
            "time": {"t_max": 0.1, "dt": 0.1}}"#,
    );
    assert_eq!(code(&run(&["oracle-compare"], &blocks)), 1);
}
