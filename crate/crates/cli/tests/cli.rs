use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-svm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_then_solve_recovers_direction() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(
        &["generate", "--d", "40", "--s", "3", "--m", "300", "--r", "1", "--seed", "5", "--out", "t.csv", "--classifier-out", "a.csv"],
        dir.path(),
    );
    assert!(gen.status.success(), "{gen:?}");

    let data = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = data.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("i,y,x_1,"));
    assert_eq!(header.split(',').count(), 42);
    assert_eq!(lines.count(), 300);

    for method in ["l1", "l1l2", "onebit"] {
        let out = format!("w_{method}.csv");
        let o = run(
            &["solve", "--method", method, "--data", "t.csv", "--R", "1.6", "--out", &out, "--truth", "a.csv"],
            dir.path(),
        );
        assert!(o.status.success(), "{o:?}");
        let text = stdout(&o);
        let cosine: f64 = text
            .lines()
            .find_map(|l| l.strip_prefix("cosine"))
            .unwrap()
            .trim()
            .parse()
            .unwrap();
        assert!(cosine > 0.8, "{method}: {text}");
        let w = fs::read_to_string(dir.path().join(&out)).unwrap();
        assert_eq!(w.lines().next(), Some("j,w_j"));
        assert_eq!(w.lines().count(), 41);
    }
}

#[test]
fn generate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["x.csv", "y.csv"] {
        let o = run(&["generate", "--d", "10", "--m", "20", "--r", "2", "--seed", "9", "--out", name], dir.path());
        assert!(o.status.success());
    }
    assert_eq!(
        fs::read(dir.path().join("x.csv")).unwrap(),
        fs::read(dir.path().join("y.csv")).unwrap()
    );
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["generate", "--d", "10", "--s", "20", "--m", "5", "--r", "1", "--out", "t.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    run(&["generate", "--d", "10", "--m", "5", "--r", "1", "--out", "t.csv"], dir.path());
    let o = run(&["solve", "--method", "l1", "--data", "t.csv", "--R", "0.5", "--out", "w.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", "--method", "svm", "--data", "t.csv", "--R", "2", "--out", "w.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["sweep", "--kind", "q", "--out", "s.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["theory", "--d", "100", "--r", "1", "--R", "2", "--m", "0", "--eps", "0.1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--method", "l1", "--data", "absent.csv", "--R", "2", "--out", "w.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_data_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "i,y,x_1\n0,3,0.5\n").unwrap();
    let o = run(&["solve", "--method", "l1", "--data", "bad.csv", "--R", "2", "--out", "w.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{o:?}");
}

#[test]
fn theory_prints_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["theory", "--d", "1000", "--r", "0.75", "--R", "2.2", "--m", "400", "--eps", "0.1", "--s", "5", "--c", "0.6", "--c-prime", "0.5", "--out", "b.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("non-informative"));
    assert!(text.contains("warning:"));
    let csv = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], sparse_svm::theory::BOUND_CSV_HEADER.join(","));
}

#[test]
fn sweep_writes_rows_overlay_and_trials() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "sweep", "--kind", "r", "--trials", "2", "--grid", "0.5:1:0.5", "--d", "60", "--m-values", "50",
            "--methods", "l1,l1l2", "--out", "s.csv", "--bounds-out", "o.csv", "--trials-out", "t.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let rows = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 2);
    assert!(rows.lines().next().unwrap().starts_with("sweep_value,method,"));
    let trials = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 2 * 2);
    let overlay = fs::read_to_string(dir.path().join("o.csv")).unwrap();
    assert_eq!(overlay.lines().count(), 1 + 2 * sparse_svm::experiments::DEFAULT_EPS_GRID.len());
}

#[test]
fn check_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "--suite", "thm2", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).trim_end().ends_with("PASS"));
    let o = run(&["check", "--suite", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
