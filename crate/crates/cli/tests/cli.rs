use std::path::Path;
use std::process::{Command, Output};

use ecmo_core::get_fixture;
use ecmo_core::io::{
    load_front_csv, load_json, save_problem, FrontMetrics, ProblemFile, RunRecord, SweepManifest,
};

fn ecmo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecmo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_a_record_and_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = ecmo(&[
        "solve",
        "--problem",
        "fixture:gebken_circle",
        "--solver",
        "wc",
        "--lambda",
        "0.5,0.5",
        "--T",
        "20000",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("F = [") && text.contains("|h| = ") && text.contains("avg_kkt_sq = "),
        "{text}"
    );
    let record: RunRecord = load_json(&dir.path().join("run.json")).unwrap();
    assert_eq!(record.problem.source, "fixture:gebken_circle");
    assert_eq!(record.problem.content_sha256.len(), 64);
    assert!(record.results["final_constraint_norm"].as_f64().unwrap() <= 1e-3);
    let trace = ecmo_core::io::load_trace_csv(&dir.path().join("trace.csv")).unwrap();
    assert!(!trace.is_empty());
}

#[test]
fn replaying_a_recorded_command_reproduces_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let out = ecmo(&[
        "solve",
        "--problem",
        "fixture:forum_llgc",
        "--lambda",
        "0.3,0.7",
        "--T",
        "3000",
        "--out",
        path(&first),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let record: RunRecord = load_json(&first.join("run.json")).unwrap();

    let second = dir.path().join("second");
    let mut replay: Vec<String> = record.command[1..].to_vec();
    let at = replay.iter().position(|a| a == "--out").unwrap();
    replay[at + 1] = path(&second).to_string();
    let refs: Vec<&str> = replay.iter().map(String::as_str).collect();
    assert_eq!(code(&ecmo(&refs)), 0);
    let again: RunRecord = load_json(&second.join("run.json")).unwrap();
    let a = record.results["avg_kkt_sq"].as_f64().unwrap();
    let b = again.results["avg_kkt_sq"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    assert_eq!(record.results, again.results);
}

#[test]
fn stochastic_solves_repeat_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let target = dir.path().join(name);
        let out = ecmo(&[
            "solve",
            "--problem",
            "fixture:quad_affine",
            "--solver",
            "wc-stoc",
            "--sigma-f",
            "0.1",
            "--sigma-h",
            "0.1",
            "--lambda",
            "0.5,0.5",
            "--T",
            "2000",
            "--seed",
            seed,
            "--out",
            path(&target),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        load_json::<RunRecord>(&target.join("run.json"))
            .unwrap()
            .results
    };
    assert_eq!(run("a", "4"), run("b", "4"));
    assert_ne!(run("a", "4"), run("c", "5"));
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = path(dir.path());
    let out = ecmo(&[
        "solve",
        "--problem",
        "fixture:gebken_circle",
        "--lambda",
        "0.5,0.6",
        "--out",
        out_dir,
    ]);
    assert_eq!(code(&out), 1);
    assert!(
        stderr(&out).contains("lambda must sum to 1"),
        "{}",
        stderr(&out)
    );

    let out = ecmo(&[
        "solve",
        "--problem",
        "fixture:gebken_circle",
        "--solver",
        "ls",
        "--lambda",
        "0.5,0.5",
        "--out",
        out_dir,
    ]);
    assert_eq!(code(&out), 1);
    assert!(
        stderr(&out).contains("constraints must be affine"),
        "{}",
        stderr(&out)
    );

    let out = ecmo(&[
        "solve",
        "--problem",
        "fixture:nope",
        "--lambda",
        "1",
        "--out",
        out_dir,
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("unknown fixture"));

    let out = ecmo(&[
        "solve",
        "--problem",
        "fixture:quad_affine",
        "--lambda",
        "0.5,x",
        "--out",
        out_dir,
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("lambda: cannot parse `x`"));

    let out = ecmo(&["solve", "--lambda", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--problem"));
}

#[test]
fn problem_files_are_loaded_and_bad_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("quad.json");
    save_problem(
        &file,
        &ProblemFile::from_fixture(&get_fixture("quad_affine").unwrap()).unwrap(),
    )
    .unwrap();
    let out = ecmo(&[
        "solve",
        "--problem",
        path(&file),
        "--solver",
        "ls",
        "--lambda",
        "1,0",
        "--T",
        "5000",
        "--out",
        path(&dir.path().join("ls")),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // constrained minimizer of the first objective on the line
    let record: RunRecord = load_json(&dir.path().join("ls/run.json")).unwrap();
    let z: Vec<f64> = serde_json::from_value(record.results["final_state"]["z"].clone()).unwrap();
    assert!(
        (z[0] - 0.1).abs() < 1e-8 && (z[1] + 0.05).abs() < 1e-8,
        "{z:?}"
    );
    assert_eq!(record.problem.source, path(&file));

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"name": "bad", "k": 2, "objectives": [{"monomial": [[1.0, [2]]]}], "constraints": []}"#,
    )
    .unwrap();
    let out = ecmo(&[
        "solve",
        "--problem",
        path(&bad),
        "--lambda",
        "1",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("objectives[0]"), "{}", stderr(&out));

    let out = ecmo(&[
        "solve",
        "--problem",
        path(&dir.path().join("missing.json")),
        "--lambda",
        "1",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn sweep_writes_front_metrics_records_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = ecmo(&[
        "sweep",
        "--problem",
        "fixture:gebken_circle",
        "--grid-resolution",
        "10",
        "--T",
        "20000",
        "--workers",
        "2",
        "--display",
        "inverse",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let manifest: SweepManifest = load_json(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest.runs.len(), 11);
    for run in &manifest.runs {
        let record: RunRecord =
            load_json(&dir.path().join(run.record_file.as_ref().unwrap())).unwrap();
        assert_eq!(record.results["run_id"], run.run_id.as_str());
    }
    let front = load_front_csv(&dir.path().join(&manifest.front_file)).unwrap();
    assert!(!front.is_empty() && front.len() <= 11);
    let header = std::fs::read_to_string(dir.path().join("front.csv")).unwrap();
    assert!(header.lines().nth(1).unwrap().ends_with("inv_F_1,inv_F_2"));
    let metrics: FrontMetrics = load_json(&dir.path().join(&manifest.metrics_file)).unwrap();
    assert!(metrics.hv > 0.0);
    assert_eq!(metrics.front_size, front.len());
    assert!(metrics.epsilon.is_some());
}

#[test]
fn resolution_zero_runs_the_centroid_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = ecmo(&[
        "sweep",
        "--problem",
        "fixture:quad_affine",
        "--grid-resolution",
        "0",
        "--T",
        "2000",
        "--admission-tol",
        "0.1",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest: SweepManifest = load_json(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest.runs.len(), 1);
    assert_eq!(manifest.runs[0].lambda, vec![0.5, 0.5]);
}

#[test]
fn a_sweep_that_diverges_everywhere_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = ecmo(&[
        "sweep",
        "--problem",
        "fixture:unbounded_guard",
        "--eta-c",
        "5",
        "--uv-c",
        "5",
        "--T",
        "500",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("diverged"));
}

#[test]
fn gradcheck_reports_per_function_errors() {
    let out = ecmo(&["gradcheck", "--fixture", "quad_affine"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    for line in text.lines() {
        let rel: f64 = line
            .split("max_rel_err ")
            .nth(1)
            .unwrap()
            .split(' ')
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert!(rel <= 1e-6, "{line}");
    }
    assert_eq!(text.lines().count(), 3);

    let out = ecmo(&["gradcheck", "--fixture", "counterexample_1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("skipped"));

    assert_eq!(code(&ecmo(&["gradcheck", "--fixture", "nope"])), 1);
}

#[test]
fn bench_emits_the_oracle_front_and_an_agreement_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = ecmo(&[
        "bench",
        "--fixture",
        "gebken_circle",
        "--grid-density",
        "100000",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let reference = load_front_csv(&dir.path().join("reference_front.csv")).unwrap();
    assert!(reference.len() > 1000);

    // the oracle agrees with itself
    let out = ecmo(&[
        "bench",
        "--fixture",
        "gebken_circle",
        "--front",
        path(&dir.path().join("reference_front.csv")),
        "--out",
        path(&dir.path().join("again")),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value = load_json(&dir.path().join("again/agreement.json")).unwrap();
    assert_eq!(report["epsilon"].as_f64(), Some(0.0));
    assert_eq!(report["hv_ratio"].as_f64(), Some(1.0));

    let out = ecmo(&[
        "bench",
        "--fixture",
        "llgc_cubic",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("reference front unavailable"));
}
