use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const TWO_BY_TWO: &str = "p bpm 2 2 4\ne 1 1 1\ne 1 2 2\ne 2 1 1\ne 2 2 3\n";

fn bpm(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_bpm"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_two_by_two_with_audit() {
    let o = bpm(&["solve", "--epsilon", "0.1", "--audit"], Some(TWO_BY_TWO));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("m 1 2 2\nm 2 1 1\ns weight 3 matched 2 discarded 0 moves 3\n"));
    for check in ["monotone", "matched-inequality", "distance-bound", "path-inequality", "epsilon-optimal"] {
        assert!(text.contains(&format!("ok {check}\n")), "{check} missing in {text}");
    }
}

#[test]
fn trace_file_has_one_line_per_move() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let o = bpm(
        &["solve", "--epsilon", "0.1", "--trace", trace.to_str().unwrap()],
        Some(TWO_BY_TWO),
    );
    assert_eq!(o.status.code(), Some(0));
    let lines = fs::read_to_string(&trace).unwrap();
    assert_eq!(lines.lines().count(), 3);
    assert!(lines.starts_with("t 1 1 1 1 0 1.1 - 0\n"));
}

#[test]
fn generated_graph_solves_and_audits() {
    let g = bpm(&["gen", "--n", "40", "--ratio", "0.9", "--k", "3", "--seed", "7"], None);
    assert_eq!(g.status.code(), Some(0));
    let graph = stdout(&g);
    assert!(graph.starts_with("p bpm 36 40 108\n"));
    let o = bpm(&["solve", "-", "--epsilon", "0.05", "--audit"], Some(&graph));
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("skip path-inequality"));
    assert!(!text.contains("violation"));
}

#[test]
fn parse_error_reports_line_and_exits_2() {
    let o = bpm(&["solve", "--epsilon", "0.1"], Some("p bpm 1 2 2\ne 1 1 1\ne 1 3 1\n"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn precondition_errors_exit_2() {
    let o = bpm(&["solve", "--epsilon", "0"], Some(TWO_BY_TWO));
    assert_eq!(o.status.code(), Some(2));
    let o = bpm(&["solve", "--epsilon", "0.1"], Some("p bpm 3 2 3\ne 1 1 1\ne 2 1 1\ne 3 2 1\n"));
    assert_eq!(o.status.code(), Some(2));
    let o = bpm(&["frobnicate"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_accepts_solver_output_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", TWO_BY_TWO);
    let solved = stdout(&bpm(&["solve", "--epsilon", "0.1", "--audit"], Some(TWO_BY_TWO)));
    let good = write(dir.path(), "m.txt", &solved);
    let o = bpm(&["verify", &graph, &good], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ok verify weight 3 matched 2\n");

    let bad = write(dir.path(), "bad.txt", "m 1 1 1\nm 2 1 1\n");
    let o = bpm(&["verify", &graph, &bad], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("violation verify"));
}

#[test]
fn oracle_reports_optimum_or_infeasible() {
    let o = bpm(&["oracle"], Some(TWO_BY_TWO));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("s optimum 3 cardinality 2\n"));
    let o = bpm(&["oracle", "--method", "hungarian"], Some(TWO_BY_TWO));
    assert!(stdout(&o).ends_with("s optimum 3 cardinality 2\n"));

    let starved = "p bpm 2 2 2\ne 1 1 1\ne 2 1 2\n";
    let o = bpm(&["oracle", "--method", "hungarian"], Some(starved));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "s infeasible\n");
}

#[test]
fn bench_writes_csv() {
    let o = bpm(
        &["bench", "--n", "50,100", "--epsilon", "0.1,0.05", "--trials", "2", "--no-timing"],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n_right,n_left,k,epsilon,seed,moves,comparisons,discarded,total_weight,sum_distances,max_label,wall_time_ns"
    );
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.ends_with(",0")));
    assert!(rows[0].starts_with("50,45,3,0.1,"));
}

#[test]
fn bench_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.toml",
        "family = \"complete\"\nn_right = [10]\ndensity = 1.0\nepsilons = [0.1]\ntrials = 3\ntiming = false\n",
    );
    let o = bpm(&["bench", "--config", &cfg], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 4);

    let bad = write(dir.path(), "bad.toml", "family = \"complete\"\nbogus = 1\n");
    assert_eq!(bpm(&["bench", "--config", &bad], None).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["gen", "--n", "200", "--kind", "complete", "--weights", "0:100:int", "--seed", "3"],
        vec!["bench", "--n", "100,300", "--trials", "3", "--no-timing"],
    ];
    for args in &runs {
        let first = bpm(args, None).stdout;
        for _ in 0..2 {
            assert_eq!(bpm(args, None).stdout, first, "{args:?}");
        }
    }
    let graph = stdout(&bpm(&["gen", "--n", "60", "--seed", "1"], None));
    let args = ["solve", "--epsilon", "0.05", "--order", "shuffle", "--seed", "9", "--audit"];
    let first = bpm(&args, Some(&graph)).stdout;
    for _ in 0..2 {
        assert_eq!(bpm(&args, Some(&graph)).stdout, first);
    }
}
