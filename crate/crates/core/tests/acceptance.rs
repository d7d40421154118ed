//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use bpm_core::auction::{solve, Order, SolverConfig};
use bpm_core::audit::{self, check_epsilon_optimal, PATH_CHECK_LIMIT};
use bpm_core::bench::{median, run_experiment, ExperimentRow, ExperimentSpec};
use bpm_core::graph::{generate, GeneratorSpec, GraphKind};
use bpm_core::oracle::{brute_force, hungarian};

type Outcome = Result<String, String>;

fn epsilon_optimality() -> Outcome {
    let mut instances = 0;
    for eps in [0.01, 0.1] {
        for i in 0..300u64 {
            let n = 2 + (i as usize % 7);
            let g = generate(&GeneratorSpec::complete(n, n, 10_000 + i)).unwrap();
            let r = solve(&g, &SolverConfig::new(eps)).map_err(|e| e.to_string())?;
            let exact = brute_force(&g).map_err(|e| e.to_string())?;
            let report = check_epsilon_optimal(&g, &r, &exact, eps)
                .map_err(|e| format!("instance {i}, ε={eps}: {e}"))?;
            if !report.passed() {
                return Err(format!("instance {i}, ε={eps}: {}", report.verdict()));
            }
            instances += 1;
        }
    }
    Ok(format!("{instances} instances, 0 violations"))
}

fn integer_recovery() -> Outcome {
    let mut compared = 0;
    let mut skipped = 0;
    for i in 0..300u64 {
        let n = 20 + (i as usize % 31);
        let spec = if i % 3 == 2 {
            GeneratorSpec::k_left_regular((0.9 * n as f64).round() as usize, n, 3, 20_000 + i)
        } else {
            GeneratorSpec::complete(n, n, 20_000 + i)
        }
        .with_weights(0.0, 100.0, true);
        let g = generate(&spec).unwrap();
        let eps = 1.0 / (n as f64 + 1.0);
        let r = solve(&g, &SolverConfig::new(eps)).map_err(|e| e.to_string())?;
        if !r.discarded.is_empty() {
            skipped += 1;
            continue;
        }
        let exact = hungarian(&g).map_err(|e| format!("instance {i}: {e}"))?;
        if r.total_weight != exact.optimum_weight {
            return Err(format!(
                "instance {i} (n={n}): solve {} vs hungarian {}",
                r.total_weight, exact.optimum_weight
            ));
        }
        compared += 1;
    }
    if compared < 200 {
        return Err(format!("only {compared} instances without discards"));
    }
    Ok(format!("{compared} exact matches, {skipped} skipped with discards"))
}

fn corpus_spec(i: u64) -> GeneratorSpec {
    const SIZES: [usize; 16] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 20, 50, 100, 200, 400];
    let n_right = SIZES[(i as usize * 7) % SIZES.len()];
    let n_left = 1 + (i as usize * 31) % n_right;
    let seed = 30_000 + i;
    let spec = if i % 4 == 0 {
        GeneratorSpec::complete(n_left, n_right, seed)
    } else {
        let k = 1 + (i as usize / 4) % n_right.min(5);
        GeneratorSpec::k_left_regular(n_left, n_right, k, seed)
    };
    if i % 5 == 0 {
        spec.with_weights(-50.0, 50.0, true)
    } else {
        spec
    }
}

fn invariant_suite() -> Outcome {
    const EPS: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];
    let mut traces = 0;
    let mut path_checked = 0;
    let mut moves = 0;
    for i in 0..1200u64 {
        let g = generate(&corpus_spec(i)).unwrap();
        let eps = EPS[i as usize % EPS.len()];
        let order = if i % 2 == 0 { Order::Input } else { Order::Shuffled(i) };
        let r = solve(&g, &SolverConfig::new(eps).with_trace().with_order(order)).map_err(|e| e.to_string())?;
        let trace = r.trace.as_ref().unwrap();
        let mut reports = vec![
            audit::check_monotone(trace, eps),
            audit::check_matched_inequality(&g, trace, eps),
            audit::check_distance_bound(&g, trace, eps),
        ];
        if g.n_right() <= PATH_CHECK_LIMIT {
            reports.push(audit::check_path_inequality(&g, &r.labels, &r.matching, eps).map_err(|e| e.to_string())?);
            path_checked += 1;
        }
        if let Some(bad) = reports.iter().find(|r| !r.passed()) {
            return Err(format!("trace {i}: {}", bad.verdict()));
        }
        traces += 1;
        moves += trace.len();
    }
    Ok(format!("{traces} traces ({moves} moves), path check on {path_checked}"))
}

fn medians(rows: &[ExperimentRow], n: usize, f: impl Fn(&ExperimentRow) -> f64) -> f64 {
    let mut v: Vec<f64> = rows.iter().filter(|r| r.n_right == n).map(f).collect();
    median(&mut v)
}

fn sparse_scaling() -> Outcome {
    let spec = ExperimentSpec {
        family: GraphKind::KLeftRegular,
        n_right: vec![1_000, 10_000, 100_000],
        density: 0.9,
        k: 3,
        epsilons: vec![0.05],
        weight_low: 0.0,
        weight_high: 1.0,
        integer_weights: false,
        trials: 5,
        base_seed: 40_000,
        parallel: false,
        timing: true,
    };
    let out = run_experiment(&spec).map_err(|e| e.to_string())?;
    if !out.failures.is_empty() {
        return Err(format!("{} trials failed", out.failures.len()));
    }
    let moves = |n| medians(&out.rows, n, |r| r.moves as f64 / r.n_left as f64);
    let dist = |n| medians(&out.rows, n, |r| r.sum_distances as f64 / r.n_right as f64);
    let time = |n| medians(&out.rows, n, |r| r.wall_time_ns as f64);
    let move_ratio = moves(100_000) / moves(1_000);
    let dist_ratio = dist(100_000) / dist(1_000);
    let time_ratio = time(100_000) / time(10_000);
    let detail = format!(
        "moves/n_left {:.3} → {:.3} (ratio {move_ratio:.3}), sum_distances/n_right {:.3} → {:.3} (ratio {dist_ratio:.3}), time ratio 1e5/1e4 {time_ratio:.2} (limit 15; 1e4/1e3 {:.2})",
        moves(1_000),
        moves(100_000),
        dist(1_000),
        dist(100_000),
        time(10_000) / time(1_000)
    );
    if move_ratio <= 2.0 && dist_ratio <= 2.0 && time_ratio <= 15.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn complete_label_bound() -> Outcome {
    let eps = 0.01;
    let spec = ExperimentSpec {
        family: GraphKind::Complete,
        n_right: vec![200],
        density: 1.0,
        k: 0,
        epsilons: vec![eps],
        weight_low: 0.0,
        weight_high: 1.0,
        integer_weights: false,
        trials: 10,
        base_seed: 50_000,
        parallel: true,
        timing: false,
    };
    let out = run_experiment(&spec).map_err(|e| e.to_string())?;
    if out.rows.len() != 10 {
        return Err(format!("{} trials failed", out.failures.len()));
    }
    let mut worst_label = 0.0f64;
    let mut worst_moves = 0.0f64;
    for r in &out.rows {
        let label_bound = r.weight_span + eps;
        let move_bound = r.n_left as f64 * (r.weight_span + eps) / eps + r.n_left as f64;
        worst_label = worst_label.max(r.max_label / label_bound);
        worst_moves = worst_moves.max(r.moves as f64 / move_bound);
        if r.max_label > label_bound || r.moves as f64 > move_bound {
            return Err(format!(
                "seed {}: max label {} (bound {label_bound}), moves {} (bound {move_bound})",
                r.seed, r.max_label, r.moves
            ));
        }
    }
    Ok(format!(
        "10 trials, ε={eps}: max label at {:.1}% of bound, moves at {:.1}% of bound",
        100.0 * worst_label,
        100.0 * worst_moves
    ))
}

fn cli_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("bpm-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let graph = dir.join("g.txt");
    let graph = graph.to_str().unwrap();
    let invocations: Vec<Vec<&str>> = vec![
        vec!["gen", "--n", "500", "--ratio", "0.9", "--k", "3", "--seed", "11", "--out", graph],
        vec!["gen", "--n", "30", "--kind", "complete", "--weights", "0:100:int", "--seed", "5"],
        vec!["solve", graph, "--epsilon", "0.05", "--audit"],
        vec!["solve", graph, "--epsilon", "0.05", "--order", "shuffle", "--seed", "3"],
        vec!["oracle", graph],
        vec!["bench", "--n", "100,1000", "--epsilon", "0.05,0.1", "--trials", "3", "--seed", "2", "--no-timing"],
        vec!["bench", "--n", "50", "--kind", "complete", "--ratio", "1", "--trials", "4", "--no-timing", "--serial"],
    ];
    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_bpm"))
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        let mut bytes = o.stdout;
        bytes.extend(o.status.code().unwrap_or(-1).to_le_bytes());
        if let Some(path) = args.iter().position(|a| *a == "--out").map(|i| args[i + 1]) {
            bytes.extend(std::fs::read(path).map_err(|e| e.to_string())?);
        }
        Ok(bytes)
    };
    let result = (|| {
        for args in &invocations {
            let first = run(args)?;
            for _ in 0..2 {
                if run(args)? != first {
                    return Err(format!("output differs: bpm {}", args.join(" ")));
                }
            }
        }
        Ok(format!("{} invocations × 3 runs byte-identical", invocations.len()))
    })();
    let _ = std::fs::remove_dir_all(&dir);
    result
}

fn oracle_cross_check() -> Outcome {
    let mut feasible = 0;
    let mut infeasible = 0;
    let mut i = 0u64;
    while feasible < 1000 {
        let n_right = 1 + (i as usize % 9);
        let n_left = 1 + (i as usize / 9) % n_right.min(8);
        let seed = 60_000 + i;
        let spec = match i % 3 {
            0 => GeneratorSpec::complete(n_left, n_right, seed),
            1 => GeneratorSpec::k_left_regular(n_left, n_right, n_right.min(2), seed).with_weights(0.0, 10.0, true),
            _ => GeneratorSpec::k_left_regular(n_left, n_right, 1 + (i as usize / 3) % n_right.min(4), seed)
                .with_weights(-5.0, 5.0, false),
        };
        let g = generate(&spec).unwrap();
        i += 1;
        let b = brute_force(&g).map_err(|e| e.to_string())?;
        match hungarian(&g) {
            Ok(h) => {
                if b.cardinality != n_left || h.cardinality != n_left || b.optimum_weight != h.optimum_weight {
                    return Err(format!(
                        "instance {}: brute {} (card {}) vs hungarian {} (card {})",
                        i - 1,
                        b.optimum_weight,
                        b.cardinality,
                        h.optimum_weight,
                        h.cardinality
                    ));
                }
                feasible += 1;
            }
            Err(_) if b.cardinality < n_left => infeasible += 1,
            Err(e) => return Err(format!("instance {}: hungarian failed ({e}) on a feasible graph", i - 1)),
        }
    }
    Ok(format!("{feasible} feasible instances agree, {infeasible} infeasible agree"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 epsilon-optimality vs brute force", epsilon_optimality),
        ("2 exact recovery on integer weights", integer_recovery),
        ("3 invariant suite", invariant_suite),
        ("4 sparse scaling", sparse_scaling),
        ("5 complete-graph label bound", complete_label_bound),
        ("6 CLI determinism", cli_determinism),
        ("7 oracle cross-check", oracle_cross_check),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
