//! `bpm`: generate, solve, verify and benchmark bipartite matching instances.
//!
//! Exit codes: 0 success, 1 infeasible instance or audit violation,
//! 2 usage, input or parse error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bpm_core::auction::{solve, CapScope, Order, SolverConfig};
use bpm_core::audit::{self, AuditReport, Check, PATH_CHECK_LIMIT};
use bpm_core::bench::{run_experiment, write_csv, ExperimentSpec};
use bpm_core::graph::{self, BipartiteGraph, GeneratorSpec, GraphKind};
use bpm_core::oracle::{self, OracleError, BRUTE_FORCE_LIMIT};
use bpm_core::output;

/// Largest `n_left · n_right` for which `solve --audit` runs the dense
/// Hungarian oracle.
const HUNGARIAN_AUDIT_CELLS: usize = 4_000_000;

#[derive(Parser)]
#[command(name = "bpm", version, about = "Auction solver for weighted bipartite matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph.
    Gen(GenArgs),
    /// Run the auction solver on a graph.
    Solve(SolveArgs),
    /// Check a matching file against its graph.
    Verify(VerifyArgs),
    /// Solve exactly with brute force or the Hungarian method.
    Oracle(OracleArgs),
    /// Run a scaling experiment and write CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    #[value(name = "k-regular")]
    KRegular,
    Complete,
}

impl From<Kind> for GraphKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::KRegular => GraphKind::KLeftRegular,
            Kind::Complete => GraphKind::Complete,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OrderArg {
    Input,
    Shuffle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Brute,
    Hungarian,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct WeightRange {
    low: f64,
    high: f64,
    integer: bool,
}

fn parse_weights(s: &str) -> Result<WeightRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("invalid weight bound '{t}'"));
    match parts.as_slice() {
        [lo, hi] => Ok(WeightRange { low: num(lo)?, high: num(hi)?, integer: false }),
        [lo, hi, "int"] => Ok(WeightRange { low: num(lo)?, high: num(hi)?, integer: true }),
        _ => Err("expected lo:hi or lo:hi:int".into()),
    }
}

#[derive(Args)]
struct GraphShape {
    /// Graph family.
    #[arg(long, value_enum, default_value = "k-regular")]
    kind: Kind,
    /// Neighbors per left vertex (k-regular only).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Weight range, `lo:hi` for reals in [lo, hi) or `lo:hi:int` for integers.
    #[arg(long, value_parser = parse_weights, default_value = "0:1")]
    weights: WeightRange,
}

#[derive(Args)]
struct GenArgs {
    /// Number of right vertices.
    #[arg(long)]
    n: usize,
    /// n_left / n_right.
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
    #[command(flatten)]
    shape: GraphShape,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Graph file; stdin when absent or `-`.
    input: Option<PathBuf>,
    /// Bidding increment ε (> 0).
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "input")]
    order: OrderArg,
    /// Seed for `--order shuffle`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the move trace to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run the invariant checks and append one verdict line per check.
    #[arg(long)]
    audit: bool,
    /// Replace the discard cap n/2·(w_max − w_min + ε) with a fixed value.
    /// Experimental: results no longer follow the standard threshold.
    #[arg(long)]
    max_label: Option<f64>,
    /// Compute the cap per connected component instead of globally.
    #[arg(long)]
    component_cap: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    matching: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    input: Option<PathBuf>,
    /// `auto` uses brute force up to n_left = 10, Hungarian above.
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML experiment file; other experiment flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated right-side sizes.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, default_value_t = 0.9)]
    ratio: f64,
    #[command(flatten)]
    shape: GraphShape,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    epsilon: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write 0 for wall time so output is reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Run trials one after another.
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_input(path: Option<&Path>) -> Result<(String, Vec<u8>)> {
    match path {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("cannot read {}", p.display()))?;
            Ok((p.display().to_string(), bytes))
        }
    }
}

fn read_stdin() -> Result<(String, Vec<u8>)> {
    let mut buf = Vec::new();
    io::stdin().read_to_end(&mut buf).context("cannot read stdin")?;
    Ok(("<stdin>".into(), buf))
}

fn load_graph(path: Option<&Path>) -> Result<BipartiteGraph> {
    let (name, bytes) = read_input(path)?;
    graph::parse(bytes.as_slice()).with_context(|| format!("{name}: parse error"))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    if !(args.ratio >= 0.0 && args.ratio.is_finite()) {
        bail!("--ratio must be a non-negative number");
    }
    let kind: GraphKind = args.shape.kind.into();
    let n_left = (args.ratio * args.n as f64).round() as usize;
    let spec = GeneratorSpec {
        kind,
        n_right: args.n,
        n_left,
        k: if kind == GraphKind::Complete { args.n } else { args.shape.k },
        weight_low: args.shape.weights.low,
        weight_high: args.shape.weights.high,
        integer_weights: args.shape.weights.integer,
        seed: args.seed,
    };
    let g = graph::generate(&spec)?;
    emit(args.out.as_deref(), &graph::serialize_to_string(&g))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let g = load_graph(args.input.as_deref())?;
    let mut config = SolverConfig::new(args.epsilon);
    config.record_trace = args.audit || args.trace.is_some();
    config.cap_override = args.max_label;
    if args.order == OrderArg::Shuffle {
        config.order = Order::Shuffled(args.seed);
    }
    if args.component_cap {
        config.cap_scope = CapScope::PerComponent;
    }
    let result = solve(&g, &config)?;

    if let Some(path) = &args.trace {
        let text = output::format_trace(result.trace.as_deref().unwrap_or_default());
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let mut text = output::format_matching(&g, &result);
    let mut violated = false;
    if args.audit {
        for line in audit_lines(&g, &result)? {
            violated |= line.starts_with("violation");
            text.push_str(&line);
            text.push('\n');
        }
    }
    emit(args.out.as_deref(), &text)?;
    Ok(if violated { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn audit_lines(g: &BipartiteGraph, result: &bpm_core::SolveResult) -> Result<Vec<String>> {
    let trace = result.trace.as_deref().expect("audit runs with tracing");
    let eps = result.epsilon;
    let mut reports: Vec<AuditReport> = vec![
        audit::check_monotone(trace, eps),
        audit::check_matched_inequality(g, trace, eps),
        audit::check_distance_bound(g, trace, eps),
    ];
    let mut lines = Vec::new();
    if g.n_right() <= PATH_CHECK_LIMIT {
        reports.push(audit::check_path_inequality(g, &result.labels, &result.matching, eps)?);
    } else {
        lines.push(format!("skip {} n_right > {}", Check::PathInequality, PATH_CHECK_LIMIT));
    }

    let eps_check = Check::EpsilonOptimal;
    if !result.discarded.is_empty() {
        lines.push(format!("skip {eps_check} {} left vertices discarded", result.discarded.len()));
    } else {
        let exact = if g.n_left() <= BRUTE_FORCE_LIMIT {
            Some(oracle::brute_force(g))
        } else if g.n_left() * g.n_right() <= HUNGARIAN_AUDIT_CELLS {
            Some(oracle::hungarian(g))
        } else {
            None
        };
        match exact {
            None => lines.push(format!("skip {eps_check} instance too large for the oracle")),
            Some(Ok(exact)) => match audit::check_epsilon_optimal(g, result, &exact, eps) {
                Ok(r) => reports.push(r),
                Err(e) => lines.push(format!("skip {eps_check} {e}")),
            },
            Some(Err(e)) => lines.push(format!("skip {eps_check} {e}")),
        }
    }
    let mut out: Vec<String> = reports.iter().map(AuditReport::verdict).collect();
    out.extend(lines);
    Ok(out)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let g = load_graph(Some(&args.graph))?;
    let (name, bytes) = read_input(Some(&args.matching))?;
    let text = String::from_utf8(bytes).with_context(|| format!("{name}: not UTF-8"))?;
    let file = output::parse_matching(&text).with_context(|| format!("{name}: parse error"))?;
    let v = output::verify_matching(&g, &file);
    let mut out = String::new();
    for p in &v.problems {
        out.push_str(&format!("violation verify {p}\n"));
    }
    if v.is_ok() {
        out.push_str(&format!("ok verify weight {} matched {}\n", v.weight, v.matched));
    }
    emit(None, &out)?;
    Ok(if v.is_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode> {
    let g = load_graph(args.input.as_deref())?;
    let use_brute = match args.method {
        Method::Brute => true,
        Method::Hungarian => false,
        Method::Auto => g.n_left() <= BRUTE_FORCE_LIMIT,
    };
    let exact = if use_brute { oracle::brute_force(&g) } else { oracle::hungarian(&g) };
    match exact {
        Ok(r) => {
            emit(args.out.as_deref(), &output::format_exact(&g, &r))?;
            Ok(ExitCode::SUCCESS)
        }
        Err(OracleError::Infeasible) => {
            emit(args.out.as_deref(), "s infeasible\n")?;
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            toml::from_str::<ExperimentSpec>(&text).with_context(|| format!("{}: invalid config", path.display()))?
        }
        None => {
            if args.n.is_empty() {
                bail!("bench needs --n or --config");
            }
            ExperimentSpec {
                family: args.shape.kind.into(),
                n_right: args.n.clone(),
                density: args.ratio,
                k: args.shape.k,
                epsilons: args.epsilon.clone(),
                weight_low: args.shape.weights.low,
                weight_high: args.shape.weights.high,
                integer_weights: args.shape.weights.integer,
                trials: args.trials,
                base_seed: args.seed,
                parallel: true,
                timing: true,
            }
        }
    };
    if args.no_timing {
        spec.timing = false;
    }
    if args.serial {
        spec.parallel = false;
    }
    let result = run_experiment(&spec)?;
    let mut buf = Vec::new();
    write_csv(&result.rows, &mut buf)?;
    emit(args.out.as_deref(), std::str::from_utf8(&buf)?)?;
    for f in &result.failures {
        eprintln!("warning: trial n_right={} seed={} failed: {}", f.n_right, f.seed, f.error);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_flag() {
        assert_eq!(
            parse_weights("0:100:int"),
            Ok(WeightRange { low: 0.0, high: 100.0, integer: true })
        );
        assert_eq!(
            parse_weights("-1.5:2"),
            Ok(WeightRange { low: -1.5, high: 2.0, integer: false })
        );
        assert!(parse_weights("1").is_err());
        assert!(parse_weights("a:b").is_err());
        assert!(parse_weights("0:1:float").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
