//! Command-line front end: solve, evaluate, generate, compare.
//!
//! Exit codes: 0 success, 1 parse/validation/parameter failure, 2 model
//! mismatch (instance outside the requested solver's class), 3 size limit
//! (brute force refused). Results go to stdout, diagnostics to stderr.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::instances::{
    generate, parse_formula, parse_instance, parse_strategy, serialize_instance,
    serialize_strategy, GeneratorParams, GreedyHardKind, ModelClass, RandomRanges,
};
use crate::model::{
    defending_power, defending_result_with, network_warnings, validate_network,
    validate_strategy, DefenseNetwork, DefendingStrategy, DEFAULT_TOLERANCE,
};
use crate::solvers::{
    solve_approx, solve_exact_bruteforce, solve_greedy, solve_isolated, solve_single_threshold,
    SolveReport, SolverError, DEFAULT_MAX_CRUCIAL,
};

const EXIT_OK: i32 = 0;
const EXIT_INVALID: i32 = 1;
const EXIT_MODEL_MISMATCH: i32 = 2;
const EXIT_SIZE_LIMIT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "netdefend",
    about = "Allocate a defense budget over a network against a single-node attacker",
    after_help = "Exit codes: 0 success, 1 parse/validation failure, 2 model mismatch, 3 size limit.\n\
                  NETDEF_TOLERANCE overrides the threshold comparison tolerance (default 1e-9) for `evaluate`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on an instance file and report the achieved level.
    Solve {
        /// Instance file (.instance.json)
        #[arg(long)]
        instance: PathBuf,
        /// One of: single-threshold, isolated, approx, greedy, exact
        #[arg(long)]
        algorithm: String,
        /// Write the winning strategy to this file (.strategy.json)
        #[arg(long)]
        output: Option<PathBuf>,
        /// Crucial-set size cap for the exact brute force
        #[arg(long, default_value_t = DEFAULT_MAX_CRUCIAL)]
        max_crucial: usize,
        /// Emit one JSON object instead of text
        #[arg(long)]
        json: bool,
    },
    /// Score a strategy file against an instance.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a fixture, reduction, or random instance to a file.
    Generate {
        /// One of: integrality-gap, greedy-hard-isolated, greedy-hard-single, dnf, random
        #[arg(long)]
        kind: String,
        #[arg(long)]
        output: PathBuf,
        /// DNF formula file (kind dnf)
        #[arg(long)]
        formula: Option<PathBuf>,
        /// Satisfied-clause target (kind dnf)
        #[arg(long)]
        t: Option<usize>,
        /// RNG seed (kind random)
        #[arg(long)]
        seed: Option<u64>,
        /// Node count (kind random)
        #[arg(long)]
        n: Option<usize>,
        /// Edge count (kind random)
        #[arg(long)]
        m: Option<usize>,
        /// Zero all sharing weights (kind random)
        #[arg(long)]
        isolated: bool,
        /// Pin ub = lb everywhere (kind random)
        #[arg(long)]
        single_threshold: bool,
    },
    /// Run several algorithms side by side, optionally at scaled budgets.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated algorithm names
        #[arg(long)]
        algorithms: String,
        /// Comma-separated budget multipliers, e.g. 0.5,1.0
        #[arg(long)]
        budget_scale: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

/// Parses arguments from the environment and runs; returns the exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Solve { instance, algorithm, output, max_crucial, json } => {
            cmd_solve(&instance, &algorithm, output.as_deref(), max_crucial, json)
        }
        Command::Evaluate { instance, strategy, json } => cmd_evaluate(&instance, &strategy, json),
        Command::Generate {
            kind,
            output,
            formula,
            t,
            seed,
            n,
            m,
            isolated,
            single_threshold,
        } => cmd_generate(
            &kind,
            &output,
            formula.as_deref(),
            t,
            seed,
            n,
            m,
            isolated,
            single_threshold,
        ),
        Command::Compare { instance, algorithms, budget_scale, json } => {
            cmd_compare(&instance, &algorithms, budget_scale.as_deref(), json)
        }
    }
}

fn model_tolerance() -> Result<f64, String> {
    match std::env::var("NETDEF_TOLERANCE") {
        Ok(raw) => raw
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite() && *t >= 0.0)
            .ok_or(format!("NETDEF_TOLERANCE must be a nonnegative real, got `{raw}`")),
        Err(_) => Ok(DEFAULT_TOLERANCE),
    }
}

fn load_instance(path: &Path) -> Result<DefenseNetwork, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let net = parse_instance(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let violations = validate_network(&net);
    if !violations.is_empty() {
        return Err(violations
            .iter()
            .map(|v| format!("{}: {v}", path.display()))
            .collect::<Vec<_>>()
            .join("\n"));
    }
    for warning in network_warnings(&net) {
        eprintln!("warning: {}: {warning}", path.display());
    }
    Ok(net)
}

fn load_strategy(path: &Path, net: &DefenseNetwork) -> Result<DefendingStrategy, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let strategy = parse_strategy(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let violations = validate_strategy(net, &strategy);
    if !violations.is_empty() {
        return Err(violations
            .iter()
            .map(|v| format!("{}: {v}", path.display()))
            .collect::<Vec<_>>()
            .join("\n"));
    }
    Ok(strategy)
}

fn run_algorithm(
    name: &str,
    net: &DefenseNetwork,
    max_crucial: usize,
) -> Option<Result<SolveReport, SolverError>> {
    match name {
        "single-threshold" => Some(solve_single_threshold(net)),
        "isolated" => Some(solve_isolated(net)),
        "approx" => Some(solve_approx(net)),
        "greedy" => Some(Ok(solve_greedy(net))),
        "exact" => Some(solve_exact_bruteforce(net, max_crucial)),
        _ => None,
    }
}

fn solver_exit_code(err: &SolverError) -> i32 {
    match err {
        SolverError::ModelMismatch(_) => EXIT_MODEL_MISMATCH,
        SolverError::SizeLimit(_) => EXIT_SIZE_LIMIT,
        _ => EXIT_INVALID,
    }
}

fn report_json(report: &SolveReport) -> serde_json::Value {
    json!({
        "algorithm": report.algorithm.to_string(),
        "alpha": report.alpha,
        "evaluated_result": report.evaluated_result,
        "budget_used": report.budget_used,
        "strategy": {"allocation": report.strategy.allocation},
        "notes": report.notes,
    })
}

fn cmd_solve(
    instance: &Path,
    algorithm: &str,
    output: Option<&Path>,
    max_crucial: usize,
    json: bool,
) -> i32 {
    let net = match load_instance(instance) {
        Ok(net) => net,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
    };
    let outcome = match run_algorithm(algorithm, &net, max_crucial) {
        Some(outcome) => outcome,
        None => {
            eprintln!("error: unknown algorithm `{algorithm}`");
            return EXIT_INVALID;
        }
    };
    let report = match outcome {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return solver_exit_code(&e);
        }
    };
    if let Some(path) = output {
        if let Err(e) = fs::write(path, serialize_strategy(&report.strategy)) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_INVALID;
        }
    }
    if json {
        println!("{}", report_json(&report));
    } else {
        println!("algorithm:        {}", report.algorithm);
        println!("alpha:            {}", report.alpha);
        println!("evaluated result: {}", report.evaluated_result);
        println!("budget used:      {} / {}", report.budget_used, net.resource);
        println!("notes:            {}", report.notes);
    }
    EXIT_OK
}

fn cmd_evaluate(instance: &Path, strategy: &Path, json: bool) -> i32 {
    let tol = match model_tolerance() {
        Ok(tol) => tol,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
    };
    let net = match load_instance(instance) {
        Ok(net) => net,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
    };
    let s = match load_strategy(strategy, &net) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
    };
    let powers = defending_power(&net, &s).expect("strategy validated against instance");
    let report = defending_result_with(&net, &s, tol).expect("strategy validated");

    if json {
        println!(
            "{}",
            json!({
                "powers": powers.power,
                "gains": report.gains,
                "result": report.result,
                "argmax": report.argmax,
            })
        );
        return EXIT_OK;
    }
    let width = net
        .node_ids()
        .map(str::len)
        .max()
        .unwrap_or(4)
        .max("node".len());
    println!("{:<width$}  {:>12}  {:>12}", "node", "power", "gain");
    for node in &net.nodes {
        println!(
            "{:<width$}  {:>12}  {:>12}",
            node.id,
            trim(powers.get(&node.id)),
            trim(report.gains[&node.id]),
        );
    }
    println!();
    println!("result: {}", report.result);
    match &report.argmax {
        Some(id) => println!("argmax: {id}"),
        None => println!("argmax: -"),
    }
    EXIT_OK
}

/// Shortest decimal that round-trips, truncated for table display.
fn trim(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    kind: &str,
    output: &Path,
    formula: Option<&Path>,
    t: Option<usize>,
    seed: Option<u64>,
    n: Option<usize>,
    m: Option<usize>,
    isolated: bool,
    single_threshold: bool,
) -> i32 {
    let params = match kind {
        "integrality-gap" => GeneratorParams::IntegralityGap,
        "greedy-hard-isolated" => GeneratorParams::GreedyHard(GreedyHardKind::Isolated),
        "greedy-hard-single" => GeneratorParams::GreedyHard(GreedyHardKind::SingleThreshold),
        "dnf" => {
            let (formula_path, t) = match (formula, t) {
                (Some(f), Some(t)) => (f, t),
                _ => {
                    eprintln!("error: kind dnf needs --formula and --t");
                    return EXIT_INVALID;
                }
            };
            let text = match fs::read_to_string(formula_path) {
                Ok(text) => text,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", formula_path.display());
                    return EXIT_INVALID;
                }
            };
            match parse_formula(&text) {
                Ok(formula) => GeneratorParams::Dnf { formula, t },
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INVALID;
                }
            }
        }
        "random" => {
            let (seed, n, m) = match (seed, n, m) {
                (Some(seed), Some(n), Some(m)) => (seed, n, m),
                _ => {
                    eprintln!("error: kind random needs --seed, --n and --m");
                    return EXIT_INVALID;
                }
            };
            let class = match (isolated, single_threshold) {
                (true, true) => {
                    eprintln!("error: --isolated and --single-threshold are exclusive");
                    return EXIT_INVALID;
                }
                (true, false) => ModelClass::Isolated,
                (false, true) => ModelClass::SingleThreshold,
                (false, false) => ModelClass::General,
            };
            GeneratorParams::Random { seed, n, m, ranges: RandomRanges::default(), class }
        }
        _ => {
            eprintln!("error: unknown kind `{kind}`");
            return EXIT_INVALID;
        }
    };
    let net = match generate(&params) {
        Ok(net) => net,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    if let Err(e) = fs::write(output, serialize_instance(&net)) {
        eprintln!("error: cannot write {}: {e}", output.display());
        return EXIT_INVALID;
    }
    println!(
        "wrote {}: {} nodes, {} edges, resource {}",
        output.display(),
        net.nodes.len(),
        net.edges.len(),
        net.resource
    );
    EXIT_OK
}

fn cmd_compare(instance: &Path, algorithms: &str, budget_scale: Option<&str>, json: bool) -> i32 {
    let net = match load_instance(instance) {
        Ok(net) => net,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
    };
    let names: Vec<&str> = algorithms.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        eprintln!("error: --algorithms is empty");
        return EXIT_INVALID;
    }
    for name in &names {
        if run_algorithm(name, &net, DEFAULT_MAX_CRUCIAL).is_none() {
            eprintln!("error: unknown algorithm `{name}`");
            return EXIT_INVALID;
        }
    }
    let scales: Vec<f64> = match budget_scale {
        None => vec![1.0],
        Some(raw) => {
            let mut parsed = Vec::new();
            for part in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match part.parse::<f64>() {
                    Ok(s) if s.is_finite() && s >= 0.0 => parsed.push(s),
                    _ => {
                        eprintln!("error: bad budget scale `{part}`");
                        return EXIT_INVALID;
                    }
                }
            }
            if parsed.is_empty() {
                eprintln!("error: --budget-scale is empty");
                return EXIT_INVALID;
            }
            parsed
        }
    };

    let mut rows = Vec::new();
    let mut exit = EXIT_OK;
    for &scale in &scales {
        let mut scaled = net.clone();
        scaled.resource = net.resource * scale;
        for name in &names {
            let outcome = run_algorithm(name, &scaled, DEFAULT_MAX_CRUCIAL)
                .expect("names validated above");
            rows.push((scale, scaled.resource, name.to_string(), outcome));
        }
    }
    for (_, _, name, outcome) in &rows {
        match outcome {
            Err(SolverError::ModelMismatch(msg)) => {
                eprintln!("notice: {name} skipped: {msg}");
            }
            Err(e) => {
                eprintln!("error: {name}: {e}");
                exit = exit.max(solver_exit_code(e));
            }
            Ok(_) => {}
        }
    }

    if json {
        let rows: Vec<serde_json::Value> = rows
            .iter()
            .map(|(scale, budget, name, outcome)| match outcome {
                Ok(report) => json!({
                    "scale": scale,
                    "budget": budget,
                    "algorithm": name,
                    "alpha": report.alpha,
                    "evaluated_result": report.evaluated_result,
                    "budget_used": report.budget_used,
                    "status": "ok",
                }),
                Err(SolverError::ModelMismatch(_)) => json!({
                    "scale": scale, "budget": budget, "algorithm": name,
                    "status": "skipped: model mismatch",
                }),
                Err(e) => json!({
                    "scale": scale, "budget": budget, "algorithm": name,
                    "status": format!("failed: {e}"),
                }),
            })
            .collect();
        println!("{}", json!({ "rows": rows }));
        return exit;
    }

    println!(
        "{:>6}  {:>10}  {:<17}  {:>10}  {:>10}  {:>10}",
        "scale", "budget", "algorithm", "alpha", "result", "used"
    );
    for (scale, budget, name, outcome) in &rows {
        match outcome {
            Ok(report) => println!(
                "{:>6}  {:>10}  {:<17}  {:>10}  {:>10}  {:>10}",
                trim(*scale),
                trim(*budget),
                name,
                trim(report.alpha),
                trim(report.evaluated_result),
                trim(report.budget_used),
            ),
            Err(SolverError::ModelMismatch(_)) => println!(
                "{:>6}  {:>10}  {:<17}  {:>10}  {:>10}  {:>10}",
                trim(*scale),
                trim(*budget),
                name,
                "skipped",
                "-",
                "-",
            ),
            Err(_) => println!(
                "{:>6}  {:>10}  {:<17}  {:>10}  {:>10}  {:>10}",
                trim(*scale),
                trim(*budget),
                name,
                "failed",
                "-",
                "-",
            ),
        }
    }
    exit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_cover_all_solvers() {
        let net = crate::instances::gen_integrality_gap();
        for name in ["single-threshold", "isolated", "approx", "greedy", "exact"] {
            assert!(run_algorithm(name, &net, DEFAULT_MAX_CRUCIAL).is_some());
        }
        assert!(run_algorithm("simplex", &net, DEFAULT_MAX_CRUCIAL).is_none());
    }

    #[test]
    fn trim_drops_trailing_zeros() {
        assert_eq!(trim(1.0), "1");
        assert_eq!(trim(0.5), "0.5");
        assert_eq!(trim(0.0), "0");
        assert_eq!(trim(2.25), "2.25");
    }
}
