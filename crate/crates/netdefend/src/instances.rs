//! Instance fixtures, generators, and the on-disk formats.
//!
//! File formats (canonical JSON, unknown fields rejected):
//!
//! * instance: `{"resource": R, "nodes": [{"id","lb","ub","g","g_prime"}...],
//!   "edges": [{"u","v","w"}...]}` — extension `.instance.json`
//! * strategy: `{"allocation": {"<id>": amount, ...}}` — extension
//!   `.strategy.json`
//! * formula: `{"num_vars": p, "clauses": [[1,-2],[3]]}` with signed 1-based
//!   literals, DIMACS style; clauses are conjunctions.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{DefenseNetwork, DefendingStrategy, EdgeSpec, NodeSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceError {
    InvalidParams(String),
    SizeLimit(String),
    Parse(String),
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            InstanceError::SizeLimit(msg) => write!(f, "size limit: {msg}"),
            InstanceError::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for InstanceError {}

fn node(id: &str, lb: f64, ub: f64, g: f64, g_prime: f64) -> NodeSpec {
    NodeSpec { id: id.to_string(), lb, ub, g, g_prime }
}

fn edge(u: &str, v: &str, w: f64) -> EdgeSpec {
    EdgeSpec { u: u.to_string(), v: v.to_string(), w }
}

/// The two-node instance exhibiting the factor-2 gap between integral and
/// fractional budgets: with the full budget the attacker gains nothing, with
/// half of it the relaxation is still feasible while every real strategy
/// concedes 1.
pub fn gen_integrality_gap() -> DefenseNetwork {
    DefenseNetwork {
        resource: 1.0,
        nodes: vec![node("u", 0.0, 1.0, 1.0, 1.0), node("v", 1.0, 2.0, 0.0, 0.0)],
        edges: vec![edge("u", "v", 1.0)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyHardKind {
    Isolated,
    SingleThreshold,
}

/// Three-node path on which the greedy baseline concedes 10 while the
/// optimum concedes 0. The isolated kind shares nothing (`w = 0`); the
/// single-threshold kind shares fully and pins `lb = ub`.
pub fn gen_greedy_hard(kind: GreedyHardKind) -> DefenseNetwork {
    let (w, lb, ub) = match kind {
        GreedyHardKind::Isolated => (0.0, 1.0, 2.0),
        GreedyHardKind::SingleThreshold => (1.0, 3.0, 3.0),
    };
    DefenseNetwork {
        resource: 3.0,
        nodes: vec![
            node("u1", lb, ub, 10.0, 10.0),
            node("u2", lb, ub, 2.0, 2.0),
            node("u3", lb, ub, 10.0, 10.0),
        ],
        edges: vec![edge("u1", "u2", w), edge("u2", "u3", w)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    /// 0-based variable index.
    pub var: usize,
    pub negated: bool,
}

/// A DNF formula: each clause is a conjunction of literals; an assignment
/// satisfies a clause by making every literal true.
#[derive(Debug, Clone, PartialEq)]
pub struct DnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Literal>>,
}

impl DnfFormula {
    pub fn validate(&self) -> Result<(), InstanceError> {
        for (ci, clause) in self.clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(InstanceError::InvalidParams(format!("clause {} is empty", ci + 1)));
            }
            let mut seen_pos = BTreeSet::new();
            let mut seen_neg = BTreeSet::new();
            for lit in clause {
                if lit.var >= self.num_vars {
                    return Err(InstanceError::InvalidParams(format!(
                        "clause {}: variable index {} out of range (num_vars = {})",
                        ci + 1,
                        lit.var + 1,
                        self.num_vars
                    )));
                }
                if lit.negated {
                    seen_neg.insert(lit.var);
                } else {
                    seen_pos.insert(lit.var);
                }
            }
            if seen_pos.intersection(&seen_neg).next().is_some() {
                return Err(InstanceError::InvalidParams(format!(
                    "clause {} contains a variable and its negation",
                    ci + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DnfFormulaWire {
    num_vars: usize,
    clauses: Vec<Vec<i64>>,
}

pub fn parse_formula(text: &str) -> Result<DnfFormula, InstanceError> {
    let wire: DnfFormulaWire =
        serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
    let mut clauses = Vec::with_capacity(wire.clauses.len());
    for clause in &wire.clauses {
        let mut lits = Vec::with_capacity(clause.len());
        for &signed in clause {
            if signed == 0 {
                return Err(InstanceError::Parse("literal 0 is not allowed".to_string()));
            }
            lits.push(Literal { var: (signed.unsigned_abs() as usize) - 1, negated: signed < 0 });
        }
        clauses.push(lits);
    }
    let formula = DnfFormula { num_vars: wire.num_vars, clauses };
    formula.validate()?;
    Ok(formula)
}

pub fn serialize_formula(formula: &DnfFormula) -> String {
    let wire = DnfFormulaWire {
        num_vars: formula.num_vars,
        clauses: formula
            .clauses
            .iter()
            .map(|clause| {
                clause
                    .iter()
                    .map(|lit| {
                        let v = (lit.var + 1) as i64;
                        if lit.negated {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&wire).expect("formula serializes");
    text.push('\n');
    text
}

/// Exact maximum number of simultaneously satisfiable clauses, by exhausting
/// all `2^num_vars` assignments. Limited to 24 variables.
pub fn dnf_max_sat(formula: &DnfFormula) -> Result<usize, InstanceError> {
    formula.validate()?;
    if formula.num_vars > 24 {
        return Err(InstanceError::SizeLimit(format!(
            "{} variables exceeds the exhaustive limit of 24",
            formula.num_vars
        )));
    }
    let mut best = 0;
    for assignment in 0u32..(1u32 << formula.num_vars) {
        let satisfied = formula
            .clauses
            .iter()
            .filter(|clause| {
                clause.iter().all(|lit| {
                    let value = assignment & (1 << lit.var) != 0;
                    value != lit.negated
                })
            })
            .count();
        best = best.max(satisfied);
    }
    Ok(best)
}

fn literal_node_id(lit: &Literal) -> String {
    if lit.negated {
        format!("xn{}", lit.var + 1)
    } else {
        format!("x{}", lit.var + 1)
    }
}

fn connector_node_id(clause: usize, position: usize) -> String {
    format!("C{}L{}", clause + 1, position + 1)
}

/// Encodes a DNF formula as a defense instance whose optimal result is 0
/// exactly when at least `t` clauses are simultaneously satisfiable.
///
/// Per variable there are two fully-shared nodes (the variable and its
/// negation); per literal occurrence a connector tied to its literal with
/// weight 1 and to its clause with weight 0. Variable nodes and connectors
/// need a full unit of power, clause nodes only `1/q` but with a zero lower
/// threshold. The budget `p + (q - t)/q` is exactly one unit per variable
/// plus `1/q` per unsatisfied clause.
pub fn gen_dnf_reduction(formula: &DnfFormula, t: usize) -> Result<DefenseNetwork, InstanceError> {
    formula.validate()?;
    let p = formula.num_vars;
    let q = formula.clauses.len();
    if t == 0 || t > q {
        return Err(InstanceError::InvalidParams(format!(
            "t must satisfy 1 <= t <= {q}, got {t}"
        )));
    }

    let q_f = q as f64;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();

    for i in 0..p {
        let pos = format!("x{}", i + 1);
        let neg = format!("xn{}", i + 1);
        nodes.push(node(&pos, 1.0, 1.0, 1.0, 1.0));
        nodes.push(node(&neg, 1.0, 1.0, 1.0, 1.0));
        edges.push(edge(&pos, &neg, 1.0));
    }
    for (ci, clause) in formula.clauses.iter().enumerate() {
        let clause_id = format!("C{}", ci + 1);
        nodes.push(node(&clause_id, 0.0, 1.0 / q_f, 1.0, 1.0));
        for (li, lit) in clause.iter().enumerate() {
            let conn = connector_node_id(ci, li);
            nodes.push(node(&conn, 1.0, 1.0, 0.0, 0.0));
            edges.push(edge(&conn, &literal_node_id(lit), 1.0));
            edges.push(edge(&conn, &clause_id, 0.0));
        }
    }

    Ok(DefenseNetwork {
        resource: p as f64 + (q - t) as f64 / q_f,
        nodes,
        edges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelClass {
    General,
    Isolated,
    SingleThreshold,
}

/// Sampling ranges for the random generator; uniform on each closed interval.
#[derive(Debug, Clone, Copy)]
pub struct RandomRanges {
    pub weight: (f64, f64),
    pub lb: (f64, f64),
    pub ub_delta: (f64, f64),
    pub g: (f64, f64),
}

impl Default for RandomRanges {
    fn default() -> Self {
        Self { weight: (0.0, 1.0), lb: (0.0, 2.0), ub_delta: (0.0, 2.0), g: (0.0, 10.0) }
    }
}

/// Seeded random connected instance: a random spanning tree plus extra
/// distinct edges. `g_prime <= g` and `lb <= ub` hold by construction; the
/// budget is drawn from `[0, sum of lb]`. Identical parameters give an
/// identical instance.
pub fn gen_random(
    seed: u64,
    n: usize,
    m: usize,
    ranges: &RandomRanges,
) -> Result<DefenseNetwork, InstanceError> {
    gen_random_in_class(seed, n, m, ranges, ModelClass::General)
}

/// [`gen_random`] restricted to a model class: `Isolated` zeroes all weights,
/// `SingleThreshold` pins `ub = lb`.
pub fn gen_random_in_class(
    seed: u64,
    n: usize,
    m: usize,
    ranges: &RandomRanges,
    class: ModelClass,
) -> Result<DefenseNetwork, InstanceError> {
    if n == 0 {
        return Err(InstanceError::InvalidParams("n must be positive".to_string()));
    }
    if m + 1 < n {
        return Err(InstanceError::InvalidParams(format!(
            "m = {m} cannot connect {n} nodes (need at least {})",
            n - 1
        )));
    }
    if m > n * (n - 1) / 2 {
        return Err(InstanceError::InvalidParams(format!(
            "m = {m} exceeds the {} distinct pairs of {n} nodes",
            n * (n - 1) / 2
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (n.max(2) - 1).to_string().len();
    let id = |i: usize| format!("n{i:0width$}");

    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 1..n {
        let parent = rng.random_range(0..i);
        pairs.insert((parent, i));
    }
    while pairs.len() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }

    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let lb = rng.random_range(ranges.lb.0..=ranges.lb.1);
        let mut ub = lb + rng.random_range(ranges.ub_delta.0..=ranges.ub_delta.1);
        let g = rng.random_range(ranges.g.0..=ranges.g.1);
        let g_prime = rng.random_range(0.0..=g);
        if class == ModelClass::SingleThreshold {
            ub = lb;
        }
        nodes.push(node(&id(i), lb, ub, g, g_prime));
    }

    let mut edges = Vec::with_capacity(m);
    for &(a, b) in &pairs {
        let mut w = rng.random_range(ranges.weight.0..=ranges.weight.1);
        if class == ModelClass::Isolated {
            w = 0.0;
        }
        edges.push(edge(&id(a), &id(b), w));
    }

    let lb_sum: f64 = nodes.iter().map(|nd| nd.lb).sum();
    let resource = rng.random_range(0.0..=lb_sum.max(0.0));

    Ok(DefenseNetwork { resource, nodes, edges })
}

/// Everything needed to reproduce one generated instance.
#[derive(Debug, Clone)]
pub enum GeneratorParams {
    IntegralityGap,
    GreedyHard(GreedyHardKind),
    Dnf { formula: DnfFormula, t: usize },
    Random { seed: u64, n: usize, m: usize, ranges: RandomRanges, class: ModelClass },
}

pub fn generate(params: &GeneratorParams) -> Result<DefenseNetwork, InstanceError> {
    match params {
        GeneratorParams::IntegralityGap => Ok(gen_integrality_gap()),
        GeneratorParams::GreedyHard(kind) => Ok(gen_greedy_hard(*kind)),
        GeneratorParams::Dnf { formula, t } => gen_dnf_reduction(formula, *t),
        GeneratorParams::Random { seed, n, m, ranges, class } => {
            gen_random_in_class(*seed, *n, *m, ranges, *class)
        }
    }
}

pub fn parse_instance(text: &str) -> Result<DefenseNetwork, InstanceError> {
    serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))
}

pub fn serialize_instance(net: &DefenseNetwork) -> String {
    let mut text = serde_json::to_string_pretty(net).expect("instance serializes");
    text.push('\n');
    text
}

pub fn parse_strategy(text: &str) -> Result<DefendingStrategy, InstanceError> {
    serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))
}

pub fn serialize_strategy(strategy: &DefendingStrategy) -> String {
    let mut text = serde_json::to_string_pretty(strategy).expect("strategy serializes");
    text.push('\n');
    text
}
