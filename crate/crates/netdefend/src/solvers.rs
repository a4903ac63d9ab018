//! The defending algorithms: two exact polynomial solvers for the special
//! model classes, an LP-rounding solver that is 2-approximate in the
//! resource-augmentation sense, the greedy baseline, and a subset-enumeration
//! brute force used as the exactness oracle.
//!
//! All solvers share one scheme: the defending result can only take values
//! in the finite result space, achievability of a level is monotone in the
//! level, so a binary search over the sorted space plus a per-level
//! feasibility check yields the optimum. The solvers differ in the check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lp::{solve_lp, LinearProgram, LpError, LpSolution, Relation};
use crate::maxflow::{max_flow, Capacity, FlowNetwork};
use crate::model::{
    crucial_set, defending_result, result_space, vulnerable_set, DefenseNetwork,
    DefendingStrategy, DEFAULT_TOLERANCE,
};

/// Crucial-set size above which the brute force refuses to enumerate.
pub const DEFAULT_MAX_CRUCIAL: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    SingleThreshold,
    Isolated,
    Approx,
    Greedy,
    ExactBruteforce,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::SingleThreshold => f.write_str("single-threshold"),
            Algorithm::Isolated => f.write_str("isolated"),
            Algorithm::Approx => f.write_str("approx"),
            Algorithm::Greedy => f.write_str("greedy"),
            Algorithm::ExactBruteforce => f.write_str("exact"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// The instance is outside the solver's model class.
    ModelMismatch(String),
    /// The brute force would enumerate too many crucial subsets.
    SizeLimit(String),
    /// A rounded strategy missed its target level; signals an LP tolerance
    /// breach and is never expected on well-formed inputs.
    RoundingInfeasible(String),
    Lp(LpError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::ModelMismatch(msg) => write!(f, "model mismatch: {msg}"),
            SolverError::SizeLimit(msg) => write!(f, "size limit: {msg}"),
            SolverError::RoundingInfeasible(msg) => write!(f, "rounding infeasible: {msg}"),
            SolverError::Lp(e) => write!(f, "lp solver: {e}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<LpError> for SolverError {
    fn from(e: LpError) -> Self {
        SolverError::Lp(e)
    }
}

/// Outcome of one solver run: the claimed result level, the witness
/// strategy, and the level the model actually scores the witness at.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub strategy: DefendingStrategy,
    pub evaluated_result: f64,
    pub budget_used: f64,
    pub notes: String,
}

fn make_report(
    net: &DefenseNetwork,
    algorithm: Algorithm,
    alpha: f64,
    strategy: DefendingStrategy,
    notes: String,
) -> SolveReport {
    let evaluated_result = defending_result(net, &strategy)
        .expect("solver strategies only reference instance nodes")
        .result;
    let budget_used = strategy.total();
    SolveReport { algorithm, alpha, strategy, evaluated_result, budget_used, notes }
}

/// Rides any leftover budget on the lexicographically smallest node.
/// Harmless: gains are pointwise nonincreasing in allocations.
fn assign_leftover(net: &DefenseNetwork, strategy: &mut DefendingStrategy) {
    let leftover = net.resource - strategy.total();
    if leftover > 0.0 {
        if let Some(first) = net.node_ids().min() {
            *strategy.allocation.entry(first.to_string()).or_insert(0.0) += leftover;
        }
    }
}

fn strategy_from(values: impl IntoIterator<Item = (String, f64)>) -> DefendingStrategy {
    DefendingStrategy {
        allocation: values.into_iter().filter(|(_, r)| *r > 0.0).collect(),
    }
}

/// Binary search for the smallest achievable level in the ascending result
/// space. Relies on monotone achievability; the largest level is always
/// achievable, so a witness always exists.
fn search_min_achievable<F>(
    space: &[f64],
    mut probe: F,
) -> Result<(f64, DefendingStrategy), SolverError>
where
    F: FnMut(f64) -> Result<Option<DefendingStrategy>, SolverError>,
{
    let mut lo = 0usize;
    let mut hi = space.len() - 1;
    let mut witness = probe(space[hi])?
        .expect("the maximum of the result space is always achievable");
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match probe(space[mid])? {
            Some(w) => {
                witness = w;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Ok((space[lo], witness))
}

fn require_single_threshold(net: &DefenseNetwork) -> Result<(), SolverError> {
    for n in &net.nodes {
        if (n.ub - n.lb).abs() > DEFAULT_TOLERANCE {
            return Err(SolverError::ModelMismatch(format!(
                "node `{}` has lb {} != ub {}; the single-threshold solver needs lb = ub everywhere",
                n.id, n.lb, n.ub
            )));
        }
    }
    Ok(())
}

fn require_isolated(net: &DefenseNetwork) -> Result<(), SolverError> {
    for e in &net.edges {
        if e.w.abs() > DEFAULT_TOLERANCE {
            return Err(SolverError::ModelMismatch(format!(
                "edge ({},{}) has weight {}; the isolated solver needs all weights 0",
                e.u, e.v, e.w
            )));
        }
    }
    Ok(())
}

fn node_indices(net: &DefenseNetwork) -> BTreeMap<&str, usize> {
    net.node_ids().enumerate().map(|(i, id)| (id, i)).collect()
}

/// Power of `u` as LP terms over the allocation variables:
/// own allocation plus weighted neighbor allocations.
fn power_terms(
    net: &DefenseNetwork,
    index: &BTreeMap<&str, usize>,
    u: &str,
) -> Vec<(usize, f64)> {
    let mut terms = vec![(index[u], 1.0)];
    for e in &net.edges {
        if e.u == u {
            terms.push((index[e.v.as_str()], e.w));
        } else if e.v == u {
            terms.push((index[e.u.as_str()], e.w));
        }
    }
    terms
}

/// Feasibility check for one level of the single-threshold model: allocate
/// within budget so every vulnerable node's power reaches its threshold.
/// Returns a witness strategy when achievable.
pub fn achievable_single_threshold(
    net: &DefenseNetwork,
    alpha: f64,
) -> Result<Option<DefendingStrategy>, SolverError> {
    require_single_threshold(net)?;
    let index = node_indices(net);
    let mut lp = LinearProgram::new(net.nodes.len());
    lp.add_constraint(
        net.node_ids().map(|id| (index[id], 1.0)).collect(),
        Relation::Le,
        net.resource,
    );
    for id in vulnerable_set(net, alpha) {
        let lb = net.node(&id).expect("set members are nodes").lb;
        lp.add_constraint(power_terms(net, &index, &id), Relation::Ge, lb);
    }
    match solve_lp(&lp)? {
        LpSolution::Feasible { values, .. } => {
            let mut strategy = strategy_from(
                net.node_ids().map(|id| (id.to_string(), values[index[id]])),
            );
            assign_leftover(net, &mut strategy);
            Ok(Some(strategy))
        }
        LpSolution::Infeasible => Ok(None),
        LpSolution::Unbounded => unreachable!("feasibility program has no objective"),
    }
}

/// Exact solver for instances with `lb = ub` everywhere: binary search over
/// the result space with the threshold LP as the feasibility check.
pub fn solve_single_threshold(net: &DefenseNetwork) -> Result<SolveReport, SolverError> {
    require_single_threshold(net)?;
    let space = result_space(net);
    let (alpha, strategy) =
        search_min_achievable(&space, |a| achievable_single_threshold(net, a))?;
    Ok(make_report(
        net,
        Algorithm::SingleThreshold,
        alpha,
        strategy,
        "exact optimum: threshold LP feasibility, binary search over result levels".into(),
    ))
}

/// Index bookkeeping for the isolated-model flow construction.
#[derive(Debug, Clone)]
pub struct IsolatedFlowLayout {
    pub source: usize,
    pub sink: usize,
    /// Crucial node id -> (in, out) indices.
    pub crucial: BTreeMap<String, (usize, usize)>,
    /// Non-vulnerable node id -> (in, out) indices.
    pub outside: BTreeMap<String, (usize, usize)>,
}

/// Builds the threshold network whose min cut is the cheapest way to finish
/// protecting the crucial nodes once every vulnerable node holds its lower
/// threshold: either raise a crucial node to its upper threshold (cut its
/// `in -> out` arc, capacity `ub - lb`) or cover each of its non-vulnerable
/// neighbors at their lower threshold (cut theirs, capacity `lb`). Infinite
/// arcs wire source to crucial nodes, neighbors to sink, and the
/// crucial-to-neighbor incidences.
pub fn build_isolated_flow_network(
    net: &DefenseNetwork,
    alpha: f64,
) -> Result<(FlowNetwork, IsolatedFlowLayout), SolverError> {
    require_isolated(net)?;
    let vulnerable = vulnerable_set(net, alpha);
    let crucial = crucial_set(net, alpha);

    let mut layout = IsolatedFlowLayout {
        source: 0,
        sink: 1,
        crucial: BTreeMap::new(),
        outside: BTreeMap::new(),
    };
    let mut next = 2;
    for n in &net.nodes {
        if crucial.contains(&n.id) {
            layout.crucial.insert(n.id.clone(), (next, next + 1));
            next += 2;
        } else if !vulnerable.contains(&n.id) {
            layout.outside.insert(n.id.clone(), (next, next + 1));
            next += 2;
        }
    }

    let mut flow_net = FlowNetwork::new(next.max(2), layout.source, layout.sink);
    for n in &net.nodes {
        if let Some(&(u_in, u_out)) = layout.crucial.get(&n.id) {
            flow_net.add_arc(layout.source, u_in, Capacity::Infinite);
            flow_net.add_arc(u_in, u_out, Capacity::Finite(n.ub - n.lb));
        } else if let Some(&(v_in, v_out)) = layout.outside.get(&n.id) {
            flow_net.add_arc(v_in, v_out, Capacity::Finite(n.lb));
            flow_net.add_arc(v_out, layout.sink, Capacity::Infinite);
        }
    }
    for e in &net.edges {
        let pairs = [(&e.u, &e.v), (&e.v, &e.u)];
        for (a, b) in pairs {
            if let (Some(&(_, a_out)), Some(&(b_in, _))) =
                (layout.crucial.get(a.as_str()), layout.outside.get(b.as_str()))
            {
                flow_net.add_arc(a_out, b_in, Capacity::Infinite);
            }
        }
    }
    Ok((flow_net, layout))
}

/// Feasibility check for one level of the isolated model. The base cost
/// covers every vulnerable node at its lower threshold; the min cut prices
/// the cheapest completion. The witness reads the cut: crucial nodes whose
/// `out` vertex lands on the sink side get their upper threshold, the rest
/// get their non-vulnerable neighbors covered.
pub fn achievable_isolated(
    net: &DefenseNetwork,
    alpha: f64,
) -> Result<Option<DefendingStrategy>, SolverError> {
    let (flow_net, layout) = build_isolated_flow_network(net, alpha)?;
    let specs = net.node_map();
    let vulnerable = vulnerable_set(net, alpha);
    let base: f64 = vulnerable.iter().map(|id| specs[id.as_str()].lb).sum();
    if base > net.resource + DEFAULT_TOLERANCE {
        return Ok(None);
    }
    let result = max_flow(&flow_net)
        .expect("every in->out arc is finite, so a finite cut exists");
    if base + result.value > net.resource + DEFAULT_TOLERANCE {
        return Ok(None);
    }

    let mut allocation: BTreeMap<String, f64> = BTreeMap::new();
    for id in &vulnerable {
        allocation.insert(id.clone(), specs[id.as_str()].lb);
    }
    let mut kept_low: BTreeSet<&str> = BTreeSet::new();
    for (id, &(_, u_out)) in &layout.crucial {
        if result.source_side.contains(&u_out) {
            kept_low.insert(id.as_str());
        } else {
            allocation.insert(id.clone(), specs[id.as_str()].ub);
        }
    }
    for e in &net.edges {
        for (a, b) in [(&e.u, &e.v), (&e.v, &e.u)] {
            if kept_low.contains(a.as_str()) && layout.outside.contains_key(b.as_str()) {
                allocation.insert(b.clone(), specs[b.as_str()].lb);
            }
        }
    }

    let mut strategy = strategy_from(allocation);
    assign_leftover(net, &mut strategy);
    Ok(Some(strategy))
}

/// Exact solver for instances with all edge weights 0: binary search over
/// the result space with the min-cut achievability check.
pub fn solve_isolated(net: &DefenseNetwork) -> Result<SolveReport, SolverError> {
    require_isolated(net)?;
    let space = result_space(net);
    let (alpha, strategy) = search_min_achievable(&space, |a| achievable_isolated(net, a))?;
    Ok(make_report(
        net,
        Algorithm::Isolated,
        alpha,
        strategy,
        "exact optimum: min-cut prices the cheapest threshold upgrades".into(),
    ))
}

/// Variable placement for the relaxation: allocations first, then the
/// fractional upgrade indicators.
#[derive(Debug, Clone)]
pub struct RelaxationLayout {
    pub r_index: BTreeMap<String, usize>,
    pub y_index: BTreeMap<String, usize>,
}

/// The fractional relaxation probed by the approximation solver at one
/// level. `y_u` for a crucial node moves its power requirement from `lb`
/// toward `ub`; `y_v` for a non-vulnerable node moves it from 0 toward
/// `lb`; each crucial/non-vulnerable edge must have its endpoints' `y` sum
/// to at least 1. Vulnerable nodes always need `lb`. Allocations sum to at
/// most `budget`.
pub fn build_relaxation_lp(
    net: &DefenseNetwork,
    alpha: f64,
    budget: f64,
) -> (LinearProgram, RelaxationLayout) {
    let vulnerable = vulnerable_set(net, alpha);
    let crucial = crucial_set(net, alpha);

    let n = net.nodes.len();
    let mut r_index = BTreeMap::new();
    for (i, id) in net.node_ids().enumerate() {
        r_index.insert(id.to_string(), i);
    }
    let mut y_index = BTreeMap::new();
    let mut next = n;
    for node in &net.nodes {
        if crucial.contains(&node.id) || !vulnerable.contains(&node.id) {
            y_index.insert(node.id.clone(), next);
            next += 1;
        }
    }

    let mut lp = LinearProgram::new(next);
    for idx in y_index.values() {
        lp.set_bounds(*idx, 0.0, Some(1.0));
    }

    let borrowed: BTreeMap<&str, usize> =
        r_index.iter().map(|(id, &i)| (id.as_str(), i)).collect();

    // Covering: an uncut crucial node forces its non-vulnerable neighbors up.
    for e in &net.edges {
        for (a, b) in [(&e.u, &e.v), (&e.v, &e.u)] {
            if crucial.contains(a.as_str()) && !vulnerable.contains(b.as_str()) {
                lp.add_constraint(
                    vec![(y_index[a.as_str()], 1.0), (y_index[b.as_str()], 1.0)],
                    Relation::Ge,
                    1.0,
                );
            }
        }
    }
    for node in &net.nodes {
        let power = power_terms(net, &borrowed, &node.id);
        if crucial.contains(&node.id) {
            let mut terms = power;
            terms.push((y_index[&node.id], -(node.ub - node.lb)));
            lp.add_constraint(terms, Relation::Ge, node.lb);
        } else if vulnerable.contains(&node.id) {
            lp.add_constraint(power, Relation::Ge, node.lb);
        } else {
            let mut terms = power;
            terms.push((y_index[&node.id], -node.lb));
            lp.add_constraint(terms, Relation::Ge, 0.0);
        }
    }
    lp.add_constraint(
        net.node_ids().map(|id| (borrowed[id], 1.0)).collect(),
        Relation::Le,
        budget,
    );

    (lp, RelaxationLayout { r_index, y_index })
}

/// Rounds a feasible point of the half-budget relaxation by doubling every
/// allocation. Doubling clears each threshold whose indicator was at least
/// half, and the covering constraints guarantee one endpoint of every
/// critical pair rounds up, so the rounded strategy meets the level.
pub fn round_solution(
    net: &DefenseNetwork,
    alpha: f64,
    lp_values: &[f64],
    layout: &RelaxationLayout,
) -> Result<DefendingStrategy, SolverError> {
    let strategy = strategy_from(
        layout
            .r_index
            .iter()
            .map(|(id, &i)| (id.clone(), 2.0 * lp_values[i])),
    );
    let evaluated = defending_result(net, &strategy)
        .expect("rounded strategies only reference instance nodes")
        .result;
    if evaluated > alpha + 1e-6 {
        return Err(SolverError::RoundingInfeasible(format!(
            "rounded strategy scores {evaluated}, above the target level {alpha}"
        )));
    }
    Ok(strategy)
}

/// Resource-augmentation solver for the general model: finds the smallest
/// level whose relaxation is feasible at half the budget, then rounds. The
/// achieved level is at most what any strategy achieves with half the
/// budget, at the price of using the full budget.
pub fn solve_approx(net: &DefenseNetwork) -> Result<SolveReport, SolverError> {
    let space = result_space(net);
    let half = net.resource / 2.0;
    let (alpha, mut strategy) = search_min_achievable(&space, |a| {
        let (lp, layout) = build_relaxation_lp(net, a, half);
        match solve_lp(&lp)? {
            LpSolution::Feasible { values, .. } => {
                Ok(Some(round_solution(net, a, &values, &layout)?))
            }
            LpSolution::Infeasible => Ok(None),
            LpSolution::Unbounded => unreachable!("feasibility program has no objective"),
        }
    })?;
    assign_leftover(net, &mut strategy);
    Ok(make_report(
        net,
        Algorithm::Approx,
        alpha,
        strategy,
        format!("2-approximate by resource augmentation: level <= OPT at budget {half}"),
    ))
}

/// Baseline: repeatedly give the currently worst-off node enough resource
/// to clear its upper threshold. Each productive step either silences one
/// node for good or exhausts the budget, so at most one pass over the nodes
/// happens. No optimality guarantee; the hard fixtures defeat it.
pub fn solve_greedy(net: &DefenseNetwork) -> SolveReport {
    let mut strategy = DefendingStrategy::new();
    let mut remaining = net.resource;
    loop {
        let report = defending_result(net, &strategy)
            .expect("greedy only allocates to instance nodes");
        if report.result <= 0.0 || remaining <= 1e-12 {
            break;
        }
        let target = report.argmax.clone().expect("positive result has an argmax");
        let spec = net.node(&target).expect("argmax is a node");
        let power = crate::model::defending_power(net, &strategy)
            .expect("greedy only allocates to instance nodes")
            .get(&target);
        let amount = (spec.ub - power).min(remaining);
        if amount <= 0.0 {
            break;
        }
        *strategy.allocation.entry(target).or_insert(0.0) += amount;
        remaining -= amount;
    }
    make_report(
        net,
        Algorithm::Greedy,
        defending_result(net, &strategy).expect("valid strategy").result,
        strategy,
        "greedy baseline: no optimality guarantee".into(),
    )
}

fn min_resource_lp(
    net: &DefenseNetwork,
    alpha: f64,
    upgraded: &BTreeSet<String>,
) -> LinearProgram {
    let vulnerable = vulnerable_set(net, alpha);
    let crucial = crucial_set(net, alpha);
    let index = node_indices(net);

    // Non-vulnerable neighbors of crucial nodes that stay below their upper
    // threshold must be covered at their own lower threshold.
    let mut forced: BTreeSet<&str> = BTreeSet::new();
    for e in &net.edges {
        for (a, b) in [(&e.u, &e.v), (&e.v, &e.u)] {
            if crucial.contains(a.as_str())
                && !upgraded.contains(a.as_str())
                && !vulnerable.contains(b.as_str())
            {
                forced.insert(b.as_str());
            }
        }
    }

    let mut lp = LinearProgram::new(net.nodes.len());
    lp.set_objective(net.node_ids().map(|id| (index[id], 1.0)).collect());
    for node in &net.nodes {
        let threshold = if upgraded.contains(&node.id) {
            node.ub
        } else if vulnerable.contains(&node.id) || forced.contains(node.id.as_str()) {
            node.lb
        } else {
            continue;
        };
        lp.add_constraint(power_terms(net, &index, &node.id), Relation::Ge, threshold);
    }
    lp
}

/// Exact resource needed to reach level `alpha` once the set of crucial
/// nodes receiving their upper threshold is fixed: an LP with no budget
/// row, so it is always feasible (the minimum may exceed the budget).
///
/// # Panics
/// If `upgraded` is not a subset of the crucial set at `alpha`.
pub fn min_resource_for_subset(
    net: &DefenseNetwork,
    alpha: f64,
    upgraded: &BTreeSet<String>,
) -> Result<f64, SolverError> {
    let crucial = crucial_set(net, alpha);
    assert!(
        upgraded.is_subset(&crucial),
        "upgraded set must be a subset of the crucial set"
    );
    let lp = min_resource_lp(net, alpha, upgraded);
    match solve_lp(&lp)? {
        LpSolution::Feasible { objective_value, .. } => Ok(objective_value),
        other => unreachable!("threshold cover program is always feasible, got {other:?}"),
    }
}

/// Exact solver for any instance, exponential in the crucial set: for each
/// level ascending, try every subset of crucial nodes as the upgraded set
/// and accept the level once some subset fits the budget.
pub fn solve_exact_bruteforce(
    net: &DefenseNetwork,
    max_crucial: usize,
) -> Result<SolveReport, SolverError> {
    let space = result_space(net);
    let index = node_indices(net);
    for &alpha in &space {
        let crucial: Vec<String> = crucial_set(net, alpha).into_iter().collect();
        if crucial.len() > max_crucial {
            return Err(SolverError::SizeLimit(format!(
                "{} crucial nodes at level {alpha} exceeds the limit of {max_crucial} \
                 (2^{} subsets)",
                crucial.len(),
                crucial.len()
            )));
        }
        for mask in 0u64..(1u64 << crucial.len()) {
            let upgraded: BTreeSet<String> = crucial
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, id)| id.clone())
                .collect();
            let lp = min_resource_lp(net, alpha, &upgraded);
            if let LpSolution::Feasible { values, objective_value } = solve_lp(&lp)? {
                if objective_value <= net.resource + DEFAULT_TOLERANCE {
                    let mut strategy = strategy_from(
                        net.node_ids().map(|id| (id.to_string(), values[index[id]])),
                    );
                    assign_leftover(net, &mut strategy);
                    return Ok(make_report(
                        net,
                        Algorithm::ExactBruteforce,
                        alpha,
                        strategy,
                        format!(
                            "exact optimum by subset enumeration ({} crucial nodes)",
                            crucial.len()
                        ),
                    ));
                }
            }
        }
    }
    unreachable!("the maximum of the result space is always achievable")
}
