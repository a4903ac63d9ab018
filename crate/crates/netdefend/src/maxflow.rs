//! Max-flow / min-cut on directed capacitated networks (Dinic's level-graph
//! method).
//!
//! Infinite capacity is a distinct tag rather than a large float: the
//! threshold constructions rely on infinite arcs never appearing in a
//! finite cut, and summing sentinel floats would corrupt cut capacities.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

/// Residual amounts below this are treated as exhausted.
const RESIDUAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Finite(f64),
    Infinite,
}

impl Capacity {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Capacity::Infinite)
    }

    fn as_f64(&self) -> f64 {
        match self {
            Capacity::Finite(c) => *c,
            Capacity::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub capacity: Capacity,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    pub num_nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn new(num_nodes: usize, source: usize, sink: usize) -> Self {
        assert!(source < num_nodes && sink < num_nodes && source != sink);
        Self { num_nodes, source, sink, arcs: Vec::new() }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: Capacity) {
        assert!(from < self.num_nodes && to < self.num_nodes);
        if let Capacity::Finite(c) = capacity {
            assert!(c.is_finite() && c >= 0.0, "capacity must be a nonnegative real");
        }
        self.arcs.push(Arc { from, to, capacity });
    }
}

/// Max flow plus the min cut it certifies.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub value: f64,
    /// Flow per arc, parallel to `FlowNetwork::arcs`.
    pub arc_flows: Vec<f64>,
    /// Nodes reachable from the source in the residual graph; the cut is
    /// (source_side, rest).
    pub source_side: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    /// Every s-t cut has infinite capacity, so the max flow is unbounded.
    UnboundedFlow,
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::UnboundedFlow => f.write_str("every s-t cut has infinite capacity"),
        }
    }
}

impl std::error::Error for FlowError {}

struct ResidualEdge {
    to: usize,
    capacity: Capacity,
    flow: f64,
    rev: usize,
    /// Index into the original arc list; `None` for reverse edges.
    arc: Option<usize>,
}

impl ResidualEdge {
    fn residual(&self) -> f64 {
        self.capacity.as_f64() - self.flow
    }
}

struct Dinic {
    graph: Vec<Vec<ResidualEdge>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(net: &FlowNetwork) -> Self {
        let mut graph: Vec<Vec<ResidualEdge>> = (0..net.num_nodes).map(|_| Vec::new()).collect();
        for (idx, arc) in net.arcs.iter().enumerate() {
            let rev_fwd = graph[arc.to].len() + usize::from(arc.from == arc.to);
            let rev_bwd = graph[arc.from].len();
            graph[arc.from].push(ResidualEdge {
                to: arc.to,
                capacity: arc.capacity,
                flow: 0.0,
                rev: rev_fwd,
                arc: Some(idx),
            });
            graph[arc.to].push(ResidualEdge {
                to: arc.from,
                capacity: Capacity::Finite(0.0),
                flow: 0.0,
                rev: rev_bwd,
                arc: None,
            });
        }
        let n = net.num_nodes;
        Dinic { graph, level: vec![-1; n], iter: vec![0; n] }
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.fill(-1);
        self.level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for e in &self.graph[u] {
                if e.residual() > RESIDUAL_EPS && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        self.level[sink] >= 0
    }

    fn dfs(&mut self, u: usize, sink: usize, limit: f64) -> f64 {
        if u == sink {
            return limit;
        }
        while self.iter[u] < self.graph[u].len() {
            let i = self.iter[u];
            let (to, residual) = {
                let e = &self.graph[u][i];
                (e.to, e.residual())
            };
            if residual > RESIDUAL_EPS && self.level[to] == self.level[u] + 1 {
                let pushed = self.dfs(to, sink, limit.min(residual));
                if pushed > 0.0 {
                    let rev = {
                        let e = &mut self.graph[u][i];
                        e.flow += pushed;
                        e.rev
                    };
                    self.graph[to][rev].flow -= pushed;
                    return pushed;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }
}

/// Computes the exact max flow and the source side of a min cut.
///
/// # Panics
/// On a malformed network (endpoints out of range, source = sink, negative
/// capacity); those are construction bugs, not data.
pub fn max_flow(net: &FlowNetwork) -> Result<FlowResult, FlowError> {
    assert!(net.source < net.num_nodes && net.sink < net.num_nodes);
    assert_ne!(net.source, net.sink);
    for arc in &net.arcs {
        assert!(arc.from < net.num_nodes && arc.to < net.num_nodes);
        if let Capacity::Finite(c) = arc.capacity {
            assert!(c.is_finite() && c >= 0.0);
        }
    }

    // A path of infinite arcs never saturates, so it would make the flow
    // unbounded. Reverse edges are always finite, so checking the original
    // arcs once is enough.
    if infinite_path_exists(net) {
        return Err(FlowError::UnboundedFlow);
    }

    let mut dinic = Dinic::new(net);
    let mut value = 0.0;
    while dinic.bfs(net.source, net.sink) {
        dinic.iter.fill(0);
        loop {
            let pushed = dinic.dfs(net.source, net.sink, f64::INFINITY);
            if pushed <= 0.0 {
                break;
            }
            value += pushed;
        }
    }

    let mut source_side = BTreeSet::new();
    let mut stack = vec![net.source];
    while let Some(u) = stack.pop() {
        if !source_side.insert(u) {
            continue;
        }
        for e in &dinic.graph[u] {
            if e.residual() > RESIDUAL_EPS && !source_side.contains(&e.to) {
                stack.push(e.to);
            }
        }
    }

    let mut arc_flows = vec![0.0; net.arcs.len()];
    for edges in &dinic.graph {
        for e in edges {
            if let Some(idx) = e.arc {
                arc_flows[idx] = e.flow;
            }
        }
    }

    Ok(FlowResult { value, arc_flows, source_side })
}

fn infinite_path_exists(net: &FlowNetwork) -> bool {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); net.num_nodes];
    for arc in &net.arcs {
        if arc.capacity.is_infinite() {
            adj[arc.from].push(arc.to);
        }
    }
    let mut seen = vec![false; net.num_nodes];
    let mut stack = vec![net.source];
    seen[net.source] = true;
    while let Some(u) = stack.pop() {
        if u == net.sink {
            return true;
        }
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    false
}

/// Independent certificate for a flow result: the largest violation among
/// capacity bounds, conservation residuals, |value − net source outflow| and
/// |value − cut capacity|. At most 1e-9 certifies correctness. An invalid
/// cut (sink inside, source outside, or an infinite crossing arc) reports
/// infinity.
pub fn verify_flow(net: &FlowNetwork, result: &FlowResult) -> f64 {
    assert_eq!(net.arcs.len(), result.arc_flows.len());
    let mut worst = 0.0f64;

    let mut balance = vec![0.0; net.num_nodes];
    for (arc, &flow) in net.arcs.iter().zip(&result.arc_flows) {
        worst = worst.max(-flow);
        if let Capacity::Finite(c) = arc.capacity {
            worst = worst.max(flow - c);
        }
        balance[arc.from] -= flow;
        balance[arc.to] += flow;
    }
    for (node, &b) in balance.iter().enumerate() {
        if node != net.source && node != net.sink {
            worst = worst.max(b.abs());
        }
    }
    worst = worst.max((result.value + balance[net.source]).abs());

    if !result.source_side.contains(&net.source) || result.source_side.contains(&net.sink) {
        return f64::INFINITY;
    }
    let mut cut = 0.0;
    for arc in &net.arcs {
        if result.source_side.contains(&arc.from) && !result.source_side.contains(&arc.to) {
            match arc.capacity {
                Capacity::Finite(c) => cut += c,
                Capacity::Infinite => return f64::INFINITY,
            }
        }
    }
    worst.max((result.value - cut).abs())
}
