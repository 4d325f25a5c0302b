//! Integral min-cost flow with per-arc lower and upper bounds, and the
//! transportation-based integralization of fractional assignments.
//!
//! Arc costs are given as `f64` and scaled to `i64` by a fixed factor of
//! 1e9, so all comparisons inside the solver are exact integer arithmetic.
//! Two flows over the same network therefore compare bit-identically; the
//! reported `cost` is the fixed-point total divided back by 1e9.

use std::collections::BinaryHeap;

use crate::instance::Instance;
use crate::scalar::Real;
use crate::solution::Solution;

pub const COST_SCALE: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    pub upper: i64,
    /// Fixed-point cost per unit (input cost times [`COST_SCALE`]).
    pub cost: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowError {
    Infeasible,
    BadArc(String),
    UnbalancedSupplies(i64),
}

impl std::fmt::Display for FlowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FlowError::Infeasible => write!(f, "no feasible flow"),
            FlowError::BadArc(msg) => write!(f, "bad arc: {msg}"),
            FlowError::UnbalancedSupplies(s) => {
                write!(f, "supplies must sum to zero, got {s}")
            }
        }
    }
}

impl std::error::Error for FlowError {}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    node_count: usize,
    arcs: Vec<Arc>,
    supplies: Vec<i64>,
}

impl FlowNetwork {
    pub fn new(node_count: usize) -> Self {
        FlowNetwork { node_count, arcs: Vec::new(), supplies: vec![0; node_count] }
    }

    pub fn set_supply(&mut self, node: usize, supply: i64) {
        self.supplies[node] = supply;
    }

    /// Add an arc with flow bounds `[lower, upper]` and a real cost per unit.
    /// Returns the arc index.
    pub fn add_arc(
        &mut self,
        from: usize,
        to: usize,
        lower: i64,
        upper: i64,
        cost: f64,
    ) -> Result<usize, FlowError> {
        if from >= self.node_count || to >= self.node_count {
            return Err(FlowError::BadArc(format!("endpoint out of range: {from}->{to}")));
        }
        if lower > upper {
            return Err(FlowError::BadArc(format!("lower {lower} exceeds upper {upper}")));
        }
        if !cost.is_finite() {
            return Err(FlowError::BadArc("non-finite cost".into()));
        }
        let scaled = (cost * COST_SCALE).round() as i64;
        self.arcs.push(Arc { from, to, lower, upper, cost: scaled });
        Ok(self.arcs.len() - 1)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn supply(&self, node: usize) -> i64 {
        self.supplies[node]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    /// Flow per arc, in input order.
    pub flow: Vec<i64>,
    /// Exact total cost in fixed-point units.
    pub cost_fixed: i128,
    /// Total cost back in input units.
    pub cost: f64,
}

struct ResidualGraph {
    // forward-star adjacency of residual edge ids
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
}

impl ResidualGraph {
    fn new(n: usize) -> Self {
        ResidualGraph { head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new(), cost: Vec::new() }
    }

    /// Adds edge and its residual twin; returns the forward edge id.
    fn link(&mut self, u: usize, v: usize, cap: i64, cost: i64) -> usize {
        let e = self.to.len();
        self.head[u].push(e);
        self.to.push(v);
        self.cap.push(cap);
        self.cost.push(cost);
        self.head[v].push(e + 1);
        self.to.push(u);
        self.cap.push(0);
        self.cost.push(-cost);
        e
    }
}

/// Min-cost integral flow on a network with arc lower bounds and node
/// supplies. Lower bounds are removed by the excess transformation; the
/// residual problem is solved by successive shortest paths with node
/// potentials. Negative-cost arcs are pre-saturated so Dijkstra always sees
/// non-negative reduced costs.
pub fn min_cost_flow(net: &FlowNetwork) -> Result<FlowResult, FlowError> {
    let total: i64 = net.supplies.iter().sum();
    if total != 0 {
        return Err(FlowError::UnbalancedSupplies(total));
    }
    let n = net.node_count;
    let mut excess = net.supplies.clone();
    let mut graph = ResidualGraph::new(n);
    let mut edge_of_arc = Vec::with_capacity(net.arcs.len());
    // base_flow accounts for lower bounds and saturated negative arcs.
    let mut base_flow = Vec::with_capacity(net.arcs.len());
    for arc in &net.arcs {
        let span = arc.upper - arc.lower;
        let (base, cap, flip) = if arc.cost < 0 {
            // Saturate: send `span` on top of the lower bound, leave the
            // reverse direction (positive cost) as the adjustable part.
            (arc.upper, span, true)
        } else {
            (arc.lower, span, false)
        };
        excess[arc.from] -= base;
        excess[arc.to] += base;
        let e = if flip {
            graph.link(arc.to, arc.from, cap, -arc.cost)
        } else {
            graph.link(arc.from, arc.to, cap, arc.cost)
        };
        edge_of_arc.push((e, flip));
        base_flow.push(base);
    }

    // Route excesses through a super source/sink pair.
    let source = n;
    let sink = n + 1;
    graph.head.push(Vec::new());
    graph.head.push(Vec::new());
    let mut need = 0i64;
    for v in 0..n {
        if excess[v] > 0 {
            graph.link(source, v, excess[v], 0);
            need += excess[v];
        } else if excess[v] < 0 {
            graph.link(v, sink, -excess[v], 0);
        }
    }

    let shipped = successive_shortest_paths(&mut graph, source, sink, need);
    if shipped < need {
        return Err(FlowError::Infeasible);
    }

    let mut flow = vec![0i64; net.arcs.len()];
    let mut cost_fixed: i128 = 0;
    for (a, arc) in net.arcs.iter().enumerate() {
        let (e, flip) = edge_of_arc[a];
        let pushed = graph.cap[e ^ 1]; // residual of the twin = units pushed
        flow[a] = if flip { base_flow[a] - pushed } else { base_flow[a] + pushed };
        debug_assert!(flow[a] >= arc.lower && flow[a] <= arc.upper);
        cost_fixed += i128::from(flow[a]) * i128::from(arc.cost);
    }
    Ok(FlowResult { flow, cost_fixed, cost: cost_fixed as f64 / COST_SCALE as f64 })
}

fn successive_shortest_paths(
    graph: &mut ResidualGraph,
    source: usize,
    sink: usize,
    need: i64,
) -> i64 {
    let n = graph.head.len();
    const INF: i64 = i64::MAX / 4;

    // Bellman-Ford once for valid initial potentials (zero-cost super arcs
    // plus non-negative arc costs would allow all-zero, but forced lower
    // bounds introduce negative residual twins).
    let mut potential = vec![0i64; n];
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            if potential[u] >= INF {
                continue;
            }
            for &e in &graph.head[u] {
                if graph.cap[e] > 0 {
                    let v = graph.to[e];
                    let cand = potential[u] + graph.cost[e];
                    if cand < potential[v] {
                        potential[v] = cand;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut shipped = 0i64;
    let mut dist = vec![INF; n];
    let mut parent_edge = vec![usize::MAX; n];
    while shipped < need {
        dist.fill(INF);
        parent_edge.fill(usize::MAX);
        dist[source] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(std::cmp::Reverse((0i64, source)));
        while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &graph.head[u] {
                if graph.cap[e] <= 0 {
                    continue;
                }
                let v = graph.to[e];
                let reduced = d + graph.cost[e] + potential[u] - potential[v];
                if reduced < dist[v] {
                    dist[v] = reduced;
                    parent_edge[v] = e;
                    heap.push(std::cmp::Reverse((reduced, v)));
                }
            }
        }
        if parent_edge[sink] == usize::MAX {
            break;
        }
        for v in 0..n {
            if dist[v] < INF {
                potential[v] += dist[v];
            }
        }
        // Find the bottleneck along the augmenting path, then push.
        let mut push = need - shipped;
        let mut v = sink;
        while v != source {
            let e = parent_edge[v];
            push = push.min(graph.cap[e]);
            v = graph.to[e ^ 1];
        }
        let mut v = sink;
        while v != source {
            let e = parent_edge[v];
            graph.cap[e] -= push;
            graph.cap[e ^ 1] += push;
            v = graph.to[e ^ 1];
        }
        shipped += push;
    }
    shipped
}

/// A fractional assignment of unit client mass over an open facility set.
#[derive(Debug, Clone)]
pub struct FractionalAssignment<R: Real> {
    pub open: Vec<usize>,
    /// `(client, facility, weight)` triples; per-client weights sum to 1.
    pub weights: Vec<(usize, usize, R)>,
}

/// Round a fractional assignment to an integral one by a transportation
/// flow. Targets are relaxed outward (`floor` below, `ceil` above) so a
/// fractional point inside the targets stays feasible, which makes the
/// integral optimum no costlier than the fractional input.
pub fn integralize_assignment<R: Real>(
    inst: &Instance<R>,
    frac: &FractionalAssignment<R>,
    lower_target: f64,
    upper_target: f64,
) -> Result<Solution, FlowError> {
    let m = frac.open.len();
    let nc = inst.num_clients();
    if nc == 0 {
        return Ok(Solution { open: frac.open.iter().copied().collect(), assign: Vec::new() });
    }
    if m == 0 {
        return Err(FlowError::Infeasible);
    }
    let lower = (lower_target + 1e-9).floor().max(0.0) as i64;
    let upper = (upper_target - 1e-9).ceil().max(lower as f64) as i64;

    // Nodes: clients, then open facilities, then the sink.
    let mut net = FlowNetwork::new(nc + m + 1);
    let sink = nc + m;
    for j in 0..nc {
        net.set_supply(j, 1);
    }
    net.set_supply(sink, -(nc as i64));
    let mut arc_ids = Vec::with_capacity(nc * m);
    for j in 0..nc {
        for (k, &i) in frac.open.iter().enumerate() {
            let id = net.add_arc(j, nc + k, 0, 1, inst.dist_fc(i, j).as_f64())?;
            arc_ids.push(id);
        }
    }
    for k in 0..m {
        net.add_arc(nc + k, sink, lower, upper, 0.0)?;
    }

    let result = min_cost_flow(&net)?;
    let mut assign = vec![usize::MAX; nc];
    for j in 0..nc {
        for (k, &i) in frac.open.iter().enumerate() {
            if result.flow[arc_ids[j * m + k]] == 1 {
                assign[j] = i;
            }
        }
    }
    debug_assert!(assign.iter().all(|&i| i != usize::MAX));
    Ok(Solution { open: frac.open.iter().copied().collect(), assign })
}
