//! Repairing the lower bounds: demand shipments of the capacitated solution
//! become client moves (type 1), facilities still short of `L` clients are
//! linked into nearest-neighbor trees whose components end in a single
//! facility or a mutual-nearest pair, clients cascade bottom-up until each
//! opened facility holds at least `L` (type 2), and leftover root-pair
//! clients are resolved by opening one or both members or shipping to the
//! nearest saturated facility (type 3).
//!
//! Clients keep their identities through every move so the final solution
//! can be priced at the original client positions.

use std::collections::HashMap;

use crate::cfl::CflSolution;
use crate::instance::Instance;
use crate::scalar::Real;
use crate::solution::Solution;
use crate::transform::{CflInstance, I1Instance, SiteRole};

#[derive(Debug, Clone, PartialEq)]
pub enum TreefixError {
    /// An exact counting claim failed; signals a bug upstream.
    ClaimViolation(String),
    /// A root-pair collected fewer than `L` clients and no facility reached
    /// `L`; cannot happen for feasible instances.
    StrandedRoot { total: u64 },
    LowerBoundViolated { facility: usize, load: u64 },
    Internal(String),
}

impl std::fmt::Display for TreefixError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TreefixError::ClaimViolation(msg) => write!(f, "counting claim violated: {msg}"),
            TreefixError::StrandedRoot { total } => {
                write!(f, "root-pair stranded with {total} clients and no saturated facility")
            }
            TreefixError::LowerBoundViolated { facility, load } => {
                write!(f, "facility {facility} ends with {load} clients, below the lower bound")
            }
            TreefixError::Internal(msg) => write!(f, "internal: {msg}"),
        }
    }
}

impl std::error::Error for TreefixError {}

/// One verified property with its violation log.
#[derive(Debug, Clone)]
pub struct InvariantRecord {
    pub name: &'static str,
    pub checked: u64,
    pub violations: Vec<String>,
}

impl InvariantRecord {
    fn new(name: &'static str) -> Self {
        InvariantRecord { name, checked: 0, violations: Vec::new() }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct InvariantLog {
    pub records: Vec<InvariantRecord>,
}

impl InvariantLog {
    fn record(&mut self, name: &'static str, pass: bool, detail: impl FnOnce() -> String) {
        let entry = match self.records.iter_mut().find(|r| r.name == name) {
            Some(e) => e,
            None => {
                self.records.push(InvariantRecord::new(name));
                self.records.last_mut().unwrap()
            }
        };
        entry.checked += 1;
        if !pass {
            entry.violations.push(detail());
        }
    }

    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.ok())
    }
}

/// Client moves induced by the capacitated solution, in the local index
/// space of the opened facilities.
#[derive(Debug, Clone)]
pub struct Reassignment {
    /// `(source, target, count)` with source != target, ascending.
    pub rho1: Vec<(usize, usize, u64)>,
    /// Clients held at each facility after the moves.
    pub pools: Vec<Vec<usize>>,
    /// Load per facility after the moves.
    pub loads: Vec<u64>,
    /// Tri-criteria load per facility before any move.
    pub n: Vec<u64>,
}

/// Move clients according to the shipments: a facility whose demand was
/// served by site `s` receives that many clients from `s`'s facility.
/// Shipments of a big facility's two sites merge; self-service moves nothing.
/// Both counting claims are verified exactly.
pub fn type1_reassign<R: Real>(
    i1: &I1Instance<R>,
    icap: &CflInstance<R>,
    ascap: &CflSolution<R>,
    log: &mut InvariantLog,
) -> Result<Reassignment, TreefixError> {
    let local: HashMap<usize, usize> =
        i1.facilities.iter().enumerate().map(|(k, &f)| (f, k)).collect();
    let mut pools = i1.members.clone();
    let n: Vec<u64> = i1.clients_at.iter().map(|c| u64::from(c.count)).collect();

    let mut moves: HashMap<(usize, usize), u64> = HashMap::new();
    for &(d_site, s_site, amount) in &ascap.ship {
        if d_site == s_site {
            continue;
        }
        let src = local[&icap.sites[s_site].origin];
        let dst = local[&icap.sites[d_site].origin];
        if src == dst {
            continue;
        }
        *moves.entry((src, dst)).or_insert(0) += amount;
    }
    let mut rho1: Vec<(usize, usize, u64)> =
        moves.into_iter().map(|((s, d), a)| (s, d, a)).collect();
    rho1.sort_unstable();

    for &(src, dst, amount) in &rho1 {
        let take = amount as usize;
        if pools[src].len() < take {
            return Err(TreefixError::ClaimViolation(format!(
                "facility {src} must send {take} clients but holds {}",
                pools[src].len()
            )));
        }
        let moved: Vec<usize> = pools[src].drain(..take).collect();
        pools[dst].extend(moved);
    }
    for pool in &mut pools {
        pool.sort_unstable();
    }
    let loads: Vec<u64> = pools.iter().map(|p| p.len() as u64).collect();

    // Outflow never exceeds the clients a facility started with.
    let mut sent = vec![0u64; n.len()];
    let mut received = vec![0u64; n.len()];
    for &(src, dst, amount) in &rho1 {
        sent[src] += amount;
        received[dst] += amount;
    }
    for k in 0..n.len() {
        log.record("type1-outflow-within-n", sent[k] <= n[k], || {
            format!("facility {k} sent {} of {} clients", sent[k], n[k])
        });
        let cap = n[k].max(u64::from(icap.lower));
        log.record("type1-load-within-max", loads[k] <= cap, || {
            format!("facility {k} holds {} > max(L, n) = {cap}", loads[k])
        });
        if sent[k] > n[k] || loads[k] > cap {
            return Err(TreefixError::ClaimViolation(format!(
                "facility {k}: sent {} received {} of n {}",
                sent[k], received[k], n[k]
            )));
        }
    }
    Ok(Reassignment { rho1, pools, loads, n })
}

/// Split facilities into those already holding `L` clients and the rest.
pub fn partition_p(reass: &Reassignment, lower: u32) -> (Vec<usize>, Vec<usize>) {
    let mut p = Vec::new();
    let mut pbar = Vec::new();
    for (k, &load) in reass.loads.iter().enumerate() {
        if load >= u64::from(lower) {
            p.push(k);
        } else {
            pbar.push(k);
        }
    }
    (p, pbar)
}

/// Any facility whose serving site was closed must have collected its full
/// demand and therefore sit in the saturated set.
pub fn check_closed_sites_saturated<R: Real>(
    i1: &I1Instance<R>,
    icap: &CflInstance<R>,
    ascap: &CflSolution<R>,
    p: &[usize],
    log: &mut InvariantLog,
) {
    let local: HashMap<usize, usize> =
        i1.facilities.iter().enumerate().map(|(k, &f)| (f, k)).collect();
    for (s, site) in icap.sites.iter().enumerate() {
        let relevant = matches!(site.role, SiteRole::Small | SiteRole::BigPrimary);
        if !relevant || ascap.open.contains(&s) {
            continue;
        }
        let k = local[&site.origin];
        log.record("closed-site-saturated", p.contains(&k), || {
            format!("facility {k} has a closed site but only a deficient load")
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Root {
    /// A saturated facility at the root of its tree.
    Member(usize),
    /// Two mutually-nearest deficient facilities.
    Pair(usize, usize),
}

#[derive(Debug, Clone)]
pub struct FacilityForest {
    /// Nearest-other-facility pointer for each deficient facility.
    pub eta: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub roots: Vec<Root>,
    pub depth: Vec<usize>,
    /// Edge cost to the parent for deficient facilities.
    pub edge: Vec<f64>,
}

/// Link every deficient facility to its nearest other facility (lowest index
/// on ties). Components are trees rooted at a saturated facility or at a
/// mutual-nearest pair; longer pointer cycles cannot survive the tie-break.
pub fn build_forest<R: Real>(
    inst: &Instance<R>,
    facilities: &[usize],
    p: &[usize],
    pbar: &[usize],
    log: &mut InvariantLog,
) -> Result<FacilityForest, TreefixError> {
    let m = facilities.len();
    let in_pbar: Vec<bool> = {
        let mut v = vec![false; m];
        for &k in pbar {
            v[k] = true;
        }
        v
    };
    let mut eta = vec![None; m];
    let mut edge = vec![0.0f64; m];
    for &k in pbar {
        let mut best: Option<(f64, usize)> = None;
        for other in 0..m {
            if other == k {
                continue;
            }
            let d = inst.dist_ff(facilities[k], facilities[other]).as_f64();
            match best {
                Some((bd, bo)) if (bd, bo) <= (d, other) => {}
                _ => best = Some((d, other)),
            }
        }
        let (d, target) =
            best.ok_or_else(|| TreefixError::Internal("deficient facility with no peer".into()))?;
        eta[k] = Some(target);
        edge[k] = d;
    }

    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut roots = Vec::new();
    for &k in p {
        roots.push(Root::Member(k));
    }
    for &k in pbar {
        let parent = eta[k].unwrap();
        if in_pbar[parent] && eta[parent] == Some(k) {
            if k < parent {
                roots.push(Root::Pair(k, parent));
            }
        } else {
            children[parent].push(k);
        }
    }
    for list in &mut children {
        list.sort_unstable();
    }

    // Depths by walk-down from the roots; every deficient facility must be
    // reached exactly once or the pointer structure has an unexpected cycle.
    let mut depth = vec![usize::MAX; m];
    let mut queue = std::collections::VecDeque::new();
    for root in &roots {
        match *root {
            Root::Member(k) => {
                depth[k] = 0;
                queue.push_back(k);
            }
            Root::Pair(a, b) => {
                depth[a] = 0;
                depth[b] = 0;
                queue.push_back(a);
                queue.push_back(b);
            }
        }
    }
    while let Some(k) = queue.pop_front() {
        for &c in &children[k] {
            depth[c] = depth[k] + 1;
            queue.push_back(c);
        }
    }
    for &k in pbar {
        if depth[k] == usize::MAX {
            return Err(TreefixError::Internal(format!(
                "facility {k} unreachable from any root: pointer cycle longer than two"
            )));
        }
    }

    // Edge costs never increase toward the root.
    for &k in pbar {
        let parent = eta[k].unwrap();
        if in_pbar[parent] {
            log.record("edge-monotone-upward", edge[parent] <= edge[k] + 1e-9, || {
                format!("edge {k}->{parent}: parent edge {} > child edge {}", edge[parent], edge[k])
            });
        }
    }

    Ok(FacilityForest { eta, children, roots, depth, edge })
}

/// Mutable client pools walked by the bottom-up pass.
pub struct TreeProcessor<'a, R: Real> {
    inst: &'a Instance<R>,
    facilities: &'a [usize],
    forest: &'a FacilityForest,
    lower: u64,
    pub pools: Vec<Vec<usize>>,
    pub opened: Vec<bool>,
    in_p: Vec<bool>,
    /// Human-readable step log for the debug dump.
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Single(usize),
    Pair(usize, usize),
}

impl<'a, R: Real> TreeProcessor<'a, R> {
    pub fn new(
        inst: &'a Instance<R>,
        facilities: &'a [usize],
        forest: &'a FacilityForest,
        lower: u32,
        pools: Vec<Vec<usize>>,
        p: &[usize],
    ) -> Self {
        let m = facilities.len();
        let mut in_p = vec![false; m];
        for &k in p {
            in_p[k] = true;
        }
        TreeProcessor {
            inst,
            facilities,
            forest,
            lower: u64::from(lower),
            pools,
            opened: vec![false; m],
            in_p,
            steps: Vec::new(),
        }
    }

    fn count(&self, k: usize) -> u64 {
        self.pools[k].len() as u64
    }

    fn move_all(&mut self, from: usize, to: usize) {
        let moved = std::mem::take(&mut self.pools[from]);
        self.pools[to].extend(moved);
        self.pools[to].sort_unstable();
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        self.inst.dist_ff(self.facilities[a], self.facilities[b]).as_f64()
    }

    /// One bottom-up step: open and detach every child holding `L` clients,
    /// then cascade the rest toward the node, farthest child first. The last
    /// child either opens or hands its clients to its parent.
    pub fn process_node(&mut self, node: Node, log: &mut InvariantLog) {
        let members: &[usize] = match &node {
            Node::Single(k) => std::slice::from_ref(k),
            Node::Pair(a, b) => {
                debug_assert!(a < b);
                &[*a, *b][..]
            }
        };
        let members = members.to_vec();
        let mut kids: Vec<usize> = members
            .iter()
            .flat_map(|&m| self.forest.children[m].iter().copied())
            .collect();
        kids.sort_unstable();
        let mut opened_first = Vec::new();
        kids.retain(|&y| {
            if self.count(y) >= self.lower {
                self.opened[y] = true;
                opened_first.push(y);
                false
            } else {
                true
            }
        });
        if !opened_first.is_empty() {
            self.steps.push(format!("process {node:?}: open saturated children {opened_first:?}"));
        }
        if kids.is_empty() {
            return;
        }
        // Farthest-from-parent first; lowest index breaks ties.
        kids.sort_by(|&a, &b| {
            self.forest.edge[b]
                .partial_cmp(&self.forest.edge[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        for w in 0..kids.len() {
            let y = kids[w];
            if self.count(y) >= self.lower {
                self.opened[y] = true;
                self.steps.push(format!("open {y} with {} clients", self.count(y)));
                continue;
            }
            if self.count(y) == 0 {
                continue;
            }
            let sent = self.count(y);
            log.record("edge-load-within-l", sent <= self.lower, || {
                format!("node {y} sends {sent} clients, more than L")
            });
            if w + 1 < kids.len() {
                let sib = kids[w + 1];
                let hop = self.dist(y, sib);
                let own_edge = self.forest.edge[y];
                log.record("sibling-hop-within-3l", hop <= 3.0 * own_edge + 1e-9, || {
                    format!("hop {y}->{sib} of {hop} exceeds 3 * {own_edge}")
                });
                self.steps.push(format!("send {sent} clients from {y} to sibling {sib}"));
                self.move_all(y, sib);
            } else {
                let parent = self.forest.eta[y].expect("cascading node has a parent");
                self.steps.push(format!("send {sent} clients from {y} to parent {parent}"));
                self.move_all(y, parent);
            }
        }
        // A node below the root never accumulates more than 2L clients.
        for &m in &members {
            let is_root = self.forest.depth[m] == 0;
            if !is_root {
                let c = self.count(m);
                log.record("nonroot-within-2l", c <= 2 * self.lower, || {
                    format!("node {m} collected {c} clients, more than 2L")
                });
            }
        }
    }

    /// Settle a component root after its children are done.
    pub fn resolve_root(&mut self, root: Root, p: &[usize], log: &mut InvariantLog) -> Result<(), TreefixError> {
        match root {
            Root::Member(_) => Ok(()),
            Root::Pair(a, b) => {
                let total = self.count(a) + self.count(b);
                if total == 0 {
                    return Ok(());
                }
                if total >= self.lower && total <= 2 * self.lower {
                    let winner = if self.count(a) >= self.count(b) { a } else { b };
                    let loser = if winner == a { b } else { a };
                    self.move_all(loser, winner);
                    self.opened[winner] = true;
                    self.steps.push(format!("root pair ({a},{b}): open {winner} with {total} clients"));
                    Ok(())
                } else if total > 2 * self.lower {
                    log.record("rootpair-within-3l", total <= 3 * self.lower, || {
                        format!("root pair ({a},{b}) collected {total} clients, more than 3L")
                    });
                    let winner = if self.count(a) >= self.count(b) { a } else { b };
                    let loser = if winner == a { b } else { a };
                    let mut combined = std::mem::take(&mut self.pools[a]);
                    combined.extend(std::mem::take(&mut self.pools[b]));
                    combined.sort_unstable();
                    let head = combined.len().div_ceil(2);
                    self.pools[loser] = combined.split_off(head);
                    self.pools[winner] = combined;
                    self.opened[winner] = true;
                    self.opened[loser] = true;
                    self.steps.push(format!(
                        "root pair ({a},{b}): open both, split {} / {}",
                        self.count(winner),
                        self.count(loser)
                    ));
                    Ok(())
                } else {
                    // Fewer than L clients: hand everything to the nearest
                    // saturated facility.
                    let mut best: Option<(f64, usize)> = None;
                    for &q in p {
                        let d = self.dist(q, a).min(self.dist(q, b));
                        match best {
                            Some((bd, bq)) if (bd, bq) <= (d, q) => {}
                            _ => best = Some((d, q)),
                        }
                    }
                    let Some((_, q)) = best else {
                        return Err(TreefixError::StrandedRoot { total });
                    };
                    self.move_all(a, q);
                    self.move_all(b, q);
                    self.steps.push(format!(
                        "root pair ({a},{b}): ship {total} clients to saturated {q}"
                    ));
                    Ok(())
                }
            }
        }
    }

    pub fn is_open(&self, k: usize) -> bool {
        self.opened[k] || self.in_p[k]
    }
}

/// Forest structure and step log for the debug dump.
#[derive(Debug, Clone, Default)]
pub struct RepairTrace {
    /// `(facility, parent, edge cost)` in local indices.
    pub edges: Vec<(usize, usize, f64)>,
    pub roots: Vec<String>,
    pub steps: Vec<String>,
}

/// Outcome of the repair stage, still in local facility indices.
#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub solution: Solution,
    /// Loads after the type-1 moves, before tree processing.
    pub pre_tree_loads: Vec<u64>,
    pub log: InvariantLog,
    pub trace: RepairTrace,
}

/// Full repair: type-1 moves, partition, forest, bottom-up cascades, root
/// resolution and assembly back onto the original instance.
pub fn repair_lower_bounds<R: Real>(
    inst: &Instance<R>,
    i1: &I1Instance<R>,
    icap: &CflInstance<R>,
    ascap: &CflSolution<R>,
    beta_measured: f64,
) -> Result<RepairOutcome, TreefixError> {
    let mut log = InvariantLog::default();
    let reass = type1_reassign(i1, icap, ascap, &mut log)?;
    let (p, pbar) = partition_p(&reass, icap.lower);
    check_closed_sites_saturated(i1, icap, ascap, &p, &mut log);

    let mut trace = RepairTrace::default();
    let pools = if pbar.is_empty() {
        reass.pools.clone()
    } else {
        let forest = build_forest(inst, &i1.facilities, &p, &pbar, &mut log)?;
        let mut processor =
            TreeProcessor::new(inst, &i1.facilities, &forest, icap.lower, reass.pools.clone(), &p);

        // Bottom-up level order: deepest nodes first, ids ascending, each
        // component's root last.
        let mut units: Vec<(usize, Node)> = Vec::new();
        for &k in &pbar {
            let is_pair_member = forest
                .roots
                .iter()
                .any(|r| matches!(r, Root::Pair(a, b) if *a == k || *b == k));
            if !is_pair_member {
                units.push((forest.depth[k], Node::Single(k)));
            }
        }
        for root in &forest.roots {
            match *root {
                Root::Member(k) => units.push((0, Node::Single(k))),
                Root::Pair(a, b) => units.push((0, Node::Pair(a, b))),
            }
        }
        units.sort_by(|(da, na), (db, nb)| db.cmp(da).then(node_key(na).cmp(&node_key(nb))));
        for (_, node) in units {
            processor.process_node(node, &mut log);
        }
        for root in &forest.roots {
            processor.resolve_root(*root, &p, &mut log)?;
        }
        for &k in &pbar {
            if let Some(parent) = forest.eta[k] {
                trace.edges.push((k, parent, forest.edge[k]));
            }
        }
        trace.roots = forest.roots.iter().map(|r| format!("{r:?}")).collect();
        trace.steps = processor.steps.clone();

        let mut pools = Vec::with_capacity(processor.pools.len());
        for (k, pool) in processor.pools.iter().enumerate() {
            if !pool.is_empty() && !processor.is_open(k) {
                return Err(TreefixError::Internal(format!(
                    "facility {k} keeps {} clients but never opened",
                    pool.len()
                )));
            }
            pools.push(if processor.is_open(k) { pool.clone() } else { Vec::new() });
        }
        pools
    };

    let mut outcome = assemble_final(inst, i1, &reass, pools, beta_measured, log)?;
    outcome.trace = trace;
    Ok(outcome)
}

fn node_key(node: &Node) -> usize {
    match node {
        Node::Single(k) => *k,
        Node::Pair(a, _) => *a,
    }
}

/// Map pools back to the original instance, enforce the lower bound exactly
/// and record the upper-bound factor.
pub fn assemble_final<R: Real>(
    inst: &Instance<R>,
    i1: &I1Instance<R>,
    reass: &Reassignment,
    pools: Vec<Vec<usize>>,
    beta_measured: f64,
    mut log: InvariantLog,
) -> Result<RepairOutcome, TreefixError> {
    let mut assign = vec![usize::MAX; inst.num_clients()];
    let mut open = std::collections::BTreeSet::new();
    for (k, pool) in pools.iter().enumerate() {
        if pool.is_empty() {
            continue;
        }
        let facility = i1.facilities[k];
        open.insert(facility);
        for &client in pool {
            if assign[client] != usize::MAX {
                return Err(TreefixError::Internal(format!("client {client} assigned twice")));
            }
            assign[client] = facility;
        }
    }
    if let Some(client) = assign.iter().position(|&f| f == usize::MAX) {
        return Err(TreefixError::Internal(format!("client {client} lost in the repair")));
    }

    let lower = u64::from(inst.lower());
    let upper = f64::from(inst.upper());
    let cap = ((beta_measured.max(1.0) + 1.0) * upper).ceil() as u64;
    for (k, pool) in pools.iter().enumerate() {
        if pool.is_empty() {
            continue;
        }
        let load = pool.len() as u64;
        if load < lower {
            return Err(TreefixError::LowerBoundViolated {
                facility: i1.facilities[k],
                load,
            });
        }
        log.record("final-load-within-beta-plus-one", load <= cap, || {
            format!("facility {} holds {load} clients, above {cap}", i1.facilities[k])
        });
    }

    Ok(RepairOutcome {
        solution: Solution { open, assign },
        pre_tree_loads: reass.loads.clone(),
        log,
        trace: RepairTrace::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    use crate::transform::{to_i1, to_i2, to_icap};
    use crate::tricriteria::TriCriteriaSolution;

    fn line_facilities(positions: &[f64], nc: usize, lower: u32, upper: u32) -> Instance<f64> {
        let facilities: Vec<(String, f64, [f64; 2])> = positions
            .iter()
            .enumerate()
            .map(|(i, &x)| (format!("f{i}"), 0.0, [x, 0.0]))
            .collect();
        let clients: Vec<(String, [f64; 2])> =
            (0..nc).map(|j| (format!("c{j}"), [j as f64 * 0.01, 0.0])).collect();
        Instance::from_points(&facilities, &clients, lower, upper).unwrap()
    }

    fn tri(open: Vec<usize>, assign: Vec<usize>, nf: usize) -> TriCriteriaSolution<f64> {
        let mut loads = vec![0u32; nf];
        for &i in &assign {
            loads[i] += 1;
        }
        let loads = open.iter().map(|&i| loads[i]).collect();
        TriCriteriaSolution {
            open,
            assign,
            loads,
            measured_alpha: 1.0,
            measured_beta: 1.0,
            cost: 0.0,
            lp_objective: 0.0,
            beta_target: 1.5,
        }
    }

    /// The worked shipment scenario: L=5, three sites with demands 1, 2, 1;
    /// the third facility's surplus serves the first two demands.
    #[test]
    fn type1_moves_follow_shipments() {
        let inst = line_facilities(&[0.0, 1.0, 2.0], 12, 5, 12);
        // n = (4, 3, 5) placed as client ids 0..4, 4..7, 7..12.
        let mut assign = vec![0; 12];
        for j in 4..7 {
            assign[j] = 1;
        }
        for j in 7..12 {
            assign[j] = 2;
        }
        let t = tri(vec![0, 1, 2], assign, 3);
        let i1 = to_i1(&inst, &t);
        let i2 = to_i2(&i1, 5);
        let icap = to_icap(&inst, &i2, 0.5).unwrap();
        // Sites: 0 (demand 1), 1 (demand 2), 2 (demand 0, capacity 5).
        assert_eq!(icap.sites.len(), 3);
        let ascap = CflSolution {
            open: BTreeSet::from([2]),
            ship: vec![(0, 2, 1), (1, 2, 2)],
            cost: 0.0,
        };
        let mut log = InvariantLog::default();
        let reass = type1_reassign(&i1, &icap, &ascap, &mut log).unwrap();
        assert_eq!(reass.loads, vec![5, 5, 2]);
        assert_eq!(reass.rho1, vec![(2, 0, 1), (2, 1, 2)]);
        // The moved clients are the lowest ids of facility 2's pool.
        assert_eq!(reass.pools[0], vec![0, 1, 2, 3, 7]);
        assert_eq!(reass.pools[1], vec![4, 5, 6, 8, 9]);
        assert_eq!(reass.pools[2], vec![10, 11]);
        assert!(log.all_ok());

        let (p, pbar) = partition_p(&reass, 5);
        assert_eq!(p, vec![0, 1]);
        assert_eq!(pbar, vec![2]);
    }

    #[test]
    fn self_service_only_moves_nothing() {
        let inst = line_facilities(&[0.0, 1.0], 6, 3, 6);
        let t = tri(vec![0, 1], vec![0, 0, 0, 1, 1, 1], 2);
        let i1 = to_i1(&inst, &t);
        let icap = to_icap(&inst, &to_i2(&i1, 3), 0.5).unwrap();
        let ascap = CflSolution { open: BTreeSet::new(), ship: vec![], cost: 0.0 };
        let mut log = InvariantLog::default();
        let reass = type1_reassign(&i1, &icap, &ascap, &mut log).unwrap();
        assert!(reass.rho1.is_empty());
        assert_eq!(reass.loads, vec![3, 3]);
    }

    #[test]
    fn forest_on_a_line_forms_root_pair() {
        // Facilities at 0, 1, 3, all deficient: 0 and 1 point at each other,
        // 3 hangs off 1.
        let inst = line_facilities(&[0.0, 1.0, 3.0], 3, 2, 3);
        let mut log = InvariantLog::default();
        let forest = build_forest(&inst, &[0, 1, 2], &[], &[0, 1, 2], &mut log).unwrap();
        assert_eq!(forest.eta, vec![Some(1), Some(0), Some(1)]);
        assert_eq!(forest.roots, vec![Root::Pair(0, 1)]);
        assert_eq!(forest.children[1], vec![2]);
        assert_eq!(forest.depth, vec![0, 0, 1]);
        assert!(log.all_ok());
    }

    #[test]
    fn deficient_node_under_saturated_root() {
        let inst = line_facilities(&[0.0, 1.0], 2, 2, 3);
        let mut log = InvariantLog::default();
        let forest = build_forest(&inst, &[0, 1], &[0], &[1], &mut log).unwrap();
        assert_eq!(forest.roots, vec![Root::Member(0)]);
        assert_eq!(forest.eta[1], Some(0));
        assert_eq!(forest.children[0], vec![1]);
    }

    /// The worked cascade: L=5, children b(6), a(3), c(4), d(2), e(2) by
    /// decreasing distance a > c > d > e; b opens up front, a fills c to 7
    /// which opens, d joins e, and e's 4 clients reach the parent.
    #[test]
    fn cascade_matches_worked_example() {
        let positions = [0.0, 10.0, 8.0, 6.0, 4.0, 2.0];
        let nc = 17;
        let inst = line_facilities(&positions, nc, 5, 20);
        let facilities: Vec<usize> = (0..6).collect();
        // Pools: x empty; b=6, a=3, c=4, d=2, e=2 (client ids in blocks).
        let pools: Vec<Vec<usize>> = vec![
            vec![],
            (0..6).collect(),
            (6..9).collect(),
            (9..13).collect(),
            (13..15).collect(),
            (15..17).collect(),
        ];
        let p = vec![0usize];
        let mut log = InvariantLog::default();
        // A star around facility 0 with the intended child distances.
        let forest = FacilityForest {
            eta: vec![None, Some(0), Some(0), Some(0), Some(0), Some(0)],
            children: vec![vec![1, 2, 3, 4, 5], vec![], vec![], vec![], vec![], vec![]],
            roots: vec![Root::Member(0)],
            depth: vec![0, 1, 1, 1, 1, 1],
            edge: vec![0.0, 10.0, 8.0, 6.0, 4.0, 2.0],
        };
        let mut proc = TreeProcessor::new(&inst, &facilities, &forest, 5, pools, &p);
        proc.process_node(Node::Single(0), &mut log);
        assert!(proc.opened[1], "first-pass child with L clients opens");
        assert!(proc.opened[3], "child reaching L mid-cascade opens");
        assert!(!proc.opened[2] && !proc.opened[4] && !proc.opened[5]);
        assert_eq!(proc.pools[1].len(), 6);
        assert_eq!(proc.pools[3].len(), 7, "3 cascaded clients join the 4 present");
        assert_eq!(proc.pools[0].len(), 4, "the last child hands 2+2 to the root");
        assert!(log.all_ok());
    }

    #[test]
    fn all_saturated_children_open_in_first_pass() {
        let inst = line_facilities(&[0.0, 1.0, 2.0], 6, 2, 6);
        let forest = FacilityForest {
            eta: vec![None, Some(0), Some(0)],
            children: vec![vec![1, 2], vec![], vec![]],
            roots: vec![Root::Member(0)],
            depth: vec![0, 1, 1],
            edge: vec![0.0, 1.0, 2.0],
        };
        let pools = vec![vec![0, 1], vec![2, 3], vec![4, 5]];
        let mut log = InvariantLog::default();
        let mut proc = TreeProcessor::new(&inst, &[0, 1, 2], &forest, 2, pools, &[0]);
        proc.process_node(Node::Single(0), &mut log);
        assert!(proc.opened[1] && proc.opened[2]);
        assert_eq!(proc.pools[0], vec![0, 1]);
    }

    #[test]
    fn single_light_child_joins_parent() {
        let inst = line_facilities(&[0.0, 1.0], 3, 3, 4);
        let forest = FacilityForest {
            eta: vec![None, Some(0)],
            children: vec![vec![1], vec![]],
            roots: vec![Root::Member(0)],
            depth: vec![0, 1],
            edge: vec![0.0, 1.0],
        };
        let pools = vec![vec![0], vec![1, 2]];
        let mut log = InvariantLog::default();
        let mut proc = TreeProcessor::new(&inst, &[0, 1], &forest, 3, pools, &[0]);
        proc.process_node(Node::Single(0), &mut log);
        assert_eq!(proc.pools[0], vec![0, 1, 2]);
        assert!(proc.pools[1].is_empty());
    }

    fn pair_fixture(na: usize, nb: usize, incoming: usize, lower: u32) -> (Instance<f64>, FacilityForest, Vec<Vec<usize>>) {
        let total = na + nb + incoming;
        let inst = line_facilities(&[0.0, 1.0, 1.5], total, lower, 40);
        let forest = FacilityForest {
            eta: vec![Some(1), Some(0), Some(1)],
            children: vec![vec![], vec![2], vec![]],
            roots: vec![Root::Pair(0, 1)],
            depth: vec![0, 0, 1],
            edge: vec![1.0, 1.0, 0.5],
        };
        let pools = vec![
            (0..na).collect(),
            (na..na + nb).collect(),
            (na + nb..total).collect(),
        ];
        (inst, forest, pools)
    }

    /// L=12: members hold 8 and 6, a child brings 9 more; the total 23 fits
    /// in [L, 2L] so one member takes everything.
    #[test]
    fn root_pair_opens_single_member() {
        let (inst, forest, pools) = pair_fixture(8, 6, 9, 12);
        let mut log = InvariantLog::default();
        let mut proc = TreeProcessor::new(&inst, &[0, 1, 2], &forest, 12, pools, &[]);
        proc.process_node(Node::Pair(0, 1), &mut log);
        assert_eq!(proc.count(1), 6 + 9, "child cascades into its own parent");
        proc.resolve_root(Root::Pair(0, 1), &[], &mut log).unwrap();
        assert!(proc.opened[1], "the heavier member opens");
        assert!(!proc.opened[0]);
        assert_eq!(proc.count(1), 23);
        assert!(log.all_ok());
    }

    /// L=12 with 11 incoming: total 25 exceeds 2L, both open and split 13/12.
    #[test]
    fn root_pair_splits_when_above_twice_l() {
        let (inst, forest, pools) = pair_fixture(8, 6, 11, 12);
        let mut log = InvariantLog::default();
        let mut proc = TreeProcessor::new(&inst, &[0, 1, 2], &forest, 12, pools, &[]);
        proc.process_node(Node::Pair(0, 1), &mut log);
        proc.resolve_root(Root::Pair(0, 1), &[], &mut log).unwrap();
        assert!(proc.opened[0] && proc.opened[1]);
        let (ca, cb) = (proc.count(0), proc.count(1));
        assert_eq!(ca + cb, 25);
        assert!(ca >= 12 && cb >= 12);
        // The heavier member (1, holding 17) takes the ceiling half.
        assert_eq!(cb, 13);
        assert!(log.all_ok());
    }

    /// Total below L: everything ships to the nearest saturated facility.
    #[test]
    fn root_pair_ships_to_nearest_saturated() {
        let inst = line_facilities(&[0.0, 1.0, 10.0], 20, 12, 20);
        let forest = FacilityForest {
            eta: vec![Some(1), Some(0), None],
            children: vec![vec![], vec![], vec![]],
            roots: vec![Root::Pair(0, 1), Root::Member(2)],
            depth: vec![0, 0, 0],
            edge: vec![1.0, 1.0, 0.0],
        };
        let pools = vec![(0..4).collect(), (4..8).collect(), (8..20).collect()];
        let mut log = InvariantLog::default();
        let mut proc = TreeProcessor::new(&inst, &[0, 1, 2], &forest, 12, pools, &[2]);
        proc.resolve_root(Root::Pair(0, 1), &[2], &mut log).unwrap();
        assert_eq!(proc.count(2), 20);
        assert!(!proc.opened[0] && !proc.opened[1]);

        // With no saturated facility at all, the same situation is an error.
        let pools = vec![(0..4).collect(), (4..8).collect(), vec![]];
        let mut proc = TreeProcessor::new(&inst, &[0, 1, 2], &forest, 12, pools, &[]);
        let err = proc.resolve_root(Root::Pair(0, 1), &[], &mut log).unwrap_err();
        assert_eq!(err, TreefixError::StrandedRoot { total: 8 });
    }

    #[test]
    fn repair_without_deficient_facilities_is_type1_outcome() {
        let inst = line_facilities(&[0.0, 1.0], 6, 3, 6);
        let t = tri(vec![0, 1], vec![0, 0, 0, 1, 1, 1], 2);
        let i1 = to_i1(&inst, &t);
        let icap = to_icap(&inst, &to_i2(&i1, 3), 0.5).unwrap();
        let ascap = CflSolution { open: BTreeSet::new(), ship: vec![], cost: 0.0 };
        let outcome = repair_lower_bounds(&inst, &i1, &icap, &ascap, 1.0).unwrap();
        assert_eq!(outcome.solution.open, BTreeSet::from([0, 1]));
        assert_eq!(outcome.solution.assign, vec![0, 0, 0, 1, 1, 1]);
        assert!(outcome.log.all_ok());
    }
}
