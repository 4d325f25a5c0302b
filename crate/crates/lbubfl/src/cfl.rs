//! A feasible solver for the derived capacitated instance: local search over
//! open sets with moves {open, close, swap}, each evaluated by an exact
//! transportation flow of all demand to the open sites, followed by a
//! normalization pass that makes every open site serve its own demand.

use std::collections::BTreeSet;

use crate::instance::Instance;
use crate::mcflow::{min_cost_flow, FlowNetwork};
use crate::scalar::Real;
use crate::transform::CflInstance;

const RELATIVE_IMPROVEMENT: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CflSolution<R: Real> {
    pub open: BTreeSet<usize>,
    /// `(demand site, supply site, units)`, sorted, positive units only.
    pub ship: Vec<(usize, usize, u64)>,
    pub cost: R,
}

impl<R: Real> CflSolution<R> {
    pub fn shipped_to(&self, demand_site: usize, supply_site: usize) -> u64 {
        self.ship
            .iter()
            .filter(|&&(d, s, _)| d == demand_site && s == supply_site)
            .map(|&(_, _, a)| a)
            .sum()
    }
}

/// Exact transportation of all demands to `open`, or `None` when the open
/// capacity cannot carry the total demand.
fn assign_demand<R: Real>(
    inst: &Instance<R>,
    icap: &CflInstance<R>,
    open: &BTreeSet<usize>,
) -> Option<(R, Vec<(usize, usize, u64)>)> {
    let demand_sites: Vec<usize> =
        (0..icap.sites.len()).filter(|&s| icap.sites[s].demand > 0).collect();
    let total: u64 = demand_sites.iter().map(|&s| icap.sites[s].demand).sum();
    if total == 0 {
        return Some((R::zero(), Vec::new()));
    }
    let capacity: u64 = open.iter().map(|&s| icap.sites[s].capacity).sum();
    if capacity < total {
        return None;
    }
    let opens: Vec<usize> = open.iter().copied().collect();
    let nd = demand_sites.len();
    let no = opens.len();
    let sink = nd + no;
    let mut net = FlowNetwork::new(nd + no + 1);
    for (a, &s) in demand_sites.iter().enumerate() {
        net.set_supply(a, icap.sites[s].demand as i64);
    }
    net.set_supply(sink, -(total as i64));
    let mut arc_ids = vec![usize::MAX; nd * no];
    for (a, &s) in demand_sites.iter().enumerate() {
        for (b, &t) in opens.iter().enumerate() {
            let d = icap.dist(inst, s, t).as_f64();
            arc_ids[a * no + b] =
                net.add_arc(a, nd + b, 0, icap.sites[s].demand as i64, d).expect("arc");
        }
    }
    for (b, &t) in opens.iter().enumerate() {
        net.add_arc(nd + b, sink, 0, icap.sites[t].capacity as i64, 0.0).expect("arc");
    }
    let flow = min_cost_flow(&net).ok()?;
    let mut ship = Vec::new();
    for (a, &s) in demand_sites.iter().enumerate() {
        for (b, &t) in opens.iter().enumerate() {
            let units = flow.flow[arc_ids[a * no + b]];
            if units > 0 {
                ship.push((s, t, units as u64));
            }
        }
    }
    Some((R::of(flow.cost), ship))
}

fn total_cost<R: Real>(icap: &CflInstance<R>, open: &BTreeSet<usize>, conn: R) -> R {
    let opening: R = open.iter().map(|&s| icap.sites[s].open_cost).sum();
    opening + conn
}

/// Local search from the all-open solution. Every candidate move is scored
/// by re-running the exact assignment; the best strictly-improving move is
/// applied until none remains.
pub fn solve_cfl<R: Real>(inst: &Instance<R>, icap: &CflInstance<R>) -> CflSolution<R> {
    let n = icap.sites.len();
    if icap.total_demand() == 0 {
        return CflSolution { open: BTreeSet::new(), ship: Vec::new(), cost: R::zero() };
    }

    let mut open: BTreeSet<usize> = (0..n).collect();
    let (conn, mut ship) =
        assign_demand(inst, icap, &open).expect("all-open covers every demand");
    let mut cost = total_cost(icap, &open, conn);

    loop {
        let mut best: Option<(R, BTreeSet<usize>, Vec<(usize, usize, u64)>)> = None;
        let mut consider = |candidate: BTreeSet<usize>| {
            if let Some((conn, ship)) = assign_demand(inst, icap, &candidate) {
                let c = total_cost(icap, &candidate, conn);
                let improves = match &best {
                    Some((b, _, _)) => c < *b,
                    None => c.as_f64() < cost.as_f64() * (1.0 - RELATIVE_IMPROVEMENT),
                };
                if improves {
                    best = Some((c, candidate, ship));
                }
            }
        };
        for s in 0..n {
            let mut candidate = open.clone();
            if open.contains(&s) {
                candidate.remove(&s);
            } else {
                candidate.insert(s);
            }
            consider(candidate);
        }
        for &out in &open {
            for add in 0..n {
                if open.contains(&add) {
                    continue;
                }
                let mut candidate = open.clone();
                candidate.remove(&out);
                candidate.insert(add);
                consider(candidate);
            }
        }
        match best {
            Some((c, candidate, s)) if c.as_f64() < cost.as_f64() * (1.0 - RELATIVE_IMPROVEMENT) => {
                open = candidate;
                ship = s;
                cost = c;
            }
            _ => break,
        }
    }

    ship.sort_unstable();
    CflSolution { open, ship, cost }
}

/// True when no single open/close/swap move improves the cost beyond the
/// relative threshold. Used by the verification harness.
pub fn is_locally_optimal<R: Real>(
    inst: &Instance<R>,
    icap: &CflInstance<R>,
    sol: &CflSolution<R>,
) -> bool {
    let n = icap.sites.len();
    if icap.total_demand() == 0 {
        return sol.open.is_empty();
    }
    let mut candidates: Vec<BTreeSet<usize>> = Vec::new();
    for s in 0..n {
        let mut c = sol.open.clone();
        if sol.open.contains(&s) {
            c.remove(&s);
        } else {
            c.insert(s);
        }
        candidates.push(c);
    }
    for &out in &sol.open {
        for add in 0..n {
            if !sol.open.contains(&add) {
                let mut c = sol.open.clone();
                c.remove(&out);
                c.insert(add);
                candidates.push(c);
            }
        }
    }
    candidates.into_iter().all(|c| match assign_demand(inst, icap, &c) {
        Some((conn, _)) => {
            total_cost(icap, &c, conn).as_f64() >= sol.cost.as_f64() * (1.0 - RELATIVE_IMPROVEMENT)
        }
        None => true,
    })
}

/// Reroute shipments until every open site with demand serves it in full.
/// Each step moves one unit of the site's own demand home, displacing one
/// unit of a foreign demand if the capacity is saturated; the triangle
/// inequality keeps the cost from increasing.
pub fn normalize_self_service<R: Real>(
    inst: &Instance<R>,
    icap: &CflInstance<R>,
    sol: &CflSolution<R>,
) -> CflSolution<R> {
    use std::collections::HashMap;
    let mut ship: HashMap<(usize, usize), u64> = HashMap::new();
    for &(d, s, a) in &sol.ship {
        *ship.entry((d, s)).or_insert(0) += a;
    }
    let used = |ship: &HashMap<(usize, usize), u64>, site: usize| -> u64 {
        ship.iter().filter(|&(&(_, s), _)| s == site).map(|(_, &a)| a).sum()
    };

    loop {
        // An open site whose own demand is partly served remotely.
        let victim = sol.open.iter().copied().find(|&i| {
            icap.sites[i].demand > 0
                && ship.get(&(i, i)).copied().unwrap_or(0) < icap.sites[i].demand
        });
        let Some(i) = victim else { break };
        let (&(_, remote), _) = ship
            .iter()
            .find(|&(&(d, s), &a)| d == i && s != i && a > 0)
            .expect("deficit implies a remote server");
        let dec = |ship: &mut HashMap<(usize, usize), u64>, key: (usize, usize)| {
            let e = ship.get_mut(&key).unwrap();
            *e -= 1;
            if *e == 0 {
                ship.remove(&key);
            }
        };
        dec(&mut ship, (i, remote));
        *ship.entry((i, i)).or_insert(0) += 1;
        if used(&ship, i) > icap.sites[i].capacity {
            // Displace one unit of someone else's demand from i to the
            // remote site that just freed a slot.
            let (&(k, _), _) = ship
                .iter()
                .find(|&(&(d, s), &a)| s == i && d != i && a > 0)
                .expect("saturated capacity implies a foreign unit");
            dec(&mut ship, (k, i));
            *ship.entry((k, remote)).or_insert(0) += 1;
        }
    }

    let mut out: Vec<(usize, usize, u64)> =
        ship.into_iter().map(|((d, s), a)| (d, s, a)).filter(|&(_, _, a)| a > 0).collect();
    out.sort_unstable();
    let conn: R = out
        .iter()
        .map(|&(d, s, a)| icap.dist(inst, d, s) * R::of(a as f64))
        .sum();
    let cost = total_cost(icap, &sol.open, conn);
    CflSolution { open: sol.open.clone(), ship: out, cost }
}
