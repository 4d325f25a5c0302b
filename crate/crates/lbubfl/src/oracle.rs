//! Exact solvers for desk-sized instances: open-set enumeration combined
//! with transportation flows. These are the ground truth the approximation
//! pipeline and the flow solver are verified against.

use crate::instance::Instance;
use crate::mcflow::{min_cost_flow, FlowNetwork};
use crate::scalar::Real;
use crate::solution::Solution;
use crate::transform::{CflInstance, I2Instance};

/// Enumeration is capped at 2^12 open sets.
pub const MAX_ENUMERATION: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    TooLarge { size: usize, limit: usize },
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleError::TooLarge { size, limit } => {
                write!(f, "exact enumeration limited to {limit} facilities, got {size}")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Connection-optimal assignment of unit clients to `open` with per-facility
/// load bounds, or `None` if infeasible.
fn assign_with_bounds<R: Real>(
    inst: &Instance<R>,
    open: &[usize],
    lower: u64,
    upper: u64,
) -> Option<(f64, Vec<usize>)> {
    let nc = inst.num_clients();
    let m = open.len();
    if nc == 0 {
        return if lower == 0 { Some((0.0, Vec::new())) } else { None };
    }
    if m == 0 {
        return None;
    }
    let sink = nc + m;
    let mut net = FlowNetwork::new(nc + m + 1);
    for j in 0..nc {
        net.set_supply(j, 1);
    }
    net.set_supply(sink, -(nc as i64));
    let mut ids = vec![usize::MAX; nc * m];
    for j in 0..nc {
        for (k, &i) in open.iter().enumerate() {
            ids[j * m + k] = net
                .add_arc(j, nc + k, 0, 1, inst.dist_fc(i, j).as_f64())
                .expect("bipartite arc");
        }
    }
    for k in 0..m {
        net.add_arc(nc + k, sink, lower as i64, upper as i64, 0.0).expect("sink arc");
    }
    let flow = min_cost_flow(&net).ok()?;
    let mut assign = vec![usize::MAX; nc];
    for j in 0..nc {
        for (k, &i) in open.iter().enumerate() {
            if flow.flow[ids[j * m + k]] == 1 {
                assign[j] = i;
            }
        }
    }
    Some((flow.cost, assign))
}

/// Exact optimum over every open subset with loads in `[L, U]`.
/// Returns `None` when no subset is feasible.
pub fn exact_lbubfl<R: Real>(
    inst: &Instance<R>,
) -> Result<Option<(Solution, f64)>, OracleError> {
    let nf = inst.num_facilities();
    if nf > MAX_ENUMERATION {
        return Err(OracleError::TooLarge { size: nf, limit: MAX_ENUMERATION });
    }
    let nc = inst.num_clients() as u64;
    if nc == 0 {
        return Ok(Some((Solution::empty(), 0.0)));
    }
    let lower = u64::from(inst.lower());
    let upper = u64::from(inst.upper());
    let mut best: Option<(Solution, f64)> = None;
    for mask in 1u32..(1 << nf) {
        let open: Vec<usize> = (0..nf).filter(|&i| mask & (1 << i) != 0).collect();
        let k = open.len() as u64;
        if k * lower > nc || k * upper < nc {
            continue;
        }
        let opening: f64 = open.iter().map(|&i| inst.open_cost(i).as_f64()).sum();
        if let Some((_, _)) = &best {
            // Opening cost alone may already exceed the incumbent.
            if opening >= best.as_ref().unwrap().1 {
                continue;
            }
        }
        if let Some((conn, assign)) = assign_with_bounds(inst, &open, lower, upper) {
            let total = opening + conn;
            if best.as_ref().is_none_or(|(_, b)| total < *b) {
                best = Some((
                    Solution { open: open.iter().copied().collect(), assign },
                    total,
                ));
            }
        }
    }
    Ok(best)
}

/// Exact optimum of the lower-bounded instance (no upper bounds, zero
/// opening costs, clients sitting at their serving facilities).
pub fn exact_lbfl<R: Real>(
    inst: &Instance<R>,
    i2: &I2Instance,
) -> Result<Option<f64>, OracleError> {
    let m = i2.facilities.len();
    if m > MAX_ENUMERATION {
        return Err(OracleError::TooLarge { size: m, limit: MAX_ENUMERATION });
    }
    let nc: u64 = i2.clients_at.iter().map(|c| u64::from(c.count)).sum();
    if nc == 0 {
        return Ok(Some(0.0));
    }
    let lower = u64::from(i2.lower);
    let mut best: Option<f64> = None;
    for mask in 1u32..(1 << m) {
        let open: Vec<usize> = (0..m).filter(|&k| mask & (1 << k) != 0).collect();
        if open.len() as u64 * lower > nc {
            continue;
        }
        // Transportation: client groups at facilities -> open facilities.
        let no = open.len();
        let sink = m + no;
        let mut net = FlowNetwork::new(m + no + 1);
        for (k, c) in i2.clients_at.iter().enumerate() {
            net.set_supply(k, i64::from(c.count));
        }
        net.set_supply(sink, -(nc as i64));
        for k in 0..m {
            for (b, &o) in open.iter().enumerate() {
                let d = inst.dist_ff(i2.facilities[k], i2.facilities[o]).as_f64();
                net.add_arc(k, m + b, 0, nc as i64, d).expect("arc");
            }
        }
        for (b, _) in open.iter().enumerate() {
            net.add_arc(m + b, sink, lower as i64, nc as i64, 0.0).expect("arc");
        }
        if let Ok(flow) = min_cost_flow(&net) {
            if best.is_none_or(|b| flow.cost < b) {
                best = Some(flow.cost);
            }
        }
    }
    Ok(best)
}

/// Exact optimum of the capacitated instance.
pub fn exact_cfl<R: Real>(
    inst: &Instance<R>,
    icap: &CflInstance<R>,
) -> Result<Option<f64>, OracleError> {
    let n = icap.sites.len();
    if n > MAX_ENUMERATION {
        return Err(OracleError::TooLarge { size: n, limit: MAX_ENUMERATION });
    }
    let total: u64 = icap.total_demand();
    if total == 0 {
        return Ok(Some(0.0));
    }
    let demand_sites: Vec<usize> = (0..n).filter(|&s| icap.sites[s].demand > 0).collect();
    let nd = demand_sites.len();
    let mut best: Option<f64> = None;
    for mask in 1u32..(1 << n) {
        let open: Vec<usize> = (0..n).filter(|&s| mask & (1 << s) != 0).collect();
        let capacity: u64 = open.iter().map(|&s| icap.sites[s].capacity).sum();
        if capacity < total {
            continue;
        }
        let opening: f64 = open.iter().map(|&s| icap.sites[s].open_cost.as_f64()).sum();
        if best.is_some_and(|b| opening >= b) {
            continue;
        }
        let no = open.len();
        let sink = nd + no;
        let mut net = FlowNetwork::new(nd + no + 1);
        for (a, &s) in demand_sites.iter().enumerate() {
            net.set_supply(a, icap.sites[s].demand as i64);
        }
        net.set_supply(sink, -(total as i64));
        for (a, &s) in demand_sites.iter().enumerate() {
            for (b, &t) in open.iter().enumerate() {
                net.add_arc(a, nd + b, 0, icap.sites[s].demand as i64, icap.dist(inst, s, t).as_f64())
                    .expect("arc");
            }
        }
        for (b, &t) in open.iter().enumerate() {
            net.add_arc(nd + b, sink, 0, icap.sites[t].capacity as i64, 0.0).expect("arc");
        }
        if let Ok(flow) = min_cost_flow(&net) {
            let c = opening + flow.cost;
            if best.is_none_or(|b| c < b) {
                best = Some(c);
            }
        }
    }
    Ok(best)
}

/// Brute-force minimum over all integral feasible flows, by depth-first
/// assignment of arc flows. The independent reference for the flow solver.
pub fn exact_flow_cost(net: &FlowNetwork) -> Option<i128> {
    fn dfs(
        arcs: &[crate::mcflow::Arc],
        idx: usize,
        balance: &mut [i64],
        cost_so_far: i128,
        best: &mut Option<i128>,
    ) {
        if best.is_some_and(|b| cost_so_far >= b) && arcs[idx..].iter().all(|a| a.cost >= 0) {
            return;
        }
        if idx == arcs.len() {
            if balance.iter().all(|&b| b == 0) && best.is_none_or(|b| cost_so_far < b) {
                *best = Some(cost_so_far);
            }
            return;
        }
        let arc = arcs[idx];
        for f in arc.lower..=arc.upper {
            balance[arc.from] -= f;
            balance[arc.to] += f;
            dfs(arcs, idx + 1, balance, cost_so_far + i128::from(f) * i128::from(arc.cost), best);
            balance[arc.from] += f;
            balance[arc.to] -= f;
        }
    }

    let n = net.node_count();
    let mut balance: Vec<i64> = (0..n).map(|v| net.supply(v)).collect();
    let mut best: Option<i128> = None;
    dfs(net.arcs(), 0, &mut balance, 0, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;
    use std::collections::BTreeSet;

    #[test]
    fn single_facility_must_open() {
        let inst = Instance::<f64>::from_points(
            &[("f".into(), 2.0, [0.0, 0.0])],
            &[("a".into(), [1.0, 0.0]), ("b".into(), [0.0, 1.0])],
            1,
            2,
        )
        .unwrap();
        let (sol, cost) = exact_lbubfl(&inst).unwrap().unwrap();
        assert_eq!(sol.open, BTreeSet::from([0]));
        assert!((cost - 4.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_counting_detected() {
        // 3 clients, L=2, U=2: no k with 2k = 3.
        let inst = Instance::<f64>::from_points(
            &[("f0".into(), 0.0, [0.0, 0.0]), ("f1".into(), 0.0, [1.0, 0.0])],
            &[
                ("a".into(), [0.0, 0.0]),
                ("b".into(), [1.0, 0.0]),
                ("c".into(), [2.0, 0.0]),
            ],
            2,
            2,
        )
        .unwrap();
        assert!(exact_lbubfl(&inst).unwrap().is_none());
    }

    #[test]
    fn t1_optimum_is_three_point_seven() {
        let inst = t1::<f64>();
        let (sol, cost) = exact_lbubfl(&inst).unwrap().unwrap();
        assert!((cost - 3.7).abs() < 1e-9, "expected 3.7, got {cost}");
        assert_eq!(sol.open.len(), 3);
    }

    #[test]
    fn size_cap_enforced() {
        let facilities: Vec<(String, f64, [f64; 2])> =
            (0..13).map(|i| (format!("f{i}"), 0.0, [i as f64, 0.0])).collect();
        let inst = Instance::<f64>::from_points(&facilities, &[], 1, 1).unwrap();
        assert!(matches!(
            exact_lbubfl(&inst),
            Err(OracleError::TooLarge { size: 13, limit: 12 })
        ));
    }

    #[test]
    fn oracles_are_deterministic() {
        let inst = t1::<f64>();
        let a = exact_lbubfl(&inst).unwrap().unwrap();
        let b = exact_lbubfl(&inst).unwrap().unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
