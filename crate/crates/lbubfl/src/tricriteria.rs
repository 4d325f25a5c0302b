//! Rounding the LP relaxation into an integrally-opened solution whose loads
//! sit in `[(1 - 1/ell) * L, (1 + threshold) * U]`: sparsify clients into
//! well-separated cluster centers, open one cheap facility per sparse
//! cluster, consolidate dense clusters greedily to an almost-integral
//! opening vector, spread dense demand equally, and finish with a
//! transportation flow that makes the assignment integral.

use crate::instance::Instance;
use crate::lp::{self, FractionalSolution, LpError};
use crate::mcflow::{integralize_assignment, FlowError, FractionalAssignment};
use crate::scalar::Real;
use crate::solution;

#[derive(Debug, Clone, PartialEq)]
pub enum TriCriteriaError {
    BadEll(f64),
    BadThreshold(f64),
    Lp(LpError),
    Flow(FlowError),
    EmptyBall { center: usize },
    /// Integral min load stayed at or below L/2; the lower-bound repair
    /// stage cannot work with such a solution.
    AlphaTooSmall { alpha: f64 },
    Internal(String),
}

impl std::fmt::Display for TriCriteriaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TriCriteriaError::BadEll(ell) => {
                write!(f, "ell must lie in (2, 3], got {ell}")
            }
            TriCriteriaError::BadThreshold(t) => {
                write!(f, "dense threshold must lie in (0, 1), got {t}")
            }
            TriCriteriaError::Lp(e) => write!(f, "lp: {e}"),
            TriCriteriaError::Flow(e) => write!(f, "flow: {e}"),
            TriCriteriaError::EmptyBall { center } => {
                write!(f, "no facility inside the ball of center {center}")
            }
            TriCriteriaError::AlphaTooSmall { alpha } => {
                write!(f, "measured alpha {alpha:.4} <= 1/2, aborting")
            }
            TriCriteriaError::Internal(msg) => write!(f, "internal invariant violated: {msg}"),
        }
    }
}

impl std::error::Error for TriCriteriaError {}

impl From<LpError> for TriCriteriaError {
    fn from(e: LpError) -> Self {
        TriCriteriaError::Lp(e)
    }
}

impl From<FlowError> for TriCriteriaError {
    fn from(e: FlowError) -> Self {
        TriCriteriaError::Flow(e)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TriParams<R: Real> {
    /// Filtering radius multiplier; must exceed 2 for the downstream repair.
    pub ell: R,
    /// Opening threshold for the fractional facility of a dense cluster.
    /// 1/2 pins the upper-bound factor to 3/2; `1 - 1/ell` gives `2 - 1/ell`.
    pub dense_threshold: R,
}

impl<R: Real> Default for TriParams<R> {
    fn default() -> Self {
        TriParams { ell: R::of(2.01), dense_threshold: R::of(0.5) }
    }
}

impl<R: Real> TriParams<R> {
    pub fn validate(&self) -> Result<(), TriCriteriaError> {
        let ell = self.ell.as_f64();
        if !(ell > 2.0 && ell <= 3.0) {
            return Err(TriCriteriaError::BadEll(ell));
        }
        let t = self.dense_threshold.as_f64();
        if !(t > 0.0 && t < 1.0) {
            return Err(TriCriteriaError::BadThreshold(t));
        }
        Ok(())
    }

    /// Upper-bound factor guaranteed by the rounding: `1 + dense_threshold`.
    pub fn beta_target(&self) -> R {
        R::one() + self.dense_threshold
    }
}

/// Facilities within radius `ell * avg_cost(j)` of client `j`, and the
/// opening mass they carry.
#[derive(Debug, Clone)]
pub struct Ball<R: Real> {
    pub center: usize,
    pub radius: R,
    pub members: Vec<usize>,
    pub mass: R,
}

pub fn ball<R: Real>(
    inst: &Instance<R>,
    frac: &FractionalSolution<R>,
    j: usize,
    ell: R,
) -> Ball<R> {
    let radius = ell * lp::avg_connection_cost(inst, frac, j).expect("client in range");
    let mut members = Vec::new();
    let mut mass = R::zero();
    for i in 0..inst.num_facilities() {
        if inst.dist_fc(i, j) <= radius {
            members.push(i);
            mass = mass + frac.y(i);
        }
    }
    Ball { center: j, radius, members, mass }
}

/// Thin the client set: process clients by non-decreasing ball radius and
/// drop every remaining client within twice its own radius of the chosen
/// center. Surviving clients are pairwise separated by more than
/// `2 * ell * max(avg_cost)` of either endpoint.
pub fn sparsify<R: Real>(
    inst: &Instance<R>,
    frac: &FractionalSolution<R>,
    ell: R,
) -> Vec<usize> {
    let nc = inst.num_clients();
    let avg: Vec<R> = (0..nc)
        .map(|j| lp::avg_connection_cost(inst, frac, j).expect("client in range"))
        .collect();
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by(|&a, &b| avg[a].partial_cmp(&avg[b]).unwrap().then(a.cmp(&b)));
    let mut alive = vec![true; nc];
    let mut centers = Vec::new();
    let two_ell = R::of(2.0) * ell;
    for &center in &order {
        if !alive[center] {
            continue;
        }
        alive[center] = false;
        centers.push(center);
        for j in 0..nc {
            if alive[j] && inst.dist_cc(center, j) <= two_ell * avg[j] {
                alive[j] = false;
            }
        }
    }
    centers.sort_unstable();
    centers
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterKind {
    Sparse,
    Dense,
}

/// A cluster: the facilities whose nearest center is `center`, the mass
/// `phi[j]` each client sends into it, and the total demand.
#[derive(Debug, Clone)]
pub struct Cluster<R: Real> {
    pub center: usize,
    pub members: Vec<usize>,
    pub demand: R,
    pub phi: Vec<R>,
    pub kind: ClusterKind,
}

/// Partition all facilities by nearest center (lowest center index wins
/// ties) and classify each cluster by comparing its demand with `U`.
pub fn form_clusters<R: Real>(
    inst: &Instance<R>,
    frac: &FractionalSolution<R>,
    centers: &[usize],
) -> Vec<Cluster<R>> {
    assert!(!centers.is_empty(), "need at least one cluster center");
    let nf = inst.num_facilities();
    let nc = inst.num_clients();
    let mut member_lists: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for i in 0..nf {
        let mut best = 0usize;
        let mut best_d = inst.dist_fc(i, centers[0]);
        for (k, &c) in centers.iter().enumerate().skip(1) {
            let d = inst.dist_fc(i, c);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        member_lists[best].push(i);
    }
    let upper = R::of(f64::from(inst.upper()));
    centers
        .iter()
        .zip(member_lists)
        .map(|(&center, members)| {
            let mut phi = vec![R::zero(); nc];
            for &i in &members {
                for (j, p) in phi.iter_mut().enumerate() {
                    *p = *p + frac.x(i, j);
                }
            }
            let demand: R = phi.iter().copied().sum();
            let kind = if demand <= upper + R::FEAS_TOL {
                ClusterKind::Sparse
            } else {
                ClusterKind::Dense
            };
            Cluster { center, members, demand, phi, kind }
        })
        .collect()
}

/// Open the cheapest facility inside the center's ball for a sparse cluster.
pub fn round_sparse<R: Real>(
    inst: &Instance<R>,
    frac: &FractionalSolution<R>,
    cluster: &Cluster<R>,
    ell: R,
) -> Result<usize, TriCriteriaError> {
    debug_assert_eq!(cluster.kind, ClusterKind::Sparse);
    let b = ball(inst, frac, cluster.center, ell);
    let mut chosen: Option<usize> = None;
    for &i in &cluster.members {
        if !b.members.contains(&i) {
            continue;
        }
        match chosen {
            Some(c) if inst.open_cost(c) <= inst.open_cost(i) => {}
            _ => chosen = Some(i),
        }
    }
    chosen.ok_or(TriCriteriaError::EmptyBall { center: cluster.center })
}

/// Result of consolidating a dense cluster's opening mass.
#[derive(Debug, Clone)]
pub struct DenseRounding<R: Real> {
    /// The feasible starting vector `z[i] = load(i) / U`, parallel to `members`.
    pub z: Vec<R>,
    /// Almost-integral vector after the greedy transfer.
    pub z_prime: Vec<R>,
    /// Facilities opened integrally.
    pub opened: Vec<usize>,
}

/// Greedily consolidate the opening mass of a dense cluster onto its
/// cheapest members (by `f_i + U * c(i, center)`), then resolve the single
/// fractional facility against the threshold: close at or below, open above.
pub fn round_dense<R: Real>(
    inst: &Instance<R>,
    frac: &FractionalSolution<R>,
    cluster: &Cluster<R>,
    threshold: R,
) -> DenseRounding<R> {
    debug_assert_eq!(cluster.kind, ClusterKind::Dense);
    let upper = R::of(f64::from(inst.upper()));
    let z: Vec<R> = cluster.members.iter().map(|&i| frac.facility_load(i) / upper).collect();
    let total: R = z.iter().copied().sum();

    let tiny = R::of(1e-12);
    let mut support: Vec<usize> = (0..cluster.members.len()).filter(|&k| z[k] > tiny).collect();
    support.sort_by(|&a, &b| {
        let ia = cluster.members[a];
        let ib = cluster.members[b];
        let wa = inst.open_cost(ia) + upper * inst.dist_fc(ia, cluster.center);
        let wb = inst.open_cost(ib) + upper * inst.dist_fc(ib, cluster.center);
        wa.partial_cmp(&wb).unwrap().then(ia.cmp(&ib))
    });

    let mut z_prime = vec![R::zero(); cluster.members.len()];
    let mut remaining = total;
    let mut fractional: Option<usize> = None;
    for &k in &support {
        if remaining <= tiny {
            break;
        }
        let take = remaining.min(R::one());
        z_prime[k] = take;
        remaining = remaining - take;
        if take < R::one() - R::of(1e-9) {
            fractional = Some(k);
        }
    }

    let mut opened: Vec<usize> = Vec::new();
    for (k, &zp) in z_prime.iter().enumerate() {
        let keep = if Some(k) == fractional { zp > threshold } else { zp > R::of(0.5) };
        if keep {
            opened.push(cluster.members[k]);
        }
    }
    opened.sort_unstable();
    DenseRounding { z, z_prime, opened }
}

/// Spread the cluster demand equally over the opened facilities.
pub fn distribute_dense_demand<R: Real>(
    cluster: &Cluster<R>,
    opened: &[usize],
) -> Result<Vec<(usize, R)>, TriCriteriaError> {
    if opened.is_empty() {
        return Err(TriCriteriaError::Internal(format!(
            "dense cluster at {} opened no facility",
            cluster.center
        )));
    }
    let share = cluster.demand / R::of_usize(opened.len());
    Ok(opened.iter().map(|&i| (i, share)).collect())
}

/// An integrally-opened, integrally-assigned solution with measured
/// violation factors.
#[derive(Debug, Clone)]
pub struct TriCriteriaSolution<R: Real> {
    pub open: Vec<usize>,
    /// `assign[j]` is the facility serving client `j`.
    pub assign: Vec<usize>,
    pub loads: Vec<u32>,
    pub measured_alpha: f64,
    pub measured_beta: f64,
    /// Cost of this solution on the original instance.
    pub cost: R,
    pub lp_objective: R,
    /// `1 + dense_threshold`, the analytic upper-bound factor.
    pub beta_target: f64,
}

impl<R: Real> TriCriteriaSolution<R> {
    pub fn as_solution(&self) -> solution::Solution {
        solution::Solution { open: self.open.iter().copied().collect(), assign: self.assign.clone() }
    }

    /// Lowest integral load compatible with the rounding guarantee.
    pub fn load_floor(ell: f64, lower: u32) -> u32 {
        ((1.0 - 1.0 / ell) * f64::from(lower)).floor() as u32
    }
}

/// Solve the LP and round it. Fails with [`TriCriteriaError::AlphaTooSmall`]
/// when the integral loads cannot stay above L/2 on every open facility.
pub fn build_tricriteria<R: Real>(
    inst: &Instance<R>,
    params: &TriParams<R>,
) -> Result<TriCriteriaSolution<R>, TriCriteriaError> {
    params.validate()?;
    let lp_problem = lp::build_relaxation(inst)?;
    let frac = lp::solve_lp(&lp_problem)?;
    build_from_fraction(inst, &frac, params)
}

/// The rounding stage alone, reusable when the LP solution is already at hand.
pub fn build_from_fraction<R: Real>(
    inst: &Instance<R>,
    frac: &FractionalSolution<R>,
    params: &TriParams<R>,
) -> Result<TriCriteriaSolution<R>, TriCriteriaError> {
    params.validate()?;
    let nc = inst.num_clients();
    let lower = inst.lower();
    let upper = inst.upper();
    let beta_target = params.beta_target();

    let centers = sparsify(inst, frac, params.ell);
    let clusters = form_clusters(inst, frac, &centers);

    let mut weights: Vec<(usize, usize, R)> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for cluster in &clusters {
        match cluster.kind {
            ClusterKind::Sparse => {
                let target = round_sparse(inst, frac, cluster, params.ell)?;
                open.push(target);
                for (j, &p) in cluster.phi.iter().enumerate() {
                    if p > R::zero() {
                        weights.push((j, target, p));
                    }
                }
            }
            ClusterKind::Dense => {
                let rounding = round_dense(inst, frac, cluster, params.dense_threshold);
                let capacity = beta_target
                    * R::of(f64::from(upper))
                    * R::of_usize(rounding.opened.len());
                if cluster.demand > capacity + R::FEAS_TOL {
                    return Err(TriCriteriaError::Internal(format!(
                        "dense cluster at {} keeps demand {} above capacity {}",
                        cluster.center, cluster.demand, capacity
                    )));
                }
                let loads = distribute_dense_demand(cluster, &rounding.opened)?;
                open.extend(rounding.opened.iter().copied());
                for (i, load) in loads {
                    let share = load / cluster.demand;
                    for (j, &p) in cluster.phi.iter().enumerate() {
                        if p > R::zero() {
                            weights.push((j, i, share * p));
                        }
                    }
                }
            }
        }
    }
    open.sort_unstable();
    open.dedup();

    // Each client's mass equals its LP coverage (>= 1); rescale to exactly 1
    // so the transportation step sees unit clients.
    let mut mass = vec![R::zero(); nc];
    for &(j, _, w) in &weights {
        mass[j] = mass[j] + w;
    }
    for (j, &m) in mass.iter().enumerate() {
        if m < R::one() - R::FEAS_TOL {
            return Err(TriCriteriaError::Internal(format!(
                "client {j} keeps only {m} mass after clustering"
            )));
        }
    }
    for (j, _, w) in weights.iter_mut() {
        *w = *w / mass[*j];
    }

    // Integral loads must end up strictly above L/2 for the repair stage;
    // ask the flow for floor(L/2) + 1 per facility whenever the client count
    // supports it, and never more than the rounding's own guarantee.
    let m = open.len();
    let alpha_floor = u64::from(lower) / 2 + 1;
    let avg_floor = nc as u64 / m as u64;
    let lower_flow = alpha_floor.min(avg_floor);
    let upper_flow = (beta_target.as_f64() * f64::from(upper) - 1e-9).ceil().max(1.0);

    let assignment = FractionalAssignment { open: open.clone(), weights };
    let mut sol =
        integralize_assignment(inst, &assignment, lower_flow as f64, upper_flow)?;

    // A facility left without clients is simply not opened.
    let loads_all = sol.loads(inst.num_facilities());
    sol.open.retain(|&i| loads_all[i] > 0);

    let loads: Vec<u32> = sol.open.iter().map(|&i| loads_all[i]).collect();
    let min_load = loads.iter().copied().min().unwrap_or(0);
    let max_load = loads.iter().copied().max().unwrap_or(0);
    let measured_alpha = f64::from(min_load) / f64::from(lower);
    let measured_beta = f64::from(max_load) / f64::from(upper);
    let cost = solution::cost(inst, &sol)
        .map_err(|e| TriCriteriaError::Internal(format!("rounded solution invalid: {e}")))?;

    if measured_alpha <= 0.5 {
        return Err(TriCriteriaError::AlphaTooSmall { alpha: measured_alpha });
    }

    Ok(TriCriteriaSolution {
        open: sol.open.iter().copied().collect(),
        assign: sol.assign,
        loads,
        measured_alpha,
        measured_beta,
        cost,
        lp_objective: frac.objective,
        beta_target: beta_target.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;
    use crate::lp::{build_relaxation, solve_lp};

    fn t1_frac() -> (Instance<f64>, FractionalSolution<f64>) {
        let inst = t1::<f64>();
        let frac = solve_lp(&build_relaxation(&inst).unwrap()).unwrap();
        (inst, frac)
    }

    #[test]
    fn sparsify_keeps_far_apart_clients() {
        // Two clients 100 apart, each with a nearby facility: both survive.
        let inst = Instance::<f64>::from_points(
            &[("f0".into(), 1.0, [0.0, 0.0]), ("f1".into(), 1.0, [100.0, 0.0])],
            &[("a".into(), [1.0, 0.0]), ("b".into(), [99.0, 0.0])],
            1,
            1,
        )
        .unwrap();
        let frac = solve_lp(&build_relaxation(&inst).unwrap()).unwrap();
        assert_eq!(sparsify(&inst, &frac, 2.01), vec![0, 1]);
    }

    #[test]
    fn sparsify_merges_colocated_clients() {
        let inst = Instance::<f64>::from_points(
            &[("f0".into(), 1.0, [0.0, 0.0]), ("f1".into(), 1.0, [1.0, 0.0])],
            &[("a".into(), [0.5, 0.0]), ("b".into(), [0.5, 0.0])],
            1,
            2,
        )
        .unwrap();
        let frac = solve_lp(&build_relaxation(&inst).unwrap()).unwrap();
        let centers = sparsify(&inst, &frac, 2.01);
        assert_eq!(centers.len(), 1, "co-located clients collapse to one center");
    }

    #[test]
    fn separation_property_on_t1() {
        let (inst, frac) = t1_frac();
        let ell = 2.01;
        let centers = sparsify(&inst, &frac, ell);
        for (a, &ca) in centers.iter().enumerate() {
            for &cb in centers.iter().skip(a + 1) {
                let ca_cost = lp::avg_connection_cost(&inst, &frac, ca).unwrap();
                let cb_cost = lp::avg_connection_cost(&inst, &frac, cb).unwrap();
                let sep = 2.0 * ell * ca_cost.max(cb_cost);
                assert!(
                    inst.dist_cc(ca, cb) > sep,
                    "centers {ca} and {cb} too close: {} <= {sep}",
                    inst.dist_cc(ca, cb)
                );
            }
        }
    }

    #[test]
    fn clusters_partition_facilities() {
        let (inst, frac) = t1_frac();
        let centers = sparsify(&inst, &frac, 2.01);
        let clusters = form_clusters(&inst, &frac, &centers);
        let mut seen = vec![false; inst.num_facilities()];
        for cluster in &clusters {
            for &i in &cluster.members {
                assert!(!seen[i], "facility {i} appears in two clusters");
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn single_center_takes_everything() {
        let inst = Instance::<f64>::from_points(
            &[("f0".into(), 1.0, [0.0, 0.0]), ("f1".into(), 1.0, [3.0, 0.0])],
            &[("a".into(), [1.0, 0.0])],
            1,
            1,
        )
        .unwrap();
        let frac = solve_lp(&build_relaxation(&inst).unwrap()).unwrap();
        let clusters = form_clusters(&inst, &frac, &[0]);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].members, vec![0, 1]);
    }

    #[test]
    fn clusters_split_by_proximity() {
        // Facilities at 0 and 10, centers at 1 and 9.
        let inst = Instance::<f64>::from_points(
            &[("f0".into(), 1.0, [0.0, 0.0]), ("f1".into(), 1.0, [10.0, 0.0])],
            &[("a".into(), [1.0, 0.0]), ("b".into(), [9.0, 0.0])],
            1,
            1,
        )
        .unwrap();
        let frac = solve_lp(&build_relaxation(&inst).unwrap()).unwrap();
        let clusters = form_clusters(&inst, &frac, &[0, 1]);
        assert_eq!(clusters[0].members, vec![0]);
        assert_eq!(clusters[1].members, vec![1]);
    }

    #[test]
    fn nearness_lemma_holds_on_t1() {
        // For i in the cluster of center jc and any client j:
        // c(i, jc) <= c(i, j) + 2 * ell * avg_cost(j).
        let (inst, frac) = t1_frac();
        let ell = 2.01;
        let centers = sparsify(&inst, &frac, ell);
        let clusters = form_clusters(&inst, &frac, &centers);
        for cluster in &clusters {
            for &i in &cluster.members {
                for j in 0..inst.num_clients() {
                    let avg = lp::avg_connection_cost(&inst, &frac, j).unwrap();
                    assert!(
                        inst.dist_fc(i, cluster.center)
                            <= inst.dist_fc(i, j) + 2.0 * ell * avg + 1e-9
                    );
                }
            }
        }
    }

    #[test]
    fn close_centers_have_comparable_costs_on_t1() {
        // Whenever c(j, jc) <= ell * avg(jc) for a center jc, avg(jc) <= 2 avg(j).
        let (inst, frac) = t1_frac();
        let ell = 2.01;
        for &jc in &sparsify(&inst, &frac, ell) {
            let avg_c = lp::avg_connection_cost(&inst, &frac, jc).unwrap();
            for j in 0..inst.num_clients() {
                if inst.dist_cc(j, jc) <= ell * avg_c {
                    let avg_j = lp::avg_connection_cost(&inst, &frac, j).unwrap();
                    assert!(avg_c <= 2.0 * avg_j + 1e-9);
                }
            }
        }
    }

    #[test]
    fn sparse_rounding_picks_cheapest_in_ball() {
        // Two co-located facilities with costs 5 and 3; the cheaper opens.
        let inst = Instance::<f64>::from_points(
            &[("f0".into(), 5.0, [0.0, 0.0]), ("f1".into(), 3.0, [0.0, 0.0])],
            &[("a".into(), [0.1, 0.0]), ("b".into(), [0.0, 0.1])],
            1,
            2,
        )
        .unwrap();
        let frac = solve_lp(&build_relaxation(&inst).unwrap()).unwrap();
        let centers = sparsify(&inst, &frac, 2.01);
        let clusters = form_clusters(&inst, &frac, &centers);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].kind, ClusterKind::Sparse);
        let target = round_sparse(&inst, &frac, &clusters[0], 2.01).unwrap();
        assert_eq!(target, 1);
    }

    #[test]
    fn dense_rounding_thresholds_the_fractional_tail() {
        // Hand-built cluster: three facilities with loads 1.0, 1.0, 0.4 in
        // units of U. The tail closes at threshold 0.5 and opens at 0.3.
        let inst = Instance::<f64>::from_points(
            &[
                ("f0".into(), 0.0, [0.0, 0.0]),
                ("f1".into(), 1.0, [0.0, 0.0]),
                ("f2".into(), 2.0, [0.0, 0.0]),
            ],
            &[("a".into(), [0.0, 0.0])],
            1,
            1,
        )
        .unwrap();
        let cluster = Cluster {
            center: 0,
            members: vec![0, 1, 2],
            demand: 2.4,
            phi: vec![2.4],
            kind: ClusterKind::Dense,
        };
        let frac = FractionalLoads { loads: vec![1.0, 1.0, 0.4] }.into_solution(3, 1);
        let closed = round_dense(&inst, &frac, &cluster, 0.5);
        assert_eq!(closed.opened, vec![0, 1]);
        let opened = round_dense(&inst, &frac, &cluster, 0.3);
        assert_eq!(opened.opened, vec![0, 1, 2]);
        // Opening the tail inflates the weighted opening cost by at most 1/threshold.
        let weight = |k: usize| inst.open_cost(k) + 1.0 * inst.dist_fc(k, 0);
        let cost_z: f64 = (0..3).map(|k| weight(k) * closed.z[k]).sum();
        let cost_hat: f64 = opened.opened.iter().map(|&k| weight(k)).sum();
        assert!(cost_hat <= cost_z / 0.3 + 1e-9);
    }

    #[test]
    fn dense_rounding_keeps_integral_vectors() {
        let inst = Instance::<f64>::from_points(
            &[("f0".into(), 0.0, [0.0, 0.0]), ("f1".into(), 1.0, [0.0, 0.0])],
            &[("a".into(), [0.0, 0.0])],
            1,
            1,
        )
        .unwrap();
        let cluster = Cluster {
            center: 0,
            members: vec![0, 1],
            demand: 2.0,
            phi: vec![2.0],
            kind: ClusterKind::Dense,
        };
        let frac = FractionalLoads { loads: vec![1.0, 1.0] }.into_solution(2, 1);
        let r = round_dense(&inst, &frac, &cluster, 0.5);
        assert_eq!(r.opened, vec![0, 1]);
        assert_eq!(r.z, r.z_prime);
    }

    #[test]
    fn demand_distribution_splits_equally() {
        let cluster = Cluster {
            center: 0,
            members: vec![0, 1],
            demand: 10.0,
            phi: vec![10.0],
            kind: ClusterKind::Dense,
        };
        let loads = distribute_dense_demand(&cluster, &[0, 1]).unwrap();
        assert_eq!(loads, vec![(0, 5.0), (1, 5.0)]);
        let single = distribute_dense_demand(&cluster, &[1]).unwrap();
        assert_eq!(single, vec![(1, 10.0)]);
        assert!(distribute_dense_demand(&cluster, &[]).is_err());
    }

    #[test]
    fn single_facility_instance_opens_it() {
        let inst = Instance::<f64>::from_points(
            &[("f".into(), 1.0, [0.0, 0.0])],
            &[("a".into(), [1.0, 0.0]), ("b".into(), [0.0, 1.0]), ("c".into(), [1.0, 1.0])],
            2,
            3,
        )
        .unwrap();
        let tri = build_tricriteria(&inst, &TriParams::default()).unwrap();
        assert_eq!(tri.open, vec![0]);
        assert_eq!(tri.loads, vec![3]);
        assert!((tri.measured_alpha - 1.5).abs() < 1e-12);
        assert!((tri.measured_beta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t1_loads_within_tri_criteria_bounds() {
        let inst = t1::<f64>();
        let params = TriParams::default();
        let tri = build_tricriteria(&inst, &params).unwrap();
        let floor = TriCriteriaSolution::<f64>::load_floor(2.01, inst.lower());
        let ceil = (1.5 * f64::from(inst.upper())).ceil() as u32;
        for &load in &tri.loads {
            assert!(load >= floor, "load {load} under {floor}");
            assert!(load <= ceil, "load {load} over {ceil}");
        }
        assert!(tri.measured_alpha > 0.5);
    }

    #[test]
    fn t1_cost_within_lemma_factor() {
        let inst = t1::<f64>();
        let params = TriParams::<f64>::default();
        let tri = build_tricriteria(&inst, &params).unwrap();
        let factor = 10.0 * params.ell + 4.0;
        assert!(tri.cost <= factor * tri.lp_objective * (1.0 + 1e-6));
    }

    #[test]
    fn rejects_out_of_range_ell() {
        let inst = t1::<f64>();
        let params = TriParams { ell: 2.0, dense_threshold: 0.5 };
        assert!(matches!(
            build_tricriteria(&inst, &params),
            Err(TriCriteriaError::BadEll(_))
        ));
    }

    // Test-only helper to hand-build fractional solutions with given loads.
    struct FractionalLoads {
        loads: Vec<f64>,
    }

    impl FractionalLoads {
        fn into_solution(self, nf: usize, nc: usize) -> FractionalSolution<f64> {
            assert_eq!(nc, 1);
            FractionalSolution {
                num_facilities: nf,
                num_clients: nc,
                x: self.loads.clone(),
                y: vec![1.0; nf],
                objective: 0.0,
            }
        }
    }
}
