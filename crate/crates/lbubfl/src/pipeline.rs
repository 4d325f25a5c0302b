//! End-to-end solver: tri-criteria rounding, the instance chain, the
//! capacitated solve and the lower-bound repair, composed with timings,
//! measured violation factors and the invariant log.

use std::time::Instant;

use crate::cfl;
use crate::instance::Instance;
use crate::lp::LpError;
use crate::mcflow::{integralize_assignment, FractionalAssignment};
use crate::scalar::Real;
use crate::solution::{self, Solution};
use crate::transform::{self, TransformError};
use crate::treefix::{self, InvariantLog, TreefixError};
use crate::tricriteria::{self, TriCriteriaError, TriParams};

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineError {
    /// The distance data is not a metric.
    Metric { violations: usize },
    Infeasible(String),
    Parameter(String),
    /// The rounded solution left some facility at or below L/2 clients.
    AlphaAbort { alpha: f64 },
    Internal(String),
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PipelineError::Metric { violations } => {
                write!(f, "instance is not metric ({violations} violations)")
            }
            PipelineError::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            PipelineError::Parameter(msg) => write!(f, "bad parameter: {msg}"),
            PipelineError::AlphaAbort { alpha } => {
                write!(f, "rounded lower-bound factor {alpha:.4} <= 1/2; aborting")
            }
            PipelineError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<TriCriteriaError> for PipelineError {
    fn from(e: TriCriteriaError) -> Self {
        match e {
            TriCriteriaError::BadEll(v) => PipelineError::Parameter(format!("ell = {v}")),
            TriCriteriaError::BadThreshold(v) => {
                PipelineError::Parameter(format!("dense threshold = {v}"))
            }
            TriCriteriaError::Lp(LpError::InfeasiblePrecheck { clients, lower, upper, facilities }) => {
                PipelineError::Infeasible(format!(
                    "no k with k*{lower} <= {clients} <= k*{upper}, k <= {facilities}"
                ))
            }
            TriCriteriaError::AlphaTooSmall { alpha } => PipelineError::AlphaAbort { alpha },
            other => PipelineError::Internal(other.to_string()),
        }
    }
}

impl From<TransformError> for PipelineError {
    fn from(e: TransformError) -> Self {
        PipelineError::Internal(e.to_string())
    }
}

impl From<TreefixError> for PipelineError {
    fn from(e: TreefixError) -> Self {
        PipelineError::Internal(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineParams<R: Real> {
    pub tri: TriParams<R>,
    /// Override for the opening-cost scale of the capacitated instance;
    /// defaults to the formula evaluated at the measured alpha.
    pub delta_override: Option<f64>,
    /// Re-run the final assignment flow over the final open set.
    pub post_flow: bool,
    /// Run the expensive extra checks and fail on any violation.
    pub check_invariants: bool,
    /// Keep the intermediate stage artifacts in the report.
    pub collect_trace: bool,
}

impl<R: Real> Default for PipelineParams<R> {
    fn default() -> Self {
        PipelineParams {
            tri: TriParams::default(),
            delta_override: None,
            post_flow: false,
            check_invariants: false,
            collect_trace: false,
        }
    }
}

/// Intermediate artifacts retained when tracing is on.
#[derive(Debug, Clone)]
pub struct TraceArtifacts<R: Real> {
    pub tri: Option<tricriteria::TriCriteriaSolution<R>>,
    pub i1: Option<transform::I1Instance<R>>,
    pub i2: Option<transform::I2Instance>,
    pub icap: Option<transform::CflInstance<R>>,
    pub ascap: Option<cfl::CflSolution<R>>,
    pub repair: Option<treefix::RepairTrace>,
}

impl<R: Real> Default for TraceArtifacts<R> {
    fn default() -> Self {
        TraceArtifacts { tri: None, i1: None, i2: None, icap: None, ascap: None, repair: None }
    }
}

/// Violation factors of one stage, as measured from actual loads.
#[derive(Debug, Clone, Copy)]
pub struct StageFactors {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineReport<R: Real> {
    pub solution: Solution,
    pub cost: R,
    pub lp_objective: R,
    pub tri_cost: R,
    pub tri_open: usize,
    pub tri_factors: StageFactors,
    pub final_factors: StageFactors,
    pub delta: f64,
    /// Identifier of the capacitated solver backing the repair stage.
    pub cfl_solver: &'static str,
    /// True when the rounded solution already met every lower bound with a
    /// single facility, skipping the repair machinery.
    pub repair_skipped: bool,
    pub invariants: InvariantLog,
    /// `(stage, milliseconds)` in execution order.
    pub timings: Vec<(&'static str, f64)>,
    pub trace: TraceArtifacts<R>,
}

pub fn solve_instance<R: Real>(
    inst: &Instance<R>,
    params: &PipelineParams<R>,
) -> Result<PipelineReport<R>, PipelineError> {
    params.tri.validate().map_err(PipelineError::from)?;
    let mut timings: Vec<(&'static str, f64)> = Vec::new();
    let clock = Instant::now();

    let metric = inst.validate_metric();
    if !metric.is_metric() {
        return Err(PipelineError::Metric {
            violations: metric.diagonal.len() + metric.symmetry.len() + metric.triangle.len(),
        });
    }
    if inst.feasible_open_count().is_none() {
        return Err(PipelineError::Infeasible(format!(
            "no k with k*{} <= {} <= k*{}, k <= {}",
            inst.lower(),
            inst.num_clients(),
            inst.upper(),
            inst.num_facilities()
        )));
    }
    timings.push(("validate", ms(&clock)));

    if inst.num_clients() == 0 {
        return Ok(PipelineReport {
            solution: Solution::empty(),
            cost: R::zero(),
            lp_objective: R::zero(),
            tri_cost: R::zero(),
            tri_open: 0,
            tri_factors: StageFactors { alpha: 1.0, beta: 0.0 },
            final_factors: StageFactors { alpha: 1.0, beta: 0.0 },
            delta: 0.0,
            cfl_solver: "local-search",
            repair_skipped: true,
            invariants: InvariantLog::default(),
            timings,
            trace: TraceArtifacts::default(),
        });
    }

    let clock = Instant::now();
    let tri = tricriteria::build_tricriteria(inst, &params.tri)?;
    timings.push(("tricriteria", ms(&clock)));
    let tri_factors = StageFactors { alpha: tri.measured_alpha, beta: tri.measured_beta };
    let mut trace = TraceArtifacts::default();
    if params.collect_trace {
        trace.tri = Some(tri.clone());
    }

    let clock = Instant::now();
    let delta = match params.delta_override {
        Some(d) if d > 0.0 => d,
        Some(d) => return Err(PipelineError::Parameter(format!("delta = {d}"))),
        None => transform::delta_default(tri.measured_alpha.min(1.0))
            .map_err(|e| PipelineError::Internal(e.to_string()))?,
    };

    let (mut final_solution, repair_skipped, invariants) = if tri.open.len() < 2 {
        // A single opened facility holds every client; the lower bound is
        // met because feasibility guarantees |C| >= L.
        let min_load = tri.loads.iter().copied().min().unwrap_or(0);
        if u64::from(min_load) < u64::from(inst.lower()) {
            return Err(PipelineError::Internal(format!(
                "single-facility rounding with load {min_load} below the lower bound"
            )));
        }
        (tri.as_solution(), true, InvariantLog::default())
    } else {
        let i1 = transform::to_i1(inst, &tri);
        let i2 = transform::to_i2(&i1, inst.lower());
        let icap = transform::to_icap(inst, &i2, R::of(delta))?;
        timings.push(("transform", ms(&clock)));

        let clock = Instant::now();
        let ascap = cfl::solve_cfl(inst, &icap);
        let ascap = cfl::normalize_self_service(inst, &icap, &ascap);
        timings.push(("cfl", ms(&clock)));

        let clock = Instant::now();
        let mut repair =
            treefix::repair_lower_bounds(inst, &i1, &icap, &ascap, tri.measured_beta)?;
        timings.push(("treefix", ms(&clock)));
        if params.collect_trace {
            trace.i1 = Some(i1.clone());
            trace.i2 = Some(i2.clone());
            trace.icap = Some(icap.clone());
            trace.ascap = Some(ascap.clone());
            trace.repair = Some(repair.trace.clone());
        }

        if params.check_invariants {
            let optimal = cfl::is_locally_optimal(inst, &icap, &ascap);
            repair.log.records.push(treefix::InvariantRecord {
                name: "cfl-locally-optimal",
                checked: 1,
                violations: if optimal {
                    Vec::new()
                } else {
                    vec!["normalized solution admits an improving move".into()]
                },
            });
        }
        (repair.solution, false, repair.log)
    };

    if params.post_flow && !final_solution.open.is_empty() {
        let clock = Instant::now();
        let loads = final_solution.loads(inst.num_facilities());
        let max_load = final_solution.open.iter().map(|&i| loads[i]).max().unwrap_or(0);
        let frac = FractionalAssignment {
            open: final_solution.open.iter().copied().collect(),
            weights: final_solution
                .assign
                .iter()
                .enumerate()
                .map(|(j, &i)| (j, i, R::one()))
                .collect(),
        };
        final_solution =
            integralize_assignment(inst, &frac, f64::from(inst.lower()), f64::from(max_load))
                .map_err(|e| PipelineError::Internal(format!("post flow: {e}")))?;
        timings.push(("post-flow", ms(&clock)));
    }

    let clock = Instant::now();
    let cost = solution::cost(inst, &final_solution)
        .map_err(|e| PipelineError::Internal(format!("final solution invalid: {e}")))?;
    let loads = final_solution.loads(inst.num_facilities());
    let open_loads: Vec<u32> = final_solution.open.iter().map(|&i| loads[i]).collect();
    let min_load = open_loads.iter().copied().min().unwrap_or(0);
    let max_load = open_loads.iter().copied().max().unwrap_or(0);
    if u64::from(min_load) < u64::from(inst.lower()) {
        return Err(PipelineError::Internal(format!(
            "final solution violates the lower bound: load {min_load} < {}",
            inst.lower()
        )));
    }
    let final_factors = StageFactors {
        alpha: f64::from(min_load) / f64::from(inst.lower()),
        beta: f64::from(max_load) / f64::from(inst.upper()),
    };
    timings.push(("evaluate", ms(&clock)));

    if params.check_invariants && !invariants.all_ok() {
        let broken: Vec<&str> = invariants
            .records
            .iter()
            .filter(|r| !r.ok())
            .map(|r| r.name)
            .collect();
        return Err(PipelineError::Internal(format!(
            "invariant violations: {}",
            broken.join(", ")
        )));
    }

    Ok(PipelineReport {
        solution: final_solution,
        cost,
        lp_objective: tri.lp_objective,
        tri_cost: tri.cost,
        tri_open: tri.open.len(),
        tri_factors,
        final_factors,
        delta,
        cfl_solver: "local-search",
        repair_skipped,
        invariants,
        timings,
        trace,
    })
}

fn ms(clock: &Instant) -> f64 {
    clock.elapsed().as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;

    #[test]
    fn t1_end_to_end_meets_lower_bounds() {
        let inst = t1::<f64>();
        let report = solve_instance(&inst, &PipelineParams::default()).unwrap();
        let check = solution::check_bounds(&inst, &report.solution, 1.0, 2.5);
        assert!(check.measured_alpha >= 1.0);
        assert!(report.invariants.all_ok());
        assert!(report.cost > 0.0);
        // The relaxation bounds the bound-respecting optimum from below; the
        // repaired solution may undercut it only by exceeding U.
        let max_load = check.loads.iter().map(|&(_, l)| l).max().unwrap();
        assert!(report.cost >= report.lp_objective || max_load > inst.upper());
    }

    #[test]
    fn rejects_non_metric_instances() {
        let dist = vec![
            0.0, 1.0, 5.0, //
            1.0, 0.0, 1.0, //
            5.0, 1.0, 0.0,
        ];
        let inst = Instance::<f64>::from_matrix(
            vec!["a".into(), "b".into()],
            vec!["c".into()],
            vec![0.0, 0.0],
            dist,
            1,
            1,
        )
        .unwrap();
        assert!(matches!(
            solve_instance(&inst, &PipelineParams::default()),
            Err(PipelineError::Metric { violations: 1 })
        ));
    }

    #[test]
    fn reports_infeasible_counting() {
        let facilities: Vec<(String, f64, [f64; 2])> =
            (0..2).map(|i| (format!("f{i}"), 1.0, [i as f64, 0.0])).collect();
        let clients: Vec<(String, [f64; 2])> =
            (0..7).map(|j| (format!("c{j}"), [j as f64, 1.0])).collect();
        let inst = Instance::<f64>::from_points(&facilities, &clients, 4, 5).unwrap();
        assert!(matches!(
            solve_instance(&inst, &PipelineParams::default()),
            Err(PipelineError::Infeasible(_))
        ));
    }

    #[test]
    fn bad_ell_is_a_parameter_error() {
        let inst = t1::<f64>();
        let params = PipelineParams {
            tri: TriParams { ell: 2.0, dense_threshold: 0.5 },
            ..PipelineParams::default()
        };
        assert!(matches!(
            solve_instance(&inst, &params),
            Err(PipelineError::Parameter(_))
        ));
    }

    #[test]
    fn post_flow_never_worsens_cost() {
        let inst = t1::<f64>();
        let base = solve_instance(&inst, &PipelineParams::default()).unwrap();
        let flowed = solve_instance(
            &inst,
            &PipelineParams { post_flow: true, ..PipelineParams::default() },
        )
        .unwrap();
        assert!(flowed.cost <= base.cost + 1e-9);
        let check = solution::check_bounds(&inst, &flowed.solution, 1.0, 2.5);
        assert!(check.measured_alpha >= 1.0);
    }

    #[test]
    fn empty_client_set_is_trivial() {
        let inst = Instance::<f64>::from_points(
            &[("f".into(), 1.0, [0.0, 0.0])],
            &[],
            1,
            1,
        )
        .unwrap();
        let report = solve_instance(&inst, &PipelineParams::default()).unwrap();
        assert!(report.solution.open.is_empty());
        assert_eq!(report.cost, 0.0);
    }
}
