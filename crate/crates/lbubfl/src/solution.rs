//! Integral solutions and their evaluation: total cost and load-bound checks.

use std::collections::BTreeSet;

use crate::instance::Instance;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionError {
    AssignmentLength { got: usize, expected: usize },
    UnknownFacility { client: usize, facility: usize },
    AssignedToClosed { client: usize, facility: usize },
    OpenOutOfRange { facility: usize },
}

impl std::fmt::Display for SolutionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolutionError::AssignmentLength { got, expected } => {
                write!(f, "assignment covers {got} clients, instance has {expected}")
            }
            SolutionError::UnknownFacility { client, facility } => {
                write!(f, "client {client} assigned to unknown facility {facility}")
            }
            SolutionError::AssignedToClosed { client, facility } => {
                write!(f, "client {client} assigned to closed facility {facility}")
            }
            SolutionError::OpenOutOfRange { facility } => {
                write!(f, "open set contains unknown facility {facility}")
            }
        }
    }
}

impl std::error::Error for SolutionError {}

/// An integral solution: an open set and a total assignment of clients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub open: BTreeSet<usize>,
    /// `assign[j]` is the facility serving client `j`.
    pub assign: Vec<usize>,
}

impl Solution {
    pub fn empty() -> Self {
        Solution { open: BTreeSet::new(), assign: Vec::new() }
    }

    /// Per-facility client counts, indexed by facility.
    pub fn loads(&self, num_facilities: usize) -> Vec<u32> {
        let mut loads = vec![0u32; num_facilities];
        for &i in &self.assign {
            if i < num_facilities {
                loads[i] += 1;
            }
        }
        loads
    }

    pub fn validate<R: Real>(&self, inst: &Instance<R>) -> Result<(), SolutionError> {
        if self.assign.len() != inst.num_clients() {
            return Err(SolutionError::AssignmentLength {
                got: self.assign.len(),
                expected: inst.num_clients(),
            });
        }
        for &i in &self.open {
            if i >= inst.num_facilities() {
                return Err(SolutionError::OpenOutOfRange { facility: i });
            }
        }
        for (j, &i) in self.assign.iter().enumerate() {
            if i >= inst.num_facilities() {
                return Err(SolutionError::UnknownFacility { client: j, facility: i });
            }
            if !self.open.contains(&i) {
                return Err(SolutionError::AssignedToClosed { client: j, facility: i });
            }
        }
        Ok(())
    }
}

/// Total cost: opening costs of the open set plus connection distances.
pub fn cost<R: Real>(inst: &Instance<R>, sol: &Solution) -> Result<R, SolutionError> {
    sol.validate(inst)?;
    let mut total = R::zero();
    for &i in &sol.open {
        total = total + inst.open_cost(i);
    }
    for (j, &i) in sol.assign.iter().enumerate() {
        total = total + inst.dist_fc(i, j);
    }
    Ok(total)
}

/// Per-facility load report against scaled bounds `[ceil(alpha*L), floor(beta*U)]`.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// `(facility, load)` for every open facility.
    pub loads: Vec<(usize, u32)>,
    pub lower_limit: u32,
    pub upper_limit: u32,
    pub pass: bool,
    /// min load / L over open facilities (1.0 when the open set is empty).
    pub measured_alpha: f64,
    /// max load / U over open facilities (0.0 when the open set is empty).
    pub measured_beta: f64,
}

/// Check every open facility's load against `[ceil(alpha*L), floor(beta*U)]`
/// and report the measured violation factors.
pub fn check_bounds<R: Real>(
    inst: &Instance<R>,
    sol: &Solution,
    alpha: f64,
    beta: f64,
) -> BoundReport {
    let all_loads = sol.loads(inst.num_facilities());
    let lower_limit = (alpha * f64::from(inst.lower())).ceil() as u32;
    let upper_limit = (beta * f64::from(inst.upper())).floor() as u32;
    let mut loads = Vec::with_capacity(sol.open.len());
    let mut pass = true;
    let mut min_load = u32::MAX;
    let mut max_load = 0u32;
    for &i in &sol.open {
        let load = all_loads[i];
        min_load = min_load.min(load);
        max_load = max_load.max(load);
        if load < lower_limit || load > upper_limit {
            pass = false;
        }
        loads.push((i, load));
    }
    let (measured_alpha, measured_beta) = if sol.open.is_empty() {
        (1.0, 0.0)
    } else {
        (
            f64::from(min_load) / f64::from(inst.lower()),
            f64::from(max_load) / f64::from(inst.upper()),
        )
    };
    BoundReport { loads, lower_limit, upper_limit, pass, measured_alpha, measured_beta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;

    fn one_facility_two_clients() -> Instance<f64> {
        Instance::from_points(
            &[("f".into(), 3.0, [0.0, 0.0])],
            &[("a".into(), [1.0, 0.0]), ("b".into(), [-1.0, 0.0])],
            1,
            2,
        )
        .unwrap()
    }

    #[test]
    fn cost_sums_openings_and_connections() {
        let inst = one_facility_two_clients();
        let sol = Solution { open: [0].into(), assign: vec![0, 0] };
        assert_eq!(cost(&inst, &sol).unwrap(), 5.0);
    }

    #[test]
    fn empty_solution_costs_nothing() {
        let inst =
            Instance::<f64>::from_points(&[("f".into(), 3.0, [0.0, 0.0])], &[], 1, 2).unwrap();
        assert_eq!(cost(&inst, &Solution::empty()).unwrap(), 0.0);
    }

    #[test]
    fn cost_rejects_bad_assignments() {
        let inst = one_facility_two_clients();
        let sol = Solution { open: [0].into(), assign: vec![0, 7] };
        assert!(matches!(
            cost(&inst, &sol),
            Err(SolutionError::UnknownFacility { client: 1, facility: 7 })
        ));
        let sol = Solution { open: BTreeSet::new(), assign: vec![0, 0] };
        assert!(matches!(cost(&inst, &sol), Err(SolutionError::AssignedToClosed { .. })));
    }

    #[test]
    fn bounds_report_examples() {
        // L=2, U=3, one open facility serving both clients.
        let inst = Instance::<f64>::from_points(
            &[("f".into(), 0.0, [0.0, 0.0])],
            &[("a".into(), [0.0, 0.0]), ("b".into(), [0.0, 0.0])],
            2,
            3,
        )
        .unwrap();
        let sol = Solution { open: [0].into(), assign: vec![0, 0] };
        let report = check_bounds(&inst, &sol, 1.0, 1.0);
        assert!(report.pass);
        assert_eq!(report.measured_alpha, 1.0);
        assert!((report.measured_beta - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_failure_detected() {
        // L=4 but the facility serves only 3 clients.
        let inst = Instance::<f64>::from_points(
            &[("f".into(), 0.0, [0.0, 0.0])],
            &[
                ("a".into(), [0.0, 0.0]),
                ("b".into(), [0.0, 0.0]),
                ("c".into(), [0.0, 0.0]),
            ],
            4,
            9,
        )
        .unwrap();
        let sol = Solution { open: [0].into(), assign: vec![0, 0, 0] };
        let report = check_bounds(&inst, &sol, 1.0, 1.0);
        assert!(!report.pass);
        assert!(report.measured_alpha < 1.0);
    }

    #[test]
    fn cost_is_additive_over_disjoint_parts() {
        // Two far-apart facility/client groups evaluated jointly and separately.
        let inst = Instance::<f64>::from_points(
            &[("f0".into(), 2.0, [0.0, 0.0]), ("f1".into(), 5.0, [100.0, 0.0])],
            &[("a".into(), [1.0, 0.0]), ("b".into(), [101.0, 0.0])],
            1,
            1,
        )
        .unwrap();
        let joint = Solution { open: [0, 1].into(), assign: vec![0, 1] };
        let total = cost(&inst, &joint).unwrap();
        assert!((total - (2.0 + 1.0 + 5.0 + 1.0)).abs() < 1e-12);
    }
}
