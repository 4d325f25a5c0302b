//! Dense two-phase primal simplex for variables with `[lower, upper]` bounds.
//!
//! Small by design: constraint rows become slack/surplus columns, `>=` rows
//! get phase-1 artificials, and nonbasic variables may sit at either bound.
//! Pricing is Dantzig's rule; after a run of degenerate steps the solver
//! falls back to Bland's rule until it makes progress again.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Row<R> {
    pub coeffs: Vec<(usize, R)>,
    pub rel: Rel,
    pub rhs: R,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplexError {
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl std::fmt::Display for SimplexError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimplexError::Infeasible => write!(f, "infeasible"),
            SimplexError::Unbounded => write!(f, "unbounded"),
            SimplexError::IterationLimit => write!(f, "iteration limit reached"),
        }
    }
}

impl std::error::Error for SimplexError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
}

/// Minimize `objective . v` subject to the rows and `0 <= v[j] <= upper[j]`.
/// Returns the optimal structural values.
pub fn minimize<R: Real>(
    num_vars: usize,
    objective: &[R],
    upper: &[R],
    rows: &[Row<R>],
) -> Result<Vec<R>, SimplexError> {
    Tableau::new(num_vars, objective, upper, rows).solve()
}

struct Tableau<R: Real> {
    m: usize,
    total: usize,
    structural: usize,
    tab: Vec<R>,
    values: Vec<R>,
    basis: Vec<usize>,
    status: Vec<Status>,
    ub: Vec<R>,
    cost: Vec<R>,
    reduced: Vec<R>,
    artificial_start: usize,
    objective: Vec<R>,
}

impl<R: Real> Tableau<R> {
    fn new(num_vars: usize, objective: &[R], upper: &[R], rows: &[Row<R>]) -> Self {
        let m = rows.len();
        let slack_start = num_vars;
        // Count artificials: one per >= row with positive rhs after
        // normalizing rows so every rhs is non-negative.
        let mut norm: Vec<(Vec<(usize, R)>, Rel, R)> = Vec::with_capacity(m);
        for row in rows {
            if row.rhs < R::zero() {
                let coeffs = row.coeffs.iter().map(|&(j, a)| (j, -a)).collect();
                let rel = match row.rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                };
                norm.push((coeffs, rel, -row.rhs));
            } else {
                norm.push((row.coeffs.clone(), row.rel, row.rhs));
            }
        }
        let needs_artificial: Vec<bool> =
            norm.iter().map(|(_, rel, _)| matches!(rel, Rel::Ge)).collect();
        let artificial_start = slack_start + m;
        let num_art = needs_artificial.iter().filter(|&&b| b).count();
        let total = artificial_start + num_art;

        let mut tab = vec![R::zero(); m * total];
        let mut ub = vec![R::infinity(); total];
        ub[..num_vars].copy_from_slice(&upper[..num_vars]);
        let mut basis = vec![0usize; m];
        let mut status = vec![Status::AtLower; total];
        let mut values = vec![R::zero(); m];

        let mut next_art = artificial_start;
        for (r, (coeffs, rel, rhs)) in norm.iter().enumerate() {
            let row = &mut tab[r * total..(r + 1) * total];
            for &(j, a) in coeffs {
                row[j] = row[j] + a;
            }
            match rel {
                Rel::Le => {
                    row[slack_start + r] = R::one();
                    basis[r] = slack_start + r;
                }
                Rel::Ge => {
                    row[slack_start + r] = -R::one();
                    row[next_art] = R::one();
                    basis[r] = next_art;
                    next_art += 1;
                }
            }
            status[basis[r]] = Status::Basic;
            values[r] = *rhs;
        }

        let mut full_objective = vec![R::zero(); total];
        full_objective[..num_vars].copy_from_slice(&objective[..num_vars]);

        Tableau {
            m,
            total,
            structural: num_vars,
            tab,
            values,
            basis,
            status,
            ub,
            cost: Vec::new(),
            reduced: Vec::new(),
            artificial_start,
            objective: full_objective,
        }
    }

    fn solve(mut self) -> Result<Vec<R>, SimplexError> {
        if self.artificial_start < self.total {
            let mut phase1 = vec![R::zero(); self.total];
            for j in self.artificial_start..self.total {
                phase1[j] = R::one();
            }
            self.cost = phase1;
            self.price_from_scratch();
            self.run(true)?;
            let infeas: R = (0..self.m)
                .filter(|&r| self.basis[r] >= self.artificial_start)
                .map(|r| self.values[r])
                .sum();
            if infeas > R::FEAS_TOL {
                return Err(SimplexError::Infeasible);
            }
            // Pin artificials to zero for phase 2; any still in the basis sit
            // at value ~0 and will be pushed out by the first touch.
            for j in self.artificial_start..self.total {
                self.ub[j] = R::zero();
            }
        }
        self.cost = self.objective.clone();
        self.price_from_scratch();
        self.run(false)?;
        let mut out = vec![R::zero(); self.structural];
        for j in 0..self.structural {
            let v = match self.status[j] {
                Status::AtLower => R::zero(),
                Status::AtUpper => self.ub[j],
                Status::Basic => {
                    let r = self.basis.iter().position(|&b| b == j).expect("basic var row");
                    self.values[r]
                }
            };
            out[j] = v.max(R::zero()).min(self.ub[j]);
        }
        Ok(out)
    }

    fn price_from_scratch(&mut self) {
        let mut reduced = self.cost.clone();
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]];
            if cb == R::zero() {
                continue;
            }
            let row = &self.tab[r * self.total..(r + 1) * self.total];
            for (j, rj) in reduced.iter_mut().enumerate() {
                *rj = *rj - cb * row[j];
            }
        }
        self.reduced = reduced;
    }

    fn entering(&self, phase1: bool, bland: bool) -> Option<usize> {
        let tol = R::FEAS_TOL;
        let mut best: Option<(usize, R)> = None;
        for j in 0..self.total {
            if self.status[j] == Status::Basic {
                continue;
            }
            if !phase1 && j >= self.artificial_start {
                continue;
            }
            let r = self.reduced[j];
            let score = match self.status[j] {
                Status::AtLower => -r,
                Status::AtUpper => r,
                Status::Basic => unreachable!(),
            };
            if score > tol {
                if bland {
                    return Some(j);
                }
                match best {
                    Some((_, s)) if s >= score => {}
                    _ => best = Some((j, score)),
                }
            }
        }
        best.map(|(j, _)| j)
    }

    fn run(&mut self, phase1: bool) -> Result<(), SimplexError> {
        let max_iters = 200 * (self.m + self.total) + 10_000;
        let mut bland = false;
        let mut stalled = 0usize;
        for _ in 0..max_iters {
            let Some(j) = self.entering(phase1, bland) else {
                return Ok(());
            };
            let sigma = if self.status[j] == Status::AtLower { R::one() } else { -R::one() };

            // Ratio test: the entering variable moves by t >= 0 in direction
            // sigma until it hits its own far bound or drives a basic
            // variable to one of its bounds. Ties keep the largest pivot.
            let mut t_best = self.ub[j]; // own-bound flip distance (lb is 0)
            let mut leave: Option<(usize, Status)> = None;
            let mut pivot_mag = R::zero();
            for r in 0..self.m {
                let a = sigma * self.tab[r * self.total + j];
                if a.abs() <= R::PIVOT_TOL {
                    continue;
                }
                let (limit, hits) = if a > R::zero() {
                    (self.values[r] / a, Status::AtLower)
                } else {
                    let ub_b = self.ub[self.basis[r]];
                    if ub_b == R::infinity() {
                        continue;
                    }
                    ((ub_b - self.values[r]) / -a, Status::AtUpper)
                };
                let limit = limit.max(R::zero());
                let strictly_better = limit < t_best - R::PIVOT_TOL;
                let tie_with_bigger_pivot =
                    leave.is_some() && limit <= t_best + R::PIVOT_TOL && a.abs() > pivot_mag;
                if strictly_better || tie_with_bigger_pivot {
                    t_best = limit;
                    leave = Some((r, hits));
                    pivot_mag = a.abs();
                }
            }

            if t_best == R::infinity() {
                return Err(SimplexError::Unbounded);
            }
            if t_best <= R::PIVOT_TOL {
                stalled += 1;
                if stalled > 64 {
                    bland = true;
                }
            } else {
                stalled = 0;
                bland = false;
            }

            match leave {
                None => {
                    // Bound flip: move all the way to the opposite bound.
                    let t = t_best;
                    for r in 0..self.m {
                        let a = self.tab[r * self.total + j];
                        if a != R::zero() {
                            self.values[r] = self.values[r] - sigma * t * a;
                        }
                    }
                    self.status[j] = match self.status[j] {
                        Status::AtLower => Status::AtUpper,
                        Status::AtUpper => Status::AtLower,
                        Status::Basic => unreachable!(),
                    };
                }
                Some((p, hits)) => {
                    let t = t_best;
                    for r in 0..self.m {
                        let a = self.tab[r * self.total + j];
                        if a != R::zero() {
                            self.values[r] = self.values[r] - sigma * t * a;
                        }
                    }
                    let entering_value = if sigma > R::zero() { t } else { self.ub[j] - t };
                    let leaving = self.basis[p];
                    self.status[leaving] = hits;
                    self.status[j] = Status::Basic;
                    self.basis[p] = j;
                    self.values[p] = entering_value;
                    self.eliminate(p, j);
                }
            }
        }
        Err(SimplexError::IterationLimit)
    }

    /// Gaussian elimination making column `j` the unit vector for row `p`.
    fn eliminate(&mut self, p: usize, j: usize) {
        let total = self.total;
        let pivot = self.tab[p * total + j];
        debug_assert!(pivot.abs() > R::PIVOT_TOL);
        let inv = R::one() / pivot;
        {
            let row = &mut self.tab[p * total..(p + 1) * total];
            for a in row.iter_mut() {
                *a = *a * inv;
            }
            row[j] = R::one();
        }
        let (before, rest) = self.tab.split_at_mut(p * total);
        let (prow, after) = rest.split_at_mut(total);
        let apply = |row: &mut [R]| {
            let f = row[j];
            if f == R::zero() {
                return;
            }
            for (a, &pa) in row.iter_mut().zip(prow.iter()) {
                *a = *a - f * pa;
            }
            row[j] = R::zero();
        };
        for chunk in before.chunks_exact_mut(total) {
            apply(chunk);
        }
        for chunk in after.chunks_exact_mut(total) {
            apply(chunk);
        }
        let f = self.reduced[j];
        if f != R::zero() {
            for (a, &pa) in self.reduced.iter_mut().zip(prow.iter()) {
                *a = *a - f * pa;
            }
            self.reduced[j] = R::zero();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[(usize, f64)], rel: Rel, rhs: f64) -> Row<f64> {
        Row { coeffs: coeffs.to_vec(), rel, rhs }
    }

    #[test]
    fn simple_bounded_min() {
        // min -x0 - 2 x1 s.t. x0 + x1 <= 1.5, x in [0,1]^2 => x = (0.5, 1).
        let v = minimize(
            2,
            &[-1.0, -2.0],
            &[1.0, 1.0],
            &[row(&[(0, 1.0), (1, 1.0)], Rel::Le, 1.5)],
        )
        .unwrap();
        assert!((v[0] - 0.5).abs() < 1e-9);
        assert!((v[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ge_rows_need_phase_one() {
        // min x0 + x1 s.t. x0 + x1 >= 1, x0 >= 0.25 => cost 1.
        let v = minimize(
            2,
            &[1.0, 1.0],
            &[1.0, 1.0],
            &[
                row(&[(0, 1.0), (1, 1.0)], Rel::Ge, 1.0),
                row(&[(0, 1.0)], Rel::Ge, 0.25),
            ],
        )
        .unwrap();
        assert!((v[0] + v[1] - 1.0).abs() < 1e-9);
        assert!(v[0] >= 0.25 - 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x0 <= 1 but x0 >= 2.
        let err = minimize(
            1,
            &[1.0],
            &[1.0],
            &[row(&[(0, 1.0)], Rel::Ge, 2.0)],
        )
        .unwrap_err();
        assert_eq!(err, SimplexError::Infeasible);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x0 <= -0.5 means x0 >= 0.5.
        let v = minimize(1, &[1.0], &[1.0], &[row(&[(0, -1.0)], Rel::Le, -0.5)]).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn equality_via_two_rows() {
        // min 2x0 + x1 s.t. x0 + x1 = 1 (as <= and >=) => x = (0, 1).
        let rows = [
            row(&[(0, 1.0), (1, 1.0)], Rel::Le, 1.0),
            row(&[(0, 1.0), (1, 1.0)], Rel::Ge, 1.0),
        ];
        let v = minimize(2, &[2.0, 1.0], &[1.0, 1.0], &rows).unwrap();
        assert!(v[0].abs() < 1e-9);
        assert!((v[1] - 1.0).abs() < 1e-9);
    }
}
