//! The LP relaxation of the load-bounded facility location integer program:
//! assignment variables `x[i][j]`, opening variables `y[i]`, client coverage,
//! two-sided load coupling per facility, and `x <= y` linking rows, all
//! relaxed to `[0, 1]`.

use crate::instance::Instance;
use crate::scalar::Real;
use crate::simplex::{self, Rel, Row, SimplexError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpError {
    /// The counting precheck failed: no open-set size can serve the clients.
    InfeasiblePrecheck { clients: usize, lower: u32, upper: u32, facilities: usize },
    Infeasible,
    Unbounded,
    Numerical(String),
    UnknownClient(usize),
}

impl std::fmt::Display for LpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpError::InfeasiblePrecheck { clients, lower, upper, facilities } => write!(
                f,
                "no k with k*{lower} <= {clients} <= k*{upper} and k <= {facilities} exists"
            ),
            LpError::Infeasible => write!(f, "LP relaxation is infeasible"),
            LpError::Unbounded => write!(f, "LP relaxation is unbounded"),
            LpError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            LpError::UnknownClient(j) => write!(f, "unknown client index {j}"),
        }
    }
}

impl std::error::Error for LpError {}

/// Variable layout: `y[i]` at column `i`, `x[i][j]` at `nf + i*nc + j`.
#[derive(Debug, Clone)]
pub struct LpProblem<R: Real> {
    pub num_facilities: usize,
    pub num_clients: usize,
    pub lower: R,
    pub upper: R,
    pub objective: Vec<R>,
    pub rows: Vec<Row<R>>,
}

impl<R: Real> LpProblem<R> {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn y_col(&self, i: usize) -> usize {
        i
    }

    fn x_col(&self, i: usize, j: usize) -> usize {
        self.num_facilities + i * self.num_clients + j
    }

    /// Plain-text listing of the LP (objective, rows, bounds) for
    /// cross-checking with external tools.
    pub fn export_text(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "Minimize")?;
        write!(out, " obj:")?;
        for (col, &c) in self.objective.iter().enumerate() {
            if c != R::zero() {
                write!(out, " + {} {}", c, self.var_name(col))?;
            }
        }
        writeln!(out)?;
        writeln!(out, "Subject To")?;
        for (r, row) in self.rows.iter().enumerate() {
            write!(out, " r{r}:")?;
            for &(col, a) in &row.coeffs {
                if a >= R::zero() {
                    write!(out, " + {} {}", a, self.var_name(col))?;
                } else {
                    write!(out, " - {} {}", -a, self.var_name(col))?;
                }
            }
            let rel = match row.rel {
                Rel::Le => "<=",
                Rel::Ge => ">=",
            };
            writeln!(out, " {rel} {}", row.rhs)?;
        }
        writeln!(out, "Bounds")?;
        for col in 0..self.num_vars() {
            writeln!(out, " 0 <= {} <= 1", self.var_name(col))?;
        }
        writeln!(out, "End")
    }

    fn var_name(&self, col: usize) -> String {
        if col < self.num_facilities {
            format!("y{col}")
        } else {
            let rest = col - self.num_facilities;
            format!("x{}_{}", rest / self.num_clients, rest % self.num_clients)
        }
    }
}

/// Build the relaxation. Errors out early when the counting precheck already
/// rules out any integral solution.
pub fn build_relaxation<R: Real>(inst: &Instance<R>) -> Result<LpProblem<R>, LpError> {
    if inst.feasible_open_count().is_none() {
        return Err(LpError::InfeasiblePrecheck {
            clients: inst.num_clients(),
            lower: inst.lower(),
            upper: inst.upper(),
            facilities: inst.num_facilities(),
        });
    }
    let nf = inst.num_facilities();
    let nc = inst.num_clients();
    let mut objective = vec![R::zero(); nf + nf * nc];
    for i in 0..nf {
        objective[i] = inst.open_cost(i);
    }
    for i in 0..nf {
        for j in 0..nc {
            objective[nf + i * nc + j] = inst.dist_fc(i, j);
        }
    }
    let upper = R::of(f64::from(inst.upper()));
    let lower = R::of(f64::from(inst.lower()));
    let problem =
        LpProblem { num_facilities: nf, num_clients: nc, lower, upper, objective, rows: Vec::new() };

    let mut rows = Vec::with_capacity(nc + 2 * nf + nf * nc);
    // Every client is served.
    for j in 0..nc {
        let coeffs = (0..nf).map(|i| (problem.x_col(i, j), R::one())).collect();
        rows.push(Row { coeffs, rel: Rel::Ge, rhs: R::one() });
    }
    for i in 0..nf {
        // Load at most U*y.
        let mut coeffs: Vec<(usize, R)> =
            (0..nc).map(|j| (problem.x_col(i, j), R::one())).collect();
        coeffs.push((problem.y_col(i), -upper));
        rows.push(Row { coeffs, rel: Rel::Le, rhs: R::zero() });
        // Load at least L*y.
        let mut coeffs: Vec<(usize, R)> =
            (0..nc).map(|j| (problem.x_col(i, j), -R::one())).collect();
        coeffs.push((problem.y_col(i), lower));
        rows.push(Row { coeffs, rel: Rel::Le, rhs: R::zero() });
    }
    // Serve only from open facilities.
    for i in 0..nf {
        for j in 0..nc {
            rows.push(Row {
                coeffs: vec![(problem.x_col(i, j), R::one()), (problem.y_col(i), -R::one())],
                rel: Rel::Le,
                rhs: R::zero(),
            });
        }
    }
    Ok(LpProblem { rows, ..problem })
}

/// An optimal fractional solution of the relaxation.
#[derive(Debug, Clone)]
pub struct FractionalSolution<R: Real> {
    pub(crate) num_facilities: usize,
    pub(crate) num_clients: usize,
    pub(crate) x: Vec<R>,
    pub(crate) y: Vec<R>,
    pub objective: R,
}

impl<R: Real> FractionalSolution<R> {
    pub fn x(&self, i: usize, j: usize) -> R {
        self.x[i * self.num_clients + j]
    }

    pub fn y(&self, i: usize) -> R {
        self.y[i]
    }

    pub fn num_facilities(&self) -> usize {
        self.num_facilities
    }

    pub fn num_clients(&self) -> usize {
        self.num_clients
    }

    /// Total assigned mass of client `j`.
    pub fn client_mass(&self, j: usize) -> R {
        (0..self.num_facilities).map(|i| self.x(i, j)).sum()
    }

    /// Fractional load of facility `i`.
    pub fn facility_load(&self, i: usize) -> R {
        self.x[i * self.num_clients..(i + 1) * self.num_clients].iter().copied().sum()
    }
}

/// Solve the relaxation with the bounded simplex and validate the result
/// against the constraint system before handing it out.
///
/// The serve-only-open rows (`x <= y`) are activated lazily: almost none of
/// them bind at an optimum, and the tableau shrinks by an order of magnitude
/// without them. Rows found violated are added and the solve repeats; the
/// returned point satisfies the full row set.
pub fn solve_lp<R: Real>(problem: &LpProblem<R>) -> Result<FractionalSolution<R>, LpError> {
    let n = problem.num_vars();
    let nf = problem.num_facilities;
    let nc = problem.num_clients;
    let upper = vec![R::one(); n];
    let base_rows = nc + 2 * nf;
    let mut active: Vec<Row<R>> = problem.rows[..base_rows.min(problem.rows.len())].to_vec();
    let link_tol = R::of(1e-9);

    let mut values;
    loop {
        values = simplex::minimize(n, &problem.objective, &upper, &active).map_err(|e| match e {
            SimplexError::Infeasible => LpError::Infeasible,
            SimplexError::Unbounded => LpError::Unbounded,
            SimplexError::IterationLimit => LpError::Numerical("iteration limit".into()),
        })?;
        let mut added = false;
        for i in 0..nf {
            let y = values[i];
            for j in 0..nc {
                let x = values[nf + i * nc + j];
                if x > y + link_tol {
                    active.push(problem.rows[base_rows + i * nc + j].clone());
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    let y = values[..nf].to_vec();
    let x = values[nf..].to_vec();
    let objective = values
        .iter()
        .zip(problem.objective.iter())
        .map(|(&v, &c)| v * c)
        .sum();
    let frac = FractionalSolution { num_facilities: nf, num_clients: nc, x, y, objective };

    let tol = R::FEAS_TOL;
    for j in 0..nc {
        if frac.client_mass(j) < R::one() - tol {
            return Err(LpError::Numerical(format!("client {j} undercovered")));
        }
    }
    for i in 0..nf {
        let load = frac.facility_load(i);
        let uy = problem.upper * frac.y(i);
        let ly = problem.lower * frac.y(i);
        if load > uy + tol || load < ly - tol {
            return Err(LpError::Numerical(format!("facility {i} load outside coupling")));
        }
        for j in 0..nc {
            if frac.x(i, j) > frac.y(i) + R::of(1e-9) {
                return Err(LpError::Numerical(format!("x({i},{j}) exceeds y({i})")));
            }
        }
    }
    Ok(frac)
}

/// Average connection cost paid by client `j` in the fractional solution.
pub fn avg_connection_cost<R: Real>(
    inst: &Instance<R>,
    frac: &FractionalSolution<R>,
    j: usize,
) -> Result<R, LpError> {
    if j >= frac.num_clients {
        return Err(LpError::UnknownClient(j));
    }
    Ok((0..frac.num_facilities).map(|i| frac.x(i, j) * inst.dist_fc(i, j)).sum())
}
