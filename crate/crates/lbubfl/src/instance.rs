//! Problem instance: facilities, clients, a metric over their union, opening
//! costs and the uniform load bounds.

use crate::scalar::Real;

/// A group of clients co-located at a facility site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColocatedClients {
    pub location: usize,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceError {
    BadBounds { lower: u32, upper: u32 },
    NegativeOpenCost { facility: usize },
    NegativeDistance { a: usize, b: usize },
    ShapeMismatch(String),
}

impl std::fmt::Display for InstanceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InstanceError::BadBounds { lower, upper } => {
                write!(f, "bounds must satisfy 1 <= L <= U, got L={lower}, U={upper}")
            }
            InstanceError::NegativeOpenCost { facility } => {
                write!(f, "facility {facility} has a negative opening cost")
            }
            InstanceError::NegativeDistance { a, b } => {
                write!(f, "negative distance between points {a} and {b}")
            }
            InstanceError::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
        }
    }
}

impl std::error::Error for InstanceError {}

/// An LBUBFL instance. Points are indexed facilities-first: facility `i` is
/// point `i`, client `j` is point `nf + j`. The distance matrix covers the
/// full union so facility-facility distances are available to the later
/// pipeline stages.
#[derive(Debug, Clone)]
pub struct Instance<R: Real> {
    facility_ids: Vec<String>,
    client_ids: Vec<String>,
    open_cost: Vec<R>,
    dist: Vec<R>,
    lower: u32,
    upper: u32,
}

impl<R: Real> Instance<R> {
    /// Build from an explicit distance matrix over facilities ++ clients
    /// (row-major, `(nf + nc)^2` entries).
    pub fn from_matrix(
        facility_ids: Vec<String>,
        client_ids: Vec<String>,
        open_cost: Vec<R>,
        dist: Vec<R>,
        lower: u32,
        upper: u32,
    ) -> Result<Self, InstanceError> {
        if lower == 0 || lower > upper {
            return Err(InstanceError::BadBounds { lower, upper });
        }
        if open_cost.len() != facility_ids.len() {
            return Err(InstanceError::ShapeMismatch(format!(
                "{} opening costs for {} facilities",
                open_cost.len(),
                facility_ids.len()
            )));
        }
        let n = facility_ids.len() + client_ids.len();
        if dist.len() != n * n {
            return Err(InstanceError::ShapeMismatch(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        for (i, &c) in open_cost.iter().enumerate() {
            if c < R::zero() {
                return Err(InstanceError::NegativeOpenCost { facility: i });
            }
        }
        for a in 0..n {
            for b in 0..n {
                if dist[a * n + b] < R::zero() {
                    return Err(InstanceError::NegativeDistance { a, b });
                }
            }
        }
        Ok(Self { facility_ids, client_ids, open_cost, dist, lower, upper })
    }

    /// Build from 2D coordinates with the Euclidean metric.
    pub fn from_points(
        facilities: &[(String, R, [R; 2])],
        clients: &[(String, [R; 2])],
        lower: u32,
        upper: u32,
    ) -> Result<Self, InstanceError> {
        let mut pts: Vec<[R; 2]> = Vec::with_capacity(facilities.len() + clients.len());
        let mut facility_ids = Vec::with_capacity(facilities.len());
        let mut open_cost = Vec::with_capacity(facilities.len());
        for (id, cost, p) in facilities {
            facility_ids.push(id.clone());
            open_cost.push(*cost);
            pts.push(*p);
        }
        let mut client_ids = Vec::with_capacity(clients.len());
        for (id, p) in clients {
            client_ids.push(id.clone());
            pts.push(*p);
        }
        let n = pts.len();
        let mut dist = vec![R::zero(); n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let dx = pts[a][0] - pts[b][0];
                let dy = pts[a][1] - pts[b][1];
                let d = (dx * dx + dy * dy).sqrt();
                dist[a * n + b] = d;
                dist[b * n + a] = d;
            }
        }
        Self::from_matrix(facility_ids, client_ids, open_cost, dist, lower, upper)
    }

    pub fn num_facilities(&self) -> usize {
        self.facility_ids.len()
    }

    pub fn num_clients(&self) -> usize {
        self.client_ids.len()
    }

    pub fn lower(&self) -> u32 {
        self.lower
    }

    pub fn upper(&self) -> u32 {
        self.upper
    }

    pub fn facility_id(&self, i: usize) -> &str {
        &self.facility_ids[i]
    }

    pub fn client_id(&self, j: usize) -> &str {
        &self.client_ids[j]
    }

    pub fn facility_index(&self, id: &str) -> Option<usize> {
        self.facility_ids.iter().position(|s| s == id)
    }

    pub fn client_index(&self, id: &str) -> Option<usize> {
        self.client_ids.iter().position(|s| s == id)
    }

    pub fn open_cost(&self, i: usize) -> R {
        self.open_cost[i]
    }

    fn point_count(&self) -> usize {
        self.facility_ids.len() + self.client_ids.len()
    }

    fn d(&self, a: usize, b: usize) -> R {
        self.dist[a * self.point_count() + b]
    }

    /// Facility-facility distance.
    pub fn dist_ff(&self, i: usize, k: usize) -> R {
        self.d(i, k)
    }

    /// Facility-client distance.
    pub fn dist_fc(&self, i: usize, j: usize) -> R {
        self.d(i, self.facility_ids.len() + j)
    }

    /// Client-client distance.
    pub fn dist_cc(&self, j: usize, k: usize) -> R {
        let nf = self.facility_ids.len();
        self.d(nf + j, nf + k)
    }

    /// Raw matrix in row-major point order (facilities first).
    pub fn matrix(&self) -> &[R] {
        &self.dist
    }

    /// Smallest `k` with `k*L <= |C| <= k*U` and `k <= |F|`, if one exists.
    /// An exact bound-respecting assignment can exist only if it does.
    pub fn feasible_open_count(&self) -> Option<u32> {
        feasible_open_count(
            self.num_clients() as u64,
            u64::from(self.lower),
            u64::from(self.upper),
            self.num_facilities() as u64,
        )
    }

    /// Check symmetry, zero diagonal and triangle inequality, reporting every
    /// violating pair/triple instead of failing on the first.
    pub fn validate_metric(&self) -> MetricReport {
        let n = self.point_count();
        let rtol = R::METRIC_RTOL;
        let mut report = MetricReport::default();
        for a in 0..n {
            if self.d(a, a) != R::zero() {
                report.diagonal.push(a);
            }
            for b in (a + 1)..n {
                let ab = self.d(a, b);
                let ba = self.d(b, a);
                let scale = ab.max(ba).max(R::one());
                if (ab - ba).abs() > rtol * scale {
                    report.symmetry.push((a, b));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if b == a {
                    continue;
                }
                let ab = self.d(a, b);
                for c in (a + 1)..n {
                    if c == b {
                        continue;
                    }
                    let ac = self.d(a, c);
                    let bc = self.d(b, c);
                    let scale = ac.max(ab + bc).max(R::one());
                    if ac > ab + bc + rtol * scale {
                        report.triangle.push((a, b, c));
                    }
                }
            }
        }
        report
    }
}

/// Standalone form of the counting precheck.
pub fn feasible_open_count(clients: u64, lower: u64, upper: u64, facilities: u64) -> Option<u32> {
    if clients == 0 {
        return Some(0);
    }
    if lower == 0 || upper < lower || facilities == 0 {
        return None;
    }
    let k_min = clients.div_ceil(upper);
    let k_max = (clients / lower).min(facilities);
    if k_min <= k_max {
        Some(k_min as u32)
    } else {
        None
    }
}

/// Metric violations found by [`Instance::validate_metric`]. Indices are in
/// point order (facilities first, then clients).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetricReport {
    pub diagonal: Vec<usize>,
    pub symmetry: Vec<(usize, usize)>,
    /// Triples `(a, b, c)` with `d(a,c) > d(a,b) + d(b,c)`.
    pub triangle: Vec<(usize, usize, usize)>,
}

impl MetricReport {
    pub fn is_metric(&self) -> bool {
        self.diagonal.is_empty() && self.symmetry.is_empty() && self.triangle.is_empty()
    }
}
