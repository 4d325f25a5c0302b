//! The instance chain that converts the lower-bound repair into capacitated
//! facility location: move clients onto their serving facilities (`I1`),
//! restrict to the opened facilities with zero opening cost and drop the
//! upper bounds (`I2`), then turn client deficits into demands and surpluses
//! into capacities (`I_cap`).

use crate::instance::{ColocatedClients, Instance};
use crate::scalar::Real;
use crate::tricriteria::TriCriteriaSolution;

#[derive(Debug, Clone, PartialEq)]
pub enum TransformError {
    TooFewFacilities(usize),
    EmptySite { facility: usize },
    BadAlpha(f64),
    BadDelta(f64),
}

impl std::fmt::Display for TransformError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransformError::TooFewFacilities(n) => {
                write!(f, "need at least 2 opened facilities for nearest-neighbor distances, got {n}")
            }
            TransformError::EmptySite { facility } => {
                write!(f, "facility {facility} carries no clients")
            }
            TransformError::BadAlpha(a) => {
                write!(f, "alpha must lie in (1/2, 1], got {a}")
            }
            TransformError::BadDelta(d) => write!(f, "delta must be positive, got {d}"),
        }
    }
}

impl std::error::Error for TransformError {}

/// `I1`: clients moved to the facilities that served them, opening costs
/// zeroed on the opened set.
#[derive(Debug, Clone)]
pub struct I1Instance<R: Real> {
    /// The opened facilities of the tri-criteria solution, ascending.
    pub facilities: Vec<usize>,
    /// Client count per opened facility, parallel to `facilities`.
    pub clients_at: Vec<ColocatedClients>,
    /// Original client ids at each opened facility, ascending.
    pub members: Vec<Vec<usize>>,
    /// Modified opening costs over all original facilities.
    pub open_cost: Vec<R>,
}

/// `I2`: facility set restricted to the opened facilities, all costs zero,
/// upper bound dropped.
#[derive(Debug, Clone)]
pub struct I2Instance {
    pub facilities: Vec<usize>,
    pub clients_at: Vec<ColocatedClients>,
    pub members: Vec<Vec<usize>>,
    pub lower: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteRole {
    Small,
    BigPrimary,
    BigFree,
}

/// A site of the capacitated instance. Split sites of a big facility are
/// co-located at the origin facility.
#[derive(Debug, Clone)]
pub struct CflSite<R: Real> {
    /// Original facility index this site lives at.
    pub origin: usize,
    pub role: SiteRole,
    pub demand: u64,
    pub capacity: u64,
    pub open_cost: R,
    /// Distance from the origin facility to its nearest opened neighbor.
    pub nn_dist: R,
    /// Original client ids placed at this site.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CflInstance<R: Real> {
    pub sites: Vec<CflSite<R>>,
    pub delta: R,
    pub lower: u32,
}

impl<R: Real> CflInstance<R> {
    pub fn total_demand(&self) -> u64 {
        self.sites.iter().map(|s| s.demand).sum()
    }

    /// Distance between two sites, inherited from the origin facilities.
    pub fn dist(&self, inst: &Instance<R>, a: usize, b: usize) -> R {
        inst.dist_ff(self.sites[a].origin, self.sites[b].origin)
    }
}

/// Move every client onto the facility that serves it in the tri-criteria
/// solution and zero the opening costs of the opened set.
pub fn to_i1<R: Real>(inst: &Instance<R>, tri: &TriCriteriaSolution<R>) -> I1Instance<R> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); tri.open.len()];
    let slot: std::collections::HashMap<usize, usize> =
        tri.open.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    for (j, &i) in tri.assign.iter().enumerate() {
        members[slot[&i]].push(j);
    }
    for list in &mut members {
        list.sort_unstable();
    }
    let clients_at = tri
        .open
        .iter()
        .zip(&members)
        .map(|(&i, list)| ColocatedClients { location: i, count: list.len() as u32 })
        .collect();
    let open_cost = (0..inst.num_facilities())
        .map(|i| if slot.contains_key(&i) { R::zero() } else { inst.open_cost(i) })
        .collect();
    I1Instance { facilities: tri.open.clone(), clients_at, members, open_cost }
}

/// Drop the facilities outside the opened set and the upper bounds.
pub fn to_i2<R: Real>(i1: &I1Instance<R>, lower: u32) -> I2Instance {
    I2Instance {
        facilities: i1.facilities.clone(),
        clients_at: i1.clients_at.clone(),
        members: i1.members.clone(),
        lower,
    }
}

/// Build the capacitated instance: a facility with `n < L` clients becomes a
/// demand of `L - n` with capacity `L`; a facility with `n > L` splits into a
/// primary site (capacity `L`) and a free site (capacity `n - L`, no cost).
/// The `L` lowest client ids stay with the primary site.
pub fn to_icap<R: Real>(
    inst: &Instance<R>,
    i2: &I2Instance,
    delta: R,
) -> Result<CflInstance<R>, TransformError> {
    if i2.facilities.len() < 2 {
        return Err(TransformError::TooFewFacilities(i2.facilities.len()));
    }
    if delta <= R::zero() {
        return Err(TransformError::BadDelta(delta.as_f64()));
    }
    let lower = u64::from(i2.lower);
    let mut sites = Vec::new();
    for (k, &origin) in i2.facilities.iter().enumerate() {
        let n = u64::from(i2.clients_at[k].count);
        if n == 0 {
            return Err(TransformError::EmptySite { facility: origin });
        }
        let nn_dist = i2
            .facilities
            .iter()
            .filter(|&&other| other != origin)
            .map(|&other| inst.dist_ff(origin, other))
            .fold(R::infinity(), |a, b| a.min(b));
        let members = &i2.members[k];
        if n <= lower {
            sites.push(CflSite {
                origin,
                role: SiteRole::Small,
                demand: lower - n,
                capacity: lower,
                open_cost: delta * R::of(n as f64) * nn_dist,
                nn_dist,
                members: members.clone(),
            });
        } else {
            let split = i2.lower as usize;
            sites.push(CflSite {
                origin,
                role: SiteRole::BigPrimary,
                demand: 0,
                capacity: lower,
                open_cost: delta * R::of(lower as f64) * nn_dist,
                nn_dist,
                members: members[..split].to_vec(),
            });
            sites.push(CflSite {
                origin,
                role: SiteRole::BigFree,
                demand: 0,
                capacity: n - lower,
                open_cost: R::zero(),
                nn_dist,
                members: members[split..].to_vec(),
            });
        }
    }
    Ok(CflInstance { sites, delta, lower: i2.lower })
}

/// The opening-cost scale that balances the repair stage's cost terms:
/// `3(2a - 1) / (2a(a + 1))` for the measured lower-bound factor `a`.
pub fn delta_default(measured_alpha: f64) -> Result<f64, TransformError> {
    if !(measured_alpha > 0.5 && measured_alpha <= 1.0) {
        return Err(TransformError::BadAlpha(measured_alpha));
    }
    Ok(3.0 * (2.0 * measured_alpha - 1.0) / (2.0 * measured_alpha * (measured_alpha + 1.0)))
}
