//! Random instance generation for benchmarks and the verification suites.
//! Fully determined by a single 64-bit seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::{feasible_open_count, Instance};
use crate::json::{ClientJson, FacilityJson, InstanceJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    UnitSquare,
}

#[derive(Debug, Clone)]
pub struct GenParams {
    pub num_facilities: usize,
    pub num_clients: usize,
    pub lower: u32,
    pub upper: u32,
    pub seed: u64,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    BadBounds { lower: u32, upper: u32 },
    NoValidOpenCount { clients: usize, lower: u32, upper: u32, facilities: usize },
}

impl std::fmt::Display for GenError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GenError::BadBounds { lower, upper } => {
                write!(f, "bounds must satisfy 1 <= L <= U, got L={lower}, U={upper}")
            }
            GenError::NoValidOpenCount { clients, lower, upper, facilities } => write!(
                f,
                "no k satisfies k*{lower} <= {clients} <= k*{upper} with k <= {facilities}"
            ),
        }
    }
}

impl std::error::Error for GenError {}

/// Generate the JSON form (uniform points in the unit square, opening costs
/// uniform in [0.05, 1.0]).
pub fn generate_json(params: &GenParams) -> Result<InstanceJson, GenError> {
    if params.lower == 0 || params.lower > params.upper {
        return Err(GenError::BadBounds { lower: params.lower, upper: params.upper });
    }
    if feasible_open_count(
        params.num_clients as u64,
        u64::from(params.lower),
        u64::from(params.upper),
        params.num_facilities as u64,
    )
    .is_none()
    {
        return Err(GenError::NoValidOpenCount {
            clients: params.num_clients,
            lower: params.lower,
            upper: params.upper,
            facilities: params.num_facilities,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let Geometry::UnitSquare = params.geometry;
    let facilities = (0..params.num_facilities)
        .map(|i| FacilityJson {
            id: format!("f{i}"),
            cost: rng.gen_range(0.05..1.0),
            x: Some(rng.gen_range(0.0..1.0)),
            y: Some(rng.gen_range(0.0..1.0)),
        })
        .collect();
    let clients = (0..params.num_clients)
        .map(|j| ClientJson {
            id: format!("c{j}"),
            x: Some(rng.gen_range(0.0..1.0)),
            y: Some(rng.gen_range(0.0..1.0)),
        })
        .collect();
    Ok(InstanceJson {
        version: 1,
        lower: params.lower,
        upper: params.upper,
        facilities,
        clients,
        matrix: None,
    })
}

pub fn generate(params: &GenParams) -> Result<Instance<f64>, GenError> {
    let json = generate_json(params)?;
    Ok(json.to_instance().expect("generated instances are well-formed"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64) -> GenParams {
        GenParams {
            num_facilities: 4,
            num_clients: 10,
            lower: 2,
            upper: 4,
            seed,
            geometry: Geometry::UnitSquare,
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let a = serde_json::to_string(&generate_json(&params(1)).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_json(&params(1)).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&generate_json(&params(2)).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_impossible_parameters() {
        let mut p = params(1);
        p.num_clients = 7;
        p.lower = 4;
        p.upper = 5;
        assert!(matches!(generate_json(&p), Err(GenError::NoValidOpenCount { .. })));
        let mut p = params(1);
        p.lower = 5;
        p.upper = 4;
        assert!(matches!(generate_json(&p), Err(GenError::BadBounds { .. })));
    }

    #[test]
    fn generated_instances_are_metric() {
        let inst = generate(&params(7)).unwrap();
        assert!(inst.validate_metric().is_metric());
        assert!(inst.feasible_open_count().is_some());
    }
}
