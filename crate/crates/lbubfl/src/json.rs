//! JSON formats: instances (2D points or an explicit distance matrix over
//! facilities ++ clients), solutions, and stage-tagged dumps of the
//! intermediate instances for debugging and cross-checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::solution::Solution;
use crate::transform::{CflInstance, I1Instance, I2Instance, SiteRole};

#[derive(Debug)]
pub enum JsonError {
    Parse(serde_json::Error),
    MissingGeometry(String),
    UnknownId(String),
    Invalid(String),
}

impl std::fmt::Display for JsonError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JsonError::Parse(e) => write!(f, "json parse error: {e}"),
            JsonError::MissingGeometry(id) => {
                write!(f, "point {id} lacks coordinates and no matrix is given")
            }
            JsonError::UnknownId(id) => write!(f, "unknown id {id}"),
            JsonError::Invalid(msg) => write!(f, "invalid instance: {msg}"),
        }
    }
}

impl std::error::Error for JsonError {}

impl From<serde_json::Error> for JsonError {
    fn from(e: serde_json::Error) -> Self {
        JsonError::Parse(e)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FacilityJson {
    pub id: String,
    pub cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClientJson {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceJson {
    pub version: u32,
    #[serde(rename = "L")]
    pub lower: u32,
    #[serde(rename = "U")]
    pub upper: u32,
    pub facilities: Vec<FacilityJson>,
    pub clients: Vec<ClientJson>,
    /// Row-major distances over facilities ++ clients; overrides coordinates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<f64>>,
}

impl InstanceJson {
    pub fn to_instance(&self) -> Result<Instance<f64>, JsonError> {
        let facility_ids: Vec<String> = self.facilities.iter().map(|f| f.id.clone()).collect();
        let client_ids: Vec<String> = self.clients.iter().map(|c| c.id.clone()).collect();
        let open_cost: Vec<f64> = self.facilities.iter().map(|f| f.cost).collect();
        if let Some(matrix) = &self.matrix {
            return Instance::from_matrix(
                facility_ids,
                client_ids,
                open_cost,
                matrix.clone(),
                self.lower,
                self.upper,
            )
            .map_err(|e| JsonError::Invalid(e.to_string()));
        }
        let facilities: Vec<(String, f64, [f64; 2])> = self
            .facilities
            .iter()
            .map(|f| match (f.x, f.y) {
                (Some(x), Some(y)) => Ok((f.id.clone(), f.cost, [x, y])),
                _ => Err(JsonError::MissingGeometry(f.id.clone())),
            })
            .collect::<Result<_, _>>()?;
        let clients: Vec<(String, [f64; 2])> = self
            .clients
            .iter()
            .map(|c| match (c.x, c.y) {
                (Some(x), Some(y)) => Ok((c.id.clone(), [x, y])),
                _ => Err(JsonError::MissingGeometry(c.id.clone())),
            })
            .collect::<Result<_, _>>()?;
        Instance::from_points(&facilities, &clients, self.lower, self.upper)
            .map_err(|e| JsonError::Invalid(e.to_string()))
    }

    pub fn from_str(text: &str) -> Result<Self, JsonError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Matrix-form export of an instance (points are not retained internally).
pub fn instance_to_json(inst: &Instance<f64>) -> InstanceJson {
    InstanceJson {
        version: 1,
        lower: inst.lower(),
        upper: inst.upper(),
        facilities: (0..inst.num_facilities())
            .map(|i| FacilityJson {
                id: inst.facility_id(i).to_string(),
                cost: inst.open_cost(i),
                x: None,
                y: None,
            })
            .collect(),
        clients: (0..inst.num_clients())
            .map(|j| ClientJson { id: inst.client_id(j).to_string(), x: None, y: None })
            .collect(),
        matrix: Some(inst.matrix().to_vec()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionJson {
    pub open: Vec<String>,
    pub assign: BTreeMap<String, String>,
    pub cost: f64,
    pub min_load: u32,
    pub max_load: u32,
}

pub fn solution_to_json(inst: &Instance<f64>, sol: &Solution, cost: f64) -> SolutionJson {
    let loads = sol.loads(inst.num_facilities());
    let open_loads: Vec<u32> = sol.open.iter().map(|&i| loads[i]).collect();
    SolutionJson {
        open: sol.open.iter().map(|&i| inst.facility_id(i).to_string()).collect(),
        assign: sol
            .assign
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                (inst.client_id(j).to_string(), inst.facility_id(i).to_string())
            })
            .collect(),
        cost,
        min_load: open_loads.iter().copied().min().unwrap_or(0),
        max_load: open_loads.iter().copied().max().unwrap_or(0),
    }
}

pub fn solution_from_json(
    inst: &Instance<f64>,
    json: &SolutionJson,
) -> Result<Solution, JsonError> {
    let mut open = std::collections::BTreeSet::new();
    for id in &json.open {
        let i = inst.facility_index(id).ok_or_else(|| JsonError::UnknownId(id.clone()))?;
        open.insert(i);
    }
    let mut assign = vec![usize::MAX; inst.num_clients()];
    for (client, facility) in &json.assign {
        let j =
            inst.client_index(client).ok_or_else(|| JsonError::UnknownId(client.clone()))?;
        let i = inst
            .facility_index(facility)
            .ok_or_else(|| JsonError::UnknownId(facility.clone()))?;
        assign[j] = i;
    }
    if let Some(j) = assign.iter().position(|&i| i == usize::MAX) {
        return Err(JsonError::Invalid(format!(
            "client {} has no assignment",
            inst.client_id(j)
        )));
    }
    Ok(Solution { open, assign })
}

// Stage-tagged intermediate dumps.

#[derive(Debug, Serialize)]
pub struct StageSiteJson {
    pub origin: String,
    pub role: &'static str,
    pub demand: u64,
    pub capacity: u64,
    pub open_cost: f64,
    pub nn_dist: f64,
    pub members: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct StageJson {
    pub stage: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facilities: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clients_at: Option<BTreeMap<String, u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub open_cost: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<StageSiteJson>>,
}

pub fn i1_to_json(inst: &Instance<f64>, i1: &I1Instance<f64>) -> StageJson {
    StageJson {
        stage: "i1",
        facilities: Some(i1.facilities.iter().map(|&i| inst.facility_id(i).to_string()).collect()),
        clients_at: Some(
            i1.clients_at
                .iter()
                .map(|c| (inst.facility_id(c.location).to_string(), c.count))
                .collect(),
        ),
        open_cost: Some(i1.open_cost.clone()),
        lower: None,
        delta: None,
        sites: None,
    }
}

pub fn i2_to_json(inst: &Instance<f64>, i2: &I2Instance) -> StageJson {
    StageJson {
        stage: "i2",
        facilities: Some(i2.facilities.iter().map(|&i| inst.facility_id(i).to_string()).collect()),
        clients_at: Some(
            i2.clients_at
                .iter()
                .map(|c| (inst.facility_id(c.location).to_string(), c.count))
                .collect(),
        ),
        open_cost: None,
        lower: Some(i2.lower),
        delta: None,
        sites: None,
    }
}

pub fn icap_to_json(inst: &Instance<f64>, icap: &CflInstance<f64>) -> StageJson {
    StageJson {
        stage: "icap",
        facilities: None,
        clients_at: None,
        open_cost: None,
        lower: Some(icap.lower),
        delta: Some(icap.delta),
        sites: Some(
            icap.sites
                .iter()
                .map(|s| StageSiteJson {
                    origin: inst.facility_id(s.origin).to_string(),
                    role: match s.role {
                        SiteRole::Small => "small",
                        SiteRole::BigPrimary => "big-primary",
                        SiteRole::BigFree => "big-free",
                    },
                    demand: s.demand,
                    capacity: s.capacity,
                    open_cost: s.open_cost,
                    nn_dist: s.nn_dist,
                    members: s.members.iter().map(|&j| inst.client_id(j).to_string()).collect(),
                })
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::t1;

    #[test]
    fn point_instance_round_trips() {
        let text = r#"{
            "version": 1, "L": 1, "U": 2,
            "facilities": [{"id": "f0", "cost": 1.5, "x": 0.0, "y": 0.0}],
            "clients": [{"id": "c0", "x": 1.0, "y": 0.0}, {"id": "c1", "x": 0.0, "y": 1.0}]
        }"#;
        let parsed = InstanceJson::from_str(text).unwrap();
        let inst = parsed.to_instance().unwrap();
        assert_eq!(inst.num_facilities(), 1);
        assert_eq!(inst.num_clients(), 2);
        assert!((inst.dist_fc(0, 0) - 1.0).abs() < 1e-12);
        assert!((inst.dist_cc(0, 1) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matrix_form_round_trips() {
        let inst = t1::<f64>();
        let json = instance_to_json(&inst);
        let text = serde_json::to_string(&json).unwrap();
        let back = InstanceJson::from_str(&text).unwrap().to_instance().unwrap();
        assert_eq!(back.num_facilities(), inst.num_facilities());
        assert_eq!(back.matrix(), inst.matrix());
        assert_eq!(back.lower(), inst.lower());
    }

    #[test]
    fn missing_coordinates_rejected() {
        let text = r#"{
            "version": 1, "L": 1, "U": 1,
            "facilities": [{"id": "f0", "cost": 0.0}],
            "clients": []
        }"#;
        let parsed = InstanceJson::from_str(text).unwrap();
        assert!(matches!(parsed.to_instance(), Err(JsonError::MissingGeometry(_))));
    }

    #[test]
    fn solution_round_trips_and_validates_ids() {
        let inst = t1::<f64>();
        let sol = Solution {
            open: [0, 1, 2].into(),
            assign: vec![0, 0, 1, 1, 2, 2],
        };
        let json = solution_to_json(&inst, &sol, 3.7);
        assert_eq!(json.min_load, 2);
        assert_eq!(json.max_load, 2);
        let back = solution_from_json(&inst, &json).unwrap();
        assert_eq!(back, sol);

        let mut bad = json.clone();
        bad.open.push("nope".into());
        assert!(matches!(solution_from_json(&inst, &bad), Err(JsonError::UnknownId(_))));
    }
}
