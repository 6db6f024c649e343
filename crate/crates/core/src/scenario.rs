//! Reproducible random deployments of edge terminals, users, charging
//! users, and sensing targets.
//!
//! A [`Scenario`] is the immutable world state: node placement is a pure
//! function of [`ScenarioConfig`] (including its seed). Draw order is fixed
//! by node id so that two implementations of the documented generator
//! produce bit-identical deployments: nodes are placed in id order, and
//! each node consumes `x`, then `y`, then (airborne nodes only) altitude,
//! then (pre-designated charging users only) battery from the stream.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Node identifier; dense `0..N-1` inside one scenario.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 3-D position in meters. `z` is height above ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance_to(&self, other: &Position3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Distance in the horizontal plane, ignoring `z`.
    pub fn planar_distance_to(&self, other: &Position3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(Error::InvalidConfig("position coordinates must be finite".into()));
        }
        if self.z < 0.0 {
            return Err(Error::InvalidConfig("position z must be >= 0".into()));
        }
        Ok(())
    }
}

/// Functional role of a node. Exactly one role per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    /// Airborne edge terminal (UAV access point).
    EmtUav,
    /// Ground edge terminal (terrestrial access point).
    EmtTerrestrial,
    /// Regional coordinator. Label only; coordination protocols are not simulated.
    Dmt,
    /// Global coordinator. Label only.
    ComputingCenter,
    CommUser,
    ChargingUser,
    SensingTarget,
}

impl NodeRole {
    /// Edge terminals are the transmitter side of the bipartite view and
    /// the only nodes that relay tasks.
    #[inline]
    pub fn is_emt(self) -> bool {
        matches!(self, NodeRole::EmtUav | NodeRole::EmtTerrestrial)
    }
}

impl std::fmt::Display for NodeRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            NodeRole::EmtUav => "emt_uav",
            NodeRole::EmtTerrestrial => "emt_terrestrial",
            NodeRole::Dmt => "dmt",
            NodeRole::ComputingCenter => "computing_center",
            NodeRole::CommUser => "comm_user",
            NodeRole::ChargingUser => "charging_user",
            NodeRole::SensingTarget => "sensing_target",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeFeatures {
    /// Remaining battery as a fraction of capacity, in `[0, 1]`.
    pub battery: f64,
    /// Abstract local work units per slot, `>= 0`.
    pub compute_capacity: f64,
    /// Higher value means more urgent.
    pub task_priority: u32,
    pub active: bool,
}

impl Default for NodeFeatures {
    fn default() -> Self {
        Self { battery: 1.0, compute_capacity: 1.0, task_priority: 0, active: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub role: NodeRole,
    pub pos: Position3,
    pub features: NodeFeatures,
}

impl Node {
    /// Airborne nodes have strictly positive height; ground nodes sit at z = 0.
    #[inline]
    pub fn is_airborne(&self) -> bool {
        self.pos.z > 0.0
    }
}

fn default_area() -> f64 {
    2000.0
}
fn default_alt_min() -> f64 {
    10.0
}
fn default_alt_max() -> f64 {
    50.0
}
fn default_n_emt() -> usize {
    64
}
fn default_frac_uav_users() -> f64 {
    0.8
}
fn default_n_charging_users() -> usize {
    4
}
fn default_n_sensing_targets() -> usize {
    1
}

/// Declarative deployment description. Loadable from JSON with exactly
/// these field names; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_area")]
    pub area_x: f64,
    #[serde(default = "default_area")]
    pub area_y: f64,
    #[serde(default = "default_alt_min")]
    pub alt_min: f64,
    #[serde(default = "default_alt_max")]
    pub alt_max: f64,
    #[serde(default = "default_n_emt")]
    pub n_emt_uav: usize,
    #[serde(default = "default_n_emt")]
    pub n_emt_terrestrial: usize,
    #[serde(default)]
    pub n_comm_users: usize,
    #[serde(default = "default_frac_uav_users")]
    pub frac_uav_users: f64,
    #[serde(default = "default_n_charging_users")]
    pub n_charging_users: usize,
    #[serde(default = "default_n_sensing_targets")]
    pub n_sensing_targets: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_x: default_area(),
            area_y: default_area(),
            alt_min: default_alt_min(),
            alt_max: default_alt_max(),
            n_emt_uav: default_n_emt(),
            n_emt_terrestrial: default_n_emt(),
            n_comm_users: 0,
            frac_uav_users: default_frac_uav_users(),
            n_charging_users: default_n_charging_users(),
            n_sensing_targets: default_n_sensing_targets(),
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.area_x > 0.0 && self.area_y > 0.0) {
            return Err(Error::InvalidConfig("area dimensions must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.frac_uav_users) {
            return Err(Error::InvalidConfig("frac_uav_users must be in [0, 1]".into()));
        }
        if !(self.alt_min >= 0.0 && self.alt_min <= self.alt_max) {
            return Err(Error::InvalidConfig("altitudes must satisfy 0 <= alt_min <= alt_max".into()));
        }
        if !(self.area_x.is_finite() && self.area_y.is_finite() && self.alt_max.is_finite()) {
            return Err(Error::InvalidConfig("scenario dimensions must be finite".into()));
        }
        Ok(())
    }

    /// Split of communication users into airborne and ground users.
    /// The airborne count is `round(n_comm_users * frac_uav_users)`.
    pub fn comm_user_split(&self) -> (usize, usize) {
        let uav = ((self.n_comm_users as f64) * self.frac_uav_users).round() as usize;
        let uav = uav.min(self.n_comm_users);
        (uav, self.n_comm_users - uav)
    }
}

/// Immutable world state: config plus the generated node list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub nodes: Vec<Node>,
}

/// Generate a deployment from `config`. Deterministic in all fields,
/// including the seed.
///
/// Id ordering (which is also the draw order): ground edge terminals,
/// airborne edge terminals, airborne comm users, ground comm users,
/// charging users, sensing targets. Ground nodes sit at z = 0; airborne
/// nodes draw an altitude uniform in `[alt_min, alt_max]`. Charging users
/// and sensing targets are airborne. Every feature starts at its default
/// (battery 1.0, active, priority 0) except charging users, whose battery
/// is drawn uniform in `[0.05, 0.20]`.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = SplitMix64::new(config.seed);
    let (n_uav_users, n_ground_users) = config.comm_user_split();

    let total = config.n_emt_terrestrial
        + config.n_emt_uav
        + config.n_comm_users
        + config.n_charging_users
        + config.n_sensing_targets;
    let mut nodes = Vec::with_capacity(total);

    let place = |nodes: &mut Vec<Node>, role: NodeRole, airborne: bool, rng: &mut SplitMix64| {
        let id = NodeId(nodes.len() as u32);
        let x = rng.uniform(0.0, config.area_x);
        let y = rng.uniform(0.0, config.area_y);
        let z = if airborne { rng.uniform(config.alt_min, config.alt_max) } else { 0.0 };
        let mut features = NodeFeatures::default();
        if role == NodeRole::ChargingUser {
            features.battery = rng.uniform(0.05, 0.20);
        }
        nodes.push(Node { id, role, pos: Position3::new(x, y, z), features });
    };

    for _ in 0..config.n_emt_terrestrial {
        place(&mut nodes, NodeRole::EmtTerrestrial, false, &mut rng);
    }
    for _ in 0..config.n_emt_uav {
        place(&mut nodes, NodeRole::EmtUav, true, &mut rng);
    }
    for _ in 0..n_uav_users {
        place(&mut nodes, NodeRole::CommUser, true, &mut rng);
    }
    for _ in 0..n_ground_users {
        place(&mut nodes, NodeRole::CommUser, false, &mut rng);
    }
    for _ in 0..config.n_charging_users {
        place(&mut nodes, NodeRole::ChargingUser, true, &mut rng);
    }
    for _ in 0..config.n_sensing_targets {
        place(&mut nodes, NodeRole::SensingTarget, true, &mut rng);
    }

    Ok(Scenario { config: config.clone(), nodes })
}

/// Reclassify airborne nodes whose battery dropped below `battery_threshold`
/// as charging users, with priority `floor((threshold - battery) / threshold * 10)`
/// so priority rises as battery falls. Idempotent; all other nodes are
/// returned unchanged.
///
/// Eligible roles are airborne terminals and users (`EmtUav`, `CommUser`)
/// plus existing `ChargingUser`s, whose priority is kept consistent with
/// their battery. Nodes with battery exactly at the threshold stay as
/// they are (strict inequality).
pub fn reclassify_nodes(scenario: &Scenario, battery_threshold: f64) -> Result<Scenario> {
    if !(battery_threshold > 0.0 && battery_threshold < 1.0) {
        return Err(Error::ContractViolation(format!(
            "battery_threshold must be in (0, 1), got {battery_threshold}"
        )));
    }
    let mut out = scenario.clone();
    for node in &mut out.nodes {
        let eligible = node.is_airborne()
            && matches!(node.role, NodeRole::EmtUav | NodeRole::CommUser | NodeRole::ChargingUser);
        if eligible && node.features.battery < battery_threshold {
            node.role = NodeRole::ChargingUser;
            node.features.task_priority =
                ((battery_threshold - node.features.battery) / battery_threshold * 10.0).floor()
                    as u32;
        }
    }
    Ok(out)
}

impl Scenario {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index())
    }

    pub fn ids_with_role(&self, role: NodeRole) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.role == role).map(|n| n.id).collect()
    }

    pub fn emt_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.role.is_emt()).map(|n| n.id).collect()
    }

    /// JSON export of the full node list for inspection and
    /// cross-implementation diffing.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
