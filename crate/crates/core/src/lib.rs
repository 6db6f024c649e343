//! Deterministic simulator and library for topology-aware coordination in
//! low-altitude wireless networks.
//!
//! A heterogeneous network of airborne and terrestrial terminals is
//! abstracted as a sparse feature-rich graph: nodes carry roles and
//! features, edges exist where channel gain clears a threshold, and binary
//! activation states gate which edges are live. On top of that abstraction
//! the crate implements three experiment engines:
//!
//! * [`selection`] — multi-objective communication-user selection under
//!   simultaneous communication, sensing, and wireless-power-transfer load;
//! * [`delivery`] — in-network task delivery, comparing globally shortest
//!   routing against two greedy baselines;
//! * [`exttarget`] — bistatic extended-target localization with
//!   Gaussian-process contour recovery.
//!
//! Everything is reproducible: every random draw flows through the seeded
//! generator in [`rng`], and the experiment [`harness`] produces
//! byte-identical result tables for a given spec regardless of worker
//! count.

pub mod channel;
pub mod delivery;
pub mod error;
pub mod exttarget;
pub mod harness;
pub mod rng;
pub mod scenario;
pub mod selection;
pub mod topology;

pub use channel::{ChannelParams, LinkGain};
pub use error::{Error, Result};
pub use scenario::{Node, NodeId, NodeRole, Position3, Scenario, ScenarioConfig};
pub use topology::{ActivationPattern, Edge, EdgeKind, TopologyGraph};
