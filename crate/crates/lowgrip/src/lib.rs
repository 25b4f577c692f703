//! Ground-aware emergency maneuver selection for a small vehicle on
//! low-grip and deformable surfaces, backed by a deterministic plant
//! simulator.
//!
//! The crate has three layers:
//!
//! * a vehicle plant ([`plant`], [`rollout`], [`sensors`]) that rolls out
//!   the five emergency maneuvers on hard or deformable ground and
//!   synthesizes multirate sensor traces;
//! * online estimators ([`observer`], [`estimators`]) that reconstruct
//!   vehicle states from those traces and identify the active ground
//!   parameters (friction coefficient, or cohesion and shear angle);
//! * a data-driven predictor ([`predictor`]) trained on rollout outcomes
//!   that picks the maneuver maximizing clearance to an obstacle, plus
//!   the dataset/evaluation harness ([`experiment`]).

pub mod dataset;
pub mod decision_map;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod geometry;
pub mod maneuver;
pub mod observer;
pub mod plant;
pub mod predictor;
pub mod rollout;
pub mod sensors;
pub mod soil;
pub mod tire;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    GroundModel, ManeuverId, ManeuverOutcome, Scenario, SensorFrame, Trajectory, VehicleParams,
    ALL_MANEUVERS,
};
