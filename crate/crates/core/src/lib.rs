//! Longitudinal safety for two cars on one lane.
//!
//! * [`profiles`]: closed-form braking profiles.
//! * [`safety`]: safe distances and the dangerous-situation test.
//! * [`controllers`]: preventive jerk-bounded braking, a TTC emergency brake,
//!   driver models and failure injection.
//! * [`sim`]: an exact two-car simulator with verification and sweeps.
//! * [`cli`]: file formats and the command-line front end.

pub mod cli;
pub mod controllers;
mod error;
pub mod motion;
pub mod profiles;
pub mod safety;
pub mod sim;

pub use error::{Error, Result};
pub use profiles::{KinematicState, ProfileId, RssParams};
pub use safety::{is_dangerous, safe_distance_apb, safe_distance_rss, SafetyVerdict, SceneState};
