use serde::{Deserialize, Serialize};

use super::{AccelLaw, ControlOutput, Controller, Mode};
use crate::error::{Error, Result};
use crate::safety::SceneState;

/// Gap divided by closing speed; infinite when the gap is not closing.
pub fn ttc(gap: f64, v_r: f64, v_f: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return Err(Error::NonPositiveGap(gap));
    }
    if v_r > v_f {
        Ok(gap / (v_r - v_f))
    } else {
        Ok(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AebConfig {
    #[serde(default = "AebConfig::default_threshold")]
    pub ttc_threshold: f64,
    #[serde(default = "AebConfig::default_brake")]
    pub brake_magnitude: f64,
    /// Time from the trigger decision until full brake pressure (s).
    #[serde(default = "AebConfig::default_delay")]
    pub actuation_delay: f64,
}

impl AebConfig {
    fn default_threshold() -> f64 {
        2.0
    }

    fn default_brake() -> f64 {
        14.7
    }

    fn default_delay() -> f64 {
        0.3
    }
}

impl Default for AebConfig {
    fn default() -> Self {
        Self {
            ttc_threshold: Self::default_threshold(),
            brake_magnitude: Self::default_brake(),
            actuation_delay: Self::default_delay(),
        }
    }
}

/// Relative slack on the threshold comparison, so that decimal inputs such
/// as 0.02 m at 0.01 m/s land on the intended side of 2 s.
pub const TTC_REL_TOLERANCE: f64 = 1e-9;

/// True when the time-to-collision is at or below the threshold. A scene
/// already in contact always triggers.
pub fn aeb_triggers(scene: &SceneState, cfg: &AebConfig) -> bool {
    match ttc(scene.gap, scene.rear.v, scene.front.v) {
        Ok(t) => t <= cfg.ttc_threshold * (1.0 + TTC_REL_TOLERANCE),
        Err(_) => true,
    }
}

/// Memoryless AEB decision: full brake below the threshold, driver otherwise.
pub fn aeb_step(scene: &SceneState, cfg: &AebConfig, driver_accel: f64) -> f64 {
    if aeb_triggers(scene, cfg) {
        -cfg.brake_magnitude
    } else {
        driver_accel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AebState {
    pub triggered_at: Option<f64>,
}

/// AEB with a latch: once triggered it stays armed until the gap stops
/// closing or the car stands still, and brakes after `actuation_delay`.
#[derive(Debug, Clone)]
pub struct AebController {
    pub config: AebConfig,
    pub state: AebState,
}

impl AebController {
    pub fn new(config: AebConfig) -> Self {
        Self {
            config,
            state: AebState::default(),
        }
    }
}

impl Controller for AebController {
    fn step(&mut self, observed: Option<&SceneState>, driver_accel: f64, now: f64, _override_on: bool) -> ControlOutput {
        let mut onset = false;
        match (self.state.triggered_at, observed) {
            (Some(_), Some(scene)) => {
                if scene.rear.v <= scene.front.v || scene.rear.v <= 0.0 {
                    self.state.triggered_at = None;
                }
            }
            (None, Some(scene)) => {
                if scene.rear.v > 0.0 && aeb_triggers(scene, &self.config) {
                    self.state.triggered_at = Some(now);
                    onset = true;
                }
            }
            // Nothing seen: a latched trigger stays latched.
            (_, None) => {}
        }
        match self.state.triggered_at {
            Some(t0) if now - t0 >= self.config.actuation_delay - 1e-12 => {
                let brake = -self.config.brake_magnitude;
                let applied = brake.min(driver_accel);
                ControlOutput {
                    law: AccelLaw::Constant(applied),
                    controller_accel: Some(brake),
                    mode: Mode::Intervening,
                    onset,
                    suppressed: false,
                }
            }
            Some(_) => ControlOutput {
                onset,
                ..ControlOutput::pass_through(driver_accel, Mode::Intervening)
            },
            None => ControlOutput::pass_through(driver_accel, Mode::Monitoring),
        }
    }
}
