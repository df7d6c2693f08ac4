use serde::{Deserialize, Serialize};

use super::{AccelLaw, ControlOutput, Controller, Mode};
use crate::profiles::{RssParams, ACCEL_CEILING};
use crate::safety::{is_dangerous, safe_distance_after_hold, SceneState};

/// APB mode plus the bookkeeping of the current intervention.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerState {
    pub mode: Mode,
    /// Start of the current intervention; present iff intervening.
    pub onset_time: Option<f64>,
    /// Acceleration the ramp started from.
    pub onset_accel: f64,
    /// Ramp command of the last step; absent unless intervening.
    pub commanded_accel: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApbConfig {
    /// Extra gap (m) demanded before control is handed back to the driver.
    #[serde(default = "ApbConfig::default_margin")]
    pub margin: f64,
    /// Control period (s): how long a driver command is held before the
    /// next decision. The simulator sets it to its step.
    #[serde(skip, default = "ApbConfig::default_period")]
    pub period: f64,
}

impl ApbConfig {
    fn default_margin() -> f64 {
        1e-3
    }

    fn default_period() -> f64 {
        0.01
    }
}

impl Default for ApbConfig {
    fn default() -> Self {
        Self {
            margin: Self::default_margin(),
            period: Self::default_period(),
        }
    }
}

/// Result of one APB decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApbDecision {
    pub state: ControllerState,
    pub law: AccelLaw,
    /// Acceleration applied at the start of the period: the smaller of the
    /// ramp and the driver command while intervening.
    pub commanded: f64,
    /// The ramp value while intervening.
    pub ramp: Option<f64>,
    pub onset: bool,
}

/// Automatic preventive braking.
///
/// While monitoring, the controller checks two things each period: whether
/// the scene is dangerous, and whether letting the driver's command act for
/// one more period still leaves a safe gap afterwards. If either fails it
/// starts a brake ramp of slope `j_max` from the current acceleration down
/// to `-a_min_brake`. The ramp ends at standstill, when the gap is safe again
/// and the driver's command can be handed back, or on driver override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApbController {
    pub params: RssParams,
    pub config: ApbConfig,
}

impl ApbController {
    pub fn new(params: RssParams, config: ApbConfig) -> Self {
        Self { params, config }
    }

    /// Whether holding `driver_accel` for one period (plus latency) and then
    /// braking jerk-bounded keeps the rear behind a worst-case front.
    pub fn handback_safe(&self, scene: &SceneState, driver_accel: f64) -> bool {
        let hold = self.config.period + self.params.latency;
        let d = safe_distance_after_hold(
            scene.rear,
            scene.front.v,
            driver_accel.clamp(-ACCEL_CEILING, ACCEL_CEILING),
            hold,
            &self.params,
        );
        scene.gap >= d + self.config.margin
    }

    fn ramp_value(&self, state: &ControllerState, now: f64) -> f64 {
        let onset = state.onset_time.unwrap_or(now);
        (state.onset_accel - self.params.j_max * (now - onset)).max(-self.params.a_min_brake)
    }

    fn intervene(&self, state: ControllerState, driver_accel: f64, now: f64, onset: bool) -> ApbDecision {
        let p = &self.params;
        let ramp = self.ramp_value(&state, now);
        let floor = -p.a_min_brake;
        let law = if driver_accel >= ramp {
            AccelLaw::Ramp {
                a_start: ramp,
                hold: 0.0,
                jerk: p.j_max,
                floor,
            }
        } else if driver_accel <= floor {
            AccelLaw::Constant(driver_accel)
        } else {
            // The driver brakes harder until the ramp catches up.
            AccelLaw::Ramp {
                a_start: driver_accel,
                hold: (ramp - driver_accel) / p.j_max,
                jerk: p.j_max,
                floor,
            }
        };
        ApbDecision {
            state: ControllerState {
                commanded_accel: Some(ramp),
                ..state
            },
            law,
            commanded: ramp.min(driver_accel),
            ramp: Some(ramp),
            onset,
        }
    }

    fn pass(mode: Mode, driver_accel: f64) -> ApbDecision {
        ApbDecision {
            state: ControllerState {
                mode,
                ..ControllerState::default()
            },
            law: AccelLaw::Constant(driver_accel),
            commanded: driver_accel,
            ramp: None,
            onset: false,
        }
    }

    /// One decision. `scene` is `None` when no front car is detected.
    pub fn step(
        &self,
        state: &ControllerState,
        scene: Option<&SceneState>,
        driver_accel: f64,
        now: f64,
        override_on: bool,
    ) -> ApbDecision {
        if override_on {
            return Self::pass(Mode::Overridden, driver_accel);
        }
        let Some(scene) = scene else {
            return Self::pass(Mode::Monitoring, driver_accel);
        };
        let verdict = is_dangerous(scene, &self.params);

        if state.mode == Mode::Intervening {
            let standstill = scene.rear.v <= 0.0;
            let released = (standstill || !verdict.dangerous) && self.handback_safe(scene, driver_accel);
            if !released {
                return self.intervene(*state, driver_accel, now, false);
            }
            return Self::pass(Mode::Monitoring, driver_accel);
        }

        let engage = verdict.dangerous || !self.handback_safe(scene, driver_accel);
        let parked = scene.rear.v <= 0.0 && driver_accel <= 0.0;
        if engage && !parked {
            let onset = ControllerState {
                mode: Mode::Intervening,
                onset_time: Some(now),
                onset_accel: self.params.clamp_onset_accel(scene.rear.a),
                commanded_accel: None,
            };
            return self.intervene(onset, driver_accel, now, true);
        }
        Self::pass(Mode::Monitoring, driver_accel)
    }
}

/// Stateless form of [`ApbController::step`] with the default configuration.
pub fn apb_step(
    state: &ControllerState,
    scene: &SceneState,
    p: &RssParams,
    driver_accel: f64,
    now: f64,
    override_on: bool,
) -> (ControllerState, f64) {
    let ctrl = ApbController::new(*p, ApbConfig::default());
    let d = ctrl.step(state, Some(scene), driver_accel, now, override_on);
    (d.state, d.commanded)
}

/// [`ApbController`] with its state, usable as a [`Controller`].
#[derive(Debug, Clone)]
pub struct ApbRunner {
    pub controller: ApbController,
    pub state: ControllerState,
}

impl ApbRunner {
    pub fn new(controller: ApbController) -> Self {
        Self {
            controller,
            state: ControllerState::default(),
        }
    }
}

impl Controller for ApbRunner {
    fn step(&mut self, observed: Option<&SceneState>, driver_accel: f64, now: f64, override_on: bool) -> ControlOutput {
        let d = self.controller.step(&self.state, observed, driver_accel, now, override_on);
        self.state = d.state;
        ControlOutput {
            law: d.law,
            controller_accel: d.ramp,
            mode: d.state.mode,
            onset: d.onset,
            suppressed: false,
        }
    }
}
