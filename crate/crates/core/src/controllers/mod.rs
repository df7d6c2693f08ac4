//! Rear-car controllers: the preventive jerk-bounded brake (APB), a
//! time-to-collision emergency brake (AEB) baseline, driver policies and
//! failure injection.

mod aeb;
mod apb;
mod driver;
mod failure;

pub use aeb::{aeb_step, aeb_triggers, ttc, AebConfig, AebController, AebState, TTC_REL_TOLERANCE};
pub use apb::{apb_step, ApbConfig, ApbController, ApbDecision, ApbRunner, ControllerState};
pub use driver::{Driver, DriverPolicy, FRONT_BRAKE_CUE, TAILGATER_GAP_GAIN, TAILGATER_SPEED_GAIN};
pub use failure::{with_failure, FailureInjector, WithFailure, DEFAULT_EPISODE_HOLDOFF};

use serde::{Deserialize, Serialize};

use crate::safety::SceneState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    Monitoring,
    Intervening,
    Overridden,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Monitoring => "monitoring",
            Mode::Intervening => "intervening",
            Mode::Overridden => "overridden",
        }
    }
}

/// Acceleration applied to the rear car over one control period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccelLaw {
    Constant(f64),
    /// Hold `a_start` for `hold` seconds, then `max(a_start - jerk * tau, floor)`.
    Ramp {
        a_start: f64,
        hold: f64,
        jerk: f64,
        floor: f64,
    },
}

impl AccelLaw {
    pub fn initial(&self) -> f64 {
        match *self {
            AccelLaw::Constant(a) => a,
            AccelLaw::Ramp { a_start, .. } => a_start,
        }
    }

    /// Acceleration `tau` seconds into the period (ignoring the standstill clamp).
    pub fn value_at(&self, tau: f64) -> f64 {
        match *self {
            AccelLaw::Constant(a) => a,
            AccelLaw::Ramp {
                a_start,
                hold,
                jerk,
                floor,
            } => {
                if tau <= hold {
                    a_start
                } else {
                    (a_start.min(0.0) - jerk * (tau - hold)).max(floor)
                }
            }
        }
    }
}

/// What a controller decided for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub law: AccelLaw,
    /// Controller's own acceleration command while it is engaged.
    pub controller_accel: Option<f64>,
    pub mode: Mode,
    /// An engagement started at this step.
    pub onset: bool,
    /// The engagement at this step was suppressed by failure injection.
    pub suppressed: bool,
}

impl ControlOutput {
    pub fn pass_through(driver_accel: f64, mode: Mode) -> Self {
        Self {
            law: AccelLaw::Constant(driver_accel),
            controller_accel: None,
            mode,
            onset: false,
            suppressed: false,
        }
    }

    pub fn engaged(&self) -> bool {
        self.controller_accel.is_some()
    }
}

/// A stateful rear-car controller driven once per control period.
///
/// `observed` is the scene as sensed; `None` means no front car was detected.
pub trait Controller {
    fn step(
        &mut self,
        observed: Option<&SceneState>,
        driver_accel: f64,
        now: f64,
        override_on: bool,
    ) -> ControlOutput;
}

/// No assistance: the driver's command is applied unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoController;

impl Controller for NoController {
    fn step(&mut self, _: Option<&SceneState>, driver_accel: f64, _: f64, _: bool) -> ControlOutput {
        ControlOutput::pass_through(driver_accel, Mode::Monitoring)
    }
}

impl<C: Controller + ?Sized> Controller for Box<C> {
    fn step(&mut self, observed: Option<&SceneState>, driver_accel: f64, now: f64, override_on: bool) -> ControlOutput {
        (**self).step(observed, driver_accel, now, override_on)
    }
}
