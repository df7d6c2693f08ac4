use serde::{Deserialize, Serialize};

use crate::profiles::ACCEL_CEILING;
use crate::safety::SceneState;

/// Gap gain of the tailgater (1/s²).
pub const TAILGATER_GAP_GAIN: f64 = 0.5;
/// Relative-speed gain of the tailgater (1/s).
pub const TAILGATER_SPEED_GAIN: f64 = 1.0;
/// Front deceleration (m/s²) a distracted driver eventually notices.
pub const FRONT_BRAKE_CUE: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverPolicy {
    #[default]
    ConstantSpeed,
    /// Closes to `target_gap` metres with a proportional-derivative law.
    Tailgater { target_gap: f64 },
    /// Ignores the front car until it has been braking for `reaction_delay`
    /// seconds, then brakes at `comfort_decel`.
    DistractedFollower { reaction_delay: f64, comfort_decel: f64 },
}

impl DriverPolicy {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |field: &str, v: f64| crate::Error::field(format!("driver.{field}"), format!("out of range: {v}"));
        match *self {
            DriverPolicy::ConstantSpeed => Ok(()),
            DriverPolicy::Tailgater { target_gap } => {
                if target_gap.is_finite() && target_gap >= 0.0 {
                    Ok(())
                } else {
                    Err(bad("target_gap", target_gap))
                }
            }
            DriverPolicy::DistractedFollower {
                reaction_delay,
                comfort_decel,
            } => {
                if !(reaction_delay.is_finite() && reaction_delay >= 0.0) {
                    return Err(bad("reaction_delay", reaction_delay));
                }
                if !(comfort_decel > 0.0 && comfort_decel <= ACCEL_CEILING) {
                    return Err(bad("comfort_decel", comfort_decel));
                }
                Ok(())
            }
        }
    }
}

/// A driver policy with the little memory it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Driver {
    pub policy: DriverPolicy,
    front_braking_since: Option<f64>,
}

impl Driver {
    pub fn new(policy: DriverPolicy) -> Self {
        Self {
            policy,
            front_braking_since: None,
        }
    }

    /// Desired acceleration, clamped to the physical ceiling.
    pub fn step(&mut self, scene: &SceneState, now: f64) -> f64 {
        let accel = match self.policy {
            DriverPolicy::ConstantSpeed => 0.0,
            DriverPolicy::Tailgater { target_gap } => {
                TAILGATER_GAP_GAIN * (scene.gap - target_gap) + TAILGATER_SPEED_GAIN * (scene.front.v - scene.rear.v)
            }
            DriverPolicy::DistractedFollower {
                reaction_delay,
                comfort_decel,
            } => {
                let front_braking = scene.front.a <= FRONT_BRAKE_CUE;
                if front_braking {
                    self.front_braking_since.get_or_insert(now);
                } else if scene.rear.v <= scene.front.v {
                    self.front_braking_since = None;
                }
                match self.front_braking_since {
                    Some(t0) if now - t0 >= reaction_delay && scene.rear.v > 0.0 => -comfort_decel,
                    _ => 0.0,
                }
            }
        };
        accel.clamp(-ACCEL_CEILING, ACCEL_CEILING)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::KinematicState;

    #[test]
    fn constant_speed_never_accelerates() {
        let mut d = Driver::new(DriverPolicy::ConstantSpeed);
        assert_eq!(d.step(&SceneState::from_speeds(1.0, 30.0, 0.0), 0.0), 0.0);
    }

    #[test]
    fn tailgater_closes_the_gap() {
        let mut d = Driver::new(DriverPolicy::Tailgater { target_gap: 2.0 });
        assert_eq!(d.step(&SceneState::from_speeds(10.0, 20.0, 20.0), 0.0), 4.0);
        assert_eq!(d.step(&SceneState::from_speeds(100.0, 20.0, 20.0), 0.0), ACCEL_CEILING);
        assert!(d.step(&SceneState::from_speeds(2.0, 20.0, 15.0), 0.0) < 0.0);
    }

    #[test]
    fn distracted_follower_reacts_late() {
        let mut d = Driver::new(DriverPolicy::DistractedFollower {
            reaction_delay: 1.5,
            comfort_decel: 3.0,
        });
        let braking = SceneState::new(
            KinematicState::new(0.0, 20.0, 0.0),
            KinematicState::new(30.0, 18.0, -8.0),
            30.0,
        );
        assert_eq!(d.step(&braking, 0.0), 0.0);
        assert_eq!(d.step(&braking, 1.0), 0.0);
        assert_eq!(d.step(&braking, 1.5), -3.0);
    }
}
