use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::scenario::SensorModel;
use crate::profiles::KinematicState;
use crate::safety::SceneState;

/// Turns the true scene into what the controller perceives.
#[derive(Debug, Clone)]
pub struct Sensor {
    model: SensorModel,
    rng: ChaCha8Rng,
    ghost_until: f64,
}

impl Sensor {
    pub fn new(model: SensorModel, seed: u64) -> Self {
        Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ghost_until: f64::NEG_INFINITY,
        }
    }

    /// Whether a phantom obstacle is being reported at `now`.
    pub fn ghost_active(&self, now: f64) -> bool {
        now < self.ghost_until
    }

    /// Observation at `now`; `None` when the front car is missed. Exactly
    /// three random numbers are drawn per call, so paired runs stay aligned.
    pub fn observe(&mut self, truth: &SceneState, now: f64) -> Option<SceneState> {
        if self.model.is_perfect() {
            return Some(*truth);
        }
        let ghost_draw: f64 = self.rng.gen();
        let miss_draw: f64 = self.rng.gen();
        let noise = if self.model.range_noise_sigma > 0.0 {
            Normal::new(0.0, self.model.range_noise_sigma)
                .expect("sigma validated")
                .sample(&mut self.rng)
        } else {
            let _: f64 = self.rng.gen();
            0.0
        };

        if !self.ghost_active(now) && ghost_draw < self.model.ghost_rate {
            self.ghost_until = now + self.model.ghost_duration;
        }
        if self.ghost_active(now) && self.model.ghost_gap < truth.gap {
            let gap = self.model.ghost_gap;
            return Some(SceneState::new(
                truth.rear,
                KinematicState::new(truth.rear.x + gap, 0.0, 0.0),
                gap,
            ));
        }
        if miss_draw < self.model.miss_rate {
            return None;
        }
        let gap = truth.gap + noise;
        Some(SceneState::new(
            truth.rear,
            KinematicState {
                x: truth.rear.x + gap,
                ..truth.front
            },
            gap,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_sensor_sees_the_truth() {
        let truth = SceneState::from_speeds(12.0, 20.0, 18.0);
        let mut s = Sensor::new(SensorModel::default(), 1);
        assert_eq!(s.observe(&truth, 0.0), Some(truth));
    }

    #[test]
    fn always_missing() {
        let model = SensorModel {
            miss_rate: 1.0,
            ..SensorModel::default()
        };
        let mut s = Sensor::new(model, 1);
        assert_eq!(s.observe(&SceneState::from_speeds(12.0, 20.0, 18.0), 0.0), None);
    }

    #[test]
    fn ghost_stands_at_its_gap_for_its_duration() {
        let model = SensorModel {
            ghost_rate: 1.0,
            ghost_gap: 20.0,
            ghost_duration: 0.5,
            ..SensorModel::default()
        };
        let mut s = Sensor::new(model, 1);
        let truth = SceneState::from_speeds(60.0, 20.0, 20.0);
        let seen = s.observe(&truth, 0.0).unwrap();
        assert_eq!(seen.gap, 20.0);
        assert_eq!(seen.front.v, 0.0);
        assert!(s.ghost_active(0.49));
        assert!(!s.ghost_active(0.5));
        // A ghost behind the real car is hidden by it.
        let close = SceneState::from_speeds(10.0, 20.0, 20.0);
        assert_eq!(s.observe(&close, 0.1).unwrap().gap, 10.0);
    }

    #[test]
    fn noise_is_seeded() {
        let model = SensorModel {
            range_noise_sigma: 0.5,
            ..SensorModel::default()
        };
        let truth = SceneState::from_speeds(30.0, 20.0, 20.0);
        let a: Vec<_> = {
            let mut s = Sensor::new(model, 4);
            (0..10).map(|k| s.observe(&truth, k as f64).unwrap().gap).collect()
        };
        let b: Vec<_> = {
            let mut s = Sensor::new(model, 4);
            (0..10).map(|k| s.observe(&truth, k as f64).unwrap().gap).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().any(|g| *g != 30.0));
    }
}
