use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ControlOutput, Controller, Mode};
use crate::safety::SceneState;

/// Engagements closer together than this (s) belong to one episode and
/// share a single failure draw.
pub const DEFAULT_EPISODE_HOLDOFF: f64 = 2.0;

/// Decides, once per engagement episode, whether the controller fails to act.
#[derive(Debug, Clone)]
pub struct FailureInjector {
    pub p_fail: f64,
    pub holdoff: f64,
    rng: ChaCha8Rng,
    last_engaged: Option<f64>,
    failing: bool,
    episodes: u64,
}

impl FailureInjector {
    pub fn new(p_fail: f64, seed: u64) -> Self {
        Self {
            p_fail,
            holdoff: DEFAULT_EPISODE_HOLDOFF,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_engaged: None,
            failing: false,
            episodes: 0,
        }
    }

    pub fn with_holdoff(mut self, holdoff: f64) -> Self {
        self.holdoff = holdoff;
        self
    }

    /// Number of episodes drawn so far.
    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    /// Call on every step the controller is engaged; returns whether the
    /// engagement is suppressed.
    pub fn engaged(&mut self, now: f64) -> bool {
        let new_episode = match self.last_engaged {
            Some(t) => now - t > self.holdoff,
            None => true,
        };
        if new_episode {
            self.episodes += 1;
            self.failing = self.p_fail > 0.0 && self.rng.gen_bool(self.p_fail.min(1.0));
        }
        self.last_engaged = Some(now);
        self.failing
    }
}

/// A controller whose engagements may silently fail.
#[derive(Debug, Clone)]
pub struct WithFailure<C> {
    pub inner: C,
    pub injector: FailureInjector,
}

pub fn with_failure<C: Controller>(inner: C, p_fail: f64, seed: u64) -> WithFailure<C> {
    WithFailure {
        inner,
        injector: FailureInjector::new(p_fail, seed),
    }
}

impl<C: Controller> Controller for WithFailure<C> {
    fn step(&mut self, observed: Option<&SceneState>, driver_accel: f64, now: f64, override_on: bool) -> ControlOutput {
        let out = self.inner.step(observed, driver_accel, now, override_on);
        if out.mode != Mode::Intervening || !self.injector.engaged(now) {
            return out;
        }
        ControlOutput {
            onset: out.onset,
            suppressed: true,
            ..ControlOutput::pass_through(driver_accel, Mode::Monitoring)
        }
    }
}
