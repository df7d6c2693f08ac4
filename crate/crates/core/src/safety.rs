//! Safe distances, the dangerous-situation predicate, proper-response
//! envelopes and trace compliance.

use crate::error::{Error, Result};
use crate::motion::{max_relative_advance, TrajectoryBuilder};
use crate::profiles::{profile_trajectory, velocity_at, KinematicState, ProfileId, RssParams};
use crate::sim::Trace;

/// Two cars on one lane. `gap` is bumper to bumper, car lengths already removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneState {
    pub rear: KinematicState,
    pub front: KinematicState,
    pub gap: f64,
}

impl SceneState {
    pub fn new(rear: KinematicState, front: KinematicState, gap: f64) -> Self {
        Self { rear, front, gap }
    }

    /// Scene from two speeds and a gap, both cars coasting.
    pub fn from_speeds(gap: f64, v_rear: f64, v_front: f64) -> Self {
        Self {
            rear: KinematicState::new(0.0, v_rear, 0.0),
            front: KinematicState::new(gap, v_front, 0.0),
            gap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyVerdict {
    pub dangerous: bool,
    pub d_safe: f64,
    /// `gap - d_safe`.
    pub margin: f64,
}

impl SafetyVerdict {
    pub fn new(gap: f64, d_safe: f64) -> Self {
        let margin = gap - d_safe;
        Self {
            dangerous: margin < 0.0,
            d_safe,
            margin,
        }
    }
}

/// Smallest initial gap for which the rear, following `br`, never reaches the
/// front following `bf`: the supremum over time of the rear's advance over
/// the front, clamped at zero.
pub fn safe_distance_generalized(
    rear0: KinematicState,
    front0: KinematicState,
    bf: ProfileId,
    br: ProfileId,
    p: &RssParams,
) -> f64 {
    let rear = profile_trajectory(br, KinematicState { x: 0.0, ..rear0 }, p);
    let front = profile_trajectory(bf, KinematicState { x: 0.0, ..front0 }, p);
    let horizon = rear.stop_time().max(front.stop_time());
    max_relative_advance(&rear, &front, horizon).0.max(0.0)
}

/// Safe distance of the original response-time model: the rear accelerates
/// for `rho` then brakes at `a_min_brake`, the front brakes at `a_max_brake`.
pub fn safe_distance_rss(v_r: f64, v_f: f64, p: &RssParams) -> f64 {
    safe_distance_generalized(
        KinematicState::at_speed(v_r),
        KinematicState::at_speed(v_f),
        ProfileId::FrontMaxBrake,
        ProfileId::RssRear,
        p,
    )
}

/// Full-stop form of [`safe_distance_rss`].
pub fn safe_distance_rss_closed_form(v_r: f64, v_f: f64, p: &RssParams) -> f64 {
    let v_rho = v_r + p.rho * p.a_max_accel;
    let d = v_r * p.rho + 0.5 * p.a_max_accel * p.rho * p.rho + v_rho * v_rho / (2.0 * p.a_min_brake)
        - v_f * v_f / (2.0 * p.a_max_brake);
    d.max(0.0)
}

/// Safe distance for a jerk-bounded rear behind a front braking at
/// `a_max_brake` from speed `v_f`.
pub fn safe_distance_apb(rear0: KinematicState, v_f: f64, p: &RssParams) -> f64 {
    let d = safe_distance_generalized(
        rear0,
        KinematicState::at_speed(v_f),
        ProfileId::FrontMaxBrake,
        ProfileId::JerkBounded,
        p,
    );
    debug_assert!(
        !full_stop_dominates(rear0, p) || {
            let closed = safe_distance_apb_closed_form(rear0, v_f, p);
            (closed - d).abs() <= 1e-9 * (1.0 + closed.abs())
        },
        "closed form disagrees with the supremum inside its validity regime"
    );
    d
}

/// `[d_jerk + v(T)^2 / (2 a_min_brake) - v_f^2 / (2 a_max_brake)]_+`.
///
/// Only exact when the rear never out-brakes the front (see
/// [`full_stop_dominates`]); otherwise the supremum may be interior.
pub fn safe_distance_apb_closed_form(rear0: KinematicState, v_f: f64, p: &RssParams) -> f64 {
    let s = crate::profiles::brake_schedule_jerk(rear0, p);
    (s.d_total - v_f * v_f / (2.0 * p.a_max_brake)).max(0.0)
}

/// True when the rear's deceleration never exceeds the front's, so the gap
/// needed is decided at the full stop.
pub fn full_stop_dominates(rear0: KinematicState, p: &RssParams) -> bool {
    p.a_min_brake <= p.a_max_brake && p.clamp_onset_accel(rear0.a).abs() <= p.a_max_brake
}

/// Safe distance when the rear first holds `hold_accel` for `hold` seconds and
/// then follows the jerk-bounded profile, against a front braking at
/// `a_max_brake` from the start. With `hold == 0` this is
/// [`safe_distance_apb`].
pub fn safe_distance_after_hold(
    rear0: KinematicState,
    v_f: f64,
    hold_accel: f64,
    hold: f64,
    p: &RssParams,
) -> f64 {
    if hold <= 0.0 {
        return safe_distance_apb(rear0, v_f, p);
    }
    let rear = TrajectoryBuilder::new(0.0, rear0.v)
        .constant(hold_accel, hold)
        .ramp(
            p.clamp_onset_accel(hold_accel),
            p.j_max,
            -p.a_min_brake,
            f64::INFINITY,
        )
        .build();
    let front = TrajectoryBuilder::new(0.0, v_f)
        .constant(-p.a_max_brake, f64::INFINITY)
        .build();
    let horizon = rear.stop_time().max(front.stop_time());
    max_relative_advance(&rear, &front, horizon).0.max(0.0)
}

/// Safe distance used by the monitor: with a sensing latency the scene is
/// extrapolated worst-case (rear accelerating at `a_max_accel`) before the
/// jerk-bounded response starts.
pub fn monitor_safe_distance(rear0: KinematicState, v_f: f64, p: &RssParams) -> f64 {
    if p.latency > 0.0 {
        safe_distance_after_hold(rear0, v_f, p.a_max_accel, p.latency, p)
    } else {
        safe_distance_apb(rear0, v_f, p)
    }
}

/// The scene is dangerous when the gap is strictly below the safe distance.
pub fn is_dangerous(scene: &SceneState, p: &RssParams) -> SafetyVerdict {
    let d_safe = monitor_safe_distance(scene.rear, scene.front.v, p);
    SafetyVerdict::new(scene.gap, d_safe)
}

/// Velocity bounds both cars must respect from a danger onset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseEnvelope {
    pub t0: f64,
    pub front_at_onset: KinematicState,
    pub rear_at_onset: KinematicState,
    pub params: RssParams,
}

impl ResponseEnvelope {
    /// Lowest speed the front may have `dt` seconds after onset.
    pub fn front_min_velocity(&self, dt: f64) -> f64 {
        velocity_at(ProfileId::FrontMaxBrake, self.front_at_onset, &self.params, dt)
    }

    /// Highest speed the rear may have `dt` seconds after onset.
    pub fn rear_max_velocity(&self, dt: f64) -> f64 {
        velocity_at(ProfileId::JerkBounded, self.rear_at_onset, &self.params, dt)
    }
}

pub fn response_envelope(scene_at_t0: &SceneState, t0: f64, p: &RssParams) -> Result<ResponseEnvelope> {
    let verdict = is_dangerous(scene_at_t0, p);
    if !verdict.dangerous {
        return Err(Error::SceneStillSafe {
            margin: verdict.margin,
        });
    }
    Ok(ResponseEnvelope {
        t0,
        front_at_onset: scene_at_t0.front,
        rear_at_onset: scene_at_t0.rear,
        params: *p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplianceTolerance {
    /// Absolute velocity tolerance (m/s).
    pub abs: f64,
    /// Extra allowance per decision step; zero with the exact integrator.
    pub step_slack: f64,
}

impl Default for ComplianceTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-6,
            step_slack: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplianceReport {
    pub episodes_checked: usize,
    pub front_first_violation: Option<f64>,
    pub rear_first_violation: Option<f64>,
    pub max_front_violation: f64,
    pub max_rear_violation: f64,
}

impl ComplianceReport {
    pub fn passed(&self) -> bool {
        self.front_first_violation.is_none() && self.rear_first_violation.is_none()
    }

    /// The front left its envelope, so the rear is not to blame.
    pub fn front_exceeded_assumptions(&self) -> bool {
        self.front_first_violation.is_some()
    }
}

/// Checks every dangerous episode of `trace` against the response envelope
/// frozen at the episode's onset.
pub fn check_compliance(trace: &Trace, p: &RssParams, tol: ComplianceTolerance) -> Result<ComplianceReport> {
    let records = &trace.records;
    for w in records.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::MalformedTrace(format!(
                "timestamps not increasing at t={}",
                w[1].t
            )));
        }
    }
    let mut report = ComplianceReport::default();
    let mut envelope: Option<(ResponseEnvelope, usize)> = None;
    for (i, rec) in records.iter().enumerate() {
        if !rec.dangerous {
            envelope = None;
            continue;
        }
        let (env, onset_idx) = match envelope {
            Some(e) => e,
            None => {
                let env = ResponseEnvelope {
                    t0: rec.t,
                    front_at_onset: rec.front,
                    rear_at_onset: rec.rear,
                    params: *p,
                };
                report.episodes_checked += 1;
                envelope = Some((env, i));
                (env, i)
            }
        };
        let elapsed = rec.t - env.t0;
        let allowance = tol.abs + tol.step_slack * (i - onset_idx) as f64;
        let front_short = env.front_min_velocity(elapsed) - rec.front.v;
        if front_short > allowance {
            report.max_front_violation = report.max_front_violation.max(front_short);
            report.front_first_violation.get_or_insert(rec.t);
        }
        let rear_excess = rec.rear.v - env.rear_max_velocity(elapsed);
        if rear_excess > allowance {
            report.max_rear_violation = report.max_rear_violation.max(rear_excess);
            report.rear_first_violation.get_or_insert(rec.t);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Dense-grid oracle: max over t of the difference of closed-form distances.
    fn grid_oracle(rear0: KinematicState, front0: KinematicState, bf: ProfileId, br: ProfileId, p: &RssParams) -> f64 {
        use crate::profiles::{distance_traveled, stop_time};
        let end = stop_time(br, rear0, p).max(stop_time(bf, front0, p));
        let n = (end / 1e-4).ceil() as usize;
        let mut best: f64 = 0.0;
        for k in 0..=n {
            let t = (k as f64 * 1e-4).min(end);
            best = best.max(distance_traveled(br, rear0, p, t) - distance_traveled(bf, front0, p, t));
        }
        best
    }

    #[test]
    fn identical_profiles_need_no_gap() {
        let p = RssParams::default();
        let s = KinematicState::at_speed(17.0);
        for id in ProfileId::ALL {
            assert_eq!(safe_distance_generalized(s, s, id, id, &p), 0.0);
        }
    }

    #[test]
    fn generalized_examples() {
        let p = RssParams::default();
        let d = safe_distance_generalized(
            KinematicState::at_speed(20.0),
            KinematicState::at_speed(20.0),
            ProfileId::FrontMaxBrake,
            ProfileId::JerkBounded,
            &p,
        );
        assert!(close(d, 44.0 + 1.0 / 3.0, 1e-9), "{d}");

        // Slow rear behind a fast front: the worst moment is interior.
        let rear = KinematicState::at_speed(5.0);
        let front = KinematicState::at_speed(30.0);
        let d = safe_distance_generalized(rear, front, ProfileId::FrontMaxBrake, ProfileId::JerkBounded, &p);
        let oracle = grid_oracle(rear, front, ProfileId::FrontMaxBrake, ProfileId::JerkBounded, &p);
        assert!(close(d, oracle, 1e-6), "{d} vs {oracle}");
        assert_eq!(safe_distance_apb_closed_form(rear, 30.0, &p), 0.0);
    }

    #[test]
    fn interior_supremum_beats_full_stop_difference() {
        // Rear brakes harder than the front's worst case and starts faster.
        let p = RssParams {
            a_max_brake: 3.0,
            a_min_brake: 9.0,
            j_max: 20.0,
            ..RssParams::default()
        };
        let rear = KinematicState::at_speed(20.0);
        let d = safe_distance_apb(rear, 15.0, &p);
        let closed = safe_distance_apb_closed_form(rear, 15.0, &p);
        let oracle = grid_oracle(rear, KinematicState::at_speed(15.0), ProfileId::FrontMaxBrake, ProfileId::JerkBounded, &p);
        assert!(d > closed + 1.0, "{d} vs {closed}");
        assert!(close(d, oracle, 1e-6));
    }

    #[test]
    fn rss_examples() {
        let p0 = RssParams::default();
        assert_eq!(safe_distance_rss(0.0, 0.0, &p0), 0.0);
        assert_eq!(safe_distance_rss(0.0, 30.0, &p0), 0.0);
        let p = RssParams {
            rho: 1.0,
            ..RssParams::default()
        };
        assert!(close(safe_distance_rss(20.0, 20.0, &p), 56.5, 1e-9));
        assert!(close(safe_distance_rss_closed_form(20.0, 20.0, &p), 56.5, 1e-12));
        let oracle = grid_oracle(
            KinematicState::at_speed(20.0),
            KinematicState::at_speed(20.0),
            ProfileId::FrontMaxBrake,
            ProfileId::RssRear,
            &p,
        );
        assert!(close(oracle, 56.5, 1e-6));
    }

    #[test]
    fn rss_without_response_reduces_to_braking_difference() {
        let p = RssParams {
            rho: 0.0,
            a_max_accel: 0.0,
            ..RssParams::default()
        };
        for v in [0.0, 3.0, 11.0, 27.5] {
            let expected = (v * v / (2.0 * p.a_min_brake) - v * v / (2.0 * p.a_max_brake)).max(0.0);
            assert!(close(safe_distance_rss(v, v, &p), expected, 1e-9));
        }
    }

    #[test]
    fn apb_examples() {
        let p = RssParams::default();
        assert!(close(safe_distance_apb(KinematicState::at_speed(20.0), 20.0, &p), 44.0 + 1.0 / 3.0, 1e-9));
        assert_eq!(safe_distance_apb(KinematicState::default(), 0.0, &p), 0.0);
        let d = safe_distance_apb(KinematicState::at_speed(10.0), 9.99, &p);
        let oracle = grid_oracle(
            KinematicState::at_speed(10.0),
            KinematicState::at_speed(9.99),
            ProfileId::FrontMaxBrake,
            ProfileId::JerkBounded,
            &p,
        );
        assert!(close(d, oracle, 1e-6));
        assert!(close(d, 21.0 + 5.0 / 6.0 - 99.8001 / 16.0, 1e-9), "{d}");
        assert!(close(d, 15.595, 1e-3));
    }

    #[test]
    fn dangerous_examples() {
        let p = RssParams::default();
        let tailgating = SceneState::from_speeds(0.03, 10.0, 9.99);
        assert!(is_dangerous(&tailgating, &p).dangerous);

        let far = SceneState::from_speeds(100.0, 10.0, 9.99);
        let v = is_dangerous(&far, &p);
        assert!(!v.dangerous);
        assert!(close(v.margin, 100.0 - 15.5958, 1e-3));

        let d = safe_distance_apb(KinematicState::at_speed(10.0), 9.99, &p);
        let boundary = SceneState::from_speeds(d, 10.0, 9.99);
        assert!(!is_dangerous(&boundary, &p).dangerous);
    }

    #[test]
    fn latency_only_grows_the_safe_distance() {
        let p = RssParams::default();
        let lagged = RssParams { latency: 0.2, ..p };
        let rear = KinematicState::at_speed(20.0);
        let base = monitor_safe_distance(rear, 15.0, &p);
        let with_lag = monitor_safe_distance(rear, 15.0, &lagged);
        assert!(with_lag > base + 20.0 * 0.2 * 0.9);
        // Zero hold falls back to the plain profile.
        assert_eq!(safe_distance_after_hold(rear, 15.0, 3.0, 0.0, &p), base);
    }

    #[test]
    fn envelope_examples() {
        let p = RssParams::default();
        let scene = SceneState::from_speeds(1.0, 20.0, 20.0);
        let env = response_envelope(&scene, 3.0, &p).unwrap();
        assert_eq!(env.front_min_velocity(1.0), 12.0);
        assert!(close(env.rear_max_velocity(2.0), 16.0, 1e-12));

        let stopped = SceneState::from_speeds(-0.5, 0.0, 0.0);
        let env = response_envelope(&stopped, 0.0, &p).unwrap();
        for t in [0.0, 1.0, 10.0] {
            assert_eq!(env.rear_max_velocity(t), 0.0);
        }

        let safe = SceneState::from_speeds(500.0, 20.0, 20.0);
        assert!(matches!(response_envelope(&safe, 0.0, &p), Err(Error::SceneStillSafe { .. })));
    }
}
