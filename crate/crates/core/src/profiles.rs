//! Closed-form braking profiles.
//!
//! Three profiles are modelled, each mapping an initial kinematic state to a
//! future velocity and stop time:
//!
//! * [`ProfileId::FrontMaxBrake`]: constant deceleration `a_max_brake`, the
//!   worst case assumed of the front car.
//! * [`ProfileId::RssRear`]: accelerate at `a_max_accel` for the response time
//!   `rho`, then brake at `a_min_brake`.
//! * [`ProfileId::JerkBounded`]: ramp the acceleration down with slope `j_max`
//!   until it reaches `-a_min_brake`, then hold it until standstill.
//!
//! Brake and jerk parameters are positive magnitudes; the acceleration stored
//! in [`KinematicState`] is signed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{jerk_zero_crossing, Trajectory, TrajectoryBuilder};

/// Physical ceiling on any acceleration magnitude (about 1.5 g).
pub const ACCEL_CEILING: f64 = 15.0;

/// State of one vehicle: position (m), speed (m/s), signed acceleration (m/s²).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KinematicState {
    pub x: f64,
    pub v: f64,
    pub a: f64,
}

impl KinematicState {
    pub fn new(x: f64, v: f64, a: f64) -> Self {
        Self { x, v, a }
    }

    pub fn at_speed(v: f64) -> Self {
        Self { x: 0.0, v, a: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RssParams {
    /// Response time (s).
    #[serde(default)]
    pub rho: f64,
    /// Strongest braking assumed of the front car (m/s²).
    pub a_max_brake: f64,
    /// Braking the rear car is guaranteed to apply (m/s²).
    pub a_min_brake: f64,
    /// Worst-case rear acceleration during the response time (m/s²).
    pub a_max_accel: f64,
    /// Slope of the braking ramp (m/s³).
    pub j_max: f64,
    /// Sensing latency the monitor extrapolates over (s).
    #[serde(default)]
    pub latency: f64,
}

impl Default for RssParams {
    fn default() -> Self {
        Self {
            rho: 0.0,
            a_max_brake: 8.0,
            a_min_brake: 4.0,
            a_max_accel: 2.0,
            j_max: 2.0,
            latency: 0.0,
        }
    }
}

impl RssParams {
    /// Checks ranges and returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let positive = [
            ("a_max_brake", self.a_max_brake),
            ("a_min_brake", self.a_min_brake),
            ("j_max", self.j_max),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::field(
                    format!("params.{name}"),
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        let non_negative = [
            ("rho", self.rho),
            ("a_max_accel", self.a_max_accel),
            ("latency", self.latency),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::field(
                    format!("params.{name}"),
                    format!("must be finite and >= 0, got {value}"),
                ));
            }
        }
        for (name, value) in [
            ("a_max_brake", self.a_max_brake),
            ("a_min_brake", self.a_min_brake),
            ("a_max_accel", self.a_max_accel),
        ] {
            if value > ACCEL_CEILING {
                return Err(Error::field(
                    format!("params.{name}"),
                    format!("{value} exceeds the physical ceiling {ACCEL_CEILING} m/s^2"),
                ));
            }
        }
        let mut warnings = Vec::new();
        if self.a_min_brake > self.a_max_brake {
            warnings.push(format!(
                "a_min_brake ({}) exceeds a_max_brake ({}): the rear is assumed to brake harder than the front's worst case",
                self.a_min_brake, self.a_max_brake
            ));
        }
        Ok(warnings)
    }

    /// Initial acceleration as seen by the jerk-bounded profile: positive
    /// values are released to zero at once, and braking harder than
    /// `a_min_brake` is credited only up to `a_min_brake`.
    pub fn clamp_onset_accel(&self, a: f64) -> f64 {
        a.clamp(-self.a_min_brake, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileId {
    FrontMaxBrake,
    RssRear,
    JerkBounded,
}

impl ProfileId {
    pub const ALL: [ProfileId; 3] = [
        ProfileId::FrontMaxBrake,
        ProfileId::RssRear,
        ProfileId::JerkBounded,
    ];
}

/// Phase boundaries of a jerk-bounded stop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrakeSchedule {
    /// Time at which the ramp reaches `-a_min_brake`.
    pub t1: f64,
    /// Time at which velocity reaches zero during the ramp.
    pub t2: f64,
    /// `min(t1, t2)`: end of the ramp.
    pub t_switch: f64,
    /// First time the velocity is zero.
    pub t_stop: f64,
    pub v_at_switch: f64,
    /// Distance covered during the ramp.
    pub d_jerk: f64,
    /// Total braking distance.
    pub d_total: f64,
}

/// Constant-jerk state after `t` seconds, valid up to the velocity zero.
pub fn jerk_phase_state(s0: KinematicState, j_max: f64, t: f64) -> Result<KinematicState> {
    if !(t >= 0.0) {
        return Err(Error::field("t", format!("must be >= 0, got {t}")));
    }
    let a0 = s0.a.min(0.0);
    let t2 = jerk_zero_crossing(s0.v, a0, j_max);
    if t > t2 * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::JerkPhaseOverrun { t, t2 });
    }
    let x = s0.x + s0.v * t + 0.5 * a0 * t * t - j_max * t * t * t / 6.0;
    let v = (s0.v + a0 * t - 0.5 * j_max * t * t).max(0.0);
    let a = a0 - j_max * t;
    Ok(KinematicState { x, v, a })
}

pub fn brake_schedule_jerk(s0: KinematicState, p: &RssParams) -> BrakeSchedule {
    let j = p.j_max;
    let a_min = p.a_min_brake;
    let a0 = p.clamp_onset_accel(s0.a);
    let v0 = s0.v.max(0.0);

    let t1 = (a0 + a_min) / j;
    let t2 = jerk_zero_crossing(v0, a0, j);
    // A tie is the stop branch; both branches agree there.
    let stops_in_ramp = t2 <= t1;
    let t_switch = if stops_in_ramp { t2 } else { t1 };
    let v_at_switch = if stops_in_ramp {
        0.0
    } else {
        (v0 + a0 * t_switch - 0.5 * j * t_switch * t_switch).max(0.0)
    };
    let t_stop = if stops_in_ramp {
        t2
    } else {
        t_switch + v_at_switch / a_min
    };
    let d_jerk = v0 * t_switch + 0.5 * a0 * t_switch * t_switch - j * t_switch.powi(3) / 6.0;
    let d_total = d_jerk + v_at_switch * v_at_switch / (2.0 * a_min);
    BrakeSchedule {
        t1,
        t2,
        t_switch,
        t_stop,
        v_at_switch,
        d_jerk,
        d_total,
    }
}

/// First time the profile's velocity is zero.
pub fn stop_time(profile: ProfileId, s0: KinematicState, p: &RssParams) -> f64 {
    let v0 = s0.v.max(0.0);
    match profile {
        ProfileId::FrontMaxBrake => v0 / p.a_max_brake,
        ProfileId::RssRear => p.rho + (v0 + p.rho * p.a_max_accel) / p.a_min_brake,
        ProfileId::JerkBounded => brake_schedule_jerk(s0, p).t_stop,
    }
}

pub fn velocity_at(profile: ProfileId, s0: KinematicState, p: &RssParams, t: f64) -> f64 {
    let v0 = s0.v.max(0.0);
    let t = t.max(0.0);
    match profile {
        ProfileId::FrontMaxBrake => (v0 - t * p.a_max_brake).max(0.0),
        ProfileId::RssRear => {
            if t <= p.rho {
                v0 + t * p.a_max_accel
            } else {
                (v0 + p.rho * p.a_max_accel - (t - p.rho) * p.a_min_brake).max(0.0)
            }
        }
        ProfileId::JerkBounded => {
            let s = brake_schedule_jerk(s0, p);
            if t >= s.t_stop {
                0.0
            } else if t <= s.t_switch {
                let a0 = p.clamp_onset_accel(s0.a);
                (v0 + a0 * t - 0.5 * p.j_max * t * t).max(0.0)
            } else {
                (s.v_at_switch - (t - s.t_switch) * p.a_min_brake).max(0.0)
            }
        }
    }
}

/// Distance covered in `[0, t]`; `t` may be infinite.
pub fn distance_traveled(profile: ProfileId, s0: KinematicState, p: &RssParams, t: f64) -> f64 {
    let v0 = s0.v.max(0.0);
    let t = t.max(0.0);
    // Distance covered in `tau` seconds of constant deceleration `decel` from `v`.
    let braking = |v: f64, decel: f64, tau: f64| {
        let tau = tau.min(v / decel);
        v * tau - 0.5 * decel * tau * tau
    };
    match profile {
        ProfileId::FrontMaxBrake => braking(v0, p.a_max_brake, t),
        ProfileId::RssRear => {
            let tr = t.min(p.rho);
            let d_response = v0 * tr + 0.5 * p.a_max_accel * tr * tr;
            if t <= p.rho {
                d_response
            } else {
                let v_rho = v0 + p.rho * p.a_max_accel;
                d_response + braking(v_rho, p.a_min_brake, t - p.rho)
            }
        }
        ProfileId::JerkBounded => {
            let s = brake_schedule_jerk(s0, p);
            if t >= s.t_stop {
                return s.d_total;
            }
            let a0 = p.clamp_onset_accel(s0.a);
            let tj = t.min(s.t_switch);
            let d_ramp = v0 * tj + 0.5 * a0 * tj * tj - p.j_max * tj.powi(3) / 6.0;
            if t <= s.t_switch {
                d_ramp
            } else {
                d_ramp + braking(s.v_at_switch, p.a_min_brake, t - s.t_switch)
            }
        }
    }
}

/// The profile as a piecewise trajectory starting at `s0.x`.
pub fn profile_trajectory(profile: ProfileId, s0: KinematicState, p: &RssParams) -> Trajectory {
    let b = TrajectoryBuilder::new(s0.x, s0.v);
    match profile {
        ProfileId::FrontMaxBrake => b.constant(-p.a_max_brake, f64::INFINITY),
        ProfileId::RssRear => b
            .constant(p.a_max_accel, p.rho)
            .constant(-p.a_min_brake, f64::INFINITY),
        ProfileId::JerkBounded => b.ramp(
            p.clamp_onset_accel(s0.a),
            p.j_max,
            -p.a_min_brake,
            f64::INFINITY,
        ),
    }
    .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(j: f64, a_min: f64) -> RssParams {
        RssParams {
            j_max: j,
            a_min_brake: a_min,
            ..RssParams::default()
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Composite Simpson on `n` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
        let mut n = ((b - a) / h).ceil() as usize;
        if n % 2 == 1 {
            n += 1;
        }
        if n == 0 {
            return 0.0;
        }
        let h = (b - a) / n as f64;
        let mut sum = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(a + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn jerk_phase_identity() {
        let s = jerk_phase_state(KinematicState::default(), 2.0, 0.0).unwrap();
        assert_eq!(s, KinematicState::default());
    }

    #[test]
    fn jerk_phase_matches_integrated_velocity() {
        // Oracle: integrate v(tau) = v0 + a0 tau - j tau^2 / 2 numerically.
        for (v0, a0, t) in [(20.0, 0.0, 2.0), (10.0, -1.0, 1.0)] {
            let oracle = simpson(|tau| v0 + a0 * tau - tau * tau, 0.0, t, 1e-5);
            let s = jerk_phase_state(KinematicState::new(0.0, v0, a0), 2.0, t).unwrap();
            assert!(close(s.x, oracle, 1e-9), "{} vs {}", s.x, oracle);
        }
        let s = jerk_phase_state(KinematicState::new(0.0, 20.0, 0.0), 2.0, 2.0).unwrap();
        assert!(close(s.x, 37.0 + 1.0 / 3.0, 1e-12));
        assert!(close(s.v, 16.0, 1e-12) && close(s.a, -4.0, 1e-12));
        let s = jerk_phase_state(KinematicState::new(0.0, 10.0, -1.0), 2.0, 1.0).unwrap();
        assert!(close(s.x, 9.0 + 1.0 / 6.0, 1e-12));
        assert!(close(s.v, 8.0, 1e-12) && close(s.a, -3.0, 1e-12));
    }

    #[test]
    fn jerk_phase_rejects_overrun() {
        // v0 = 1, j = 2: velocity hits zero at t = 1.
        let err = jerk_phase_state(KinematicState::new(0.0, 1.0, 0.0), 2.0, 1.5).unwrap_err();
        assert!(matches!(err, Error::JerkPhaseOverrun { .. }));
    }

    #[test]
    fn schedule_examples() {
        let p = params(2.0, 4.0);
        let s = brake_schedule_jerk(KinematicState::default(), &p);
        assert_eq!((s.t2, s.t_switch, s.t_stop, s.d_total), (0.0, 0.0, 0.0, 0.0));

        let s = brake_schedule_jerk(KinematicState::at_speed(20.0), &p);
        assert!(close(s.t1, 2.0, 1e-12));
        assert!(close(s.t2, 80f64.sqrt() / 2.0, 1e-12));
        assert!(close(s.t_switch, 2.0, 1e-12));
        assert!(close(s.v_at_switch, 16.0, 1e-12));
        assert!(close(s.t_stop, 6.0, 1e-12));
        assert!(close(s.d_total, 69.0 + 1.0 / 3.0, 1e-12));

        let s = brake_schedule_jerk(KinematicState::new(0.0, 10.0, -4.0), &p);
        assert_eq!(s.t1, 0.0);
        assert_eq!(s.t_switch, 0.0);
        assert!(close(s.v_at_switch, 10.0, 1e-12));
        assert!(close(s.t_stop, 2.5, 1e-12));
        assert!(close(s.d_total, 12.5, 1e-12));
    }

    #[test]
    fn schedule_numeric_cross_check() {
        // Piecewise dynamics integrated at 1e-5 s with the exact-in-step update.
        let p = params(2.0, 4.0);
        let (mut x, mut v, mut a, mut t) = (0.0f64, 20.0f64, 0.0f64, 0.0f64);
        let h = 1e-5;
        while v > 0.0 {
            let a_next = (a - p.j_max * h).max(-p.a_min_brake);
            let a_mid = 0.5 * (a + a_next);
            let v_next = v + a_mid * h;
            if v_next <= 0.0 {
                let frac = v / -a_mid;
                x += v * frac * 0.5;
                t += frac;
                break;
            }
            x += 0.5 * (v + v_next) * h;
            v = v_next;
            a = a_next;
            t += h;
        }
        let s = brake_schedule_jerk(KinematicState::at_speed(20.0), &p);
        assert!(close(t, s.t_stop, 1e-4), "{t}");
        assert!(close(x, s.d_total, 1e-4), "{x}");
    }

    #[test]
    fn velocity_examples() {
        let p = RssParams {
            rho: 1.0,
            a_max_accel: 2.0,
            ..params(2.0, 4.0)
        };
        let s = KinematicState::at_speed(20.0);
        assert_eq!(velocity_at(ProfileId::FrontMaxBrake, s, &p, 1.0), 12.0);
        assert_eq!(velocity_at(ProfileId::FrontMaxBrake, s, &p, 3.0), 0.0);
        let r = KinematicState::at_speed(10.0);
        assert_eq!(velocity_at(ProfileId::RssRear, r, &p, 1.0), 12.0);
        assert!(close(velocity_at(ProfileId::JerkBounded, s, &p, 4.0), 8.0, 1e-12));
    }

    #[test]
    fn distance_examples() {
        let p = params(2.0, 4.0);
        let s = KinematicState::at_speed(20.0);
        for id in ProfileId::ALL {
            assert_eq!(distance_traveled(id, s, &p, 0.0), 0.0);
        }
        assert!(close(distance_traveled(ProfileId::FrontMaxBrake, s, &p, f64::INFINITY), 25.0, 1e-12));
        assert!(close(
            distance_traveled(ProfileId::JerkBounded, s, &p, f64::INFINITY),
            69.0 + 1.0 / 3.0,
            1e-12
        ));
    }

    #[test]
    fn rss_rear_stop_time_includes_response() {
        let p = RssParams {
            rho: 1.0,
            a_max_accel: 2.0,
            ..params(2.0, 4.0)
        };
        let s = KinematicState::at_speed(10.0);
        let t_b = stop_time(ProfileId::RssRear, s, &p);
        assert!(close(t_b, 4.0, 1e-12));
        assert_eq!(velocity_at(ProfileId::RssRear, s, &p, t_b), 0.0);
    }

    #[test]
    fn full_brake_onset_degenerates_to_constant_decel() {
        let p = params(3.0, 5.0);
        let front_like = RssParams {
            a_max_brake: 5.0,
            ..p
        };
        let s = KinematicState::new(0.0, 17.0, -5.0);
        for k in 0..50 {
            let t = k as f64 * 0.1;
            assert_eq!(
                velocity_at(ProfileId::JerkBounded, s, &p, t),
                velocity_at(ProfileId::FrontMaxBrake, s, &front_like, t)
            );
            assert!(close(
                distance_traveled(ProfileId::JerkBounded, s, &p, t),
                distance_traveled(ProfileId::FrontMaxBrake, s, &front_like, t),
                1e-12
            ));
        }
    }

    #[test]
    fn trajectory_route_agrees_with_closed_form() {
        let p = RssParams {
            rho: 0.7,
            ..params(1.5, 5.0)
        };
        let s = KinematicState::new(0.0, 23.0, -1.2);
        for id in ProfileId::ALL {
            let traj = profile_trajectory(id, s, &p);
            assert!(close(traj.stop_time(), stop_time(id, s, &p), 1e-9));
            for k in 0..200 {
                let t = k as f64 * 0.07;
                assert!(close(traj.velocity(t), velocity_at(id, s, &p, t), 1e-9));
                assert!(close(traj.position(t), distance_traveled(id, s, &p, t), 1e-9));
            }
        }
    }

    #[test]
    fn min_brake_above_max_brake_warns() {
        let p = RssParams {
            a_min_brake: 9.0,
            ..RssParams::default()
        };
        assert_eq!(p.validate().unwrap().len(), 1);
        let bad = RssParams {
            j_max: 0.0,
            ..RssParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn d_total_monotone_on_grid() {
        let vs = [0.0, 5.0, 12.0, 25.0, 40.0];
        let js = [0.5, 1.0, 2.0, 5.0, 10.0];
        let amins = [1.0, 2.0, 4.0, 7.0, 10.0];
        let d = |v: f64, j: f64, a: f64| {
            brake_schedule_jerk(KinematicState::new(0.0, v, -0.5f64.min(a)), &params(j, a)).d_total
        };
        for &v in &vs {
            for &j in &js {
                for &a in &amins {
                    for &j2 in js.iter().filter(|&&j2| j2 > j) {
                        assert!(d(v, j2, a) <= d(v, j, a) + 1e-12);
                    }
                    for &a2 in amins.iter().filter(|&&a2| a2 > a) {
                        assert!(d(v, j, a2) <= d(v, j, a) + 1e-12);
                    }
                    for &v2 in vs.iter().filter(|&&v2| v2 > v) {
                        assert!(d(v2, j, a) >= d(v, j, a) - 1e-12);
                    }
                }
            }
        }
    }
}
