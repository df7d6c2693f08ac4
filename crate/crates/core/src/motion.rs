//! Piecewise-polynomial longitudinal motion.
//!
//! A [`Trajectory`] is a sequence of pieces with constant jerk, built from an
//! acceleration law by [`TrajectoryBuilder`]. Velocity is clamped at zero: a
//! car that brakes to a standstill stays there until a positive acceleration
//! is applied. Every quantity is evaluated in closed form, so the simulator
//! and the safe-distance code share one exact integrator.

use smallvec::SmallVec;

/// One constant-jerk segment. `x`, `v`, `a` are the state at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub duration: f64,
    pub x: f64,
    pub v: f64,
    pub a: f64,
    /// Signed rate of change of acceleration (negative while ramping into a brake).
    pub jerk: f64,
}

impl Piece {
    #[inline]
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    #[inline]
    pub fn position(&self, tau: f64) -> f64 {
        self.x + tau * (self.v + tau * (0.5 * self.a + tau * self.jerk / 6.0))
    }

    #[inline]
    pub fn velocity(&self, tau: f64) -> f64 {
        self.v + tau * (self.a + 0.5 * self.jerk * tau)
    }

    #[inline]
    pub fn acceleration(&self, tau: f64) -> f64 {
        self.a + self.jerk * tau
    }

    fn is_stationary(&self) -> bool {
        self.v == 0.0 && self.a == 0.0 && self.jerk == 0.0
    }
}

/// Position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub v: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pieces: SmallVec<[Piece; 6]>,
    end: Sample,
    end_time: f64,
}

impl Trajectory {
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Time covered by the pieces; beyond it the car holds its final velocity.
    pub fn end_time(&self) -> f64 {
        self.end_time
    }

    pub fn final_sample(&self) -> Sample {
        self.end
    }

    /// First time after which the car never moves again, or `INFINITY`.
    pub fn stop_time(&self) -> f64 {
        if self.end.v > 0.0 {
            return f64::INFINITY;
        }
        let mut t = self.end_time;
        for p in self.pieces.iter().rev() {
            if p.is_stationary() {
                t = p.start;
            } else {
                break;
            }
        }
        t
    }

    pub fn sample(&self, t: f64) -> Sample {
        if t >= self.end_time {
            let dt = if self.end_time.is_finite() {
                t - self.end_time
            } else {
                0.0
            };
            return Sample {
                x: self.end.x + self.end.v * dt,
                v: self.end.v,
                a: 0.0,
            };
        }
        let p = self.piece_at(t);
        let tau = t - p.start;
        Sample {
            x: p.position(tau),
            v: p.velocity(tau).max(0.0),
            a: p.acceleration(tau),
        }
    }

    pub fn position(&self, t: f64) -> f64 {
        self.sample(t).x
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.sample(t).v
    }

    fn piece_at(&self, t: f64) -> &Piece {
        let idx = self
            .pieces
            .iter()
            .rposition(|p| p.start <= t)
            .unwrap_or(0);
        &self.pieces[idx]
    }

    /// Piece active on the open interval just after `t`.
    fn piece_after(&self, t: f64) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.start <= t && t < p.end())
    }
}

/// Builds a [`Trajectory`] from successive acceleration laws.
#[derive(Debug, Clone)]
pub struct TrajectoryBuilder {
    pieces: SmallVec<[Piece; 6]>,
    t: f64,
    x: f64,
    v: f64,
    a: f64,
}

impl TrajectoryBuilder {
    pub fn new(x: f64, v: f64) -> Self {
        Self {
            pieces: SmallVec::new(),
            t: 0.0,
            x,
            v: v.max(0.0),
            a: 0.0,
        }
    }

    fn push(&mut self, v: f64, a: f64, jerk: f64, duration: f64) {
        let piece = Piece {
            start: self.t,
            duration,
            x: self.x,
            v,
            a,
            jerk,
        };
        self.pieces.push(piece);
        if duration.is_finite() {
            self.x = piece.position(duration);
            self.v = piece.velocity(duration).max(0.0);
            self.a = piece.acceleration(duration);
            self.t += duration;
        } else {
            self.t = f64::INFINITY;
            self.a = a;
        }
    }

    fn stand(&mut self, duration: f64) {
        if duration > 0.0 {
            self.push(0.0, 0.0, 0.0, duration);
            self.v = 0.0;
            self.a = 0.0;
        }
    }

    /// Constant acceleration `a` for `duration` (may be infinite when `a <= 0`).
    pub fn constant(mut self, a: f64, duration: f64) -> Self {
        if !(duration > 0.0) || !self.t.is_finite() {
            return self;
        }
        if self.v <= 0.0 && a <= 0.0 {
            self.stand(duration);
            return self;
        }
        if a < 0.0 {
            let t_stop = self.v / -a;
            if t_stop <= duration {
                self.push(self.v, a, 0.0, t_stop);
                self.v = 0.0;
                self.stand(duration - t_stop);
                return self;
            }
        }
        debug_assert!(duration.is_finite() || a == 0.0, "unbounded acceleration");
        self.push(self.v, a, 0.0, duration);
        self
    }

    /// Acceleration `max(a_start - jerk * tau, floor)` for `duration`, stopping
    /// at zero velocity. `jerk` is a positive magnitude; `a_start` is clamped to
    /// be non-positive (throttle released instantly).
    pub fn ramp(mut self, a_start: f64, jerk: f64, floor: f64, duration: f64) -> Self {
        if !(duration > 0.0) || !self.t.is_finite() {
            return self;
        }
        let a_start = a_start.min(0.0);
        if a_start <= floor || jerk.is_infinite() {
            return self.constant(floor, duration);
        }
        if self.v <= 0.0 {
            self.stand(duration);
            return self;
        }
        let t_floor = (a_start - floor) / jerk;
        let t_zero = jerk_zero_crossing(self.v, a_start, jerk);
        let t_jerk = t_floor.min(duration);
        if t_zero <= t_jerk {
            self.push(self.v, a_start, -jerk, t_zero);
            self.v = 0.0;
            self.stand(duration - t_zero);
            return self;
        }
        self.push(self.v, a_start, -jerk, t_jerk);
        if duration > t_jerk {
            self = self.constant(floor, duration - t_jerk);
        }
        self
    }

    /// Holds the current state (zero acceleration) for `duration`.
    pub fn coast(self, duration: f64) -> Self {
        self.constant(0.0, duration)
    }

    pub fn build(self) -> Trajectory {
        let end_time = if self.pieces.is_empty() { 0.0 } else { self.t };
        let end = if end_time.is_finite() {
            Sample {
                x: self.x,
                v: self.v,
                a: self.a,
            }
        } else {
            let last = self.pieces.last().expect("infinite piece exists");
            Sample {
                x: last.x,
                v: last.v,
                a: last.a,
            }
        };
        Trajectory {
            pieces: self.pieces,
            end,
            end_time,
        }
    }
}

/// First `tau > 0` with `v + a tau - jerk tau^2 / 2 = 0`, for `a <= 0`, `jerk > 0`.
///
/// Rationalized form of `(a + sqrt(a^2 + 2 jerk v)) / jerk`, which cancels
/// badly when `a` is strongly negative.
pub fn jerk_zero_crossing(v: f64, a: f64, jerk: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let disc = (a * a + 2.0 * jerk * v).sqrt();
    2.0 * v / (disc - a)
}

/// Largest advance of `rear` over `front` on `[0, horizon]`:
/// `max_t [(x_r(t) - x_r(0)) - (x_f(t) - x_f(0))]`, together with the time
/// at which it is attained. The difference is piecewise cubic, so the maximum
/// is found exactly among interval endpoints and relative-velocity roots.
pub fn max_relative_advance(rear: &Trajectory, front: &Trajectory, horizon: f64) -> (f64, f64) {
    let xr0 = rear.position(0.0);
    let xf0 = front.position(0.0);
    let advance = |t: f64| (rear.position(t) - xr0) - (front.position(t) - xf0);

    let mut cuts: SmallVec<[f64; 16]> = SmallVec::new();
    cuts.push(0.0);
    for p in rear.pieces().iter().chain(front.pieces()) {
        for t in [p.start, p.end()] {
            if t > 0.0 && t < horizon {
                cuts.push(t);
            }
        }
    }
    for t in [rear.end_time(), front.end_time()] {
        if t > 0.0 && t < horizon {
            cuts.push(t);
        }
    }
    cuts.push(horizon);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut best = (0.0, 0.0);
    for w in cuts.windows(2) {
        let (t_lo, t_hi) = (w[0], w[1]);
        let end_value = advance(t_hi);
        if end_value > best.0 {
            best = (end_value, t_hi);
        }
        let len = t_hi - t_lo;
        if !(len > 0.0) {
            continue;
        }
        let (vr, ar, jr) = local_poly(rear, t_lo);
        let (vf, af, jf) = local_poly(front, t_lo);
        let roots = quadratic_roots(0.5 * (jr - jf), ar - af, vr - vf);
        for s in roots.into_iter().flatten() {
            if s > 0.0 && s < len {
                let value = advance(t_lo + s);
                if value > best.0 {
                    best = (value, t_lo + s);
                }
            }
        }
    }
    best
}

/// Velocity polynomial coefficients (v, a, jerk) on the interval starting at `t`.
fn local_poly(traj: &Trajectory, t: f64) -> (f64, f64, f64) {
    match traj.piece_after(t) {
        Some(p) => {
            let tau = t - p.start;
            (p.velocity(tau), p.acceleration(tau), p.jerk)
        }
        None => (traj.final_sample().v, 0.0, 0.0),
    }
}

/// Real roots of `c2 s^2 + c1 s + c0`.
fn quadratic_roots(c2: f64, c1: f64, c0: f64) -> [Option<f64>; 2] {
    let scale = c2.abs().max(c1.abs()).max(c0.abs());
    if scale == 0.0 {
        return [None, None];
    }
    if c2.abs() <= 1e-15 * scale {
        if c1 == 0.0 {
            return [None, None];
        }
        return [Some(-c0 / c1), None];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return [None, None];
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    if q == 0.0 {
        return [Some(0.0), None];
    }
    [Some(q / c2), Some(c0 / q)]
}
