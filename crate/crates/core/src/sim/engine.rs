use serde::Serialize;
use smallvec::{smallvec, SmallVec};

use super::adversary::adversarial_front;
use super::scenario::{derive_seed, ControllerSpec, FrontScript, Scenario, ScriptSegment, FAILURE_STREAM, SENSOR_STREAM};
use super::sensor::Sensor;
use crate::controllers::{
    with_failure, AccelLaw, AebController, ApbConfig, ApbController, ApbRunner, Controller, Driver, Mode,
    NoController,
};
use crate::error::Result;
use crate::motion::{max_relative_advance, Trajectory, TrajectoryBuilder};
use crate::profiles::{KinematicState, RssParams};
use crate::safety::{is_dangerous, SceneState};

/// Penetration (m) below which touching bumpers do not count as a collision.
pub const CONTACT_TOLERANCE: f64 = 1e-9;

/// Piecewise-constant front acceleration within one step: `(offset, accel)`
/// pairs, the first at offset zero.
pub type FrontCommand = SmallVec<[(f64, f64); 4]>;

#[derive(Debug, Clone, PartialEq)]
pub struct StepCommands {
    pub rear: AccelLaw,
    pub front: FrontCommand,
}

impl StepCommands {
    pub fn constant(rear: f64, front: f64) -> Self {
        Self {
            rear: AccelLaw::Constant(rear),
            front: smallvec![(0.0, front)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub scene: SceneState,
    /// Smallest gap reached during the step.
    pub min_gap: f64,
    /// Offset into the step of the first contact, if any.
    pub collision: Option<f64>,
}

/// Rear motion over one step under `law`.
pub fn rear_trajectory(rear: KinematicState, law: AccelLaw, dt: f64) -> Trajectory {
    let b = TrajectoryBuilder::new(rear.x, rear.v);
    match law {
        AccelLaw::Constant(a) => b.constant(a, dt),
        AccelLaw::Ramp {
            a_start,
            hold,
            jerk,
            floor,
        } => {
            let hold = hold.clamp(0.0, dt);
            b.constant(a_start, hold).ramp(a_start, jerk, floor, dt - hold)
        }
    }
    .build()
}

/// Front motion over one step.
pub fn front_trajectory(front: KinematicState, cmd: &[(f64, f64)], dt: f64) -> Trajectory {
    let mut b = TrajectoryBuilder::new(front.x, front.v);
    for (k, &(offset, accel)) in cmd.iter().enumerate() {
        let end = cmd.get(k + 1).map_or(dt, |next| next.0);
        b = b.constant(accel, end - offset);
    }
    b.build()
}

fn state_at_end(traj: &Trajectory, dt: f64) -> KinematicState {
    let s = traj.sample(dt);
    let a = traj.final_sample().a;
    KinematicState::new(s.x, s.v, if s.v <= 0.0 && a < 0.0 { 0.0 } else { a })
}

/// Advances both cars by `dt` with exact piecewise-polynomial integration and
/// checks for contact inside the step.
pub fn step(scene: &SceneState, cmds: &StepCommands, dt: f64) -> StepOutcome {
    let rear = rear_trajectory(scene.rear, cmds.rear, dt);
    let front = front_trajectory(scene.front, &cmds.front, dt);
    let (advance, at) = max_relative_advance(&rear, &front, dt);
    let min_gap = scene.gap - advance.max(0.0);
    let collision = (min_gap < -CONTACT_TOLERANCE).then(|| {
        let over = |t: f64| {
            let adv = (rear.position(t) - scene.rear.x) - (front.position(t) - scene.front.x);
            adv - scene.gap > CONTACT_TOLERANCE
        };
        let (mut lo, mut hi) = (0.0, at);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if over(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    });
    let r = state_at_end(&rear, dt);
    let f = state_at_end(&front, dt);
    StepOutcome {
        scene: SceneState::new(r, f, f.x - r.x),
        min_gap,
        collision,
    }
}

/// Front command for the step `[t, t + dt)`.
pub fn front_command(script: &[ScriptSegment], t: f64, dt: f64) -> FrontCommand {
    let current = script.iter().rev().find(|s| s.t <= t).map_or(0.0, |s| s.accel);
    let mut cmd: FrontCommand = smallvec![(0.0, current)];
    for s in script.iter().filter(|s| s.t > t && s.t < t + dt) {
        cmd.push((s.t - t, s.accel));
    }
    cmd
}

/// True when the script never again asks the front to speed up after `t`.
fn front_idle_after(script: &[ScriptSegment], t: f64) -> bool {
    let current = script.iter().rev().find(|s| s.t <= t).map_or(0.0, |s| s.accel);
    current <= 0.0 && script.iter().filter(|s| s.t > t).all(|s| s.accel <= 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    DangerOnset,
    DangerExit,
    InterventionStart,
    InterventionSuppressed,
    InterventionEnd,
    Standstill,
    Collision,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::DangerOnset => "danger_onset",
            EventKind::DangerExit => "danger_exit",
            EventKind::InterventionStart => "intervention_start",
            EventKind::InterventionSuppressed => "intervention_suppressed",
            EventKind::InterventionEnd => "intervention_end",
            EventKind::Standstill => "standstill",
            EventKind::Collision => "collision",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

/// State at the start of one control step and what was decided there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub rear: KinematicState,
    pub front: KinematicState,
    pub gap: f64,
    pub d_safe: f64,
    pub dangerous: bool,
    pub mode: Mode,
    /// Acceleration applied to the rear at the start of the step.
    pub cmd_accel: f64,
    pub driver_accel: f64,
    /// The controller's own command while engaged.
    pub controller_accel: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Horizon,
    Collision,
    Standstill,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub end: EndReason,
    pub collision_time: Option<f64>,
    pub min_gap: f64,
    pub n_dangerous_episodes: u64,
    pub n_interventions: u64,
    pub n_suppressed: u64,
    /// Largest change rate (m/s³) of the controller's own command, with a new
    /// engagement measured from the previous command clamped to `[-a_min_brake, 0]`.
    pub max_commanded_jerk: f64,
    /// Largest deceleration (m/s²) commanded by the controller itself.
    pub max_commanded_decel: f64,
}

impl RunSummary {
    pub fn collided(&self) -> bool {
        self.collision_time.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceHeader {
    pub scenario_hash: String,
    pub sim_seed: u64,
    pub adversary_seed: Option<u64>,
    pub sensor_seed: u64,
    pub failure_seed: u64,
    pub params: RssParams,
    pub controller: &'static str,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<StepRecord>,
    pub events: Vec<Event>,
    pub summary: RunSummary,
}

fn build_controller(s: &Scenario, failure_seed: u64) -> Box<dyn Controller> {
    let inner: Box<dyn Controller> = match s.controller {
        ControllerSpec::None => return Box::new(NoController),
        ControllerSpec::Apb(cfg) => Box::new(ApbRunner::new(ApbController::new(
            s.params,
            ApbConfig { period: s.sim.dt, ..cfg },
        ))),
        ControllerSpec::Aeb(cfg) => Box::new(AebController::new(cfg)),
    };
    if s.p_fail > 0.0 {
        Box::new(with_failure(inner, s.p_fail, failure_seed))
    } else {
        inner
    }
}

/// Front script the scenario resolves to over its horizon.
pub fn resolve_front_script(s: &Scenario) -> Vec<ScriptSegment> {
    match &s.front_script {
        FrontScript::Segments(v) => v.clone(),
        FrontScript::Adversarial(w) => {
            adversarial_front(w.adversarial.seed, &s.params, s.sim.horizon, w.adversarial.compliant)
        }
    }
}

/// Runs the scenario and keeps every step.
pub fn run(scenario: &Scenario) -> Result<Trace> {
    simulate(scenario, true)
}

/// Runs the scenario keeping only the summary; used by sweeps.
pub fn run_summary(scenario: &Scenario) -> Result<RunSummary> {
    simulate(scenario, false).map(|t| t.summary)
}

fn simulate(s: &Scenario, record: bool) -> Result<Trace> {
    let warnings = s.validate()?;
    let p = s.params;
    let dt = s.sim.dt;
    let seed = s.sim.seed;
    let steps = s.sim.steps();
    let script = resolve_front_script(s);
    let header = TraceHeader {
        scenario_hash: if record { s.hash() } else { String::new() },
        sim_seed: seed,
        adversary_seed: match &s.front_script {
            FrontScript::Adversarial(w) => Some(w.adversarial.seed),
            FrontScript::Segments(_) => None,
        },
        sensor_seed: derive_seed(seed, SENSOR_STREAM),
        failure_seed: derive_seed(seed, FAILURE_STREAM),
        params: p,
        controller: s.controller.name(),
        warnings,
    };

    let mut scene = s.initial.scene();
    let mut driver = Driver::new(s.driver);
    let mut sensor = Sensor::new(s.sensor, header.sensor_seed);
    let mut ctrl = build_controller(s, header.failure_seed);

    let mut records = Vec::with_capacity(if record { steps } else { 0 });
    let mut events = Vec::new();
    let mut summary = RunSummary {
        steps: 0,
        end: EndReason::Horizon,
        collision_time: None,
        min_gap: scene.gap,
        n_dangerous_episodes: 0,
        n_interventions: 0,
        n_suppressed: 0,
        max_commanded_jerk: 0.0,
        max_commanded_decel: 0.0,
    };
    let push = |events: &mut Vec<Event>, t: f64, kind: EventKind| {
        if record {
            events.push(Event { t, kind });
        }
    };

    let mut was_dangerous = false;
    let mut prev_mode = Mode::Monitoring;
    let mut prev_applied = scene.rear.a;
    let mut prev_ctrl: Option<f64> = None;

    for k in 0..steps {
        let t = k as f64 * dt;
        let verdict = is_dangerous(&scene, &p);
        if verdict.dangerous && !was_dangerous {
            summary.n_dangerous_episodes += 1;
            push(&mut events, t, EventKind::DangerOnset);
        } else if !verdict.dangerous && was_dangerous {
            push(&mut events, t, EventKind::DangerExit);
        }
        was_dangerous = verdict.dangerous;

        let observed = sensor.observe(&scene, t);
        let driver_accel = driver.step(&scene, t);
        let out = ctrl.step(observed.as_ref(), driver_accel, t, false);

        if out.onset {
            if out.suppressed {
                summary.n_suppressed += 1;
                push(&mut events, t, EventKind::InterventionSuppressed);
            } else {
                summary.n_interventions += 1;
                push(&mut events, t, EventKind::InterventionStart);
            }
        }
        if prev_mode == Mode::Intervening && out.mode != Mode::Intervening {
            push(&mut events, t, EventKind::InterventionEnd);
        }
        if let Some(c) = out.controller_accel {
            let reference = prev_ctrl.unwrap_or_else(|| p.clamp_onset_accel(prev_applied));
            summary.max_commanded_jerk = summary.max_commanded_jerk.max((c - reference).abs() / dt);
            summary.max_commanded_decel = summary.max_commanded_decel.max(-c);
        }
        let applied = out.law.initial();
        if record {
            records.push(StepRecord {
                t,
                rear: scene.rear,
                front: scene.front,
                gap: scene.gap,
                d_safe: verdict.d_safe,
                dangerous: verdict.dangerous,
                mode: out.mode,
                cmd_accel: applied,
                driver_accel,
                controller_accel: out.controller_accel,
            });
        }
        summary.steps = k + 1;
        prev_mode = out.mode;
        prev_applied = applied;
        prev_ctrl = out.controller_accel;

        if scene.rear.v <= 0.0 && scene.front.v <= 0.0 && applied <= 0.0 && front_idle_after(&script, t) {
            summary.end = EndReason::Standstill;
            break;
        }

        let cmds = StepCommands {
            rear: out.law,
            front: front_command(&script, t, dt),
        };
        let outcome = step(&scene, &cmds, dt);
        summary.min_gap = summary.min_gap.min(outcome.min_gap);
        if let Some(offset) = outcome.collision {
            summary.collision_time = Some(t + offset);
            summary.end = EndReason::Collision;
            push(&mut events, t + offset, EventKind::Collision);
            break;
        }
        if scene.rear.v > 0.0 && outcome.scene.rear.v <= 0.0 {
            push(&mut events, t + dt, EventKind::Standstill);
        }
        scene = outcome.scene;
    }

    Ok(Trace {
        header,
        records,
        events,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{AebConfig, DriverPolicy};
    use crate::profiles::{distance_traveled, jerk_phase_state, ProfileId};
    use crate::sim::scenario::{CarInit, InitialState};

    fn scene(rear: KinematicState, front: KinematicState) -> SceneState {
        SceneState::new(rear, front, front.x - rear.x)
    }

    #[test]
    fn coasting_advances_exactly() {
        let s = scene(KinematicState::new(0.0, 12.5, 0.0), KinematicState::new(40.0, 7.0, 0.0));
        let out = step(&s, &StepCommands::constant(0.0, 0.0), 0.4);
        assert_eq!(out.scene.rear.x, 5.0);
        assert_eq!(out.scene.front.x, 42.8);
        assert!(out.collision.is_none());
    }

    #[test]
    fn stop_inside_a_step() {
        let s = scene(KinematicState::new(0.0, 1.0, 0.0), KinematicState::new(10.0, 0.0, 0.0));
        let out = step(&s, &StepCommands::constant(-4.0, 0.0), 0.5);
        assert_eq!(out.scene.rear.x, 0.125);
        assert_eq!(out.scene.rear.v, 0.0);
        assert_eq!(out.scene.rear.a, 0.0);
    }

    #[test]
    fn ramp_matches_the_jerk_phase() {
        let p = RssParams::default();
        let s0 = KinematicState::new(0.0, 20.0, -0.5);
        let mut s = scene(s0, KinematicState::new(1e3, 20.0, 0.0));
        let law = AccelLaw::Ramp {
            a_start: -0.5,
            hold: 0.0,
            jerk: p.j_max,
            floor: -p.a_min_brake,
        };
        // Ten steps, each restarting the ramp from the current acceleration.
        for _ in 0..10 {
            let law = match law {
                AccelLaw::Ramp { hold, jerk, floor, .. } => AccelLaw::Ramp {
                    a_start: s.rear.a,
                    hold,
                    jerk,
                    floor,
                },
                other => other,
            };
            let cmds = StepCommands {
                rear: law,
                front: smallvec![(0.0, 0.0)],
            };
            s = step(&s, &cmds, 0.1).scene;
        }
        let expect = jerk_phase_state(s0, p.j_max, 1.0).unwrap();
        assert!((s.rear.x - expect.x).abs() < 1e-12);
        assert!((s.rear.v - expect.v).abs() < 1e-12);
        assert!((s.rear.a - expect.a).abs() < 1e-12);
        let d = distance_traveled(ProfileId::JerkBounded, s0, &p, 1.0);
        assert!((s.rear.x - d).abs() < 1e-12);
    }

    #[test]
    fn contact_inside_a_step_is_found() {
        let s = scene(KinematicState::new(0.0, 10.0, 0.0), KinematicState::new(1.0, 0.0, 0.0));
        let out = step(&s, &StepCommands::constant(0.0, 0.0), 0.5);
        let t = out.collision.unwrap();
        assert!((t - 0.1).abs() < 1e-9, "{t}");
        assert!(out.min_gap < -3.0);
    }

    #[test]
    fn front_script_changes_inside_a_step() {
        let script = [ScriptSegment { t: 0.0, accel: 1.0 }, ScriptSegment { t: 0.25, accel: -2.0 }];
        let cmd = front_command(&script, 0.2, 0.1);
        assert_eq!(cmd.as_slice(), &[(0.0, 1.0), (0.25 - 0.2, -2.0)]);
        assert_eq!(front_command(&[], 3.0, 0.1).as_slice(), &[(0.0, 0.0)]);
    }

    fn follow_scene(gap: f64) -> Scenario {
        let mut s = Scenario::new(InitialState {
            gap_m: gap,
            rear: CarInit { v: 10.0, a: 0.0 },
            front: CarInit { v: 9.99, a: 0.0 },
        });
        s.sim.horizon = 5.0;
        s
    }

    #[test]
    fn quiet_road_has_no_events() {
        let mut s = follow_scene(100.0);
        s.initial.front.v = 10.0;
        let trace = run(&s).unwrap();
        assert!(trace.events.is_empty());
        assert_eq!(trace.records.len(), 500);
        assert_eq!(trace.summary.end, EndReason::Horizon);
    }

    #[test]
    fn one_step_one_record() {
        let mut s = follow_scene(100.0);
        s.sim.horizon = 0.01;
        assert_eq!(run(&s).unwrap().records.len(), 1);
    }

    #[test]
    fn aeb_is_too_late_when_the_front_brakes() {
        let mut s = follow_scene(0.03);
        s.front_script = FrontScript::Segments(vec![ScriptSegment { t: 0.0, accel: -8.0 }]);
        s.controller = ControllerSpec::Aeb(AebConfig::default());
        let trace = run(&s).unwrap();
        assert!(trace.summary.collided());
        assert_eq!(trace.events.last().unwrap().kind, EventKind::Collision);
    }

    #[test]
    fn deterministic_runs() {
        let mut s = follow_scene(30.0);
        s.front_script = FrontScript::adversarial(11, true);
        s.driver = DriverPolicy::Tailgater { target_gap: 2.0 };
        s.controller = ControllerSpec::Apb(ApbConfig::default());
        s.sensor.range_noise_sigma = 0.2;
        s.p_fail = 0.3;
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(run_summary(&s).unwrap(), a.summary);
    }

    #[test]
    fn mutual_standstill_ends_the_run() {
        let mut s = follow_scene(200.0);
        s.front_script = FrontScript::Segments(vec![ScriptSegment { t: 0.0, accel: -8.0 }]);
        s.driver = DriverPolicy::DistractedFollower {
            reaction_delay: 0.5,
            comfort_decel: 3.0,
        };
        s.sim.horizon = 60.0;
        let trace = run(&s).unwrap();
        assert_eq!(trace.summary.end, EndReason::Standstill);
        assert!(trace.records.len() < 6000);
        assert!(trace.events.iter().any(|e| e.kind == EventKind::Standstill));
    }
}
