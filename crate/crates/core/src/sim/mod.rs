//! Two-car simulator: scenarios, exact stepping, adversarial fronts, sensor
//! faults, the no-collision verifier and Monte Carlo sweeps.

mod adversary;
mod engine;
mod scenario;
mod sensor;
mod sweep;
mod verify;

pub use adversary::{adversarial_front, worst_case_front, WORST_CASE_PROBABILITY};
pub use engine::{
    front_command, front_trajectory, rear_trajectory, resolve_front_script, run, run_summary, step, EndReason,
    Event, EventKind, FrontCommand, RunSummary, StepCommands, StepOutcome, StepRecord, Trace, TraceHeader,
    CONTACT_TOLERANCE,
};
pub use scenario::{
    derive_seed, AdversarialPopulation, AdversarySpec, AdversaryWrapper, CarInit, ControllerSpec, CruisePopulation,
    FrontScript, InitialState, Population, Scenario, ScriptSegment, SensorModel, SimConfig, TailgaterPopulation,
};
pub use sensor::Sensor;
pub use sweep::{
    elimination_rate, sweep, Arm, ArmResult, Axis, PointResult, SweepPlan, SweepReport, SweepResult, AXIS_FIELDS,
    DEFAULT_RUN_CAP,
};
pub use verify::{
    tightness_pair, verify_no_collision, verify_with, worst_case_scenario, Counterexample, TightnessReport,
    VerifyOptions, VerifyReport, MIN_GAP_BINS,
};
