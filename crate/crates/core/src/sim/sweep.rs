use rayon::prelude::*;
use serde::Serialize;

use super::engine::{run_summary, RunSummary};
use super::scenario::{derive_seed, ControllerSpec, FrontScript, Scenario, ADVERSARY_STREAM};
use crate::error::{Error, Result};

/// Default ceiling on the number of simulations one sweep may run.
pub const DEFAULT_RUN_CAP: usize = 10_000_000;

/// One treatment of a paired sweep: the same scenarios with a different
/// controller.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub name: String,
    pub controller: ControllerSpec,
    /// Overrides the base scenario's failure probability.
    pub p_fail: Option<f64>,
}

impl Arm {
    pub fn new(controller: ControllerSpec) -> Self {
        Self {
            name: controller.name().to_string(),
            controller,
            p_fail: None,
        }
    }

    pub fn with_p_fail(mut self, p_fail: f64) -> Self {
        self.p_fail = Some(p_fail);
        self
    }
}

/// A grid axis over a named scenario field.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub field: String,
    pub values: Vec<f64>,
}

/// Fields an [`Axis`] may vary.
pub const AXIS_FIELDS: [&str; 10] = [
    "rho",
    "a_max_brake",
    "a_min_brake",
    "a_max_accel",
    "j_max",
    "latency",
    "p_fail",
    "range_noise_sigma",
    "miss_rate",
    "ghost_rate",
];

fn assign(s: &mut Scenario, field: &str, value: f64) -> Result<()> {
    let slot = match field {
        "rho" => &mut s.params.rho,
        "a_max_brake" => &mut s.params.a_max_brake,
        "a_min_brake" => &mut s.params.a_min_brake,
        "a_max_accel" => &mut s.params.a_max_accel,
        "j_max" => &mut s.params.j_max,
        "latency" => &mut s.params.latency,
        "p_fail" => &mut s.p_fail,
        "range_noise_sigma" => &mut s.sensor.range_noise_sigma,
        "miss_rate" => &mut s.sensor.miss_rate,
        "ghost_rate" => &mut s.sensor.ghost_rate,
        other => {
            return Err(Error::field(
                "axis",
                format!("unknown field `{other}`, expected one of {}", AXIS_FIELDS.join(", ")),
            ))
        }
    };
    *slot = value;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub base: Scenario,
    pub arms: Vec<Arm>,
    pub axes: Vec<Axis>,
    /// Scenarios per grid point.
    pub n: usize,
    pub seed: u64,
    pub cap: usize,
}

impl SweepPlan {
    pub fn new(base: Scenario, arms: Vec<Arm>, n: usize, seed: u64) -> Self {
        Self {
            base,
            arms,
            axes: Vec::new(),
            n,
            seed,
            cap: DEFAULT_RUN_CAP,
        }
    }

    fn points(&self) -> Vec<Vec<(String, f64)>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((axis.field.clone(), v));
                        q
                    })
                })
                .collect();
        }
        points
    }

    /// Scenario `index` at a grid point, before the arm is applied.
    pub fn scenario(&self, assignment: &[(String, f64)], index: usize) -> Result<Scenario> {
        let mut base = self.base.clone();
        for (field, value) in assignment {
            assign(&mut base, field, *value)?;
        }
        let seed = derive_seed(self.seed, index as u64);
        Ok(match base.population {
            Some(pop) => pop.sample(&base, seed),
            None => {
                base.sim.seed = seed;
                if let FrontScript::Adversarial(w) = &mut base.front_script {
                    w.adversarial.seed = derive_seed(seed, ADVERSARY_STREAM);
                }
                base
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SweepResult {
    pub n_scenarios: u64,
    pub n_dangerous_episodes: u64,
    pub n_collisions: u64,
    pub n_interventions: u64,
    pub n_suppressed: u64,
    pub max_commanded_jerk: f64,
    pub max_commanded_decel: f64,
    /// Against the plan's first arm; absent for the baseline itself or when
    /// the baseline had no collisions.
    pub elimination_rate: Option<f64>,
}

impl SweepResult {
    pub fn add(&mut self, s: &RunSummary) {
        self.n_scenarios += 1;
        self.n_dangerous_episodes += s.n_dangerous_episodes;
        self.n_collisions += s.collided() as u64;
        self.n_interventions += s.n_interventions;
        self.n_suppressed += s.n_suppressed;
        self.max_commanded_jerk = self.max_commanded_jerk.max(s.max_commanded_jerk);
        self.max_commanded_decel = self.max_commanded_decel.max(s.max_commanded_decel);
    }

    pub fn merge(&mut self, other: &SweepResult) {
        self.n_scenarios += other.n_scenarios;
        self.n_dangerous_episodes += other.n_dangerous_episodes;
        self.n_collisions += other.n_collisions;
        self.n_interventions += other.n_interventions;
        self.n_suppressed += other.n_suppressed;
        self.max_commanded_jerk = self.max_commanded_jerk.max(other.max_commanded_jerk);
        self.max_commanded_decel = self.max_commanded_decel.max(other.max_commanded_decel);
    }
}

/// `1 - treated / baseline` collisions, when the baseline has any.
pub fn elimination_rate(baseline: &SweepResult, treated: &SweepResult) -> Option<f64> {
    (baseline.n_collisions > 0).then(|| 1.0 - treated.n_collisions as f64 / baseline.n_collisions as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmResult {
    pub name: String,
    pub result: SweepResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub assignment: Vec<(String, f64)>,
    pub arms: Vec<ArmResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub n: usize,
    pub points: Vec<PointResult>,
    /// All grid points pooled.
    pub total: Vec<ArmResult>,
}

impl SweepReport {
    pub fn arm(&self, name: &str) -> Option<&SweepResult> {
        self.total.iter().find(|a| a.name == name).map(|a| &a.result)
    }
}

fn finish(arms: &[Arm], mut results: Vec<SweepResult>) -> Vec<ArmResult> {
    if let Some(&baseline) = results.first() {
        for r in results.iter_mut().skip(1) {
            r.elimination_rate = elimination_rate(&baseline, r);
        }
    }
    arms.iter()
        .zip(results)
        .map(|(a, result)| ArmResult {
            name: a.name.clone(),
            result,
        })
        .collect()
}

/// Runs every arm on every scenario of every grid point. Scenario `i` is the
/// same in all arms, so arms are paired. Results do not depend on thread
/// count: runs are collected in index order before aggregation.
pub fn sweep(plan: &SweepPlan) -> Result<SweepReport> {
    let points = plan.points();
    let requested = points.len().saturating_mul(plan.n).saturating_mul(plan.arms.len());
    if requested > plan.cap {
        return Err(Error::RunLimit {
            requested,
            cap: plan.cap,
        });
    }
    let mut base_warnings = plan.base.clone();
    base_warnings.population = None;
    base_warnings.validate()?;

    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..plan.n).map(move |i| (p, i))).collect();
    let runs: Vec<Vec<RunSummary>> = jobs
        .par_iter()
        .map(|&(p, i)| {
            let scenario = plan.scenario(&points[p], i)?;
            plan.arms
                .iter()
                .map(|arm| {
                    let mut s = scenario.clone();
                    s.controller = arm.controller;
                    if let Some(pf) = arm.p_fail {
                        s.p_fail = pf;
                    }
                    run_summary(&s)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut per_point = vec![vec![SweepResult::default(); plan.arms.len()]; points.len()];
    for (&(p, _), arms) in jobs.iter().zip(&runs) {
        for (acc, s) in per_point[p].iter_mut().zip(arms) {
            acc.add(s);
        }
    }
    let mut total = vec![SweepResult::default(); plan.arms.len()];
    for point in &per_point {
        for (acc, r) in total.iter_mut().zip(point) {
            acc.merge(r);
        }
    }
    Ok(SweepReport {
        seed: plan.seed,
        n: plan.n,
        points: points
            .into_iter()
            .zip(per_point)
            .map(|(assignment, results)| PointResult {
                assignment,
                arms: finish(&plan.arms, results),
            })
            .collect(),
        total: finish(&plan.arms, total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::ApbConfig;
    use crate::sim::scenario::{Population, TailgaterPopulation};

    fn tailgaters() -> Scenario {
        let mut s = Scenario::from_json(
            r#"{"initial": {"gap_m": 30, "rear": {"v": 20}, "front": {"v": 20}}, "sim": {"horizon": 16}}"#,
        )
        .unwrap();
        s.population = Some(Population::Tailgater(TailgaterPopulation::default()));
        s
    }

    fn arms() -> Vec<Arm> {
        vec![
            Arm::new(ControllerSpec::None),
            Arm::new(ControllerSpec::Apb(ApbConfig::default())),
        ]
    }

    #[test]
    fn empty_sweep_has_zero_counts() {
        let r = sweep(&SweepPlan::new(tailgaters(), arms(), 0, 1)).unwrap();
        assert_eq!(r.total[0].result, SweepResult::default());
        assert_eq!(r.total[1].result.elimination_rate, None);
    }

    #[test]
    fn paired_arms_see_the_same_scenarios() {
        let plan = SweepPlan::new(tailgaters(), arms(), 40, 9);
        let r = sweep(&plan).unwrap();
        let none = r.arm("none").unwrap();
        let apb = r.arm("apb").unwrap();
        assert_eq!(none.n_scenarios, 40);
        assert!(none.n_collisions > 0);
        assert_eq!(apb.n_collisions, 0);
        assert_eq!(apb.elimination_rate, Some(1.0));
        assert_eq!(sweep(&plan).unwrap(), r);
    }

    #[test]
    fn certain_failure_eliminates_nothing() {
        let plan = SweepPlan::new(
            tailgaters(),
            vec![
                Arm::new(ControllerSpec::None),
                Arm::new(ControllerSpec::Apb(ApbConfig::default())).with_p_fail(1.0),
            ],
            30,
            2,
        );
        let r = sweep(&plan).unwrap();
        assert_eq!(r.total[1].result.elimination_rate, Some(0.0));
    }

    #[test]
    fn grid_axes_and_cap() {
        let mut plan = SweepPlan::new(tailgaters(), arms(), 3, 1);
        plan.axes.push(Axis {
            field: "j_max".into(),
            values: vec![2.0, 4.0],
        });
        let r = sweep(&plan).unwrap();
        assert_eq!(r.points.len(), 2);
        assert_eq!(r.total[0].result.n_scenarios, 6);
        plan.cap = 5;
        assert!(matches!(sweep(&plan), Err(Error::RunLimit { requested: 12, cap: 5 })));
        plan.cap = DEFAULT_RUN_CAP;
        plan.axes[0].field = "colour".into();
        assert!(sweep(&plan).is_err());
    }
}
