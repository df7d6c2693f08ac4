use rayon::prelude::*;
use serde::Serialize;

use super::adversary::worst_case_front;
use super::engine::{run, run_summary, RunSummary, Trace};
use super::scenario::{
    derive_seed, AdversarialPopulation, CarInit, ControllerSpec, FrontScript, InitialState, Population, Scenario,
    SimConfig,
};
use crate::controllers::{ApbConfig, DriverPolicy};
use crate::error::{Error, Result};
use crate::profiles::{stop_time, KinematicState, ProfileId, RssParams};
use crate::safety::monitor_safe_distance;

/// Upper edges (m) of the minimum-gap histogram bins; the last bin is open.
pub const MIN_GAP_BINS: [f64; 6] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub n: usize,
    pub seed: u64,
    pub params: RssParams,
    pub population: AdversarialPopulation,
    pub apb: ApbConfig,
    pub sim: SimConfig,
}

impl VerifyOptions {
    pub fn new(n: usize, seed: u64, params: RssParams) -> Self {
        Self {
            n,
            seed,
            params,
            population: AdversarialPopulation::default(),
            apb: ApbConfig::default(),
            sim: SimConfig {
                dt: 0.01,
                horizon: 10.0,
                seed: 0,
            },
        }
    }

    fn base(&self) -> Scenario {
        let mut base = Scenario::new(InitialState {
            gap_m: 1.0,
            rear: CarInit { v: 0.0, a: 0.0 },
            front: CarInit { v: 0.0, a: 0.0 },
        });
        base.params = self.params;
        base.controller = ControllerSpec::Apb(self.apb);
        base.sim = self.sim;
        base
    }

    /// The `index`-th scenario of the run.
    pub fn scenario(&self, index: usize) -> Scenario {
        Population::Adversarial(self.population).sample(&self.base(), derive_seed(self.seed, index as u64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub index: usize,
    pub scenario: Scenario,
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub collisions: usize,
    /// Smallest gap seen in any run.
    pub min_gap: f64,
    /// Run counts per minimum-gap bin: `< 0`, then up to each edge of
    /// [`MIN_GAP_BINS`], then the open bin.
    pub histogram: Vec<usize>,
    pub interventions: u64,
    #[serde(skip)]
    pub counterexample: Option<Counterexample>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.collisions == 0
    }

    /// Human-readable bin labels matching `histogram`.
    pub fn bin_labels() -> Vec<String> {
        let mut labels = vec!["< 0".to_string()];
        let mut lo = 0.0;
        for hi in MIN_GAP_BINS.iter().skip(1) {
            labels.push(format!("[{lo}, {hi})"));
            lo = *hi;
        }
        labels.push(format!(">= {lo}"));
        labels
    }
}

fn bin(gap: f64) -> usize {
    if gap < 0.0 {
        return 0;
    }
    MIN_GAP_BINS.iter().skip(1).position(|&hi| gap < hi).map_or(MIN_GAP_BINS.len(), |k| k + 1)
}

/// Runs randomized compliant scenarios under APB (no failures) and counts
/// collisions. The first colliding scenario is re-run with a full trace.
pub fn verify_with(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.n == 0 {
        return Err(Error::field("n", "must be >= 1"));
    }
    let summaries: Vec<RunSummary> = (0..opts.n)
        .into_par_iter()
        .map(|i| run_summary(&opts.scenario(i)))
        .collect::<Result<_>>()?;

    let mut report = VerifyReport {
        n: opts.n,
        collisions: 0,
        min_gap: f64::INFINITY,
        histogram: vec![0; MIN_GAP_BINS.len() + 1],
        interventions: 0,
        counterexample: None,
    };
    for (i, s) in summaries.iter().enumerate() {
        report.min_gap = report.min_gap.min(s.min_gap);
        report.histogram[bin(s.min_gap)] += 1;
        report.interventions += s.n_interventions;
        if s.collided() {
            report.collisions += 1;
            if report.counterexample.is_none() {
                let scenario = opts.scenario(i);
                let trace = run(&scenario)?;
                report.counterexample = Some(Counterexample {
                    index: i,
                    scenario,
                    trace,
                });
            }
        }
    }
    Ok(report)
}

pub fn verify_no_collision(n: usize, seed: u64, p: &RssParams) -> Result<VerifyReport> {
    verify_with(&VerifyOptions::new(n, seed, *p))
}

/// APB without handback margin, a driver holding speed, and a front braking
/// as hard as allowed from the first instant.
pub fn worst_case_scenario(gap: f64, v_r: f64, v_f: f64, p: &RssParams) -> Scenario {
    let mut s = Scenario::new(InitialState {
        gap_m: gap,
        rear: CarInit { v: v_r, a: 0.0 },
        front: CarInit { v: v_f, a: 0.0 },
    });
    s.params = *p;
    s.front_script = FrontScript::Segments(worst_case_front(p));
    s.driver = DriverPolicy::ConstantSpeed;
    s.controller = ControllerSpec::Apb(ApbConfig { margin: 0.0, ..ApbConfig::default() });
    let t_stop = stop_time(ProfileId::JerkBounded, KinematicState::at_speed(v_r), p);
    s.sim.horizon = (t_stop + 1.0).ceil();
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightnessReport {
    pub d_safe: f64,
    pub at_safe_distance: RunSummary,
    pub below_safe_distance: RunSummary,
    pub shortfall: f64,
}

/// Runs the worst case at exactly the safe distance and `shortfall` below it.
pub fn tightness_pair(v_r: f64, v_f: f64, shortfall: f64, p: &RssParams) -> Result<TightnessReport> {
    let d_safe = monitor_safe_distance(KinematicState::at_speed(v_r), v_f, p);
    let at = run_summary(&worst_case_scenario(d_safe, v_r, v_f, p))?;
    let below = run_summary(&worst_case_scenario(d_safe - shortfall, v_r, v_f, p))?;
    Ok(TightnessReport {
        d_safe,
        at_safe_distance: at,
        below_safe_distance: below,
        shortfall,
    })
}
