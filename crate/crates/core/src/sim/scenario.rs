use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::controllers::{AebConfig, ApbConfig, DriverPolicy};
use crate::error::{Error, Result};
use crate::profiles::{KinematicState, RssParams, ACCEL_CEILING};
use crate::safety::{monitor_safe_distance, SceneState};

/// Stream indices used with [`derive_seed`].
pub(crate) const ADVERSARY_STREAM: u64 = 1;
pub(crate) const SENSOR_STREAM: u64 = 2;
pub(crate) const FAILURE_STREAM: u64 = 3;

/// Deterministic child seed (splitmix64 finalizer over `seed` and `index`).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarInit {
    pub v: f64,
    #[serde(default)]
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    /// Bumper-to-bumper gap (m).
    pub gap_m: f64,
    pub rear: CarInit,
    pub front: CarInit,
}

impl InitialState {
    /// Rear at the origin, front `gap_m` ahead.
    pub fn scene(&self) -> SceneState {
        SceneState::new(
            KinematicState::new(0.0, self.rear.v, self.rear.a),
            KinematicState::new(self.gap_m, self.front.v, self.front.a),
            self.gap_m,
        )
    }
}

/// From `t` on, the front applies `accel` until the next segment starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSegment {
    pub t: f64,
    pub accel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    pub seed: u64,
    #[serde(default = "default_true")]
    pub compliant: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryWrapper {
    pub adversarial: AdversarySpec,
}

/// Front-car behaviour: explicit segments or a seeded adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrontScript {
    Segments(Vec<ScriptSegment>),
    Adversarial(AdversaryWrapper),
}

impl Default for FrontScript {
    fn default() -> Self {
        FrontScript::Segments(Vec::new())
    }
}

impl FrontScript {
    pub fn adversarial(seed: u64, compliant: bool) -> Self {
        FrontScript::Adversarial(AdversaryWrapper {
            adversarial: AdversarySpec { seed, compliant },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControllerSpec {
    #[default]
    None,
    Apb(ApbConfig),
    Aeb(AebConfig),
}

impl ControllerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::None => "none",
            ControllerSpec::Apb(_) => "apb",
            ControllerSpec::Aeb(_) => "aeb",
        }
    }

    /// Parses `none`, `apb` or `aeb` with default settings.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim() {
            "none" => Ok(ControllerSpec::None),
            "apb" => Ok(ControllerSpec::Apb(ApbConfig::default())),
            "aeb" => Ok(ControllerSpec::Aeb(AebConfig::default())),
            other => Err(Error::field("controller", format!("unknown controller `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorModel {
    /// Standard deviation of the observed gap (m).
    #[serde(default)]
    pub range_noise_sigma: f64,
    /// Per-step probability that the front car is not detected.
    #[serde(default)]
    pub miss_rate: f64,
    /// Per-step probability that a phantom obstacle appears.
    #[serde(default)]
    pub ghost_rate: f64,
    /// Gap (m) at which a phantom appears, standing still.
    #[serde(default = "SensorModel::default_ghost_gap")]
    pub ghost_gap: f64,
    /// How long (s) a phantom stays visible.
    #[serde(default = "SensorModel::default_ghost_duration")]
    pub ghost_duration: f64,
}

impl SensorModel {
    fn default_ghost_gap() -> f64 {
        20.0
    }

    fn default_ghost_duration() -> f64 {
        0.5
    }

    pub fn is_perfect(&self) -> bool {
        self.range_noise_sigma == 0.0 && self.miss_rate == 0.0 && self.ghost_rate == 0.0
    }
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            range_noise_sigma: 0.0,
            miss_rate: 0.0,
            ghost_rate: 0.0,
            ghost_gap: Self::default_ghost_gap(),
            ghost_duration: Self::default_ghost_duration(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "SimConfig::default_dt")]
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    fn default_dt() -> f64 {
        0.01
    }

    /// Number of control steps covering the horizon.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: Self::default_dt(),
            horizon: 10.0,
            seed: 0,
        }
    }
}

fn default_params() -> RssParams {
    RssParams::default()
}

/// Tailgaters behind a front car that brakes as hard as allowed at a random
/// moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailgaterPopulation {
    #[serde(default = "TailgaterPopulation::default_v_min")]
    pub v_min: f64,
    #[serde(default = "TailgaterPopulation::default_v_max")]
    pub v_max: f64,
    /// Initial gap is the safe distance plus up to this much (m).
    #[serde(default = "TailgaterPopulation::default_gap_extra")]
    pub gap_extra_max: f64,
    #[serde(default = "TailgaterPopulation::default_target_min")]
    pub target_gap_min: f64,
    #[serde(default = "TailgaterPopulation::default_target_max")]
    pub target_gap_max: f64,
    #[serde(default = "TailgaterPopulation::default_brake_min")]
    pub brake_onset_min: f64,
    #[serde(default = "TailgaterPopulation::default_brake_max")]
    pub brake_onset_max: f64,
}

impl TailgaterPopulation {
    fn default_v_min() -> f64 {
        10.0
    }
    fn default_v_max() -> f64 {
        35.0
    }
    fn default_gap_extra() -> f64 {
        20.0
    }
    fn default_target_min() -> f64 {
        1.0
    }
    fn default_target_max() -> f64 {
        5.0
    }
    fn default_brake_min() -> f64 {
        4.0
    }
    fn default_brake_max() -> f64 {
        10.0
    }
}

impl Default for TailgaterPopulation {
    fn default() -> Self {
        Self {
            v_min: Self::default_v_min(),
            v_max: Self::default_v_max(),
            gap_extra_max: Self::default_gap_extra(),
            target_gap_min: Self::default_target_min(),
            target_gap_max: Self::default_target_max(),
            brake_onset_min: Self::default_brake_min(),
            brake_onset_max: Self::default_brake_max(),
        }
    }
}

/// Calm car following at a comfortable gap; only the sensor misbehaves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CruisePopulation {
    #[serde(default = "TailgaterPopulation::default_v_min")]
    pub v_min: f64,
    #[serde(default = "TailgaterPopulation::default_v_max")]
    pub v_max: f64,
    #[serde(default = "CruisePopulation::default_extra_min")]
    pub gap_extra_min: f64,
    #[serde(default = "CruisePopulation::default_extra_max")]
    pub gap_extra_max: f64,
}

impl CruisePopulation {
    fn default_extra_min() -> f64 {
        10.0
    }
    fn default_extra_max() -> f64 {
        60.0
    }
}

impl Default for CruisePopulation {
    fn default() -> Self {
        Self {
            v_min: TailgaterPopulation::default_v_min(),
            v_max: TailgaterPopulation::default_v_max(),
            gap_extra_min: Self::default_extra_min(),
            gap_extra_max: Self::default_extra_max(),
        }
    }
}

/// Random speeds, a gap at or above the safe distance, a tailgating driver
/// and a compliant adversarial front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarialPopulation {
    #[serde(default = "AdversarialPopulation::default_v_max")]
    pub v_max: f64,
    #[serde(default = "AdversarialPopulation::default_gap_extra")]
    pub gap_extra_max: f64,
    #[serde(default = "TailgaterPopulation::default_target_min")]
    pub target_gap_min: f64,
    #[serde(default = "TailgaterPopulation::default_target_max")]
    pub target_gap_max: f64,
    #[serde(default = "default_true")]
    pub compliant: bool,
}

impl AdversarialPopulation {
    fn default_v_max() -> f64 {
        40.0
    }
    fn default_gap_extra() -> f64 {
        50.0
    }
}

impl Default for AdversarialPopulation {
    fn default() -> Self {
        Self {
            v_max: Self::default_v_max(),
            gap_extra_max: Self::default_gap_extra(),
            target_gap_min: TailgaterPopulation::default_target_min(),
            target_gap_max: TailgaterPopulation::default_target_max(),
            compliant: true,
        }
    }
}

/// Generator of randomized scenarios around a base scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Population {
    Tailgater(TailgaterPopulation),
    Cruise(CruisePopulation),
    Adversarial(AdversarialPopulation),
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

impl Population {
    /// Draws one scenario. Params, controller, sensor and timing come from
    /// `base`; the simulation seed becomes `seed`.
    pub fn sample(&self, base: &Scenario, seed: u64) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = base.params;
        let mut s = Scenario {
            population: None,
            sim: SimConfig { seed, ..base.sim },
            ..base.clone()
        };
        match *self {
            Population::Tailgater(pop) => {
                let v = uniform(&mut rng, pop.v_min, pop.v_max);
                let extra = uniform(&mut rng, 0.0, pop.gap_extra_max);
                let target = uniform(&mut rng, pop.target_gap_min, pop.target_gap_max);
                let t_brake = uniform(&mut rng, pop.brake_onset_min, pop.brake_onset_max);
                let d_safe = monitor_safe_distance(KinematicState::at_speed(v), v, &p);
                s.initial = InitialState {
                    gap_m: d_safe + extra,
                    rear: CarInit { v, a: 0.0 },
                    front: CarInit { v, a: 0.0 },
                };
                s.front_script = FrontScript::Segments(vec![ScriptSegment {
                    t: t_brake,
                    accel: -p.a_max_brake,
                }]);
                s.driver = DriverPolicy::Tailgater { target_gap: target };
            }
            Population::Cruise(pop) => {
                let v = uniform(&mut rng, pop.v_min, pop.v_max);
                let extra = uniform(&mut rng, pop.gap_extra_min, pop.gap_extra_max);
                let d_safe = monitor_safe_distance(KinematicState::at_speed(v), v, &p);
                s.initial = InitialState {
                    gap_m: d_safe + extra,
                    rear: CarInit { v, a: 0.0 },
                    front: CarInit { v, a: 0.0 },
                };
                s.front_script = FrontScript::default();
                s.driver = DriverPolicy::ConstantSpeed;
            }
            Population::Adversarial(pop) => {
                let v_r = uniform(&mut rng, 0.0, pop.v_max);
                let v_f = uniform(&mut rng, 0.0, pop.v_max);
                let extra = uniform(&mut rng, 0.0, pop.gap_extra_max);
                let target = uniform(&mut rng, pop.target_gap_min, pop.target_gap_max);
                let d_safe = monitor_safe_distance(KinematicState::at_speed(v_r), v_f, &p);
                s.initial = InitialState {
                    gap_m: (d_safe + extra).max(f64::MIN_POSITIVE),
                    rear: CarInit { v: v_r, a: 0.0 },
                    front: CarInit { v: v_f, a: 0.0 },
                };
                s.front_script = FrontScript::adversarial(derive_seed(seed, ADVERSARY_STREAM), pop.compliant);
                s.driver = DriverPolicy::Tailgater { target_gap: target };
            }
        }
        s
    }
}

/// A complete, self-describing simulation input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_params")]
    pub params: RssParams,
    pub initial: InitialState,
    #[serde(default)]
    pub front_script: FrontScript,
    #[serde(default)]
    pub driver: DriverPolicy,
    #[serde(default)]
    pub controller: ControllerSpec,
    /// Probability that an engagement episode of the controller fails.
    #[serde(default)]
    pub p_fail: f64,
    #[serde(default)]
    pub sensor: SensorModel,
    #[serde(default)]
    pub sim: SimConfig,
    /// Present in sweep base files: how to draw each scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<Population>,
}

fn check(ok: bool, field: &str, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::field(field, reason()))
    }
}

fn check_prob(value: f64, field: &str) -> Result<()> {
    check((0.0..=1.0).contains(&value), field, || format!("probability must be in [0, 1], got {value}"))
}

fn check_finite_nonneg(value: f64, field: &str) -> Result<()> {
    check(value.is_finite() && value >= 0.0, field, || format!("must be finite and >= 0, got {value}"))
}

impl Scenario {
    /// A scenario with default parameters and no controller.
    pub fn new(initial: InitialState) -> Self {
        Self {
            params: RssParams::default(),
            initial,
            front_script: FrontScript::default(),
            driver: DriverPolicy::default(),
            controller: ControllerSpec::default(),
            p_fail: 0.0,
            sensor: SensorModel::default(),
            sim: SimConfig::default(),
            population: None,
        }
    }

    /// Validates every field; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let warnings = self.params.validate()?;
        let i = &self.initial;
        check(i.gap_m.is_finite() && i.gap_m > 0.0, "initial.gap_m", || {
            format!("must be finite and > 0, got {}", i.gap_m)
        })?;
        for (name, car) in [("rear", i.rear), ("front", i.front)] {
            check_finite_nonneg(car.v, &format!("initial.{name}.v"))?;
            check(car.a.is_finite() && car.a.abs() <= ACCEL_CEILING, &format!("initial.{name}.a"), || {
                format!("must be within +-{ACCEL_CEILING}, got {}", car.a)
            })?;
        }
        if let FrontScript::Segments(segments) = &self.front_script {
            let mut last = f64::NEG_INFINITY;
            for (k, seg) in segments.iter().enumerate() {
                check_finite_nonneg(seg.t, &format!("front_script[{k}].t"))?;
                check(seg.t > last, &format!("front_script[{k}].t"), || "times must increase".into())?;
                check(
                    seg.accel.is_finite() && seg.accel.abs() <= ACCEL_CEILING,
                    &format!("front_script[{k}].accel"),
                    || format!("must be within +-{ACCEL_CEILING}, got {}", seg.accel),
                )?;
                last = seg.t;
            }
        }
        self.driver.validate()?;
        match self.controller {
            ControllerSpec::None => {}
            ControllerSpec::Apb(cfg) => check_finite_nonneg(cfg.margin, "controller.margin")?,
            ControllerSpec::Aeb(cfg) => {
                check(cfg.ttc_threshold > 0.0 && cfg.ttc_threshold.is_finite(), "controller.ttc_threshold", || {
                    format!("must be finite and > 0, got {}", cfg.ttc_threshold)
                })?;
                check(
                    cfg.brake_magnitude > 0.0 && cfg.brake_magnitude <= ACCEL_CEILING,
                    "controller.brake_magnitude",
                    || format!("must be in (0, {ACCEL_CEILING}], got {}", cfg.brake_magnitude),
                )?;
                check_finite_nonneg(cfg.actuation_delay, "controller.actuation_delay")?;
            }
        }
        check_prob(self.p_fail, "p_fail")?;
        let s = &self.sensor;
        check_finite_nonneg(s.range_noise_sigma, "sensor.range_noise_sigma")?;
        check_prob(s.miss_rate, "sensor.miss_rate")?;
        check_prob(s.ghost_rate, "sensor.ghost_rate")?;
        check(s.ghost_gap.is_finite() && s.ghost_gap > 0.0, "sensor.ghost_gap", || {
            format!("must be finite and > 0, got {}", s.ghost_gap)
        })?;
        check_finite_nonneg(s.ghost_duration, "sensor.ghost_duration")?;
        check(self.sim.dt.is_finite() && self.sim.dt > 0.0, "sim.dt", || {
            format!("must be finite and > 0, got {}", self.sim.dt)
        })?;
        check(self.sim.horizon.is_finite() && self.sim.horizon >= self.sim.dt, "sim.horizon", || {
            format!("must be finite and >= dt, got {}", self.sim.horizon)
        })?;
        Ok(warnings)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}
