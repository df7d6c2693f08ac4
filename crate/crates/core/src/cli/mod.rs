//! Command-line front end: `safe-distance`, `simulate`, `verify` and
//! `sweep` (alias `compare`).
//!
//! Exit codes: 0 success, 2 invalid input, 3 collision in `simulate`,
//! 4 failed verification. Errors are reported on one line.

mod files;
mod trace_csv;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use files::{load_params, load_scenario, parse_params, parse_scenario, preset, PRESETS};
pub use trace_csv::{write_trace, COLUMNS};

use crate::error::{Error, Result};
use crate::profiles::{KinematicState, RssParams};
use crate::safety::{monitor_safe_distance, safe_distance_rss};
use crate::sim::{
    run, sweep, verify_with, Arm, Axis, ControllerSpec, Scenario, SweepPlan, SweepReport, VerifyOptions, VerifyReport,
    DEFAULT_RUN_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_COLLISION: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

/// Environment variable naming the default parameter file.
pub const PARAMS_ENV: &str = "APB_PARAMS";

#[derive(Debug, Parser)]
#[command(name = "apb", version, about = "Safe distances, preventive braking and two-car simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the safe distance for one point or a grid.
    SafeDistance(SafeDistanceArgs),
    /// Run one scenario and write its trace.
    Simulate(SimulateArgs),
    /// Check randomized adversarial scenarios for collisions.
    Verify(VerifyArgs),
    /// Run a paired Monte Carlo sweep.
    #[command(visible_alias = "compare")]
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SafeDistanceArgs {
    /// Parameter file (JSON).
    #[arg(long, env = PARAMS_ENV)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub v_rear: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub v_front: f64,
    /// Current rear acceleration (m/s^2, signed).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a_rear: f64,
    /// Grid over one input, e.g. `v_rear=0:40:5` (start:stop:step). Repeatable.
    #[arg(long)]
    pub grid: Vec<String>,
    /// Also print the response-time model's safe distance.
    #[arg(long)]
    pub classic: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false, args = ["scenario", "preset"])]
pub struct ScenarioSource {
    /// Scenario file (JSON).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Bundled scenario by name.
    #[arg(long)]
    pub preset: Option<String>,
}

impl ScenarioSource {
    fn load(&self) -> Result<Scenario> {
        match (&self.scenario, &self.preset) {
            (Some(path), _) => load_scenario(path),
            (None, Some(name)) => parse_scenario(preset(name)?),
            (None, None) => Err(Error::field("scenario", "missing --scenario or --preset")),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    /// Trace output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, env = PARAMS_ENV)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulated time per scenario (s).
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    /// Where the trace of the first collision is written.
    #[arg(long, default_value = "counterexample.csv")]
    pub counterexample: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: ScenarioSource,
    /// Comma-separated arms; the first is the baseline.
    #[arg(long, default_value = "none,apb")]
    pub paired_controllers: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Failure probability for every arm except `none`.
    #[arg(long)]
    pub p_fail: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid axis, e.g. `j_max=2,4,6`. Repeatable.
    #[arg(long)]
    pub axis: Vec<String>,
    /// Refuse to run more simulations than this.
    #[arg(long, default_value_t = DEFAULT_RUN_CAP)]
    pub cap: usize,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let first = text.lines().next().unwrap_or("invalid arguments");
                let _ = writeln!(err, "{first}");
            }
            return code;
        }
    };
    execute(&cli, out, err)
}

/// Runs an already parsed command.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::SafeDistance(a) => safe_distance_cmd(a, out, err),
        Command::Simulate(a) => simulate_cmd(a, out, err),
        Command::Verify(a) => verify_cmd(a, out, err),
        Command::Sweep(a) => sweep_cmd(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message.replace('\n', " "));
            f.code
        }
    }
}

fn params_from(path: Option<&Path>, err: &mut dyn Write) -> Result<RssParams> {
    let p = match path {
        Some(path) => load_params(path)?,
        None => RssParams::default(),
    };
    for w in p.validate()? {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(p)
}

/// Expands `name=start:stop:step` into values, inclusive of `stop`.
fn parse_grid(spec: &str) -> Result<(String, Vec<f64>)> {
    let bad = || Error::field("grid", format!("expected name=start:stop:step, got `{spec}`"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<f64> = range
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let name = name.trim().replace('-', "_");
    Ok((name, (0..count).map(|k| start + k as f64 * step).collect()))
}

fn safe_distance_cmd(a: &SafeDistanceArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let p = params_from(a.params.as_deref(), err)?;
    let mut rows = vec![[a.v_rear, a.v_front, a.a_rear]];
    for spec in &a.grid {
        let (name, values) = parse_grid(spec)?;
        let col = match name.as_str() {
            "v_rear" => 0,
            "v_front" => 1,
            "a_rear" => 2,
            other => {
                return Err(Error::field("grid", format!("unknown input `{other}`, expected v_rear, v_front or a_rear")).into())
            }
        };
        rows = rows
            .iter()
            .flat_map(|r| {
                values.iter().map(move |&v| {
                    let mut r = *r;
                    r[col] = v;
                    r
                })
            })
            .collect();
    }
    for r in &rows {
        if !(r[0] >= 0.0 && r[1] >= 0.0) || !r[2].is_finite() {
            return Err(Error::field("v_rear", "speeds must be >= 0 and acceleration finite").into());
        }
    }
    let mut table = Vec::with_capacity(rows.len());
    for r in &rows {
        let rear = KinematicState::new(0.0, r[0], r[2]);
        let d = monitor_safe_distance(rear, r[1], &p);
        let classic = a.classic.then(|| safe_distance_rss(r[0], r[1], &p));
        table.push((r, d, classic));
    }
    match a.format {
        Format::Table => {
            write!(out, "{:>10} {:>10} {:>10} {:>14}", "v_rear", "v_front", "a_rear", "d_safe")?;
            if a.classic {
                write!(out, " {:>14}", "d_safe_rss")?;
            }
            writeln!(out)?;
            for (r, d, c) in &table {
                write!(out, "{:>10.4} {:>10.4} {:>10.4} {:>14.6}", r[0], r[1], r[2], d)?;
                if let Some(c) = c {
                    write!(out, " {c:>14.6}")?;
                }
                writeln!(out)?;
            }
        }
        Format::Csv => {
            write!(out, "v_rear,v_front,a_rear,d_safe")?;
            if a.classic {
                write!(out, ",d_safe_rss")?;
            }
            writeln!(out)?;
            for (r, d, c) in &table {
                write!(out, "{:.8e},{:.8e},{:.8e},{d:.8e}", r[0], r[1], r[2])?;
                if let Some(c) = c {
                    write!(out, ",{c:.8e}")?;
                }
                writeln!(out)?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = table
                .iter()
                .map(|(r, d, c)| {
                    serde_json::json!({
                        "v_rear": r[0], "v_front": r[1], "a_rear": r[2], "d_safe": d, "d_safe_rss": c,
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("json"))?;
        }
    }
    Ok(EXIT_OK)
}

fn simulate_cmd(a: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let scenario = a.source.load()?;
    if scenario.population.is_some() {
        return Err(Error::field("population", "population files are for `sweep`; simulate needs one scenario").into());
    }
    let trace = run(&scenario)?;
    for w in &trace.header.warnings {
        writeln!(err, "warning: {w}")?;
    }
    match &a.out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_trace(&mut file, &scenario, &trace)?;
            file.flush()?;
            let s = &trace.summary;
            writeln!(
                out,
                "steps={} end={:?} min_gap={:.6} collision_time={}",
                s.steps,
                s.end,
                s.min_gap,
                s.collision_time.map_or("none".into(), |t| format!("{t:.6}"))
            )?;
        }
        None => write_trace(out, &scenario, &trace)?,
    }
    Ok(if trace.summary.collided() { EXIT_COLLISION } else { EXIT_OK })
}

fn verify_cmd(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let p = params_from(a.params.as_deref(), err)?;
    if a.n == 0 {
        return Err(Error::field("n", "must be >= 1").into());
    }
    if !(a.horizon > 0.0 && a.horizon.is_finite()) {
        return Err(Error::field("horizon", "must be finite and > 0").into());
    }
    let mut opts = VerifyOptions::new(a.n, a.seed, p);
    opts.sim.horizon = a.horizon;
    let report = verify_with(&opts)?;
    print_verify(out, &report, a.seed)?;
    if report.passed() {
        writeln!(out, "PASS")?;
        return Ok(EXIT_OK);
    }
    if let Some(cx) = &report.counterexample {
        let mut file = std::io::BufWriter::new(std::fs::File::create(&a.counterexample)?);
        write_trace(&mut file, &cx.scenario, &cx.trace)?;
        file.flush()?;
        let json_path = a.counterexample.with_extension("scenario.json");
        std::fs::write(&json_path, cx.scenario.to_json())?;
        writeln!(
            out,
            "counterexample: scenario #{} trace {} scenario {}",
            cx.index,
            a.counterexample.display(),
            json_path.display()
        )?;
    }
    writeln!(out, "FAIL")?;
    Ok(EXIT_VERIFY_FAILED)
}

fn print_verify(out: &mut dyn Write, r: &VerifyReport, seed: u64) -> std::io::Result<()> {
    writeln!(
        out,
        "scenarios={} seed={} collisions={} interventions={} min_gap={:.6}",
        r.n, seed, r.collisions, r.interventions, r.min_gap
    )?;
    writeln!(out, "min gap histogram (m):")?;
    for (label, count) in VerifyReport::bin_labels().iter().zip(&r.histogram) {
        writeln!(out, "  {label:>14} {count}")?;
    }
    Ok(())
}

fn parse_axis(spec: &str) -> Result<Axis> {
    let bad = || Error::field("axis", format!("expected field=v1,v2,..., got `{spec}`"));
    let (field, values) = spec.split_once('=').ok_or_else(bad)?;
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Axis {
        field: field.trim().to_string(),
        values,
    })
}

fn sweep_cmd(a: &SweepArgs, out: &mut dyn Write, _err: &mut dyn Write) -> CmdResult {
    let base = a.source.load()?;
    if let Some(pf) = a.p_fail {
        if !(0.0..=1.0).contains(&pf) {
            return Err(Error::field("p_fail", format!("probability must be in [0, 1], got {pf}")).into());
        }
    }
    let mut arms = Vec::new();
    for name in a.paired_controllers.split(',') {
        let spec = ControllerSpec::from_name(name)?;
        let arm = Arm::new(spec);
        arms.push(match (spec, a.p_fail) {
            (ControllerSpec::None, _) | (_, None) => arm,
            (_, Some(pf)) => arm.with_p_fail(pf),
        });
    }
    let mut plan = SweepPlan::new(base, arms, a.n, a.seed);
    plan.axes = a.axis.iter().map(|s| parse_axis(s)).collect::<Result<_>>()?;
    plan.cap = a.cap;
    let report = sweep(&plan)?;
    print_sweep(out, &report)?;
    if let Some(path) = &a.out {
        std::fs::write(path, serde_json::to_string_pretty(&report).expect("report serializes") + "\n")?;
    }
    Ok(EXIT_OK)
}

fn print_sweep(out: &mut dyn Write, report: &SweepReport) -> std::io::Result<()> {
    writeln!(out, "scenarios per arm: {} seed: {}", report.n, report.seed)?;
    writeln!(
        out,
        "{:>6} {:>10} {:>10} {:>13} {:>10} {:>10} {:>11} {:>10}",
        "arm", "collisions", "dangerous", "interventions", "suppressed", "max_jerk", "max_decel", "elim_rate"
    )?;
    for arm in &report.total {
        let r = &arm.result;
        writeln!(
            out,
            "{:>6} {:>10} {:>10} {:>13} {:>10} {:>10.3} {:>11.3} {:>10}",
            arm.name,
            r.n_collisions,
            r.n_dangerous_episodes,
            r.n_interventions,
            r.n_suppressed,
            r.max_commanded_jerk,
            r.max_commanded_decel,
            r.elimination_rate.map_or("-".to_string(), |e| format!("{e:.4}"))
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        let (name, v) = parse_grid("v-rear=0:40:5").unwrap();
        assert_eq!(name, "v_rear");
        assert_eq!(v.len(), 9);
        assert_eq!(v[8], 40.0);
        assert!(parse_grid("v_rear=0:40").is_err());
        assert!(parse_grid("v_rear=0:40:0").is_err());
    }

    #[test]
    fn axis_specs() {
        let a = parse_axis("j_max=2,4").unwrap();
        assert_eq!(a.values, vec![2.0, 4.0]);
        assert!(parse_axis("j_max").is_err());
    }
}
