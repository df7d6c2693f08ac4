//! Phantom obstacles from a noisy sensor: emergency braking slams on full
//! pressure, preventive braking only eases in.
//!
//! Usage: `cargo run --example ghost_comfort -- [n] [ghost_rate]`

use apb::cli::{parse_scenario, preset};
use apb::controllers::{AebConfig, ApbConfig};
use apb::sim::{sweep, Arm, ControllerSpec, SweepPlan};

fn main() -> apb::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(500, |s| s.parse().expect("n"));
    let ghost_rate: Option<f64> = args.next().map(|s| s.parse().expect("ghost_rate"));

    let mut base = parse_scenario(preset("ghost_population")?)?;
    if let Some(rate) = ghost_rate {
        base.sensor.ghost_rate = rate;
    }
    let arms = vec![
        Arm::new(ControllerSpec::Aeb(AebConfig::default())),
        Arm::new(ControllerSpec::Apb(ApbConfig::default())),
    ];
    let report = sweep(&SweepPlan::new(base, arms, n, 11))?;
    for arm in &report.total {
        let r = &arm.result;
        println!(
            "{:>4}: interventions {:>5}  max decel {:>6.2} m/s^2  max jerk {:>8.1} m/s^3  collisions {}",
            arm.name, r.n_interventions, r.max_commanded_decel, r.max_commanded_jerk, r.n_collisions
        );
    }
    Ok(())
}
