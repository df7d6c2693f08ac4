//! Paired sweep over a tailgating population: no assistance against
//! preventive braking that silently fails in a fraction of episodes.
//!
//! Usage: `cargo run --example elimination_sweep -- [n] [p_fail] [seed]`

use apb::controllers::ApbConfig;
use apb::sim::{sweep, Arm, ControllerSpec, Population, Scenario, SweepPlan, TailgaterPopulation};

fn main() -> apb::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(1_000, |s| s.parse().expect("n"));
    let p_fail: f64 = args.next().map_or(0.01, |s| s.parse().expect("p_fail"));
    let seed: u64 = args.next().map_or(2024, |s| s.parse().expect("seed"));

    let mut base = Scenario::from_json(
        r#"{"initial": {"gap_m": 30, "rear": {"v": 20}, "front": {"v": 20}}, "sim": {"horizon": 16}}"#,
    )?;
    base.population = Some(Population::Tailgater(TailgaterPopulation::default()));

    let arms = vec![
        Arm::new(ControllerSpec::None),
        Arm::new(ControllerSpec::Apb(ApbConfig::default())).with_p_fail(p_fail),
    ];
    let report = sweep(&SweepPlan::new(base, arms, n, seed))?;
    for arm in &report.total {
        let r = &arm.result;
        println!(
            "{:>5}: collisions {:>5} / {}  interventions {:>6}  suppressed {:>4}  max jerk {:>7.2}  max decel {:>5.2}",
            arm.name, r.n_collisions, r.n_scenarios, r.n_interventions, r.n_suppressed, r.max_commanded_jerk, r.max_commanded_decel
        );
    }
    match report.arm("apb").and_then(|r| r.elimination_rate) {
        Some(rate) => println!("elimination rate: {rate:.4}"),
        None => println!("elimination rate: undefined (no baseline collisions)"),
    }
    Ok(())
}
