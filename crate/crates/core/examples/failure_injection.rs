//! How often a silently failing controller still prevents collisions.
//!
//! Usage: `cargo run --example failure_injection -- [n]`

use apb::cli::{parse_scenario, preset};
use apb::controllers::{ApbConfig, FailureInjector};
use apb::sim::{sweep, Arm, ControllerSpec, SweepPlan};

fn main() -> apb::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(300, |s| s.parse().expect("n"));

    // Engagements within the hold-off share one draw.
    let mut injector = FailureInjector::new(0.5, 1);
    let chatter = [0.0, 0.5, 1.0, 1.5, 6.0, 6.1, 12.0];
    let draws: Vec<bool> = chatter.iter().map(|&t| injector.engaged(t)).collect();
    println!("engaged at {chatter:?}: suppressed {draws:?}, {} episodes", injector.episodes());

    let base = parse_scenario(preset("tailgater_population")?)?;
    let mut arms = vec![Arm::new(ControllerSpec::None)];
    for p_fail in [0.0, 0.01, 0.1, 0.5, 1.0] {
        let mut arm = Arm::new(ControllerSpec::Apb(ApbConfig::default())).with_p_fail(p_fail);
        arm.name = format!("apb p={p_fail}");
        arms.push(arm);
    }
    let report = sweep(&SweepPlan::new(base, arms, n, 5))?;
    for arm in &report.total {
        let r = &arm.result;
        println!(
            "{:>12}: collisions {:>4} / {}  suppressed episodes {:>4}  elimination {}",
            arm.name,
            r.n_collisions,
            r.n_scenarios,
            r.n_suppressed,
            r.elimination_rate.map_or("-".to_string(), |e| format!("{e:.3}"))
        );
    }
    Ok(())
}
