//! Audits traces against the response each car owes once the scene turns
//! dangerous, and tells whose fault a collision is.
//!
//! Usage: `cargo run --example compliance_check -- [seed]`

use apb::profiles::{KinematicState, RssParams};
use apb::safety::{check_compliance, safe_distance_apb, ComplianceTolerance};
use apb::controllers::{ApbConfig, DriverPolicy};
use apb::sim::{run, CarInit, ControllerSpec, FrontScript, InitialState, Scenario};

fn main() -> apb::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(2, |s| s.parse().expect("seed"));

    for compliant in [true, false] {
        let d_safe = safe_distance_apb(KinematicState::at_speed(25.0), 22.0, &RssParams::default());
        let mut s = Scenario::new(InitialState {
            gap_m: d_safe + 2.0,
            rear: CarInit { v: 25.0, a: 0.0 },
            front: CarInit { v: 22.0, a: 0.0 },
        });
        s.driver = DriverPolicy::Tailgater { target_gap: 2.0 };
        s.controller = ControllerSpec::Apb(ApbConfig::default());
        s.front_script = FrontScript::adversarial(seed, compliant);
        s.sim.horizon = 12.0;

        let trace = run(&s)?;
        let report = check_compliance(&trace, &s.params, ComplianceTolerance::default())?;
        println!(
            "front {}: collision {:?}, {} dangerous episode(s), rear compliant {}, front within assumptions {}",
            if compliant { "compliant" } else { "unbounded" },
            trace.summary.collision_time,
            report.episodes_checked,
            report.rear_first_violation.is_none(),
            !report.front_exceeded_assumptions()
        );
        if let Some(t) = report.front_first_violation {
            println!("  front first broke its envelope at {t:.2} s (by {:.3} m/s)", report.max_front_violation);
        }
    }
    Ok(())
}
