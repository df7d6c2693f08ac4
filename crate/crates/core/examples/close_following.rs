//! Three centimetres behind a slightly slower car that then brakes hard. The
//! time-to-collision trigger reacts only once the front brakes; the
//! safe-distance monitor flags the scene from the start, and starting at the
//! safe distance the same front is survived.
//!
//! Usage: `cargo run --example close_following`

use apb::cli::{parse_scenario, preset};
use apb::controllers::{ttc, AebConfig};
use apb::safety::{is_dangerous, SceneState};
use apb::sim::{run, ControllerSpec};

fn main() -> apb::Result<()> {
    let scene = SceneState::from_speeds(0.03, 10.0, 9.99);
    let verdict = is_dangerous(&scene, &Default::default());
    println!(
        "gap 0.03 m, ttc {:.3} s (AEB threshold {} s), safe distance {:.3} m, dangerous: {}",
        ttc(0.03, 10.0, 9.99)?,
        AebConfig::default().ttc_threshold,
        verdict.d_safe,
        verdict.dangerous
    );

    let base = parse_scenario(preset("close_follow_ttc")?)?;
    for controller in [ControllerSpec::None, base.controller, ControllerSpec::Apb(Default::default())] {
        let mut s = base.clone();
        s.controller = controller;
        let trace = run(&s)?;
        let sum = &trace.summary;
        print!("{:>5}: ", controller.name());
        match sum.collision_time {
            Some(t) => println!("collision at {t:.3} s"),
            None => println!("no collision, smallest gap {:.4} m", sum.min_gap),
        }
        for e in trace.events.iter().take(6) {
            println!("        {:>7.3} s {}", e.t, e.kind.as_str());
        }
    }

    // With the gap the preventive controller asks for, it brings the car to
    // rest behind the braking front.
    let apb = parse_scenario(preset("close_follow_apb")?)?;
    let trace = run(&apb)?;
    println!(
        "apb from {:.3} m: smallest gap {:.4} m, {} intervention(s)",
        apb.initial.gap_m, trace.summary.min_gap, trace.summary.n_interventions
    );
    Ok(())
}
