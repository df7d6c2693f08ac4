//! Safe distances of the response-time model and of jerk-bounded braking.
//!
//! Usage: `cargo run --example safe_distance -- [v_front]`

use apb::profiles::{KinematicState, ProfileId};
use apb::safety::{safe_distance_apb, safe_distance_generalized, safe_distance_rss};
use apb::RssParams;

fn main() {
    let v_f: f64 = std::env::args().nth(1).map_or(20.0, |s| s.parse().expect("v_front"));
    let p = RssParams::default();

    println!("front at {v_f} m/s, {p:?}");
    println!("{:>8} {:>12} {:>12} {:>16}", "v_rear", "rss", "jerk", "jerk, a0=-3");
    for v_r in (0..=40).step_by(5).map(f64::from) {
        println!(
            "{:>8.1} {:>12.3} {:>12.3} {:>16.3}",
            v_r,
            safe_distance_rss(v_r, v_f, &p),
            safe_distance_apb(KinematicState::at_speed(v_r), v_f, &p),
            // Already braking: part of the ramp is done.
            safe_distance_apb(KinematicState::new(0.0, v_r, -3.0), v_f, &p),
        );
    }

    // Any pair of braking profiles.
    let rear = KinematicState::at_speed(30.0);
    let front = KinematicState::at_speed(v_f);
    for br in ProfileId::ALL {
        for bf in ProfileId::ALL {
            let d = safe_distance_generalized(rear, front, bf, br, &p);
            println!("rear {br:?} vs front {bf:?}: {d:.3} m");
        }
    }
}
