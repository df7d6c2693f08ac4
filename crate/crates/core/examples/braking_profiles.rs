//! Velocity and distance over time for each braking profile.
//!
//! Usage: `cargo run --example braking_profiles -- [v0] [a0]`

use apb::profiles::{distance_traveled, stop_time, velocity_at, KinematicState, ProfileId};
use apb::RssParams;

fn main() {
    let mut args = std::env::args().skip(1);
    let v0: f64 = args.next().map_or(25.0, |s| s.parse().expect("v0"));
    let a0: f64 = args.next().map_or(0.0, |s| s.parse().expect("a0"));
    let p = RssParams {
        rho: 0.5,
        ..RssParams::default()
    };
    let s0 = KinematicState::new(0.0, v0, a0);

    for profile in ProfileId::ALL {
        let t_stop = stop_time(profile, s0, &p);
        println!(
            "{profile:?}: stops after {t_stop:.3} s and {:.3} m",
            distance_traveled(profile, s0, &p, f64::INFINITY)
        );
        for k in 0..=8 {
            let t = t_stop * k as f64 / 8.0;
            println!(
                "  t={t:>7.3}  v={:>7.3}  x={:>8.3}",
                velocity_at(profile, s0, &p, t),
                distance_traveled(profile, s0, &p, t)
            );
        }
    }
}
