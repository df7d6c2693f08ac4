//! The safe distance is exact: starting at it against a front that brakes
//! as hard as allowed ends in contact-free standstill, starting half a metre
//! closer ends in a collision.
//!
//! Usage: `cargo run --example tightness -- [shortfall]`

use apb::sim::tightness_pair;
use apb::RssParams;

fn main() -> apb::Result<()> {
    let shortfall: f64 = std::env::args().nth(1).map_or(0.5, |s| s.parse().expect("shortfall"));
    let p = RssParams::default();
    println!("{:>6} {:>6} {:>10} {:>14} {:>18}", "v_r", "v_f", "d_safe", "min gap at", "collision closer");
    for (v_r, v_f) in [(10.0, 9.99), (20.0, 20.0), (30.0, 10.0), (35.0, 30.0), (40.0, 0.0)] {
        let r = tightness_pair(v_r, v_f, shortfall, &p)?;
        println!(
            "{v_r:>6.2} {v_f:>6.2} {:>10.4} {:>14.2e} {:>18}",
            r.d_safe,
            r.at_safe_distance.min_gap,
            r.below_safe_distance
                .collision_time
                .map_or("none".to_string(), |t| format!("{t:.3} s"))
        );
    }
    Ok(())
}
