//! Randomized check that preventive braking never lets the rear car hit a
//! front car that brakes within its assumed limit.
//!
//! Usage: `cargo run --example adversarial_verify -- [n] [seed]`

use std::time::Instant;

use apb::sim::{verify_no_collision, VerifyReport};
use apb::RssParams;

fn main() -> apb::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(2_000, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let start = Instant::now();
    let report = verify_no_collision(n, seed, &RssParams::default())?;
    println!("{n} scenarios in {:.1?}", start.elapsed());
    println!("collisions: {}", report.collisions);
    println!("interventions: {}", report.interventions);
    println!("smallest gap: {:.6} m", report.min_gap);
    for (label, count) in VerifyReport::bin_labels().iter().zip(&report.histogram) {
        println!("  min gap {label:>12}: {count}");
    }
    if let Some(cx) = &report.counterexample {
        println!("counterexample #{}: {}", cx.index, cx.scenario.to_json());
    }
    Ok(())
}
