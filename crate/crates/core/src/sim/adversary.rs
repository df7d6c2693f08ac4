use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::ScriptSegment;
use crate::profiles::{RssParams, ACCEL_CEILING};

/// Probability of the immediate, sustained maximum-braking script.
pub const WORST_CASE_PROBABILITY: f64 = 0.05;
const MIN_SEGMENT: f64 = 0.1;
const MAX_SEGMENT: f64 = 3.0;

/// The worst case a compliant front may do: brake at `a_max_brake` from
/// time zero until it stops.
pub fn worst_case_front(p: &RssParams) -> Vec<ScriptSegment> {
    vec![ScriptSegment {
        t: 0.0,
        accel: -p.a_max_brake,
    }]
}

/// Random piecewise-constant front accelerations up to `horizon`.
///
/// Segment lengths are uniform in 0.1..3 s. A compliant adversary stays in
/// `[-a_max_brake, a_max_accel]`, otherwise values span the physical ceiling.
/// Half the segments sit on one of the two bounds, where collisions are
/// most likely to be found.
pub fn adversarial_front(seed: u64, p: &RssParams, horizon: f64, compliant: bool) -> Vec<ScriptSegment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if rng.gen_bool(WORST_CASE_PROBABILITY) {
        return worst_case_front(p);
    }
    let (lo, hi) = if compliant {
        (-p.a_max_brake, p.a_max_accel)
    } else {
        (-ACCEL_CEILING, ACCEL_CEILING)
    };
    let mut script = Vec::new();
    let mut t = 0.0;
    while t < horizon {
        let u: f64 = rng.gen();
        let accel = if u < 0.35 {
            lo
        } else if u < 0.5 {
            hi
        } else if hi > lo {
            rng.gen_range(lo..=hi)
        } else {
            lo
        };
        script.push(ScriptSegment { t, accel });
        t += rng.gen_range(MIN_SEGMENT..=MAX_SEGMENT);
    }
    script
}
