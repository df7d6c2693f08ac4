use std::io::{self, Write};

use crate::sim::{Scenario, Trace};

pub const COLUMNS: &str = "t,x_r,v_r,a_r,x_f,v_f,a_f,gap,d_safe,dangerous,mode,cmd_accel";

/// Nine significant digits.
fn num(x: f64) -> String {
    format!("{x:.8e}")
}

/// Writes `#`-prefixed header lines followed by one comma-separated row per
/// step. The output depends only on the scenario, so identical runs give
/// identical bytes.
pub fn write_trace(out: &mut dyn Write, scenario: &Scenario, trace: &Trace) -> io::Result<()> {
    let h = &trace.header;
    let s = &trace.summary;
    writeln!(out, "# apb trace v1")?;
    writeln!(out, "# scenario_sha256: {}", scenario.hash())?;
    writeln!(out, "# controller: {}", h.controller)?;
    writeln!(
        out,
        "# seeds: sim={} adversary={} sensor={} failure={}",
        h.sim_seed,
        h.adversary_seed.map_or("none".to_string(), |s| s.to_string()),
        h.sensor_seed,
        h.failure_seed
    )?;
    writeln!(out, "# params: {}", serde_json::to_string(&h.params).expect("params serialize"))?;
    writeln!(out, "# dt: {} horizon: {}", scenario.sim.dt, scenario.sim.horizon)?;
    for w in &h.warnings {
        writeln!(out, "# warning: {w}")?;
    }
    writeln!(
        out,
        "# summary: end={} steps={} collision_time={} min_gap={} dangerous_episodes={} interventions={} suppressed={}",
        serde_json::to_value(s.end).expect("end serializes").as_str().unwrap_or("?"),
        s.steps,
        s.collision_time.map_or("none".to_string(), num),
        num(s.min_gap),
        s.n_dangerous_episodes,
        s.n_interventions,
        s.n_suppressed
    )?;
    for e in &trace.events {
        writeln!(out, "# event: {} {}", num(e.t), e.kind.as_str())?;
    }
    writeln!(out, "{COLUMNS}")?;
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            num(r.t),
            num(r.rear.x),
            num(r.rear.v),
            num(r.rear.a),
            num(r.front.x),
            num(r.front.v),
            num(r.front.a),
            num(r.gap),
            num(r.d_safe),
            r.dangerous as u8,
            r.mode.as_str(),
            num(r.cmd_accel)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run;

    #[test]
    fn header_then_table() {
        let s = Scenario::from_json(
            r#"{"initial": {"gap_m": 50, "rear": {"v": 20}, "front": {"v": 20}}, "sim": {"horizon": 0.05}}"#,
        )
        .unwrap();
        let trace = run(&s).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &s, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], COLUMNS);
        assert_eq!(body.len(), 6);
        assert_eq!(
            body[1],
            "0.00000000e0,0.00000000e0,2.00000000e1,0.00000000e0,5.00000000e1,2.00000000e1,0.00000000e0,5.00000000e1,4.43333333e1,0,monitoring,0.00000000e0"
        );
        for row in &body[1..] {
            assert_eq!(row.split(',').count(), 12);
        }
    }
}
