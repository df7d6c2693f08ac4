use std::path::Path;

use crate::error::{Error, Result};
use crate::profiles::RssParams;
use crate::sim::Scenario;

/// Bundled scenario and parameter files, by name.
pub const PRESETS: [(&str, &str); 7] = [
    ("defaults", include_str!("../../presets/defaults.json")),
    ("close_follow_ttc", include_str!("../../presets/close_follow_ttc.json")),
    ("close_follow_apb", include_str!("../../presets/close_follow_apb.json")),
    ("worst_case_front", include_str!("../../presets/worst_case_front.json")),
    ("adversarial_tailgater", include_str!("../../presets/adversarial_tailgater.json")),
    ("tailgater_population", include_str!("../../presets/tailgater_population.json")),
    ("ghost_population", include_str!("../../presets/ghost_population.json")),
];

pub fn preset(name: &str) -> Result<&'static str> {
    let name = name.trim_end_matches(".json");
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let known: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::field("preset", format!("unknown preset `{name}`, expected one of {}", known.join(", ")))
        })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_params(text: &str) -> Result<RssParams> {
    let p: RssParams = serde_json::from_str(text).map_err(|e| Error::Parse(format!("params: {e}")))?;
    p.validate()?;
    Ok(p)
}

/// Reads a parameter file; unknown keys are rejected.
pub fn load_params(path: &Path) -> Result<RssParams> {
    parse_params(&read(path)?)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let s = Scenario::from_json(text)?;
    let mut check = s.clone();
    check.population = None;
    check.validate()?;
    Ok(s)
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        assert_eq!(parse_params(preset("defaults").unwrap()).unwrap(), RssParams::default());
        for (name, text) in PRESETS.iter().skip(1) {
            let s = parse_scenario(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("nope").unwrap_err().to_string().contains("close_follow_ttc"));
        assert!(preset("worst_case_front.json").is_ok());
    }

    #[test]
    fn params_reject_unknown_keys_and_bad_values() {
        assert!(parse_params(r#"{"a_max_brake": 8, "a_min_brake": 4, "a_max_accel": 2, "j_max": 2, "jmax": 1}"#).is_err());
        let err = parse_params(r#"{"a_max_brake": 8, "a_min_brake": 0, "a_max_accel": 2, "j_max": 2}"#).unwrap_err();
        assert!(err.to_string().contains("params.a_min_brake"));
    }
}
