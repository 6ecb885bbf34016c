use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{Scenario, PRESETS};

/// Parses a TOML scenario. Errors name the offending key path.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = toml::Deserializer::new(text);
    let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.message().trim().to_string();
        if path == "." {
            Error::Config(msg)
        } else {
            Error::Config(format!("{path}: {msg}"))
        }
    })?;
    s.validate()?;
    Ok(s)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Io(format!("no such file: {}", path.display())),
        _ => Error::Io(format!("{}: {e}", path.display())),
    })?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// A built-in preset name, or else a path to a scenario file.
pub fn resolve_scenario(arg: &str) -> Result<Scenario> {
    if PRESETS.contains(&arg) {
        Scenario::preset(arg)
    } else {
        load_scenario(Path::new(arg))
    }
}

pub fn scenario_to_toml(s: &Scenario) -> Result<String> {
    toml::to_string_pretty(s).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_toml() {
        for name in PRESETS {
            let s = Scenario::preset(name).unwrap();
            let text = scenario_to_toml(&s).unwrap();
            assert_eq!(parse_scenario(&text).unwrap(), s, "{name}");
        }
    }

    #[test]
    fn unknown_key_is_reported_with_its_path() {
        let mut text = scenario_to_toml(&Scenario::preset("case1").unwrap()).unwrap();
        text = text.replacen("[series]", "[series]\nbogus = 1", 1);
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("series") && err.contains("bogus"), "{err}");
    }

    #[test]
    fn missing_key_is_reported_with_its_path() {
        let s = scenario_to_toml(&Scenario::preset("case2").unwrap()).unwrap();
        let text: String = s.lines().filter(|l| !l.starts_with("v_dc ")).collect::<Vec<_>>().join("\n");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("series") && err.contains("v_dc"), "{err}");
    }

    #[test]
    fn missing_file() {
        let err = load_scenario(Path::new("/nonexistent/missing.toml")).unwrap_err();
        assert!(err.to_string().contains("no such file"));
    }
}
