use condent::config;
use condent::model::{ChannelKind, SpectralDensity};
use condent::Error;

const BELL: &str = r#"{
  "dims": [2, 2],
  "initial_state": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]],
  "channels": [
    {"kind": "dephasing", "target": 1,
     "params": {"delta": 1.0, "density": {"shape": "ohmic_cutoff", "omega_d": 10.0}}}
  ]
}"#;

#[test]
fn parses_and_round_trips() {
    let spec = config::parse_system(BELL).unwrap();
    assert_eq!(spec.layout.dims(), &[2, 2]);
    match &spec.channels[0].kind {
        ChannelKind::Dephasing { delta, density, .. } => {
            assert_eq!(*delta, 1.0);
            assert_eq!(*density, SpectralDensity::OhmicCutoff { omega_d: 10.0 });
        }
        other => panic!("unexpected channel {other:?}"),
    }
    let json = serde_json::to_string(&config::system_to_json(&spec)).unwrap();
    assert_eq!(config::parse_system(&json).unwrap(), spec);
}

#[test]
fn loads_from_file() {
    let dir = std::env::temp_dir().join(format!("condent-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bell.json");
    std::fs::write(&path, BELL).unwrap();
    assert!(config::load_system(&path).is_ok());
    assert!(matches!(config::load_system(&dir.join("missing.json")), Err(Error::Io(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn negative_rate_names_its_field() {
    let src = BELL.replace("\"delta\": 1.0", "\"delta\": -1.0");
    let err = config::parse_system(&src).unwrap_err();
    let text = err.to_string();
    assert!(text.contains("channels[0].params.delta"), "{text}");
}

#[test]
fn type_error_reports_path_and_line() {
    let src = BELL.replace("\"omega_d\": 10.0", "\"omega_d\": \"ten\"");
    match config::parse_system(&src).unwrap_err() {
        Error::Parse { path, line, .. } => {
            assert!(path.starts_with("channels[0].params.density"), "{path}");
            assert_eq!(line, 6);
        }
        other => panic!("expected parse error, got {other}"),
    }
}

#[test]
fn unnormalized_state_is_rejected() {
    let src = BELL.replace("[0.7071067811865476, 0], [0, 0], [0, 0]", "[1, 0], [0, 0], [0, 0]");
    assert!(config::parse_system(&src).is_err());
}

#[test]
fn unknown_fields_are_rejected() {
    let src = BELL.replace("\"dims\"", "\"extra\": 1, \"dims\"");
    assert!(matches!(config::parse_system(&src), Err(Error::Parse { .. })));
}

#[test]
fn dimension_cap_is_enforced() {
    let src = BELL.replace("\"dims\": [2, 2],", "\"dims\": [2, 2], \"max_dimension\": 2,");
    assert!(config::parse_system(&src).is_err());
}
