//! JSON configuration of a [`SystemSpec`].
//!
//! ```json
//! {
//!   "dims": [2, 2],
//!   "initial_state": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]],
//!   "channels": [
//!     {"kind": "markov_amplitude_damping", "target": 0, "params": {"gamma": 1.0}},
//!     {"kind": "dephasing", "target": 1,
//!      "params": {"delta": 1.0, "density": {"shape": "ohmic_cutoff", "omega_d": 10.0}}}
//!   ],
//!   "local_hamiltonians": [null, [[[0.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]]],
//!   "max_dimension": 64
//! }
//! ```
//!
//! `initial_state` lists `[re, im]` pairs in row-major order with `|1>` the
//! excited level. `local_hamiltonians` is optional; a `null` entry is the zero
//! matrix. Channel kinds and their `params`:
//!
//! | kind | params |
//! |---|---|
//! | `markov_amplitude_damping` | `gamma` |
//! | `ou_amplitude_damping` | `gamma`, `omega_d` |
//! | `dephasing` | `delta`, `density`, optional `generator` (qudit diagonal) |
//!
//! `density.shape` is one of `purely_ohmic`, `ohmic_cutoff`, `superohmic`
//! (the last two take `omega_d`).

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result, Violation, Violations};
use crate::linalg::CMat;
use crate::model::{
    ChannelKind, ChannelSpec, Limits, PureState, SpectralDensity, SubsystemLayout, SystemSpec,
    DEFAULT_MAX_DIMENSION,
};

/// Deserializes `src`, reporting failures with the JSON path of the offending key.
pub fn parse_json<'de, T: Deserialize<'de>>(src: &'de str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(src);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: strip_position(&inner.to_string()),
        }
    })?;
    de.end().map_err(|e| Error::Parse {
        path: ".".into(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    Ok(value)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

type Pair = [f64; 2];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig<'a> {
    pub dims: Vec<usize>,
    pub initial_state: Vec<Pair>,
    #[serde(default, borrow)]
    pub channels: Vec<ChannelConfig<'a>>,
    #[serde(default)]
    pub local_hamiltonians: Option<Vec<Option<Vec<Vec<Pair>>>>>,
    #[serde(default)]
    pub max_dimension: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig<'a> {
    pub kind: String,
    pub target: usize,
    #[serde(borrow)]
    pub params: &'a RawValue,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplitudeDampingParams {
    gamma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OuParamsConfig {
    gamma: f64,
    omega_d: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DephasingParams {
    delta: f64,
    density: SpectralDensity,
    #[serde(default)]
    generator: Option<Vec<f64>>,
}

/// Line and column of byte `offset` in `src`, 1-based.
fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn parse_params<'de, T: Deserialize<'de>>(src: &str, raw: &'de RawValue, path: &str) -> Result<T> {
    let text = raw.get();
    let offset = (text.as_ptr() as usize).checked_sub(src.as_ptr() as usize).filter(|&o| o <= src.len());
    parse_json(text).map_err(|e| match e {
        Error::Parse {
            path: inner,
            line,
            column,
            message,
        } => {
            let (line, column) = match offset {
                Some(o) => {
                    let (l0, c0) = position(src, o);
                    if line == 1 {
                        (l0, c0 + column - 1)
                    } else {
                        (l0 + line - 1, column)
                    }
                }
                None => (line, column),
            };
            let path = if inner == "." {
                path.to_string()
            } else {
                format!("{path}.{inner}")
            };
            Error::Parse {
                path,
                line,
                column,
                message,
            }
        }
        other => other,
    })
}

impl SystemConfig<'_> {
    /// Builds and validates the system. `src` is the text this config was
    /// parsed from and is used to locate errors inside channel parameters.
    pub fn build(&self, src: &str) -> Result<SystemSpec> {
        let mut channels = Vec::with_capacity(self.channels.len());
        for (k, ch) in self.channels.iter().enumerate() {
            let path = format!("channels[{k}].params");
            let kind = match ch.kind.as_str() {
                "markov_amplitude_damping" => {
                    let p: AmplitudeDampingParams = parse_params(src, ch.params, &path)?;
                    ChannelKind::MarkovAmplitudeDamping { gamma: p.gamma }
                }
                "ou_amplitude_damping" => {
                    let p: OuParamsConfig = parse_params(src, ch.params, &path)?;
                    ChannelKind::OuAmplitudeDamping {
                        gamma: p.gamma,
                        omega_d: p.omega_d,
                    }
                }
                "dephasing" => {
                    let p: DephasingParams = parse_params(src, ch.params, &path)?;
                    ChannelKind::Dephasing {
                        delta: p.delta,
                        density: p.density,
                        generator: p.generator,
                    }
                }
                other => {
                    return Err(Error::InvalidSpec(Violations(vec![Violation::new(
                        format!("channels[{k}].kind"),
                        format!(
                            "unknown channel kind `{other}`; expected markov_amplitude_damping, ou_amplitude_damping or dephasing"
                        ),
                    )])))
                }
            };
            channels.push(ChannelSpec {
                kind,
                target: ch.target,
            });
        }

        let mut v = Violations::default();
        let hamiltonians = match &self.local_hamiltonians {
            None => self.dims.iter().map(|&d| CMat::zeros(d, d)).collect(),
            Some(list) => {
                let mut out = Vec::with_capacity(list.len());
                for (i, h) in list.iter().enumerate() {
                    let d = self.dims.get(i).copied().unwrap_or(0);
                    match h {
                        None => out.push(CMat::zeros(d, d)),
                        Some(rows) => {
                            let n = rows.len();
                            if rows.iter().any(|r| r.len() != n) {
                                v.push(format!("local_hamiltonians[{i}]"), "rows must form a square matrix");
                                out.push(CMat::zeros(d, d));
                                continue;
                            }
                            out.push(CMat::from_fn(n, n, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1])));
                        }
                    }
                }
                out
            }
        };
        v.into_result()?;

        let initial = PureState::new(
            self.initial_state
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect(),
        );
        let spec = SystemSpec {
            layout: SubsystemLayout::unchecked(self.dims.clone()),
            initial,
            channels,
            local_hamiltonians: hamiltonians,
        };
        let limits = Limits {
            max_dimension: self.max_dimension.unwrap_or(DEFAULT_MAX_DIMENSION),
        };
        spec.validate_with(limits).map_err(|e| match e {
            Error::InvalidSpec(vs) => Error::InvalidSpec(Violations(
                vs.0.into_iter().map(|x| Violation::new(config_path(&x.path), x.message)).collect(),
            )),
            other => other,
        })?;
        Ok(spec)
    }
}

/// Maps a model field path onto the configuration layout, where channel
/// parameters live under `params`.
fn config_path(model_path: &str) -> String {
    if let Some(rest) = model_path.strip_prefix("channels[") {
        if let Some(close) = rest.find("].") {
            let field = &rest[close + 2..];
            if field != "target" && field != "kind" {
                return format!("channels[{}].params.{field}", &rest[..close]);
            }
        }
    }
    model_path.to_string()
}

/// Parses and validates a system configuration.
pub fn parse_system(src: &str) -> Result<SystemSpec> {
    let cfg: SystemConfig = parse_json(src)?;
    cfg.build(src)
}

pub fn load_system(path: &std::path::Path) -> Result<SystemSpec> {
    parse_system(&std::fs::read_to_string(path)?)
}

/// Serializes `spec` in the configuration layout; `parse_system` inverts it.
pub fn system_to_json(spec: &SystemSpec) -> serde_json::Value {
    let pair = |z: &Complex64| serde_json::json!([z.re, z.im]);
    let channels: Vec<serde_json::Value> = spec
        .channels
        .iter()
        .map(|ch| {
            let mut params = serde_json::to_value(&ch.kind).expect("channel kinds serialize");
            if let Some(obj) = params.as_object_mut() {
                obj.remove("kind");
            }
            serde_json::json!({"kind": ch.kind_name(), "target": ch.target, "params": params})
        })
        .collect();
    let hamiltonians: Vec<serde_json::Value> = spec
        .local_hamiltonians
        .iter()
        .map(|h| {
            if h.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                serde_json::Value::Null
            } else {
                (0..h.nrows())
                    .map(|r| (0..h.ncols()).map(|c| pair(&h[(r, c)])).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
                    .into()
            }
        })
        .collect();
    let total = spec.layout.total_dim();
    serde_json::json!({
        "dims": spec.layout.dims(),
        "initial_state": spec.initial.amplitudes.iter().map(pair).collect::<Vec<_>>(),
        "channels": channels,
        "local_hamiltonians": hamiltonians,
        "max_dimension": total.max(DEFAULT_MAX_DIMENSION),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BELL: &str = r#"{
  "dims": [2, 2],
  "initial_state": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]],
  "channels": [
    {"kind": "markov_amplitude_damping", "target": 0, "params": {"gamma": 1.0}}
  ]
}"#;

    #[test]
    fn parses_bell_pair() {
        let spec = parse_system(BELL).unwrap();
        assert_eq!(spec.layout.dims(), &[2, 2]);
        assert_eq!(spec.channels[0], ChannelSpec::markov_amplitude_damping(0, 1.0));
        assert_eq!(spec.local_hamiltonians.len(), 2);
    }

    #[test]
    fn round_trip() {
        let src = r#"{
  "dims": [2, 3],
  "initial_state": [[0.5,0],[0,0.5],[0,0],[0,0],[0.5,0],[0.5,0]],
  "channels": [
    {"kind": "dephasing", "target": 1,
     "params": {"delta": 2.0, "density": {"shape": "superohmic", "omega_d": 5.0}, "generator": [1, 0, -1]}},
    {"kind": "ou_amplitude_damping", "target": 0, "params": {"gamma": 1.0, "omega_d": 4.0}}
  ]
}"#;
        let spec = parse_system(src).unwrap();
        let again = parse_system(&system_to_json(&spec).to_string()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn bad_param_reports_path_and_line() {
        let src = BELL.replace("\"gamma\": 1.0", "\"gamma\": \"fast\"");
        match parse_system(&src) {
            Err(Error::Parse { path, line, .. }) => {
                assert_eq!(path, "channels[0].params.gamma");
                assert_eq!(line, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_key_reports_path() {
        let src = BELL.replace("\"target\": 0,", "");
        match parse_system(&src) {
            Err(Error::Parse { path, message, .. }) => {
                assert_eq!(path, "channels[0]");
                assert!(message.contains("target"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_values_map_to_config_paths() {
        let src = BELL.replace("\"gamma\": 1.0", "\"gamma\": -1.0");
        match parse_system(&src) {
            Err(Error::InvalidSpec(v)) => {
                assert_eq!(v.0[0].path, "channels[0].params.gamma");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_kind() {
        let src = BELL.replace("markov_amplitude_damping", "thermal");
        assert!(matches!(parse_system(&src), Err(Error::InvalidSpec(_))));
    }
}
