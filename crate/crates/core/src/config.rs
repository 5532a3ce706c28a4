//! Flat `key = value` run configuration.
//!
//! Keys carry their unit in a suffix: `_hz` (converted to rad/s), `_rads`,
//! `_k`, `_w`, `_m`. Dimensionless keys have none. A line `defaults: baseline`
//! preloads the room-temperature parameter set; explicit keys then replace
//! individual defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::error::Result as PhysicsResult;
use crate::model::{hz_to_rads, DriveSpec, DriveStrength, PhysicalParams};
use crate::oracle::Model;
use crate::steady::{baseline_device, baseline_operating_point, drive_for_operating_point, OperatingPoint};
use crate::sweep::{linear_grid, DEFAULT_GRID_POINTS, DEFAULT_GRID_SPAN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: key '{key}': {msg}")]
    Unit { line: usize, key: String, msg: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("missing key '{0}'")]
    MissingKey(String),
    #[error("key '{key}' is not used with drive_mode = {mode}")]
    UnusedKey { key: String, mode: String },
    #[error("key '{key}': {msg}")]
    InvalidValue { key: String, msg: String },
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Line number reported for `--set` overrides.
pub const OVERRIDE_LINE: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    /// Angular rate; accepts `_hz` and `_rads`.
    Rate,
    Kelvin,
    Watt,
    Meter,
    None,
    Text,
}

impl Unit {
    fn suffixes(self) -> &'static [&'static str] {
        match self {
            Unit::Rate => &["_hz", "_rads"],
            Unit::Kelvin => &["_k"],
            Unit::Watt => &["_w"],
            Unit::Meter => &["_m"],
            Unit::None | Unit::Text => &[""],
        }
    }

    /// Suffix used when writing a value back out.
    fn canonical(self) -> &'static str {
        match self {
            Unit::Rate => "_rads",
            other => other.suffixes()[0],
        }
    }
}

const KEYS: &[(&str, Unit)] = &[
    ("omega_p", Unit::Rate),
    ("omega_m", Unit::Rate),
    ("gamma", Unit::Rate),
    ("q_factor", Unit::None),
    ("nu", Unit::Rate),
    ("eta", Unit::None),
    ("temperature", Unit::Kelvin),
    ("radius", Unit::Meter),
    ("n0", Unit::None),
    ("drive_mode", Unit::Text),
    ("alpha", Unit::None),
    ("delta", Unit::Rate),
    ("d_over_gamma", Unit::None),
    ("drive_1", Unit::Rate),
    ("drive_2", Unit::Rate),
    ("power_1", Unit::Watt),
    ("power_2", Unit::Watt),
    ("laser_1", Unit::Rate),
    ("laser_2", Unit::Rate),
    ("format", Unit::Text),
    ("out", Unit::Text),
    ("model", Unit::Text),
    ("omega_min_over_gamma", Unit::None),
    ("omega_max_over_gamma", Unit::None),
    ("omega_points", Unit::None),
];

const DEVICE_KEYS: [&str; 9] = [
    "omega_p",
    "omega_m",
    "gamma",
    "q_factor",
    "nu",
    "eta",
    "temperature",
    "radius",
    "n0",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    JsonLines,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::JsonLines => "jsonlines",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonlines" | "jsonl" => Ok(Format::JsonLines),
            _ => Err(format!("unknown format '{s}' (expected csv or jsonlines)")),
        }
    }
}

/// Device constants. Rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceConfig {
    pub omega_p: f64,
    pub omega_m: f64,
    pub gamma: f64,
    pub q_factor: f64,
    pub nu: f64,
    pub eta: f64,
    pub temperature: f64,
    pub radius: f64,
    pub n0: f64,
}

/// How the drive is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveConfig {
    /// Lasers and drive strengths are solved for to reach this operating
    /// point (`d` in units of gamma).
    Target { alpha: f64, delta: f64, d_over_gamma: f64 },
    Amplitudes {
        drive_1: f64,
        drive_2: f64,
        laser_1: f64,
        laser_2: f64,
    },
    Powers {
        power_1: f64,
        power_2: f64,
        laser_1: f64,
        laser_2: f64,
    },
}

impl DriveConfig {
    fn mode(&self) -> &'static str {
        match self {
            DriveConfig::Target { .. } => "target",
            DriveConfig::Amplitudes { .. } => "amplitudes",
            DriveConfig::Powers { .. } => "powers",
        }
    }

    fn keys(mode: &str) -> Option<&'static [&'static str]> {
        match mode {
            "target" => Some(&["alpha", "delta", "d_over_gamma"]),
            "amplitudes" => Some(&["drive_1", "drive_2", "laser_1", "laser_2"]),
            "powers" => Some(&["power_1", "power_2", "laser_1", "laser_2"]),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: DeviceConfig,
    pub drive: DriveConfig,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub model: Model,
    pub omega_min_over_gamma: f64,
    pub omega_max_over_gamma: f64,
    pub omega_points: usize,
}

impl RunConfig {
    /// Laboratory parameters, solving for the drive when a target operating
    /// point was given.
    pub fn params(&self) -> PhysicsResult<PhysicalParams> {
        let dev = &self.device;
        let base = PhysicalParams {
            omega_p: dev.omega_p,
            omega_m: dev.omega_m,
            gamma: dev.gamma,
            gamma_m: dev.omega_m / dev.q_factor,
            nu: dev.nu,
            eta: dev.eta,
            temperature: dev.temperature,
            radius: dev.radius,
            n0: dev.n0,
            drive: DriveSpec {
                strength: DriveStrength::Amplitudes {
                    omega_1: 0.0,
                    omega_2: 0.0,
                },
                omega_l: dev.omega_p + dev.nu,
                omega_lp: dev.omega_p - dev.nu,
            },
        };
        let params = match self.drive {
            DriveConfig::Target {
                alpha,
                delta,
                d_over_gamma,
            } => drive_for_operating_point(
                &base,
                &OperatingPoint {
                    alpha,
                    delta,
                    d: d_over_gamma * dev.gamma,
                },
            )?,
            DriveConfig::Amplitudes {
                drive_1,
                drive_2,
                laser_1,
                laser_2,
            } => PhysicalParams {
                drive: DriveSpec {
                    strength: DriveStrength::Amplitudes {
                        omega_1: drive_1,
                        omega_2: drive_2,
                    },
                    omega_l: laser_1,
                    omega_lp: laser_2,
                },
                ..base
            },
            DriveConfig::Powers {
                power_1,
                power_2,
                laser_1,
                laser_2,
            } => PhysicalParams {
                drive: DriveSpec {
                    strength: DriveStrength::Powers {
                        p_1: power_1,
                        p_2: power_2,
                    },
                    omega_l: laser_1,
                    omega_lp: laser_2,
                },
                ..base
            },
        };
        params.validate()?;
        Ok(params)
    }

    /// Sideband grid in rad/s.
    pub fn omega_grid(&self) -> Vec<f64> {
        let g = self.device.gamma;
        linear_grid(
            self.omega_min_over_gamma * g,
            self.omega_max_over_gamma * g,
            self.omega_points,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Text(String),
}

/// Resolved entries keyed by base name, with the line that set them.
type Entries = BTreeMap<&'static str, (Value, usize)>;

fn lookup(key: &str, line: usize) -> Result<(&'static str, Unit, f64)> {
    let mut unit_mismatch = None;
    for &(base, unit) in KEYS {
        let Some(rest) = key.strip_prefix(base) else { continue };
        if let Some(&suffix) = unit.suffixes().iter().find(|&&s| s == rest) {
            let factor = if suffix == "_hz" { hz_to_rads(1.0) } else { 1.0 };
            return Ok((base, unit, factor));
        }
        if rest.is_empty() || ["_hz", "_rads", "_k", "_w", "_m"].contains(&rest) {
            unit_mismatch = Some(unit);
        }
    }
    let Some(unit) = unit_mismatch else {
        return Err(ConfigError::UnknownKey {
            line,
            key: key.to_string(),
        });
    };
    let msg = if unit.suffixes() == [""] {
        "takes no unit suffix".to_string()
    } else {
        format!("needs a unit suffix ({})", unit.suffixes().join(" or "))
    };
    Err(ConfigError::Unit {
        line,
        key: key.to_string(),
        msg,
    })
}

fn parse_pair(key: &str, raw: &str, line: usize) -> Result<(&'static str, Value)> {
    let (base, unit, factor) = lookup(key, line)?;
    let value = if unit == Unit::Text {
        Value::Text(raw.to_string())
    } else {
        let x: f64 = raw.parse().map_err(|_| ConfigError::Parse {
            line,
            msg: format!("'{key}': '{raw}' is not a number"),
        })?;
        Value::Num(x * factor)
    };
    Ok((base, value))
}

fn baseline_entries() -> Entries {
    let dev = baseline_device();
    let op = baseline_operating_point();
    let num = |x: f64| (Value::Num(x), 0);
    BTreeMap::from([
        ("omega_p", num(dev.omega_p)),
        ("omega_m", num(dev.omega_m)),
        ("gamma", num(dev.gamma)),
        ("q_factor", num(dev.q_factor())),
        ("nu", num(dev.nu)),
        ("eta", num(dev.eta)),
        ("temperature", num(dev.temperature)),
        ("radius", num(dev.radius)),
        ("n0", num(dev.n0)),
        ("drive_mode", (Value::Text("target".into()), 0)),
        ("alpha", num(op.alpha)),
        ("delta", num(op.delta)),
        ("d_over_gamma", num(op.d / dev.gamma)),
    ])
}

/// Parses a configuration document and applies `--set key=value` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut defaults = Entries::new();
    let mut explicit = Entries::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some((key, value)) = content.split_once('=') {
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("expected 'key = value', got '{content}'"),
                });
            }
            let (base, v) = parse_pair(key, value, line)?;
            if explicit.insert(base, (v, line)).is_some() {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
        } else if let Some((directive, value)) = content.split_once(':') {
            match (directive.trim(), value.trim()) {
                ("defaults", "baseline") => defaults = baseline_entries(),
                (d, v) => {
                    return Err(ConfigError::Parse {
                        line,
                        msg: format!("unknown directive '{d}: {v}'"),
                    })
                }
            }
        } else {
            return Err(ConfigError::Parse {
                line,
                msg: format!("expected 'key = value', got '{content}'"),
            });
        }
    }
    for o in overrides {
        let (key, value) = o.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: OVERRIDE_LINE,
            msg: format!("override '{o}' is not key=value"),
        })?;
        let (base, v) = parse_pair(key.trim(), value.trim(), OVERRIDE_LINE)?;
        explicit.insert(base, (v, OVERRIDE_LINE));
    }
    resolve(&defaults, &explicit)
}

fn resolve(defaults: &Entries, explicit: &Entries) -> Result<RunConfig> {
    let get = |key: &'static str| explicit.get(key).or_else(|| defaults.get(key)).map(|(v, _)| v);
    let num = |key: &'static str| -> Result<f64> {
        match get(key) {
            Some(Value::Num(x)) if x.is_finite() => Ok(*x),
            Some(Value::Num(x)) => Err(ConfigError::InvalidValue {
                key: key.into(),
                msg: format!("{x} is not finite"),
            }),
            Some(Value::Text(_)) => unreachable!("numeric key stored as text"),
            None => Err(ConfigError::MissingKey(key.into())),
        }
    };
    let text = |key: &'static str| -> Option<&str> {
        match get(key) {
            Some(Value::Text(s)) => Some(s.as_str()),
            _ => None,
        }
    };

    let d = DEVICE_KEYS.map(num);
    let [omega_p, omega_m, gamma, q_factor, nu, eta, temperature, radius, n0] = match d {
        [Ok(a), Ok(b), Ok(c), Ok(e), Ok(f), Ok(g), Ok(h), Ok(i), Ok(j)] => [a, b, c, e, f, g, h, i, j],
        other => return Err(other.into_iter().find_map(|r| r.err()).expect("one key failed")),
    };
    let device = DeviceConfig {
        omega_p,
        omega_m,
        gamma,
        q_factor,
        nu,
        eta,
        temperature,
        radius,
        n0,
    };

    let mode = text("drive_mode").ok_or_else(|| ConfigError::MissingKey("drive_mode".into()))?;
    let used = DriveConfig::keys(mode).ok_or_else(|| ConfigError::InvalidValue {
        key: "drive_mode".into(),
        msg: format!("'{mode}' (expected target, amplitudes or powers)"),
    })?;
    let all_drive_keys = [
        "alpha",
        "delta",
        "d_over_gamma",
        "drive_1",
        "drive_2",
        "power_1",
        "power_2",
        "laser_1",
        "laser_2",
    ];
    if let Some(stray) = all_drive_keys
        .iter()
        .find(|k| !used.contains(k) && explicit.contains_key(*k))
    {
        return Err(ConfigError::UnusedKey {
            key: stray.to_string(),
            mode: mode.to_string(),
        });
    }
    let drive = match mode {
        "target" => DriveConfig::Target {
            alpha: num("alpha")?,
            delta: num("delta")?,
            d_over_gamma: num("d_over_gamma")?,
        },
        "amplitudes" => DriveConfig::Amplitudes {
            drive_1: num("drive_1")?,
            drive_2: num("drive_2")?,
            laser_1: num("laser_1")?,
            laser_2: num("laser_2")?,
        },
        _ => DriveConfig::Powers {
            power_1: num("power_1")?,
            power_2: num("power_2")?,
            laser_1: num("laser_1")?,
            laser_2: num("laser_2")?,
        },
    };

    let invalid = |key: &str, msg: String| ConfigError::InvalidValue { key: key.into(), msg };
    let format = match text("format") {
        Some(s) => s.parse().map_err(|m| invalid("format", m))?,
        None => Format::Csv,
    };
    let model = match text("model") {
        Some(s) => s.parse().map_err(|m| invalid("model", m))?,
        None => Model::Adiabatic,
    };
    let optional = |key: &'static str, fallback: f64| match get(key) {
        Some(_) => num(key),
        None => Ok(fallback),
    };
    let points = optional("omega_points", DEFAULT_GRID_POINTS as f64)?;
    if !(points >= 1.0 && points.fract() == 0.0 && points <= 1e8) {
        return Err(invalid("omega_points", format!("{points} is not a positive integer")));
    }
    Ok(RunConfig {
        device,
        drive,
        format,
        out: text("out").map(PathBuf::from),
        model,
        omega_min_over_gamma: optional("omega_min_over_gamma", -DEFAULT_GRID_SPAN)?,
        omega_max_over_gamma: optional("omega_max_over_gamma", DEFAULT_GRID_SPAN)?,
        omega_points: points as usize,
    })
}

fn unit_of(key: &str) -> Unit {
    KEYS.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, u)| *u)
        .unwrap_or(Unit::None)
}

/// Writes `cfg` as a self-contained document (no defaults directive) that
/// parses back to an identical configuration.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut num = |key: &str, x: f64| {
        let _ = writeln!(out, "{key}{} = {x:?}", unit_of(key).canonical());
    };
    let d = &cfg.device;
    for (k, v) in DEVICE_KEYS.iter().zip([
        d.omega_p,
        d.omega_m,
        d.gamma,
        d.q_factor,
        d.nu,
        d.eta,
        d.temperature,
        d.radius,
        d.n0,
    ]) {
        num(k, v);
    }
    let drive_values: Vec<(&str, f64)> = match cfg.drive {
        DriveConfig::Target {
            alpha,
            delta,
            d_over_gamma,
        } => vec![("alpha", alpha), ("delta", delta), ("d_over_gamma", d_over_gamma)],
        DriveConfig::Amplitudes {
            drive_1,
            drive_2,
            laser_1,
            laser_2,
        } => vec![
            ("drive_1", drive_1),
            ("drive_2", drive_2),
            ("laser_1", laser_1),
            ("laser_2", laser_2),
        ],
        DriveConfig::Powers {
            power_1,
            power_2,
            laser_1,
            laser_2,
        } => vec![
            ("power_1", power_1),
            ("power_2", power_2),
            ("laser_1", laser_1),
            ("laser_2", laser_2),
        ],
    };
    for (k, v) in drive_values {
        num(k, v);
    }
    num("omega_min_over_gamma", cfg.omega_min_over_gamma);
    num("omega_max_over_gamma", cfg.omega_max_over_gamma);
    num("omega_points", cfg.omega_points as f64);
    let mut s = out;
    let _ = writeln!(s, "drive_mode = {}", cfg.drive.mode());
    let _ = writeln!(s, "format = {}", cfg.format.name());
    let _ = writeln!(s, "model = {}", cfg.model);
    if let Some(p) = &cfg.out {
        let _ = writeln!(s, "out = {}", p.display());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> RunConfig {
        parse_config("defaults: baseline\n", &[]).unwrap()
    }

    #[test]
    fn baseline_directive_loads_everything() {
        let cfg = baseline();
        assert_eq!(cfg.device.eta, 1e-4);
        assert_eq!(cfg.device.q_factor, 30_000.0);
        assert_eq!(cfg.device.temperature, 300.0);
        assert!(matches!(cfg.drive, DriveConfig::Target { alpha, .. } if alpha == 1000.0));
        assert_eq!(cfg.omega_points, 2001);
    }

    #[test]
    fn hz_keys_are_converted() {
        let cfg = parse_config("defaults: baseline\ngamma_hz = 3.2e6\n", &[]).unwrap();
        assert!((cfg.device.gamma - 2.0106e7).abs() < 1e3);
        let cfg = parse_config("defaults: baseline\ngamma_rads = 5.0\n", &[]).unwrap();
        assert_eq!(cfg.device.gamma, 5.0);
    }

    #[test]
    fn duplicate_names_the_key() {
        let err = parse_config("defaults: baseline\neta = 1e-4\neta = 2e-4\n", &[]).unwrap_err();
        assert_eq!(
            err,
            ConfigError::DuplicateKey {
                line: 3,
                key: "eta".into()
            }
        );
        assert!(err.to_string().contains("eta"));
        // the same quantity in two units is still a duplicate
        let err = parse_config("gamma_hz = 1\ngamma_rads = 1\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::DuplicateKey { line: 2, .. }));
    }

    #[test]
    fn unit_suffixes_enforced() {
        for (text, line) in [
            ("gamma = 3\n", 1),
            ("# c\ntemperature_hz = 3\n", 2),
            ("eta_hz = 1\n", 1),
        ] {
            let err = parse_config(text, &[]).unwrap_err();
            assert!(
                matches!(err, ConfigError::Unit { line: l, .. } if l == line),
                "{text}: {err:?}"
            );
        }
    }

    #[test]
    fn unknown_and_malformed() {
        assert!(matches!(
            parse_config("colour = red\n", &[]),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("\n\njust words\n", &[]),
            Err(ConfigError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_config("defaults: nature\n", &[]),
            Err(ConfigError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("eta = lots\n", &[]),
            Err(ConfigError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn missing_without_defaults() {
        assert!(matches!(parse_config("", &[]), Err(ConfigError::MissingKey(_))));
    }

    #[test]
    fn overrides_win() {
        let cfg = parse_config("defaults: baseline\ntemperature_k = 4\n", &["temperature_k=77".into()]).unwrap();
        assert_eq!(cfg.device.temperature, 77.0);
        assert!(matches!(
            parse_config("defaults: baseline\n", &["bogus".into()]),
            Err(ConfigError::Parse {
                line: OVERRIDE_LINE,
                ..
            })
        ));
    }

    #[test]
    fn stray_drive_keys_rejected() {
        let err = parse_config("defaults: baseline\ndrive_1_hz = 5\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::UnusedKey { .. }));
    }

    #[test]
    fn serialization_round_trips() {
        let mut cfg = baseline();
        cfg.out = Some("runs/a.csv".into());
        cfg.format = Format::JsonLines;
        cfg.model = Model::Full6;
        let text = serialize_config(&cfg);
        assert_eq!(parse_config(&text, &[]).unwrap(), cfg);

        let powers = parse_config(
            "defaults: baseline\ndrive_mode = powers\npower_1_w = 0.01\npower_2_w = 0.01\nlaser_1_hz = 3e14\nlaser_2_hz = 3e14\n",
            &[],
        )
        .unwrap();
        assert_eq!(parse_config(&serialize_config(&powers), &[]).unwrap(), powers);
    }

    #[test]
    fn baseline_params_resolve() {
        let params = baseline().params().unwrap();
        let reference = crate::steady::baseline_defaults();
        assert_eq!(params, reference);
    }
}
