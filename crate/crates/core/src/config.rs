//! Run configuration: a TOML file of `key = value` pairs with one section per
//! experiment, overridden by command-line flags.
//!
//! Numbers may be written as expressions in `pi`, e.g. `"10pi"`, `"1/pi"`,
//! `"0.3/pi"` or `"-pi/2"`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::scatterer::SeriesConfig;
use crate::transverse::BoundaryCondition;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Evaluates a product/quotient of numbers and `pi`.
pub fn parse_number(text: &str) -> Result<f64, ConfigError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad("empty number"));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
    };
    let mut value = sign;
    let mut op = '*';
    let mut start = 0;
    let bytes: Vec<char> = body.chars().collect();
    for i in 0..=bytes.len() {
        let at_op = i < bytes.len()
            && (bytes[i] == '*' || bytes[i] == '/')
            && !(i > 0 && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E'));
        if i == bytes.len() || at_op {
            let token: String = bytes[start..i].iter().collect();
            let factor =
                parse_factor(&token).ok_or_else(|| bad(format!("cannot parse number `{text}`")))?;
            value = if op == '*' {
                value * factor
            } else {
                value / factor
            };
            if i < bytes.len() {
                op = bytes[i];
            }
            start = i + 1;
        }
    }
    if !value.is_finite() {
        return Err(bad(format!("`{text}` is not a finite number")));
    }
    Ok(value)
}

fn parse_factor(token: &str) -> Option<f64> {
    let lower = token.to_ascii_lowercase();
    if let Some(coef) = lower.strip_suffix("pi").or_else(|| lower.strip_suffix('π')) {
        let c = if coef.is_empty() {
            1.0
        } else {
            coef.parse::<f64>().ok()?
        };
        return Some(c * PI);
    }
    lower.parse::<f64>().ok()
}

/// A number in a config file: a TOML float or integer, or an expression string.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Num {
    pub fn value(&self) -> Result<f64, ConfigError> {
        match self {
            Num::Float(v) => Ok(*v),
            Num::Int(v) => Ok(*v as f64),
            Num::Text(s) => parse_number(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Num),
    Many(Vec<Num>),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub alpha: Option<Num>,
    pub alpha_n: Option<usize>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaForZSection {
    pub z: Option<Num>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenfunctionSection {
    pub z: Option<Num>,
    pub alpha_n: Option<usize>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsSection {
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceSection {
    /// Curve samples for `fig4`.
    pub samples: Option<usize>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    bc: Option<String>,
    theta: Option<Num>,
    #[serde(rename = "E", alias = "e")]
    e: Option<OneOrMany>,
    x0_frac: Option<Num>,
    y0_frac: Option<Num>,
    tail_tol: Option<Num>,
    max_terms: Option<usize>,
    out: Option<PathBuf>,
    #[serde(default)]
    spectrum: SpectrumSection,
    #[serde(default, rename = "alpha-for-z")]
    alpha_for_z: AlphaForZSection,
    #[serde(default)]
    eigenfunction: EigenfunctionSection,
    #[serde(default, rename = "localization-sweep")]
    localization_sweep: LevelsSection,
    #[serde(default, rename = "rate-fit")]
    rate_fit: LevelsSection,
    #[serde(default)]
    reproduce: ReproduceSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub bc: Option<String>,
    pub theta: Option<String>,
    pub e: Vec<String>,
    pub x0_frac: Option<String>,
    pub y0_frac: Option<String>,
    pub tail_tol: Option<String>,
    pub max_terms: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Fully resolved settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bc: BoundaryCondition,
    /// Eccentricities; never empty.
    pub e: Vec<f64>,
    /// Whether `e` was set explicitly rather than defaulted.
    pub e_given: bool,
    pub x0_frac: f64,
    pub y0_frac: f64,
    pub series: SeriesConfig,
    pub out: Option<PathBuf>,
    pub spectrum: SpectrumSection,
    pub alpha_for_z: AlphaForZSection,
    pub eigenfunction: EigenfunctionSection,
    pub localization_sweep: LevelsSection,
    pub rate_fit: LevelsSection,
    pub reproduce: ReproduceSection,
}

impl RunConfig {
    /// Reads `file` (if any) and applies `overrides`.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let raw = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<RawFile>(&text)
                    .map_err(|e| bad(format!("{}: {e}", path.display())))?
            }
            None => RawFile::default(),
        };
        Self::from_raw(raw, overrides)
    }

    /// Parses config text directly.
    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let raw = toml::from_str::<RawFile>(text).map_err(|e| bad(e.to_string()))?;
        Self::from_raw(raw, overrides)
    }

    fn from_raw(raw: RawFile, ov: &Overrides) -> Result<Self, ConfigError> {
        let pick =
            |flag: &Option<String>, file: &Option<Num>| -> Result<Option<f64>, ConfigError> {
                match (flag, file) {
                    (Some(s), _) => parse_number(s).map(Some),
                    (None, Some(n)) => n.value().map(Some),
                    (None, None) => Ok(None),
                }
            };
        let kind = ov
            .bc
            .clone()
            .or(raw.bc)
            .unwrap_or_else(|| "dirichlet".into());
        // A kind given on the command line drops the file's angle.
        let theta = if ov.bc.is_some() {
            pick(&ov.theta, &None)?
        } else {
            pick(&ov.theta, &raw.theta)?
        };
        let bc = BoundaryCondition::parse(&kind, theta).map_err(|e| bad(e.to_string()))?;

        let (e, e_given) = if !ov.e.is_empty() {
            (
                ov.e.iter()
                    .map(|s| parse_number(s))
                    .collect::<Result<Vec<_>, _>>()?,
                true,
            )
        } else {
            match raw.e {
                Some(OneOrMany::One(n)) => (vec![n.value()?], true),
                Some(OneOrMany::Many(v)) => (
                    v.iter().map(Num::value).collect::<Result<Vec<_>, _>>()?,
                    true,
                ),
                None => (vec![10.0 * PI], false),
            }
        };
        if e.is_empty() {
            return Err(bad("E list is empty"));
        }
        if let Some(v) = e.iter().find(|v| v.is_nan() || **v <= 0.0) {
            return Err(bad(format!("E must be positive, got {v}")));
        }

        let x0_frac = pick(&ov.x0_frac, &raw.x0_frac)?.unwrap_or(1.0 / PI);
        let y0_frac = pick(&ov.y0_frac, &raw.y0_frac)?.unwrap_or(0.5);
        for (name, v) in [("x0_frac", x0_frac), ("y0_frac", y0_frac)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(bad(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        let defaults = SeriesConfig::default();
        let series = SeriesConfig {
            tail_tol: pick(&ov.tail_tol, &raw.tail_tol)?.unwrap_or(defaults.tail_tol),
            max_terms: ov.max_terms.or(raw.max_terms).unwrap_or(defaults.max_terms),
            ..defaults
        };
        series.validate().map_err(|e| bad(e.to_string()))?;

        Ok(Self {
            bc,
            e,
            e_given,
            x0_frac,
            y0_frac,
            series,
            out: ov.out.clone().or(raw.out),
            spectrum: raw.spectrum,
            alpha_for_z: raw.alpha_for_z,
            eigenfunction: raw.eigenfunction,
            localization_sweep: raw.localization_sweep,
            rate_fit: raw.rate_fit,
            reproduce: raw.reproduce,
        })
    }
}
