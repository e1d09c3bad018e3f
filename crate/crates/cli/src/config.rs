//! Run configuration: a flat `key = value` file overridden by flags.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may be written
//! with `-` or `_`. Unknown keys, duplicate keys and non-positive numeric
//! values are rejected with the offending line number.

use std::fmt;
use std::path::PathBuf;

use biharm_core::pipeline::NumericConfig;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{origin}:{line}: {key}: {message}")]
pub struct ConfigError {
    pub origin: String,
    pub line: usize,
    pub key: String,
    pub message: String,
}

/// Which pipelines to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CaseSel {
    Case1,
    Case2,
    Both,
}

impl CaseSel {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "case1" => Some(CaseSel::Case1),
            "case2" => Some(CaseSel::Case2),
            "both" => Some(CaseSel::Both),
            _ => None,
        }
    }
}

/// Report format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Text => "text",
        })
    }
}

/// Settings read from a config file; every field is optional so that flags
/// can override them one by one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileConfig {
    pub case: Option<CaseSel>,
    pub emit_trace: Option<PathBuf>,
    pub format: Option<Format>,
    pub out_dir: Option<PathBuf>,
    pub numeric: Option<bool>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub step: Option<f64>,
    pub t_max: Option<f64>,
    pub tolerance: Option<f64>,
    pub box_half_width: Option<f64>,
    pub fd_points: Option<usize>,
    pub fd_h: Option<f64>,
}

/// Keys accepted in a config file (canonical spelling).
pub const KEYS: [&str; 13] = [
    "case",
    "emit_trace",
    "format",
    "out_dir",
    "numeric",
    "samples",
    "seed",
    "step",
    "t_max",
    "tolerance",
    "box",
    "fd_points",
    "fd_h",
];

impl FileConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut cfg = FileConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let err = |key: &str, message: String| ConfigError {
                origin: origin.to_string(),
                line,
                key: key.to_string(),
                message,
            };
            let (k, v) = content.split_once('=').ok_or_else(|| err(content, "expected `key = value`".into()))?;
            let key = k.trim().replace('-', "_");
            let value = v.trim();
            if !KEYS.contains(&key.as_str()) {
                return Err(err(&key, format!("unknown key (accepted: {})", KEYS.join(", "))));
            }
            if seen.contains(&key) {
                return Err(err(&key, "duplicate key".into()));
            }
            seen.push(key.clone());
            let positive_f = |v: &str| -> Result<f64, ConfigError> {
                match v.parse::<f64>() {
                    Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
                    _ => Err(err(&key, format!("expected a positive number, got {v:?}"))),
                }
            };
            let positive_u = |v: &str| -> Result<usize, ConfigError> {
                match v.parse::<usize>() {
                    Ok(x) if x > 0 => Ok(x),
                    _ => Err(err(&key, format!("expected a positive integer, got {v:?}"))),
                }
            };
            match key.as_str() {
                "case" => {
                    cfg.case = Some(CaseSel::parse(value).ok_or_else(|| err(&key, format!("expected case1, case2 or both, got {value:?}")))?)
                }
                "emit_trace" => cfg.emit_trace = Some(PathBuf::from(value)),
                "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
                "format" => {
                    cfg.format = Some(match value {
                        "json" => Format::Json,
                        "text" => Format::Text,
                        _ => return Err(err(&key, format!("expected json or text, got {value:?}"))),
                    })
                }
                "numeric" => {
                    cfg.numeric = Some(value.parse::<bool>().map_err(|_| err(&key, format!("expected true or false, got {value:?}")))?)
                }
                "samples" => cfg.samples = Some(positive_u(value)?),
                "fd_points" => cfg.fd_points = Some(positive_u(value)?),
                "seed" => {
                    cfg.seed = Some(value.parse::<u64>().map_err(|_| err(&key, format!("expected an unsigned integer, got {value:?}")))?)
                }
                "step" => cfg.step = Some(positive_f(value)?),
                "t_max" => cfg.t_max = Some(positive_f(value)?),
                "tolerance" => cfg.tolerance = Some(positive_f(value)?),
                "box" => cfg.box_half_width = Some(positive_f(value)?),
                "fd_h" => cfg.fd_h = Some(positive_f(value)?),
                _ => unreachable!("key list checked above"),
            }
        }
        Ok(cfg)
    }

    /// Numeric settings: defaults, then this file.
    pub fn numeric_config(&self) -> NumericConfig {
        let d = NumericConfig::default();
        NumericConfig {
            samples: self.samples.unwrap_or(d.samples),
            seed: self.seed.unwrap_or(d.seed),
            step: self.step.unwrap_or(d.step),
            t_max: self.t_max.unwrap_or(d.t_max),
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            box_half_width: self.box_half_width.unwrap_or(d.box_half_width),
            fd_points: self.fd_points.unwrap_or(d.fd_points),
            fd_h: self.fd_h.unwrap_or(d.fd_h),
        }
    }
}

/// Flag-level validation of a numeric value (the same rule as the file).
pub fn positive_flag(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError { origin: "flags".into(), line: 0, key: name.into(), message: format!("must be positive, got {v}") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys() {
        let c = FileConfig::parse("# comment\ncase = case2\nsamples=5\nt-max = 0.5\nformat = json\nbox = 2\n", "cfg").unwrap();
        assert_eq!(c.case, Some(CaseSel::Case2));
        assert_eq!(c.samples, Some(5));
        assert_eq!(c.t_max, Some(0.5));
        assert_eq!(c.format, Some(Format::Json));
        let n = c.numeric_config();
        assert_eq!(n.box_half_width, 2.0);
        assert_eq!(n.step, NumericConfig::default().step);
    }

    #[test]
    fn rejects_unknown_key_with_line() {
        let e = FileConfig::parse("case = case1\n\ncolour = red\n", "run.cfg").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (3, "colour"));
        assert!(e.to_string().starts_with("run.cfg:3: colour"));
    }

    #[test]
    fn rejects_non_positive_and_malformed() {
        assert_eq!(FileConfig::parse("step = 0", "c").unwrap_err().key, "step");
        assert_eq!(FileConfig::parse("samples = -3", "c").unwrap_err().key, "samples");
        assert_eq!(FileConfig::parse("seed", "c").unwrap_err().line, 1);
        assert_eq!(FileConfig::parse("seed = 1\nseed = 2", "c").unwrap_err().message, "duplicate key");
        assert!(FileConfig::parse("case = case3", "c").is_err());
        assert!(positive_flag("step", -1.0).is_err());
    }
}
