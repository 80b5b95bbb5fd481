//! Domain configuration files.
//!
//! A config is a plain key-value text file, one `key = value` pair per line,
//! with `#` comments. Parsing errors carry the offending line and key.
//!
//! ```text
//! # 2:1 ellipse, 256 nodes
//! kind = ellipse
//! a = 2.0
//! b = 1.0
//! phi = 0.0
//! center = 0.0 0.0
//! n = 256
//! ```
//!
//! Recognized kinds and their keys:
//! - `circle`: `radius`
//! - `ellipse`: `a`, `b`
//! - `kite`: no shape keys
//! - `star`: `c0`, `amplitude`, `folds`
//! - `fourier`: `x_cos`, `x_sin`, `y_cos`, `y_sin` (space-separated lists)
//!
//! Every kind also accepts the optional transform keys `phi`, `scale`,
//! `center` and the node count `n` (default 256).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{BoundaryCurve, CurveShape, Point};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: malformed entry (expected `key = value`): {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: key `{key}`: {message}")]
    BadValue { line: usize, key: String, message: String },
    #[error("missing required key `{key}` for kind `{kind}`")]
    MissingKey { key: String, kind: String },
    #[error("line {line}: key `{key}` is not recognized for kind `{kind}`")]
    UnknownKey { line: usize, key: String, kind: String },
    #[error("missing required key `kind`")]
    MissingKind,
}

/// A parsed domain configuration: the curve plus the node count.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub curve: BoundaryCurve,
    pub n: usize,
}

pub const DEFAULT_NODE_COUNT: usize = 256;

struct Entry {
    line: usize,
    value: String,
    used: std::cell::Cell<bool>,
}

struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            if content.trim().is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Malformed { line, text: raw_line.trim().to_string() });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Malformed { line, text: raw_line.trim().to_string() });
            }
            if entries.contains_key(&key) {
                return Err(ConfigError::DuplicateKey { line, key });
            }
            entries.insert(key, Entry { line, value, used: std::cell::Cell::new(false) });
        }
        Ok(RawConfig { entries })
    }

    fn take(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.get(key).map(|e| {
            e.used.set(true);
            (e.line, e.value.as_str())
        })
    }

    fn require(&self, key: &str, kind: &str) -> Result<(usize, &str), ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::MissingKey {
            key: key.to_string(),
            kind: kind.to_string(),
        })
    }

    fn unused_key(&self, kind: &str) -> Option<ConfigError> {
        self.entries
            .iter()
            .find(|(_, e)| !e.used.get())
            .map(|(k, e)| ConfigError::UnknownKey { line: e.line, key: k.clone(), kind: kind.to_string() })
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        line,
        key: key.to_string(),
        message: format!("expected a number, got {value:?}"),
    })
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        line,
        key: key.to_string(),
        message: format!("expected a positive integer, got {value:?}"),
    })
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split_whitespace()
        .map(|tok| {
            tok.parse().map_err(|_| ConfigError::BadValue {
                line,
                key: key.to_string(),
                message: format!("expected numbers, got {tok:?}"),
            })
        })
        .collect()
}

/// Parse a domain config from text.
pub fn parse_domain_config(text: &str) -> Result<DomainConfig, ConfigError> {
    let raw = RawConfig::parse(text)?;
    let (kind_line, kind) = raw.take("kind").ok_or(ConfigError::MissingKind)?;
    let kind = kind.to_string();

    let positive = |line: usize, key: &str, v: f64| -> Result<f64, ConfigError> {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(ConfigError::BadValue {
                line,
                key: key.to_string(),
                message: format!("must be positive, got {v}"),
            })
        }
    };

    let shape = match kind.as_str() {
        "circle" => {
            let (l, v) = raw.require("radius", &kind)?;
            let r = positive(l, "radius", parse_f64(l, "radius", v)?)?;
            CurveShape::Ellipse { a: r, b: r }
        }
        "ellipse" => {
            let (la, va) = raw.require("a", &kind)?;
            let (lb, vb) = raw.require("b", &kind)?;
            CurveShape::Ellipse {
                a: positive(la, "a", parse_f64(la, "a", va)?)?,
                b: positive(lb, "b", parse_f64(lb, "b", vb)?)?,
            }
        }
        "kite" => CurveShape::Kite,
        "star" => {
            let (lc, vc) = raw.require("c0", &kind)?;
            let (la, va) = raw.require("amplitude", &kind)?;
            let (lf, vf) = raw.require("folds", &kind)?;
            CurveShape::Star {
                base_radius: positive(lc, "c0", parse_f64(lc, "c0", vc)?)?,
                amplitude: parse_f64(la, "amplitude", va)?,
                folds: parse_usize(lf, "folds", vf)? as u32,
            }
        }
        "fourier" => {
            let list = |key: &str| -> Result<Vec<f64>, ConfigError> {
                match raw.take(key) {
                    Some((l, v)) => parse_list(l, key, v),
                    None => Ok(Vec::new()),
                }
            };
            CurveShape::Fourier {
                x_cos: list("x_cos")?,
                x_sin: list("x_sin")?,
                y_cos: list("y_cos")?,
                y_sin: list("y_sin")?,
            }
        }
        other => {
            return Err(ConfigError::BadValue {
                line: kind_line,
                key: "kind".to_string(),
                message: format!(
                    "unknown kind {other:?} (expected circle, ellipse, kite, star, or fourier)"
                ),
            })
        }
    };

    let mut curve = BoundaryCurve::new(shape);
    if let Some((l, v)) = raw.take("phi") {
        curve.rotation = parse_f64(l, "phi", v)?;
    }
    if let Some((l, v)) = raw.take("scale") {
        curve.scale = positive(l, "scale", parse_f64(l, "scale", v)?)?;
    }
    if let Some((l, v)) = raw.take("center") {
        let coords = parse_list(l, "center", v)?;
        if coords.len() != 2 {
            return Err(ConfigError::BadValue {
                line: l,
                key: "center".to_string(),
                message: format!("expected two coordinates, got {}", coords.len()),
            });
        }
        curve.center = Point::new(coords[0], coords[1]);
    }

    let n = match raw.take("n") {
        Some((l, v)) => {
            let n = parse_usize(l, "n", v)?;
            if n < 16 || !n.is_multiple_of(2) {
                return Err(ConfigError::BadValue {
                    line: l,
                    key: "n".to_string(),
                    message: format!("node count must be even and >= 16, got {n}"),
                });
            }
            n
        }
        None => DEFAULT_NODE_COUNT,
    };

    if let Some(err) = raw.unused_key(&kind) {
        return Err(err);
    }

    Ok(DomainConfig { curve, n })
}

fn write_list(out: &mut String, key: &str, values: &[f64]) {
    if values.is_empty() {
        return;
    }
    let rendered: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    let _ = writeln!(out, "{key} = {}", rendered.join(" "));
}

/// Serialize a config so that `parse_domain_config` reproduces it exactly.
pub fn serialize_domain_config(cfg: &DomainConfig) -> String {
    let mut out = String::new();
    match &cfg.curve.shape {
        CurveShape::Ellipse { a, b } => {
            let _ = writeln!(out, "kind = ellipse");
            let _ = writeln!(out, "a = {a}");
            let _ = writeln!(out, "b = {b}");
        }
        CurveShape::Kite => {
            let _ = writeln!(out, "kind = kite");
        }
        CurveShape::Star { base_radius, amplitude, folds } => {
            let _ = writeln!(out, "kind = star");
            let _ = writeln!(out, "c0 = {base_radius}");
            let _ = writeln!(out, "amplitude = {amplitude}");
            let _ = writeln!(out, "folds = {folds}");
        }
        CurveShape::Fourier { x_cos, x_sin, y_cos, y_sin } => {
            let _ = writeln!(out, "kind = fourier");
            write_list(&mut out, "x_cos", x_cos);
            write_list(&mut out, "x_sin", x_sin);
            write_list(&mut out, "y_cos", y_cos);
            write_list(&mut out, "y_sin", y_sin);
        }
    }
    let _ = writeln!(out, "phi = {}", cfg.curve.rotation);
    let _ = writeln!(out, "scale = {}", cfg.curve.scale);
    let _ = writeln!(out, "center = {} {}", cfg.curve.center.x, cfg.curve.center.y);
    let _ = writeln!(out, "n = {}", cfg.n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ellipse_config() {
        let text = "# test\nkind = ellipse\na = 2.0\nb = 1.0\nphi = 0.5\ncenter = 1.0 -2.0\nn = 128\n";
        let cfg = parse_domain_config(text).unwrap();
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.curve.rotation, 0.5);
        assert_eq!(cfg.curve.center, Point::new(1.0, -2.0));
        assert!(matches!(cfg.curve.shape, CurveShape::Ellipse { a, b } if a == 2.0 && b == 1.0));
    }

    #[test]
    fn default_node_count() {
        let cfg = parse_domain_config("kind = kite\n").unwrap();
        assert_eq!(cfg.n, DEFAULT_NODE_COUNT);
    }

    #[test]
    fn errors_cite_line_and_key() {
        let err = parse_domain_config("kind = ellipse\na = fast\nb = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("`a`"), "{msg}");

        let err = parse_domain_config("kind = kite\nn = 0\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));

        let err = parse_domain_config("kind = kite\nradius = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`radius`") && msg.contains("line 2"), "{msg}");

        let err = parse_domain_config("a = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::MissingKind));

        let err = parse_domain_config("kind = ellipse\nb = 1\n").unwrap_err();
        assert!(err.to_string().contains("`a`"));
    }

    #[test]
    fn duplicate_key_rejected() {
        let err = parse_domain_config("kind = kite\nn = 64\nn = 128\n").unwrap_err();
        assert!(matches!(err, ConfigError::DuplicateKey { line: 3, .. }));
    }

    #[test]
    fn round_trips_exactly() {
        let texts = [
            "kind = ellipse\na = 2\nb = 1\nphi = 0.7853981633974483\nn = 64\n",
            "kind = star\nc0 = 1\namplitude = 0.3\nfolds = 3\n",
            "kind = fourier\nx_cos = 0 1\ny_sin = 1\nscale = 2.5\n",
        ];
        for text in texts {
            let cfg = parse_domain_config(text).unwrap();
            let cfg2 = parse_domain_config(&serialize_domain_config(&cfg)).unwrap();
            assert_eq!(cfg, cfg2);
        }
    }
}
