//! JSON system documents.
//!
//! ```json
//! {
//!   "points": [{"label": "a", "coords": ["0", "1/2"]}],
//!   "metric": {"type": "euclidean"},
//!   "map": [0],
//!   "meta": {"generator": "cycle"}
//! }
//! ```
//!
//! Rationals are canonical `p/q` strings (integers may be written `n`).
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::ExactRational;
use crate::system::{FiniteSystem, Metric, PointRecord, RawSystem};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDocument {
    points: Vec<PointDocument>,
    metric: MetricDocument,
    map: Vec<usize>,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDocument {
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum MetricDocument {
    Euclidean,
    Matrix { sq: Vec<Vec<String>> },
}

fn parse_rational(field: String, value: &str) -> Result<ExactRational> {
    ExactRational::parse_canonical(value).map_err(|reason| Error::InvalidRational {
        field,
        value: value.to_string(),
        reason,
    })
}

fn to_raw(doc: SystemDocument) -> Result<RawSystem> {
    let mut points = Vec::with_capacity(doc.points.len());
    for (i, p) in doc.points.into_iter().enumerate() {
        let coords = match p.coords {
            None => None,
            Some(cs) => Some(
                cs.iter()
                    .enumerate()
                    .map(|(k, c)| parse_rational(format!("points[{i}].coords[{k}]"), c))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        points.push(PointRecord {
            label: p.label,
            coords,
        });
    }
    let metric = match doc.metric {
        MetricDocument::Euclidean => Metric::Euclidean,
        MetricDocument::Matrix { sq } => Metric::Matrix(
            sq.iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, v)| parse_rational(format!("metric.sq[{i}][{j}]"), v))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    Ok(RawSystem {
        points,
        metric,
        map: doc.map,
        meta: doc.meta,
    })
}

fn to_document(raw: &RawSystem) -> SystemDocument {
    let strs = |v: &[ExactRational]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
    SystemDocument {
        points: raw
            .points
            .iter()
            .map(|p| PointDocument {
                label: p.label.clone(),
                coords: p.coords.as_deref().map(strs),
            })
            .collect(),
        metric: match &raw.metric {
            Metric::Euclidean => MetricDocument::Euclidean,
            Metric::Matrix(m) => MetricDocument::Matrix {
                sq: m.iter().map(|row| strs(row)).collect(),
            },
        },
        map: raw.map.clone(),
        meta: raw.meta.clone(),
    }
}

/// Parses a document without validating the system it describes.
pub fn parse_raw(text: &str) -> Result<RawSystem> {
    let doc: SystemDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    to_raw(doc)
}

pub fn from_json_str(text: &str) -> Result<FiniteSystem> {
    FiniteSystem::new(parse_raw(text)?)
}

/// Canonical pretty-printed document text.
pub fn to_json_string(sys: &FiniteSystem) -> String {
    raw_to_json_string(sys.raw())
}

pub fn raw_to_json_string(raw: &RawSystem) -> String {
    let mut s = serde_json::to_string_pretty(&to_document(raw)).expect("document serializes");
    s.push('\n');
    s
}

pub fn save_system<W: Write>(sys: &FiniteSystem, mut out: W) -> Result<()> {
    out.write_all(to_json_string(sys).as_bytes())?;
    Ok(())
}

pub fn load_system<R: Read>(mut input: R) -> Result<FiniteSystem> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    from_json_str(&text)
}

pub fn save_to_path(sys: &FiniteSystem, path: &Path) -> Result<()> {
    save_system(sys, std::fs::File::create(path)?)
}

pub fn load_from_path(path: &Path) -> Result<FiniteSystem> {
    load_system(std::fs::File::open(path)?)
}

/// SHA-256 over the canonical document, hex encoded.
pub fn fingerprint(sys: &FiniteSystem) -> String {
    let compact = serde_json::to_string(&to_document(sys.raw())).expect("document serializes");
    hex::encode(Sha256::digest(compact.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn cycle_round_trip() {
        let c3 = generators::gen_cycle(3);
        let text = to_json_string(&c3);
        let back = from_json_str(&text).unwrap();
        assert_eq!(back, c3);
        assert_eq!(to_json_string(&back), text);
    }

    #[test]
    fn non_canonical_rational_rejected() {
        let text = r#"{"points":[{"label":"a","coords":["2/4"]}],
                      "metric":{"type":"euclidean"},"map":[0],"meta":{}}"#;
        match from_json_str(text) {
            Err(Error::InvalidRational { field, .. }) => assert_eq!(field, "points[0].coords[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn map_out_of_range_rejected() {
        let text = r#"{"points":[{"label":"a"}],
                      "metric":{"type":"matrix","sq":[["0"]]},"map":[1],"meta":{}}"#;
        assert!(matches!(from_json_str(text), Err(Error::Validation(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"points":[{"label":"a"}],
                      "metric":{"type":"matrix","sq":[["0"]]},"map":[0],"meta":{},"extra":1}"#;
        assert!(matches!(from_json_str(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_errors_carry_position() {
        match from_json_str("{\n  \"points\": [,]\n}") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fingerprint_is_content_bound() {
        let a = fingerprint(&generators::gen_cycle(3));
        assert_eq!(a, fingerprint(&generators::gen_cycle(3)));
        assert_ne!(a, fingerprint(&generators::gen_cycle(4)));
        assert_eq!(a.len(), 64);
    }
}
