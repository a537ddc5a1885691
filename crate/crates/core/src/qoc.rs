//! Quality of context: constraints built from accuracy, resolution,
//! certainty and freshness metrics, and the confidence ordering used to
//! arbitrate between competing statements.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::statement::{ContextStatement, Timestamp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QocError {
    #[error("malformed metric {key}={value:?}: {reason}")]
    MalformedMetric { key: String, value: String, reason: String },
    #[error("{kind} value {value} out of range ({expected})")]
    OutOfRange { kind: ParameterKind, value: f64, expected: &'static str },
    #[error("unknown quality parameter {0:?}")]
    UnknownParameter(String),
    #[error("duplicate quality parameter {0}")]
    DuplicateParameter(ParameterKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParameterKind {
    Accuracy,
    Resolution,
    Certainty,
    Freshness,
}

impl ParameterKind {
    pub fn name(self) -> &'static str {
        match self {
            ParameterKind::Accuracy => "accuracy",
            ParameterKind::Resolution => "resolution",
            ParameterKind::Certainty => "certainty",
            ParameterKind::Freshness => "lifetime",
        }
    }
}

impl fmt::Display for ParameterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A measured quality value with its type and unit, e.g. `(50, distance, meter)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub value: f64,
    pub metric_type: String,
    pub unit: String,
}

impl Metric {
    pub fn new(value: f64, metric_type: &str, unit: &str) -> Self {
        Metric { value, metric_type: metric_type.to_owned(), unit: unit.to_owned() }
    }

    pub fn percentage(value: f64) -> Self {
        Metric::new(value, "percentage", "percent")
    }

    fn validate(&self, kind: ParameterKind) -> Result<(), QocError> {
        let out_of_range = |expected| QocError::OutOfRange { kind, value: self.value, expected };
        if !self.value.is_finite() {
            return Err(QocError::MalformedMetric {
                key: kind.name().to_owned(),
                value: self.value.to_string(),
                reason: "value must be finite".into(),
            });
        }
        match kind {
            ParameterKind::Accuracy | ParameterKind::Certainty => {
                if self.unit == "percent" && !(0.0..=100.0).contains(&self.value) {
                    return Err(out_of_range("0..=100 percent"));
                }
            }
            ParameterKind::Resolution | ParameterKind::Freshness => {
                if self.value <= 0.0 {
                    return Err(out_of_range("> 0"));
                }
            }
        }
        Ok(())
    }
}

/// At most one metric per parameter kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QualityConstraint {
    parameters: BTreeMap<ParameterKind, Metric>,
}

impl QualityConstraint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, kind: ParameterKind, metric: Metric) -> Result<(), QocError> {
        metric.validate(kind)?;
        if self.parameters.contains_key(&kind) {
            return Err(QocError::DuplicateParameter(kind));
        }
        self.parameters.insert(kind, metric);
        Ok(())
    }

    pub fn get(&self, kind: ParameterKind) -> Option<&Metric> {
        self.parameters.get(&kind)
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParameterKind, &Metric)> {
        self.parameters.iter().map(|(k, m)| (*k, m))
    }

    pub fn with_certainty(mut self, certainty: f64) -> Result<Self, QocError> {
        self.parameters.remove(&ParameterKind::Certainty);
        self.insert(ParameterKind::Certainty, Metric::percentage(certainty))?;
        Ok(self)
    }

    /// Renders back into the flat `key=value` annotation form.
    pub fn to_annotations(&self) -> Vec<String> {
        self.iter()
            .map(|(kind, m)| match kind {
                ParameterKind::Accuracy | ParameterKind::Certainty => format!("{kind}={}", m.value),
                ParameterKind::Resolution => {
                    let suffix = RESOLUTION_UNITS
                        .iter()
                        .find(|(_, unit)| *unit == m.unit)
                        .map_or(m.unit.as_str(), |(s, _)| s);
                    format!("{kind}={}{suffix}", m.value)
                }
                ParameterKind::Freshness => format!("{kind}={}ms", m.value),
            })
            .collect()
    }
}

const RESOLUTION_UNITS: &[(&str, &str)] =
    &[("mm", "millimeter"), ("cm", "centimeter"), ("km", "kilometer"), ("m", "meter")];

/// Result of [`parse_qoc`]: the constraint plus any dropped-field warnings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedQoc {
    pub constraint: QualityConstraint,
    pub warnings: Vec<String>,
}

/// Builds a constraint from flat annotation fields such as
/// `certainty=79`, `accuracy=80`, `resolution=50m`, `lifetime=5000ms`.
///
/// Unknown keys are rejected in strict mode and dropped with a warning
/// otherwise.
pub fn parse_qoc<K, V>(fields: &[(K, V)], strict: bool) -> Result<ParsedQoc, QocError>
where
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut out = ParsedQoc::default();
    for (key, value) in fields {
        let (key, value) = (key.as_ref(), value.as_ref().trim());
        let malformed = |reason: &str| QocError::MalformedMetric {
            key: key.to_owned(),
            value: value.to_owned(),
            reason: reason.to_owned(),
        };
        let (kind, metric) = match key {
            "certainty" | "accuracy" => {
                let number = value.strip_suffix('%').unwrap_or(value);
                let v = parse_number(number).ok_or_else(|| malformed("expected a percentage"))?;
                let kind = if key == "certainty" { ParameterKind::Certainty } else { ParameterKind::Accuracy };
                (kind, Metric::percentage(v))
            }
            "resolution" => {
                let (number, unit) = RESOLUTION_UNITS
                    .iter()
                    .find_map(|(suffix, unit)| value.strip_suffix(suffix).map(|n| (n, *unit)))
                    .ok_or_else(|| malformed("expected a distance such as 50m"))?;
                let v = parse_number(number).ok_or_else(|| malformed("expected a number before the unit"))?;
                (ParameterKind::Resolution, Metric::new(v, "distance", unit))
            }
            "lifetime" | "freshness" => {
                let number = value.strip_suffix("ms").ok_or_else(|| malformed("expected milliseconds such as 5000ms"))?;
                let v = parse_number(number).ok_or_else(|| malformed("expected a number before ms"))?;
                (ParameterKind::Freshness, Metric::new(v, "duration", "millisecond"))
            }
            other => {
                if strict {
                    return Err(QocError::UnknownParameter(other.to_owned()));
                }
                log::warn!("dropping unknown quality parameter {other}={value}");
                out.warnings.push(format!("unknown quality parameter {other:?} dropped"));
                continue;
            }
        };
        out.constraint.insert(kind, metric)?;
    }
    Ok(out)
}

fn parse_number(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

/// Lexicographic confidence key: freshness, then classification rank,
/// certainty, accuracy and recency. Any fresh statement outranks any stale
/// one. Resolution does not take part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceKey {
    pub fresh: bool,
    pub class_rank: u8,
    pub certainty: f64,
    pub accuracy: f64,
    /// `-(now - producedAt)`; larger means more recent.
    pub recency: i64,
}

impl ConfidenceKey {
    pub fn of(stmt: &ContextStatement, now: Timestamp) -> Self {
        ConfidenceKey {
            fresh: stmt.is_fresh(now),
            class_rank: stmt.classification.rank(),
            certainty: stmt.effective_certainty(),
            accuracy: stmt.effective_accuracy(),
            recency: stmt.produced_at as i64 - now as i64,
        }
    }
}

impl Eq for ConfidenceKey {}

impl Ord for ConfidenceKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.fresh
            .cmp(&other.fresh)
            .then(self.class_rank.cmp(&other.class_rank))
            .then(self.certainty.total_cmp(&other.certainty))
            .then(self.accuracy.total_cmp(&other.accuracy))
            .then(self.recency.cmp(&other.recency))
    }
}

impl PartialOrd for ConfidenceKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Convenience wrapper over [`ConfidenceKey::of`].
pub fn confidence_key(stmt: &ContextStatement, now: Timestamp) -> ConfidenceKey {
    ConfidenceKey::of(stmt, now)
}
