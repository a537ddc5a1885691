//! Context statements: a triple plus classification, quality and provenance.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::qoc::{ParameterKind, QualityConstraint};
use crate::term::Triple;
use crate::vocab;

/// Logical time in milliseconds, driven by the trace.
pub type Timestamp = u64;

/// How a piece of context was obtained.
///
/// `Ord` follows confidence: `Deduced < Aggregated < Sensed < Defined`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Classification {
    Deduced,
    Aggregated,
    Sensed,
    Defined,
}

impl Classification {
    pub const ALL: [Classification; 4] = [
        Classification::Defined,
        Classification::Sensed,
        Classification::Aggregated,
        Classification::Deduced,
    ];

    /// Confidence rank, Defined = 4 down to Deduced = 1.
    pub fn rank(self) -> u8 {
        match self {
            Classification::Defined => 4,
            Classification::Sensed => 3,
            Classification::Aggregated => 2,
            Classification::Deduced => 1,
        }
    }

    /// Sensed and Defined context comes straight from a provider.
    pub fn is_direct(self) -> bool {
        matches!(self, Classification::Sensed | Classification::Defined)
    }

    pub fn is_indirect(self) -> bool {
        !self.is_direct()
    }

    pub fn iri(self) -> &'static str {
        match self {
            Classification::Sensed => vocab::SOCAM_SENSED,
            Classification::Defined => vocab::SOCAM_DEFINED,
            Classification::Aggregated => vocab::SOCAM_AGGREGATED,
            Classification::Deduced => vocab::SOCAM_DEDUCED,
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.iri() == iri)
    }

    pub fn name(self) -> &'static str {
        match self {
            Classification::Sensed => "Sensed",
            Classification::Defined => "Defined",
            Classification::Aggregated => "Aggregated",
            Classification::Deduced => "Deduced",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Classification {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown classification {s:?}"))
    }
}

/// The unit of context knowledge.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextStatement {
    pub triple: Triple,
    pub classification: Classification,
    pub qoc: Option<QualityConstraint>,
    pub produced_at: Timestamp,
    pub provider: String,
}

impl ContextStatement {
    pub fn new(triple: Triple, classification: Classification, provider: impl Into<String>) -> Self {
        ContextStatement { triple, classification, qoc: None, produced_at: 0, provider: provider.into() }
    }

    pub fn at(mut self, produced_at: Timestamp) -> Self {
        self.produced_at = produced_at;
        self
    }

    pub fn with_qoc(mut self, qoc: QualityConstraint) -> Self {
        self.qoc = Some(qoc);
        self
    }

    /// Mean lifetime in ms, if the statement carries a freshness parameter.
    pub fn lifetime(&self) -> Option<f64> {
        self.qoc.as_ref()?.get(ParameterKind::Freshness).map(|m| m.value)
    }

    /// Fresh at `t` iff there is no lifetime, or `t <= producedAt + lifetime`.
    pub fn is_fresh(&self, t: Timestamp) -> bool {
        match self.lifetime() {
            None => true,
            Some(lifetime) => (t as f64) <= self.produced_at as f64 + lifetime,
        }
    }

    /// Certainty in percent; absent means 100.
    pub fn effective_certainty(&self) -> f64 {
        self.percent(ParameterKind::Certainty)
    }

    /// Accuracy in percent; absent means 100.
    pub fn effective_accuracy(&self) -> f64 {
        self.percent(ParameterKind::Accuracy)
    }

    fn percent(&self, kind: ParameterKind) -> f64 {
        self.qoc.as_ref().and_then(|q| q.get(kind)).map_or(100.0, |m| m.value)
    }

    /// Identity in the knowledge base: the triple plus who said it.
    pub fn key(&self) -> StatementKey {
        StatementKey { triple: self.triple.clone(), provider: self.provider.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StatementKey {
    pub triple: Triple,
    pub provider: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qoc::Metric;
    use crate::term::Term;

    fn stmt() -> ContextStatement {
        let t = Triple::new(Term::iri("http://e/a"), Term::iri("http://e/p"), Term::string("x"));
        ContextStatement::new(t, Classification::Sensed, "s1")
    }

    #[test]
    fn confidence_order() {
        assert!(Classification::Defined > Classification::Sensed);
        assert!(Classification::Sensed > Classification::Aggregated);
        assert!(Classification::Aggregated > Classification::Deduced);
        for a in Classification::ALL {
            for b in Classification::ALL {
                assert_eq!(a.cmp(&b), a.rank().cmp(&b.rank()));
            }
        }
    }

    #[test]
    fn direct_and_indirect() {
        assert!(Classification::Sensed.is_direct());
        assert!(Classification::Defined.is_direct());
        assert!(Classification::Aggregated.is_indirect());
        assert!(Classification::Deduced.is_indirect());
    }

    #[test]
    fn freshness_boundary() {
        let mut q = QualityConstraint::new();
        q.insert(ParameterKind::Freshness, Metric::new(5000.0, "duration", "millisecond")).unwrap();
        let s = stmt().at(100).with_qoc(q);
        assert!(s.is_fresh(100));
        assert!(s.is_fresh(5100));
        assert!(!s.is_fresh(5101));
        assert!(stmt().is_fresh(u64::MAX));
    }

    #[test]
    fn classification_parse() {
        assert_eq!("sensed".parse::<Classification>().unwrap(), Classification::Sensed);
        assert!("Guessed".parse::<Classification>().is_err());
        assert_eq!(Classification::from_iri(vocab::SOCAM_DEFINED), Some(Classification::Defined));
    }
}
