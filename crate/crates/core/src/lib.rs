//! Context-awareness engine: an ontology-based context model with
//! classification, dependency and quality-of-context annotations, a
//! forward-chaining context reasoner with truth maintenance, confidence-based
//! conflict resolution, and a service-oriented runtime that replays context
//! traces.

pub mod assets;
pub mod conflict;
pub mod kb;
mod lexer;
pub mod ontology;
pub mod qoc;
pub mod reasoner;
pub mod runtime;
pub mod statement;
pub mod term;
pub mod turtle;
pub mod vocab;

pub use kb::{AssertOutcome, ContextKB, KbError, QueryMatch, QueryOptions, StmtId, Support};
pub use ontology::{load_schema, ModuleId, OntologyError, PropertyDecl, Schema, SchemaSet};
pub use qoc::{confidence_key, parse_qoc, ConfidenceKey, Metric, ParameterKind, QocError, QualityConstraint};
pub use statement::{Classification, ContextStatement, StatementKey, Timestamp};
pub use term::{Bindings, Datatype, Iri, Literal, PrefixMap, Term, Triple};
pub use turtle::{Document, ParseError, ParseErrorKind};
pub use conflict::{ConflictSet, Resolution};
pub use reasoner::{parse_rules, AggregationSpec, Derivation, DerivationResult, ReasonerError, Rule, RuleSet};
pub use runtime::{CycleReport, Engine, LogFormat, LogRecord, RuntimeError, Trace, TraceError, TraceEvent};
