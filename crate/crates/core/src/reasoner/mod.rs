//! Rule-based derivation of Deduced and Aggregated context.

mod aggregate;
mod engine;
mod rules;

use thiserror::Error;

use crate::kb::{KbError, StmtId};
use crate::statement::ContextStatement;
use crate::term::Iri;
use crate::turtle::ParseError;

pub use aggregate::aggregate;
pub use engine::{affected_predicates, infer, infer_bounded, maintain, FIXPOINT_BUDGET};
pub use rules::{parse_query, parse_rules, AggregationSpec, BodyClause, Builtin, Combiner, Rule, RuleSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReasonerError {
    #[error("syntax error: {0}")]
    Syntax(#[from] ParseError),
    #[error("line {line}: rule {rule}: variable ?{variable} is not bound by a positive body pattern")]
    UnsafeRule { rule: String, variable: String, line: usize },
    #[error("line {line}: rule {rule}: predicates must be IRIs")]
    VariablePredicate { rule: String, line: usize },
    #[error("line {line}: rule {rule} has no head")]
    EmptyHead { rule: String, line: usize },
    #[error("line {line}: rule {rule} is defined twice")]
    DuplicateRule { rule: String, line: usize },
    #[error("negation cycle through {}", cycle.iter().map(Iri::as_str).collect::<Vec<_>>().join(" -> "))]
    UnstratifiableNegation { cycle: Vec<Iri> },
    #[error("line {line}: rule {rule} concludes {predicate}, which is not declared Deduced")]
    NonDeducedHead { rule: String, predicate: Iri, line: usize },
    #[error("aggregation uses undeclared predicate {0}")]
    UnknownPredicate(Iri),
    #[error("no fixpoint within {0} iterations")]
    FixpointBudgetExceeded(usize),
    #[error(transparent)]
    Kb(#[from] KbError),
}

/// A statement added or retracted by the reasoner, with the rule or
/// aggregation responsible for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub id: StmtId,
    pub statement: ContextStatement,
    pub origin: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DerivationResult {
    pub added: Vec<Derivation>,
    pub retracted: Vec<Derivation>,
    pub iterations: usize,
}

impl DerivationResult {
    pub fn extend(&mut self, other: DerivationResult) {
        self.added.extend(other.added);
        self.retracted.extend(other.retracted);
        self.iterations += other.iterations;
    }
}
