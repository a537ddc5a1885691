//! Detection and resolution of contradictory values on functional
//! predicates, using classification and quality of context.
//!
//! Losers are hidden from normal queries but never mutated or deleted, so
//! re-running resolution after the winner disappears promotes the best
//! remaining candidate.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::kb::{ContextKB, QueryOptions, StmtId};
use crate::qoc::ConfidenceKey;
use crate::statement::{ContextStatement, Timestamp};
use crate::term::{Iri, Term, Triple};

/// Competing values for one `(subject, functional predicate)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictSet {
    pub subject: Term,
    pub predicate: Iri,
    /// Every stored statement for the pair, in insertion order.
    pub competing: Vec<(StmtId, ContextStatement)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub subject: Term,
    pub predicate: Iri,
    pub winner: (StmtId, ContextStatement),
    pub losers: Vec<(StmtId, ContextStatement)>,
}

/// One conflict set per `(subject, functional predicate)` holding at least
/// two distinct objects, ordered by subject then predicate.
pub fn detect(kb: &ContextKB, _now: Timestamp) -> Vec<ConflictSet> {
    let functional: BTreeSet<&Iri> = kb.schemas().properties().filter(|p| p.functional).map(|p| &p.iri).collect();
    let mut groups: BTreeMap<(Term, Iri), Vec<(StmtId, ContextStatement)>> = BTreeMap::new();
    for predicate in functional {
        let pattern = Triple::new(Term::var("s"), Term::Iri(predicate.clone()), Term::var("o"));
        for m in kb.query(&pattern, QueryOptions::raw()) {
            groups.entry((m.statement.triple.subject.clone(), predicate.clone())).or_default().push((m.id, m.statement));
        }
    }
    groups
        .into_iter()
        .filter(|(_, stmts)| {
            let objects: BTreeSet<&Term> = stmts.iter().map(|(_, s)| &s.triple.object).collect();
            objects.len() >= 2
        })
        .map(|((subject, predicate), competing)| ConflictSet { subject, predicate, competing })
        .collect()
}

/// Total order used to pick winners: confidence key, then later
/// production, then the lexicographically smaller provider id, then the
/// smaller object. `Greater` means `a` should win over `b`.
pub fn compare_candidates(a: &ContextStatement, b: &ContextStatement, now: Timestamp) -> Ordering {
    ConfidenceKey::of(a, now)
        .cmp(&ConfidenceKey::of(b, now))
        .then(a.produced_at.cmp(&b.produced_at))
        .then_with(|| b.provider.cmp(&a.provider))
        .then_with(|| b.triple.object.cmp(&a.triple.object))
}

pub fn resolve(conflicts: &[ConflictSet], now: Timestamp) -> Vec<Resolution> {
    conflicts
        .iter()
        .map(|set| {
            let winner = set
                .competing
                .iter()
                .max_by(|a, b| compare_candidates(&a.1, &b.1, now))
                .cloned()
                .expect("a conflict set has at least two statements");
            let losers = set.competing.iter().filter(|(id, _)| *id != winner.0).cloned().collect();
            Resolution { subject: set.subject.clone(), predicate: set.predicate.clone(), winner, losers }
        })
        .collect()
}

/// Marks exactly the losers of `resolutions` as hidden.
pub fn apply(kb: &mut ContextKB, resolutions: &[Resolution]) {
    let hidden = resolutions.iter().flat_map(|r| r.losers.iter().map(|(id, _)| *id)).collect();
    kb.set_hidden(hidden);
    kb.clear_flagged();
}

/// Detect, resolve and apply in one pass.
pub fn resolve_all(kb: &mut ContextKB, now: Timestamp) -> Vec<Resolution> {
    let resolutions = resolve(&detect(kb, now), now);
    apply(kb, &resolutions);
    resolutions
}
