//! The context knowledge base: statements indexed by subject, predicate and
//! subject+predicate, with conflict-loser marks and derivation supports.
//!
//! The KB follows a single-writer contract: every mutation goes through
//! `&mut self`, and `&self` queries may be shared between mutations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::ontology::SchemaSet;
use crate::statement::{Classification, ContextStatement, StatementKey, Timestamp};
use crate::term::{Bindings, Iri, PrefixMap, Term, Triple};
use crate::turtle::Document;
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("predicate {0} is not declared by any plugged schema")]
    UndeclaredPredicate(Iri),
    #[error("statement {0} is not ground")]
    GroundednessViolation(Box<Triple>),
    #[error("malformed statement {triple}: {reason}")]
    InvalidTriple { triple: Box<Triple>, reason: &'static str },
    #[error("{provider} may not raise {predicate} from {declared} to {asserted}")]
    ClassificationEscalation { predicate: Iri, provider: String, declared: Classification, asserted: Classification },
    #[error("only the interpreter may assert deduced context, not {0}")]
    ForeignDeduction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssertOutcome {
    Added,
    Updated,
    /// Added, but a functional predicate now has competing objects for the
    /// subject; both are kept until the resolver runs.
    ConflictDeferred,
}

/// Stable handle of a stored statement. Ids increase with insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StmtId(u64);

/// Why an interpreter statement exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    /// Rule or aggregation name.
    pub origin: String,
    pub premises: Vec<StmtId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryOptions {
    pub as_of: Timestamp,
    pub fresh_only: bool,
    /// Include statements hidden by conflict resolution.
    pub raw: bool,
}

impl QueryOptions {
    pub fn visible(as_of: Timestamp) -> Self {
        QueryOptions { as_of, fresh_only: true, raw: false }
    }

    pub fn raw() -> Self {
        QueryOptions { as_of: 0, fresh_only: false, raw: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryMatch {
    pub id: StmtId,
    pub bindings: Bindings,
    pub statement: ContextStatement,
}

#[derive(Debug, Clone, Default)]
pub struct ContextKB {
    statements: BTreeMap<StmtId, ContextStatement>,
    ids: HashMap<StatementKey, StmtId>,
    by_subject: HashMap<Term, BTreeSet<StmtId>>,
    by_predicate: HashMap<Term, BTreeSet<StmtId>>,
    by_subject_predicate: HashMap<(Term, Term), BTreeSet<StmtId>>,
    next_id: u64,
    clock: Timestamp,
    schemas: SchemaSet,
    strict: bool,
    hidden: BTreeSet<StmtId>,
    flagged: BTreeSet<(Term, Term)>,
    supports: BTreeMap<StmtId, Support>,
}

impl ContextKB {
    /// A KB that accepts any predicate.
    pub fn new() -> Self {
        Self::default()
    }

    /// A KB that rejects predicates no plugged schema declares.
    pub fn strict() -> Self {
        ContextKB { strict: true, ..Self::default() }
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn set_strict(&mut self, strict: bool) {
        self.strict = strict;
    }

    pub fn schemas(&self) -> &SchemaSet {
        &self.schemas
    }

    pub fn schemas_mut(&mut self) -> &mut SchemaSet {
        &mut self.schemas
    }

    pub fn clock(&self) -> Timestamp {
        self.clock
    }

    pub fn advance_clock(&mut self, t: Timestamp) {
        self.clock = self.clock.max(t);
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn get(&self, id: StmtId) -> Option<&ContextStatement> {
        self.statements.get(&id)
    }

    pub fn id_of(&self, key: &StatementKey) -> Option<StmtId> {
        self.ids.get(key).copied()
    }

    pub fn statements(&self) -> impl Iterator<Item = &ContextStatement> {
        self.statements.values()
    }

    pub fn entries(&self) -> impl Iterator<Item = (StmtId, &ContextStatement)> {
        self.statements.iter().map(|(id, s)| (*id, s))
    }

    pub fn is_hidden(&self, id: StmtId) -> bool {
        self.hidden.contains(&id)
    }

    pub fn hidden(&self) -> &BTreeSet<StmtId> {
        &self.hidden
    }

    /// Replaces the set of conflict losers.
    pub fn set_hidden(&mut self, hidden: BTreeSet<StmtId>) {
        self.hidden = hidden.into_iter().filter(|id| self.statements.contains_key(id)).collect();
    }

    /// `(subject, predicate)` pairs flagged by [`assert`](Self::assert) as
    /// holding competing values of a functional predicate.
    pub fn flagged(&self) -> &BTreeSet<(Term, Term)> {
        &self.flagged
    }

    pub fn clear_flagged(&mut self) {
        self.flagged.clear();
    }

    pub fn support(&self, id: StmtId) -> Option<&Support> {
        self.supports.get(&id)
    }

    pub fn set_support(&mut self, id: StmtId, support: Support) {
        if self.statements.contains_key(&id) {
            self.supports.insert(id, support);
        }
    }

    /// Present, not a conflict loser, and fresh at `now`.
    pub fn is_active(&self, id: StmtId, now: Timestamp) -> bool {
        !self.hidden.contains(&id) && self.statements.get(&id).is_some_and(|s| s.is_fresh(now))
    }

    pub fn active_ids(&self, now: Timestamp) -> BTreeSet<StmtId> {
        self.statements.keys().copied().filter(|id| self.is_active(*id, now)).collect()
    }

    pub fn ids_for(&self, subject: &Term, predicate: &Term) -> impl Iterator<Item = StmtId> + '_ {
        self.by_subject_predicate
            .get(&(subject.clone(), predicate.clone()))
            .into_iter()
            .flatten()
            .copied()
    }

    fn validate(&self, stmt: &ContextStatement) -> Result<(), KbError> {
        let t = &stmt.triple;
        if !t.is_ground() {
            return Err(KbError::GroundednessViolation(Box::new(t.clone())));
        }
        if t.subject.as_iri().is_none() {
            return Err(KbError::InvalidTriple { triple: Box::new(t.clone()), reason: "subject must be an IRI" });
        }
        let Some(predicate) = t.predicate_iri() else {
            return Err(KbError::InvalidTriple { triple: Box::new(t.clone()), reason: "predicate must be an IRI" });
        };
        if matches!(t.object, Term::Blank(_)) {
            return Err(KbError::InvalidTriple { triple: Box::new(t.clone()), reason: "object must be an IRI or literal" });
        }
        let interpreter = stmt.provider == vocab::INTERPRETER_ID;
        if stmt.classification == Classification::Deduced && !interpreter {
            return Err(KbError::ForeignDeduction(stmt.provider.clone()));
        }
        match self.schemas.property(predicate) {
            Some(decl) => {
                if !interpreter && stmt.classification > decl.classified_as {
                    return Err(KbError::ClassificationEscalation {
                        predicate: predicate.clone(),
                        provider: stmt.provider.clone(),
                        declared: decl.classified_as,
                        asserted: stmt.classification,
                    });
                }
            }
            None if self.strict && !vocab::is_builtin_predicate(predicate.as_str()) => {
                return Err(KbError::UndeclaredPredicate(predicate.clone()));
            }
            None => {}
        }
        Ok(())
    }

    pub fn assert(&mut self, stmt: ContextStatement) -> Result<AssertOutcome, KbError> {
        self.assert_with_id(stmt).map(|(outcome, _)| outcome)
    }

    pub fn assert_with_id(&mut self, stmt: ContextStatement) -> Result<(AssertOutcome, StmtId), KbError> {
        self.validate(&stmt)?;
        self.advance_clock(stmt.produced_at);
        let key = stmt.key();
        if let Some(&id) = self.ids.get(&key) {
            let stored = self.statements.get_mut(&id).expect("indexed id is stored");
            stored.produced_at = stmt.produced_at;
            stored.qoc = stmt.qoc;
            stored.classification = stmt.classification;
            return Ok((AssertOutcome::Updated, id));
        }
        let t = &stmt.triple;
        let functional = t.predicate_iri().is_some_and(|p| self.schemas.is_functional(p));
        let conflicting = functional
            && self
                .ids_for(&t.subject, &t.predicate)
                .any(|other| self.statements[&other].triple.object != t.object);
        let id = StmtId(self.next_id);
        self.next_id += 1;
        let sp = (t.subject.clone(), t.predicate.clone());
        self.by_subject.entry(t.subject.clone()).or_default().insert(id);
        self.by_predicate.entry(t.predicate.clone()).or_default().insert(id);
        self.by_subject_predicate.entry(sp.clone()).or_default().insert(id);
        self.ids.insert(key, id);
        self.statements.insert(id, stmt);
        if conflicting {
            self.flagged.insert(sp);
            Ok((AssertOutcome::ConflictDeferred, id))
        } else {
            Ok((AssertOutcome::Added, id))
        }
    }

    pub fn remove(&mut self, id: StmtId) -> Option<ContextStatement> {
        let stmt = self.statements.remove(&id)?;
        let t = &stmt.triple;
        let sp = (t.subject.clone(), t.predicate.clone());
        unindex(&mut self.by_subject, &t.subject, id);
        unindex(&mut self.by_predicate, &t.predicate, id);
        unindex(&mut self.by_subject_predicate, &sp, id);
        self.ids.remove(&stmt.key());
        self.hidden.remove(&id);
        self.supports.remove(&id);
        Some(stmt)
    }

    /// Removes every statement matching `pattern` (variables act as
    /// wildcards), optionally only those from `provider`.
    pub fn retract(&mut self, pattern: &Triple, provider: Option<&str>) -> usize {
        let ids: Vec<StmtId> = self
            .candidates(pattern)
            .into_iter()
            .filter(|id| {
                let s = &self.statements[id];
                provider.is_none_or(|p| s.provider == p) && pattern.unify(&s.triple).is_some()
            })
            .collect();
        for id in &ids {
            self.remove(*id);
        }
        ids.len()
    }

    pub fn retract_where(&mut self, pred: impl Fn(&ContextStatement) -> bool) -> Vec<ContextStatement> {
        let ids: Vec<StmtId> = self.statements.iter().filter(|(_, s)| pred(s)).map(|(id, _)| *id).collect();
        ids.into_iter().filter_map(|id| self.remove(id)).collect()
    }

    fn candidates(&self, pattern: &Triple) -> Vec<StmtId> {
        let index_hit = match (pattern.subject.is_ground(), pattern.predicate.is_ground()) {
            (true, true) => {
                Some(self.by_subject_predicate.get(&(pattern.subject.clone(), pattern.predicate.clone())))
            }
            (true, false) => Some(self.by_subject.get(&pattern.subject)),
            (false, true) => Some(self.by_predicate.get(&pattern.predicate)),
            (false, false) => None,
        };
        match index_hit {
            Some(ids) => ids.into_iter().flatten().copied().collect(),
            None => self.statements.keys().copied().collect(),
        }
    }

    /// All statements unifying with `pattern`, in insertion order.
    pub fn query(&self, pattern: &Triple, opts: QueryOptions) -> Vec<QueryMatch> {
        self.candidates(pattern)
            .into_iter()
            .filter(|id| opts.raw || !self.hidden.contains(id))
            .filter_map(|id| {
                let s = &self.statements[&id];
                if opts.fresh_only && !s.is_fresh(opts.as_of) {
                    return None;
                }
                pattern.unify(&s.triple).map(|bindings| QueryMatch { id, bindings, statement: s.clone() })
            })
            .collect()
    }

    /// Rebuilds the indexes from the flat statement map and compares.
    pub fn indexes_consistent(&self) -> bool {
        let mut fresh = ContextKB::default();
        for (id, s) in &self.statements {
            let t = &s.triple;
            fresh.by_subject.entry(t.subject.clone()).or_default().insert(*id);
            fresh.by_predicate.entry(t.predicate.clone()).or_default().insert(*id);
            fresh.by_subject_predicate.entry((t.subject.clone(), t.predicate.clone())).or_default().insert(*id);
            fresh.ids.insert(s.key(), *id);
        }
        fresh.by_subject == self.by_subject
            && fresh.by_predicate == self.by_predicate
            && fresh.by_subject_predicate == self.by_subject_predicate
            && fresh.ids == self.ids
            && self.hidden.iter().all(|id| self.statements.contains_key(id))
            && self.supports.keys().all(|id| self.statements.contains_key(id))
    }

    /// Snapshot of the visible statements at `now` as a turtle document.
    pub fn export(&self, now: Timestamp, prefixes: &PrefixMap) -> Document {
        let mut doc = Document::new(prefixes.clone());
        let triples: BTreeSet<Triple> = self
            .active_ids(now)
            .into_iter()
            .map(|id| self.statements[&id].triple.clone())
            .collect();
        doc.triples.extend(triples);
        doc
    }
}

fn unindex<K: std::hash::Hash + Eq>(index: &mut HashMap<K, BTreeSet<StmtId>>, key: &K, id: StmtId) {
    if let Some(set) = index.get_mut(key) {
        set.remove(&id);
        if set.is_empty() {
            index.remove(key);
        }
    }
}
