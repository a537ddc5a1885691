use std::collections::{BTreeMap, BTreeSet};

use super::{AggregationSpec, Combiner, Derivation, DerivationResult, ReasonerError};
use crate::conflict::compare_candidates;
use crate::kb::{ContextKB, QueryOptions, StmtId, Support};
use crate::qoc::{ParameterKind, QualityConstraint};
use crate::statement::{Classification, ContextStatement, Timestamp};
use crate::term::{Iri, Term, Triple};
use crate::vocab;

/// Best statement per object, keyed by object.
type ByObject = BTreeMap<Term, (StmtId, ContextStatement)>;

/// Best active statement per object of `(subject predicate ?o)`.
fn best_objects(kb: &ContextKB, subject: &Term, predicate: &Iri, now: Timestamp) -> ByObject {
    let pattern = Triple::new(subject.clone(), Term::Iri(predicate.clone()), Term::var("o"));
    let mut out = ByObject::new();
    for m in kb.query(&pattern, QueryOptions::visible(now)) {
        let object = m.statement.triple.object.clone();
        match out.get(&object) {
            Some((_, cur)) if !compare_candidates(&m.statement, cur, now).is_gt() => {}
            _ => {
                out.insert(object, (m.id, m.statement));
            }
        }
    }
    out
}

fn has_explicit_certainty(s: &ContextStatement) -> bool {
    s.qoc.as_ref().is_some_and(|q| q.get(ParameterKind::Certainty).is_some())
}

/// Brings the Aggregated `(group target ?v)` statements in line with the
/// current member values: adds missing ones, retracts ones no longer
/// supported, and refreshes supports of the rest.
pub fn aggregate(kb: &mut ContextKB, spec: &AggregationSpec, now: Timestamp) -> Result<DerivationResult, ReasonerError> {
    if kb.is_strict() {
        for p in [&spec.member_predicate, &spec.source_predicate, &spec.target_predicate] {
            if kb.schemas().property(p).is_none() {
                return Err(ReasonerError::UnknownPredicate(p.clone()));
            }
        }
    }
    let group = Term::Iri(spec.group.clone());
    let members = best_objects(kb, &group, &spec.member_predicate, now);
    let mut per_member: Vec<(StmtId, ByObject)> = Vec::new();
    let mut membership: BTreeMap<StmtId, ContextStatement> = BTreeMap::new();
    for (member, (mid, mstmt)) in &members {
        if member.as_iri().is_none() {
            continue;
        }
        per_member.push((*mid, best_objects(kb, member, &spec.source_predicate, now)));
        membership.insert(*mid, mstmt.clone());
    }

    // value -> contributing statements
    let mut desired: BTreeMap<Term, Vec<(StmtId, ContextStatement)>> = BTreeMap::new();
    match spec.combiner {
        Combiner::Union => {
            for (mid, values) in &per_member {
                for (v, src) in values {
                    let entry = desired.entry(v.clone()).or_default();
                    entry.push((*mid, membership[mid].clone()));
                    entry.push(src.clone());
                }
            }
        }
        Combiner::Intersection => {
            if let Some((_, first)) = per_member.first() {
                for v in first.keys() {
                    if per_member.iter().all(|(_, values)| values.contains_key(v)) {
                        let entry = desired.entry(v.clone()).or_default();
                        for (mid, values) in &per_member {
                            entry.push((*mid, membership[mid].clone()));
                            entry.push(values[v].clone());
                        }
                    }
                }
            }
        }
    }

    let origin = spec.name();
    let target = Term::Iri(spec.target_predicate.clone());
    let mut result = DerivationResult::default();
    let existing: Vec<StmtId> = kb
        .query(&Triple::new(group.clone(), target.clone(), Term::var("v")), QueryOptions::raw())
        .into_iter()
        .filter(|m| m.statement.classification == Classification::Aggregated && m.statement.provider == vocab::INTERPRETER_ID)
        .map(|m| m.id)
        .collect();
    let mut kept: BTreeSet<Term> = BTreeSet::new();
    for id in existing {
        let object = kb.get(id).expect("queried id is stored").triple.object.clone();
        if desired.contains_key(&object) {
            kept.insert(object);
        } else if let Some(statement) = kb.remove(id) {
            result.retracted.push(Derivation { id, statement, origin: origin.clone() });
        }
    }

    for (value, contributors) in desired {
        let premises: Vec<StmtId> = contributors.iter().map(|(id, _)| *id).collect::<BTreeSet<_>>().into_iter().collect();
        let certainty = contributors.iter().map(|(_, s)| s.effective_certainty()).fold(100.0_f64, f64::min);
        let mut stmt =
            ContextStatement::new(Triple::new(group.clone(), target.clone(), value.clone()), Classification::Aggregated, vocab::INTERPRETER_ID)
                .at(now);
        if contributors.iter().any(|(_, s)| has_explicit_certainty(s)) {
            stmt = stmt.with_qoc(QualityConstraint::new().with_certainty(certainty).expect("certainty in range"));
        }
        let support = Support { origin: origin.clone(), premises };
        if kept.contains(&value) {
            let id = kb.id_of(&stmt.key()).expect("kept statement is stored");
            let current = kb.get(id).expect("kept statement is stored");
            if current.effective_certainty() != certainty {
                kb.assert_with_id(stmt)?;
            }
            kb.set_support(id, support);
        } else {
            let (_, id) = kb.assert_with_id(stmt.clone())?;
            kb.set_support(id, support);
            result.added.push(Derivation { id, statement: stmt, origin: origin.clone() });
        }
    }
    Ok(result)
}
