//! Stratified semi-naive forward chaining and truth maintenance.

use std::collections::{BTreeSet, HashMap, HashSet};

use log::{debug, trace};

use super::{BodyClause, Derivation, DerivationResult, ReasonerError, Rule, RuleSet};
use crate::conflict::compare_candidates;
use crate::kb::{ContextKB, StmtId, Support};
use crate::qoc::QualityConstraint;
use crate::statement::{Classification, ContextStatement, Timestamp};
use crate::term::{substitute_term, Bindings, Iri, Term, Triple};
use crate::vocab;

/// Upper bound on semi-naive rounds across all strata of one run.
pub const FIXPOINT_BUDGET: usize = 10_000;

#[derive(Debug, Clone)]
struct Fact {
    id: StmtId,
    triple: Triple,
    certainty: f64,
    explicit_certainty: bool,
}

/// Active facts, one representative statement per distinct triple.
#[derive(Default)]
struct FactBase {
    facts: Vec<Fact>,
    by_triple: HashMap<Triple, usize>,
    by_predicate: HashMap<Iri, Vec<usize>>,
}

impl FactBase {
    fn load(kb: &ContextKB, now: Timestamp) -> Self {
        let mut best: HashMap<&Triple, (StmtId, &ContextStatement)> = HashMap::new();
        let mut order = Vec::new();
        for id in kb.active_ids(now) {
            let stmt = kb.get(id).expect("active ids are stored");
            match best.get_mut(&stmt.triple) {
                Some(slot) => {
                    if compare_candidates(stmt, slot.1, now).is_gt() {
                        *slot = (id, stmt);
                    }
                }
                None => {
                    order.push(&stmt.triple);
                    best.insert(&stmt.triple, (id, stmt));
                }
            }
        }
        let mut base = FactBase::default();
        for triple in order {
            let (id, stmt) = best[triple];
            base.push(id, stmt);
        }
        base
    }

    fn push(&mut self, id: StmtId, stmt: &ContextStatement) -> usize {
        let idx = self.facts.len();
        let explicit = stmt.qoc.as_ref().is_some_and(|q| q.get(crate::qoc::ParameterKind::Certainty).is_some());
        self.facts.push(Fact {
            id,
            triple: stmt.triple.clone(),
            certainty: stmt.effective_certainty(),
            explicit_certainty: explicit,
        });
        self.by_triple.insert(stmt.triple.clone(), idx);
        if let Some(p) = stmt.triple.predicate_iri() {
            self.by_predicate.entry(p.clone()).or_default().push(idx);
        }
        idx
    }

    fn contains(&self, triple: &Triple) -> bool {
        self.by_triple.contains_key(triple)
    }
}

type Delta = HashMap<Iri, Vec<usize>>;

struct Pending {
    triple: Triple,
    premises: Vec<usize>,
    origin: String,
}

/// Enumerates the joins of `patterns[k..]`, drawing pattern `delta_at`
/// from `delta` and all others from the full base.
#[allow(clippy::too_many_arguments)]
fn join(
    base: &FactBase,
    patterns: &[&Triple],
    delta_at: Option<usize>,
    delta: &Delta,
    k: usize,
    bindings: &Bindings,
    premises: &mut Vec<usize>,
    emit: &mut dyn FnMut(&Bindings, &[usize]),
) {
    let Some(pattern) = patterns.get(k) else {
        emit(bindings, premises);
        return;
    };
    let pred = pattern.predicate_iri().expect("rule predicates are IRIs");
    let source = if delta_at == Some(k) { delta.get(pred) } else { base.by_predicate.get(pred) };
    for &idx in source.into_iter().flatten() {
        let mut b = bindings.clone();
        if pattern.unify_into(&base.facts[idx].triple, &mut b) {
            premises.push(idx);
            join(base, patterns, delta_at, delta, k + 1, &b, premises, emit);
            premises.pop();
        }
    }
}

fn filters_hold(rule: &Rule, base: &FactBase, b: &Bindings) -> bool {
    rule.body.iter().all(|clause| match clause {
        BodyClause::Positive(_) => true,
        BodyClause::Negated(t) => !base.contains(&t.substitute(b)),
        BodyClause::Builtin(op, x, y) => op.eval(&substitute_term(x, b), &substitute_term(y, b)),
    })
}

fn instantiate(head: &Triple, b: &Bindings) -> Option<Triple> {
    let t = head.substitute(b);
    let valid = t.is_ground() && t.subject.is_resource() && !matches!(t.subject, Term::Blank(_))
        && !matches!(t.object, Term::Blank(_));
    valid.then_some(t)
}

/// Evaluates one round of `rules`. With `delta` absent every rule is
/// joined against the full base.
fn round(base: &FactBase, rules: &[&Rule], delta: Option<&Delta>, seen: &HashSet<Triple>) -> Vec<Pending> {
    let mut out: Vec<Pending> = Vec::new();
    let mut fresh: HashSet<Triple> = HashSet::new();
    let empty = Delta::new();
    for rule in rules {
        let positives: Vec<&Triple> = rule.positives().collect();
        let mut emit = |b: &Bindings, premises: &[usize]| {
            if !filters_hold(rule, base, b) {
                return;
            }
            for head in &rule.head {
                let Some(t) = instantiate(head, b) else {
                    debug!("rule {} produced an invalid head {}", rule.name, head.substitute(b));
                    continue;
                };
                if base.contains(&t) || seen.contains(&t) || !fresh.insert(t.clone()) {
                    continue;
                }
                let mut premises = premises.to_vec();
                premises.sort_unstable();
                premises.dedup();
                out.push(Pending { triple: t, premises, origin: rule.name.clone() });
            }
        };
        match delta {
            None => join(base, &positives, None, &empty, 0, &Bindings::new(), &mut Vec::new(), &mut emit),
            Some(delta) => {
                for i in 0..positives.len() {
                    let pred = positives[i].predicate_iri().expect("rule predicates are IRIs");
                    if delta.contains_key(pred) {
                        join(base, &positives, Some(i), delta, 0, &Bindings::new(), &mut Vec::new(), &mut emit);
                    }
                }
            }
        }
    }
    out
}

/// Saturates the active facts of `kb` under `rules`, asserting every new
/// conclusion as a Deduced interpreter statement produced at `now`.
pub fn infer(kb: &mut ContextKB, rules: &RuleSet, now: Timestamp) -> Result<DerivationResult, ReasonerError> {
    infer_bounded(kb, rules, now, FIXPOINT_BUDGET)
}

pub fn infer_bounded(
    kb: &mut ContextKB,
    rules: &RuleSet,
    now: Timestamp,
    budget: usize,
) -> Result<DerivationResult, ReasonerError> {
    let mut base = FactBase::load(kb, now);
    let mut result = DerivationResult::default();
    let mut seen: HashSet<Triple> = HashSet::new();
    for stratum in 0..rules.stratum_count() {
        let stratum_rules: Vec<&Rule> = rules.stratum(stratum).collect();
        let mut delta: Option<Delta> = None;
        loop {
            result.iterations += 1;
            if result.iterations > budget {
                return Err(ReasonerError::FixpointBudgetExceeded(budget));
            }
            let pending = round(&base, &stratum_rules, delta.as_ref(), &seen);
            trace!("stratum {stratum} round {}: {} new", result.iterations, pending.len());
            if pending.is_empty() {
                break;
            }
            let mut next = Delta::new();
            for p in pending {
                seen.insert(p.triple.clone());
                let (certainty, explicit) = p.premises.iter().fold((100.0_f64, false), |(c, e), &i| {
                    let f = &base.facts[i];
                    (c.min(f.certainty), e || f.explicit_certainty)
                });
                let mut stmt =
                    ContextStatement::new(p.triple.clone(), Classification::Deduced, vocab::INTERPRETER_ID).at(now);
                if explicit {
                    stmt = stmt.with_qoc(QualityConstraint::new().with_certainty(certainty).expect("certainty in range"));
                }
                let (_, id) = kb.assert_with_id(stmt.clone())?;
                let premises: Vec<StmtId> = p.premises.iter().map(|&i| base.facts[i].id).collect();
                kb.set_support(id, Support { origin: p.origin.clone(), premises });
                if kb.is_hidden(id) {
                    continue;
                }
                let idx = base.push(id, &stmt);
                if let Some(pred) = p.triple.predicate_iri() {
                    next.entry(pred.clone()).or_default().push(idx);
                }
                result.added.push(Derivation { id, statement: stmt, origin: p.origin });
            }
            delta = Some(next);
        }
    }
    Ok(result)
}

/// Closes `changed` under rule dependencies (body predicate to head
/// predicate) and declared `socam:dependsOn` links.
pub fn affected_predicates(kb: &ContextKB, rules: &RuleSet, changed: &BTreeSet<Iri>) -> BTreeSet<Iri> {
    let mut affected = changed.clone();
    loop {
        let before = affected.len();
        for rule in rules.rules() {
            if rule.body_predicates().iter().any(|p| affected.contains(*p)) {
                affected.extend(rule.head_predicates().into_iter().cloned());
            }
        }
        for decl in kb.schemas().properties() {
            if decl.depends_on.iter().any(|d| affected.contains(d)) {
                affected.insert(decl.iri.clone());
            }
        }
        if affected.len() == before {
            return affected;
        }
    }
}

fn is_deduced_by_interpreter(s: &ContextStatement) -> bool {
    s.classification == Classification::Deduced && s.provider == vocab::INTERPRETER_ID
}

/// Retracts Deduced statements that may no longer hold after `changed`
/// predicates moved, plus any whose recorded premises are gone or inactive,
/// then re-derives.
pub fn maintain(
    kb: &mut ContextKB,
    rules: &RuleSet,
    changed: &BTreeSet<Iri>,
    now: Timestamp,
) -> Result<DerivationResult, ReasonerError> {
    let affected = affected_predicates(kb, rules, changed);
    let mut result = DerivationResult::default();
    let mut doomed: Vec<StmtId> = kb
        .entries()
        .filter(|(_, s)| is_deduced_by_interpreter(s) && s.triple.predicate_iri().is_some_and(|p| affected.contains(p)))
        .map(|(id, _)| id)
        .collect();
    loop {
        for id in doomed.drain(..) {
            let origin = kb.support(id).map_or_else(String::new, |s| s.origin.clone());
            if let Some(statement) = kb.remove(id) {
                result.retracted.push(Derivation { id, statement, origin });
            }
        }
        doomed = kb
            .entries()
            .filter(|(id, s)| {
                is_deduced_by_interpreter(s)
                    && kb.support(*id).is_some_and(|sup| sup.premises.iter().any(|p| !kb.is_active(*p, now)))
            })
            .map(|(id, _)| id)
            .collect();
        if doomed.is_empty() {
            break;
        }
    }
    result.extend(infer(kb, rules, now)?);
    Ok(result)
}
