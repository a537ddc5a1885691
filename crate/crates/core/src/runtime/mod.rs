//! Providers, the interpreter cycle, the service locating service and
//! context-aware services.

mod log;
mod registry;
mod service;
mod trace;

use std::collections::{BTreeMap, BTreeSet};

use ::log::{debug, info, warn};
use thiserror::Error;

use crate::conflict::{self, Resolution};
use crate::kb::{ContextKB, KbError, QueryMatch, QueryOptions, StmtId};
use crate::ontology::{self, ModuleId, OntologyError, Schema};
use crate::qoc::{parse_qoc, QocError};
use crate::reasoner::{aggregate, maintain, ReasonerError, RuleSet};
use crate::statement::{Classification, ContextStatement, StatementKey, Timestamp};
use crate::term::{Bindings, Iri, Term, Triple};
use crate::turtle::ParseError;
use crate::vocab;

pub use self::log::{render_query, render_records, LogFormat, LogHeader, LogRecord};
pub use registry::{ServiceEntry, ServiceRegistry, ServiceType};
pub use service::{ActionRecord, ActionTemplate, ContextAwareService, ContextProvider, Phase, ProviderKind, Subscription};
pub use trace::{parse_trace, EventKind, Trace, TraceError, TraceEvent};

/// Resolve/aggregate/maintain rounds allowed per cycle before giving up
/// on a stable state.
pub const SETTLE_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Qoc(#[from] QocError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("service id {0:?} is already advertised")]
    DuplicateServiceId(String),
    #[error("event {index} at {found} ms comes after an event at {previous} ms")]
    UnsortedTrace { index: usize, previous: Timestamp, found: Timestamp },
    #[error("no stable state after {0} resolve/maintain rounds")]
    Unsettled(usize),
}

/// Everything one cycle changed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CycleReport {
    pub time: Timestamp,
    /// Statements that became query-visible.
    pub added: Vec<ContextStatement>,
    /// Statements that stopped being query-visible.
    pub retracted: Vec<ContextStatement>,
    /// Conflict resolutions that are new or changed.
    pub resolutions: Vec<Resolution>,
    pub actions: Vec<ActionRecord>,
    pub records: Vec<LogRecord>,
    /// Events that failed and were skipped, by event source line.
    pub errors: Vec<(usize, RuntimeError)>,
}

type Visible = BTreeMap<StatementKey, (StmtId, ContextStatement)>;
type ResolutionState = BTreeMap<(Term, Iri), (StatementKey, BTreeSet<StatementKey>)>;

fn visible(kb: &ContextKB, now: Timestamp) -> Visible {
    kb.active_ids(now)
        .into_iter()
        .map(|id| {
            let s = kb.get(id).expect("active ids are stored").clone();
            (s.key(), (id, s))
        })
        .collect()
}

/// Predicates whose visible statements differ, ignoring production time.
fn changed_predicates(before: &Visible, after: &Visible) -> BTreeSet<Iri> {
    let same = |a: &ContextStatement, b: &ContextStatement| a.classification == b.classification && a.qoc == b.qoc;
    let mut out = BTreeSet::new();
    for (key, (_, s)) in before {
        if !after.get(key).is_some_and(|(_, t)| same(s, t)) {
            out.extend(s.triple.predicate_iri().cloned());
        }
    }
    for (key, (_, s)) in after {
        if !before.contains_key(key) {
            out.extend(s.triple.predicate_iri().cloned());
        }
    }
    out
}

/// The context interpreter with its registry, providers and services.
#[derive(Debug, Clone)]
pub struct Engine {
    kb: ContextKB,
    rules: RuleSet,
    registry: ServiceRegistry,
    providers: BTreeMap<String, ContextProvider>,
    services: BTreeMap<String, ContextAwareService>,
    matches: BTreeMap<String, BTreeMap<StatementKey, Bindings>>,
    visible: Visible,
    origins: BTreeMap<StatementKey, String>,
    resolutions: ResolutionState,
    now: Timestamp,
    cycles: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(false)
    }
}

impl Engine {
    pub fn new(strict: bool) -> Self {
        let mut kb = ContextKB::new();
        kb.set_strict(strict);
        let mut registry = ServiceRegistry::new();
        registry
            .advertise(ServiceEntry::new(vocab::INTERPRETER_ID, ServiceType::Interpreter))
            .expect("empty registry");
        Engine {
            kb,
            rules: RuleSet::empty(),
            registry,
            providers: BTreeMap::new(),
            services: BTreeMap::new(),
            matches: BTreeMap::new(),
            visible: Visible::new(),
            origins: BTreeMap::new(),
            resolutions: ResolutionState::new(),
            now: 0,
            cycles: 0,
        }
    }

    pub fn kb(&self) -> &ContextKB {
        &self.kb
    }

    pub fn kb_mut(&mut self) -> &mut ContextKB {
        &mut self.kb
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn registry(&self) -> &ServiceRegistry {
        &self.registry
    }

    pub fn services(&self) -> impl Iterator<Item = &ContextAwareService> {
        self.services.values()
    }

    pub fn now(&self) -> Timestamp {
        self.now
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    pub fn plug(&mut self, schema: Schema) -> Result<(), RuntimeError> {
        info!("plugging {}", schema.module_id);
        Ok(ontology::plug(&mut self.kb, schema)?)
    }

    /// Unplugs a module and removes its statements; dependent derivations
    /// are withdrawn on the next cycle.
    pub fn unplug(&mut self, id: &ModuleId) -> Result<Vec<ContextStatement>, RuntimeError> {
        info!("unplugging {id}");
        Ok(ontology::unplug(&mut self.kb, id)?)
    }

    /// Installs rules, checking rule heads against the plugged schemas
    /// when there are any.
    pub fn load_rules(&mut self, rules: RuleSet) -> Result<(), RuntimeError> {
        if !self.kb.schemas().is_empty() {
            rules.check_heads(self.kb.schemas())?;
        }
        self.rules = rules;
        Ok(())
    }

    pub fn add_provider(&mut self, provider: ContextProvider) -> Result<(), RuntimeError> {
        self.registry.advertise(provider.entry())?;
        self.providers.insert(provider.id.clone(), provider);
        Ok(())
    }

    pub fn provider(&self, id: &str) -> Option<&ContextProvider> {
        self.providers.get(id)
    }

    pub fn add_service(&mut self, service: ContextAwareService) -> Result<(), RuntimeError> {
        self.registry.advertise(service.entry())?;
        self.matches.insert(service.id.clone(), BTreeMap::new());
        self.services.insert(service.id.clone(), service);
        Ok(())
    }

    /// Query-visible statements at the engine's current time.
    pub fn query(&self, pattern: &Triple) -> Vec<QueryMatch> {
        self.kb.query(pattern, QueryOptions::visible(self.now))
    }

    fn note_provider(&mut self, id: &str, predicate: Option<&Iri>) -> Result<(), RuntimeError> {
        if !self.providers.contains_key(id) {
            debug!("advertising unknown provider {id} as internal");
            self.add_provider(ContextProvider::new(id, ProviderKind::Internal))?;
        }
        if let Some(p) = predicate {
            let provider = self.providers.get_mut(id).expect("just ensured");
            if provider.predicates.insert(p.clone()) {
                if let Some(entry) = self.registry.get_mut(id) {
                    entry.add("predicate", p.local_name());
                }
            }
        }
        Ok(())
    }

    fn apply(&mut self, event: &TraceEvent, records: &mut Vec<LogRecord>) -> Result<(), RuntimeError> {
        match &event.kind {
            EventKind::Assert { triple, provider, classification, qoc } => {
                let predicate = triple.predicate_iri();
                let class = match classification {
                    Some(c) => *c,
                    None => predicate.and_then(|p| self.kb.schemas().classify(p).ok()).unwrap_or(Classification::Sensed),
                };
                let constraint = parse_qoc(qoc, true)?.constraint;
                let mut stmt = ContextStatement::new(triple.clone(), class, provider.as_str()).at(event.time);
                if !constraint.is_empty() {
                    stmt = stmt.with_qoc(constraint);
                }
                self.kb.assert(stmt.clone())?;
                self.note_provider(provider, predicate.cloned().as_ref())?;
                records.push(LogRecord::Assert { time: self.now, statement: stmt });
            }
            EventKind::Retract { pattern, provider } => {
                let hits: Vec<QueryMatch> = self
                    .kb
                    .query(pattern, QueryOptions::raw())
                    .into_iter()
                    .filter(|m| provider.as_ref().is_none_or(|p| &m.statement.provider == p))
                    .collect();
                if hits.is_empty() {
                    debug!("retract at line {} matched nothing", event.line);
                }
                for m in hits {
                    if let Some(statement) = self.kb.remove(m.id) {
                        records.push(LogRecord::Retract { time: self.now, statement });
                    }
                }
            }
        }
        Ok(())
    }

    /// One cycle for one event.
    pub fn step(&mut self, event: &TraceEvent) -> CycleReport {
        self.step_batch(std::slice::from_ref(event))
    }

    /// A cycle without events, e.g. to let statements expire.
    pub fn tick(&mut self, time: Timestamp) -> CycleReport {
        self.run_cycle(time, &[])
    }

    /// Applies `events` in order, then runs one cycle at the latest event
    /// time.
    pub fn step_batch(&mut self, events: &[TraceEvent]) -> CycleReport {
        let time = events.iter().map(|e| e.time).max().unwrap_or(self.now);
        self.run_cycle(time, events)
    }

    fn run_cycle(&mut self, time: Timestamp, events: &[TraceEvent]) -> CycleReport {
        self.cycles += 1;
        self.now = self.now.max(time);
        self.kb.advance_clock(self.now);
        let now = self.now;
        let mut report = CycleReport { time: now, ..CycleReport::default() };

        for event in events {
            if let Err(e) = self.apply(event, &mut report.records) {
                warn!("line {}: event skipped: {e}", event.line);
                report.errors.push((event.line, e));
            }
        }

        let resolutions = match self.settle(now) {
            Ok(r) => r,
            Err((r, e)) => {
                warn!("cycle at {now}: {e}");
                report.errors.push((0, e));
                r
            }
        };
        let after = visible(&self.kb, now);

        let mut state = ResolutionState::new();
        for r in resolutions {
            let key = (r.subject.clone(), r.predicate.clone());
            let value = (r.winner.1.key(), r.losers.iter().map(|(_, s)| s.key()).collect::<BTreeSet<_>>());
            if self.resolutions.get(&key) != Some(&value) {
                report.records.push(LogRecord::ConflictResolved {
                    time: now,
                    subject: r.subject.clone(),
                    predicate: Term::Iri(r.predicate.clone()),
                    winner: r.winner.1.clone(),
                    losers: r.losers.iter().map(|(_, s)| s.clone()).collect(),
                });
                report.resolutions.push(r);
            }
            state.insert(key, value);
        }
        self.resolutions = state;

        let mut gone: Vec<&(StmtId, ContextStatement)> =
            self.visible.iter().filter(|(k, _)| !after.contains_key(*k)).map(|(_, v)| v).collect();
        gone.sort_by_key(|(id, _)| *id);
        for (_, s) in gone {
            if s.provider == vocab::INTERPRETER_ID {
                let origin = self.origins.get(&s.key()).cloned().unwrap_or_default();
                report.records.push(LogRecord::UndoDerive { time: now, statement: s.clone(), origin });
            }
            report.retracted.push(s.clone());
        }
        let mut fresh: Vec<&(StmtId, ContextStatement)> =
            after.iter().filter(|(k, _)| !self.visible.contains_key(*k)).map(|(_, v)| v).collect();
        fresh.sort_by_key(|(id, _)| *id);
        for (id, s) in fresh {
            if s.provider == vocab::INTERPRETER_ID {
                let origin = self.kb.support(*id).map(|sup| sup.origin.clone()).unwrap_or_default();
                report.records.push(LogRecord::Derive { time: now, statement: s.clone(), origin });
            }
            report.added.push(s.clone());
        }

        for service in self.services.values() {
            let current: BTreeMap<StatementKey, Bindings> = after
                .iter()
                .filter_map(|(k, (_, s))| service.subscription.matches(s).map(|b| (k.clone(), b)))
                .collect();
            let previous = self.matches.get(&service.id).cloned().unwrap_or_default();
            for (key, b) in &previous {
                if !current.contains_key(key) {
                    report.actions.push(service.record(now, Phase::Deactivate, b));
                }
            }
            for (key, b) in &current {
                if !previous.contains_key(key) {
                    report.actions.push(service.record(now, Phase::Activate, b));
                }
            }
            self.matches.insert(service.id.clone(), current);
        }
        report.records.extend(report.actions.iter().cloned().map(LogRecord::Action));

        self.origins = after
            .iter()
            .filter(|(_, (_, s))| s.provider == vocab::INTERPRETER_ID)
            .filter_map(|(k, (id, _))| self.kb.support(*id).map(|sup| (k.clone(), sup.origin.clone())))
            .collect();
        self.visible = after;
        report
    }

    /// Alternates conflict resolution, aggregation and truth maintenance
    /// until a round changes nothing. Returns the final resolutions.
    #[allow(clippy::type_complexity)]
    fn settle(&mut self, now: Timestamp) -> Result<Vec<Resolution>, (Vec<Resolution>, RuntimeError)> {
        let mut snapshot = self.visible.clone();
        let mut resolutions = Vec::new();
        for round in 0..SETTLE_LIMIT {
            resolutions = conflict::resolve_all(&mut self.kb, now);
            for spec in self.rules.aggregations().to_vec() {
                if let Err(e) = aggregate(&mut self.kb, &spec, now) {
                    return Err((resolutions, e.into()));
                }
            }
            let current = visible(&self.kb, now);
            let changed = changed_predicates(&snapshot, &current);
            if round > 0 && changed.is_empty() {
                return Ok(resolutions);
            }
            debug!("round {round}: changed {:?}", changed.iter().map(Iri::local_name).collect::<Vec<_>>());
            if let Err(e) = maintain(&mut self.kb, &self.rules, &changed, now) {
                return Err((resolutions, e.into()));
            }
            snapshot = visible(&self.kb, now);
        }
        Err((resolutions, RuntimeError::Unsettled(SETTLE_LIMIT)))
    }

    /// Folds [`step`](Self::step) over the trace and concatenates the
    /// cycle records.
    pub fn run_trace(&mut self, trace: &Trace) -> Result<Vec<LogRecord>, RuntimeError> {
        if let Some(i) = trace.first_unsorted() {
            return Err(RuntimeError::UnsortedTrace { index: i, previous: trace.events[i - 1].time, found: trace.events[i].time });
        }
        let mut log = Vec::new();
        for event in &trace.events {
            log.extend(self.step(event).records);
        }
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reasoner::parse_rules;

    fn home(local: &str) -> Term {
        Term::iri(&format!("{}{local}", vocab::HOME_NS))
    }

    fn located(t: Timestamp, who: &str, room: &str, provider: &str) -> TraceEvent {
        TraceEvent::assert(t, Triple::new(home(who), home("locatedAt"), home(room)), provider)
    }

    fn monitor() -> ContextAwareService {
        ContextAwareService::new(
            "baby-monitor",
            Subscription::new(Triple::new(home("Julia"), home("locatedAt"), Term::var("r"))).classified(Classification::Sensed),
            ActionTemplate::new("SwitchChannel", &["r"]),
        )
    }

    #[test]
    fn empty_trace_does_nothing() {
        let mut e = Engine::new(false);
        assert!(e.run_trace(&Trace::default()).unwrap().is_empty());
        assert_eq!(e.cycles(), 0);
    }

    #[test]
    fn subscription_activation_and_deactivation() {
        let mut e = Engine::new(false);
        e.add_service(monitor()).unwrap();
        let r = e.step(&located(0, "Julia", "Kitchen", "rfid2"));
        assert_eq!(r.actions.len(), 1);
        assert_eq!(r.actions[0].params["r"], home("Kitchen"));
        let r = e.step(&TraceEvent::retract(10, Triple::new(home("Julia"), home("locatedAt"), Term::var("o")), None));
        assert_eq!(r.actions.len(), 1);
        assert_eq!(r.actions[0].phase, Phase::Deactivate);
        let r = e.step(&located(20, "Julia", "LivingRoom", "rfid2"));
        assert_eq!((r.actions[0].phase, &r.actions[0].params["r"]), (Phase::Activate, &home("LivingRoom")));
    }

    #[test]
    fn unknown_providers_are_advertised() {
        let mut e = Engine::new(false);
        e.step(&located(0, "John", "Hall", "rfid1"));
        let hits = e.registry().lookup(&[("predicate", "locatedAt")]);
        assert_eq!(hits.len(), 1);
        assert_eq!(e.provider("rfid1").unwrap().kind, ProviderKind::Internal);
        assert!(matches!(e.add_provider(ContextProvider::new("rfid1", ProviderKind::Internal)), Err(RuntimeError::DuplicateServiceId(_))));
    }

    #[test]
    fn erroring_event_is_skipped() {
        let mut e = Engine::new(true);
        let r = e.step(&located(0, "John", "Hall", "rfid1"));
        assert_eq!(r.errors.len(), 1);
        assert!(matches!(r.errors[0].1, RuntimeError::Kb(KbError::UndeclaredPredicate(_))));
        assert!(e.kb().is_empty());
        let r = e.step(&TraceEvent::assert(1, Triple::new(home("John"), Term::iri(vocab::RDF_TYPE), home("Person")), "user"));
        assert!(r.errors.is_empty());
    }

    #[test]
    fn unsorted_trace() {
        let mut e = Engine::new(false);
        let trace = Trace::new(vec![located(5, "a", "b", "p"), located(1, "a", "c", "p")]);
        assert_eq!(e.run_trace(&trace), Err(RuntimeError::UnsortedTrace { index: 1, previous: 5, found: 1 }));
    }

    #[test]
    fn derivations_are_logged_once() {
        let mut e = Engine::new(false);
        e.load_rules(parse_rules("[r: (?p home:locatedAt home:Bed) -> (?p home:personStatus \"Resting\")]").unwrap()).unwrap();
        let r = e.step(&located(0, "John", "Bed", "rfid1"));
        assert_eq!(r.records.iter().filter(|r| r.kind() == "derive").count(), 1);
        let r = e.step(&located(5, "John", "Bed", "rfid1"));
        assert_eq!(r.records.iter().filter(|r| r.kind() == "derive").count(), 0);
        let r = e.step(&TraceEvent::retract(9, Triple::new(home("John"), Term::var("p"), Term::var("o")), Some("rfid1")));
        assert_eq!(r.records.iter().filter(|r| r.kind() == "undo-derive").count(), 1);
    }

    #[test]
    fn expiry_needs_no_event() {
        let mut e = Engine::new(false);
        e.add_service(monitor()).unwrap();
        e.step(&located(0, "Julia", "Kitchen", "rfid2").with_qoc("lifetime", "100ms"));
        assert!(e.tick(100).actions.is_empty());
        let r = e.tick(101);
        assert_eq!(r.actions.len(), 1);
        assert_eq!(r.actions[0].phase, Phase::Deactivate);
    }
}
