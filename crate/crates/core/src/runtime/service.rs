use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::registry::{ServiceEntry, ServiceType};
use crate::statement::{Classification, ContextStatement, Timestamp};
use crate::term::{Bindings, Iri, Term, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProviderKind {
    Internal,
    External,
}

impl ProviderKind {
    pub fn name(self) -> &'static str {
        match self {
            ProviderKind::Internal => "internal",
            ProviderKind::External => "external",
        }
    }
}

/// A source of direct context. Served predicates are advertised by local
/// name under the `predicate` attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextProvider {
    pub id: String,
    pub kind: ProviderKind,
    pub predicates: BTreeSet<Iri>,
    pub scope: Option<String>,
}

impl ContextProvider {
    pub fn new(id: &str, kind: ProviderKind) -> Self {
        ContextProvider { id: id.to_owned(), kind, predicates: BTreeSet::new(), scope: None }
    }

    pub fn serving(mut self, predicate: Iri) -> Self {
        self.predicates.insert(predicate);
        self
    }

    pub fn scoped(mut self, scope: &str) -> Self {
        self.scope = Some(scope.to_owned());
        self
    }

    pub fn entry(&self) -> ServiceEntry {
        let mut e = ServiceEntry::new(&self.id, ServiceType::Provider).with("kind", self.kind.name());
        for p in &self.predicates {
            e.add("predicate", p.local_name());
        }
        if let Some(scope) = &self.scope {
            e.add("scope", scope);
        }
        e
    }
}

/// What a service listens for.
#[derive(Debug, Clone, PartialEq)]
pub struct Subscription {
    pub pattern: Triple,
    pub classification: Option<Classification>,
    pub min_certainty: Option<f64>,
}

impl Subscription {
    pub fn new(pattern: Triple) -> Self {
        Subscription { pattern, classification: None, min_certainty: None }
    }

    pub fn classified(mut self, class: Classification) -> Self {
        self.classification = Some(class);
        self
    }

    pub fn min_certainty(mut self, certainty: f64) -> Self {
        self.min_certainty = Some(certainty);
        self
    }

    pub fn matches(&self, stmt: &ContextStatement) -> Option<Bindings> {
        if self.classification.is_some_and(|c| c != stmt.classification) {
            return None;
        }
        if self.min_certainty.is_some_and(|m| stmt.effective_certainty() < m) {
            return None;
        }
        self.pattern.unify(&stmt.triple)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionTemplate {
    pub action: String,
    /// Variables passed as parameters; empty passes every binding.
    pub params: Vec<String>,
}

impl ActionTemplate {
    pub fn new(action: &str, params: &[&str]) -> Self {
        ActionTemplate { action: action.to_owned(), params: params.iter().map(|p| (*p).to_owned()).collect() }
    }

    fn instantiate(&self, b: &Bindings) -> BTreeMap<String, Term> {
        if self.params.is_empty() {
            return b.clone();
        }
        self.params.iter().filter_map(|p| b.get(p).map(|t| (p.clone(), t.clone()))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextAwareService {
    pub id: String,
    pub subscription: Subscription,
    pub template: ActionTemplate,
}

impl ContextAwareService {
    pub fn new(id: &str, subscription: Subscription, template: ActionTemplate) -> Self {
        ContextAwareService { id: id.to_owned(), subscription, template }
    }

    pub fn entry(&self) -> ServiceEntry {
        ServiceEntry::new(&self.id, ServiceType::ApplicationService).with("action", &self.template.action)
    }

    pub(crate) fn record(&self, time: Timestamp, phase: Phase, b: &Bindings) -> ActionRecord {
        ActionRecord {
            time,
            service_id: self.id.clone(),
            action: self.template.action.clone(),
            phase,
            params: self.template.instantiate(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Activate,
    Deactivate,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Activate => "activate",
            Phase::Deactivate => "deactivate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionRecord {
    pub time: Timestamp,
    pub service_id: String,
    pub action: String,
    pub phase: Phase,
    pub params: BTreeMap<String, Term>,
}
