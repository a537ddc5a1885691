use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::RuntimeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ServiceType {
    Provider,
    Interpreter,
    ApplicationService,
}

impl ServiceType {
    pub fn name(self) -> &'static str {
        match self {
            ServiceType::Provider => "provider",
            ServiceType::Interpreter => "interpreter",
            ServiceType::ApplicationService => "application-service",
        }
    }
}

impl fmt::Display for ServiceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An advertised component. Attributes may hold several values per key
/// (a provider serving several predicates); the `type` attribute is
/// always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceEntry {
    pub id: String,
    pub service_type: ServiceType,
    pub attributes: BTreeMap<String, BTreeSet<String>>,
}

impl ServiceEntry {
    pub fn new(id: &str, service_type: ServiceType) -> Self {
        let mut attributes = BTreeMap::new();
        attributes.insert("type".to_owned(), BTreeSet::from([service_type.name().to_owned()]));
        ServiceEntry { id: id.to_owned(), service_type, attributes }
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.add(key, value);
        self
    }

    pub fn add(&mut self, key: &str, value: &str) {
        self.attributes.entry(key.to_owned()).or_default().insert(value.to_owned());
    }

    /// True when every `(key, value)` is among the entry's attributes.
    pub fn satisfies(&self, query: &[(&str, &str)]) -> bool {
        query.iter().all(|(k, v)| self.attributes.get(*k).is_some_and(|vals| vals.contains(*v)))
    }
}

/// The service locating service.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ServiceRegistry {
    entries: BTreeMap<String, ServiceEntry>,
}

impl ServiceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advertise(&mut self, entry: ServiceEntry) -> Result<(), RuntimeError> {
        if self.entries.contains_key(&entry.id) {
            return Err(RuntimeError::DuplicateServiceId(entry.id));
        }
        self.entries.insert(entry.id.clone(), entry);
        Ok(())
    }

    pub fn withdraw(&mut self, id: &str) -> Option<ServiceEntry> {
        self.entries.remove(id)
    }

    pub fn get(&self, id: &str) -> Option<&ServiceEntry> {
        self.entries.get(id)
    }

    pub(crate) fn get_mut(&mut self, id: &str) -> Option<&mut ServiceEntry> {
        self.entries.get_mut(id)
    }

    /// Entries satisfying every query predicate, ordered by id.
    pub fn lookup(&self, query: &[(&str, &str)]) -> Vec<&ServiceEntry> {
        self.entries.values().filter(|e| e.satisfies(query)).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weather_provider_lookup() {
        let mut reg = ServiceRegistry::new();
        assert!(reg.lookup(&[("predicate", "weatherCond")]).is_empty());
        reg.advertise(ServiceEntry::new("weather-service", ServiceType::Provider).with("predicate", "weatherCond")).unwrap();
        reg.advertise(ServiceEntry::new("interpreter", ServiceType::Interpreter)).unwrap();
        let hits = reg.lookup(&[("predicate", "weatherCond")]);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].id, "weather-service");
        assert_eq!(reg.lookup(&[]).len(), 2);
        assert_eq!(reg.lookup(&[("type", "interpreter")]).len(), 1);
    }

    #[test]
    fn ordered_by_id_and_unique() {
        let mut reg = ServiceRegistry::new();
        reg.advertise(ServiceEntry::new("rfid1", ServiceType::Provider).with("predicate", "locatedAt")).unwrap();
        reg.advertise(ServiceEntry::new("btloc1", ServiceType::Provider).with("predicate", "locatedAt")).unwrap();
        let ids: Vec<&str> = reg.lookup(&[("predicate", "locatedAt")]).iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, vec!["btloc1", "rfid1"]);
        assert_eq!(
            reg.advertise(ServiceEntry::new("rfid1", ServiceType::Provider)),
            Err(RuntimeError::DuplicateServiceId("rfid1".into()))
        );
    }
}
