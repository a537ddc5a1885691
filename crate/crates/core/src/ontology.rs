//! Schema registry: class hierarchy plus property declarations carrying
//! classification, dependency and functionality annotations.
//!
//! Schemas are loaded from turtle documents that use `rdf:type owl:Class`,
//! `rdfs:subClassOf`, `owl:ObjectProperty`/`owl:DatatypeProperty`,
//! `rdfs:domain`/`rdfs:range` and the `socam:classifiedAs`,
//! `socam:dependsOn` and `socam:functional` annotations. Each document
//! names itself with exactly one `owl:Ontology` subject; that IRI is the
//! module id used to unplug it later.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::kb::ContextKB;
use crate::statement::{Classification, ContextStatement};
use crate::term::{Iri, Term};
use crate::turtle::Document;
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("subClassOf cycle: {}", join(.0))]
    CyclicHierarchy(Vec<Iri>),
    #[error("property {property} depends on undeclared property {target}")]
    DanglingDependsOn { property: Iri, target: Iri },
    #[error("property {0} has no socam:classifiedAs")]
    MissingClassification(Iri),
    #[error("property {0} has more than one classification")]
    ConflictingClassification(Iri),
    #[error("{subject}: {value} is not a classification")]
    InvalidClassification { subject: Iri, value: String },
    #[error("{subject} refers to undeclared class {target}")]
    UnresolvedClass { subject: Iri, target: Iri },
    #[error("{subject}: annotation {annotation} on something that is not a declared property")]
    NotAProperty { subject: Iri, annotation: Iri },
    #[error("{0}")]
    Malformed(String),
    #[error("document declares no owl:Ontology module id")]
    MissingModuleId,
    #[error("document declares several owl:Ontology module ids")]
    AmbiguousModuleId,
    #[error("module {0} is already plugged")]
    DuplicateModule(ModuleId),
    #[error("{iri} is declared by both {existing} and {incoming}")]
    DuplicateDeclaration { iri: Iri, existing: ModuleId, incoming: ModuleId },
    #[error("cannot unplug {module}: {dependents:?} depend on it")]
    DependencyViolation { module: ModuleId, dependents: Vec<ModuleId> },
    #[error("module {0} is not plugged")]
    UnknownModule(ModuleId),
    #[error("unknown class {0}")]
    UnknownClass(Iri),
    #[error("unknown property {0}")]
    UnknownProperty(Iri),
}

fn join(iris: &[Iri]) -> String {
    iris.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(" -> ")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModuleId(pub String);

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModuleId {
    fn from(s: &str) -> Self {
        ModuleId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Object,
    Datatype,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDecl {
    pub iri: Iri,
    pub kind: PropertyKind,
    pub domains: BTreeSet<Iri>,
    pub ranges: BTreeSet<Iri>,
    pub classified_as: Classification,
    pub depends_on: BTreeSet<Iri>,
    pub functional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub module_id: ModuleId,
    pub classes: BTreeSet<Iri>,
    /// `(subclass, superclass)` edges.
    pub subclass_of: BTreeSet<(Iri, Iri)>,
    pub properties: BTreeMap<Iri, PropertyDecl>,
    /// Non-fatal findings (domain/range problems, defaulted classifications).
    pub warnings: Vec<String>,
}

impl Schema {
    pub fn declares(&self, iri: &Iri) -> bool {
        self.classes.contains(iri) || self.properties.contains_key(iri)
    }

    /// Classes and properties this schema mentions but does not declare.
    fn external_references(&self) -> BTreeSet<&Iri> {
        let mut refs = BTreeSet::new();
        refs.extend(self.subclass_of.iter().map(|(_, sup)| sup));
        for p in self.properties.values() {
            refs.extend(&p.domains);
            refs.extend(&p.ranges);
            refs.extend(&p.depends_on);
        }
        refs.retain(|iri| !self.declares(iri));
        refs
    }
}

fn is_datatype_iri(iri: &Iri) -> bool {
    iri.as_str().starts_with(vocab::XSD_NS) || iri.as_str() == "http://www.w3.org/2000/01/rdf-schema#Literal"
}

/// Builds a schema from a parsed document. Cross-references may point into
/// `loaded`; the combined class graph must stay acyclic.
pub fn load_schema(doc: &Document, loaded: &SchemaSet, strict: bool) -> Result<Schema, OntologyError> {
    let iri_object = |t: &crate::term::Triple| -> Result<Iri, OntologyError> {
        t.object.as_iri().cloned().ok_or_else(|| {
            OntologyError::Malformed(format!(
                "{} {}: expected an IRI object, found {}",
                t.subject, t.predicate, t.object
            ))
        })
    };

    let mut module_ids = BTreeSet::new();
    let mut classes = BTreeSet::new();
    let mut subclass_of = BTreeSet::new();
    let mut kinds: BTreeMap<Iri, PropertyKind> = BTreeMap::new();
    let mut functional_types = BTreeSet::new();

    for t in &doc.triples {
        let (Some(subject), Some(predicate)) = (t.subject.as_iri(), t.predicate_iri()) else { continue };
        match predicate.as_str() {
            vocab::RDF_TYPE => match t.object.as_iri().map(Iri::as_str) {
                Some(vocab::OWL_ONTOLOGY) => {
                    module_ids.insert(subject.clone());
                }
                Some(vocab::OWL_CLASS) => {
                    classes.insert(subject.clone());
                }
                Some(vocab::OWL_OBJECT_PROPERTY) => {
                    kinds.insert(subject.clone(), PropertyKind::Object);
                }
                Some(vocab::OWL_DATATYPE_PROPERTY) => {
                    kinds.insert(subject.clone(), PropertyKind::Datatype);
                }
                Some(vocab::OWL_FUNCTIONAL_PROPERTY) => {
                    functional_types.insert(subject.clone());
                }
                _ => {}
            },
            vocab::RDFS_SUBCLASS_OF => {
                classes.insert(subject.clone());
                subclass_of.insert((subject.clone(), iri_object(t)?));
            }
            _ => {}
        }
    }

    let module_id = match module_ids.len() {
        0 => return Err(OntologyError::MissingModuleId),
        1 => ModuleId(module_ids.into_iter().next().unwrap().as_str().to_owned()),
        _ => return Err(OntologyError::AmbiguousModuleId),
    };

    let mut warnings = Vec::new();
    let mut properties = BTreeMap::new();
    for (iri, kind) in &kinds {
        let subject = Term::Iri(iri.clone());
        let mut classifications = BTreeSet::new();
        for value in doc.objects(&subject, vocab::SOCAM_CLASSIFIED_AS) {
            let class = value.as_iri().and_then(|v| Classification::from_iri(v.as_str())).ok_or_else(|| {
                OntologyError::InvalidClassification { subject: iri.clone(), value: value.to_string() }
            })?;
            classifications.insert(class);
        }
        let classified_as = match classifications.len() {
            1 => classifications.into_iter().next().unwrap(),
            0 if strict => return Err(OntologyError::MissingClassification(iri.clone())),
            0 => {
                warnings.push(format!("{iri}: no classification, defaulting to Sensed"));
                Classification::Sensed
            }
            _ => return Err(OntologyError::ConflictingClassification(iri.clone())),
        };
        let collect = |pred: &str| -> Result<BTreeSet<Iri>, OntologyError> {
            doc.objects(&subject, pred)
                .map(|o| {
                    o.as_iri().cloned().ok_or_else(|| OntologyError::Malformed(format!("{iri}: {pred} expects an IRI, found {o}")))
                })
                .collect()
        };
        let mut functional = functional_types.contains(iri);
        for flag in doc.objects(&subject, vocab::SOCAM_FUNCTIONAL) {
            match flag.as_literal().and_then(|l| l.as_bool()) {
                Some(b) => functional |= b,
                None => return Err(OntologyError::Malformed(format!("{iri}: socam:functional expects a boolean, found {flag}"))),
            }
        }
        properties.insert(
            iri.clone(),
            PropertyDecl {
                iri: iri.clone(),
                kind: *kind,
                domains: collect(vocab::RDFS_DOMAIN)?,
                ranges: collect(vocab::RDFS_RANGE)?,
                classified_as,
                depends_on: collect(vocab::SOCAM_DEPENDS_ON)?,
                functional,
            },
        );
    }

    // Annotations only make sense on declared properties.
    for t in &doc.triples {
        let (Some(subject), Some(predicate)) = (t.subject.as_iri(), t.predicate_iri()) else { continue };
        let is_annotation = matches!(
            predicate.as_str(),
            vocab::SOCAM_CLASSIFIED_AS | vocab::SOCAM_DEPENDS_ON | vocab::SOCAM_FUNCTIONAL | vocab::RDFS_DOMAIN | vocab::RDFS_RANGE
        );
        if is_annotation && !properties.contains_key(subject) {
            return Err(OntologyError::NotAProperty { subject: subject.clone(), annotation: predicate.clone() });
        }
    }

    let schema = Schema { module_id, classes, subclass_of, properties, warnings };
    check_references(&schema, loaded)?;
    let mut schema = schema;
    schema.warnings.extend(domain_range_warnings(&schema, loaded));
    for p in schema.properties.values() {
        if p.classified_as == Classification::Deduced && p.depends_on.is_empty() {
            schema.warnings.push(format!("{}: deduced property without socam:dependsOn", p.iri));
        }
    }
    Ok(schema)
}

fn check_references(schema: &Schema, loaded: &SchemaSet) -> Result<(), OntologyError> {
    for (sub, sup) in &schema.subclass_of {
        if !schema.classes.contains(sup) && !loaded.is_class(sup) {
            return Err(OntologyError::UnresolvedClass { subject: sub.clone(), target: sup.clone() });
        }
    }
    for p in schema.properties.values() {
        for target in &p.depends_on {
            if !schema.properties.contains_key(target) && loaded.property(target).is_none() {
                return Err(OntologyError::DanglingDependsOn { property: p.iri.clone(), target: target.clone() });
            }
        }
    }
    let mut edges: BTreeMap<&Iri, BTreeSet<&Iri>> = BTreeMap::new();
    for (sub, sup) in loaded.modules.iter().flat_map(|m| &m.subclass_of).chain(&schema.subclass_of) {
        edges.entry(sub).or_default().insert(sup);
    }
    if let Some(cycle) = find_cycle(&edges) {
        return Err(OntologyError::CyclicHierarchy(cycle));
    }
    Ok(())
}

fn domain_range_warnings(schema: &Schema, loaded: &SchemaSet) -> Vec<String> {
    let known = |c: &Iri| schema.classes.contains(c) || loaded.is_class(c);
    let mut out = Vec::new();
    for p in schema.properties.values() {
        for d in &p.domains {
            if !known(d) {
                out.push(format!("{}: domain {d} is not a declared class", p.iri));
            }
        }
        for r in &p.ranges {
            let ok = match p.kind {
                PropertyKind::Object => known(r),
                PropertyKind::Datatype => is_datatype_iri(r),
            };
            if !ok {
                out.push(format!("{}: range {r} does not fit a {:?} property", p.iri, p.kind));
            }
        }
    }
    out
}

/// Returns one cycle (first node repeated at the end) if the graph has any.
fn find_cycle<'a>(edges: &BTreeMap<&'a Iri, BTreeSet<&'a Iri>>) -> Option<Vec<Iri>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(
        node: &'a Iri,
        edges: &BTreeMap<&'a Iri, BTreeSet<&'a Iri>>,
        marks: &mut BTreeMap<&'a Iri, Mark>,
        stack: &mut Vec<&'a Iri>,
    ) -> Option<Vec<Iri>> {
        match marks.get(node) {
            Some(Mark::Done) => return None,
            Some(Mark::Active) => {
                let start = stack.iter().position(|n| *n == node).unwrap_or(0);
                let mut cycle: Vec<Iri> = stack[start..].iter().map(|n| (*n).clone()).collect();
                cycle.push(node.clone());
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(node, Mark::Active);
        stack.push(node);
        for next in edges.get(node).into_iter().flatten() {
            if let Some(c) = visit(next, edges, marks, stack) {
                return Some(c);
            }
        }
        stack.pop();
        marks.insert(node, Mark::Done);
        None
    }
    let mut marks = BTreeMap::new();
    for node in edges.keys() {
        if let Some(c) = visit(node, edges, &mut marks, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

/// The schemas currently plugged into a knowledge base, in plug order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaSet {
    modules: Vec<Schema>,
}

impl SchemaSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn modules(&self) -> impl Iterator<Item = &Schema> {
        self.modules.iter()
    }

    pub fn module(&self, id: &ModuleId) -> Option<&Schema> {
        self.modules.iter().find(|m| &m.module_id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn is_class(&self, iri: &Iri) -> bool {
        self.modules.iter().any(|m| m.classes.contains(iri))
    }

    pub fn property(&self, iri: &Iri) -> Option<&PropertyDecl> {
        self.modules.iter().find_map(|m| m.properties.get(iri))
    }

    pub fn properties(&self) -> impl Iterator<Item = &PropertyDecl> {
        self.modules.iter().flat_map(|m| m.properties.values())
    }

    pub fn is_functional(&self, predicate: &Iri) -> bool {
        self.property(predicate).is_some_and(|p| p.functional)
    }

    pub fn depends_on(&self, predicate: &Iri) -> Option<&BTreeSet<Iri>> {
        self.property(predicate).map(|p| &p.depends_on)
    }

    /// The declared classification of a property.
    pub fn classify(&self, predicate: &Iri) -> Result<Classification, OntologyError> {
        self.property(predicate)
            .map(|p| p.classified_as)
            .ok_or_else(|| OntologyError::UnknownProperty(predicate.clone()))
    }

    /// Reflexive-transitive closure of `rdfs:subClassOf` across all modules.
    pub fn is_subclass_of(&self, sub: &Iri, sup: &Iri) -> Result<bool, OntologyError> {
        for c in [sub, sup] {
            if !self.is_class(c) {
                return Err(OntologyError::UnknownClass(c.clone()));
            }
        }
        Ok(self.superclasses(sub).contains(sup))
    }

    /// All superclasses of `class`, including itself.
    pub fn superclasses(&self, class: &Iri) -> BTreeSet<Iri> {
        let mut seen = BTreeSet::from([class.clone()]);
        let mut queue = VecDeque::from([class.clone()]);
        while let Some(c) = queue.pop_front() {
            for (sub, sup) in self.modules.iter().flat_map(|m| &m.subclass_of) {
                if sub == &c && seen.insert(sup.clone()) {
                    queue.push_back(sup.clone());
                }
            }
        }
        seen
    }

    pub fn declaring_module(&self, iri: &Iri) -> Option<&ModuleId> {
        self.modules.iter().find(|m| m.declares(iri)).map(|m| &m.module_id)
    }

    /// Modules other than `id` that reference something `id` declares.
    pub fn dependents(&self, id: &ModuleId) -> Vec<ModuleId> {
        let Some(target) = self.module(id) else { return Vec::new() };
        self.modules
            .iter()
            .filter(|m| &m.module_id != id && m.external_references().iter().any(|r| target.declares(r)))
            .map(|m| m.module_id.clone())
            .collect()
    }

    pub fn plug(&mut self, schema: Schema) -> Result<(), OntologyError> {
        if self.module(&schema.module_id).is_some() {
            return Err(OntologyError::DuplicateModule(schema.module_id));
        }
        for iri in schema.classes.iter().chain(schema.properties.keys()) {
            // A class may be re-declared (e.g. a domain module repeating an
            // upper class); a property may not.
            let clash = if schema.properties.contains_key(iri) {
                self.modules.iter().find(|m| m.declares(iri))
            } else {
                self.modules.iter().find(|m| m.properties.contains_key(iri))
            };
            if let Some(existing) = clash {
                return Err(OntologyError::DuplicateDeclaration {
                    iri: iri.clone(),
                    existing: existing.module_id.clone(),
                    incoming: schema.module_id.clone(),
                });
            }
        }
        check_references(&schema, self)?;
        self.modules.push(schema);
        Ok(())
    }

    pub fn unplug(&mut self, id: &ModuleId) -> Result<Schema, OntologyError> {
        let idx = self
            .modules
            .iter()
            .position(|m| &m.module_id == id)
            .ok_or_else(|| OntologyError::UnknownModule(id.clone()))?;
        let dependents = self.dependents(id);
        if !dependents.is_empty() {
            return Err(OntologyError::DependencyViolation { module: id.clone(), dependents });
        }
        Ok(self.modules.remove(idx))
    }
}

/// Registers a schema with the knowledge base.
pub fn plug(kb: &mut ContextKB, schema: Schema) -> Result<(), OntologyError> {
    kb.schemas_mut().plug(schema)
}

/// Removes a schema and retracts every statement whose predicate, or whose
/// `rdf:type` object, it declared. Returns the retracted statements; the
/// caller is responsible for re-deriving.
pub fn unplug(kb: &mut ContextKB, id: &ModuleId) -> Result<Vec<ContextStatement>, OntologyError> {
    let schema = kb.schemas_mut().unplug(id)?;
    let removed = kb.retract_where(|s| {
        let t = &s.triple;
        let pred = t.predicate_iri();
        pred.is_some_and(|p| schema.properties.contains_key(p))
            || (pred.is_some_and(|p| p.as_str() == vocab::RDF_TYPE)
                && t.object.as_iri().is_some_and(|c| schema.classes.contains(c)))
    });
    Ok(removed)
}

/// Individuals that appear as statement subjects without being typed under
/// `socam:ContextEntity`.
pub fn untyped_individuals(kb: &ContextKB) -> BTreeSet<Term> {
    let root = Iri::new(vocab::SOCAM_CONTEXT_ENTITY).expect("constant");
    let schemas = kb.schemas();
    let mut typed = BTreeSet::new();
    let mut subjects = BTreeSet::new();
    for s in kb.statements() {
        let t = &s.triple;
        if t.predicate_iri().is_some_and(|p| p.as_str() == vocab::RDF_TYPE) {
            if t.object.as_iri().is_some_and(|c| schemas.superclasses(c).contains(&root)) {
                typed.insert(t.subject.clone());
            }
        } else {
            subjects.insert(t.subject.clone());
        }
    }
    subjects.retain(|s| !typed.contains(s));
    subjects
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turtle::parse;

    const PREFIXES: &str = "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n\
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
        @prefix socam: <http://socam.example/ns#> .\n\
        @prefix : <http://t.example/#> .\n";

    fn load(body: &str, loaded: &SchemaSet, strict: bool) -> Result<Schema, OntologyError> {
        load_schema(&parse(&format!("{PREFIXES}{body}")).unwrap(), loaded, strict)
    }

    fn iri(local: &str) -> Iri {
        Iri::new(format!("http://t.example/#{local}")).unwrap()
    }

    fn upper() -> Schema {
        load(
            "<http://t.example/upper> a owl:Ontology .\n\
             :ContextEntity a owl:Class .\n\
             :Person rdfs:subClassOf :ContextEntity .\n\
             :Location rdfs:subClassOf :ContextEntity .\n",
            &SchemaSet::new(),
            true,
        )
        .unwrap()
    }

    #[test]
    fn minimal_subclass() {
        let s = upper();
        assert_eq!(s.module_id, ModuleId::from("http://t.example/upper"));
        assert_eq!(s.subclass_of.len(), 2);
        assert!(s.classes.contains(&iri("Person")));
    }

    #[test]
    fn dependency_annotation() {
        let mut set = SchemaSet::new();
        set.plug(upper()).unwrap();
        let s = load(
            "<http://t.example/dom> a owl:Ontology .\n\
             :locatedAt a owl:ObjectProperty ; socam:classifiedAs socam:Sensed ; socam:functional true .\n\
             :weatherCond a owl:DatatypeProperty ; socam:classifiedAs socam:Sensed .\n\
             :feasible a owl:DatatypeProperty ; socam:classifiedAs socam:Deduced ;\n\
                 socam:dependsOn :locatedAt , :weatherCond .\n",
            &set,
            true,
        )
        .unwrap();
        let f = &s.properties[&iri("feasible")];
        assert_eq!(f.classified_as, Classification::Deduced);
        assert!(f.depends_on.contains(&iri("locatedAt")) && f.depends_on.contains(&iri("weatherCond")));
        assert!(s.properties[&iri("locatedAt")].functional);
        assert!(!s.properties[&iri("weatherCond")].functional);
    }

    #[test]
    fn dangling_depends_on() {
        let err = load(
            "<http://t.example/d> a owl:Ontology .\n\
             :feasible a owl:DatatypeProperty ; socam:classifiedAs socam:Deduced ; socam:dependsOn :nowhere .\n",
            &SchemaSet::new(),
            true,
        )
        .unwrap_err();
        assert_eq!(err, OntologyError::DanglingDependsOn { property: iri("feasible"), target: iri("nowhere") });
    }

    #[test]
    fn cyclic_hierarchy() {
        let err = load(
            "<http://t.example/c> a owl:Ontology .\n:A rdfs:subClassOf :B .\n:B rdfs:subClassOf :C .\n:C rdfs:subClassOf :A .\n",
            &SchemaSet::new(),
            true,
        )
        .unwrap_err();
        let OntologyError::CyclicHierarchy(cycle) = err else { panic!("{err:?}") };
        assert_eq!(cycle.first(), cycle.last());
        assert_eq!(cycle.len(), 4);
    }

    #[test]
    fn missing_classification_strict_and_default() {
        let body = "<http://t.example/m> a owl:Ontology .\n:p a owl:DatatypeProperty .\n";
        assert_eq!(load(body, &SchemaSet::new(), true).unwrap_err(), OntologyError::MissingClassification(iri("p")));
        let s = load(body, &SchemaSet::new(), false).unwrap();
        assert_eq!(s.properties[&iri("p")].classified_as, Classification::Sensed);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn conflicting_and_invalid_classification() {
        let conflicting = "<http://t.example/m> a owl:Ontology .\n:p a owl:DatatypeProperty ; socam:classifiedAs socam:Sensed , socam:Defined .\n";
        assert!(matches!(load(conflicting, &SchemaSet::new(), true), Err(OntologyError::ConflictingClassification(_))));
        let invalid = "<http://t.example/m> a owl:Ontology .\n:p a owl:DatatypeProperty ; socam:classifiedAs :Guessed .\n";
        assert!(matches!(load(invalid, &SchemaSet::new(), true), Err(OntologyError::InvalidClassification { .. })));
    }

    #[test]
    fn module_id_required() {
        assert_eq!(load(":A a owl:Class .", &SchemaSet::new(), true).unwrap_err(), OntologyError::MissingModuleId);
    }

    #[test]
    fn annotation_on_non_property() {
        let body = "<http://t.example/m> a owl:Ontology .\n:A a owl:Class ; socam:classifiedAs socam:Sensed .\n";
        assert!(matches!(load(body, &SchemaSet::new(), true), Err(OntologyError::NotAProperty { .. })));
    }

    #[test]
    fn unresolved_superclass() {
        let body = "<http://t.example/m> a owl:Ontology .\n:A rdfs:subClassOf :Missing .\n";
        assert!(matches!(load(body, &SchemaSet::new(), true), Err(OntologyError::UnresolvedClass { .. })));
    }

    #[test]
    fn subclass_closure_and_errors() {
        let mut set = SchemaSet::new();
        set.plug(upper()).unwrap();
        let dom = load(
            "<http://t.example/dom> a owl:Ontology .\n:FamilyMember rdfs:subClassOf :Person .\n",
            &set,
            true,
        )
        .unwrap();
        set.plug(dom).unwrap();
        assert!(set.is_subclass_of(&iri("FamilyMember"), &iri("ContextEntity")).unwrap());
        assert!(set.is_subclass_of(&iri("Person"), &iri("Person")).unwrap());
        assert!(!set.is_subclass_of(&iri("Person"), &iri("FamilyMember")).unwrap());
        assert!(!set.is_subclass_of(&iri("FamilyMember"), &iri("Location")).unwrap());
        assert_eq!(set.is_subclass_of(&iri("Nope"), &iri("Person")), Err(OntologyError::UnknownClass(iri("Nope"))));
        assert_eq!(set.classify(&iri("nope")), Err(OntologyError::UnknownProperty(iri("nope"))));
    }

    #[test]
    fn plug_unplug_inverse_and_dependencies() {
        let mut set = SchemaSet::new();
        set.plug(upper()).unwrap();
        let before = set.clone();
        let dom = load("<http://t.example/dom> a owl:Ontology .\n:Kid rdfs:subClassOf :Person .\n", &set, true).unwrap();
        set.plug(dom.clone()).unwrap();
        assert_eq!(set.plug(dom.clone()), Err(OntologyError::DuplicateModule(dom.module_id.clone())));
        let upper_id = ModuleId::from("http://t.example/upper");
        assert!(matches!(set.unplug(&upper_id), Err(OntologyError::DependencyViolation { .. })));
        set.unplug(&dom.module_id).unwrap();
        assert_eq!(set, before);
        assert!(matches!(set.unplug(&dom.module_id), Err(OntologyError::UnknownModule(_))));
    }

    #[test]
    fn duplicate_property_rejected() {
        let mut set = SchemaSet::new();
        let a = load("<http://t.example/a> a owl:Ontology .\n:p a owl:DatatypeProperty ; socam:classifiedAs socam:Sensed .\n", &set, true).unwrap();
        let b = load("<http://t.example/b> a owl:Ontology .\n:p a owl:DatatypeProperty ; socam:classifiedAs socam:Defined .\n", &set, true).unwrap();
        set.plug(a).unwrap();
        assert!(matches!(set.plug(b), Err(OntologyError::DuplicateDeclaration { .. })));
    }

    #[test]
    fn domain_range_problems_are_warnings() {
        let s = load(
            "<http://t.example/m> a owl:Ontology .\n\
             :p a owl:DatatypeProperty ; socam:classifiedAs socam:Sensed ; rdfs:domain :Ghost ; rdfs:range :Ghost .\n",
            &SchemaSet::new(),
            true,
        )
        .unwrap();
        assert_eq!(s.warnings.len(), 2);
    }
}
