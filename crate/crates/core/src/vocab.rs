//! Namespace and vocabulary IRIs.

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
pub const SOCAM_NS: &str = "http://socam.example/ns#";
pub const HOME_NS: &str = "http://socam.example/home#";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const RDFS_COMMENT: &str = "http://www.w3.org/2000/01/rdf-schema#comment";

pub const OWL_ONTOLOGY: &str = "http://www.w3.org/2002/07/owl#Ontology";
pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
pub const OWL_FUNCTIONAL_PROPERTY: &str = "http://www.w3.org/2002/07/owl#FunctionalProperty";

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";

pub const SOCAM_CLASSIFIED_AS: &str = "http://socam.example/ns#classifiedAs";
pub const SOCAM_DEPENDS_ON: &str = "http://socam.example/ns#dependsOn";
pub const SOCAM_FUNCTIONAL: &str = "http://socam.example/ns#functional";
pub const SOCAM_SENSED: &str = "http://socam.example/ns#Sensed";
pub const SOCAM_DEFINED: &str = "http://socam.example/ns#Defined";
pub const SOCAM_AGGREGATED: &str = "http://socam.example/ns#Aggregated";
pub const SOCAM_DEDUCED: &str = "http://socam.example/ns#Deduced";
pub const SOCAM_CONTEXT_ENTITY: &str = "http://socam.example/ns#ContextEntity";

/// Provider id carried by every statement the interpreter derives.
pub const INTERPRETER_ID: &str = "interpreter";

/// Predicates usable without any schema declaring them.
pub fn is_builtin_predicate(iri: &str) -> bool {
    matches!(iri, RDF_TYPE | RDFS_LABEL | RDFS_COMMENT)
}
