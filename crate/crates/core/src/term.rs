//! RDF-style atoms: IRIs, literals, blank nodes and rule variables.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid IRI {0:?}: IRIs must be non-empty and contain no whitespace or angle brackets")]
    InvalidIri(String),
    #[error("lexical form {lexical:?} is not a valid {datatype}")]
    InvalidLexical { lexical: String, datatype: String },
}

/// Literal datatype tag. The four built-ins are validated; anything else is
/// carried as an opaque IRI string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datatype {
    String,
    Integer,
    Double,
    Boolean,
    Other(String),
}

impl Datatype {
    pub fn from_iri(iri: &str) -> Self {
        match iri {
            vocab::XSD_STRING => Datatype::String,
            vocab::XSD_INTEGER => Datatype::Integer,
            vocab::XSD_DOUBLE => Datatype::Double,
            vocab::XSD_BOOLEAN => Datatype::Boolean,
            other => Datatype::Other(other.to_owned()),
        }
    }

    pub fn iri(&self) -> &str {
        match self {
            Datatype::String => vocab::XSD_STRING,
            Datatype::Integer => vocab::XSD_INTEGER,
            Datatype::Double => vocab::XSD_DOUBLE,
            Datatype::Boolean => vocab::XSD_BOOLEAN,
            Datatype::Other(iri) => iri,
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.iri())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
}

impl Literal {
    pub fn new(lexical: impl Into<String>, datatype: Datatype) -> Result<Self, TermError> {
        let lexical = lexical.into();
        let ok = match datatype {
            Datatype::Integer => lexical.parse::<i64>().is_ok(),
            Datatype::Double => lexical.parse::<f64>().is_ok(),
            Datatype::Boolean => lexical == "true" || lexical == "false",
            Datatype::String | Datatype::Other(_) => true,
        };
        if !ok {
            return Err(TermError::InvalidLexical { lexical, datatype: datatype.to_string() });
        }
        Ok(Literal { lexical, datatype })
    }

    pub fn string(value: impl Into<String>) -> Self {
        Literal { lexical: value.into(), datatype: Datatype::String }
    }

    pub fn integer(value: i64) -> Self {
        Literal { lexical: value.to_string(), datatype: Datatype::Integer }
    }

    pub fn boolean(value: bool) -> Self {
        Literal { lexical: value.to_string(), datatype: Datatype::Boolean }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Datatype {
        &self.datatype
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self.datatype {
            Datatype::Integer | Datatype::Double => self.lexical.parse().ok(),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.datatype {
            Datatype::Boolean => self.lexical.parse().ok(),
            _ => None,
        }
    }

    /// Value comparison for builtins. `None` when the datatypes differ.
    pub fn compare(&self, other: &Literal) -> Option<Ordering> {
        if self.datatype != other.datatype {
            return None;
        }
        match self.datatype {
            Datatype::Integer => {
                let a: i64 = self.lexical.parse().ok()?;
                let b: i64 = other.lexical.parse().ok()?;
                Some(a.cmp(&b))
            }
            Datatype::Double => self.as_f64()?.partial_cmp(&other.as_f64()?),
            Datatype::Boolean => Some(self.as_bool()?.cmp(&other.as_bool()?)),
            Datatype::String | Datatype::Other(_) => Some(self.lexical.cmp(&other.lexical)),
        }
    }
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.datatype {
            Datatype::String => f.write_str(&escape_string(&self.lexical)),
            dt => write!(f, "{}^^<{}>", escape_string(&self.lexical), dt.iri()),
        }
    }
}

/// An absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(iri: impl Into<String>) -> Result<Self, TermError> {
        let iri = iri.into();
        if iri.is_empty() || iri.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"')) {
            return Err(TermError::InvalidIri(iri));
        }
        Ok(Iri(iri))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        match self.0.rfind(['#', '/']) {
            Some(i) if i + 1 < self.0.len() => &self.0[i + 1..],
            _ => &self.0,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(String),
    Literal(Literal),
    /// Only valid inside rule and query patterns.
    Variable(String),
}

impl Term {
    /// Builds an IRI term, panicking on malformed input. Meant for constants.
    pub fn iri(iri: &str) -> Term {
        Term::Iri(Iri::new(iri).expect("valid IRI constant"))
    }

    pub fn var(name: &str) -> Term {
        Term::Variable(name.to_owned())
    }

    pub fn string(value: &str) -> Term {
        Term::Literal(Literal::string(value))
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, Term::Variable(_))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Term::Iri(_) | Term::Blank(_))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::Blank(name) => write!(f, "_:{name}"),
            Term::Literal(l) => l.fmt(f),
            Term::Variable(v) => write!(f, "?{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Triple { subject, predicate, object }
    }

    pub fn is_ground(&self) -> bool {
        self.subject.is_ground() && self.predicate.is_ground() && self.object.is_ground()
    }

    pub fn predicate_iri(&self) -> Option<&Iri> {
        self.predicate.as_iri()
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Unifies this pattern with a ground triple, extending `bindings`.
    /// Returns false (leaving `bindings` possibly extended) on mismatch;
    /// callers clone first when they need the original.
    pub fn unify_into(&self, ground: &Triple, bindings: &mut Bindings) -> bool {
        unify_term(&self.subject, &ground.subject, bindings)
            && unify_term(&self.predicate, &ground.predicate, bindings)
            && unify_term(&self.object, &ground.object, bindings)
    }

    pub fn unify(&self, ground: &Triple) -> Option<Bindings> {
        let mut b = Bindings::new();
        self.unify_into(ground, &mut b).then_some(b)
    }

    pub fn substitute(&self, bindings: &Bindings) -> Triple {
        Triple {
            subject: substitute_term(&self.subject, bindings),
            predicate: substitute_term(&self.predicate, bindings),
            object: substitute_term(&self.object, bindings),
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.terms().into_iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.subject, self.predicate, self.object)
    }
}

pub type Bindings = BTreeMap<String, Term>;

fn unify_term(pattern: &Term, ground: &Term, bindings: &mut Bindings) -> bool {
    match pattern {
        Term::Variable(v) => match bindings.get(v) {
            Some(bound) => bound == ground,
            None => {
                bindings.insert(v.clone(), ground.clone());
                true
            }
        },
        t => t == ground,
    }
}

pub(crate) fn substitute_term(term: &Term, bindings: &Bindings) -> Term {
    match term {
        Term::Variable(v) => bindings.get(v).cloned().unwrap_or_else(|| term.clone()),
        t => t.clone(),
    }
}

/// Prefix → namespace map used for parsing qnames and compacting output.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMap {
    map: BTreeMap<String, String>,
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// rdf, rdfs, owl, xsd, socam and home.
    pub fn standard() -> Self {
        let mut p = PrefixMap::new();
        p.insert("rdf", vocab::RDF_NS);
        p.insert("rdfs", vocab::RDFS_NS);
        p.insert("owl", vocab::OWL_NS);
        p.insert("xsd", vocab::XSD_NS);
        p.insert("socam", vocab::SOCAM_NS);
        p.insert("home", vocab::HOME_NS);
        p
    }

    pub fn insert(&mut self, prefix: &str, namespace: &str) {
        self.map.insert(prefix.to_owned(), namespace.to_owned());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.map.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn extend(&mut self, other: &PrefixMap) {
        for (k, v) in other.iter() {
            self.insert(k, v);
        }
    }

    /// Compacts an IRI into `prefix:local` using the longest matching
    /// namespace whose remainder is a legal local name.
    pub fn compact(&self, iri: &Iri) -> Option<String> {
        let s = iri.as_str();
        self.map
            .iter()
            .filter(|(_, ns)| s.starts_with(ns.as_str()) && is_local_name(&s[ns.len()..]))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(a.0)))
            .map(|(prefix, ns)| format!("{prefix}:{}", &s[ns.len()..]))
    }

    pub fn render_term(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.compact(iri).unwrap_or_else(|| iri.to_string()),
            Term::Literal(l) => match l.datatype() {
                Datatype::String => escape_string(l.lexical()),
                Datatype::Integer | Datatype::Boolean => l.lexical().to_owned(),
                dt => {
                    let dt_iri = Iri(dt.iri().to_owned());
                    let dt_str = self.compact(&dt_iri).unwrap_or_else(|| dt_iri.to_string());
                    format!("{}^^{}", escape_string(l.lexical()), dt_str)
                }
            },
            other => other.to_string(),
        }
    }

    pub fn render_triple(&self, t: &Triple) -> String {
        format!(
            "{} {} {}",
            self.render_term(&t.subject),
            self.render_term(&t.predicate),
            self.render_term(&t.object)
        )
    }
}

pub(crate) fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Local part of a qname: empty, or `[A-Za-z0-9_][A-Za-z0-9_-]*` not ending in `-`.
pub(crate) fn is_local_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
            chars.all(is_name_char) && !s.ends_with('-')
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_rejects_whitespace_and_empty() {
        assert!(Iri::new("").is_err());
        assert!(Iri::new("http://a b").is_err());
        assert!(Iri::new("http://socam.example/ns#Person").is_ok());
    }

    #[test]
    fn literal_lexical_validation() {
        assert!(Literal::new("12", Datatype::Integer).is_ok());
        assert!(Literal::new("1.5", Datatype::Integer).is_err());
        assert!(Literal::new("1.5", Datatype::Double).is_ok());
        assert!(Literal::new("yes", Datatype::Boolean).is_err());
        assert!(Literal::new("anything", Datatype::Other("http://x/t".into())).is_ok());
    }

    #[test]
    fn literal_equality_is_lexical_and_datatype() {
        let a = Literal::new("01", Datatype::Integer).unwrap();
        let b = Literal::new("1", Datatype::Integer).unwrap();
        assert_ne!(a, b);
        assert_ne!(Literal::string("1"), Literal::integer(1));
        assert_eq!(a.compare(&b), Some(Ordering::Equal));
        assert_eq!(Literal::string("1").compare(&Literal::integer(1)), None);
    }

    #[test]
    fn unify_binds_repeated_variable_consistently() {
        let p = Triple::new(Term::var("x"), Term::iri("http://e/p"), Term::var("x"));
        let a = Term::iri("http://e/a");
        let b = Term::iri("http://e/b");
        let g1 = Triple::new(a.clone(), Term::iri("http://e/p"), a.clone());
        let g2 = Triple::new(a.clone(), Term::iri("http://e/p"), b);
        assert_eq!(p.unify(&g1).unwrap().get("x"), Some(&a));
        assert!(p.unify(&g2).is_none());
    }

    #[test]
    fn compact_prefers_longest_namespace() {
        let mut p = PrefixMap::new();
        p.insert("e", "http://e/");
        p.insert("ens", "http://e/ns#");
        assert_eq!(p.compact(&Iri::new("http://e/ns#x").unwrap()).unwrap(), "ens:x");
        assert_eq!(p.compact(&Iri::new("http://e/y").unwrap()).unwrap(), "e:y");
        assert!(p.compact(&Iri::new("http://e/a.b").unwrap()).is_none());
    }

    #[test]
    fn local_name_rules() {
        assert!(is_local_name("MasterBedroom-Smith"));
        assert!(is_local_name(""));
        assert!(is_local_name("0abc"));
        assert!(!is_local_name("-x"));
        assert!(!is_local_name("x-"));
        assert!(!is_local_name("a.b"));
    }
}
