//! Parser and serializer for the Turtle subset used by ontology assets.
//!
//! Supported: `@prefix`, `;` and `,` continuations, `a`, `<iri>`,
//! `prefix:local`, `_:label`, plain/typed string literals, integers,
//! decimals, booleans and `#` comments. Bracketed anonymous nodes and
//! collections are not part of the subset.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::lexer::{self, LexError, Pos, Tok, Token};
use crate::term::{Datatype, Iri, Literal, PrefixMap, Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownPrefix(String),
    UnterminatedLiteral,
}

/// Parse failure with a 1-based location inside the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownPrefix(p) => write!(f, "unknown prefix {p:?}"),
            ParseErrorKind::UnterminatedLiteral => f.write_str("unterminated string literal"),
        }
    }
}

impl ParseError {
    pub(crate) fn at(pos: Pos, kind: ParseErrorKind) -> Self {
        ParseError { kind, line: pos.line, col: pos.col }
    }

    pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        Self::at(pos, ParseErrorKind::Syntax(msg.into()))
    }

    /// Shifts the location, for parsers that tokenize a fragment of a
    /// larger file.
    pub(crate) fn offset(mut self, line: usize, col: usize) -> Self {
        if self.line == 1 {
            self.col += col - 1;
        }
        self.line += line - 1;
        self
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        let pos = e.pos();
        match e {
            LexError::UnterminatedLiteral { .. } => ParseError::at(pos, ParseErrorKind::UnterminatedLiteral),
            other => ParseError::syntax(pos, other.to_string()),
        }
    }
}

/// Token cursor shared by the text parsers.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    at: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Cursor { tokens: lexer::tokenize(text)?, at: 0 })
    }

    pub(crate) fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    pub(crate) fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if &t.tok == tok {
            Ok(t)
        } else {
            Err(ParseError::syntax(t.pos, format!("expected {what}, found {}", t.tok)))
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    /// `@prefix p: <ns> .`; the directive token has already been consumed.
    pub(crate) fn prefix_decl(&mut self, prefixes: &mut PrefixMap) -> Result<(), ParseError> {
        let name = self.next();
        let prefix = match name.tok {
            Tok::PName { prefix, local } if local.is_empty() => prefix,
            other => return Err(ParseError::syntax(name.pos, format!("expected prefix name, found {other}"))),
        };
        let ns = self.next();
        let Tok::IriRef(ns_iri) = ns.tok else {
            return Err(ParseError::syntax(ns.pos, format!("expected namespace IRI, found {}", ns.tok)));
        };
        self.expect(&Tok::Dot, "'.' after prefix declaration")?;
        prefixes.insert(&prefix, &ns_iri);
        Ok(())
    }
}

pub(crate) fn resolve_iri(tok: &Token, prefixes: &PrefixMap) -> Result<Option<Iri>, ParseError> {
    let raw = match &tok.tok {
        Tok::IriRef(iri) => iri.clone(),
        Tok::PName { prefix, local } => {
            let ns = prefixes
                .get(prefix)
                .ok_or_else(|| ParseError::at(tok.pos, ParseErrorKind::UnknownPrefix(prefix.clone())))?;
            format!("{ns}{local}")
        }
        _ => return Ok(None),
    };
    Iri::new(raw).map(Some).map_err(|e| ParseError::syntax(tok.pos, e.to_string()))
}

/// Parses one term starting at the cursor. Variables are accepted only
/// when `allow_vars` is set.
pub(crate) fn parse_term(cur: &mut Cursor, prefixes: &PrefixMap, allow_vars: bool) -> Result<Term, ParseError> {
    let tok = cur.next();
    if let Some(iri) = resolve_iri(&tok, prefixes)? {
        return Ok(Term::Iri(iri));
    }
    let bad_literal = |e: crate::term::TermError| ParseError::syntax(tok.pos, e.to_string());
    match &tok.tok {
        Tok::Blank(name) if !name.is_empty() => Ok(Term::Blank(name.clone())),
        Tok::Var(v) if allow_vars => Ok(Term::Variable(v.clone())),
        Tok::Str(s) => {
            if cur.eat(&Tok::Carets) {
                let dt_tok = cur.next();
                let dt = resolve_iri(&dt_tok, prefixes)?
                    .ok_or_else(|| ParseError::syntax(dt_tok.pos, format!("expected datatype IRI, found {}", dt_tok.tok)))?;
                Literal::new(s.clone(), Datatype::from_iri(dt.as_str())).map(Term::Literal).map_err(bad_literal)
            } else {
                Ok(Term::Literal(Literal::string(s.clone())))
            }
        }
        Tok::Integer(n) => Literal::new(n.clone(), Datatype::Integer).map(Term::Literal).map_err(bad_literal),
        Tok::Double(n) => Literal::new(n.clone(), Datatype::Double).map(Term::Literal).map_err(bad_literal),
        Tok::Word(w) if w == "true" || w == "false" => Ok(Term::Literal(Literal::boolean(w == "true"))),
        other => Err(ParseError::syntax(tok.pos, format!("expected a term, found {other}"))),
    }
}

/// A parsed ontology or instance file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub prefixes: PrefixMap,
    /// Triples in document order.
    pub triples: Vec<Triple>,
}

impl Document {
    pub fn new(prefixes: PrefixMap) -> Self {
        Document { prefixes, triples: Vec::new() }
    }

    pub fn triple_set(&self) -> BTreeSet<Triple> {
        self.triples.iter().cloned().collect()
    }

    pub fn objects<'a>(&'a self, subject: &'a Term, predicate: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples
            .iter()
            .filter(move |t| &t.subject == subject && t.predicate_iri().is_some_and(|p| p.as_str() == predicate))
            .map(|t| &t.object)
    }
}

pub fn parse(text: &str) -> Result<Document, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut doc = Document::default();
    while !cur.at_eof() {
        let tok = cur.peek().clone();
        match &tok.tok {
            Tok::Directive(d) if d == "prefix" => {
                cur.next();
                cur.prefix_decl(&mut doc.prefixes)?;
            }
            Tok::Directive(d) => return Err(ParseError::syntax(tok.pos, format!("unsupported directive @{d}"))),
            _ => parse_triples(&mut cur, &mut doc)?,
        }
    }
    Ok(doc)
}

fn parse_triples(cur: &mut Cursor, doc: &mut Document) -> Result<(), ParseError> {
    let subj_tok = cur.peek().clone();
    let subject = parse_term(cur, &doc.prefixes, false)?;
    if !subject.is_resource() {
        return Err(ParseError::syntax(subj_tok.pos, "subject must be an IRI or blank node"));
    }
    loop {
        let verb_tok = cur.peek().clone();
        let predicate = if verb_tok.tok == Tok::Word("a".into()) {
            cur.next();
            Term::iri(vocab::RDF_TYPE)
        } else {
            let p = parse_term(cur, &doc.prefixes, false)?;
            if p.as_iri().is_none() {
                return Err(ParseError::syntax(verb_tok.pos, "predicate must be an IRI"));
            }
            p
        };
        loop {
            let object = parse_term(cur, &doc.prefixes, false)?;
            doc.triples.push(Triple::new(subject.clone(), predicate.clone(), object));
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        if cur.eat(&Tok::Semi) {
            // A trailing ';' before '.' is legal Turtle.
            if cur.peek().tok == Tok::Dot {
                break;
            }
            continue;
        }
        break;
    }
    cur.expect(&Tok::Dot, "'.', ';' or ','")?;
    Ok(())
}

/// Deterministic rendering: prefix header, then subjects in lexicographic
/// order with predicates grouped and objects sorted.
pub fn serialize(doc: &Document) -> String {
    let mut out = String::new();
    for (prefix, ns) in doc.prefixes.iter() {
        out.push_str(&format!("@prefix {prefix}: <{ns}> .\n"));
    }
    // `a` sorts ahead of every other predicate.
    let mut grouped: BTreeMap<String, BTreeMap<(bool, String), BTreeSet<String>>> = BTreeMap::new();
    for t in &doc.triples {
        let predicate = match t.predicate_iri() {
            Some(p) if p.as_str() == vocab::RDF_TYPE => (false, "a".to_owned()),
            _ => (true, doc.prefixes.render_term(&t.predicate)),
        };
        grouped
            .entry(render(&doc.prefixes, &t.subject))
            .or_default()
            .entry(predicate)
            .or_default()
            .insert(render(&doc.prefixes, &t.object));
    }
    if !grouped.is_empty() && !doc.prefixes.is_empty() {
        out.push('\n');
    }
    for (subject, predicates) in grouped {
        out.push_str(&subject);
        let count = predicates.len();
        for (i, ((_, predicate), objects)) in predicates.into_iter().enumerate() {
            let objects: Vec<_> = objects.into_iter().collect();
            out.push_str(if i == 0 { " " } else { "    " });
            out.push_str(&predicate);
            out.push(' ');
            out.push_str(&objects.join(" , "));
            out.push_str(if i + 1 == count { " .\n" } else { " ;\n" });
        }
    }
    out
}

fn render(prefixes: &PrefixMap, term: &Term) -> String {
    match term {
        Term::Literal(l) if *l.datatype() == Datatype::Double && is_plain_decimal(l.lexical()) => l.lexical().to_owned(),
        _ => prefixes.render_term(term),
    }
}

/// Whether a double's lexical form re-lexes as a bare decimal token.
fn is_plain_decimal(s: &str) -> bool {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            int.chars().all(|c| c.is_ascii_digit()) && !frac.is_empty() && frac.chars().all(|c| c.is_ascii_digit())
        }
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "@prefix : <http://socam.example/home#> .\n\
                          @prefix socam: <http://socam.example/ns#> .\n";

    #[test]
    fn single_typed_individual() {
        let doc = parse(&format!("{HEADER}:John a :Person .")).unwrap();
        assert_eq!(
            doc.triples,
            vec![Triple::new(
                Term::iri("http://socam.example/home#John"),
                Term::iri(vocab::RDF_TYPE),
                Term::iri("http://socam.example/home#Person"),
            )]
        );
    }

    #[test]
    fn dependency_declaration_expands_continuations() {
        let text = format!(
            "{HEADER}:feasible socam:classifiedAs socam:Deduced ;\n    socam:dependsOn :locatedAt , :weatherCond ."
        );
        let doc = parse(&text).unwrap();
        assert_eq!(doc.triples.len(), 3);
        let feasible = Term::iri("http://socam.example/home#feasible");
        let deps: Vec<_> = doc.objects(&feasible, vocab::SOCAM_DEPENDS_ON).collect();
        assert_eq!(
            deps,
            vec![&Term::iri("http://socam.example/home#locatedAt"), &Term::iri("http://socam.example/home#weatherCond")]
        );
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse("").unwrap(), Document::default());
        assert_eq!(parse("  # only a comment\n").unwrap(), Document::default());
    }

    #[test]
    fn literals_of_every_kind() {
        let doc = parse(&format!(
            "{HEADER}@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
             :x :s \"a \\\"q\\\"\" ; :i -3 ; :d 2.5 ; :b true ; :t \"7\"^^xsd:integer ; :o \"m\"^^<http://x/unit> ."
        ))
        .unwrap();
        let objs: Vec<_> = doc.triples.iter().map(|t| t.object.clone()).collect();
        assert_eq!(objs[0], Term::string("a \"q\""));
        assert_eq!(objs[1], Term::Literal(Literal::integer(-3)));
        assert_eq!(objs[2], Term::Literal(Literal::new("2.5", Datatype::Double).unwrap()));
        assert_eq!(objs[3], Term::Literal(Literal::boolean(true)));
        assert_eq!(objs[4], Term::Literal(Literal::integer(7)));
        assert_eq!(objs[5], Term::Literal(Literal::new("m", Datatype::Other("http://x/unit".into())).unwrap()));
    }

    #[test]
    fn blank_nodes() {
        let doc = parse(&format!("{HEADER}_:q socam:value 50 .")).unwrap();
        assert_eq!(doc.triples[0].subject, Term::Blank("q".into()));
    }

    #[test]
    fn unknown_prefix_location() {
        let err = parse("@prefix a: <http://a/> .\n  a:x foo:y a:z .").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownPrefix("foo".into()));
        assert_eq!((err.line, err.col), (2, 7));
    }

    #[test]
    fn unterminated_literal() {
        let err = parse(&format!("{HEADER}:x :p \"open")).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnterminatedLiteral);
        assert_eq!(err.line, 3);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse(&format!("{HEADER}:x :p :o :extra .")).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        assert_eq!((err.line, err.col), (3, 10));
        let err = parse(&format!("{HEADER}:x :p [ :q :r ] .")).unwrap_err();
        assert_eq!((err.line, err.col), (3, 7));
        let err = parse(&format!("{HEADER}\"lit\" :p :o .")).unwrap_err();
        assert_eq!((err.line, err.col), (3, 1));
        let err = parse(&format!("{HEADER}:x :p \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> ; :q \"no\"^^<http://www.w3.org/2001/XMLSchema#boolean> .")).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn empty_document_serializes_to_header() {
        let doc = Document::new(parse(HEADER).unwrap().prefixes);
        assert_eq!(serialize(&doc), HEADER.replace("                          ", ""));
    }

    #[test]
    fn serialize_is_a_fixpoint() {
        let doc = parse(&format!("{HEADER}:John a :Person .")).unwrap();
        let once = serialize(&doc);
        let twice = serialize(&parse(&once).unwrap());
        assert_eq!(once, twice);
        assert_eq!(parse(&once).unwrap().triple_set(), doc.triple_set());
    }

    #[test]
    fn serialize_groups_and_sorts() {
        let doc = parse(&format!("{HEADER}:b :p :z , :y .\n:a :q 1 ; a :C .")).unwrap();
        let text = serialize(&doc);
        let body: Vec<_> = text.lines().skip(3).collect();
        assert_eq!(body, vec![":a a :C ;", "    :q 1 .", ":b :p :y , :z ."]);
    }

    #[test]
    fn uncompactable_iris_use_brackets() {
        let mut doc = Document::default();
        doc.triples.push(Triple::new(Term::iri("http://x/a.b"), Term::iri("http://x/p"), Term::string("v")));
        let text = serialize(&doc);
        assert_eq!(text, "<http://x/a.b> <http://x/p> \"v\" .\n");
        assert_eq!(parse(&text).unwrap().triple_set(), doc.triple_set());
    }
}
