//! Context trace files: a prefix header followed by one event per line.
//!
//! ```text
//! @prefix home: <http://socam.example/home#> .
//! 0    assert home:John home:locatedAt home:MasterBedroom-Smith provider=rfid1 accuracy=80
//! 4000 retract home:John home:locatedAt * provider=rfid1
//! ```

use thiserror::Error;

use crate::lexer::Tok;
use crate::qoc::{parse_qoc, QocError};
use crate::statement::{Classification, Timestamp};
use crate::term::{PrefixMap, Term, Triple};
use crate::turtle::{parse_term, Cursor, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("line {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("line {line}: {source}")]
    Qoc { line: usize, source: QocError },
    #[error("line {line}: timestamp {found} is earlier than the preceding {previous}")]
    UnsortedTrace { line: usize, previous: Timestamp, found: Timestamp },
}

impl TraceError {
    fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        TraceError::Syntax { line, col, message: message.into() }
    }

    fn from_parse(e: ParseError, line: usize, col: usize) -> Self {
        let e = e.offset(line, col);
        TraceError::Syntax { line: e.line, col: e.col, message: e.kind.to_string() }
    }

    pub fn line(&self) -> usize {
        match self {
            TraceError::Syntax { line, .. } | TraceError::Qoc { line, .. } | TraceError::UnsortedTrace { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Assert {
        triple: Triple,
        provider: String,
        /// `None` means the predicate's declared classification.
        classification: Option<Classification>,
        qoc: Vec<(String, String)>,
    },
    /// `*` positions are variables in `pattern`.
    Retract { pattern: Triple, provider: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub time: Timestamp,
    pub kind: EventKind,
    /// Source line, 0 when built in code.
    pub line: usize,
}

impl TraceEvent {
    pub fn assert(time: Timestamp, triple: Triple, provider: &str) -> Self {
        TraceEvent {
            time,
            kind: EventKind::Assert { triple, provider: provider.to_owned(), classification: None, qoc: Vec::new() },
            line: 0,
        }
    }

    pub fn retract(time: Timestamp, pattern: Triple, provider: Option<&str>) -> Self {
        TraceEvent { time, kind: EventKind::Retract { pattern, provider: provider.map(str::to_owned) }, line: 0 }
    }

    pub fn with_class(mut self, class: Classification) -> Self {
        if let EventKind::Assert { classification, .. } = &mut self.kind {
            *classification = Some(class);
        }
        self
    }

    pub fn with_qoc(mut self, key: &str, value: &str) -> Self {
        if let EventKind::Assert { qoc, .. } = &mut self.kind {
            qoc.push((key.to_owned(), value.to_owned()));
        }
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub prefixes: PrefixMap,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new(events: Vec<TraceEvent>) -> Self {
        Trace { prefixes: PrefixMap::standard(), events }
    }

    /// Index of the first event whose time goes backwards.
    pub fn first_unsorted(&self) -> Option<usize> {
        self.events.windows(2).position(|w| w[1].time < w[0].time).map(|i| i + 1)
    }
}

/// Splits a line into whitespace-separated chunks, keeping quoted strings
/// and IRI references whole. Returns `(start column, chunk)` pairs.
fn chunks(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut in_string = false;
    let mut in_iri = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if start.is_none() {
            if c.is_whitespace() {
                continue;
            }
            start = Some(i);
        }
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        if in_iri {
            in_iri = c != '>';
            continue;
        }
        match c {
            '"' => in_string = true,
            '<' => in_iri = true,
            c if c.is_whitespace() => {
                let s = start.take().unwrap();
                out.push((s, &line[s..i]));
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(s, chunk)| (line[..s].chars().count() + 1, chunk)).collect()
}

fn strip_comment(line: &str) -> &str {
    let mut in_string = false;
    let mut in_iri = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
        } else if in_iri {
            in_iri = c != '>';
        } else {
            match c {
                '"' => in_string = true,
                '<' => in_iri = true,
                '#' => return &line[..i],
                _ => {}
            }
        }
    }
    line
}

fn parse_position(chunk: &str, col: usize, line: usize, prefixes: &PrefixMap, wildcard: Option<&str>) -> Result<Term, TraceError> {
    if chunk == "*" {
        return match wildcard {
            Some(var) => Ok(Term::var(var)),
            None => Err(TraceError::syntax(line, col, "'*' is only allowed in retract events")),
        };
    }
    let mut cur = Cursor::new(chunk).map_err(|e| TraceError::from_parse(e, line, col))?;
    let term = parse_term(&mut cur, prefixes, false).map_err(|e| TraceError::from_parse(e, line, col))?;
    if !cur.at_eof() {
        return Err(TraceError::syntax(line, col, format!("unexpected text after term in {chunk:?}")));
    }
    Ok(term)
}

/// Parses a trace and checks that timestamps never decrease.
pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    let mut prefixes = PrefixMap::standard();
    let mut events = Vec::new();
    let mut previous: Option<Timestamp> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        if line.trim_start().starts_with('@') {
            let col = line.len() - line.trim_start().len() + 1;
            let mut cur = Cursor::new(line.trim_start()).map_err(|e| TraceError::from_parse(e, line_no, col))?;
            let directive = cur.next();
            match directive.tok {
                Tok::Directive(d) if d == "prefix" => {
                    cur.prefix_decl(&mut prefixes).map_err(|e| TraceError::from_parse(e, line_no, col))?
                }
                other => return Err(TraceError::syntax(line_no, col, format!("unknown directive {other}"))),
            }
            if !cur.at_eof() {
                return Err(TraceError::syntax(line_no, col, "unexpected text after @prefix declaration"));
            }
            continue;
        }
        let parts = chunks(line);
        let (tcol, tchunk) = parts[0];
        let time: Timestamp = tchunk
            .parse()
            .map_err(|_| TraceError::syntax(line_no, tcol, format!("expected a millisecond timestamp, found {tchunk:?}")))?;
        if let Some(prev) = previous {
            if time < prev {
                return Err(TraceError::UnsortedTrace { line: line_no, previous: prev, found: time });
            }
        }
        previous = Some(time);
        let Some(&(vcol, verb)) = parts.get(1) else {
            return Err(TraceError::syntax(line_no, tcol, "expected assert or retract after the timestamp"));
        };
        let retract = match verb {
            "assert" => false,
            "retract" => true,
            other => return Err(TraceError::syntax(line_no, vcol, format!("unknown event kind {other:?}"))),
        };
        if parts.len() < 5 {
            return Err(TraceError::syntax(line_no, vcol, "expected subject, predicate and object"));
        }
        let mut terms = Vec::new();
        for (i, var) in ["s", "p", "o"].iter().enumerate() {
            let (col, chunk) = parts[2 + i];
            terms.push(parse_position(chunk, col, line_no, &prefixes, retract.then_some(*var))?);
        }
        let triple = Triple::new(terms.remove(0), terms.remove(0), terms.remove(0));

        let mut provider = None;
        let mut classification = None;
        let mut qoc = Vec::new();
        for &(col, field) in &parts[5..] {
            let Some((key, value)) = field.split_once('=') else {
                return Err(TraceError::syntax(line_no, col, format!("expected key=value, found {field:?}")));
            };
            match key {
                "provider" if !value.is_empty() && provider.is_none() => provider = Some(value.to_owned()),
                "provider" => return Err(TraceError::syntax(line_no, col, "provider must be given once and be non-empty")),
                "class" if retract => return Err(TraceError::syntax(line_no, col, "retract events take only provider=")),
                "class" => {
                    let c: Classification =
                        value.parse().map_err(|_| TraceError::syntax(line_no, col, format!("unknown classification {value:?}")))?;
                    if c == Classification::Deduced {
                        return Err(TraceError::syntax(line_no, col, "traces may not assert Deduced context"));
                    }
                    classification = Some(c);
                }
                _ if retract => return Err(TraceError::syntax(line_no, col, "retract events take only provider=")),
                _ => qoc.push((key.to_owned(), value.to_owned())),
            }
        }
        let kind = if retract {
            EventKind::Retract { pattern: triple, provider }
        } else {
            let Some(provider) = provider else {
                return Err(TraceError::syntax(line_no, vcol, "assert events need provider=<id>"));
            };
            parse_qoc(&qoc, true).map_err(|source| TraceError::Qoc { line: line_no, source })?;
            EventKind::Assert { triple, provider, classification, qoc }
        };
        events.push(TraceEvent { time, kind, line: line_no });
    }
    Ok(Trace { prefixes, events })
}
