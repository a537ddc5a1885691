//! The event log emitted by trace replay, in text or line-delimited JSON.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use super::service::ActionRecord;
use crate::kb::QueryMatch;
use crate::statement::{ContextStatement, Timestamp};
use crate::term::{PrefixMap, Term, Triple};

#[derive(Debug, Clone, PartialEq)]
pub enum LogRecord {
    Assert { time: Timestamp, statement: ContextStatement },
    Retract { time: Timestamp, statement: ContextStatement },
    Derive { time: Timestamp, statement: ContextStatement, origin: String },
    UndoDerive { time: Timestamp, statement: ContextStatement, origin: String },
    ConflictResolved { time: Timestamp, subject: Term, predicate: Term, winner: ContextStatement, losers: Vec<ContextStatement> },
    Action(ActionRecord),
}

impl LogRecord {
    pub fn kind(&self) -> &'static str {
        match self {
            LogRecord::Assert { .. } => "assert",
            LogRecord::Retract { .. } => "retract",
            LogRecord::Derive { .. } => "derive",
            LogRecord::UndoDerive { .. } => "undo-derive",
            LogRecord::ConflictResolved { .. } => "conflict-resolved",
            LogRecord::Action(_) => "action",
        }
    }

    pub fn time(&self) -> Timestamp {
        match self {
            LogRecord::Assert { time, .. }
            | LogRecord::Retract { time, .. }
            | LogRecord::Derive { time, .. }
            | LogRecord::UndoDerive { time, .. }
            | LogRecord::ConflictResolved { time, .. } => *time,
            LogRecord::Action(a) => a.time,
        }
    }

    pub fn to_text(&self, prefixes: &PrefixMap) -> String {
        let mut out = format!("{} {}", self.time(), self.kind());
        let r = |t: &Term| prefixes.render_term(t);
        match self {
            LogRecord::Assert { statement, .. } => {
                let _ = write!(out, " {} provider={} class={}", prefixes.render_triple(&statement.triple), statement.provider, statement.classification);
                for a in statement.qoc.iter().flat_map(|q| q.to_annotations()) {
                    let _ = write!(out, " {a}");
                }
            }
            LogRecord::Retract { statement, .. } => {
                let _ = write!(out, " {} provider={}", prefixes.render_triple(&statement.triple), statement.provider);
            }
            LogRecord::Derive { statement, origin, .. } => {
                let _ = write!(out, " {} by={origin} class={}", prefixes.render_triple(&statement.triple), statement.classification);
                if statement.effective_certainty() < 100.0 {
                    let _ = write!(out, " certainty={}", statement.effective_certainty());
                }
            }
            LogRecord::UndoDerive { statement, origin, .. } => {
                let _ = write!(out, " {} by={origin}", prefixes.render_triple(&statement.triple));
            }
            LogRecord::ConflictResolved { subject, predicate, winner, losers, .. } => {
                let losers: Vec<String> = losers.iter().map(|l| format!("{}@{}", r(&l.triple.object), l.provider)).collect();
                let _ = write!(
                    out,
                    " {} {} winner={}@{} losers={}",
                    r(subject),
                    r(predicate),
                    r(&winner.triple.object),
                    winner.provider,
                    losers.join(",")
                );
            }
            LogRecord::Action(a) => {
                let _ = write!(out, " {} {} {}", a.service_id, a.action, a.phase);
                for (k, v) in &a.params {
                    let _ = write!(out, " {k}={}", r(v));
                }
            }
        }
        out
    }

    pub fn to_json(&self, prefixes: &PrefixMap) -> Value {
        let r = |t: &Term| Value::String(prefixes.render_term(t));
        let triple = |t: &Triple| json!([prefixes.render_term(&t.subject), prefixes.render_term(&t.predicate), prefixes.render_term(&t.object)]);
        let mut obj = Map::new();
        obj.insert("time".into(), json!(self.time()));
        obj.insert("kind".into(), json!(self.kind()));
        match self {
            LogRecord::Assert { statement, .. } | LogRecord::Retract { statement, .. } => {
                obj.insert("triple".into(), triple(&statement.triple));
                obj.insert("provider".into(), json!(statement.provider));
                if matches!(self, LogRecord::Assert { .. }) {
                    obj.insert("class".into(), json!(statement.classification.name()));
                    let qoc: Map<String, Value> = statement
                        .qoc
                        .iter()
                        .flat_map(|q| q.iter())
                        .map(|(k, m)| (k.name().to_owned(), json!(m.value)))
                        .collect();
                    if !qoc.is_empty() {
                        obj.insert("qoc".into(), Value::Object(qoc));
                    }
                }
            }
            LogRecord::Derive { statement, origin, .. } | LogRecord::UndoDerive { statement, origin, .. } => {
                obj.insert("triple".into(), triple(&statement.triple));
                obj.insert("by".into(), json!(origin));
                if matches!(self, LogRecord::Derive { .. }) {
                    obj.insert("class".into(), json!(statement.classification.name()));
                    obj.insert("certainty".into(), json!(statement.effective_certainty()));
                }
            }
            LogRecord::ConflictResolved { subject, predicate, winner, losers, .. } => {
                obj.insert("subject".into(), r(subject));
                obj.insert("predicate".into(), r(predicate));
                obj.insert("winner".into(), json!({"object": r(&winner.triple.object), "provider": winner.provider}));
                let losers: Vec<Value> =
                    losers.iter().map(|l| json!({"object": r(&l.triple.object), "provider": l.provider})).collect();
                obj.insert("losers".into(), Value::Array(losers));
            }
            LogRecord::Action(a) => {
                obj.insert("service".into(), json!(a.service_id));
                obj.insert("action".into(), json!(a.action));
                obj.insert("phase".into(), json!(a.phase.to_string()));
                let params: Map<String, Value> = a.params.iter().map(|(k, v)| (k.clone(), r(v))).collect();
                obj.insert("params".into(), Value::Object(params));
            }
        }
        Value::Object(obj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogFormat {
    #[default]
    Text,
    LineJson,
}

/// Describes the loaded configuration at the top of a log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogHeader {
    pub modules: Vec<String>,
    pub rules: usize,
    pub aggregations: usize,
    pub services: Vec<String>,
    pub events: usize,
}

impl LogHeader {
    pub fn render(&self, format: LogFormat) -> String {
        match format {
            LogFormat::Text => format!(
                "# modules: {}\n# rules: {} aggregations: {}\n# services: {}\n# events: {}\n",
                self.modules.join(" "),
                self.rules,
                self.aggregations,
                self.services.join(" "),
                self.events
            ),
            LogFormat::LineJson => {
                let v = json!({
                    "kind": "header",
                    "modules": self.modules,
                    "rules": self.rules,
                    "aggregations": self.aggregations,
                    "services": self.services,
                    "events": self.events,
                });
                format!("{v}\n")
            }
        }
    }
}

/// One line per record.
pub fn render_records(records: &[LogRecord], format: LogFormat, prefixes: &PrefixMap) -> String {
    let mut out = String::new();
    for rec in records {
        match format {
            LogFormat::Text => out.push_str(&rec.to_text(prefixes)),
            LogFormat::LineJson => out.push_str(&rec.to_json(prefixes).to_string()),
        }
        out.push('\n');
    }
    out
}

/// Results of a post-run query: a summary line, then one line per match.
pub fn render_query(pattern: &str, matches: &[QueryMatch], format: LogFormat, prefixes: &PrefixMap) -> String {
    let mut out = String::new();
    match format {
        LogFormat::Text => {
            let _ = writeln!(out, "# query {pattern}: {} match{}", matches.len(), if matches.len() == 1 { "" } else { "es" });
            for m in matches {
                let _ = writeln!(out, "{}", prefixes.render_triple(&m.statement.triple));
            }
        }
        LogFormat::LineJson => {
            for m in matches {
                let t = &m.statement.triple;
                let bindings: Map<String, Value> =
                    m.bindings.iter().map(|(k, v)| (k.clone(), Value::String(prefixes.render_term(v)))).collect();
                let v = json!({
                    "kind": "query",
                    "pattern": pattern,
                    "triple": [prefixes.render_term(&t.subject), prefixes.render_term(&t.predicate), prefixes.render_term(&t.object)],
                    "bindings": bindings,
                });
                let _ = writeln!(out, "{v}");
            }
        }
    }
    out
}
