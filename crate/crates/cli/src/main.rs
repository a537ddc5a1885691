use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use socam_core::assets::{home_providers, home_services};
use socam_core::ontology::load_schema;
use socam_core::reasoner::{parse_query, parse_rules, ReasonerError, RuleSet};
use socam_core::runtime::{parse_trace, render_query, render_records, Engine, LogFormat, LogHeader, Trace, TraceError};
use socam_core::turtle::parse;
use socam_core::PrefixMap;

const EXIT_ASSET: u8 = 1;
const EXIT_TRACE: u8 = 2;

#[derive(Parser)]
#[command(name = "socam", version, about = "Validate context assets and replay context traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check ontologies, rules and an optional trace.
    Validate(RunConfig),
    /// Replay a trace and print the event log.
    Run(RunConfig),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    LineJson,
}

#[derive(Args)]
struct RunConfig {
    /// Ontology file, plugged in the order given.
    #[arg(long = "ontology", required = true)]
    ontologies: Vec<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Reject undeclared predicates and unclassified properties.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Pattern such as "(?a home:feasible ?v)", answered after the run.
    #[arg(long = "query")]
    queries: Vec<String>,
}

struct Diagnostics {
    errors: usize,
}

impl Diagnostics {
    fn error(&mut self, path: &Path, line: usize, col: Option<usize>, msg: impl std::fmt::Display) {
        self.errors += 1;
        match col {
            Some(c) => eprintln!("{}:{line}:{c}: error: {msg}", path.display()),
            None => eprintln!("{}:{line}: error: {msg}", path.display()),
        }
    }

    fn warning(&self, path: &Path, msg: impl std::fmt::Display) {
        eprintln!("{}: warning: {msg}", path.display());
    }
}

fn read(path: &Path, diags: &mut Diagnostics) -> Option<String> {
    match fs::read_to_string(path) {
        Ok(text) => Some(text),
        Err(e) => {
            diags.errors += 1;
            eprintln!("{}: error: {e}", path.display());
            None
        }
    }
}

/// Best-effort line of the first IRI named in `msg`.
fn locate(text: &str, msg: &str) -> usize {
    let Some(start) = msg.find("http") else { return 1 };
    let iri: String = msg[start..].chars().take_while(|c| !c.is_whitespace() && !matches!(c, ',' | '"')).collect();
    let iri = iri.trim_end_matches([',', '.', ':', ')']);
    let local = iri.rsplit(['#', '/']).next().unwrap_or(iri);
    if local.is_empty() {
        return 1;
    }
    text.lines()
        .position(|l| {
            let code = l.split('#').next().unwrap_or("");
            code.contains(&format!(":{local}")) || l.contains(iri)
        })
        .map_or(1, |i| i + 1)
}

struct Loaded {
    engine: Engine,
    prefixes: PrefixMap,
    modules: Vec<String>,
}

fn load_assets(cfg: &RunConfig, diags: &mut Diagnostics) -> Loaded {
    let mut engine = Engine::new(cfg.strict);
    let mut prefixes = PrefixMap::standard();
    let mut modules = Vec::new();
    for path in &cfg.ontologies {
        let Some(text) = read(path, diags) else { continue };
        let doc = match parse(&text) {
            Ok(doc) => doc,
            Err(e) => {
                diags.error(path, e.line, Some(e.col), &e.kind);
                continue;
            }
        };
        prefixes.extend(&doc.prefixes);
        match load_schema(&doc, engine.kb().schemas(), cfg.strict) {
            Ok(schema) => {
                for w in &schema.warnings {
                    diags.warning(path, w);
                }
                let id = schema.module_id.to_string();
                match engine.plug(schema) {
                    Ok(()) => {
                        info!("plugged {id} from {}", path.display());
                        modules.push(id);
                    }
                    Err(e) => diags.error(path, 1, None, e),
                }
            }
            Err(e) => {
                let msg = e.to_string();
                diags.error(path, locate(&text, &msg), None, msg);
            }
        }
    }
    if let Some(path) = &cfg.rules {
        if let Some(text) = read(path, diags) {
            match parse_rules(&text) {
                Ok(rules) => {
                    prefixes.extend(rules.prefixes());
                    load_rules(&mut engine, rules, path, &text, diags);
                }
                Err(e) => report_rule_error(path, &text, &e, diags),
            }
        }
    }
    for p in home_providers() {
        engine.add_provider(p).expect("fresh engine has no providers");
    }
    for s in home_services() {
        engine.add_service(s).expect("fresh engine has no services");
    }
    Loaded { engine, prefixes, modules }
}

fn load_rules(engine: &mut Engine, rules: RuleSet, path: &Path, text: &str, diags: &mut Diagnostics) {
    if let Err(e) = engine.load_rules(rules) {
        match e {
            socam_core::RuntimeError::Reasoner(re) => report_rule_error(path, text, &re, diags),
            other => diags.error(path, 1, None, other),
        }
    }
}

fn report_rule_error(path: &Path, text: &str, e: &ReasonerError, diags: &mut Diagnostics) {
    match e {
        ReasonerError::Syntax(p) => diags.error(path, p.line, Some(p.col), &p.kind),
        ReasonerError::UnsafeRule { line, .. }
        | ReasonerError::VariablePredicate { line, .. }
        | ReasonerError::EmptyHead { line, .. }
        | ReasonerError::DuplicateRule { line, .. }
        | ReasonerError::NonDeducedHead { line, .. } => {
            let msg = e.to_string();
            let msg = msg.split_once(": ").filter(|_| msg.starts_with("line ")).map_or(msg.as_str(), |(_, m)| m).to_owned();
            diags.error(path, *line, None, msg)
        }
        other => {
            let msg = other.to_string();
            diags.error(path, locate(text, &msg), None, msg)
        }
    }
}

fn load_trace(path: &Path, diags: &mut Diagnostics) -> Option<Trace> {
    let text = read(path, diags)?;
    match parse_trace(&text) {
        Ok(trace) => Some(trace),
        Err(e) => {
            let col = match &e {
                TraceError::Syntax { col, .. } => Some(*col),
                _ => None,
            };
            let msg = match &e {
                TraceError::Syntax { message, .. } => message.clone(),
                TraceError::Qoc { source, .. } => source.to_string(),
                other => other.to_string(),
            };
            diags.error(path, e.line(), col, msg);
            None
        }
    }
}

fn validate(cfg: &RunConfig) -> ExitCode {
    let mut diags = Diagnostics { errors: 0 };
    load_assets(cfg, &mut diags);
    let asset_errors = diags.errors;
    if let Some(path) = &cfg.trace {
        load_trace(path, &mut diags);
    }
    if asset_errors > 0 {
        ExitCode::from(EXIT_ASSET)
    } else if diags.errors > 0 {
        ExitCode::from(EXIT_TRACE)
    } else {
        let n = cfg.ontologies.len();
        println!("ok: {n} ontolog{}, {}", if n == 1 { "y" } else { "ies" }, if cfg.rules.is_some() { "rules loaded" } else { "no rules" });
        ExitCode::SUCCESS
    }
}

fn run(cfg: &RunConfig) -> ExitCode {
    let mut diags = Diagnostics { errors: 0 };
    let Loaded { mut engine, mut prefixes, modules } = load_assets(cfg, &mut diags);
    if diags.errors > 0 {
        return ExitCode::from(EXIT_ASSET);
    }
    let trace = match &cfg.trace {
        Some(path) => match load_trace(path, &mut diags) {
            Some(t) => t,
            None => return ExitCode::from(EXIT_TRACE),
        },
        None => Trace::default(),
    };
    prefixes.extend(&trace.prefixes);
    let mut queries = Vec::new();
    for q in &cfg.queries {
        match parse_query(q, &prefixes) {
            Ok(p) => queries.push((q, p)),
            Err(e) => {
                eprintln!("error: query {q:?}: {e}");
                return ExitCode::from(EXIT_ASSET);
            }
        }
    }

    let format = match cfg.format {
        Format::Text => LogFormat::Text,
        Format::LineJson => LogFormat::LineJson,
    };
    let header = LogHeader {
        modules,
        rules: engine.rules().rules().len(),
        aggregations: engine.rules().aggregations().len(),
        services: engine.services().map(|s| s.id.clone()).collect(),
        events: trace.events.len(),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let _ = out.write_all(header.render(format).as_bytes());
    for event in &trace.events {
        let report = engine.step(event);
        for (line, e) in &report.errors {
            if let Some(path) = &cfg.trace {
                eprintln!("{}:{line}: warning: event skipped: {e}", path.display());
            }
        }
        let _ = out.write_all(render_records(&report.records, format, &prefixes).as_bytes());
    }
    for (text, pattern) in &queries {
        let matches = engine.query(pattern);
        let _ = out.write_all(render_query(text, &matches, format, &prefixes).as_bytes());
    }
    let _ = out.flush();
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SOCAM_LOG", "warn")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Validate(cfg) => validate(cfg),
        Command::Run(cfg) => run(cfg),
    }
}
