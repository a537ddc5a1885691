//! Random programs, event sequences and documents, plus a brute-force
//! evaluator to check the reasoner against.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::Rng;

use socam_core::kb::QueryOptions;
use socam_core::term::{Datatype, Literal};
use socam_core::{Classification, ContextKB, ContextStatement, Document, PrefixMap, Term, Timestamp, Triple};

pub const NS: &str = "http://gen.example/";
pub const PROVIDER: &str = "gen";
pub const PREDICATES: usize = 4;
pub const CONSTANTS: usize = 4;
const VARIABLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Var(usize),
    Const(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Atom {
    pub s: Slot,
    pub p: usize,
    pub o: Slot,
}

#[derive(Debug, Clone)]
pub struct GenRule {
    pub positive: Vec<Atom>,
    pub negated: Vec<Atom>,
    pub head: Atom,
}

#[derive(Debug, Clone)]
pub struct Program {
    pub rules: Vec<GenRule>,
    pub facts: Vec<Triple>,
}

pub fn constant(i: usize) -> Term {
    Term::iri(&format!("{NS}c{i}"))
}

pub fn predicate(i: usize) -> Term {
    Term::iri(&format!("{NS}p{i}"))
}

pub fn fact(s: usize, p: usize, o: usize) -> Triple {
    Triple::new(constant(s), predicate(p), constant(o))
}

fn random_fact(rng: &mut StdRng) -> Triple {
    fact(rng.gen_range(0..CONSTANTS), rng.gen_range(0..PREDICATES), rng.gen_range(0..CONSTANTS))
}

fn slot_from(rng: &mut StdRng, vars: &[usize]) -> Slot {
    if !vars.is_empty() && rng.gen_bool(0.7) {
        Slot::Var(vars[rng.gen_range(0..vars.len())])
    } else {
        Slot::Const(rng.gen_range(0..CONSTANTS))
    }
}

fn random_rule(rng: &mut StdRng, negation: bool) -> GenRule {
    let all: Vec<usize> = (0..VARIABLES).collect();
    let positive: Vec<Atom> = (0..rng.gen_range(1..=3))
        .map(|_| Atom { s: slot_from(rng, &all), p: rng.gen_range(0..PREDICATES), o: slot_from(rng, &all) })
        .collect();
    let bound: Vec<usize> = positive
        .iter()
        .flat_map(|a| [a.s, a.o])
        .filter_map(|s| match s {
            Slot::Var(v) => Some(v),
            Slot::Const(_) => None,
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let negated = if negation && rng.gen_bool(0.5) {
        vec![Atom { s: slot_from(rng, &bound), p: rng.gen_range(0..PREDICATES), o: slot_from(rng, &bound) }]
    } else {
        Vec::new()
    };
    let head = Atom { s: slot_from(rng, &bound), p: rng.gen_range(0..PREDICATES), o: slot_from(rng, &bound) };
    GenRule { positive, negated, head }
}

/// At most 8 facts and 4 rules over a small vocabulary.
pub fn random_program(rng: &mut StdRng, negation: bool) -> Program {
    let rules = (0..rng.gen_range(1..=4)).map(|_| random_rule(rng, negation)).collect();
    let facts = (0..rng.gen_range(0..=8)).map(|_| random_fact(rng)).collect();
    Program { rules, facts }
}

fn slot_text(s: Slot) -> String {
    match s {
        Slot::Var(v) => format!("?x{v}"),
        Slot::Const(c) => format!("g:c{c}"),
    }
}

fn atom_text(a: &Atom) -> String {
    format!("({} g:p{} {})", slot_text(a.s), a.p, slot_text(a.o))
}

pub fn rules_text(rules: &[GenRule]) -> String {
    let mut out = format!("@prefix g: <{NS}> .\n");
    for (i, r) in rules.iter().enumerate() {
        let mut clauses: Vec<String> = r.positive.iter().map(atom_text).collect();
        clauses.extend(r.negated.iter().map(|a| format!("not{}", atom_text(a))));
        out.push_str(&format!("[r{i}: {} -> {}]\n", clauses.join(", "), atom_text(&r.head)));
    }
    out
}

fn ground(slot: Slot, env: &[usize]) -> usize {
    match slot {
        Slot::Var(v) => env[v],
        Slot::Const(c) => c,
    }
}

type Fact = (usize, usize, usize);

fn ground_atom(a: &Atom, env: &[usize]) -> Fact {
    (ground(a.s, env), a.p, ground(a.o, env))
}

/// Predicate strata computed independently of the reasoner, or `None` when
/// some predicate depends negatively on itself.
pub fn oracle_strata(rules: &[GenRule]) -> Option<Vec<usize>> {
    let mut level = vec![0usize; PREDICATES];
    loop {
        let mut changed = false;
        for r in rules {
            let need = r
                .positive
                .iter()
                .map(|a| level[a.p])
                .chain(r.negated.iter().map(|a| level[a.p] + 1))
                .max()
                .unwrap_or(0);
            if need > level[r.head.p] {
                level[r.head.p] = need;
                changed = true;
            }
        }
        if level.iter().any(|&l| l > PREDICATES) {
            return None;
        }
        if !changed {
            return Some(level);
        }
    }
}

/// Whether some predicate reaches itself through a path containing a
/// negative edge, by Floyd-Warshall over (reachable, reachable-with-negation).
pub fn has_negative_cycle(rules: &[GenRule]) -> bool {
    let n = PREDICATES;
    let mut reach = vec![vec![0u8; n]; n];
    for r in rules {
        for a in &r.positive {
            reach[a.p][r.head.p] = reach[a.p][r.head.p].max(1);
        }
        for a in &r.negated {
            reach[a.p][r.head.p] = 2;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] > 0 && reach[k][j] > 0 {
                    let via = reach[i][k].max(reach[k][j]);
                    reach[i][j] = reach[i][j].max(via);
                }
            }
        }
    }
    (0..n).any(|i| reach[i][i] == 2)
}

/// Brute-force model: every rule is tried under every assignment of its
/// variables to constants, stratum by stratum, until nothing changes.
pub fn naive_closure(rules: &[GenRule], facts: &[Triple]) -> BTreeSet<Triple> {
    let strata = oracle_strata(rules).expect("stratifiable program");
    let index = |t: &Term| -> usize {
        let s = t.as_iri().unwrap().as_str();
        s[NS.len() + 1..].parse().unwrap()
    };
    let mut known: BTreeSet<Fact> = facts.iter().map(|t| (index(&t.subject), index(&t.predicate), index(&t.object))).collect();
    let top = strata.iter().copied().max().unwrap_or(0);
    let assignments: Vec<Vec<usize>> = (0..CONSTANTS.pow(VARIABLES as u32))
        .map(|mut k| {
            (0..VARIABLES)
                .map(|_| {
                    let c = k % CONSTANTS;
                    k /= CONSTANTS;
                    c
                })
                .collect()
        })
        .collect();
    for stratum in 0..=top {
        loop {
            let mut new = Vec::new();
            for r in rules.iter().filter(|r| strata[r.head.p] == stratum) {
                for env in &assignments {
                    let body = r.positive.iter().all(|a| known.contains(&ground_atom(a, env)))
                        && r.negated.iter().all(|a| !known.contains(&ground_atom(a, env)));
                    if body {
                        let h = ground_atom(&r.head, env);
                        if !known.contains(&h) {
                            new.push(h);
                        }
                    }
                }
            }
            if new.is_empty() {
                break;
            }
            known.extend(new);
        }
    }
    known.into_iter().map(|(s, p, o)| fact(s, p, o)).collect()
}

pub fn base_statement(t: Triple, at: Timestamp) -> ContextStatement {
    ContextStatement::new(t, Classification::Sensed, PROVIDER).at(at)
}

/// Triples visible to queries at `now`.
pub fn visible_triples(kb: &ContextKB, now: Timestamp) -> BTreeSet<Triple> {
    let all = Triple::new(Term::var("s"), Term::var("p"), Term::var("o"));
    kb.query(&all, QueryOptions::visible(now)).into_iter().map(|m| m.statement.triple).collect()
}

#[derive(Debug, Clone)]
pub enum Op {
    Assert(Triple),
    Retract(Triple),
}

/// A sequence of base-fact asserts and retracts. Retracts mostly pick a
/// fact asserted earlier.
pub fn random_ops(rng: &mut StdRng, len: usize) -> Vec<Op> {
    let mut live: Vec<Triple> = Vec::new();
    let mut ops = Vec::new();
    for _ in 0..len {
        if !live.is_empty() && rng.gen_bool(0.35) {
            let t = live.swap_remove(rng.gen_range(0..live.len()));
            ops.push(Op::Retract(t));
        } else if rng.gen_bool(0.05) {
            ops.push(Op::Retract(random_fact(rng)));
        } else {
            let t = random_fact(rng);
            live.push(t.clone());
            ops.push(Op::Assert(t));
        }
    }
    ops
}

const LOCAL_CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-";

fn local(rng: &mut StdRng) -> String {
    let mut s = String::new();
    s.push(LOCAL_CHARS[rng.gen_range(0..26)] as char);
    for _ in 0..rng.gen_range(0..8) {
        s.push(LOCAL_CHARS[rng.gen_range(0..LOCAL_CHARS.len())] as char);
    }
    s
}

fn random_resource(rng: &mut StdRng) -> Term {
    match rng.gen_range(0..4) {
        0 => Term::iri(&format!("http://a.example/ns#{}", local(rng))),
        1 => Term::iri(&format!("http://b.example/{}", local(rng))),
        2 => Term::iri(&format!("urn:other:{}", local(rng))),
        _ => Term::Blank(local(rng)),
    }
}

fn random_string(rng: &mut StdRng) -> String {
    const POOL: &[&str] = &["a", "Z", " ", "\"", "\\", "\n", "\t", "\r", "é", "漢", "#", "<", ">", ";", ",", ".", "'", "0"];
    (0..rng.gen_range(0..10)).map(|_| POOL[rng.gen_range(0..POOL.len())]).collect()
}

fn random_object(rng: &mut StdRng) -> Term {
    let lit = match rng.gen_range(0..8) {
        0..=2 => return random_resource(rng),
        3 => Literal::string(random_string(rng)),
        4 => Literal::integer(rng.gen_range(-100_000..100_000)),
        5 => {
            let v: f64 = rng.gen_range(-1.0e6..1.0e6);
            let lexical = if rng.gen_bool(0.5) { format!("{v}") } else { format!("{v:e}") };
            Literal::new(lexical, Datatype::Double).unwrap()
        }
        6 => Literal::boolean(rng.gen_bool(0.5)),
        _ => Literal::new(random_string(rng), Datatype::Other("http://a.example/ns#custom".into())).unwrap(),
    };
    Term::Literal(lit)
}

/// A document with up to 20 triples over two prefixed namespaces, one
/// unprefixed one, blank nodes and literals of every built-in datatype.
pub fn random_document(rng: &mut StdRng) -> Document {
    let mut prefixes = PrefixMap::new();
    prefixes.insert("a", "http://a.example/ns#");
    prefixes.insert("b", "http://b.example/");
    let mut preds: Vec<Term> = (0..3).map(|_| Term::iri(&format!("http://a.example/ns#{}", local(rng)))).collect();
    preds.push(Term::iri(socam_core::vocab::RDF_TYPE));
    preds.push(Term::iri(&format!("urn:other:{}", local(rng))));
    let subjects: Vec<Term> = (0..rng.gen_range(1..5)).map(|_| random_resource(rng)).collect();
    let triples = (0..rng.gen_range(0..=20))
        .map(|_| {
            Triple::new(
                subjects[rng.gen_range(0..subjects.len())].clone(),
                preds[rng.gen_range(0..preds.len())].clone(),
                random_object(rng),
            )
        })
        .collect();
    Document { prefixes, triples }
}

pub fn triple_set(doc: &Document) -> BTreeSet<Triple> {
    doc.triples.iter().cloned().collect()
}

