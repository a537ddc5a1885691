//! Rule language: parsing, safety and stratification.
//!
//! ```text
//! @prefix home: <http://socam.example/home#> .
//! @aggregate home:Members-Smith home:hasMember home:foodPreference home:familyFoodPreference intersection .
//! [sleep: (?p home:locatedAt home:MasterBedroom-Smith), (?p home:posture "LiedDown"),
//!         not(home:Curtain-MBR home:deviceStatus "Open")
//!         -> (?p home:personStatus "Sleeping")]
//! ```

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::ReasonerError;
use crate::lexer::Tok;
use crate::ontology::SchemaSet;
use crate::statement::Classification;
use crate::term::{Iri, PrefixMap, Term, Triple};
use crate::turtle::{parse_term, resolve_iri, Cursor, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Equal,
    NotEqual,
    LessThan,
    GreaterThan,
}

impl Builtin {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "equal" => Some(Builtin::Equal),
            "notEqual" => Some(Builtin::NotEqual),
            "lessThan" => Some(Builtin::LessThan),
            "greaterThan" => Some(Builtin::GreaterThan),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Equal => "equal",
            Builtin::NotEqual => "notEqual",
            Builtin::LessThan => "lessThan",
            Builtin::GreaterThan => "greaterThan",
        }
    }

    /// Evaluates on ground terms. Literals compare by value within one
    /// datatype; IRIs support only (in)equality.
    pub fn eval(self, a: &Term, b: &Term) -> bool {
        match (a, b) {
            (Term::Literal(x), Term::Literal(y)) => match (self, x.compare(y)) {
                (_, None) => false,
                (Builtin::Equal, Some(o)) => o.is_eq(),
                (Builtin::NotEqual, Some(o)) => o.is_ne(),
                (Builtin::LessThan, Some(o)) => o.is_lt(),
                (Builtin::GreaterThan, Some(o)) => o.is_gt(),
            },
            (Term::Iri(_), Term::Iri(_)) => match self {
                Builtin::Equal => a == b,
                Builtin::NotEqual => a != b,
                _ => false,
            },
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyClause {
    Positive(Triple),
    Negated(Triple),
    Builtin(Builtin, Term, Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub body: Vec<BodyClause>,
    pub head: Vec<Triple>,
    /// Source line of the opening `[`, 0 when built in code.
    pub line: usize,
}

impl Rule {
    pub fn new(name: &str, body: Vec<BodyClause>, head: Vec<Triple>) -> Self {
        Rule { name: name.to_owned(), body, head, line: 0 }
    }

    pub fn positives(&self) -> impl Iterator<Item = &Triple> {
        self.body.iter().filter_map(|c| match c {
            BodyClause::Positive(t) => Some(t),
            _ => None,
        })
    }

    pub fn negated(&self) -> impl Iterator<Item = &Triple> {
        self.body.iter().filter_map(|c| match c {
            BodyClause::Negated(t) => Some(t),
            _ => None,
        })
    }

    pub fn head_predicates(&self) -> BTreeSet<&Iri> {
        self.head.iter().filter_map(Triple::predicate_iri).collect()
    }

    pub fn body_predicates(&self) -> BTreeSet<&Iri> {
        self.positives().chain(self.negated()).filter_map(Triple::predicate_iri).collect()
    }

    fn check_safety(&self) -> Result<(), ReasonerError> {
        let bound: BTreeSet<&str> = self.positives().flat_map(Triple::variables).collect();
        let unsafe_var = |v: &str| ReasonerError::UnsafeRule { rule: self.name.clone(), variable: v.to_owned(), line: self.line };
        for t in self.head.iter().chain(self.negated()) {
            if let Some(v) = t.variables().find(|v| !bound.contains(v)) {
                return Err(unsafe_var(v));
            }
        }
        for clause in &self.body {
            if let BodyClause::Builtin(_, a, b) = clause {
                for t in [a, b] {
                    if let Term::Variable(v) = t {
                        if !bound.contains(v.as_str()) {
                            return Err(unsafe_var(v));
                        }
                    }
                }
            }
        }
        for t in self.head.iter().chain(self.positives()).chain(self.negated()) {
            if t.predicate.as_iri().is_none() {
                return Err(ReasonerError::VariablePredicate { rule: self.name.clone(), line: self.line });
            }
        }
        if self.head.is_empty() {
            return Err(ReasonerError::EmptyHead { rule: self.name.clone(), line: self.line });
        }
        Ok(())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}: ", self.name)?;
        let body: Vec<String> = self
            .body
            .iter()
            .map(|c| match c {
                BodyClause::Positive(t) => t.to_string(),
                BodyClause::Negated(t) => format!("not{t}"),
                BodyClause::Builtin(b, x, y) => format!("{}({x}, {y})", b.name()),
            })
            .collect();
        let head: Vec<String> = self.head.iter().map(Triple::to_string).collect();
        write!(f, "{} -> {}]", body.join(", "), head.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    Union,
    Intersection,
}

/// Combines one predicate's values over the members of a group into
/// Aggregated statements about the group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationSpec {
    pub group: Iri,
    /// Links the group to each member: `(group memberPredicate member)`.
    pub member_predicate: Iri,
    pub source_predicate: Iri,
    pub target_predicate: Iri,
    pub combiner: Combiner,
}

impl AggregationSpec {
    pub fn name(&self) -> String {
        format!("aggregate:{}", self.target_predicate.local_name())
    }
}

/// Ordered rules with their computed strata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleSet {
    rules: Vec<Rule>,
    strata: Vec<usize>,
    aggregations: Vec<AggregationSpec>,
    prefixes: PrefixMap,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>, aggregations: Vec<AggregationSpec>) -> Result<Self, ReasonerError> {
        for r in &rules {
            r.check_safety()?;
        }
        let strata = stratify(&rules)?;
        Ok(RuleSet { rules, strata, aggregations, prefixes: PrefixMap::standard() })
    }

    pub fn empty() -> Self {
        RuleSet::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn aggregations(&self) -> &[AggregationSpec] {
        &self.aggregations
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    pub fn stratum_of(&self, rule_index: usize) -> usize {
        self.strata[rule_index]
    }

    pub fn stratum_count(&self) -> usize {
        self.strata.iter().max().map_or(0, |m| m + 1)
    }

    /// Rules of one stratum, in file order.
    pub fn stratum(&self, stratum: usize) -> impl Iterator<Item = &Rule> {
        self.rules.iter().zip(&self.strata).filter(move |(_, s)| **s == stratum).map(|(r, _)| r)
    }

    /// Every predicate a head may produce must be declared Deduced or
    /// Aggregated.
    pub fn check_heads(&self, schemas: &SchemaSet) -> Result<(), ReasonerError> {
        for rule in &self.rules {
            for p in rule.head_predicates() {
                let ok = matches!(schemas.classify(p), Ok(Classification::Deduced | Classification::Aggregated));
                if !ok {
                    return Err(ReasonerError::NonDeducedHead { rule: rule.name.clone(), predicate: p.clone(), line: rule.line });
                }
            }
        }
        Ok(())
    }

    /// Rule-level predicate dependencies: `head -> body predicates`.
    pub fn dependency_graph(&self) -> BTreeMap<&Iri, BTreeSet<(&Iri, bool)>> {
        let mut g: BTreeMap<&Iri, BTreeSet<(&Iri, bool)>> = BTreeMap::new();
        for rule in &self.rules {
            for h in rule.head_predicates() {
                let deps = g.entry(h).or_default();
                deps.extend(rule.positives().filter_map(Triple::predicate_iri).map(|p| (p, false)));
                deps.extend(rule.negated().filter_map(Triple::predicate_iri).map(|p| (p, true)));
            }
        }
        g
    }
}

/// Assigns each rule the lowest stratum such that positive dependencies
/// stay in the same or a lower stratum and negated ones strictly lower.
fn stratify(rules: &[Rule]) -> Result<Vec<usize>, ReasonerError> {
    let mut level: BTreeMap<&Iri, usize> = BTreeMap::new();
    for r in rules {
        for p in r.head_predicates().into_iter().chain(r.body_predicates()) {
            level.entry(p).or_insert(0);
        }
    }
    let limit = level.len();
    loop {
        let mut changed = false;
        for r in rules {
            let mut need = r.head_predicates().iter().map(|h| level[h]).max().unwrap_or(0);
            for p in r.positives().filter_map(Triple::predicate_iri) {
                need = need.max(level[p]);
            }
            for p in r.negated().filter_map(Triple::predicate_iri) {
                need = need.max(level[p] + 1);
            }
            for h in r.head_predicates() {
                if level[h] < need {
                    level.insert(h, need);
                    changed = true;
                }
            }
        }
        if level.values().any(|l| *l > limit) {
            return Err(ReasonerError::UnstratifiableNegation { cycle: negative_cycle(rules) });
        }
        if !changed {
            break;
        }
    }
    Ok(rules.iter().map(|r| r.head_predicates().iter().map(|h| level[h]).max().unwrap_or(0)).collect())
}

/// A predicate cycle through at least one negated dependency.
fn negative_cycle(rules: &[Rule]) -> Vec<Iri> {
    let mut deps: BTreeMap<&Iri, BTreeSet<&Iri>> = BTreeMap::new();
    let mut negative = Vec::new();
    for r in rules {
        for h in r.head_predicates() {
            deps.entry(h).or_default().extend(r.positives().filter_map(Triple::predicate_iri));
            for n in r.negated().filter_map(Triple::predicate_iri) {
                deps.entry(h).or_default().insert(n);
                negative.push((h, n));
            }
        }
        // Heads of one rule share a stratum.
        let heads: Vec<_> = r.head_predicates().into_iter().collect();
        for a in &heads {
            deps.entry(a).or_default().extend(heads.iter().copied());
        }
    }
    for (head, neg) in negative {
        // Path neg ->* head closes the cycle head -> neg ->* head.
        let mut prev: BTreeMap<&Iri, &Iri> = BTreeMap::new();
        let mut queue = VecDeque::from([neg]);
        let mut seen = BTreeSet::from([neg]);
        while let Some(n) = queue.pop_front() {
            if n == head {
                let mut path = vec![head.clone()];
                let mut cur = head;
                while cur != neg {
                    cur = prev[cur];
                    path.push(cur.clone());
                }
                path.reverse();
                let mut cycle = vec![head.clone()];
                cycle.extend(path);
                return cycle;
            }
            for next in deps.get(n).into_iter().flatten() {
                if seen.insert(next) {
                    prev.insert(next, n);
                    queue.push_back(next);
                }
            }
        }
    }
    Vec::new()
}

/// Parses a rule file, checking safety and stratification. Head
/// classifications are checked separately by [`RuleSet::check_heads`].
pub fn parse_rules(text: &str) -> Result<RuleSet, ReasonerError> {
    let mut cur = Cursor::new(text)?;
    let mut prefixes = PrefixMap::standard();
    let mut rules = Vec::new();
    let mut aggregations = Vec::new();
    while !cur.at_eof() {
        let tok = cur.next();
        match tok.tok {
            Tok::Directive(d) if d == "prefix" => cur.prefix_decl(&mut prefixes)?,
            Tok::Directive(d) if d == "aggregate" => aggregations.push(parse_aggregate(&mut cur, &prefixes)?),
            Tok::LBracket => {
                let mut rule = parse_rule(&mut cur, &prefixes)?;
                rule.line = tok.pos.line;
                if rules.iter().any(|r: &Rule| r.name == rule.name) {
                    return Err(ReasonerError::DuplicateRule { rule: rule.name, line: tok.pos.line });
                }
                rules.push(rule);
            }
            other => return Err(ParseError::syntax(tok.pos, format!("expected '[' or a directive, found {other}")).into()),
        }
    }
    let mut set = RuleSet::new(rules, aggregations)?;
    set.prefixes = prefixes;
    Ok(set)
}

fn parse_aggregate(cur: &mut Cursor, prefixes: &PrefixMap) -> Result<AggregationSpec, ReasonerError> {
    let mut iris = Vec::new();
    for _ in 0..4 {
        let tok = cur.next();
        let iri = resolve_iri(&tok, prefixes)?
            .ok_or_else(|| ParseError::syntax(tok.pos, format!("expected an IRI, found {}", tok.tok)))?;
        iris.push(iri);
    }
    let tok = cur.next();
    let combiner = match &tok.tok {
        Tok::Word(w) if w == "union" => Combiner::Union,
        Tok::Word(w) if w == "intersection" => Combiner::Intersection,
        other => return Err(ParseError::syntax(tok.pos, format!("expected union or intersection, found {other}")).into()),
    };
    cur.expect(&Tok::Dot, "'.' after @aggregate")?;
    let mut it = iris.into_iter();
    Ok(AggregationSpec {
        group: it.next().unwrap(),
        member_predicate: it.next().unwrap(),
        source_predicate: it.next().unwrap(),
        target_predicate: it.next().unwrap(),
        combiner,
    })
}

fn parse_rule(cur: &mut Cursor, prefixes: &PrefixMap) -> Result<Rule, ReasonerError> {
    let name_tok = cur.next();
    let name = match &name_tok.tok {
        Tok::PName { prefix, local } if local.is_empty() && !prefix.is_empty() => prefix.clone(),
        Tok::Word(w) if cur.peek().tok == Tok::PName { prefix: String::new(), local: String::new() } => {
            cur.next();
            w.clone()
        }
        other => return Err(ParseError::syntax(name_tok.pos, format!("expected rule name followed by ':', found {other}")).into()),
    };
    let mut body = Vec::new();
    if cur.peek().tok != Tok::Arrow {
        loop {
            body.push(parse_clause(cur, prefixes)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    cur.expect(&Tok::Arrow, "',' or '->'")?;
    let mut head = Vec::new();
    loop {
        head.push(parse_pattern(cur, prefixes)?);
        if !cur.eat(&Tok::Comma) {
            break;
        }
    }
    cur.expect(&Tok::RBracket, "']' closing the rule")?;
    Ok(Rule { name, body, head, line: 0 })
}

fn parse_clause(cur: &mut Cursor, prefixes: &PrefixMap) -> Result<BodyClause, ReasonerError> {
    let tok = cur.peek().clone();
    match &tok.tok {
        Tok::LParen => Ok(BodyClause::Positive(parse_pattern(cur, prefixes)?)),
        Tok::Word(w) if w == "not" => {
            cur.next();
            Ok(BodyClause::Negated(parse_pattern(cur, prefixes)?))
        }
        Tok::Word(w) => {
            let builtin =
                Builtin::from_name(w).ok_or_else(|| ParseError::syntax(tok.pos, format!("unknown builtin {w:?}")))?;
            cur.next();
            cur.expect(&Tok::LParen, "'(' after builtin name")?;
            let a = parse_term(cur, prefixes, true)?;
            cur.expect(&Tok::Comma, "',' between builtin arguments")?;
            let b = parse_term(cur, prefixes, true)?;
            cur.expect(&Tok::RParen, "')' closing the builtin")?;
            Ok(BodyClause::Builtin(builtin, a, b))
        }
        other => Err(ParseError::syntax(tok.pos, format!("expected a pattern, not(...) or builtin, found {other}")).into()),
    }
}

/// Parses a single `(s p o)` pattern, as used for queries.
pub fn parse_query(text: &str, prefixes: &PrefixMap) -> Result<Triple, ReasonerError> {
    let mut cur = Cursor::new(text)?;
    let pattern = parse_pattern(&mut cur, prefixes)?;
    if !cur.at_eof() {
        return Err(ParseError::syntax(cur.peek().pos, "unexpected text after the pattern").into());
    }
    Ok(pattern)
}

fn parse_pattern(cur: &mut Cursor, prefixes: &PrefixMap) -> Result<Triple, ReasonerError> {
    cur.expect(&Tok::LParen, "'(' opening a pattern")?;
    let s = parse_term(cur, prefixes, true)?;
    let p_tok = cur.peek().clone();
    let p = parse_term(cur, prefixes, true)?;
    let o = parse_term(cur, prefixes, true)?;
    cur.expect(&Tok::RParen, "')' closing the pattern")?;
    if matches!(p, Term::Literal(_) | Term::Blank(_)) {
        return Err(ParseError::syntax(p_tok.pos, "predicate must be an IRI").into());
    }
    Ok(Triple::new(s, p, o))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab;

    const SLEEP: &str = r#"
        [sleep: (?p home:locatedAt home:MasterBedroom-Smith), (?p home:posture "LiedDown"),
                (home:Door-MBR home:deviceStatus "Close"), not(home:Curtain-MBR home:deviceStatus "Open")
                -> (?p home:personStatus "Sleeping")]
    "#;

    fn home(local: &str) -> Term {
        Term::iri(&format!("{}{local}", vocab::HOME_NS))
    }

    #[test]
    fn sleep_rule_shape() {
        let set = parse_rules(SLEEP).unwrap();
        assert_eq!(set.rules().len(), 1);
        let r = &set.rules()[0];
        assert_eq!(r.name, "sleep");
        assert_eq!(r.positives().count(), 3);
        assert_eq!(r.negated().count(), 1);
        assert_eq!(r.head, vec![Triple::new(Term::var("p"), home("personStatus"), Term::string("Sleeping"))]);
        assert_eq!(r.line, 2);
    }

    #[test]
    fn builtins_and_tight_spacing() {
        let set = parse_rules(
            "[tv:(?p home:locatedAt ?r),(?d home:locatedAt ?r),equal(?d, home:TV-LivingRoom)->(?p home:personStatus \"WatchingTV\")]",
        )
        .unwrap();
        let r = &set.rules()[0];
        assert_eq!(r.body[2], BodyClause::Builtin(Builtin::Equal, Term::var("d"), home("TV-LivingRoom")));
    }

    #[test]
    fn unsafe_head_variable() {
        let err = parse_rules("[bad: (?a home:p ?b) -> (?a home:q ?c)]").unwrap_err();
        assert_eq!(err, ReasonerError::UnsafeRule { rule: "bad".into(), variable: "c".into(), line: 1 });
        let err = parse_rules("[bad: (?a home:p ?b), not(?a home:q ?z) -> (?a home:r ?b)]").unwrap_err();
        assert!(matches!(err, ReasonerError::UnsafeRule { .. }));
        let err = parse_rules("[bad: (?a home:p ?b), lessThan(?b, ?n) -> (?a home:r ?b)]").unwrap_err();
        assert!(matches!(err, ReasonerError::UnsafeRule { .. }));
    }

    #[test]
    fn mutual_negation_is_unstratifiable() {
        let err = parse_rules(
            "[r1: (?x home:base ?y), not(?x home:b ?y) -> (?x home:a ?y)]\n\
             [r2: (?x home:base ?y), not(?x home:a ?y) -> (?x home:b ?y)]",
        )
        .unwrap_err();
        let ReasonerError::UnstratifiableNegation { cycle } = err else { panic!("{err:?}") };
        assert_eq!(cycle.first(), cycle.last());
        assert!(cycle.len() >= 3);
    }

    #[test]
    fn strata_order_negation() {
        let set = parse_rules(
            "[r2: (?x home:base ?y), not(?x home:a ?y) -> (?x home:b ?y)]\n\
             [r1: (?x home:base ?y) -> (?x home:a ?y)]\n\
             [r3: (?x home:b ?y) -> (?x home:c ?y)]",
        )
        .unwrap();
        assert_eq!(set.stratum_of(1), 0);
        assert_eq!(set.stratum_of(0), 1);
        assert_eq!(set.stratum_of(2), 1);
        assert_eq!(set.stratum_count(), 2);
    }

    #[test]
    fn aggregate_directive() {
        let set = parse_rules(
            "@aggregate home:Members-Smith home:hasMember home:foodPreference home:familyFoodPreference intersection .",
        )
        .unwrap();
        assert_eq!(set.aggregations().len(), 1);
        assert_eq!(set.aggregations()[0].combiner, Combiner::Intersection);
        assert!(parse_rules("@aggregate home:a home:b home:c home:d average .").is_err());
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_rules("[r: (?a home:p) -> (?a home:q ?a)]"), Err(ReasonerError::Syntax(_))));
        assert!(matches!(parse_rules("[r: (?a home:p ?b) (?a home:q ?b)]"), Err(ReasonerError::Syntax(_))));
        assert!(matches!(parse_rules("[r: frob(?a, ?b) -> (?a home:q ?b)]"), Err(ReasonerError::Syntax(_))));
        assert!(matches!(parse_rules("[r: (?a ?p ?b) -> (?a home:q ?b)]"), Err(ReasonerError::VariablePredicate { .. })));
        assert!(matches!(
            parse_rules("[r: (?a home:p ?b) -> (?a home:q ?b)]\n[r: (?a home:p ?b) -> (?a home:q ?b)]"),
            Err(ReasonerError::DuplicateRule { line: 2, .. })
        ));
        let ReasonerError::Syntax(e) = parse_rules("\n\n   [r: (?a unknown:p ?b) -> (?a home:q ?b)]").unwrap_err() else {
            panic!()
        };
        assert_eq!((e.line, e.col), (3, 12));
    }

    #[test]
    fn query_patterns() {
        let p = parse_query("(?a home:feasible ?v)", &PrefixMap::standard()).unwrap();
        assert_eq!(p.predicate, home("feasible"));
        assert!(parse_query("(?a home:feasible ?v) x", &PrefixMap::standard()).is_err());
        assert!(parse_query("?a home:feasible ?v", &PrefixMap::standard()).is_err());
    }

    #[test]
    fn builtin_semantics() {
        use crate::term::Literal;
        let i = |n| Term::Literal(Literal::integer(n));
        assert!(Builtin::LessThan.eval(&i(2), &i(10)));
        assert!(!Builtin::LessThan.eval(&i(10), &i(2)));
        assert!(Builtin::GreaterThan.eval(&Term::string("b"), &Term::string("a")));
        assert!(!Builtin::Equal.eval(&i(1), &Term::string("1")));
        assert!(!Builtin::NotEqual.eval(&i(1), &Term::string("1")));
        assert!(Builtin::Equal.eval(&home("a"), &home("a")));
        assert!(Builtin::NotEqual.eval(&home("a"), &home("b")));
        assert!(!Builtin::LessThan.eval(&home("a"), &home("b")));
    }
}
