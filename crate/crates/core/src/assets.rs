//! The smart-home scenario shipped with the engine: ontologies, rules,
//! traces, and the providers and services that take part in it.

use crate::ontology::load_schema;
use crate::reasoner::parse_rules;
use crate::runtime::{ActionTemplate, ContextAwareService, ContextProvider, Engine, ProviderKind, RuntimeError, Subscription};
use crate::statement::Classification;
use crate::term::{Iri, Term, Triple};
use crate::turtle::parse;
use crate::vocab;

pub const UPPER_TTL: &str = include_str!("../assets/upper.ttl");
pub const HOME_TTL: &str = include_str!("../assets/home.ttl");
pub const HOME_RULES: &str = include_str!("../assets/home.rules");
pub const SCENARIO_TRC: &str = include_str!("../assets/scenario.trc");
pub const LOCATION_QOC_TRC: &str = include_str!("../assets/location-qoc.trc");

pub const UPPER_MODULE: &str = "http://socam.example/upper";
pub const HOME_MODULE: &str = "http://socam.example/home";

fn home(local: &str) -> Term {
    Term::iri(&format!("{}{local}", vocab::HOME_NS))
}

fn home_iri(local: &str) -> Iri {
    Iri::new(format!("{}{local}", vocab::HOME_NS)).expect("valid local name")
}

pub fn home_providers() -> Vec<ContextProvider> {
    let internal = |id: &str, preds: &[&str]| {
        preds.iter().fold(ContextProvider::new(id, ProviderKind::Internal), |p, pred| p.serving(home_iri(pred)))
    };
    vec![
        internal("btloc1", &["locatedAt"]),
        internal("camera", &["locatedAt", "posture"]),
        internal("fridge", &["available"]),
        internal("rfid1", &["locatedAt"]),
        internal("rfid2", &["locatedAt"]),
        internal("tv-sensor", &["deviceStatus"]),
        internal("user", &["foodPreference", "hasChildren", "hasMember", "venue"]),
        internal("x10-curtain", &["deviceStatus"]),
        internal("x10-door", &["deviceStatus"]),
        ContextProvider::new("weather-service", ProviderKind::External)
            .serving(home_iri("weatherCond"))
            .scoped("Garden-Smith"),
    ]
}

pub fn home_services() -> Vec<ContextAwareService> {
    vec![
        ContextAwareService::new(
            "baby-monitor",
            Subscription::new(Triple::new(home("Julia"), home("locatedAt"), Term::var("r"))).classified(Classification::Sensed),
            ActionTemplate::new("SwitchChannel", &["r"]),
        ),
        ContextAwareService::new(
            "lighting",
            Subscription::new(Triple::new(Term::var("p"), home("personStatus"), Term::string("WatchingTV"))),
            ActionTemplate::new("DimLights", &["p"]),
        ),
        ContextAwareService::new(
            "meal-agent",
            Subscription::new(Triple::new(Term::var("a"), home("feasible"), Term::var("v"))),
            ActionTemplate::new("AdviseMeal", &["a", "v"]),
        ),
        ContextAwareService::new(
            "personal-comm-agent",
            Subscription::new(Triple::new(Term::var("p"), home("personStatus"), Term::string("Sleeping"))),
            ActionTemplate::new("ForwardToVoicemail", &["p"]),
        ),
    ]
}

/// An engine with the shipped ontologies and rules loaded and the home
/// providers and services registered.
pub fn home_engine(strict: bool) -> Result<Engine, RuntimeError> {
    let mut engine = Engine::new(strict);
    for text in [UPPER_TTL, HOME_TTL] {
        let doc = parse(text)?;
        let schema = load_schema(&doc, engine.kb().schemas(), strict)?;
        engine.plug(schema)?;
    }
    engine.load_rules(parse_rules(HOME_RULES)?)?;
    for p in home_providers() {
        engine.add_provider(p)?;
    }
    for s in home_services() {
        engine.add_service(s)?;
    }
    Ok(engine)
}
