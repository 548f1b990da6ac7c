//! JSON file formats for domains, rules, tables and theorem suites, plus
//! plain-text formatting of profiles and witnesses.
//!
//! Preferences are lists of indifference classes, best first:
//! `[["c"], ["a", "b"]]`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::characters::{
    AnonVector, CharKind, CharTriple, CharValue, Image, StrongChar, VetoPair,
};
use crate::guard::{Guard, GuardError};
use crate::oracle::Witness;
use crate::prefs::{
    AgentSet, Alternative, Domain, Pair, PartialProfile, Preference, PrefsError, Profile,
};
use crate::rules::{CanonicalRule, RuleError, ScfTable};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Malformed JSON or wrong shape.
    #[error("schema error: {0}")]
    Schema(String),
    /// Well-formed input that is inconsistent with the domain.
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Guard(#[from] GuardError),
}

impl From<PrefsError> for IoError {
    fn from(e: PrefsError) -> Self {
        IoError::Validation(e.to_string())
    }
}

impl From<RuleError> for IoError {
    fn from(e: RuleError) -> Self {
        if let Some(g) = rule_guard(&e) {
            return IoError::Guard(g);
        }
        IoError::Validation(e.to_string())
    }
}

fn rule_guard(e: &RuleError) -> Option<GuardError> {
    use crate::characters::CharError;
    use crate::order::OrderError;
    match e {
        RuleError::Guard(g)
        | RuleError::Char(CharError::Guard(g))
        | RuleError::Order(OrderError::Guard(g)) => Some(g.clone()),
        _ => None,
    }
}

fn schema(e: serde_json::Error) -> IoError {
    IoError::Schema(e.to_string())
}

fn invalid(msg: impl Into<String>) -> IoError {
    IoError::Validation(msg.into())
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

type PrefJson = Vec<Vec<String>>;
type ProfileJson = BTreeMap<String, PrefJson>;

#[derive(Debug, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Generate {
    Universal,
    StrictUniversal,
    Cartesian(BTreeMap<String, Vec<PrefJson>>),
    Identical(Vec<PrefJson>),
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    alternatives: Vec<String>,
    pair: [String; 2],
    agents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    profiles: Option<Vec<ProfileJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generate: Option<Generate>,
}

fn alt_id(alternatives: &[String], label: &str) -> Result<Alternative, IoError> {
    alternatives
        .iter()
        .position(|x| x == label)
        .map(|i| Alternative(i as u32))
        .ok_or_else(|| invalid(format!("unknown alternative {label:?}")))
}

fn parse_pref(alternatives: &[String], w: &PrefJson) -> Result<Preference, IoError> {
    let classes = w
        .iter()
        .map(|c| c.iter().map(|x| alt_id(alternatives, x)).collect())
        .collect::<Result<Vec<Vec<Alternative>>, _>>()?;
    Ok(Preference::from_classes(classes, alternatives.len())?)
}

fn parse_profile_with(
    alternatives: &[String],
    agents: &[String],
    p: &ProfileJson,
) -> Result<Profile, IoError> {
    if let Some(k) = p.keys().find(|k| !agents.contains(k)) {
        return Err(invalid(format!("unknown agent {k:?}")));
    }
    let prefs = agents
        .iter()
        .map(|v| {
            p.get(v)
                .ok_or_else(|| invalid(format!("profile lacks a preference for {v:?}")))
                .and_then(|w| parse_pref(alternatives, w))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Profile::new(prefs)?)
}

fn parse_pair(alternatives: &[String], pair: &[String; 2]) -> Result<Pair, IoError> {
    Ok(Pair::new(
        alt_id(alternatives, &pair[0])?,
        alt_id(alternatives, &pair[1])?,
    )?)
}

/// Parses a domain file; `pair` overrides the file's designated pair.
pub fn parse_domain(text: &str, pair: Option<&[String; 2]>) -> Result<Domain, IoError> {
    let f: DomainFile = serde_json::from_str(text).map_err(schema)?;
    let pair = parse_pair(&f.alternatives, pair.unwrap_or(&f.pair))?;
    let (alts, agents) = (f.alternatives, f.agents);
    match (f.profiles, f.generate) {
        (Some(ps), None) => {
            let profiles = ps
                .iter()
                .map(|p| parse_profile_with(&alts, &agents, p))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Domain::explicit(alts, agents, pair, profiles)?)
        }
        (None, Some(g)) => match g {
            Generate::Universal => Ok(Domain::universal(alts, agents, pair)?),
            Generate::StrictUniversal => Ok(Domain::strict_universal(alts, agents, pair)?),
            Generate::Identical(ws) => {
                let ws = ws
                    .iter()
                    .map(|w| parse_pref(&alts, w))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Domain::identical(alts, agents, pair, ws)?)
            }
            Generate::Cartesian(map) => {
                if let Some(k) = map.keys().find(|k| !agents.contains(k)) {
                    return Err(invalid(format!("unknown agent {k:?}")));
                }
                let factors = agents
                    .iter()
                    .map(|v| {
                        map.get(v)
                            .ok_or_else(|| invalid(format!("no preference set for {v:?}")))?
                            .iter()
                            .map(|w| parse_pref(&alts, w))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Domain::product(alts, agents, pair, factors)?)
            }
        },
        _ => Err(IoError::Schema(
            "a domain needs exactly one of \"profiles\" or \"generate\"".into(),
        )),
    }
}

pub fn load_domain(path: &Path, pair: Option<&[String; 2]>) -> Result<Domain, IoError> {
    parse_domain(&read_file(path)?, pair)
}

pub fn preference_json(domain: &Domain, w: &Preference) -> Value {
    Value::Array(
        w.classes()
            .iter()
            .map(|c| {
                Value::Array(
                    c.iter()
                        .map(|&x| Value::String(domain.alternative_label(x).to_string()))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn profile_json(domain: &Domain, p: &Profile) -> Value {
    let mut m = Map::new();
    for (v, w) in p.prefs().iter().enumerate() {
        m.insert(domain.agents()[v].clone(), preference_json(domain, w));
    }
    Value::Object(m)
}

fn pair_json(domain: &Domain, pair: Pair) -> Value {
    json!([domain.alternative_label(pair.a), domain.alternative_label(pair.b)])
}

/// Deterministic serialization; product domains stay intensional.
pub fn domain_json(domain: &Domain, guard: &Guard) -> Result<Value, IoError> {
    let mut m = Map::new();
    m.insert("alternatives".into(), json!(domain.alternatives()));
    m.insert("pair".into(), pair_json(domain, domain.pair()));
    m.insert("agents".into(), json!(domain.agents()));
    if domain.is_product() {
        let mut c = Map::new();
        for (v, f) in domain.factors().iter().enumerate() {
            c.insert(
                domain.agents()[v].clone(),
                Value::Array(f.iter().map(|w| preference_json(domain, w)).collect()),
            );
        }
        m.insert("generate".into(), json!({ "cartesian": c }));
    } else {
        let ps = domain.materialize(guard)?;
        m.insert(
            "profiles".into(),
            Value::Array(ps.iter().map(|p| profile_json(domain, p)).collect()),
        );
    }
    Ok(Value::Object(m))
}

/// Parses a single profile object against a domain's labels.
pub fn parse_profile(domain: &Domain, v: &Value) -> Result<Profile, IoError> {
    let p: ProfileJson = serde_json::from_value(v.clone()).map_err(schema)?;
    parse_profile_with(domain.alternatives(), domain.agents(), &p)
}

/// A file holding `{"profiles": [...]}` or a bare array of profiles.
pub fn parse_profiles(domain: &Domain, text: &str) -> Result<Vec<Profile>, IoError> {
    let v: Value = serde_json::from_str(text).map_err(schema)?;
    let list = match &v {
        Value::Array(a) => a,
        Value::Object(o) => match o.get("profiles") {
            Some(Value::Array(a)) => a,
            _ => return Err(IoError::Schema("expected a \"profiles\" array".into())),
        },
        _ => return Err(IoError::Schema("expected a list of profiles".into())),
    };
    list.iter().map(|p| parse_profile(domain, p)).collect()
}

fn format_pref_with(domain: &Domain, w: &Preference) -> String {
    w.classes()
        .iter()
        .map(|c| {
            c.iter()
                .map(|&x| domain.alternative_label(x))
                .collect::<Vec<_>>()
                .join("~")
        })
        .collect::<Vec<_>>()
        .join(">")
}

/// `c>a~b` style.
pub fn format_preference(domain: &Domain, w: &Preference) -> String {
    format_pref_with(domain, w)
}

/// `v1: c>a~b, v2: a>b>c`.
pub fn format_profile(domain: &Domain, p: &Profile) -> String {
    p.prefs()
        .iter()
        .enumerate()
        .map(|(v, w)| format!("{}: {}", domain.agents()[v], format_pref_with(domain, w)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn agents_json(domain: &Domain, s: AgentSet) -> Value {
    Value::Array(
        s.iter()
            .map(|v| Value::String(domain.agents()[v].clone()))
            .collect(),
    )
}

fn parse_agents(domain: &Domain, v: &Value) -> Result<AgentSet, IoError> {
    let labels: Vec<String> = serde_json::from_value(v.clone()).map_err(schema)?;
    let mut s = AgentSet::default();
    for l in labels {
        let id = domain
            .agent_id(&l)
            .ok_or_else(|| invalid(format!("unknown agent {l:?}")))?;
        s.insert(id);
    }
    Ok(s)
}

pub fn format_agents(domain: &Domain, s: AgentSet) -> String {
    let labels: Vec<&str> = s.iter().map(|v| domain.agents()[v].as_str()).collect();
    format!("{{{}}}", labels.join(","))
}

pub fn char_value_json(domain: &Domain, x: &CharValue) -> Value {
    match x {
        CharValue::Triple(t) => {
            let mut pi = Map::new();
            for (v, w) in t.pi.iter() {
                pi.insert(domain.agents()[v].clone(), preference_json(domain, w));
            }
            json!({ "S": agents_json(domain, t.s), "T": agents_json(domain, t.t), "pi": pi })
        }
        CharValue::Anon(k) => json!(k.0),
        CharValue::Veto(p) => json!({ "S": agents_json(domain, p.s), "W": agents_json(domain, p.w) }),
        CharValue::Strict(s) => agents_json(domain, *s),
        CharValue::Strong(StrongChar::Level(l)) => json!({ "level": l }),
        CharValue::Strong(StrongChar::Unanimous(p)) => json!({ "unanimous": profile_json(domain, p) }),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, IoError> {
    v.get(key)
        .ok_or_else(|| IoError::Schema(format!("character value lacks {key:?}")))
}

pub fn parse_char_value(domain: &Domain, kind: CharKind, v: &Value) -> Result<CharValue, IoError> {
    Ok(match kind {
        CharKind::General => {
            let s = parse_agents(domain, field(v, "S")?)?;
            let t = parse_agents(domain, field(v, "T")?)?;
            let pi_json: BTreeMap<String, PrefJson> =
                serde_json::from_value(field(v, "pi")?.clone()).map_err(schema)?;
            let mut pi = BTreeMap::new();
            for (label, w) in &pi_json {
                let id = domain
                    .agent_id(label)
                    .ok_or_else(|| invalid(format!("unknown agent {label:?}")))?;
                pi.insert(id, parse_pref(domain.alternatives(), w)?);
            }
            CharValue::Triple(CharTriple {
                s,
                t,
                pi: PartialProfile::from_map(pi),
            })
        }
        CharKind::Anon => {
            let k: Vec<u32> = serde_json::from_value(v.clone()).map_err(schema)?;
            CharValue::Anon(AnonVector(k))
        }
        CharKind::Bi => CharValue::Veto(VetoPair {
            s: parse_agents(domain, field(v, "S")?)?,
            w: parse_agents(domain, field(v, "W")?)?,
        }),
        CharKind::Strict => CharValue::Strict(parse_agents(domain, v)?),
        CharKind::Strong => {
            if let Some(l) = v.get("level") {
                let l: i8 = serde_json::from_value(l.clone()).map_err(schema)?;
                if !(-1..=1).contains(&l) {
                    return Err(invalid(format!("level {l} is not -1, 0 or 1")));
                }
                CharValue::Strong(StrongChar::Level(l))
            } else {
                CharValue::Strong(StrongChar::Unanimous(parse_profile(
                    domain,
                    field(v, "unanimous")?,
                )?))
            }
        }
    })
}

/// Compact one-line rendering of a character value.
pub fn format_char_value(domain: &Domain, x: &CharValue) -> String {
    match x {
        CharValue::Triple(t) => {
            let pi: Vec<String> = t
                .pi
                .iter()
                .map(|(v, w)| format!("{}:{}", domain.agents()[v], format_pref_with(domain, w)))
                .collect();
            format!(
                "({}, {}, [{}])",
                format_agents(domain, t.s),
                format_agents(domain, t.t),
                pi.join(" ")
            )
        }
        CharValue::Anon(k) => {
            let parts: Vec<String> = k.0.iter().map(u32::to_string).collect();
            format!("({})", parts.join(","))
        }
        CharValue::Veto(p) => format!("({}, {})", format_agents(domain, p.s), format_agents(domain, p.w)),
        CharValue::Strict(s) => format_agents(domain, *s),
        CharValue::Strong(StrongChar::Level(l)) => l.to_string(),
        CharValue::Strong(StrongChar::Unanimous(p)) => format!("[{}]", format_profile(domain, p)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    char: String,
    pair: [String; 2],
    minimals: Vec<Value>,
}

/// Parses a rule file against `domain` (whose pair must match the rule's).
pub fn parse_rule(text: &str, domain: Arc<Domain>, guard: &Guard) -> Result<CanonicalRule, IoError> {
    let f: RuleFile = serde_json::from_str(text).map_err(schema)?;
    let kind: CharKind = f.char.parse().map_err(|_| {
        IoError::Schema(format!("unknown character kind {:?}", f.char))
    })?;
    let pair = parse_pair(domain.alternatives(), &f.pair)?;
    if pair != domain.pair() {
        return Err(invalid(format!(
            "rule is for the pair ({}, {}) but the domain designates ({}, {})",
            f.pair[0],
            f.pair[1],
            domain.alternative_label(domain.pair().a),
            domain.alternative_label(domain.pair().b)
        )));
    }
    let minimals = f
        .minimals
        .iter()
        .map(|v| parse_char_value(&domain, kind, v))
        .collect::<Result<Vec<_>, _>>()?;
    let image = Arc::new(Image::of_domain(&domain, kind, guard).map_err(RuleError::from)?);
    Ok(CanonicalRule::from_antichain(image, domain, &minimals)?)
}

pub fn rule_json(rule: &CanonicalRule) -> Value {
    let d = rule.domain();
    json!({
        "char": rule.kind().name(),
        "pair": pair_json(d, rule.pair()),
        "minimals": rule.minimal_values().map(|x| char_value_json(d, x)).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    profile: ProfileJson,
    choice: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    pair: [String; 2],
    table: Vec<TableEntry>,
    #[serde(default)]
    default: Option<String>,
}

/// Parses an explicit choice table; profiles not listed take `default`.
pub fn parse_table(text: &str, domain: Arc<Domain>, guard: &Guard) -> Result<ScfTable, IoError> {
    let f: TableFile = serde_json::from_str(text).map_err(schema)?;
    let pair = parse_pair(domain.alternatives(), &f.pair)?;
    if pair != domain.pair() {
        return Err(invalid("table pair differs from the domain's designated pair"));
    }
    let choose_a = |label: &str| -> Result<bool, IoError> {
        let x = alt_id(domain.alternatives(), label)?;
        if !pair.contains(x) {
            return Err(invalid(format!("choice {label:?} is outside the pair")));
        }
        Ok(x == pair.a)
    };
    guard.check("table profiles", domain.len() as u128, guard.max_pair_profiles)?;
    let n = domain.len() as usize;
    let mut bits = FixedBitSet::with_capacity(n);
    let mut seen = FixedBitSet::with_capacity(n);
    for e in &f.table {
        let p = parse_profile_with(domain.alternatives(), domain.agents(), &e.profile)?;
        let i = domain
            .index_of(&p)
            .ok_or_else(|| invalid(format!("profile [{}] is not in the domain", format_profile(&domain, &p))))?
            as usize;
        let a = choose_a(&e.choice)?;
        if seen.contains(i) && bits.contains(i) != a {
            return Err(invalid(format!(
                "profile [{}] is listed with both choices",
                format_profile(&domain, &p)
            )));
        }
        seen.insert(i);
        bits.set(i, a);
    }
    if seen.count_ones(..) < n {
        match &f.default {
            Some(d) => {
                let a = choose_a(d)?;
                for i in 0..n {
                    if !seen.contains(i) {
                        bits.set(i, a);
                    }
                }
            }
            None => {
                let i = (0..n).find(|&i| !seen.contains(i)).unwrap_or(0);
                let p = domain.profile(i as u64).map(|p| format_profile(&domain, &p));
                return Err(invalid(format!(
                    "no choice for profile [{}] and no default",
                    p.unwrap_or_default()
                )));
            }
        }
    }
    let pair = domain.pair();
    Ok(ScfTable::new(domain, pair, bits)?)
}

pub fn table_json(table: &ScfTable) -> Value {
    let d = table.domain();
    let rows: Vec<Value> = (0..table.len())
        .map(|i| {
            let p = d.profile(i as u64).expect("index in range");
            json!({
                "profile": profile_json(d, &p),
                "choice": d.alternative_label(table.choice(i)),
            })
        })
        .collect();
    json!({ "pair": pair_json(d, table.pair()), "table": rows })
}

/// Either a canonical rule or an explicit table, told apart by its keys.
pub enum ScfFile {
    Rule(CanonicalRule),
    Table(ScfTable),
}

pub fn parse_scf(text: &str, domain: Arc<Domain>, guard: &Guard) -> Result<ScfFile, IoError> {
    let v: Value = serde_json::from_str(text).map_err(schema)?;
    if v.get("char").is_some() {
        Ok(ScfFile::Rule(parse_rule(text, domain, guard)?))
    } else if v.get("table").is_some() {
        Ok(ScfFile::Table(parse_table(text, domain, guard)?))
    } else {
        Err(IoError::Schema(
            "expected a rule (\"char\") or a table (\"table\") file".into(),
        ))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub theorem: String,
    pub domain: PathBuf,
    #[serde(default)]
    pub pair: Option<[String; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub checks: Vec<SuiteEntry>,
}

/// Loads a suite; domain paths resolve relative to the suite file.
pub fn load_suite(path: &Path) -> Result<Suite, IoError> {
    let mut s: Suite = serde_json::from_str(&read_file(path)?).map_err(schema)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for e in &mut s.checks {
        if e.domain.is_relative() {
            e.domain = base.join(&e.domain);
        }
    }
    Ok(s)
}

fn profile_at(domain: &Domain, i: u64) -> String {
    domain
        .profile(i)
        .map(|p| format_profile(domain, &p))
        .unwrap_or_else(|| format!("#{i}"))
}

pub fn describe_witness(domain: &Domain, w: &Witness) -> String {
    match w {
        Witness::Manipulation(m) => format!(
            "{} manipulation by {} at [{}] reporting [{}]",
            match m.kind {
                crate::oracle::ManipulationKind::Strong => "strong",
                crate::oracle::ManipulationKind::Weak => "weak",
            },
            format_agents(domain, m.coalition),
            profile_at(domain, m.honest),
            profile_at(domain, m.misreport)
        ),
        Witness::NoReversal { first, second } => format!(
            "outcome changes between [{}] and [{}] with no changer preferring the first",
            profile_at(domain, *first),
            profile_at(domain, *second)
        ),
        Witness::Deviation {
            agent,
            honest,
            misreport,
        } => format!(
            "{} gains at [{}] by reporting as in [{}]",
            domain.agents()[*agent],
            profile_at(domain, *honest),
            profile_at(domain, *misreport)
        ),
        Witness::Monotonicity { stronger, weaker } => format!(
            "[{}] supports a at least as much as [{}], yet only the latter gets a",
            profile_at(domain, *stronger),
            profile_at(domain, *weaker)
        ),
        Witness::Transposition { profile, agents } => format!(
            "swapping {} and {} at [{}] changes the outcome",
            domain.agents()[agents.0],
            domain.agents()[agents.1],
            profile_at(domain, *profile)
        ),
    }
}

pub fn witness_json(domain: &Domain, w: &Witness) -> Value {
    let p = |i: u64| {
        domain
            .profile(i)
            .map(|p| profile_json(domain, &p))
            .unwrap_or(Value::Null)
    };
    match w {
        Witness::Manipulation(m) => json!({
            "type": "manipulation",
            "kind": m.kind,
            "coalition": agents_json(domain, m.coalition),
            "honest": p(m.honest),
            "misreport": p(m.misreport),
        }),
        Witness::NoReversal { first, second } => json!({
            "type": "no-reversal", "first": p(*first), "second": p(*second),
        }),
        Witness::Deviation {
            agent,
            honest,
            misreport,
        } => json!({
            "type": "deviation",
            "agent": domain.agents()[*agent],
            "honest": p(*honest),
            "misreport": p(*misreport),
        }),
        Witness::Monotonicity { stronger, weaker } => json!({
            "type": "monotonicity", "stronger": p(*stronger), "weaker": p(*weaker),
        }),
        Witness::Transposition { profile, agents } => json!({
            "type": "transposition",
            "profile": p(*profile),
            "agents": [domain.agents()[agents.0], domain.agents()[agents.1]],
        }),
    }
}
