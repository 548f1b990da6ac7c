//! Executable two-sided checks of the characterization results: every
//! canonical rule has the property (soundness) and every table with the
//! property is exactly one canonical rule (completeness, by count and by
//! extension).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use super::{Oracle, OracleError, Property, Witness};
use crate::characters::{CharKind, CharValue, Image, StrongChar};
use crate::guard::Guard;
use crate::io::{describe_witness, format_profile};
use crate::prefs::{AgentSet, Domain};
use crate::rules::{committee_rule, enumerate_rules, extract_rule, quota_rule, RuleError, ScfTable};

/// Bumped whenever witness search order changes.
pub const SEARCH_ORDER_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    AlmostMonotoneImpliesWgsp,
    WgspImpliesAlmostMonotone,
    SocBijection,
    AntichainBijection,
    AnonymousMonotone,
    AnonymousAntichain,
    StrictCommittee,
    VetoPairBijection,
    Quota,
    SgspVeto,
}

impl Theorem {
    pub const ALL: [Theorem; 10] = [
        Theorem::AlmostMonotoneImpliesWgsp,
        Theorem::WgspImpliesAlmostMonotone,
        Theorem::SocBijection,
        Theorem::AntichainBijection,
        Theorem::AnonymousMonotone,
        Theorem::AnonymousAntichain,
        Theorem::StrictCommittee,
        Theorem::VetoPairBijection,
        Theorem::Quota,
        Theorem::SgspVeto,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Theorem::AlmostMonotoneImpliesWgsp => "almost-monotone-implies-wgsp",
            Theorem::WgspImpliesAlmostMonotone => "wgsp-implies-almost-monotone",
            Theorem::SocBijection => "soc-bijection",
            Theorem::AntichainBijection => "antichain-bijection",
            Theorem::AnonymousMonotone => "anonymous-monotone",
            Theorem::AnonymousAntichain => "anonymous-antichain",
            Theorem::StrictCommittee => "strict-committee",
            Theorem::VetoPairBijection => "veto-pair-bijection",
            Theorem::Quota => "quota",
            Theorem::SgspVeto => "sgsp-veto",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Theorem {
    type Err = TheoremError;

    fn from_str(s: &str) -> Result<Self, TheoremError> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| TheoremError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoremError {
    #[error("unknown theorem id {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

impl TheoremError {
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            TheoremError::Oracle(OracleError::Guard(_))
                | TheoremError::Rule(RuleError::Guard(_))
                | TheoremError::Rule(RuleError::Char(crate::characters::CharError::Guard(_)))
                | TheoremError::Rule(RuleError::Order(crate::order::OrderError::Guard(_)))
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub instance: String,
    pub expected: String,
    pub observed: String,
    pub verdict: Verdict,
    pub witnesses: Vec<String>,
    pub notes: Vec<String>,
    pub search_order_version: u32,
}

struct Builder {
    theorem: Theorem,
    instance: String,
    notes: Vec<String>,
    witnesses: Vec<String>,
}

impl Builder {
    fn new(theorem: Theorem, domain: &Domain) -> Self {
        let pair = domain.pair();
        Builder {
            theorem,
            instance: format!(
                "{} agents, {} alternatives, {} profiles, pair ({}, {})",
                domain.num_agents(),
                domain.num_alternatives(),
                domain.len(),
                domain.alternative_label(pair.a),
                domain.alternative_label(pair.b)
            ),
            notes: Vec::new(),
            witnesses: Vec::new(),
        }
    }

    fn witness(&mut self, w: String) {
        if self.witnesses.len() < 5 {
            self.witnesses.push(w);
        }
    }

    fn finish(self, expected: String, observed: String, holds: bool) -> TheoremReport {
        let verdict = if holds && self.witnesses.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        TheoremReport {
            theorem: self.theorem,
            instance: self.instance,
            expected,
            observed,
            verdict,
            witnesses: self.witnesses,
            notes: self.notes,
            search_order_version: SEARCH_ORDER_VERSION,
        }
    }

    fn not_applicable(mut self, reason: &str) -> TheoremReport {
        self.notes.insert(0, reason.to_string());
        TheoremReport {
            theorem: self.theorem,
            instance: self.instance,
            expected: "hypotheses hold".into(),
            observed: reason.into(),
            verdict: Verdict::NotApplicable,
            witnesses: self.witnesses,
            notes: self.notes,
            search_order_version: SEARCH_ORDER_VERSION,
        }
    }
}

/// Tables with all `properties`: exhaustive over all tables when the domain
/// is small enough, otherwise the constraint search.
fn brute_tables(oracle: &Oracle, properties: &[Property], guard: &Guard, b: &mut Builder) -> Result<Vec<ScfTable>, OracleError> {
    if oracle.len() <= guard.max_table_profiles {
        b.notes.push(format!("brute force over all 2^{} tables", oracle.len()));
        oracle.enumerate_scfs(properties)
    } else {
        b.notes.push("constraint search over profile pairs".into());
        oracle.search_scfs(properties)
    }
}

fn anonymous_tables(oracle: &Oracle, properties: &[Property], guard: &Guard, b: &mut Builder) -> Result<Vec<ScfTable>, OracleError> {
    let orbits = oracle.orbits()?.len();
    if orbits <= guard.max_table_profiles {
        b.notes.push(format!("brute force over all 2^{orbits} anonymized tables"));
        oracle.enumerate_anonymous_scfs(properties)
    } else {
        b.notes.push("constraint search over profile pairs".into());
        let mut props = properties.to_vec();
        props.push(Property::Anonymous);
        oracle.search_scfs(&props)
    }
}

fn key(t: &ScfTable) -> Vec<usize> {
    t.bits().ones().collect()
}

/// Compares two families of tables extensionally; records differences.
fn same_family(canonical: &[ScfTable], brute: &[ScfTable], b: &mut Builder, oracle: &Oracle) -> bool {
    let c: BTreeSet<Vec<usize>> = canonical.iter().map(key).collect();
    let r: BTreeSet<Vec<usize>> = brute.iter().map(key).collect();
    if c.len() != canonical.len() {
        b.witness(format!(
            "{} canonical parameters give only {} distinct tables",
            canonical.len(),
            c.len()
        ));
    }
    for t in c.difference(&r) {
        b.witness(format!("canonical rule not found by brute force: {}", a_set(oracle, t)));
    }
    for t in r.difference(&c) {
        b.witness(format!("brute-force table not canonical: {}", a_set(oracle, t)));
    }
    c == r
}

fn a_set(oracle: &Oracle, ones: &[usize]) -> String {
    let d = oracle.domain();
    let items: Vec<String> = ones
        .iter()
        .map(|&i| format!("[{}]", format_profile(d, oracle.profile(i as u64))))
        .collect();
    format!("a exactly on {{{}}}", items.join(", "))
}

fn describe(oracle: &Oracle, w: &Witness) -> String {
    describe_witness(oracle.domain(), w)
}

fn image(domain: &Domain, kind: CharKind, guard: &Guard) -> Result<Arc<Image>, TheoremError> {
    Ok(Arc::new(Image::of_domain(domain, kind, guard).map_err(RuleError::from)?))
}

fn rule_tables(
    image: &Arc<Image>,
    domain: &Arc<Domain>,
    guard: &Guard,
) -> Result<Vec<ScfTable>, TheoremError> {
    let rules = enumerate_rules(image, domain, guard)?;
    let mut out = Vec::with_capacity(rules.len());
    for r in rules {
        out.push(r.to_table(guard)?);
    }
    Ok(out)
}

fn check_all(oracle: &Oracle, tables: &[ScfTable], property: Property, b: &mut Builder, what: &str) -> Result<usize, TheoremError> {
    let mut failures = 0;
    for t in tables {
        if let Some(w) = oracle.check(property, t)? {
            failures += 1;
            b.witness(format!("{what} fails {property}: {}", describe(oracle, &w)));
        }
    }
    Ok(failures)
}

/// Runs one theorem check on a domain.
pub fn check_theorem(theorem: Theorem, domain: Arc<Domain>, guard: &Guard) -> Result<TheoremReport, TheoremError> {
    let mut b = Builder::new(theorem, &domain);
    match theorem {
        Theorem::AlmostMonotoneImpliesWgsp => {
            let oracle = Oracle::new(Arc::clone(&domain), guard)?;
            let am = brute_tables(&oracle, &[Property::AlmostMonotone], guard, &mut b)?;
            let bad = check_all(&oracle, &am, Property::Wgsp, &mut b, "almost monotone table")?;
            let bad_apr = check_all(&oracle, &am, Property::Apr, &mut b, "almost monotone table")?;
            Ok(b.finish(
                "every almost monotone table is wGSP and APR".into(),
                format!("{} almost monotone tables, {bad} not wGSP, {bad_apr} not APR", am.len()),
                bad == 0 && bad_apr == 0,
            ))
        }
        Theorem::WgspImpliesAlmostMonotone => {
            let oracle = Oracle::new(Arc::clone(&domain), guard)?;
            let wgsp = brute_tables(&oracle, &[Property::Wgsp], guard, &mut b)?;
            let mut counter = Vec::new();
            for t in &wgsp {
                if let Some(w) = oracle.check_almost_monotone(t)? {
                    counter.push(describe(&oracle, &w));
                }
            }
            if !domain.is_quasi_cartesian() {
                b.notes.push(format!(
                    "{} of {} wGSP tables are not almost monotone{}",
                    counter.len(),
                    wgsp.len(),
                    counter
                        .first()
                        .map(|w| format!("; first counterexample: {w}"))
                        .unwrap_or_default()
                ));
                return Ok(b.not_applicable("domain is not quasi-cartesian"));
            }
            for w in &counter {
                b.witness(format!("wGSP table is not almost monotone: {w}"));
            }
            Ok(b.finish(
                "every wGSP table is almost monotone".into(),
                format!("{} wGSP tables, {} not almost monotone", wgsp.len(), counter.len()),
                counter.is_empty(),
            ))
        }
        Theorem::SocBijection => {
            if !domain.is_quasi_cartesian() {
                return Ok(b.not_applicable("domain is not quasi-cartesian"));
            }
            let oracle = Oracle::new(Arc::clone(&domain), guard)?;
            let img = image(&domain, CharKind::General, guard)?;
            let wgsp = brute_tables(&oracle, &[Property::Wgsp], guard, &mut b)?;
            // completeness: every wGSP table is φ_C for its own C
            let mut socs = BTreeSet::new();
            for t in &wgsp {
                match extract_rule(t, Arc::clone(&img)) {
                    Ok(r) => {
                        if &r.to_table(guard)? != t {
                            b.witness(format!("extracted rule differs from table {}", a_set(&oracle, &key(t))));
                        }
                        socs.insert(r.to_soc().iter().collect::<Vec<_>>());
                    }
                    Err(RuleError::NotMonotone { stronger, weaker }) => b.witness(format!(
                        "wGSP table not monotone in the character: [{}] gets b, [{}] gets a",
                        format_profile(&domain, oracle.profile(stronger)),
                        format_profile(&domain, oracle.profile(weaker))
                    )),
                    Err(e) => return Err(e.into()),
                }
            }
            // soundness: every SOC set gives a wGSP table
            let soc_count = if img.len() <= 20 {
                b.notes.push(format!("SOC sets by filtering all 2^{} subsets", img.len()));
                let all = img.poset().soc_sets_bruteforce(20).map_err(RuleError::from)?;
                let mut tables = Vec::with_capacity(all.len());
                for c in &all {
                    let r = crate::rules::CanonicalRule::from_soc(
                        Arc::clone(&img),
                        Arc::clone(&domain),
                        c.as_bitset().clone(),
                    )?;
                    tables.push(r.to_table(guard)?);
                }
                check_all(&oracle, &tables, Property::Wgsp, &mut b, "canonical rule")?;
                same_family(&tables, &wgsp, &mut b, &oracle);
                all.len()
            } else {
                let tables = rule_tables(&img, &domain, guard)?;
                check_all(&oracle, &tables, Property::Wgsp, &mut b, "canonical rule")?;
                same_family(&tables, &wgsp, &mut b, &oracle);
                tables.len()
            };
            Ok(b.finish(
                format!("{soc_count} SOC sets of the {}-element image, one per wGSP table", img.len()),
                format!("{} wGSP tables, {} distinct extracted SOC sets", wgsp.len(), socs.len()),
                soc_count == wgsp.len() && socs.len() == wgsp.len(),
            ))
        }
        Theorem::AntichainBijection => {
            if !domain.is_cartesian() {
                return Ok(b.not_applicable("domain is not cartesian"));
            }
            bijection(b, &domain, CharKind::General, guard)
        }
        Theorem::VetoPairBijection => {
            if domain.num_alternatives() != 2 {
                return Ok(b.not_applicable("needs exactly two alternatives"));
            }
            if !domain.is_quasi_cartesian() {
                return Ok(b.not_applicable("domain is not quasi-cartesian"));
            }
            bijection(b, &domain, CharKind::Bi, guard)
        }
        Theorem::AnonymousMonotone | Theorem::AnonymousAntichain => {
            if !(domain.is_cartesian() && domain.is_permutation_closed()) {
                return Ok(b.not_applicable("domain is not an identical product W^V"));
            }
            let oracle = Oracle::new(Arc::clone(&domain), guard)?;
            let img = image(&domain, CharKind::Anon, guard)?;
            let brute = anonymous_tables(&oracle, &[Property::Wgsp], guard, &mut b)?;
            if theorem == Theorem::AnonymousMonotone {
                let mut ok = 0;
                for t in &brute {
                    match extract_rule(t, Arc::clone(&img)) {
                        Ok(_) => ok += 1,
                        Err(RuleError::NotMonotone { stronger, weaker }) => b.witness(format!(
                            "anonymous wGSP table not monotone in the counts: [{}] gets b, [{}] gets a",
                            format_profile(&domain, oracle.profile(stronger)),
                            format_profile(&domain, oracle.profile(weaker))
                        )),
                        Err(e) => return Err(e.into()),
                    }
                }
                let tables = rule_tables(&img, &domain, guard)?;
                let not_anon = check_all(&oracle, &tables, Property::Anonymous, &mut b, "canonical rule")?;
                let not_wgsp = check_all(&oracle, &tables, Property::Wgsp, &mut b, "canonical rule")?;
                Ok(b.finish(
                    "anonymous wGSP ⟺ monotone in the count character".into(),
                    format!(
                        "{} anonymous wGSP tables, {ok} monotone; {} canonical rules, {not_anon} not anonymous, {not_wgsp} not wGSP",
                        brute.len(),
                        tables.len()
                    ),
                    ok == brute.len() && not_anon == 0 && not_wgsp == 0,
                ))
            } else {
                let tables = rule_tables(&img, &domain, guard)?;
                let same = same_family(&tables, &brute, &mut b, &oracle);
                Ok(b.finish(
                    format!("antichains of the {}-element count image = anonymous wGSP tables", img.len()),
                    format!("{} antichains, {} anonymous wGSP tables", tables.len(), brute.len()),
                    same && tables.len() == brute.len(),
                ))
            }
        }
        Theorem::StrictCommittee => {
            if !domain.is_strict_universal() {
                return Ok(b.not_applicable("domain is not strict universal"));
            }
            let n = domain.num_agents();
            if n > 4 {
                return Ok(b.not_applicable("family enumeration is limited to 4 agents"));
            }
            let oracle = Oracle::new(Arc::clone(&domain), guard)?;
            let brute = brute_tables(&oracle, &[Property::Wgsp], guard, &mut b)?;
            // every family of coalitions, filtered for superset closure
            let coalitions: Vec<AgentSet> = AgentSet::full(n).subsets().collect();
            let mut tables = Vec::new();
            for mask in 0u64..1u64 << coalitions.len() {
                let family: Vec<AgentSet> = coalitions
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, s)| *s)
                    .collect();
                match committee_rule(&family, Arc::clone(&domain), guard) {
                    Ok(r) => tables.push(r.to_table(guard)?),
                    Err(RuleError::NotSupersetClosed { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            let same = same_family(&tables, &brute, &mut b, &oracle);
            Ok(b.finish(
                "wGSP tables = votings by superset-closed families".into(),
                format!("{} superset-closed families, {} wGSP tables", tables.len(), brute.len()),
                same,
            ))
        }
        Theorem::Quota => {
            if !(domain.is_cartesian() && domain.is_permutation_closed()) {
                return Ok(b.not_applicable("domain is not an identical product W^V"));
            }
            if !domain.is_pair_strict(domain.pair()) {
                return Ok(b.not_applicable("domain has a∼b preferences"));
            }
            let oracle = Oracle::new(Arc::clone(&domain), guard)?;
            let brute = anonymous_tables(&oracle, &[Property::Wgsp], guard, &mut b)?;
            let n = domain.num_agents();
            let mut tables = Vec::new();
            for q in 0..=n + 1 {
                tables.push(quota_rule(q, Arc::clone(&domain), guard)?.to_table(guard)?);
            }
            let same = same_family(&tables, &brute, &mut b, &oracle);
            Ok(b.finish(
                format!("{} quota rules = anonymous wGSP tables", n + 2),
                format!("{} anonymous wGSP tables", brute.len()),
                same && brute.len() == n + 2,
            ))
        }
        Theorem::SgspVeto => {
            let pair = domain.pair();
            if !domain.satisfies_minimal_assumption(pair) {
                return Ok(b.not_applicable("domain fails the minimal assumption"));
            }
            if domain.num_agents() < 3 {
                return Ok(b.not_applicable("the veto characterization is stated for at least three agents"));
            }
            let oracle = Oracle::new(Arc::clone(&domain), guard)?;
            let unanimous = domain
                .unanimous_indifference(pair, guard)
                .map_err(RuleError::from)?;
            let img = image(&domain, CharKind::Strong, guard)?;
            let rules = enumerate_rules(&img, &domain, guard)?;
            // the SOC sets must be exactly ∅, L, {1} ∪ U and {0,1} ∪ U
            let mut shape_ok = true;
            for r in &rules {
                let members: Vec<&CharValue> = r.to_soc().iter().map(|i| img.value(i)).collect();
                let has = |l: i8| members.contains(&&CharValue::Strong(StrongChar::Level(l)));
                let levels_ok = match (has(-1), has(0), has(1)) {
                    (false, false, false) => members.is_empty(),
                    (true, _, _) => members.len() == img.len(),
                    (false, _, true) => true,
                    (false, true, false) => false,
                };
                if !levels_ok {
                    shape_ok = false;
                    b.witness(format!("unexpected SOC set of size {}", members.len()));
                }
            }
            let mut canonical = Vec::with_capacity(rules.len());
            for r in &rules {
                canonical.push(r.to_table(guard)?);
            }
            let weak = check_all(&oracle, &canonical, Property::Sgsp, &mut b, "veto rule")?;
            // filter the wGSP tables through the weak-manipulation oracle
            let wgsp = brute_tables(&oracle, &[Property::Wgsp], guard, &mut b)?;
            let mut filtered = Vec::new();
            for t in wgsp.iter() {
                if oracle.find_weak_manipulation(t)?.is_none() {
                    filtered.push(t.clone());
                }
            }
            let same = same_family(&canonical, &filtered, &mut b, &oracle);
            let expected = 2 + 2 * (1usize << unanimous.len().min(60));
            b.notes.push(format!("{} unanimous-indifference profiles", unanimous.len()));
            Ok(b.finish(
                format!("{expected} strongly group strategy-proof tables: constants, vetoes for b, vetoes for a"),
                format!(
                    "{} canonical rules ({weak} weakly manipulable); {} of {} wGSP tables survive the weak-manipulation filter",
                    canonical.len(),
                    filtered.len(),
                    wgsp.len()
                ),
                same && shape_ok && canonical.len() == expected,
            ))
        }
    }
}

fn bijection(mut b: Builder, domain: &Arc<Domain>, kind: CharKind, guard: &Guard) -> Result<TheoremReport, TheoremError> {
    let oracle = Oracle::new(Arc::clone(domain), guard)?;
    let img = image(domain, kind, guard)?;
    let tables = rule_tables(&img, domain, guard)?;
    let not_wgsp = check_all(&oracle, &tables, Property::Wgsp, &mut b, "canonical rule")?;
    let brute = brute_tables(&oracle, &[Property::Wgsp], guard, &mut b)?;
    let same = same_family(&tables, &brute, &mut b, &oracle);
    Ok(b.finish(
        format!("antichains of the {}-element {kind} image = wGSP tables", img.len()),
        format!(
            "{} antichains ({not_wgsp} not wGSP), {} wGSP tables",
            tables.len(),
            brute.len()
        ),
        same && not_wgsp == 0 && tables.len() == brute.len(),
    ))
}

/// Raw choose-`a` bits of each table, for callers comparing families.
pub fn table_bits(tables: &[ScfTable]) -> Vec<FixedBitSet> {
    tables.iter().map(|t| t.bits().clone()).collect()
}
