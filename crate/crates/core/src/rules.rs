//! Canonical rules `φ_(χ,C)`: choose `a` exactly when the profile's character
//! lies in the upward-closed set `C`. A rule stores only the antichain of
//! minimal elements of `C`.

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use thiserror::Error;

use crate::characters::{CharError, CharKind, CharValue, Character, Image, StrongChar};
use crate::guard::{Guard, GuardError};
use crate::order::{Antichain, OrderError, SocSet};
use crate::prefs::{AgentSet, Alternative, Domain, Pair, Profile};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error("minimal element {0} is not a character value of any feasible profile")]
    NotInImage(usize),
    #[error("set is not upward closed: image element {outside} lies above member {member}")]
    NotSoc { member: usize, outside: usize },
    #[error("profile is not in the rule's domain")]
    OutsideDomain,
    #[error("profile index {0} is out of range")]
    IndexOutOfRange(u64),
    #[error("committee is not closed under supersets: {set:?} is in it but {set:?} + agent {agent} is not")]
    NotSupersetClosed { set: AgentSet, agent: usize },
    #[error("quota {q} is outside 0..={max}")]
    QuotaOutOfRange { q: usize, max: usize },
    #[error("profile {0} is not a unanimous-indifference profile of the domain")]
    NotUnanimous(u64),
    #[error("table and image belong to different domains or pairs")]
    DomainMismatch,
    #[error("table is not monotone in the character: profile {stronger} has the larger character but gets b, profile {weaker} gets a")]
    NotMonotone { stronger: u64, weaker: u64 },
}

/// An explicit function from a domain's profiles to the designated pair.
#[derive(Clone)]
pub struct ScfTable {
    domain: Arc<Domain>,
    pair: Pair,
    choose_a: FixedBitSet,
}

impl fmt::Debug for ScfTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.choose_a.len())
            .map(|i| if self.choose_a.contains(i) { 'a' } else { 'b' })
            .collect();
        write!(f, "ScfTable({s})")
    }
}

impl PartialEq for ScfTable {
    fn eq(&self, other: &Self) -> bool {
        self.pair == other.pair && self.choose_a == other.choose_a
    }
}

impl Eq for ScfTable {}

impl ScfTable {
    /// `choose_a[i]` is true when profile `i` (canonical order) gets `a`.
    pub fn new(domain: Arc<Domain>, pair: Pair, choose_a: FixedBitSet) -> Result<Self, RuleError> {
        if choose_a.len() as u64 != domain.len() {
            return Err(RuleError::DomainMismatch);
        }
        Ok(ScfTable {
            domain,
            pair,
            choose_a,
        })
    }

    pub fn from_fn<F>(domain: Arc<Domain>, pair: Pair, guard: &Guard, f: F) -> Result<Self, RuleError>
    where
        F: Fn(&Profile) -> bool + Sync,
    {
        guard.check("table", domain.len() as u128, guard.max_image)?;
        let n = domain.len() as usize;
        let bits: Vec<bool> = (0..n)
            .into_par_iter()
            .map(|i| f(&domain.profile(i as u64).expect("in range")))
            .collect();
        let mut choose_a = FixedBitSet::with_capacity(n);
        for (i, b) in bits.into_iter().enumerate() {
            choose_a.set(i, b);
        }
        Ok(ScfTable {
            domain,
            pair,
            choose_a,
        })
    }

    /// From the low `|𝓟|` bits of a mask.
    pub fn from_mask(domain: Arc<Domain>, pair: Pair, mask: u64) -> Self {
        let n = domain.len() as usize;
        let mut choose_a = FixedBitSet::with_capacity(n);
        for i in 0..n.min(64) {
            choose_a.set(i, mask >> i & 1 == 1);
        }
        ScfTable {
            domain,
            pair,
            choose_a,
        }
    }

    pub fn constant(domain: Arc<Domain>, pair: Pair, x: Alternative) -> Self {
        let n = domain.len() as usize;
        let mut choose_a = FixedBitSet::with_capacity(n);
        if x == pair.a {
            choose_a.insert_range(..);
        }
        ScfTable {
            domain,
            pair,
            choose_a,
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn pair(&self) -> Pair {
        self.pair
    }

    pub fn len(&self) -> usize {
        self.choose_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choose_a.is_empty()
    }

    pub fn chooses_a(&self, i: usize) -> bool {
        self.choose_a.contains(i)
    }

    pub fn choice(&self, i: usize) -> Alternative {
        if self.chooses_a(i) {
            self.pair.a
        } else {
            self.pair.b
        }
    }

    pub fn choice_of(&self, p: &Profile) -> Option<Alternative> {
        self.domain.index_of(p).map(|i| self.choice(i as usize))
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.choose_a
    }

    /// The same choices read against the swapped pair `(b, a)`.
    pub fn with_swapped_pair(&self) -> ScfTable {
        let mut choose_a = self.choose_a.clone();
        choose_a.toggle_range(..);
        ScfTable {
            domain: Arc::clone(&self.domain),
            pair: self.pair.swapped(),
            choose_a,
        }
    }
}

/// `φ_(χ,C)` with `C` stored as its minimal elements.
#[derive(Clone)]
pub struct CanonicalRule {
    image: Arc<Image>,
    domain: Arc<Domain>,
    minimals: Antichain,
}

impl fmt::Debug for CanonicalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CanonicalRule")
            .field("kind", &self.kind())
            .field("minimals", &self.minimal_values().collect::<Vec<_>>())
            .finish()
    }
}

impl PartialEq for CanonicalRule {
    fn eq(&self, other: &Self) -> bool {
        self.kind() == other.kind()
            && self.pair() == other.pair()
            && self.minimal_values().eq(other.minimal_values())
    }
}

impl CanonicalRule {
    /// Validates image membership and pairwise incomparability.
    pub fn from_antichain(
        image: Arc<Image>,
        domain: Arc<Domain>,
        minimals: &[CharValue],
    ) -> Result<Self, RuleError> {
        let mut idx = Vec::with_capacity(minimals.len());
        for (k, x) in minimals.iter().enumerate() {
            image.character().check_kind(x)?;
            idx.push(image.position(x).ok_or(RuleError::NotInImage(k))?);
        }
        let minimals = image.poset().antichain(idx)?;
        Ok(CanonicalRule {
            image,
            domain,
            minimals,
        })
    }

    /// From image indices of an antichain.
    pub fn from_indices(image: Arc<Image>, domain: Arc<Domain>, minimals: Antichain) -> Result<Self, RuleError> {
        let minimals = image.poset().antichain(minimals.into_vec())?;
        Ok(CanonicalRule {
            image,
            domain,
            minimals,
        })
    }

    /// From a set of image indices that must be upward closed.
    pub fn from_soc(image: Arc<Image>, domain: Arc<Domain>, members: FixedBitSet) -> Result<Self, RuleError> {
        let soc = image
            .poset()
            .soc(members)
            .map_err(|v| RuleError::NotSoc {
                member: v.member,
                outside: v.outside,
            })?;
        let minimals = image.poset().minimals_of(&soc);
        Ok(CanonicalRule {
            image,
            domain,
            minimals,
        })
    }

    /// `C = {x ∈ image : keep(x)}`, which must be upward closed.
    pub fn from_predicate<F>(image: Arc<Image>, domain: Arc<Domain>, keep: F) -> Result<Self, RuleError>
    where
        F: Fn(&CharValue) -> bool,
    {
        let mut members = FixedBitSet::with_capacity(image.len());
        for (i, x) in image.values().iter().enumerate() {
            members.set(i, keep(x));
        }
        Self::from_soc(image, domain, members)
    }

    pub fn to_soc(&self) -> SocSet {
        self.image
            .poset()
            .upward_closure(&self.minimals)
            .expect("validated antichain")
    }

    pub fn kind(&self) -> CharKind {
        self.image.kind()
    }

    pub fn pair(&self) -> Pair {
        self.image.character().pair()
    }

    pub fn image(&self) -> &Arc<Image> {
        &self.image
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn minimals(&self) -> &Antichain {
        &self.minimals
    }

    pub fn minimal_values(&self) -> impl Iterator<Item = &CharValue> + '_ {
        self.minimals.members().iter().map(|&i| self.image.value(i))
    }

    /// `a` iff `χ(P)` dominates some minimal element.
    pub fn eval(&self, p: &Profile) -> Result<Alternative, RuleError> {
        if !self.domain.contains(p) {
            return Err(RuleError::OutsideDomain);
        }
        Ok(self.eval_unchecked(p)?)
    }

    fn eval_unchecked(&self, p: &Profile) -> Result<Alternative, CharError> {
        let ch = self.image.character();
        let x = ch.of(p)?;
        let pair = self.pair();
        Ok(if self.minimal_values().any(|m| ch.leq(m, &x)) {
            pair.a
        } else {
            pair.b
        })
    }

    pub fn eval_index(&self, i: u64) -> Result<Alternative, RuleError> {
        let p = self.domain.profile(i).ok_or(RuleError::IndexOutOfRange(i))?;
        Ok(self.eval_unchecked(&p)?)
    }

    pub fn to_table(&self, guard: &Guard) -> Result<ScfTable, RuleError> {
        let soc = self.to_soc();
        let image = &self.image;
        let pair = self.pair();
        ScfTable::from_fn(Arc::clone(&self.domain), pair, guard, |p| {
            image
                .position_of_profile(p)
                .map(|i| soc.contains(i))
                .unwrap_or(false)
        })
    }
}

/// Every canonical rule on `image`, in lexicographic antichain order.
pub fn enumerate_rules(
    image: &Arc<Image>,
    domain: &Arc<Domain>,
    guard: &Guard,
) -> Result<Vec<CanonicalRule>, RuleError> {
    let antichains = image.poset().enumerate_antichains_par(guard.max_antichains)?;
    Ok(antichains
        .into_iter()
        .map(|minimals| CanonicalRule {
            image: Arc::clone(image),
            domain: Arc::clone(domain),
            minimals,
        })
        .collect())
}

fn build_image(domain: &Domain, kind: CharKind, guard: &Guard) -> Result<Arc<Image>, RuleError> {
    Ok(Arc::new(Image::of_domain(domain, kind, guard)?))
}

/// Voting by committee: `a` iff the a-supporters form a winning coalition.
/// The family must be closed under supersets (empty and full families are
/// the two constants).
pub fn committee_rule(
    family: &[AgentSet],
    domain: Arc<Domain>,
    guard: &Guard,
) -> Result<CanonicalRule, RuleError> {
    let n = domain.num_agents();
    let all = AgentSet::full(n);
    let mut members: Vec<AgentSet> = family.to_vec();
    members.sort();
    members.dedup();
    for &s in &members {
        if !s.is_subset(all) {
            return Err(RuleError::Char(CharError::Prefs(
                crate::prefs::PrefsError::UnknownAgent(s.iter().find(|&v| v >= n).unwrap_or(n)),
            )));
        }
        for v in (all - s).iter() {
            let mut bigger = s;
            bigger.insert(v);
            if members.binary_search(&bigger).is_err() {
                return Err(RuleError::NotSupersetClosed { set: s, agent: v });
            }
        }
    }
    let image = build_image(&domain, CharKind::Strict, guard)?;
    CanonicalRule::from_predicate(image, domain, |x| match x {
        CharValue::Strict(s) => members.binary_search(s).is_ok(),
        _ => false,
    })
}

/// `a` iff at least `q` agents prefer `a`. Needs a domain without a∼b.
pub fn quota_rule(q: usize, domain: Arc<Domain>, guard: &Guard) -> Result<CanonicalRule, RuleError> {
    let n = domain.num_agents();
    if q > n + 1 {
        return Err(RuleError::QuotaOutOfRange { q, max: n + 1 });
    }
    if !domain.is_pair_strict(domain.pair()) {
        return Err(CharError::IndifferenceInDomain.into());
    }
    let image = build_image(&domain, CharKind::Anon, guard)?;
    CanonicalRule::from_predicate(image, domain, |x| match x {
        CharValue::Anon(k) => k.0[0] as usize >= q,
        _ => false,
    })
}

fn unanimous_subset(domain: &Domain, u: &[Profile]) -> Result<Vec<Profile>, RuleError> {
    let pair = domain.pair();
    let mut out = Vec::with_capacity(u.len());
    for p in u {
        let i = domain.index_of(p).ok_or(RuleError::OutsideDomain)?;
        if !p.prefs().iter().all(|w| pair.is_indifferent(w)) {
            return Err(RuleError::NotUnanimous(i));
        }
        out.push(p.clone());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn veto_rule(
    u: &[Profile],
    domain: Arc<Domain>,
    guard: &Guard,
    levels: &[i8],
) -> Result<CanonicalRule, RuleError> {
    let u = unanimous_subset(&domain, u)?;
    let image = build_image(&domain, CharKind::Strong, guard)?;
    CanonicalRule::from_predicate(image, domain, |x| match x {
        CharValue::Strong(StrongChar::Level(l)) => levels.contains(l),
        CharValue::Strong(StrongChar::Unanimous(p)) => u.binary_search(p).is_ok(),
        _ => false,
    })
}

/// `a` iff someone prefers `a`, or the profile is one of the listed
/// unanimous-indifference profiles. The characterization behind this rule
/// family assumes at least three agents.
pub fn veto_for_b(u: &[Profile], domain: Arc<Domain>, guard: &Guard) -> Result<CanonicalRule, RuleError> {
    veto_rule(u, domain, guard, &[0, 1])
}

/// `a` iff someone prefers `a` and nobody prefers `b`, or the profile is one
/// of the listed unanimous-indifference profiles.
pub fn veto_for_a(u: &[Profile], domain: Arc<Domain>, guard: &Guard) -> Result<CanonicalRule, RuleError> {
    veto_rule(u, domain, guard, &[1])
}

/// The set `{χ(P) : φ(P) = a}` as a rule, provided it is upward closed and
/// no character value is split between `a` and `b`.
pub fn extract_rule(table: &ScfTable, image: Arc<Image>) -> Result<CanonicalRule, RuleError> {
    if image.character().pair() != table.pair() {
        return Err(RuleError::DomainMismatch);
    }
    let k = image.len();
    // a representative profile per image value and outcome
    let mut with_a: Vec<Option<u64>> = vec![None; k];
    let mut with_b: Vec<Option<u64>> = vec![None; k];
    let positions: Vec<Result<usize, CharError>> = (0..table.len())
        .into_par_iter()
        .map(|i| {
            let p = table.domain().profile(i as u64).expect("in range");
            image.position_of_profile(&p)
        })
        .collect();
    for (i, pos) in positions.into_iter().enumerate() {
        let j = pos?;
        let slot = if table.chooses_a(i) {
            &mut with_a[j]
        } else {
            &mut with_b[j]
        };
        slot.get_or_insert(i as u64);
    }
    for j in 0..k {
        if let (Some(pa), Some(pb)) = (with_a[j], with_b[j]) {
            return Err(RuleError::NotMonotone {
                stronger: pb,
                weaker: pa,
            });
        }
    }
    let mut members = FixedBitSet::with_capacity(k);
    for (j, x) in with_a.iter().enumerate() {
        members.set(j, x.is_some());
    }
    if let Err(v) = image.poset().is_soc(&members) {
        return Err(RuleError::NotMonotone {
            stronger: with_b[v.outside].expect("image value outside C is realized by a b-profile"),
            weaker: with_a[v.member].expect("member realized by an a-profile"),
        });
    }
    let rule = CanonicalRule::from_soc(image, Arc::clone(table.domain()), members)?;
    debug_assert!(rule
        .to_table(&Guard {
            max_image: usize::MAX,
            ..Guard::default()
        })
        .map(|t| &t == table)
        .unwrap_or(false));
    Ok(rule)
}

/// `C_φ` for a table, or a monotonicity witness.
pub fn extract_soc(table: &ScfTable, image: Arc<Image>) -> Result<SocSet, RuleError> {
    extract_rule(table, image).map(|r| r.to_soc())
}

/// The character bound to a domain's own pair.
pub fn character_for(domain: &Domain, kind: CharKind) -> Result<Character, RuleError> {
    Ok(Character::new(kind, domain.pair(), domain)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefs::Preference;

    fn guard() -> Guard {
        Guard::default()
    }

    fn strict(n: usize) -> Arc<Domain> {
        Arc::new(Domain::strict_universal_default(2, n).unwrap())
    }

    fn d_a(p: &Profile) -> usize {
        let pair = Pair::new(Alternative(0), Alternative(1)).unwrap();
        crate::prefs::d_set(p, pair.a, pair).unwrap().len()
    }

    #[test]
    fn empty_and_full_soc_are_constants() {
        let d = strict(2);
        let img = build_image(&d, CharKind::Strict, &guard()).unwrap();
        let empty = CanonicalRule::from_antichain(Arc::clone(&img), Arc::clone(&d), &[]).unwrap();
        let mut all = FixedBitSet::with_capacity(img.len());
        all.insert_range(..);
        let full = CanonicalRule::from_soc(Arc::clone(&img), Arc::clone(&d), all).unwrap();
        for i in 0..d.len() {
            assert_eq!(empty.eval_index(i).unwrap(), Alternative(1));
            assert_eq!(full.eval_index(i).unwrap(), Alternative(0));
        }
    }

    #[test]
    fn dictatorship_from_soc() {
        let d = strict(2);
        let img = build_image(&d, CharKind::Strict, &guard()).unwrap();
        let v1 = CharValue::Strict(AgentSet::singleton(0));
        let rule = CanonicalRule::from_antichain(img, Arc::clone(&d), &[v1]).unwrap();
        for p in d.profiles() {
            let expected = if p.prefs()[0].strictly_prefers(Alternative(0), Alternative(1)).unwrap() {
                Alternative(0)
            } else {
                Alternative(1)
            };
            assert_eq!(rule.eval(&p).unwrap(), expected);
        }
        assert_eq!(rule.to_soc().len(), 2);
    }

    #[test]
    fn from_soc_rejects_non_closed_sets() {
        let d = strict(2);
        let img = build_image(&d, CharKind::Strict, &guard()).unwrap();
        let mut only_bottom = FixedBitSet::with_capacity(img.len());
        only_bottom.insert(0);
        assert!(matches!(
            CanonicalRule::from_soc(img, d, only_bottom),
            Err(RuleError::NotSoc { member: 0, .. })
        ));
    }

    #[test]
    fn from_antichain_rejects_comparable_and_foreign_values() {
        let d = strict(2);
        let img = build_image(&d, CharKind::Strict, &guard()).unwrap();
        let x = CharValue::Strict(AgentSet::singleton(0));
        let top = CharValue::Strict(AgentSet::full(2));
        assert!(matches!(
            CanonicalRule::from_antichain(Arc::clone(&img), Arc::clone(&d), &[x, top]),
            Err(RuleError::Order(OrderError::NotAntichain(..)))
        ));
        let foreign = CharValue::Strict(AgentSet::singleton(5));
        assert!(matches!(
            CanonicalRule::from_antichain(Arc::clone(&img), Arc::clone(&d), &[foreign]),
            Err(RuleError::NotInImage(0))
        ));
        let wrong_kind = CharValue::Strong(StrongChar::Level(1));
        assert!(matches!(
            CanonicalRule::from_antichain(img, d, &[wrong_kind]),
            Err(RuleError::Char(CharError::KindMismatch { .. }))
        ));
    }

    #[test]
    fn committee_examples() {
        let d = strict(3);
        let all: Vec<AgentSet> = AgentSet::full(3).subsets().collect();
        let with_v1: Vec<AgentSet> = all.iter().copied().filter(|s| s.contains(0)).collect();
        let dict = committee_rule(&with_v1, Arc::clone(&d), &guard()).unwrap();
        assert_eq!(dict.minimals().len(), 1);
        let majority: Vec<AgentSet> = all.iter().copied().filter(|s| s.len() >= 2).collect();
        let maj = committee_rule(&majority, Arc::clone(&d), &guard()).unwrap();
        for p in d.profiles() {
            let expected = if d_a(&p) >= 2 { Alternative(0) } else { Alternative(1) };
            assert_eq!(maj.eval(&p).unwrap(), expected);
        }
        let nonempty: Vec<AgentSet> = all.iter().copied().filter(|s| !s.is_empty()).collect();
        let some = committee_rule(&nonempty, Arc::clone(&d), &guard()).unwrap();
        assert_eq!(some.minimals().len(), 3);
        let bad = vec![AgentSet::singleton(0)];
        assert!(matches!(
            committee_rule(&bad, d, &guard()),
            Err(RuleError::NotSupersetClosed { .. })
        ));
    }

    #[test]
    fn quota_examples() {
        let d = strict(3);
        for p in d.profiles() {
            assert_eq!(quota_rule(0, Arc::clone(&d), &guard()).unwrap().eval(&p).unwrap(), Alternative(0));
            assert_eq!(quota_rule(4, Arc::clone(&d), &guard()).unwrap().eval(&p).unwrap(), Alternative(1));
            let maj = quota_rule(2, Arc::clone(&d), &guard()).unwrap();
            let expected = if d_a(&p) >= 2 { Alternative(0) } else { Alternative(1) };
            assert_eq!(maj.eval(&p).unwrap(), expected);
        }
        assert!(matches!(
            quota_rule(5, Arc::clone(&d), &guard()),
            Err(RuleError::QuotaOutOfRange { q: 5, max: 4 })
        ));
        let uni = Arc::new(Domain::universal_default(2, 3).unwrap());
        assert!(quota_rule(1, uni, &guard()).is_err());
    }

    #[test]
    fn veto_examples() {
        let d = Arc::new(Domain::universal_default(2, 3).unwrap());
        let pair = d.pair();
        let pa = Preference::from_ranks(&[0, 1]);
        let pb = Preference::from_ranks(&[1, 0]);
        let pi = Preference::from_ranks(&[0, 0]);
        let one_a = Profile::new(vec![pa.clone(), pb.clone(), pi.clone()]).unwrap();
        let vb = veto_for_b(&[], Arc::clone(&d), &guard()).unwrap();
        assert_eq!(vb.eval(&one_a).unwrap(), pair.a);
        let va = veto_for_a(&[], Arc::clone(&d), &guard()).unwrap();
        assert_eq!(va.eval(&one_a).unwrap(), pair.b);
        let unanimous = Profile::new(vec![pi.clone(); 3]).unwrap();
        assert_eq!(vb.eval(&unanimous).unwrap(), pair.b);
        let vb_all = veto_for_b(std::slice::from_ref(&unanimous), Arc::clone(&d), &guard()).unwrap();
        assert_eq!(vb_all.eval(&unanimous).unwrap(), pair.a);
        assert!(matches!(
            veto_for_b(&[one_a], d, &guard()),
            Err(RuleError::NotUnanimous(_))
        ));
    }

    #[test]
    fn eval_rejects_profiles_outside_domain() {
        let d = strict(2);
        let rule = quota_rule(1, Arc::clone(&d), &guard()).unwrap();
        let tie = Profile::new(vec![Preference::from_ranks(&[0, 0]); 2]).unwrap();
        assert_eq!(rule.eval(&tie), Err(RuleError::OutsideDomain));
        assert_eq!(rule.eval_index(99), Err(RuleError::IndexOutOfRange(99)));
    }

    #[test]
    fn extraction_roundtrips_every_rule() {
        let d = Arc::new(Domain::universal_default(2, 2).unwrap());
        let img = build_image(&d, CharKind::General, &guard()).unwrap();
        let rules = enumerate_rules(&img, &d, &guard()).unwrap();
        let tables: Vec<ScfTable> = rules.iter().map(|r| r.to_table(&guard()).unwrap()).collect();
        for (r, t) in rules.iter().zip(&tables) {
            let back = extract_rule(t, Arc::clone(&img)).unwrap();
            assert_eq!(&back, r);
            assert_eq!(back.to_soc(), r.to_soc());
        }
        // distinct parameters give distinct functions
        let mut bits: Vec<_> = tables.iter().map(|t| t.bits().clone()).collect();
        bits.sort_by_key(|b| b.ones().collect::<Vec<_>>());
        bits.dedup();
        assert_eq!(bits.len(), rules.len());
    }

    #[test]
    fn constant_a_extracts_full_image() {
        let d = Arc::new(Domain::universal_default(3, 2).unwrap());
        let img = build_image(&d, CharKind::General, &guard()).unwrap();
        let t = ScfTable::constant(Arc::clone(&d), d.pair(), d.pair().a);
        assert_eq!(extract_soc(&t, Arc::clone(&img)).unwrap().len(), img.len());
    }

    #[test]
    fn extraction_reports_anti_monotone_tables() {
        let d = strict(2);
        let img = build_image(&d, CharKind::Strict, &guard()).unwrap();
        // a only when nobody supports a
        let t = ScfTable::from_fn(Arc::clone(&d), d.pair(), &guard(), |p| d_a(p) == 0).unwrap();
        match extract_rule(&t, img) {
            Err(RuleError::NotMonotone { stronger, weaker }) => {
                assert!(!t.chooses_a(stronger as usize));
                assert!(t.chooses_a(weaker as usize));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn swapping_labels_complements_the_parameter() {
        let d = Arc::new(Domain::universal_default(3, 2).unwrap());
        let img = build_image(&d, CharKind::General, &guard()).unwrap();
        let swapped = Arc::new(d.with_pair(d.pair().swapped()).unwrap());
        let img_swapped = build_image(&swapped, CharKind::General, &guard()).unwrap();
        let rules = enumerate_rules(&img, &d, &guard()).unwrap();
        for r in rules.iter().step_by(97) {
            let t = r.to_table(&guard()).unwrap();
            let ts = ScfTable::new(Arc::clone(&swapped), swapped.pair(), t.with_swapped_pair().bits().clone()).unwrap();
            let back = extract_rule(&ts, Arc::clone(&img_swapped)).unwrap();
            let bt = back.to_table(&guard()).unwrap();
            for i in 0..d.len() as usize {
                assert_eq!(bt.choice(i), t.choice(i));
            }
        }
    }
}
