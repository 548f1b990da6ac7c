//! Preferences, profiles and the primitive agent-set operators.
//!
//! A [`Preference`] is a weak order over the alternatives, stored as an
//! ordered partition into indifference classes (best class first). The
//! representation is canonical: two preferences are structurally equal
//! exactly when they induce the same relation, so "agent `v` reports the same
//! preference in `P` and `Q`" is plain `==`.

mod agents;
mod domain;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use agents::{Agent, AgentSet, MAX_AGENTS};
pub use domain::{
    agent_labels, all_linear_orders, all_weak_orders, alternative_labels, Domain, DomainError,
    DomainFlags,
};

/// Dense alternative id in `0..|A|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alternative(pub u32);

impl Alternative {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrefsError {
    #[error("unknown alternative {0}")]
    UnknownAlternative(Alternative),
    #[error("preference has an empty indifference class")]
    EmptyClass,
    #[error("alternative {0} appears more than once in a preference")]
    RepeatedAlternative(Alternative),
    #[error("preference ranks {ranked} alternatives, expected {expected}")]
    IncompleteRanking { ranked: usize, expected: usize },
    #[error("the designated pair needs two distinct alternatives, got {0} twice")]
    DegeneratePair(Alternative),
    #[error("alternative {0} is not a member of the designated pair")]
    NotInPair(Alternative),
    #[error("agent {0} is outside the agent set")]
    UnknownAgent(Agent),
    #[error("profiles disagree on the agent set ({left} vs {right} agents)")]
    AgentCountMismatch { left: usize, right: usize },
    #[error("profiles disagree on the alternative set ({left} vs {right} alternatives)")]
    AlternativeCountMismatch { left: usize, right: usize },
    #[error("listed preference {0} does not rank the pair as indifferent")]
    NotIndifferent(usize),
    #[error("agent {0} is indifferent between the pair with a preference missing from the list")]
    UnlistedIndifference(Agent),
    #[error("at most {MAX_AGENTS} agents are supported, got {0}")]
    TooManyAgents(usize),
    #[error("a domain needs at least two alternatives, got {0}")]
    TooFewAlternatives(usize),
    #[error("a domain needs at least one agent")]
    NoAgents,
    #[error("a domain needs at least one feasible profile")]
    EmptyDomain,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("domain size overflows u64")]
    DomainTooLarge,
}

/// Outcome of comparing two alternatives under a preference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparison {
    XPreferred,
    Indifferent,
    YPreferred,
}

/// A complete, transitive weak order over `0..m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Preference {
    classes: Vec<Vec<Alternative>>,
    // rank[x] = index of the class containing x; derived from `classes`.
    rank: Vec<u32>,
}

impl Preference {
    /// Builds a preference from indifference classes, best first.
    pub fn from_classes(
        classes: Vec<Vec<Alternative>>,
        num_alternatives: usize,
    ) -> Result<Self, PrefsError> {
        let mut rank = vec![u32::MAX; num_alternatives];
        let mut classes = classes;
        let mut ranked = 0usize;
        for (ci, class) in classes.iter_mut().enumerate() {
            if class.is_empty() {
                return Err(PrefsError::EmptyClass);
            }
            class.sort_unstable();
            for &x in class.iter() {
                let slot = rank
                    .get_mut(x.index())
                    .ok_or(PrefsError::UnknownAlternative(x))?;
                if *slot != u32::MAX {
                    return Err(PrefsError::RepeatedAlternative(x));
                }
                *slot = ci as u32;
                ranked += 1;
            }
        }
        if ranked != num_alternatives {
            return Err(PrefsError::IncompleteRanking {
                ranked,
                expected: num_alternatives,
            });
        }
        Ok(Preference { classes, rank })
    }

    /// Builds a preference from a rank vector (lower rank = better). Ranks
    /// need not be dense; they are compacted.
    pub fn from_ranks(ranks: &[u32]) -> Self {
        let mut distinct: Vec<u32> = ranks.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let mut classes = vec![Vec::new(); distinct.len()];
        let mut rank = Vec::with_capacity(ranks.len());
        for (x, r) in ranks.iter().enumerate() {
            let ci = distinct.binary_search(r).expect("rank present");
            classes[ci].push(Alternative(x as u32));
            rank.push(ci as u32);
        }
        Preference { classes, rank }
    }

    /// A linear order listing alternatives best first.
    pub fn linear(order: &[Alternative]) -> Result<Self, PrefsError> {
        Self::from_classes(order.iter().map(|&x| vec![x]).collect(), order.len())
    }

    pub fn classes(&self) -> &[Vec<Alternative>] {
        &self.classes
    }

    pub fn num_alternatives(&self) -> usize {
        self.rank.len()
    }

    /// Class index of `x` (0 = most preferred).
    pub fn rank(&self, x: Alternative) -> Result<u32, PrefsError> {
        self.rank
            .get(x.index())
            .copied()
            .ok_or(PrefsError::UnknownAlternative(x))
    }

    pub fn is_strict(&self) -> bool {
        self.classes.iter().all(|c| c.len() == 1)
    }

    pub fn compare(&self, x: Alternative, y: Alternative) -> Result<Comparison, PrefsError> {
        let (rx, ry) = (self.rank(x)?, self.rank(y)?);
        Ok(match rx.cmp(&ry) {
            std::cmp::Ordering::Less => Comparison::XPreferred,
            std::cmp::Ordering::Equal => Comparison::Indifferent,
            std::cmp::Ordering::Greater => Comparison::YPreferred,
        })
    }

    /// `x` is at least as good as `y`.
    pub fn weakly_prefers(&self, x: Alternative, y: Alternative) -> Result<bool, PrefsError> {
        Ok(self.compare(x, y)? != Comparison::YPreferred)
    }

    /// `x` is strictly better than `y`.
    pub fn strictly_prefers(&self, x: Alternative, y: Alternative) -> Result<bool, PrefsError> {
        Ok(self.compare(x, y)? == Comparison::XPreferred)
    }

    /// Canonical byte encoding: one big-endian `u16` class index per alternative.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        for &r in &self.rank {
            out.extend_from_slice(&(r as u16).to_be_bytes());
        }
    }
}

/// `compare(W, x, y)`.
pub fn compare(w: &Preference, x: Alternative, y: Alternative) -> Result<Comparison, PrefsError> {
    w.compare(x, y)
}

/// The designated pair `(a, b)` of realizable alternatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pair {
    pub a: Alternative,
    pub b: Alternative,
}

/// An agent's position on the pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stance {
    PrefersA,
    Indifferent,
    PrefersB,
}

impl Pair {
    pub fn new(a: Alternative, b: Alternative) -> Result<Self, PrefsError> {
        if a == b {
            return Err(PrefsError::DegeneratePair(a));
        }
        Ok(Pair { a, b })
    }

    pub fn swapped(self) -> Self {
        Pair {
            a: self.b,
            b: self.a,
        }
    }

    pub fn contains(self, x: Alternative) -> bool {
        x == self.a || x == self.b
    }

    pub fn other(self, x: Alternative) -> Result<Alternative, PrefsError> {
        if x == self.a {
            Ok(self.b)
        } else if x == self.b {
            Ok(self.a)
        } else {
            Err(PrefsError::NotInPair(x))
        }
    }

    pub fn stance(self, w: &Preference) -> Result<Stance, PrefsError> {
        Ok(match w.compare(self.a, self.b)? {
            Comparison::XPreferred => Stance::PrefersA,
            Comparison::Indifferent => Stance::Indifferent,
            Comparison::YPreferred => Stance::PrefersB,
        })
    }

    pub fn is_indifferent(self, w: &Preference) -> bool {
        matches!(self.stance(w), Ok(Stance::Indifferent))
    }
}

/// A total assignment of preferences to agents `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile(Vec<Preference>);

impl Profile {
    pub fn new(prefs: Vec<Preference>) -> Result<Self, PrefsError> {
        if prefs.is_empty() {
            return Err(PrefsError::NoAgents);
        }
        if prefs.len() > MAX_AGENTS {
            return Err(PrefsError::TooManyAgents(prefs.len()));
        }
        let m = prefs[0].num_alternatives();
        if let Some(w) = prefs.iter().find(|w| w.num_alternatives() != m) {
            return Err(PrefsError::AlternativeCountMismatch {
                left: m,
                right: w.num_alternatives(),
            });
        }
        Ok(Profile(prefs))
    }

    pub fn num_agents(&self) -> usize {
        self.0.len()
    }

    pub fn num_alternatives(&self) -> usize {
        self.0[0].num_alternatives()
    }

    pub fn agents(&self) -> AgentSet {
        AgentSet::full(self.0.len())
    }

    pub fn get(&self, v: Agent) -> Option<&Preference> {
        self.0.get(v)
    }

    pub fn prefs(&self) -> &[Preference] {
        &self.0
    }

    pub(crate) fn prefs_mut(&mut self) -> &mut [Preference] {
        &mut self.0
    }

    /// `P ∘ σ`: agent `v` receives `P_{σ(v)}`.
    pub fn permuted(&self, sigma: &[Agent]) -> Profile {
        Profile(sigma.iter().map(|&s| self.0[s].clone()).collect())
    }

    /// The profile with agents `i` and `j` exchanging preferences.
    pub fn transposed(&self, i: Agent, j: Agent) -> Profile {
        let mut p = self.clone();
        p.0.swap(i, j);
        p
    }

    pub fn restrict(&self, t: AgentSet) -> PartialProfile {
        PartialProfile(t.iter().map(|v| (v, self.0[v].clone())).collect())
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        for w in &self.0 {
            w.encode_into(out);
        }
    }

    fn check_compatible(&self, other: &Profile) -> Result<(), PrefsError> {
        if self.num_agents() != other.num_agents() {
            return Err(PrefsError::AgentCountMismatch {
                left: self.num_agents(),
                right: other.num_agents(),
            });
        }
        if self.num_alternatives() != other.num_alternatives() {
            return Err(PrefsError::AlternativeCountMismatch {
                left: self.num_alternatives(),
                right: other.num_alternatives(),
            });
        }
        Ok(())
    }
}

/// Preferences of a subset of agents; may be empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialProfile(BTreeMap<Agent, Preference>);

impl PartialProfile {
    pub fn empty() -> Self {
        PartialProfile(BTreeMap::new())
    }

    pub fn from_map(map: BTreeMap<Agent, Preference>) -> Self {
        PartialProfile(map)
    }

    pub fn domain(&self) -> AgentSet {
        self.0.keys().copied().collect()
    }

    pub fn get(&self, v: Agent) -> Option<&Preference> {
        self.0.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Agent, &Preference)> {
        self.0.iter().map(|(&v, w)| (v, w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_pair_member(x: Alternative, pair: Pair) -> Result<(), PrefsError> {
    if pair.contains(x) {
        Ok(())
    } else {
        Err(PrefsError::NotInPair(x))
    }
}

/// Agents strictly preferring `x` to the other member of the pair.
pub fn d_set(p: &Profile, x: Alternative, pair: Pair) -> Result<AgentSet, PrefsError> {
    check_pair_member(x, pair)?;
    let y = pair.other(x)?;
    let mut out = AgentSet::empty();
    for (v, w) in p.prefs().iter().enumerate() {
        if w.strictly_prefers(x, y)? {
            out.insert(v);
        }
    }
    Ok(out)
}

/// Agents indifferent between `a` and `b`.
pub fn i_set(p: &Profile, pair: Pair) -> Result<AgentSet, PrefsError> {
    let mut out = AgentSet::empty();
    for (v, w) in p.prefs().iter().enumerate() {
        if w.compare(pair.a, pair.b)? == Comparison::Indifferent {
            out.insert(v);
        }
    }
    Ok(out)
}

/// `D(x, P) ∪ I(P)`.
pub fn tilde_d_set(p: &Profile, x: Alternative, pair: Pair) -> Result<AgentSet, PrefsError> {
    Ok(d_set(p, x, pair)? | i_set(p, pair)?)
}

/// Counts of agents holding each listed a∼b preference. Every listed
/// preference must rank the pair as indifferent, and every indifferent agent
/// must hold a listed preference.
pub fn i_partition(
    p: &Profile,
    pair: Pair,
    indiff_prefs: &[Preference],
) -> Result<Vec<u32>, PrefsError> {
    for (i, w) in indiff_prefs.iter().enumerate() {
        if w.compare(pair.a, pair.b)? != Comparison::Indifferent {
            return Err(PrefsError::NotIndifferent(i));
        }
    }
    let mut counts = vec![0u32; indiff_prefs.len()];
    for (v, w) in p.prefs().iter().enumerate() {
        if w.compare(pair.a, pair.b)? == Comparison::Indifferent {
            let i = indiff_prefs
                .iter()
                .position(|x| x == w)
                .ok_or(PrefsError::UnlistedIndifference(v))?;
            counts[i] += 1;
        }
    }
    Ok(counts)
}

/// `[P_T, Q_{T^c}]`.
pub fn splice(p: &Profile, q: &Profile, t: AgentSet) -> Result<Profile, PrefsError> {
    p.check_compatible(q)?;
    if let Some(v) = t.iter().find(|&v| v >= p.num_agents()) {
        return Err(PrefsError::UnknownAgent(v));
    }
    let prefs = (0..p.num_agents())
        .map(|v| if t.contains(v) { p.0[v].clone() } else { q.0[v].clone() })
        .collect();
    Ok(Profile(prefs))
}

/// `P` supports `x` at least as `Q` does: `D(x,Q) ⊆ D(x,P)` and every agent of
/// `I(Q) \ D(x,P)` reports the very same preference in both profiles.
pub fn supports_at_least(
    p: &Profile,
    q: &Profile,
    x: Alternative,
    pair: Pair,
) -> Result<bool, PrefsError> {
    p.check_compatible(q)?;
    let dp = d_set(p, x, pair)?;
    let dq = d_set(q, x, pair)?;
    if !dq.is_subset(dp) {
        return Ok(false);
    }
    let iq = i_set(q, pair)?;
    Ok((iq - dp).iter().all(|v| p.0[v] == q.0[v]))
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Alternative = Alternative(0);
    const B: Alternative = Alternative(1);
    const C: Alternative = Alternative(2);

    fn pref(classes: &[&[u32]], m: usize) -> Preference {
        Preference::from_classes(
            classes
                .iter()
                .map(|c| c.iter().map(|&x| Alternative(x)).collect())
                .collect(),
            m,
        )
        .unwrap()
    }

    fn pair() -> Pair {
        Pair::new(A, B).unwrap()
    }

    // v1 holds c ≻ a∼b, v2 holds a ≻ b ≻ c.
    fn example_p() -> Profile {
        Profile::new(vec![pref(&[&[2], &[0, 1]], 3), pref(&[&[0], &[1], &[2]], 3)]).unwrap()
    }

    fn example_q() -> Profile {
        Profile::new(vec![pref(&[&[0, 1], &[2]], 3), pref(&[&[0], &[1], &[2]], 3)]).unwrap()
    }

    #[test]
    fn compare_examples() {
        let w = pref(&[&[2], &[0, 1]], 3);
        assert_eq!(compare(&w, A, B).unwrap(), Comparison::Indifferent);
        let chain = pref(&[&[0], &[1], &[2]], 3);
        assert_eq!(compare(&chain, A, B).unwrap(), Comparison::XPreferred);
        assert_eq!(compare(&chain, C, C).unwrap(), Comparison::Indifferent);
        assert_eq!(
            compare(&chain, A, Alternative(7)),
            Err(PrefsError::UnknownAlternative(Alternative(7)))
        );
    }

    #[test]
    fn canonical_form_sorts_within_classes() {
        let x = pref(&[&[1, 0], &[2]], 3);
        let y = pref(&[&[0, 1], &[2]], 3);
        assert_eq!(x, y);
        assert!(!x.is_strict());
        assert!(pref(&[&[2], &[0], &[1]], 3).is_strict());
    }

    #[test]
    fn malformed_preferences_rejected() {
        let mk = |c: Vec<Vec<u32>>| {
            Preference::from_classes(
                c.into_iter()
                    .map(|c| c.into_iter().map(Alternative).collect())
                    .collect(),
                3,
            )
        };
        assert_eq!(mk(vec![vec![0], vec![], vec![1, 2]]), Err(PrefsError::EmptyClass));
        assert_eq!(
            mk(vec![vec![0], vec![0, 1, 2]]),
            Err(PrefsError::RepeatedAlternative(A))
        );
        assert_eq!(
            mk(vec![vec![0, 1]]),
            Err(PrefsError::IncompleteRanking {
                ranked: 2,
                expected: 3
            })
        );
        assert_eq!(
            mk(vec![vec![0, 1, 5]]),
            Err(PrefsError::UnknownAlternative(Alternative(5)))
        );
    }

    #[test]
    fn degenerate_pair_rejected() {
        assert_eq!(Pair::new(A, A), Err(PrefsError::DegeneratePair(A)));
    }

    #[test]
    fn primitive_sets_of_example_profile() {
        let p = example_p();
        assert_eq!(d_set(&p, A, pair()).unwrap(), AgentSet::from_iter([1]));
        assert_eq!(d_set(&p, B, pair()).unwrap(), AgentSet::empty());
        assert_eq!(i_set(&p, pair()).unwrap(), AgentSet::from_iter([0]));
        assert_eq!(tilde_d_set(&p, A, pair()).unwrap(), AgentSet::full(2));
        assert_eq!(d_set(&p, C, pair()), Err(PrefsError::NotInPair(C)));
    }

    #[test]
    fn unanimous_and_strict_profiles() {
        let tie = pref(&[&[0, 1]], 2);
        let u = Profile::new(vec![tie.clone(), tie.clone(), tie]).unwrap();
        assert!(d_set(&u, A, pair()).unwrap().is_empty());
        assert_eq!(i_set(&u, pair()).unwrap(), AgentSet::full(3));
        let ab = pref(&[&[0], &[1]], 2);
        let s = Profile::new(vec![ab.clone(), ab]).unwrap();
        assert_eq!(d_set(&s, A, pair()).unwrap(), AgentSet::full(2));
        assert!(i_set(&s, pair()).unwrap().is_empty());
    }

    #[test]
    fn i_partition_counts() {
        let w1 = pref(&[&[0, 1], &[2]], 3);
        let w2 = pref(&[&[0, 1, 2]], 3);
        let w3 = pref(&[&[2], &[0, 1]], 3);
        let ab = pref(&[&[0], &[1], &[2]], 3);
        let list = vec![w1.clone(), w2.clone(), w3.clone()];
        let p = Profile::new(vec![w1.clone(), w3.clone(), w1.clone(), ab.clone(), w1]).unwrap();
        assert_eq!(i_partition(&p, pair(), &list).unwrap(), vec![3, 0, 1]);
        let strict = Profile::new(vec![ab.clone(), ab.clone()]).unwrap();
        assert_eq!(i_partition(&strict, pair(), &list).unwrap(), vec![0, 0, 0]);
        assert_eq!(
            i_partition(&strict, pair(), &[ab]),
            Err(PrefsError::NotIndifferent(0))
        );
        let q = Profile::new(vec![w2]).unwrap();
        assert_eq!(
            i_partition(&q, pair(), &[w3]),
            Err(PrefsError::UnlistedIndifference(0))
        );
    }

    #[test]
    fn splice_edge_cases() {
        let p = example_p();
        let q = example_q();
        assert_eq!(splice(&p, &q, AgentSet::full(2)).unwrap(), p);
        assert_eq!(splice(&p, &q, AgentSet::empty()).unwrap(), q);
        assert_eq!(splice(&p, &p, AgentSet::from_iter([1])).unwrap(), p);
        let mixed = splice(&p, &q, AgentSet::from_iter([0])).unwrap();
        assert_eq!(mixed.get(0), p.get(0));
        assert_eq!(mixed.get(1), q.get(1));
        assert_eq!(
            splice(&p, &q, AgentSet::from_iter([5])),
            Err(PrefsError::UnknownAgent(5))
        );
    }

    #[test]
    fn support_relation_examples() {
        let p = example_p();
        let q = example_q();
        assert!(supports_at_least(&p, &p, A, pair()).unwrap());
        // v1 is indifferent in P, does not move to a in Q, but changes its full preference.
        assert!(!supports_at_least(&q, &p, A, pair()).unwrap());
        assert!(!supports_at_least(&p, &q, A, pair()).unwrap());

        let four = |c: &[&[u32]]| pref(c, 4);
        let p2 = Profile::new(vec![
            four(&[&[0], &[1], &[2], &[3]]),
            four(&[&[1], &[0], &[3], &[2]]),
        ])
        .unwrap();
        let q2 = Profile::new(vec![
            four(&[&[2], &[3], &[0], &[1]]),
            four(&[&[3], &[2], &[1], &[0]]),
        ])
        .unwrap();
        assert!(supports_at_least(&q2, &p2, A, pair()).unwrap());
        assert!(supports_at_least(&p2, &q2, B, pair()).unwrap());
    }

    #[test]
    fn support_requires_compatible_profiles() {
        let p = example_p();
        let one = Profile::new(vec![pref(&[&[0], &[1], &[2]], 3)]).unwrap();
        assert_eq!(
            supports_at_least(&p, &one, A, pair()),
            Err(PrefsError::AgentCountMismatch { left: 2, right: 1 })
        );
    }
}
