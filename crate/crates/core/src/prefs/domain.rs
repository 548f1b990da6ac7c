use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::OnceLock;

use serde::Serialize;

use super::{Alternative, Pair, Preference, PrefsError, Profile, Stance, MAX_AGENTS};
use crate::guard::{Guard, GuardError};

/// Structure flags of a domain, computed once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DomainFlags {
    pub is_cartesian: bool,
    pub is_quasi_cartesian: bool,
    pub is_strict_universal: bool,
    pub is_universal: bool,
}

/// A finite set of feasible profiles over fixed agents and alternatives.
///
/// Profiles are kept in canonical (lexicographic) order, so a profile's index
/// is stable. A domain is either an explicit list or a cartesian product of
/// per-agent preference sets that is expanded lazily.
#[derive(Clone, Debug)]
pub struct Domain {
    alternatives: Vec<String>,
    agents: Vec<String>,
    pair: Pair,
    storage: Storage,
    flags: OnceLock<DomainFlags>,
}

#[derive(Clone, Debug)]
enum Storage {
    Explicit {
        profiles: Vec<Profile>,
        index: HashMap<Profile, usize>,
    },
    Product {
        factors: Vec<Vec<Preference>>,
        len: u64,
    },
}

/// Default alternative labels `a, b, c, …`.
pub fn alternative_labels(m: usize) -> Vec<String> {
    (0..m)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

/// Default agent labels `v1, v2, …`.
pub fn agent_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("v{i}")).collect()
}

/// Every weak order over `m` alternatives, in canonical order.
pub fn all_weak_orders(m: usize) -> Vec<Preference> {
    let mut out = Vec::new();
    let mut ranks = vec![0u32; m];
    loop {
        // keep rank vectors whose values form a prefix 0..k
        let max = ranks.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; m.max(1)];
        for &r in &ranks {
            seen[r as usize] = true;
        }
        if seen[..=max as usize].iter().all(|&s| s) {
            out.push(Preference::from_ranks(&ranks));
        }
        let mut i = 0;
        loop {
            if i == m {
                out.sort();
                return out;
            }
            ranks[i] += 1;
            if (ranks[i] as usize) < m {
                break;
            }
            ranks[i] = 0;
            i += 1;
        }
    }
}

/// Every linear order over `m` alternatives, in canonical order.
pub fn all_linear_orders(m: usize) -> Vec<Preference> {
    fn rec(rest: &mut Vec<u32>, prefix: &mut Vec<Alternative>, out: &mut Vec<Preference>) {
        if rest.is_empty() {
            out.push(Preference::linear(prefix).expect("permutation"));
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(Alternative(x));
            rec(rest, prefix, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..m as u32).collect(), &mut Vec::new(), &mut out);
    out.sort();
    out
}

fn check_labels(labels: &[String]) -> Result<(), PrefsError> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(PrefsError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn check_shape(alternatives: &[String], agents: &[String], pair: Pair) -> Result<(), PrefsError> {
    check_labels(alternatives)?;
    check_labels(agents)?;
    if alternatives.len() < 2 {
        return Err(PrefsError::TooFewAlternatives(alternatives.len()));
    }
    if agents.is_empty() {
        return Err(PrefsError::NoAgents);
    }
    if agents.len() > MAX_AGENTS {
        return Err(PrefsError::TooManyAgents(agents.len()));
    }
    for x in [pair.a, pair.b] {
        if x.index() >= alternatives.len() {
            return Err(PrefsError::UnknownAlternative(x));
        }
    }
    Ok(())
}

fn check_profile(p: &Profile, m: usize, n: usize) -> Result<(), PrefsError> {
    if p.num_agents() != n {
        return Err(PrefsError::AgentCountMismatch {
            left: n,
            right: p.num_agents(),
        });
    }
    if p.num_alternatives() != m {
        return Err(PrefsError::AlternativeCountMismatch {
            left: m,
            right: p.num_alternatives(),
        });
    }
    Ok(())
}

fn factorial(m: usize) -> u128 {
    (1..=m as u128).product()
}

/// Number of weak orders on `m` items (ordered Bell / Fubini numbers).
fn fubini(m: usize) -> u128 {
    // a(m) = sum_{k=1..m} C(m,k) a(m-k), a(0) = 1
    let mut a = vec![1u128];
    for i in 1..=m {
        let mut binom = 1u128;
        let mut s = 0u128;
        for k in 1..=i {
            binom = binom * (i - k + 1) as u128 / k as u128;
            s += binom * a[i - k];
        }
        a.push(s);
    }
    a[m]
}

impl Domain {
    /// A domain given by an explicit list of profiles (deduplicated and sorted).
    pub fn explicit(
        alternatives: Vec<String>,
        agents: Vec<String>,
        pair: Pair,
        profiles: Vec<Profile>,
    ) -> Result<Domain, PrefsError> {
        check_shape(&alternatives, &agents, pair)?;
        for p in &profiles {
            check_profile(p, alternatives.len(), agents.len())?;
        }
        let mut profiles = profiles;
        profiles.sort();
        profiles.dedup();
        if profiles.is_empty() {
            return Err(PrefsError::EmptyDomain);
        }
        let index = profiles
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Ok(Domain {
            alternatives,
            agents,
            pair,
            storage: Storage::Explicit { profiles, index },
            flags: OnceLock::new(),
        })
    }

    /// The cartesian product of per-agent preference sets.
    pub fn product(
        alternatives: Vec<String>,
        agents: Vec<String>,
        pair: Pair,
        factors: Vec<Vec<Preference>>,
    ) -> Result<Domain, PrefsError> {
        check_shape(&alternatives, &agents, pair)?;
        if factors.len() != agents.len() {
            return Err(PrefsError::AgentCountMismatch {
                left: agents.len(),
                right: factors.len(),
            });
        }
        let mut len: u64 = 1;
        let mut factors = factors;
        for f in &mut factors {
            if let Some(w) = f
                .iter()
                .find(|w| w.num_alternatives() != alternatives.len())
            {
                return Err(PrefsError::AlternativeCountMismatch {
                    left: alternatives.len(),
                    right: w.num_alternatives(),
                });
            }
            f.sort();
            f.dedup();
            if f.is_empty() {
                return Err(PrefsError::EmptyDomain);
            }
            len = len
                .checked_mul(f.len() as u64)
                .ok_or(PrefsError::DomainTooLarge)?;
        }
        Ok(Domain {
            alternatives,
            agents,
            pair,
            storage: Storage::Product { factors, len },
            flags: OnceLock::new(),
        })
    }

    /// Every agent draws from the same preference set.
    pub fn identical(
        alternatives: Vec<String>,
        agents: Vec<String>,
        pair: Pair,
        prefs: Vec<Preference>,
    ) -> Result<Domain, PrefsError> {
        let factors = vec![prefs; agents.len()];
        Self::product(alternatives, agents, pair, factors)
    }

    /// All weak orders for every agent.
    pub fn universal(
        alternatives: Vec<String>,
        agents: Vec<String>,
        pair: Pair,
    ) -> Result<Domain, PrefsError> {
        let prefs = all_weak_orders(alternatives.len());
        Self::identical(alternatives, agents, pair, prefs)
    }

    /// All linear orders for every agent.
    pub fn strict_universal(
        alternatives: Vec<String>,
        agents: Vec<String>,
        pair: Pair,
    ) -> Result<Domain, PrefsError> {
        let prefs = all_linear_orders(alternatives.len());
        Self::identical(alternatives, agents, pair, prefs)
    }

    /// Universal domain with default labels and pair `(a, b)`.
    pub fn universal_default(m: usize, n: usize) -> Result<Domain, PrefsError> {
        let pair = Pair::new(Alternative(0), Alternative(1))?;
        Self::universal(alternative_labels(m), agent_labels(n), pair)
    }

    /// Strict universal domain with default labels and pair `(a, b)`.
    pub fn strict_universal_default(m: usize, n: usize) -> Result<Domain, PrefsError> {
        let pair = Pair::new(Alternative(0), Alternative(1))?;
        Self::strict_universal(alternative_labels(m), agent_labels(n), pair)
    }

    /// Same profiles, different designated pair.
    pub fn with_pair(&self, pair: Pair) -> Result<Domain, PrefsError> {
        check_shape(&self.alternatives, &self.agents, pair)?;
        let mut d = self.clone();
        d.pair = pair;
        Ok(d)
    }

    /// Materializes a product domain into an explicit one.
    pub fn to_explicit(&self, guard: &Guard) -> Result<Domain, DomainError> {
        let profiles = self.materialize(guard)?;
        Ok(Domain::explicit(
            self.alternatives.clone(),
            self.agents.clone(),
            self.pair,
            profiles,
        )?)
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn num_alternatives(&self) -> usize {
        self.alternatives.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn pair(&self) -> Pair {
        self.pair
    }

    pub fn alternative_id(&self, label: &str) -> Option<Alternative> {
        self.alternatives
            .iter()
            .position(|l| l == label)
            .map(|i| Alternative(i as u32))
    }

    pub fn agent_id(&self, label: &str) -> Option<usize> {
        self.agents.iter().position(|l| l == label)
    }

    pub fn alternative_label(&self, x: Alternative) -> &str {
        &self.alternatives[x.index()]
    }

    pub fn is_product(&self) -> bool {
        matches!(self.storage, Storage::Product { .. })
    }

    /// Number of feasible profiles.
    pub fn len(&self) -> u64 {
        match &self.storage {
            Storage::Explicit { profiles, .. } => profiles.len() as u64,
            Storage::Product { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `i`-th profile in canonical order.
    pub fn profile(&self, i: u64) -> Option<Cow<'_, Profile>> {
        match &self.storage {
            Storage::Explicit { profiles, .. } => profiles.get(i as usize).map(Cow::Borrowed),
            Storage::Product { factors, len } => {
                if i >= *len {
                    return None;
                }
                let mut rest = i;
                let mut prefs = vec![None; factors.len()];
                for (v, f) in factors.iter().enumerate().rev() {
                    let k = f.len() as u64;
                    prefs[v] = Some(f[(rest % k) as usize].clone());
                    rest /= k;
                }
                let prefs = prefs.into_iter().map(|w| w.expect("digit")).collect();
                Some(Cow::Owned(Profile::new(prefs).expect("validated factors")))
            }
        }
    }

    /// Profiles in canonical order.
    pub fn profiles(&self) -> impl Iterator<Item = Cow<'_, Profile>> + '_ {
        (0..self.len()).map(move |i| self.profile(i).expect("in range"))
    }

    /// Canonical index of `p`, if it is feasible.
    pub fn index_of(&self, p: &Profile) -> Option<u64> {
        if p.num_agents() != self.num_agents() || p.num_alternatives() != self.num_alternatives()
        {
            return None;
        }
        match &self.storage {
            Storage::Explicit { index, .. } => index.get(p).map(|&i| i as u64),
            Storage::Product { factors, .. } => {
                let mut i = 0u64;
                for (f, w) in factors.iter().zip(p.prefs()) {
                    let d = f.binary_search(w).ok()?;
                    i = i * f.len() as u64 + d as u64;
                }
                Some(i)
            }
        }
    }

    pub fn contains(&self, p: &Profile) -> bool {
        self.index_of(p).is_some()
    }

    /// All profiles as a vector; refused above `guard.max_image`.
    pub fn materialize(&self, guard: &Guard) -> Result<Vec<Profile>, GuardError> {
        guard.check("profile materialization", self.len() as u128, guard.max_image)?;
        Ok(self.profiles().map(Cow::into_owned).collect())
    }

    /// Per-agent sets of reported preferences (the projections `W_v`).
    pub fn factors(&self) -> Cow<'_, [Vec<Preference>]> {
        match &self.storage {
            Storage::Product { factors, .. } => Cow::Borrowed(factors),
            Storage::Explicit { profiles, .. } => {
                let mut f = vec![Vec::new(); self.num_agents()];
                for p in profiles {
                    for (v, w) in p.prefs().iter().enumerate() {
                        f[v].push(w.clone());
                    }
                }
                for x in &mut f {
                    x.sort();
                    x.dedup();
                }
                Cow::Owned(f)
            }
        }
    }

    /// Every preference reported by some agent in some profile.
    pub fn preference_universe(&self) -> Vec<Preference> {
        let mut all: Vec<Preference> = self.factors().iter().flatten().cloned().collect();
        all.sort();
        all.dedup();
        all
    }

    /// The universe's preferences ranking the pair as indifferent, in
    /// canonical order. This list fixes `τ` and the index of each `W_i`.
    pub fn indiff_prefs(&self, pair: Pair) -> Vec<Preference> {
        self.preference_universe()
            .into_iter()
            .filter(|w| pair.is_indifferent(w))
            .collect()
    }

    /// No feasible preference ranks the pair as indifferent.
    pub fn is_pair_strict(&self, pair: Pair) -> bool {
        self.indiff_prefs(pair).is_empty()
    }

    pub fn flags(&self) -> DomainFlags {
        *self.flags.get_or_init(|| {
            let is_cartesian = self.check_cartesian();
            let is_quasi_cartesian = self.check_quasi_cartesian();
            let factors = self.factors();
            let m = self.num_alternatives();
            let is_universal =
                is_cartesian && factors.iter().all(|f| f.len() as u128 == fubini(m));
            let is_strict_universal = is_cartesian
                && factors
                    .iter()
                    .all(|f| f.len() as u128 == factorial(m) && f.iter().all(Preference::is_strict));
            DomainFlags {
                is_cartesian,
                is_quasi_cartesian,
                is_strict_universal,
                is_universal,
            }
        })
    }

    pub fn is_cartesian(&self) -> bool {
        self.flags().is_cartesian
    }

    pub fn is_quasi_cartesian(&self) -> bool {
        self.flags().is_quasi_cartesian
    }

    pub fn is_universal(&self) -> bool {
        self.flags().is_universal
    }

    pub fn is_strict_universal(&self) -> bool {
        self.flags().is_strict_universal
    }

    fn check_cartesian(&self) -> bool {
        match &self.storage {
            Storage::Product { .. } => true,
            Storage::Explicit { profiles, .. } => {
                let mut size: u128 = 1;
                for f in self.factors().iter() {
                    size = size.saturating_mul(f.len() as u128);
                }
                size == profiles.len() as u128
            }
        }
    }

    /// Closure under single-agent splices: for every profile `Q`, agent `v`
    /// and reported preference `w ∈ W_v`, `Q` with `v` switched to `w` is
    /// feasible. On finite agent sets this implies closure under splicing
    /// along arbitrary coalitions (switch one agent at a time).
    fn check_quasi_cartesian(&self) -> bool {
        match &self.storage {
            Storage::Product { .. } => true,
            Storage::Explicit { profiles, index } => {
                let factors = self.factors();
                profiles.iter().all(|q| {
                    factors.iter().enumerate().all(|(v, f)| {
                        f.iter().all(|w| {
                            if q.prefs()[v] == *w {
                                return true;
                            }
                            let mut r = q.clone();
                            r.prefs_mut()[v] = w.clone();
                            index.contains_key(&r)
                        })
                    })
                })
            }
        }
    }

    /// Closure under `splice(P, Q, T)` for every pair and every coalition `T`.
    /// Exponential in `n`; refused above four agents or past the pair budget.
    pub fn is_quasi_cartesian_exhaustive(&self, guard: &Guard) -> Result<bool, GuardError> {
        guard.check("exhaustive splice check (agents)", self.num_agents() as u128, 4)?;
        guard.check(
            "exhaustive splice check (profiles)",
            self.len() as u128,
            guard.max_pair_profiles,
        )?;
        let profiles = self.materialize(guard)?;
        let all = super::AgentSet::full(self.num_agents());
        for p in &profiles {
            for q in &profiles {
                for t in all.subsets() {
                    let r = super::splice(p, q, t).expect("same shape");
                    if !self.contains(&r) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Closed under every permutation of agents. Adjacent transpositions
    /// generate the symmetric group, so those suffice.
    pub fn is_permutation_closed(&self) -> bool {
        match &self.storage {
            Storage::Product { factors, .. } => factors.windows(2).all(|w| w[0] == w[1]),
            Storage::Explicit { profiles, index } => profiles.iter().all(|p| {
                (0..self.num_agents().saturating_sub(1))
                    .all(|v| index.contains_key(&p.transposed(v, v + 1)))
            }),
        }
    }

    /// Cartesian, and every agent can report some a∼b, some a≻b and some b≻a
    /// preference.
    pub fn satisfies_minimal_assumption(&self, pair: Pair) -> bool {
        if !self.is_cartesian() {
            return false;
        }
        self.factors().iter().all(|f| {
            let has = |s: Stance| f.iter().any(|w| pair.stance(w).ok() == Some(s));
            has(Stance::Indifferent) && has(Stance::PrefersA) && has(Stance::PrefersB)
        })
    }

    /// Feasible profiles in which every agent is indifferent between the pair.
    pub fn unanimous_indifference(&self, pair: Pair, guard: &Guard) -> Result<Vec<Profile>, GuardError> {
        match &self.storage {
            Storage::Explicit { profiles, .. } => Ok(profiles
                .iter()
                .filter(|p| p.prefs().iter().all(|w| pair.is_indifferent(w)))
                .cloned()
                .collect()),
            Storage::Product { factors, .. } => {
                let sub: Vec<Vec<Preference>> = factors
                    .iter()
                    .map(|f| f.iter().filter(|w| pair.is_indifferent(w)).cloned().collect())
                    .collect();
                let mut total: u128 = 1;
                for f in &sub {
                    total = total.saturating_mul(f.len() as u128);
                }
                if total == 0 {
                    return Ok(Vec::new());
                }
                guard.check("unanimous-indifference profiles", total, guard.max_image)?;
                let d = Domain::product(
                    self.alternatives.clone(),
                    self.agents.clone(),
                    self.pair,
                    sub,
                )
                .expect("non-empty factors");
                Ok(d.profiles().map(Cow::into_owned).collect())
            }
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error(transparent)]
    Prefs(#[from] PrefsError),
    #[error(transparent)]
    Guard(#[from] GuardError),
}
