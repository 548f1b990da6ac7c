//! Brute-force ground truth: definitional property checkers over explicit
//! tables, exhaustive table enumeration, and the theorem cross-checks.
//!
//! Profile-pair loops run on the rayon pool; every witness is the
//! lexicographically first one in `(honest, misreport)` index order, so
//! results do not depend on the number of workers.

pub mod theorems;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::guard::{Guard, GuardError};
use crate::prefs::{d_set, i_set, supports_at_least, AgentSet, Alternative, Domain, Pair, Profile};
use crate::rules::ScfTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error("the domain is not closed under permutations of agents")]
    NotPermutationClosed,
    #[error("table belongs to a different domain or pair")]
    DomainMismatch,
    #[error("unknown property {0:?}")]
    UnknownProperty(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// No coalition can strongly manipulate.
    Wgsp,
    /// No coalition can weakly manipulate.
    Sgsp,
    Apr,
    Isp,
    AlmostMonotone,
    Anonymous,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Wgsp,
        Property::Sgsp,
        Property::Apr,
        Property::Isp,
        Property::AlmostMonotone,
        Property::Anonymous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Wgsp => "wgsp",
            Property::Sgsp => "sgsp",
            Property::Apr => "apr",
            Property::Isp => "isp",
            Property::AlmostMonotone => "almost-monotone",
            Property::Anonymous => "anonymous",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, OracleError> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| OracleError::UnknownProperty(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ManipulationKind {
    Strong,
    Weak,
}

/// `coalition` misreports `misreport` at the true profile `honest`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ManipulationWitness {
    pub coalition: AgentSet,
    pub honest: u64,
    pub misreport: u64,
    pub kind: ManipulationKind,
}

/// Why a property fails. Profile references are canonical domain indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    Manipulation(ManipulationWitness),
    /// Outcomes differ but no agent who changed report weakly prefers the
    /// first outcome.
    NoReversal { first: u64, second: u64 },
    /// A single agent gains by reporting differently.
    Deviation {
        agent: usize,
        honest: u64,
        misreport: u64,
    },
    /// `stronger` supports `a` at least as `weaker` does, yet only `weaker`
    /// gets `a`.
    Monotonicity { stronger: u64, weaker: u64 },
    /// Swapping two agents' reports changes the outcome.
    Transposition {
        profile: u64,
        agents: (usize, usize),
    },
}

/// Precomputed profile-pair structure of a domain for one pair `(a, b)`.
pub struct Oracle {
    domain: Arc<Domain>,
    pair: Pair,
    guard: Guard,
    profiles: Vec<Profile>,
    ids: Vec<Vec<u32>>,
    da: Vec<AgentSet>,
    db: Vec<AgentSet>,
    ind: Vec<AgentSet>,
    // (honest, misreport) pairs where every changer strictly prefers a (b)
    strong_a: Vec<(u32, u32)>,
    strong_b: Vec<(u32, u32)>,
    // changers weakly prefer a (b) and somebody strictly prefers it
    weak_a: Vec<(u32, u32)>,
    weak_b: Vec<(u32, u32)>,
    supports: OnceLock<Vec<(u32, u32)>>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("profiles", &self.profiles.len())
            .finish()
    }
}

impl Oracle {
    pub fn new(domain: Arc<Domain>, guard: &Guard) -> Result<Self, OracleError> {
        let pair = domain.pair();
        Self::with_pair(domain, pair, guard)
    }

    pub fn with_pair(domain: Arc<Domain>, pair: Pair, guard: &Guard) -> Result<Self, OracleError> {
        guard.check(
            "profile-pair search (profiles)",
            domain.len() as u128,
            guard.max_pair_profiles,
        )?;
        let profiles = domain.materialize(guard)?;
        let universe = domain.preference_universe();
        let ids: Vec<Vec<u32>> = profiles
            .iter()
            .map(|p| {
                p.prefs()
                    .iter()
                    .map(|w| universe.binary_search(w).expect("in universe") as u32)
                    .collect()
            })
            .collect();
        let da: Vec<AgentSet> = profiles.iter().map(|p| d_set(p, pair.a, pair).expect("pair")).collect();
        let db: Vec<AgentSet> = profiles.iter().map(|p| d_set(p, pair.b, pair).expect("pair")).collect();
        let ind: Vec<AgentSet> = profiles.iter().map(|p| i_set(p, pair).expect("pair")).collect();
        let n = profiles.len();
        type Lists = [Vec<(u32, u32)>; 4];
        let per_honest: Vec<Lists> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut out: Lists = Default::default();
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d = diff(&ids[i], &ids[j]);
                    let e = (i as u32, j as u32);
                    if d.is_subset(da[i]) {
                        out[0].push(e);
                    }
                    if d.is_subset(db[i]) {
                        out[1].push(e);
                    }
                    if !da[i].is_empty() && d.is_subset(da[i] | ind[i]) {
                        out[2].push(e);
                    }
                    if !db[i].is_empty() && d.is_subset(db[i] | ind[i]) {
                        out[3].push(e);
                    }
                }
                out
            })
            .collect();
        let mut lists: Lists = Default::default();
        for l in per_honest {
            for (k, v) in l.into_iter().enumerate() {
                lists[k].extend(v);
            }
        }
        let [strong_a, strong_b, weak_a, weak_b] = lists;
        Ok(Oracle {
            domain,
            pair,
            guard: guard.clone(),
            profiles,
            ids,
            da,
            db,
            ind,
            strong_a,
            strong_b,
            weak_a,
            weak_b,
            supports: OnceLock::new(),
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn pair(&self) -> Pair {
        self.pair
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn profile(&self, i: u64) -> &Profile {
        &self.profiles[i as usize]
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    fn diff(&self, i: usize, j: usize) -> AgentSet {
        diff(&self.ids[i], &self.ids[j])
    }

    fn bits<'t>(&self, table: &'t ScfTable) -> Result<&'t FixedBitSet, OracleError> {
        if table.pair() != self.pair || table.len() != self.len() {
            return Err(OracleError::DomainMismatch);
        }
        Ok(table.bits())
    }

    /// Table over this oracle's domain and pair from raw choose-`a` bits.
    pub fn table(&self, bits: FixedBitSet) -> ScfTable {
        ScfTable::new(Arc::clone(&self.domain), self.pair, bits).expect("sized to the domain")
    }

    fn first_violation(
        to_a: &[(u32, u32)],
        to_b: &[(u32, u32)],
        a: &FixedBitSet,
    ) -> Option<(u32, u32)> {
        let x = to_a
            .iter()
            .find(|&&(i, j)| !a.contains(i as usize) && a.contains(j as usize));
        let y = to_b
            .iter()
            .find(|&&(i, j)| a.contains(i as usize) && !a.contains(j as usize));
        match (x, y) {
            (Some(x), Some(y)) => Some(*x.min(y)),
            (x, y) => x.or(y).copied(),
        }
    }

    /// Lexicographically first strong manipulation; `None` iff wGSP.
    pub fn find_strong_manipulation(&self, table: &ScfTable) -> Result<Option<ManipulationWitness>, OracleError> {
        Ok(self.strong_manipulation_bits(self.bits(table)?))
    }

    fn strong_manipulation_bits(&self, a: &FixedBitSet) -> Option<ManipulationWitness> {
        Self::first_violation(&self.strong_a, &self.strong_b, a).map(|(i, j)| ManipulationWitness {
            coalition: self.diff(i as usize, j as usize),
            honest: i as u64,
            misreport: j as u64,
            kind: ManipulationKind::Strong,
        })
    }

    /// Lexicographically first weak manipulation; `None` iff strongly group
    /// strategy-proof. Agents who keep their report may join the coalition,
    /// so the coalition is the changers plus everyone strictly gaining.
    pub fn find_weak_manipulation(&self, table: &ScfTable) -> Result<Option<ManipulationWitness>, OracleError> {
        Ok(self.weak_manipulation_bits(self.bits(table)?))
    }

    fn weak_manipulation_bits(&self, a: &FixedBitSet) -> Option<ManipulationWitness> {
        Self::first_violation(&self.weak_a, &self.weak_b, a).map(|(i, j)| {
            let (i, j) = (i as usize, j as usize);
            let gainers = if a.contains(j) { self.da[i] } else { self.db[i] };
            ManipulationWitness {
                coalition: self.diff(i, j) | gainers,
                honest: i as u64,
                misreport: j as u64,
                kind: ManipulationKind::Weak,
            }
        })
    }

    pub fn is_wgsp(&self, table: &ScfTable) -> Result<bool, OracleError> {
        Ok(self.find_strong_manipulation(table)?.is_none())
    }

    pub fn is_sgsp(&self, table: &ScfTable) -> Result<bool, OracleError> {
        Ok(self.find_weak_manipulation(table)?.is_none())
    }

    fn outcome(&self, a: &FixedBitSet, i: usize) -> Alternative {
        if a.contains(i) {
            self.pair.a
        } else {
            self.pair.b
        }
    }

    /// Almost preference reversal, checked straight from the preferences.
    pub fn check_apr(&self, table: &ScfTable) -> Result<Option<Witness>, OracleError> {
        Ok(self.apr_bits(self.bits(table)?))
    }

    fn apr_bits(&self, a: &FixedBitSet) -> Option<Witness> {
        let n = self.len();
        (0..n).into_par_iter().find_map_first(|i| {
            let p = &self.profiles[i];
            let x = self.outcome(a, i);
            (0..n).find_map(|j| {
                if a.contains(i) == a.contains(j) {
                    return None;
                }
                let q = &self.profiles[j];
                let y = self.outcome(a, j);
                let reversal = p.prefs().iter().zip(q.prefs()).any(|(pv, qv)| {
                    pv != qv && pv.weakly_prefers(x, y).expect("pair in range")
                });
                (!reversal).then_some(Witness::NoReversal {
                    first: i as u64,
                    second: j as u64,
                })
            })
        })
    }

    // groups[v][key without v] = profile indices
    fn deviation_groups(&self) -> Vec<HashMap<Vec<u32>, Vec<usize>>> {
        let nv = self.domain.num_agents();
        (0..nv)
            .map(|v| {
                let mut g: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
                for (i, ids) in self.ids.iter().enumerate() {
                    let mut key = ids.clone();
                    key[v] = u32::MAX;
                    g.entry(key).or_default().push(i);
                }
                g
            })
            .collect()
    }

    /// Individual strategy-proofness.
    pub fn check_isp(&self, table: &ScfTable) -> Result<Option<Witness>, OracleError> {
        let a = self.bits(table)?;
        let groups = self.deviation_groups();
        for i in 0..self.len() {
            let p = &self.profiles[i];
            let x = self.outcome(a, i);
            for (v, g) in groups.iter().enumerate() {
                let mut key = self.ids[i].clone();
                key[v] = u32::MAX;
                for &j in &g[&key] {
                    let y = self.outcome(a, j);
                    if j != i && !p.prefs()[v].weakly_prefers(x, y).expect("pair in range") {
                        return Ok(Some(Witness::Deviation {
                            agent: v,
                            honest: i as u64,
                            misreport: j as u64,
                        }));
                    }
                }
            }
        }
        Ok(None)
    }

    /// `(stronger, weaker)` with `stronger ≥ᵃ weaker`, distinct profiles.
    pub fn supports_pairs(&self) -> &[(u32, u32)] {
        self.supports.get_or_init(|| {
            let n = self.len();
            let rows: Vec<Vec<(u32, u32)>> = (0..n)
                .into_par_iter()
                .map(|p| {
                    (0..n)
                        .filter(|&q| {
                            q != p
                                && supports_at_least(&self.profiles[p], &self.profiles[q], self.pair.a, self.pair)
                                    .expect("same shape")
                        })
                        .map(|q| (p as u32, q as u32))
                        .collect()
                })
                .collect();
            rows.concat()
        })
    }

    pub fn check_almost_monotone(&self, table: &ScfTable) -> Result<Option<Witness>, OracleError> {
        Ok(self.almost_monotone_bits(self.bits(table)?))
    }

    fn almost_monotone_bits(&self, a: &FixedBitSet) -> Option<Witness> {
        self.supports_pairs()
            .iter()
            .find(|&&(p, q)| a.contains(q as usize) && !a.contains(p as usize))
            .map(|&(p, q)| Witness::Monotonicity {
                stronger: p as u64,
                weaker: q as u64,
            })
    }

    // index of profile i with agents v, v+1 swapped
    fn transposition_partners(&self) -> Result<Vec<Vec<usize>>, OracleError> {
        if !self.domain.is_permutation_closed() {
            return Err(OracleError::NotPermutationClosed);
        }
        let nv = self.domain.num_agents();
        Ok(self
            .profiles
            .iter()
            .map(|p| {
                (0..nv.saturating_sub(1))
                    .map(|v| self.domain.index_of(&p.transposed(v, v + 1)).expect("closed") as usize)
                    .collect()
            })
            .collect())
    }

    /// Invariance under adjacent transpositions, which generate every
    /// permutation.
    pub fn check_anonymous(&self, table: &ScfTable) -> Result<Option<Witness>, OracleError> {
        let a = self.bits(table)?;
        let partners = self.transposition_partners()?;
        for (i, row) in partners.iter().enumerate() {
            for (v, &j) in row.iter().enumerate() {
                if a.contains(i) != a.contains(j) {
                    return Ok(Some(Witness::Transposition {
                        profile: i as u64,
                        agents: (v, v + 1),
                    }));
                }
            }
        }
        Ok(None)
    }

    /// First failure of `property`, if any.
    pub fn check(&self, property: Property, table: &ScfTable) -> Result<Option<Witness>, OracleError> {
        match property {
            Property::Wgsp => Ok(self.find_strong_manipulation(table)?.map(Witness::Manipulation)),
            Property::Sgsp => Ok(self.find_weak_manipulation(table)?.map(Witness::Manipulation)),
            Property::Apr => self.check_apr(table),
            Property::Isp => self.check_isp(table),
            Property::AlmostMonotone => self.check_almost_monotone(table),
            Property::Anonymous => self.check_anonymous(table),
        }
    }

    pub fn satisfies(&self, properties: &[Property], table: &ScfTable) -> Result<bool, OracleError> {
        for &p in properties {
            if self.check(p, table)?.is_some() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every table over the domain passing all `properties`, by filtering all
    /// `2^|𝓟|` tables (ascending as binary numbers, profile 0 lowest).
    pub fn enumerate_scfs(&self, properties: &[Property]) -> Result<Vec<ScfTable>, OracleError> {
        let n = self.len();
        self.guard.check(
            "table enumeration (profiles)",
            n as u128,
            self.guard.max_table_profiles.min(30),
        )?;
        if properties.contains(&Property::Anonymous) {
            self.transposition_partners()?;
        }
        let kept: Vec<Option<ScfTable>> = (0u64..1u64 << n)
            .into_par_iter()
            .map(|mask| {
                let t = ScfTable::from_mask(Arc::clone(&self.domain), self.pair, mask);
                self.satisfies(properties, &t).ok()?.then_some(t)
            })
            .collect();
        let out: Vec<ScfTable> = kept.into_iter().flatten().collect();
        self.guard.check("table enumeration (results)", out.len() as u128, self.guard.max_scfs)?;
        Ok(out)
    }

    /// Profile classes under permutations of agents, each listed by its
    /// canonical indices; classes ordered by least member.
    pub fn orbits(&self) -> Result<Vec<Vec<usize>>, OracleError> {
        if !self.domain.is_permutation_closed() {
            return Err(OracleError::NotPermutationClosed);
        }
        let mut by_key: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut orbits: Vec<Vec<usize>> = Vec::new();
        for (i, ids) in self.ids.iter().enumerate() {
            let mut key = ids.clone();
            key.sort_unstable();
            let k = *by_key.entry(key).or_insert_with(|| {
                orbits.push(Vec::new());
                orbits.len() - 1
            });
            orbits[k].push(i);
        }
        Ok(orbits)
    }

    /// Anonymous tables passing `properties`, by filtering all `2^orbits`
    /// functions on the anonymized profile space.
    pub fn enumerate_anonymous_scfs(&self, properties: &[Property]) -> Result<Vec<ScfTable>, OracleError> {
        let orbits = self.orbits()?;
        self.guard.check(
            "anonymous table enumeration (orbits)",
            orbits.len() as u128,
            self.guard.max_table_profiles.min(30),
        )?;
        let n = self.len();
        let kept: Vec<Option<ScfTable>> = (0u64..1u64 << orbits.len())
            .into_par_iter()
            .map(|mask| {
                let mut bits = FixedBitSet::with_capacity(n);
                for (k, orbit) in orbits.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        for &i in orbit {
                            bits.insert(i);
                        }
                    }
                }
                let t = self.table(bits);
                self.satisfies(properties, &t).ok()?.then_some(t)
            })
            .collect();
        let out: Vec<ScfTable> = kept.into_iter().flatten().collect();
        self.guard.check("table enumeration (results)", out.len() as u128, self.guard.max_scfs)?;
        Ok(out)
    }

    /// Each property as constraints `(x, y)`: choosing `a` at `x` forces `a`
    /// at `y`.
    pub fn implications(&self, properties: &[Property]) -> Result<Vec<(u32, u32)>, OracleError> {
        let mut out = Vec::new();
        for &p in properties {
            match p {
                Property::Wgsp | Property::Apr => {
                    out.extend(self.strong_a.iter().map(|&(i, j)| (j, i)));
                    out.extend(self.strong_b.iter().copied());
                }
                Property::Sgsp => {
                    out.extend(self.weak_a.iter().map(|&(i, j)| (j, i)));
                    out.extend(self.weak_b.iter().copied());
                }
                Property::AlmostMonotone => {
                    out.extend(self.supports_pairs().iter().map(|&(p, q)| (q, p)));
                }
                Property::Isp => {
                    let groups = self.deviation_groups();
                    for (v, g) in groups.iter().enumerate() {
                        for members in g.values() {
                            for &i in members {
                                let w = &self.profiles[i].prefs()[v];
                                let pa = w.strictly_prefers(self.pair.a, self.pair.b).expect("pair");
                                let pb = w.strictly_prefers(self.pair.b, self.pair.a).expect("pair");
                                for &j in members {
                                    if i == j {
                                        continue;
                                    }
                                    if pa {
                                        out.push((j as u32, i as u32));
                                    } else if pb {
                                        out.push((i as u32, j as u32));
                                    }
                                }
                            }
                        }
                    }
                }
                Property::Anonymous => {
                    for (i, row) in self.transposition_partners()?.iter().enumerate() {
                        for &j in row {
                            out.push((i as u32, j as u32));
                            out.push((j as u32, i as u32));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Every table passing `properties`, by backtracking over the
    /// transitively closed implication constraints (no dead ends, so the
    /// cost is linear in the output). Same order as
    /// [`enumerate_scfs`](Self::enumerate_scfs).
    pub fn search_scfs(&self, properties: &[Property]) -> Result<Vec<ScfTable>, OracleError> {
        let n = self.len();
        let mut forward = vec![FixedBitSet::with_capacity(n); n];
        for (x, y) in self.implications(properties)? {
            forward[x as usize].insert(y as usize);
        }
        let closure = transitive_closure(&forward);
        let mut backward = vec![FixedBitSet::with_capacity(n); n];
        for (x, row) in closure.iter().enumerate() {
            for y in row.ones() {
                backward[y].insert(x);
            }
        }
        let mut out = Vec::new();
        let mut a = FixedBitSet::with_capacity(n);
        let mut b = FixedBitSet::with_capacity(n);
        self.search(n, &closure, &backward, &mut a, &mut b, &mut out)?;
        Ok(out)
    }

    fn search(
        &self,
        k: usize,
        forward: &[FixedBitSet],
        backward: &[FixedBitSet],
        a: &mut FixedBitSet,
        b: &mut FixedBitSet,
        out: &mut Vec<ScfTable>,
    ) -> Result<(), OracleError> {
        if k == 0 {
            self.guard
                .check("table search (results)", out.len() as u128 + 1, self.guard.max_scfs)?;
            out.push(self.table(a.clone()));
            return Ok(());
        }
        let x = k - 1;
        // b at x is blocked if some a-variable implies a at x
        if backward[x].is_disjoint(a) {
            b.insert(x);
            self.search(x, forward, backward, a, b, out)?;
            b.set(x, false);
        }
        if forward[x].is_disjoint(b) {
            a.insert(x);
            self.search(x, forward, backward, a, b, out)?;
            a.set(x, false);
        }
        Ok(())
    }

    /// Stance masks of profile `i`: `(D(a), D(b), I)`.
    pub fn stances(&self, i: u64) -> (AgentSet, AgentSet, AgentSet) {
        let i = i as usize;
        (self.da[i], self.db[i], self.ind[i])
    }
}

fn diff(x: &[u32], y: &[u32]) -> AgentSet {
    x.iter()
        .zip(y)
        .enumerate()
        .filter(|(_, (p, q))| p != q)
        .map(|(v, _)| v)
        .collect()
}

fn transitive_closure(forward: &[FixedBitSet]) -> Vec<FixedBitSet> {
    let n = forward.len();
    (0..n)
        .into_par_iter()
        .map(|s| {
            let mut seen = FixedBitSet::with_capacity(n);
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for y in forward[x].ones() {
                    if !seen.put(y) {
                        stack.push(y);
                    }
                }
            }
            seen
        })
        .collect()
}
