//! Finite posets, antichains and super-order-closed (upward-closed) sets.
//!
//! Elements are opaque canonical byte encodings supplied by the caller; this
//! module only ever looks at indices and the order predicate. Elements are
//! kept sorted by encoding, so index order is encoding order and antichains
//! (sorted index lists) compare lexicographically by encoding.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::guard::GuardError;

/// Posets up to this size memoize the order as a dominance matrix.
pub const MATRIX_LIMIT: usize = 4096;

/// Posets up to this size get the exhaustive `2^|L|` roundtrip check.
pub const EXHAUSTIVE_ROUNDTRIP_LIMIT: usize = 16;

/// Triples sampled when validating a poset too large for the matrix.
const SAMPLED_TRIPLES: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PosetViolation {
    Duplicate(usize, usize),
    Reflexivity(usize),
    Antisymmetry(usize, usize),
    Transitivity(usize, usize, usize),
}

impl fmt::Display for PosetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PosetViolation::Duplicate(i, j) => write!(f, "elements {i} and {j} share an encoding"),
            PosetViolation::Reflexivity(i) => write!(f, "reflexivity fails at element {i}"),
            PosetViolation::Antisymmetry(i, j) => {
                write!(f, "antisymmetry fails: {i} <= {j} and {j} <= {i}")
            }
            PosetViolation::Transitivity(i, j, k) => {
                write!(f, "transitivity fails: {i} <= {j} <= {k} but not {i} <= {k}")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("not a partial order: {0}")]
    NotPartialOrder(PosetViolation),
    #[error("element {0} is outside the poset")]
    OutOfRange(usize),
    #[error("not an antichain: elements {0} and {1} are comparable")]
    NotAntichain(usize, usize),
    #[error(transparent)]
    Guard(#[from] GuardError),
}

/// Failure of the SOC-closure check: `outside >= member` but `outside ∉ C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SocViolation {
    pub member: usize,
    pub outside: usize,
}

type Predicate = Arc<dyn Fn(usize, usize) -> bool + Send + Sync>;

enum Relation {
    Matrix {
        // up[i] = { j : i <= j }, down[i] = { j : j <= i }
        up: Vec<FixedBitSet>,
        down: Vec<FixedBitSet>,
        incomparable: Vec<FixedBitSet>,
    },
    Predicate(Predicate),
}

/// A validated finite poset.
pub struct FinitePoset {
    keys: Vec<Vec<u8>>,
    relation: Relation,
}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinitePoset")
            .field("len", &self.keys.len())
            .field("memoized", &matches!(self.relation, Relation::Matrix { .. }))
            .finish()
    }
}

/// Checks the partial-order axioms of `leq` over the given elements.
/// Witness indices refer to positions in `keys`.
pub fn check_poset<F>(keys: &[Vec<u8>], leq: F) -> Result<(), PosetViolation>
where
    F: Fn(usize, usize) -> bool,
{
    let n = keys.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| keys[i].cmp(&keys[j]));
    for w in order.windows(2) {
        if keys[w[0]] == keys[w[1]] {
            let (i, j) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(PosetViolation::Duplicate(i, j));
        }
    }
    let up = build_up(n, &leq);
    check_matrix(&up)
}

fn build_up<F: Fn(usize, usize) -> bool>(n: usize, leq: &F) -> Vec<FixedBitSet> {
    (0..n)
        .map(|i| {
            let mut row = FixedBitSet::with_capacity(n);
            for j in 0..n {
                if leq(i, j) {
                    row.insert(j);
                }
            }
            row
        })
        .collect()
}

fn check_matrix(up: &[FixedBitSet]) -> Result<(), PosetViolation> {
    let n = up.len();
    for (i, row) in up.iter().enumerate() {
        if !row.contains(i) {
            return Err(PosetViolation::Reflexivity(i));
        }
    }
    for (i, row) in up.iter().enumerate() {
        for j in row.ones() {
            if j > i && up[j].contains(i) {
                return Err(PosetViolation::Antisymmetry(i, j));
            }
        }
    }
    for (i, row) in up.iter().enumerate() {
        for j in row.ones() {
            // up[j] must be contained in up[i]
            if !up[j].is_subset(row) {
                let k = up[j].difference(row).next().expect("non-subset");
                return Err(PosetViolation::Transitivity(i, j, k));
            }
        }
    }
    debug_assert!(up.iter().all(|r| r.len() == n));
    Ok(())
}

fn check_sampled(n: usize, leq: &Predicate) -> Result<(), PosetViolation> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for i in 0..n {
        if !leq(i, i) {
            return Err(PosetViolation::Reflexivity(i));
        }
    }
    for _ in 0..SAMPLED_TRIPLES {
        let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        if i != j && leq(i, j) && leq(j, i) {
            return Err(PosetViolation::Antisymmetry(i.min(j), i.max(j)));
        }
        if leq(i, j) && leq(j, k) && !leq(i, k) {
            return Err(PosetViolation::Transitivity(i, j, k));
        }
    }
    Ok(())
}

/// A set of pairwise incomparable elements, as sorted indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Antichain(Vec<usize>);

impl Antichain {
    pub fn empty() -> Self {
        Antichain(Vec::new())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// An upward-closed subset of a poset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SocSet(FixedBitSet);

impl SocSet {
    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn as_bitset(&self) -> &FixedBitSet {
        &self.0
    }
}

impl FinitePoset {
    /// Builds and validates a poset. Elements may be supplied in any order;
    /// they are re-indexed by sorted encoding, and `leq` receives the
    /// caller's original positions.
    pub fn new<F>(keys: Vec<Vec<u8>>, leq: F) -> Result<Self, OrderError>
    where
        F: Fn(usize, usize) -> bool + Send + Sync + 'static,
    {
        let n = keys.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&i, &j| keys[i].cmp(&keys[j]));
        for w in perm.windows(2) {
            if keys[w[0]] == keys[w[1]] {
                return Err(OrderError::NotPartialOrder(PosetViolation::Duplicate(
                    w[0].min(w[1]),
                    w[0].max(w[1]),
                )));
            }
        }
        let sorted_keys: Vec<Vec<u8>> = perm.iter().map(|&i| keys[i].clone()).collect();
        let identity = perm.iter().enumerate().all(|(i, &p)| i == p);
        let leq: Predicate = if identity {
            Arc::new(leq)
        } else {
            let perm = perm.clone();
            Arc::new(move |i, j| leq(perm[i], perm[j]))
        };
        let relation = if n <= MATRIX_LIMIT {
            let up = build_up(n, &|i, j| leq(i, j));
            check_matrix(&up).map_err(OrderError::NotPartialOrder)?;
            let mut down = vec![FixedBitSet::with_capacity(n); n];
            for (i, row) in up.iter().enumerate() {
                for j in row.ones() {
                    down[j].insert(i);
                }
            }
            let incomparable = (0..n)
                .map(|i| {
                    let mut c = up[i].clone();
                    c.union_with(&down[i]);
                    c.toggle_range(..);
                    c
                })
                .collect();
            Relation::Matrix {
                up,
                down,
                incomparable,
            }
        } else {
            check_sampled(n, &leq).map_err(OrderError::NotPartialOrder)?;
            Relation::Predicate(leq)
        };
        Ok(FinitePoset {
            keys: sorted_keys,
            relation,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, i: usize) -> &[u8] {
        &self.keys[i]
    }

    pub fn keys(&self) -> &[Vec<u8>] {
        &self.keys
    }

    /// Index of the element with this encoding.
    pub fn position(&self, key: &[u8]) -> Option<usize> {
        self.keys.binary_search_by(|k| k.as_slice().cmp(key)).ok()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        match &self.relation {
            Relation::Matrix { up, .. } => up[i].contains(j),
            Relation::Predicate(p) => p(i, j),
        }
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq(i, j) || self.leq(j, i)
    }

    fn check_range(&self, xs: &[usize]) -> Result<(), OrderError> {
        match xs.iter().find(|&&x| x >= self.len()) {
            Some(&x) => Err(OrderError::OutOfRange(x)),
            None => Ok(()),
        }
    }

    fn up_set(&self, i: usize) -> FixedBitSet {
        match &self.relation {
            Relation::Matrix { up, .. } => up[i].clone(),
            Relation::Predicate(p) => {
                let mut row = FixedBitSet::with_capacity(self.len());
                for j in 0..self.len() {
                    if p(i, j) {
                        row.insert(j);
                    }
                }
                row
            }
        }
    }

    fn incomparable_set(&self, i: usize) -> FixedBitSet {
        match &self.relation {
            Relation::Matrix { incomparable, .. } => incomparable[i].clone(),
            Relation::Predicate(p) => {
                let mut row = FixedBitSet::with_capacity(self.len());
                for j in 0..self.len() {
                    if !p(i, j) && !p(j, i) {
                        row.insert(j);
                    }
                }
                row
            }
        }
    }

    /// The minimal elements `m(X)`.
    pub fn minimals(&self, xs: &[usize]) -> Result<Antichain, OrderError> {
        self.check_range(xs)?;
        let mut set: Vec<usize> = xs.to_vec();
        set.sort_unstable();
        set.dedup();
        let mins = set
            .iter()
            .copied()
            .filter(|&x| !set.iter().any(|&y| y != x && self.leq(y, x)))
            .collect();
        Ok(Antichain(mins))
    }

    /// Minimal elements of a SOC set.
    pub fn minimals_of(&self, c: &SocSet) -> Antichain {
        let xs: Vec<usize> = c.iter().collect();
        match &self.relation {
            Relation::Matrix { down, .. } => Antichain(
                xs.into_iter()
                    .filter(|&x| {
                        let mut below = down[x].clone();
                        below.intersect_with(&c.0);
                        below.count_ones(..) == 1
                    })
                    .collect(),
            ),
            Relation::Predicate(_) => self.minimals(&xs).expect("members in range"),
        }
    }

    /// Validates a sorted-or-unsorted member list as an antichain.
    pub fn antichain(&self, members: Vec<usize>) -> Result<Antichain, OrderError> {
        self.check_range(&members)?;
        let mut m = members;
        m.sort_unstable();
        m.dedup();
        self.is_antichain(&m)
            .map_err(|(i, j)| OrderError::NotAntichain(i, j))?;
        Ok(Antichain(m))
    }

    /// Pairwise incomparability, with the first comparable pair as witness.
    pub fn is_antichain(&self, xs: &[usize]) -> Result<(), (usize, usize)> {
        for (k, &i) in xs.iter().enumerate() {
            for &j in &xs[k + 1..] {
                if i != j && self.comparable(i, j) {
                    return Err((i, j));
                }
            }
        }
        Ok(())
    }

    /// Super-order-closedness, with the first escaping element as witness.
    pub fn is_soc(&self, xs: &FixedBitSet) -> Result<(), SocViolation> {
        for f in xs.ones() {
            let up = self.up_set(f);
            if let Some(outside) = up.difference(xs).next() {
                return Err(SocViolation { member: f, outside });
            }
        }
        Ok(())
    }

    /// Wraps a bitset as a SOC set after checking closure.
    pub fn soc(&self, xs: FixedBitSet) -> Result<SocSet, SocViolation> {
        let mut xs = xs;
        xs.grow(self.len());
        self.is_soc(&xs)?;
        Ok(SocSet(xs))
    }

    /// `{x : ∃ m ∈ xs, x >= m}` for an arbitrary subset.
    pub fn closure_of(&self, xs: &[usize]) -> Result<SocSet, OrderError> {
        self.check_range(xs)?;
        let mut c = FixedBitSet::with_capacity(self.len());
        for &m in xs {
            c.union_with(&self.up_set(m));
        }
        Ok(SocSet(c))
    }

    /// The smallest SOC set containing an antichain.
    pub fn upward_closure(&self, a: &Antichain) -> Result<SocSet, OrderError> {
        self.check_range(a.members())?;
        self.is_antichain(a.members())
            .map_err(|(i, j)| OrderError::NotAntichain(i, j))?;
        self.closure_of(a.members())
    }

    /// Lazily enumerates every antichain once, in lexicographic order.
    pub fn antichains(&self) -> AntichainIter<'_> {
        let mut all = FixedBitSet::with_capacity(self.len());
        all.insert_range(..);
        AntichainIter {
            poset: self,
            first: Some(Vec::new()),
            stack: vec![Frame {
                members: Vec::new(),
                candidates: all,
                cursor: 0,
            }],
        }
    }

    /// Antichains whose least member is `c`, in lexicographic order.
    fn branch(&self, c: usize) -> AntichainIter<'_> {
        let candidates = self.incomparable_set(c);
        AntichainIter {
            poset: self,
            first: Some(vec![c]),
            stack: vec![Frame {
                members: vec![c],
                candidates,
                cursor: c + 1,
            }],
        }
    }

    /// All antichains, refusing once more than `budget` would be produced.
    pub fn enumerate_antichains(&self, budget: usize) -> Result<Vec<Antichain>, OrderError> {
        let mut out = Vec::new();
        for a in self.antichains() {
            if out.len() == budget {
                return Err(GuardError {
                    what: "antichain enumeration",
                    required: budget as u128 + 1,
                    budget: budget as u128,
                }
                .into());
            }
            out.push(a);
        }
        Ok(out)
    }

    /// Same output as [`enumerate_antichains`](Self::enumerate_antichains),
    /// with first-element branches explored on the rayon pool and merged in
    /// branch order.
    pub fn enumerate_antichains_par(&self, budget: usize) -> Result<Vec<Antichain>, OrderError> {
        let produced = AtomicUsize::new(1);
        let refused = || GuardError {
            what: "antichain enumeration",
            required: budget as u128 + 1,
            budget: budget as u128,
        };
        if budget == 0 {
            return Err(refused().into());
        }
        let branches: Vec<Option<Vec<Antichain>>> = (0..self.len())
            .into_par_iter()
            .map(|c| {
                let mut local = Vec::new();
                for a in self.branch(c) {
                    if produced.fetch_add(1, Ordering::Relaxed) >= budget {
                        return None;
                    }
                    local.push(a);
                }
                Some(local)
            })
            .collect();
        let mut out = vec![Antichain::empty()];
        for b in branches {
            out.extend(b.ok_or_else(refused)?);
        }
        Ok(out)
    }

    pub fn count_antichains(&self, budget: usize) -> Result<usize, OrderError> {
        let mut count = 0usize;
        for _ in self.antichains() {
            if count == budget {
                return Err(GuardError {
                    what: "antichain count",
                    required: budget as u128 + 1,
                    budget: budget as u128,
                }
                .into());
            }
            count += 1;
        }
        Ok(count)
    }

    /// Every SOC set by filtering all `2^|L|` subsets; refused above `limit`
    /// elements. Independent of the antichain machinery.
    pub fn soc_sets_bruteforce(&self, limit: usize) -> Result<Vec<SocSet>, OrderError> {
        let n = self.len();
        if n > limit || n >= 32 {
            return Err(GuardError {
                what: "SOC subset filter (elements)",
                required: n as u128,
                budget: limit.min(31) as u128,
            }
            .into());
        }
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << n) {
            let bs = mask_to_bitset(mask, n);
            if self.is_soc(&bs).is_ok() {
                out.push(SocSet(bs));
            }
        }
        Ok(out)
    }

    /// Covering pairs `(i, j)`: `i < j` with nothing strictly between.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut edges = Vec::new();
        for i in 0..n {
            let mut above = self.up_set(i);
            above.set(i, false);
            for j in above.ones() {
                let between = above
                    .ones()
                    .any(|k| k != j && self.leq(k, j));
                if !between {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    /// Verifies that `C ↦ m(C)` and `A ↦ ↑A` are mutually inverse.
    ///
    /// Up to [`EXHAUSTIVE_ROUNDTRIP_LIMIT`] elements every subset is
    /// classified and both directions are checked on every SOC set and every
    /// antichain, and the lazy enumerator is compared with the subset filter.
    /// Larger posets check the first `budget` antichains in enumeration order
    /// and the closures of a seeded sample of random subsets; the summary is
    /// then marked as not exhaustive.
    pub fn soc_antichain_roundtrip(&self, budget: usize) -> Result<RoundtripSummary, RoundtripFailure> {
        let n = self.len();
        if n <= EXHAUSTIVE_ROUNDTRIP_LIMIT {
            let mut socs = 0u64;
            let mut brute_antichains = Vec::new();
            for mask in 0u64..(1u64 << n) {
                let bs = mask_to_bitset(mask, n);
                if self.is_soc(&bs).is_ok() {
                    socs += 1;
                    let c = SocSet(bs.clone());
                    let back = self
                        .upward_closure(&self.minimals_of(&c))
                        .map_err(RoundtripFailure::Order)?;
                    if back != c {
                        return Err(RoundtripFailure::SocNotRecovered(c));
                    }
                }
                let members: Vec<usize> = bs.ones().collect();
                if self.is_antichain(&members).is_ok() {
                    let a = Antichain(members);
                    let c = self.upward_closure(&a).map_err(RoundtripFailure::Order)?;
                    if self.minimals_of(&c) != a {
                        return Err(RoundtripFailure::AntichainNotRecovered(a));
                    }
                    brute_antichains.push(a);
                }
            }
            if socs != brute_antichains.len() as u64 {
                return Err(RoundtripFailure::CountMismatch {
                    antichains: brute_antichains.len() as u64,
                    soc_sets: socs,
                });
            }
            let mut enumerated = self
                .enumerate_antichains(budget)
                .map_err(RoundtripFailure::Order)?;
            let lazy_order = enumerated.clone();
            enumerated.sort();
            if enumerated != lazy_order {
                return Err(RoundtripFailure::EnumerationOrder);
            }
            brute_antichains.sort();
            if enumerated != brute_antichains {
                return Err(RoundtripFailure::EnumerationIncomplete {
                    enumerated: enumerated.len() as u64,
                    expected: brute_antichains.len() as u64,
                });
            }
            Ok(RoundtripSummary {
                antichains: brute_antichains.len() as u64,
                soc_sets: socs,
                exhaustive: true,
            })
        } else {
            // a lexicographic prefix of at most `budget` antichains
            let antichains: Vec<Antichain> = self.antichains().take(budget).collect();
            for w in antichains.windows(2) {
                if w[0] >= w[1] {
                    return Err(RoundtripFailure::EnumerationOrder);
                }
            }
            for a in &antichains {
                let c = self.upward_closure(a).map_err(RoundtripFailure::Order)?;
                if &self.minimals_of(&c) != a {
                    return Err(RoundtripFailure::AntichainNotRecovered(a.clone()));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
            let samples = 256u64;
            for _ in 0..samples {
                let xs: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.1)).collect();
                let c = self.closure_of(&xs).map_err(RoundtripFailure::Order)?;
                let back = self
                    .upward_closure(&self.minimals_of(&c))
                    .map_err(RoundtripFailure::Order)?;
                if back != c {
                    return Err(RoundtripFailure::SocNotRecovered(c));
                }
                let a = self.minimals_of(&c);
                if self.minimals_of(&self.upward_closure(&a).map_err(RoundtripFailure::Order)?) != a {
                    return Err(RoundtripFailure::AntichainNotRecovered(a));
                }
            }
            Ok(RoundtripSummary {
                antichains: antichains.len() as u64,
                soc_sets: samples,
                exhaustive: false,
            })
        }
    }
}

fn mask_to_bitset(mask: u64, n: usize) -> FixedBitSet {
    let mut bs = FixedBitSet::with_capacity(n);
    for i in 0..n {
        if mask >> i & 1 == 1 {
            bs.insert(i);
        }
    }
    bs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundtripSummary {
    pub antichains: u64,
    /// SOC sets checked (all of them when `exhaustive`).
    pub soc_sets: u64,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoundtripFailure {
    #[error("SOC set {0:?} is not the closure of its minimal elements")]
    SocNotRecovered(SocSet),
    #[error("antichain {0:?} is not the minimal set of its closure")]
    AntichainNotRecovered(Antichain),
    #[error("{antichains} antichains but {soc_sets} SOC sets")]
    CountMismatch { antichains: u64, soc_sets: u64 },
    #[error("enumerator produced {enumerated} antichains, subset filter found {expected}")]
    EnumerationIncomplete { enumerated: u64, expected: u64 },
    #[error("enumerator output is not in strictly increasing lexicographic order")]
    EnumerationOrder,
    #[error(transparent)]
    Order(OrderError),
}

struct Frame {
    members: Vec<usize>,
    candidates: FixedBitSet,
    cursor: usize,
}

/// Depth-first antichain enumeration over increasing index sequences;
/// pre-order traversal yields lexicographic order.
pub struct AntichainIter<'a> {
    poset: &'a FinitePoset,
    first: Option<Vec<usize>>,
    stack: Vec<Frame>,
}

impl Iterator for AntichainIter<'_> {
    type Item = Antichain;

    fn next(&mut self) -> Option<Antichain> {
        if let Some(first) = self.first.take() {
            return Some(Antichain(first));
        }
        loop {
            let top = self.stack.last_mut()?;
            let n = top.candidates.len();
            while top.cursor < n && !top.candidates.contains(top.cursor) {
                top.cursor += 1;
            }
            if top.cursor >= n {
                self.stack.pop();
                continue;
            }
            let c = top.cursor;
            top.cursor += 1;
            let mut members = top.members.clone();
            members.push(c);
            let mut candidates = top.candidates.clone();
            candidates.intersect_with(&self.poset.incomparable_set(c));
            self.stack.push(Frame {
                members: members.clone(),
                candidates,
                cursor: c + 1,
            });
            return Some(Antichain(members));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(n: usize) -> Vec<Vec<u8>> {
        (0..n).map(|i| vec![i as u8]).collect()
    }

    fn chain(n: usize) -> FinitePoset {
        FinitePoset::new(keys(n), |i, j| i <= j).unwrap()
    }

    fn discrete(n: usize) -> FinitePoset {
        FinitePoset::new(keys(n), |i, j| i == j).unwrap()
    }

    /// Subsets of a `k`-set under inclusion, element i = bitmask i.
    fn boolean(k: usize) -> FinitePoset {
        FinitePoset::new(keys(1 << k), |i, j| i & !j == 0).unwrap()
    }

    fn bits(n: usize, xs: &[usize]) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(n);
        for &x in xs {
            b.insert(x);
        }
        b
    }

    #[test]
    fn check_poset_examples() {
        assert!(check_poset(&keys(3), |i, j| i <= j).is_ok());
        assert_eq!(
            check_poset(&keys(3), |i, j| i < j),
            Err(PosetViolation::Reflexivity(0))
        );
        assert_eq!(
            check_poset(&keys(2), |_, _| true),
            Err(PosetViolation::Antisymmetry(0, 1))
        );
        // 0<=1, 1<=2 but not 0<=2
        let bad = |i: usize, j: usize| i == j || (i, j) == (0, 1) || (i, j) == (1, 2);
        assert_eq!(check_poset(&keys(3), bad), Err(PosetViolation::Transitivity(0, 1, 2)));
        let dup = vec![vec![1], vec![1]];
        assert_eq!(
            check_poset(&dup, |i, j| i == j),
            Err(PosetViolation::Duplicate(0, 1))
        );
    }

    #[test]
    fn new_reindexes_by_encoding() {
        let keys = vec![vec![2], vec![0], vec![1]];
        // caller's order: element 1 <= element 2 <= element 0
        let rank = [2usize, 0, 1];
        let p = FinitePoset::new(keys, move |i, j| rank[i] <= rank[j]).unwrap();
        assert_eq!(p.keys(), &[vec![0], vec![1], vec![2]]);
        assert!(p.leq(0, 1) && p.leq(1, 2) && !p.leq(2, 0));
        assert_eq!(p.position(&[1]), Some(1));
    }

    #[test]
    fn minimals_examples() {
        let c = chain(3);
        assert_eq!(c.minimals(&[1, 2]).unwrap().members(), &[1]);
        assert!(c.minimals(&[]).unwrap().is_empty());
        let d = discrete(2);
        assert_eq!(d.minimals(&[0, 1]).unwrap().members(), &[0, 1]);
        assert_eq!(c.minimals(&[7]), Err(OrderError::OutOfRange(7)));
    }

    #[test]
    fn upward_closure_examples() {
        let c = chain(3);
        let a = c.antichain(vec![1]).unwrap();
        assert_eq!(c.upward_closure(&a).unwrap().iter().collect::<Vec<_>>(), vec![1, 2]);
        assert!(c.upward_closure(&Antichain::empty()).unwrap().is_empty());
        let bottom = c.minimals(&[0, 1, 2]).unwrap();
        assert_eq!(c.upward_closure(&bottom).unwrap().len(), 3);
        assert_eq!(c.antichain(vec![0, 2]), Err(OrderError::NotAntichain(0, 2)));
    }

    #[test]
    fn soc_and_antichain_predicates() {
        let c = chain(3);
        assert!(c.is_soc(&bits(3, &[2])).is_ok());
        assert_eq!(
            c.is_soc(&bits(3, &[0, 2])),
            Err(SocViolation {
                member: 0,
                outside: 1
            })
        );
        assert!(c.is_soc(&bits(3, &[0, 1, 2])).is_ok());
        assert_eq!(c.is_antichain(&[0, 1, 2]), Err((0, 1)));
    }

    #[test]
    fn antichain_counts() {
        let empty = FinitePoset::new(Vec::new(), |_, _| true).unwrap();
        assert_eq!(empty.enumerate_antichains(10).unwrap(), vec![Antichain::empty()]);
        for k in 1..6 {
            assert_eq!(chain(k).count_antichains(100).unwrap(), k + 1);
        }
        assert_eq!(discrete(2).count_antichains(100).unwrap(), 4);
        // Dedekind numbers M(2), M(3), M(4)
        assert_eq!(boolean(2).count_antichains(100).unwrap(), 6);
        assert_eq!(boolean(3).count_antichains(100).unwrap(), 20);
        assert_eq!(boolean(4).count_antichains(1000).unwrap(), 168);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let all = boolean(2).enumerate_antichains(100).unwrap();
        let lists: Vec<Vec<usize>> = all.into_iter().map(Antichain::into_vec).collect();
        assert_eq!(
            lists,
            vec![
                vec![],
                vec![0],
                vec![1],
                vec![1, 2],
                vec![2],
                vec![3]
            ]
        );
    }

    #[test]
    fn budget_refuses_instead_of_truncating() {
        let err = boolean(3).enumerate_antichains(19).unwrap_err();
        assert!(matches!(err, OrderError::Guard(GuardError { budget: 19, .. })));
        assert_eq!(boolean(3).enumerate_antichains(20).unwrap().len(), 20);
        assert!(boolean(3).enumerate_antichains_par(19).is_err());
        assert!(boolean(3).count_antichains(5).is_err());
    }

    #[test]
    fn parallel_matches_serial() {
        for p in [boolean(3), chain(5), discrete(4), boolean(4)] {
            assert_eq!(
                p.enumerate_antichains(10_000).unwrap(),
                p.enumerate_antichains_par(10_000).unwrap()
            );
        }
    }

    #[test]
    fn roundtrip_exhaustive_small() {
        let s = chain(3).soc_antichain_roundtrip(100).unwrap();
        assert_eq!((s.antichains, s.soc_sets, s.exhaustive), (4, 4, true));
        let s = discrete(2).soc_antichain_roundtrip(100).unwrap();
        assert_eq!((s.antichains, s.soc_sets), (4, 4));
        let s = boolean(2).soc_antichain_roundtrip(100).unwrap();
        assert_eq!((s.antichains, s.soc_sets), (6, 6));
    }

    #[test]
    fn roundtrip_sampled_large() {
        let s = boolean(5).soc_antichain_roundtrip(10_000).unwrap();
        assert!(!s.exhaustive);
        assert_eq!(s.antichains, 7581); // M(5)
    }

    #[test]
    fn soc_bruteforce_matches_antichains() {
        let p = boolean(3);
        let socs = p.soc_sets_bruteforce(20).unwrap();
        assert_eq!(socs.len(), 20);
        assert!(p.soc_sets_bruteforce(4).is_err());
    }

    #[test]
    fn hasse_of_boolean_square() {
        let mut e = boolean(2).hasse_edges();
        e.sort();
        assert_eq!(e, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(chain(4).hasse_edges(), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn predicate_mode_above_matrix_limit() {
        let n = MATRIX_LIMIT + 10;
        let keys: Vec<Vec<u8>> = (0..n as u32).map(|i| i.to_be_bytes().to_vec()).collect();
        // two disjoint chains: even and odd
        let p = FinitePoset::new(keys, |i, j| i % 2 == j % 2 && i <= j).unwrap();
        assert!(p.leq(0, 2) && !p.leq(0, 1));
        assert_eq!(p.minimals(&[3, 4, 5, 6]).unwrap().members(), &[3, 4]);
        let c = p.closure_of(&[n - 2]).unwrap();
        assert_eq!(c.len(), 1);
    }
}
