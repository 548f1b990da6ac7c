//! Character functions: maps from profiles into finite posets that retain
//! exactly what a two-valued non-manipulable rule may look at.
//!
//! Five characters are provided:
//!
//! * `general`: `(D(a,P), I(P), (P_v)_{v∈I(P)})` ordered by the triple order;
//! * `anon`: `(|D(a,P)|, |I_1(P)|, …, |I_τ(P)|)` ordered by the count order;
//! * `bi`: the veto pair `(D(a,P), D(a,P) ∪ I(P))` ordered componentwise;
//! * `strict`: `D(a,P)` ordered by inclusion, for domains without a∼b;
//! * `strong`: the level in `{-1, 0, 1}` or the profile itself when every
//!   agent is indifferent.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::guard::{Guard, GuardError};
use crate::order::{FinitePoset, OrderError};
use crate::prefs::{
    d_set, i_partition, i_set, Agent, AgentSet, Domain, Pair, PartialProfile, Preference,
    PrefsError, Profile, Stance,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CharKind {
    General,
    Anon,
    Bi,
    Strict,
    Strong,
}

impl CharKind {
    pub const ALL: [CharKind; 5] = [
        CharKind::General,
        CharKind::Anon,
        CharKind::Bi,
        CharKind::Strict,
        CharKind::Strong,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CharKind::General => "general",
            CharKind::Anon => "anon",
            CharKind::Bi => "bi",
            CharKind::Strict => "strict",
            CharKind::Strong => "strong",
        }
    }
}

impl fmt::Display for CharKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CharKind {
    type Err = CharError;

    fn from_str(s: &str) -> Result<Self, CharError> {
        CharKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CharError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharError {
    #[error("unknown character kind {0:?}")]
    UnknownKind(String),
    #[error(transparent)]
    Prefs(#[from] PrefsError),
    #[error("agent {0} is indifferent between the pair; the strict character needs strict profiles")]
    IndifferentAgent(Agent),
    #[error("the domain contains a∼b preferences; the strict character needs a strict domain")]
    IndifferenceInDomain,
    #[error("count vectors of different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("value of kind {found} where {expected} was expected")]
    KindMismatch { expected: CharKind, found: CharKind },
    #[error("character value is not in the image")]
    NotInImage,
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Guard(#[from] GuardError),
}

/// `(S, T, π)`: a-supporters, indifferent agents and their full preferences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharTriple {
    pub s: AgentSet,
    pub t: AgentSet,
    pub pi: PartialProfile,
}

/// `(k_0, k_1, …, k_τ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnonVector(pub Vec<u32>);

/// `(S, W)` with `S ⊆ W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VetoPair {
    pub s: AgentSet,
    pub w: AgentSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrongChar {
    /// -1, 0 or 1.
    Level(i8),
    Unanimous(Profile),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CharValue {
    Triple(CharTriple),
    Anon(AnonVector),
    Veto(VetoPair),
    Strict(AgentSet),
    Strong(StrongChar),
}

impl CharValue {
    pub fn kind(&self) -> CharKind {
        match self {
            CharValue::Triple(_) => CharKind::General,
            CharValue::Anon(_) => CharKind::Anon,
            CharValue::Veto(_) => CharKind::Bi,
            CharValue::Strict(_) => CharKind::Strict,
            CharValue::Strong(_) => CharKind::Strong,
        }
    }

    /// Canonical byte encoding; sorting by it fixes image order.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            CharValue::Triple(t) => {
                out.extend_from_slice(&t.s.bits().to_be_bytes());
                out.extend_from_slice(&t.t.bits().to_be_bytes());
                for (_, w) in t.pi.iter() {
                    w.encode_into(&mut out);
                }
            }
            CharValue::Anon(k) => {
                for x in &k.0 {
                    out.extend_from_slice(&x.to_be_bytes());
                }
            }
            CharValue::Veto(p) => {
                out.extend_from_slice(&p.s.bits().to_be_bytes());
                out.extend_from_slice(&p.w.bits().to_be_bytes());
            }
            CharValue::Strict(s) => out.extend_from_slice(&s.bits().to_be_bytes()),
            CharValue::Strong(StrongChar::Level(l)) => {
                out.push(0);
                out.push((l + 1) as u8);
            }
            CharValue::Strong(StrongChar::Unanimous(p)) => {
                out.push(1);
                p.encode_into(&mut out);
            }
        }
        out
    }
}

pub fn char_general(p: &Profile, pair: Pair) -> Result<CharTriple, PrefsError> {
    let t = i_set(p, pair)?;
    Ok(CharTriple {
        s: d_set(p, pair.a, pair)?,
        t,
        pi: p.restrict(t),
    })
}

pub fn char_anon(p: &Profile, pair: Pair, indiff_prefs: &[Preference]) -> Result<AnonVector, PrefsError> {
    let mut k = vec![d_set(p, pair.a, pair)?.len() as u32];
    k.extend(i_partition(p, pair, indiff_prefs)?);
    Ok(AnonVector(k))
}

pub fn char_bi(p: &Profile, pair: Pair) -> Result<VetoPair, PrefsError> {
    let s = d_set(p, pair.a, pair)?;
    Ok(VetoPair {
        s,
        w: s | i_set(p, pair)?,
    })
}

pub fn char_strict(p: &Profile, pair: Pair) -> Result<AgentSet, CharError> {
    if let Some(v) = i_set(p, pair)?.iter().next() {
        return Err(CharError::IndifferentAgent(v));
    }
    Ok(d_set(p, pair.a, pair)?)
}

pub fn char_strong(p: &Profile, pair: Pair) -> Result<StrongChar, PrefsError> {
    let da = !d_set(p, pair.a, pair)?.is_empty();
    let db = !d_set(p, pair.b, pair)?.is_empty();
    Ok(match (da, db) {
        (true, false) => StrongChar::Level(1),
        (true, true) => StrongChar::Level(0),
        (false, true) => StrongChar::Level(-1),
        (false, false) => StrongChar::Unanimous(p.clone()),
    })
}

fn same_on(x: &PartialProfile, y: &PartialProfile, agents: AgentSet) -> bool {
    agents.iter().all(|v| x.get(v) == y.get(v))
}

/// `S ⊆ S'`, `S ∪ T ⊆ S' ∪ T'` and `π_v = π'_v` on `T ∩ T'`.
pub fn leq_triple(x: &CharTriple, y: &CharTriple) -> bool {
    let r = x.s.is_subset(y.s)
        && (x.s | x.t).is_subset(y.s | y.t)
        && same_on(&x.pi, &y.pi, x.t & y.t);
    debug_assert_eq!(r, leq_triple_residual(x, y));
    r
}

/// `S ⊆ S'`, `T \ S' ⊆ T'` and `π_v = π'_v` on `T \ S'`.
pub fn leq_triple_residual(x: &CharTriple, y: &CharTriple) -> bool {
    let rest = x.t - y.s;
    x.s.is_subset(y.s) && rest.is_subset(y.t) && same_on(&x.pi, &y.pi, rest)
}

fn check_len(k: &AnonVector, l: &AnonVector) -> Result<(), CharError> {
    if k.0.len() != l.0.len() || k.0.is_empty() {
        Err(CharError::LengthMismatch(k.0.len(), l.0.len()))
    } else {
        Ok(())
    }
}

fn leq_anon_unchecked(k: &[u32], l: &[u32]) -> bool {
    let excess: i64 = k[1..]
        .iter()
        .zip(&l[1..])
        .map(|(&ki, &li)| (ki as i64 - li as i64).max(0))
        .sum();
    excess <= l[0] as i64 - k[0] as i64
}

/// `Σ_{i≥1} (k_i − ℓ_i)^+ ≤ ℓ_0 − k_0`.
pub fn leq_anon(k: &AnonVector, l: &AnonVector) -> Result<bool, CharError> {
    check_len(k, l)?;
    let r = leq_anon_unchecked(&k.0, &l.0);
    #[cfg(test)]
    assert_eq!(r, leq_anon_subsets(k, l)?);
    Ok(r)
}

/// `k_0 + Σ_J k_i ≤ ℓ_0 + Σ_J ℓ_i` for every `J ⊆ {1..τ}`. Exponential in τ.
pub fn leq_anon_subsets(k: &AnonVector, l: &AnonVector) -> Result<bool, CharError> {
    check_len(k, l)?;
    let tau = k.0.len() - 1;
    if tau >= 32 {
        return Err(CharError::LengthMismatch(k.0.len(), 32));
    }
    Ok((0u64..1u64 << tau).all(|j| {
        let sum = |x: &[u32]| -> u64 {
            x[0] as u64
                + (0..tau)
                    .filter(|i| j >> i & 1 == 1)
                    .map(|i| x[i + 1] as u64)
                    .sum::<u64>()
        };
        sum(&k.0) <= sum(&l.0)
    }))
}

pub fn leq_veto(x: &VetoPair, y: &VetoPair) -> bool {
    x.s.is_subset(y.s) && x.w.is_subset(y.w)
}

pub fn leq_strict(x: AgentSet, y: AgentSet) -> bool {
    x.is_subset(y)
}

/// -1 is the minimum, 1 the maximum, everything else pairwise incomparable.
pub fn leq_strong(x: &StrongChar, y: &StrongChar) -> bool {
    x == y || *x == StrongChar::Level(-1) || *y == StrongChar::Level(1)
}

/// A character function bound to a pair (and, for `anon`, to the domain's
/// list of a∼b preferences).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    kind: CharKind,
    pair: Pair,
    indiff: Vec<Preference>,
}

impl Character {
    pub fn new(kind: CharKind, pair: Pair, domain: &Domain) -> Result<Self, CharError> {
        let indiff = domain.indiff_prefs(pair);
        if kind == CharKind::Strict && !indiff.is_empty() {
            return Err(CharError::IndifferenceInDomain);
        }
        Ok(Character {
            kind,
            pair,
            indiff: if kind == CharKind::Anon { indiff } else { Vec::new() },
        })
    }

    /// An anonymous character with an explicit `W_1..W_τ` list.
    pub fn anon(pair: Pair, indiff_prefs: Vec<Preference>) -> Self {
        Character {
            kind: CharKind::Anon,
            pair,
            indiff: indiff_prefs,
        }
    }

    pub fn kind(&self) -> CharKind {
        self.kind
    }

    pub fn pair(&self) -> Pair {
        self.pair
    }

    /// The a∼b preferences `W_1..W_τ` (empty unless anonymous).
    pub fn indiff_prefs(&self) -> &[Preference] {
        &self.indiff
    }

    pub fn of(&self, p: &Profile) -> Result<CharValue, CharError> {
        let pair = self.pair;
        Ok(match self.kind {
            CharKind::General => CharValue::Triple(char_general(p, pair)?),
            CharKind::Anon => CharValue::Anon(char_anon(p, pair, &self.indiff)?),
            CharKind::Bi => CharValue::Veto(char_bi(p, pair)?),
            CharKind::Strict => CharValue::Strict(char_strict(p, pair)?),
            CharKind::Strong => CharValue::Strong(char_strong(p, pair)?),
        })
    }

    /// The character order. Values of another kind are never comparable.
    pub fn leq(&self, x: &CharValue, y: &CharValue) -> bool {
        match (x, y) {
            (CharValue::Triple(x), CharValue::Triple(y)) => leq_triple(x, y),
            (CharValue::Anon(x), CharValue::Anon(y)) => leq_anon(x, y).unwrap_or(false),
            (CharValue::Veto(x), CharValue::Veto(y)) => leq_veto(x, y),
            (CharValue::Strict(x), CharValue::Strict(y)) => leq_strict(*x, *y),
            (CharValue::Strong(x), CharValue::Strong(y)) => leq_strong(x, y),
            _ => false,
        }
    }

    pub fn check_kind(&self, x: &CharValue) -> Result<(), CharError> {
        if x.kind() == self.kind {
            Ok(())
        } else {
            Err(CharError::KindMismatch {
                expected: self.kind,
                found: x.kind(),
            })
        }
    }
}

/// The image `χ(𝓟)` of a domain with its induced (validated) order.
pub struct Image {
    character: Character,
    values: Arc<Vec<CharValue>>,
    poset: FinitePoset,
}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Image")
            .field("kind", &self.character.kind)
            .field("len", &self.values.len())
            .finish()
    }
}

impl Image {
    /// Character values of every feasible profile. Product domains are
    /// reduced to one representative preference per decision-relevant class
    /// before expansion; anonymous images of product domains are computed
    /// from per-agent count increments without expanding profiles.
    pub fn compute(domain: &Domain, character: Character, guard: &Guard) -> Result<Image, CharError> {
        let values = if domain.is_product() && character.kind == CharKind::Anon {
            anon_image_of_product(domain, &character, guard)?
        } else if domain.is_product() {
            let reduced = representative_domain(domain, &character)?;
            guard.check("character image", reduced.len() as u128, guard.max_image)?;
            values_of(&reduced, &character)?
        } else {
            guard.check("character image", domain.len() as u128, guard.max_image)?;
            values_of(domain, &character)?
        };
        Image::from_values(character, values)
    }

    /// Convenience: the image of `domain` under `kind` for the domain's pair.
    pub fn of_domain(domain: &Domain, kind: CharKind, guard: &Guard) -> Result<Image, CharError> {
        let c = Character::new(kind, domain.pair(), domain)?;
        Image::compute(domain, c, guard)
    }

    /// Builds the poset on an arbitrary set of values of the right kind.
    pub fn from_values(character: Character, values: Vec<CharValue>) -> Result<Image, CharError> {
        for v in &values {
            character.check_kind(v)?;
        }
        let mut keyed: Vec<(Vec<u8>, CharValue)> =
            values.into_iter().map(|v| (v.encode(), v)).collect();
        keyed.sort_by(|x, y| x.0.cmp(&y.0));
        keyed.dedup_by(|x, y| x.0 == y.0);
        let (keys, values): (Vec<Vec<u8>>, Vec<CharValue>) = keyed.into_iter().unzip();
        let values = Arc::new(values);
        let vs = Arc::clone(&values);
        let ch = character.clone();
        let poset = FinitePoset::new(keys, move |i, j| ch.leq(&vs[i], &vs[j]))?;
        Ok(Image {
            character,
            values,
            poset,
        })
    }

    pub fn character(&self) -> &Character {
        &self.character
    }

    pub fn kind(&self) -> CharKind {
        self.character.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[CharValue] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &CharValue {
        &self.values[i]
    }

    pub fn poset(&self) -> &FinitePoset {
        &self.poset
    }

    pub fn position(&self, x: &CharValue) -> Option<usize> {
        self.poset.position(&x.encode())
    }

    /// Image index of a profile's character.
    pub fn position_of_profile(&self, p: &Profile) -> Result<usize, CharError> {
        let x = self.character.of(p)?;
        self.position(&x).ok_or(CharError::NotInImage)
    }
}

fn values_of(domain: &Domain, character: &Character) -> Result<Vec<CharValue>, CharError> {
    let n = domain.len();
    let chunks: Vec<Result<Vec<CharValue>, CharError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = domain.profile(i).expect("in range");
            character.of(&p).map(|x| vec![x])
        })
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c in chunks {
        for x in c? {
            if seen.insert(x.clone()) {
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// Keeps, per agent, one a≻b and one b≻a preference and the a∼b ones the
/// character can distinguish.
fn representative_domain(domain: &Domain, character: &Character) -> Result<Domain, CharError> {
    let pair = character.pair;
    let keep_indiff = matches!(character.kind, CharKind::General | CharKind::Strong);
    let factors: Vec<Vec<Preference>> = domain
        .factors()
        .iter()
        .map(|f| {
            let mut reps = Vec::new();
            let mut seen = BTreeSet::new();
            for w in f {
                let stance = pair.stance(w).expect("pair is valid");
                let fresh = match stance {
                    Stance::Indifferent if keep_indiff => true,
                    s => seen.insert(s),
                };
                if fresh {
                    reps.push(w.clone());
                }
            }
            reps
        })
        .collect();
    Ok(Domain::product(
        domain.alternatives().to_vec(),
        domain.agents().to_vec(),
        pair,
        factors,
    )?)
}

fn anon_image_of_product(
    domain: &Domain,
    character: &Character,
    guard: &Guard,
) -> Result<Vec<CharValue>, CharError> {
    let pair = character.pair;
    let tau = character.indiff.len();
    let mut reachable: BTreeSet<Vec<u32>> = BTreeSet::new();
    reachable.insert(vec![0; tau + 1]);
    for f in domain.factors().iter() {
        // increments available to this agent: None = b-supporter
        let mut steps: BTreeSet<Option<usize>> = BTreeSet::new();
        for w in f {
            match pair.stance(w)? {
                Stance::PrefersA => {
                    steps.insert(Some(0));
                }
                Stance::PrefersB => {
                    steps.insert(None);
                }
                Stance::Indifferent => {
                    let i = character
                        .indiff
                        .iter()
                        .position(|x| x == w)
                        .ok_or(PrefsError::UnlistedIndifference(0))?;
                    steps.insert(Some(i + 1));
                }
            }
        }
        let mut next = BTreeSet::new();
        for k in &reachable {
            for s in &steps {
                let mut k2 = k.clone();
                if let Some(i) = s {
                    k2[*i] += 1;
                }
                next.insert(k2);
            }
        }
        guard.check("character image", next.len() as u128, guard.max_image)?;
        reachable = next;
    }
    Ok(reachable
        .into_iter()
        .map(|k| CharValue::Anon(AnonVector(k)))
        .collect())
}
