use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};

/// Dense agent id in `0..n`.
pub type Agent = usize;

/// Agent sets are bitmasks; this bounds `n`.
pub const MAX_AGENTS: usize = 64;

/// A set of agents.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentSet(u64);

impl AgentSet {
    pub const fn empty() -> Self {
        AgentSet(0)
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_AGENTS);
        if n == MAX_AGENTS {
            AgentSet(u64::MAX)
        } else {
            AgentSet((1u64 << n) - 1)
        }
    }

    pub const fn from_bits(bits: u64) -> Self {
        AgentSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(v: Agent) -> Self {
        AgentSet(1u64 << v)
    }

    pub fn contains(self, v: Agent) -> bool {
        v < MAX_AGENTS && self.0 & (1u64 << v) != 0
    }

    pub fn insert(&mut self, v: Agent) {
        self.0 |= 1u64 << v;
    }

    pub fn remove(&mut self, v: Agent) {
        self.0 &= !(1u64 << v);
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: AgentSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: AgentSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = Agent> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(v)
        })
    }

    /// Every subset of `self`, in increasing bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = AgentSet> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(AgentSet(cur))
        })
    }
}

impl FromIterator<Agent> for AgentSet {
    fn from_iter<I: IntoIterator<Item = Agent>>(iter: I) -> Self {
        let mut s = AgentSet::empty();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl BitOr for AgentSet {
    type Output = AgentSet;
    fn bitor(self, rhs: AgentSet) -> AgentSet {
        AgentSet(self.0 | rhs.0)
    }
}

impl BitAnd for AgentSet {
    type Output = AgentSet;
    fn bitand(self, rhs: AgentSet) -> AgentSet {
        AgentSet(self.0 & rhs.0)
    }
}

impl Sub for AgentSet {
    type Output = AgentSet;
    fn sub(self, rhs: AgentSet) -> AgentSet {
        AgentSet(self.0 & !rhs.0)
    }
}

impl fmt::Debug for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let s: AgentSet = [0, 2].into_iter().collect();
        let t: AgentSet = [2, 3].into_iter().collect();
        assert_eq!((s | t).iter().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert_eq!((s & t).iter().collect::<Vec<_>>(), vec![2]);
        assert_eq!((s - t).iter().collect::<Vec<_>>(), vec![0]);
        assert!(AgentSet::singleton(2).is_subset(s));
        assert!(!t.is_subset(s));
        assert_eq!(AgentSet::full(64).len(), 64);
        assert!(!s.contains(64));
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let s: AgentSet = [1, 3, 4].into_iter().collect();
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset(s)));
        assert_eq!(subs[0], AgentSet::empty());
        assert_eq!(*subs.last().unwrap(), s);
        assert_eq!(AgentSet::empty().subsets().count(), 1);
    }
}
