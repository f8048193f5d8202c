//! Alexandrov topology on a universe: closed sets are lower sets of ⪯.

use std::collections::BTreeSet;

use super::Universe;
use crate::class::Verdict;
use crate::error::TopologyError;

/// A set of class indices of one universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassSet {
    size: usize,
    members: BTreeSet<usize>,
}

impl ClassSet {
    pub fn new(size: usize, members: impl IntoIterator<Item = usize>) -> Result<Self, TopologyError> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&bad) = members.range(size..).next() {
            return Err(TopologyError::NotInUniverse { index: bad, size });
        }
        Ok(Self { size, members })
    }

    pub fn empty(size: usize) -> Self {
        Self {
            size,
            members: BTreeSet::new(),
        }
    }

    pub fn full(size: usize) -> Self {
        Self {
            size,
            members: (0..size).collect(),
        }
    }

    pub fn universe_size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn complement(&self) -> Self {
        Self {
            size: self.size,
            members: (0..self.size).filter(|i| !self.members.contains(i)).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            size: self.size,
            members: self.members.union(&other.members).copied().collect(),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            size: self.size,
            members: self.members.intersection(&other.members).copied().collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.is_subset(&other.members)
    }
}

impl Universe {
    fn check(&self, set: &ClassSet) -> Result<(), TopologyError> {
        if set.size != self.len() {
            return Err(TopologyError::UniverseMismatch {
                expected: self.len(),
                got: set.size,
            });
        }
        Ok(())
    }

    /// Classes `k` related to some member `a` of `set`, where `upward` selects
    /// `a ⪯ k` and otherwise `k ⪯ a`.
    fn reach(&self, set: &ClassSet, upward: bool) -> Result<ClassSet, TopologyError> {
        self.check(set)?;
        let mut out = BTreeSet::new();
        for k in 0..self.len() {
            let pair = |a: usize| if upward { (a, k) } else { (k, a) };
            let verdicts = set.iter().map(|a| (pair(a), self.relation(pair(a).0, pair(a).1)));
            let mut unknown = None;
            let mut hit = false;
            for ((lower, upper), v) in verdicts {
                match v {
                    Verdict::Yes => {
                        hit = true;
                        break;
                    }
                    Verdict::Unknown => unknown = unknown.or(Some((lower, upper))),
                    Verdict::No => {}
                }
            }
            match (hit, unknown) {
                (true, _) => {
                    out.insert(k);
                }
                (false, Some((lower, upper))) => return Err(TopologyError::UnresolvedRelation { lower, upper }),
                (false, None) => {}
            }
        }
        Ok(ClassSet {
            size: self.len(),
            members: out,
        })
    }

    /// The lower set generated by `set`.
    pub fn closure(&self, set: &ClassSet) -> Result<ClassSet, TopologyError> {
        self.reach(set, false)
    }

    /// The upper set generated by `set`: classes into which some member embeds.
    pub fn open_set_generated(&self, set: &ClassSet) -> Result<ClassSet, TopologyError> {
        self.reach(set, true)
    }

    /// Classes avoiding every member of `set`; closed, the complement of the open set.
    pub fn avoiding_set(&self, set: &ClassSet) -> Result<ClassSet, TopologyError> {
        Ok(self.open_set_generated(set)?.complement())
    }

    pub fn is_closed(&self, set: &ClassSet) -> Result<bool, TopologyError> {
        Ok(&self.closure(set)? == set)
    }

    pub fn is_open(&self, set: &ClassSet) -> Result<bool, TopologyError> {
        self.is_closed(&set.complement())
    }

    pub fn is_clopen(&self, set: &ClassSet) -> Result<bool, TopologyError> {
        Ok(self.is_closed(set)? && self.is_open(set)?)
    }

    /// Whether the graph joining every YES pair in either direction is connected.
    pub fn is_comparability_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..self.len() {
                if !seen[j] && (self.relation(i, j) == Verdict::Yes || self.relation(j, i) == Verdict::Yes) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn max_rank(&self, set: &ClassSet) -> Option<usize> {
        set.iter().map(|i| self.classes()[i].rank()).max()
    }
}
