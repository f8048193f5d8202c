//! The embedding order on mutation classes and the topology it induces.
//!
//! `[P] ⪯ [Q]` when some member of `[P]` is isomorphic to a full restriction
//! of some member of `[Q]`. Since classes may be infinite, every verdict is
//! three-valued and UNKNOWN records which budget cap stopped the search.

mod hasse;
mod properties;
mod topology;
mod universe;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::class::{Budget, Cap, ClassEnumeration, Verdict};
use crate::engine::Engine;
use crate::exchange::{canonical_form, is_isomorphic, CanonicalForm, ExchangeMatrix, IndexSubset, MutationSequence};

pub use hasse::{build_hasse, build_hasse_partial, HasseDiagram};
pub use properties::{
    density_witness, in_e_n, is_avoiding, is_k_universal_bounded, is_mutation_acyclic, is_n_abundant, DensityWitness,
    PropertyVerdict,
};
pub use topology::ClassSet;
pub use universe::{
    build_universe, build_universe_from, generate_seeds, ClassEntry, Finiteness, Universe, UniverseClass, UniverseFile, UniverseKind,
    UniverseParams,
};

/// Certificate for `[P] ⪯ [Q]`: mutating `Q` along `upper_sequence` and
/// restricting to `subset` gives a matrix isomorphic to `P` mutated along
/// `lower_sequence`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EmbedWitness {
    pub upper_sequence: MutationSequence,
    pub subset: IndexSubset,
    pub lower_sequence: MutationSequence,
}

impl EmbedWitness {
    /// Replays the certificate through the matrix operations.
    pub fn replays(&self, lower: &ExchangeMatrix, upper: &ExchangeMatrix) -> bool {
        let Ok(mutated) = upper.mutate_along(&self.upper_sequence) else {
            return false;
        };
        let Ok(restricted) = mutated.restrict(&self.subset) else {
            return false;
        };
        lower
            .mutate_along(&self.lower_sequence)
            .is_ok_and(|target| is_isomorphic(&restricted, &target))
    }

    pub fn relabeled(&self, lower_perm: &[usize], upper_perm: &[usize]) -> Self {
        Self {
            upper_sequence: self.upper_sequence.relabeled(upper_perm),
            subset: {
                let mut indices: Vec<usize> = self.subset.indices().iter().map(|&i| upper_perm[i]).collect();
                indices.sort_unstable();
                IndexSubset::new(indices, upper_perm.len()).expect("a permutation keeps a subset valid")
            },
            lower_sequence: self.lower_sequence.relabeled(lower_perm),
        }
    }

    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            upper_sequence: self.upper_sequence.to_one_based(),
            subset: self.subset.indices().iter().map(|i| i + 1).collect(),
            lower_sequence: self.lower_sequence.to_one_based(),
        }
    }
}

/// 1-based witness as written to JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub upper_sequence: Vec<usize>,
    pub subset: Vec<usize>,
    pub lower_sequence: Vec<usize>,
}

impl WitnessJson {
    pub fn to_witness(&self, upper_size: usize) -> Result<EmbedWitness, String> {
        let zero_based = |v: &[usize]| -> Result<Vec<usize>, String> {
            v.iter()
                .map(|&i| i.checked_sub(1).ok_or_else(|| "indices are 1-based".to_string()))
                .collect()
        };
        Ok(EmbedWitness {
            upper_sequence: MutationSequence::new(zero_based(&self.upper_sequence)?),
            subset: IndexSubset::new(zero_based(&self.subset)?, upper_size).map_err(|e| e.to_string())?,
            lower_sequence: MutationSequence::new(zero_based(&self.lower_sequence)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedVerdict {
    Yes(EmbedWitness),
    /// Exhaustive within closed enumerations.
    No,
    Unknown { tripped: Vec<Cap> },
}

impl EmbedVerdict {
    pub fn verdict(&self) -> Verdict {
        match self {
            EmbedVerdict::Yes(_) => Verdict::Yes,
            EmbedVerdict::No => Verdict::No,
            EmbedVerdict::Unknown { .. } => Verdict::Unknown,
        }
    }

    pub fn witness(&self) -> Option<&EmbedWitness> {
        match self {
            EmbedVerdict::Yes(w) => Some(w),
            _ => None,
        }
    }

    pub fn relabeled(&self, lower_perm: &[usize], upper_perm: &[usize]) -> Self {
        match self {
            EmbedVerdict::Yes(w) => EmbedVerdict::Yes(w.relabeled(lower_perm, upper_perm)),
            other => other.clone(),
        }
    }
}

/// Restrictions sharing a hash: form, member index, subset order, subset.
type Occurrences = Vec<(CanonicalForm, usize, usize, IndexSubset)>;

/// All restrictions of a class's members to index sets with a fixed number of
/// mutable and frozen indices, keyed by canonical form. Each form keeps its
/// first occurrence: members in BFS order, subsets in colex order.
#[derive(Debug)]
pub struct RestrictionIndex {
    first: HashMap<[u8; 32], Occurrences>,
}

impl RestrictionIndex {
    pub fn build(class: &ClassEnumeration, mutable: usize, frozen: usize) -> Self {
        let mut first: HashMap<[u8; 32], Occurrences> = HashMap::new();
        let Some(seed) = class.members().first() else {
            return Self { first };
        };
        let shape = (seed.representative.mutable(), seed.representative.frozen());
        let subsets = partition_subsets(shape.0, shape.1, mutable, frozen);
        for (qi, member) in class.members().iter().enumerate() {
            for (order, subset) in subsets.iter().enumerate() {
                let restricted = member
                    .representative
                    .restrict(subset)
                    .expect("subset has a mutable index");
                let form = canonical_form(&restricted);
                let bucket = first.entry(*form.hash()).or_default();
                if !bucket.iter().any(|(f, ..)| f.matrix() == form.matrix()) {
                    bucket.push((form, qi, order, subset.clone()));
                }
            }
        }
        Self { first }
    }

    /// `(member position, subset order, subset)` of the first restriction
    /// isomorphic to `form`.
    pub fn first_occurrence(&self, form: &CanonicalForm) -> Option<(usize, usize, &IndexSubset)> {
        self.first
            .get(form.hash())?
            .iter()
            .find(|(f, ..)| f.matrix() == form.matrix())
            .map(|(_, qi, order, subset)| (*qi, *order, subset))
    }

    pub fn len(&self) -> usize {
        self.first.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }
}

/// Index sets of a `(n + m)`-matrix with exactly `mutable` indices below `n`
/// and `frozen` at or above it, in colex order.
pub fn partition_subsets(n: usize, m: usize, mutable: usize, frozen: usize) -> Vec<IndexSubset> {
    let size = n + m;
    colex_combinations(size, mutable + frozen)
        .into_iter()
        .filter(|c| c.iter().filter(|&&i| i < n).count() == mutable)
        .map(|c| IndexSubset::new(c, size).expect("distinct in-range indices"))
        .collect()
}

/// `k`-subsets of `0..size`, each ascending, ordered colexicographically.
pub fn colex_combinations(size: usize, k: usize) -> Vec<Vec<usize>> {
    if k > size {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        // colex successor: bump the lowest position that can move
        let mut i = 0;
        while i < k && (if i + 1 < k { current[i] + 1 == current[i + 1] } else { current[i] + 1 == size }) {
            i += 1;
        }
        if i == k {
            return out;
        }
        current[i] += 1;
        for (j, slot) in current.iter_mut().enumerate().take(i) {
            *slot = j;
        }
    }
}

pub(crate) fn embeds_between(engine: &Engine, lower: &CanonicalForm, upper: &CanonicalForm) -> EmbedVerdict {
    let (p, q) = (lower.matrix(), upper.matrix());
    if p.mutable() > q.mutable() || p.frozen() > q.frozen() {
        return EmbedVerdict::No;
    }
    let lower_class = engine.enumerate_canonical(lower);
    let upper_class = engine.enumerate_canonical(upper);
    let index = engine.restriction_index(&upper_class, p.mutable(), p.frozen());

    let hit = lower_class
        .members()
        .iter()
        .filter_map(|member| {
            index
                .first_occurrence(&member.form)
                .map(|(qi, order, subset)| ((qi, order), subset, member))
        })
        .min_by_key(|(rank, ..)| *rank);
    if let Some(((qi, _), subset, member)) = hit {
        return EmbedVerdict::Yes(EmbedWitness {
            upper_sequence: upper_class.members()[qi].witness.clone(),
            subset: subset.clone(),
            lower_sequence: member.witness.clone(),
        });
    }

    let equal_shape = p.mutable() == q.mutable() && p.frozen() == q.frozen();
    // equal shapes embed only when the classes coincide, which either closed
    // enumeration would have revealed
    if (lower_class.is_closed() && upper_class.is_closed())
        || (equal_shape && (lower_class.is_closed() || upper_class.is_closed()))
    {
        return EmbedVerdict::No;
    }
    let tripped: BTreeSet<Cap> = lower_class
        .tripped()
        .iter()
        .chain(upper_class.tripped())
        .copied()
        .collect();
    EmbedVerdict::Unknown {
        tripped: tripped.into_iter().collect(),
    }
}

/// Whether `[p] ⪯ [q]` under `budget`, with a witness in the labels of `p` and `q`.
pub fn embeds(p: &ExchangeMatrix, q: &ExchangeMatrix, budget: &Budget) -> EmbedVerdict {
    Engine::new(*budget).embeds(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a3() -> ExchangeMatrix {
        ExchangeMatrix::path(3).unwrap()
    }

    #[test]
    fn colex_order() {
        assert_eq!(
            colex_combinations(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(colex_combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(colex_combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(colex_combinations(2, 3).is_empty());
    }

    #[test]
    fn partition_compatible_subsets() {
        let s = partition_subsets(2, 2, 1, 1);
        let idx: Vec<&[usize]> = s.iter().map(IndexSubset::indices).collect();
        assert_eq!(idx, vec![&[0, 2][..], &[1, 2], &[0, 3], &[1, 3]]);
    }

    #[test]
    fn a2_into_a3() {
        let budget = Budget::default();
        let v = embeds(&ExchangeMatrix::kronecker(1), &a3(), &budget);
        let w = v.witness().expect("YES");
        assert_eq!(w.subset.indices(), &[0, 1]);
        assert!(w.upper_sequence.is_empty() && w.lower_sequence.is_empty());
        assert!(w.replays(&ExchangeMatrix::kronecker(1), &a3()));
    }

    #[test]
    fn isolated_pair_into_a3() {
        let i2 = ExchangeMatrix::isolated(2).unwrap();
        let v = embeds(&i2, &a3(), &Budget::default());
        let w = v.witness().expect("YES");
        assert_eq!(w.subset.indices(), &[0, 2]);
        assert!(w.replays(&i2, &a3()));
    }

    #[test]
    fn weight_three_avoids_markov() {
        let v = embeds(&ExchangeMatrix::kronecker(3), &ExchangeMatrix::cycle3(2, 2, 2), &Budget::default());
        assert_eq!(v, EmbedVerdict::No);
    }

    #[test]
    fn weight_five_into_cycle_321() {
        let q = ExchangeMatrix::cycle3(1, 2, 3);
        let p = ExchangeMatrix::kronecker(5);
        let w = embeds(&p, &q, &Budget::default()).witness().cloned().expect("YES");
        assert!(w.replays(&p, &q));
        assert_eq!(w.upper_sequence.len(), 1);
    }

    #[test]
    fn rank_too_large_is_no() {
        assert_eq!(embeds(&a3(), &ExchangeMatrix::kronecker(1), &Budget::default()), EmbedVerdict::No);
    }

    #[test]
    fn equal_shape_different_class_is_no_even_if_truncated() {
        // [A3] is closed, the (3,3,3) class is not
        let v = embeds(&ExchangeMatrix::cycle3(3, 3, 3), &a3(), &Budget::default());
        assert_eq!(v, EmbedVerdict::No);
        let v = embeds(&a3(), &ExchangeMatrix::cycle3(3, 3, 3), &Budget::default());
        assert_eq!(v, EmbedVerdict::No);
    }

    #[test]
    fn truncation_yields_unknown() {
        let budget = Budget::new(5, 64, None).unwrap();
        let v = embeds(&ExchangeMatrix::kronecker(4), &ExchangeMatrix::cycle3(3, 3, 3), &budget);
        assert!(matches!(v, EmbedVerdict::Unknown { ref tripped } if tripped.contains(&Cap::MaxMembers)));
    }

    #[test]
    fn witness_in_input_labels() {
        // A3 presented with its vertices reordered
        let q = a3().permuted(&[2, 0, 1]);
        let p = ExchangeMatrix::isolated(2).unwrap();
        let w = embeds(&p, &q, &Budget::default()).witness().cloned().unwrap();
        assert!(w.replays(&p, &q));
    }

    #[test]
    fn frozen_shape_respected() {
        let ice = ExchangeMatrix::from_rows(1, 1, &[vec![0, 1], vec![-1, 0]]).unwrap();
        let big = ExchangeMatrix::from_rows(2, 1, &[vec![0, 1, 1], vec![-1, 0, 0], vec![-1, 0, 0]]).unwrap();
        let w = embeds(&ice, &big, &Budget::default()).witness().cloned().expect("YES");
        assert!(w.replays(&ice, &big));
        assert_eq!(embeds(&big, &ice, &Budget::default()), EmbedVerdict::No);
        // a quiver cannot embed into an ice quiver's frozen part
        let pt = ExchangeMatrix::point();
        assert!(embeds(&pt, &ice, &Budget::default()).witness().is_some());
        assert_eq!(embeds(&ice, &ExchangeMatrix::isolated(2).unwrap(), &Budget::default()), EmbedVerdict::No);
    }
}
