//! Budget-bounded breadth-first enumeration of mutation classes.
//!
//! Enumeration starts from the canonical form of the seed and explores
//! mutations level by level. Members are deduplicated by canonical form. Each
//! member keeps the shortest mutation sequence that reached it, relative to the
//! canonical seed matrix, and the matrix that sequence produces.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::BudgetError;
use crate::exchange::{canonical_form, CanonicalForm, ExchangeMatrix, MatrixJson, MutationSequence};

/// Caps on an enumeration. Mutation classes can be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub max_members: usize,
    pub max_entry: u64,
    pub max_depth: Option<usize>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_members: 100_000,
            max_entry: 64,
            max_depth: None,
        }
    }
}

impl Budget {
    pub fn new(max_members: usize, max_entry: u64, max_depth: Option<usize>) -> Result<Self, BudgetError> {
        if max_members == 0 || max_entry == 0 || max_depth == Some(0) {
            return Err(BudgetError("all caps must be positive".into()));
        }
        Ok(Self {
            max_members,
            max_entry,
            max_depth,
        })
    }

    /// Whether every cap of `self` is at least the matching cap of `other`.
    pub fn covers(&self, other: &Budget) -> bool {
        self.max_members >= other.max_members
            && self.max_entry >= other.max_entry
            && match (self.max_depth, other.max_depth) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(a), Some(b)) => a >= b,
            }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Closed,
    Truncated,
}

/// A budget cap that stopped or pruned an enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cap {
    MaxMembers,
    MaxEntry,
    MaxDepth,
}

impl std::fmt::Display for Cap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Cap::MaxMembers => "max_members",
            Cap::MaxEntry => "max_entry",
            Cap::MaxDepth => "max_depth",
        })
    }
}

/// Three-valued answer to a semi-decidable question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn is_resolved(self) -> bool {
        self != Verdict::Unknown
    }

    pub fn negate(self) -> Self {
        match self {
            Verdict::Yes => Verdict::No,
            Verdict::No => Verdict::Yes,
            Verdict::Unknown => Verdict::Unknown,
        }
    }

    /// Single-letter code used in universe files.
    pub fn code(self) -> &'static str {
        match self {
            Verdict::Yes => "Y",
            Verdict::No => "N",
            Verdict::Unknown => "U",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "YES",
            Verdict::No => "NO",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub form: CanonicalForm,
    /// Shortest discovered sequence from the canonical seed matrix.
    pub witness: MutationSequence,
    /// The seed matrix mutated along `witness`; isomorphic to `form`.
    pub representative: ExchangeMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEnumeration {
    seed: CanonicalForm,
    budget: Budget,
    members: Vec<Member>,
    index: HashMap<[u8; 32], Vec<usize>>,
    tripped: BTreeSet<Cap>,
    infinite_witness: Option<(ExchangeMatrix, MutationSequence)>,
}

impl ClassEnumeration {
    pub fn seed(&self) -> &CanonicalForm {
        &self.seed
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    /// Members in discovery (BFS) order; the seed is first.
    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn status(&self) -> Status {
        if self.tripped.is_empty() {
            Status::Closed
        } else {
            Status::Truncated
        }
    }

    pub fn is_closed(&self) -> bool {
        self.tripped.is_empty()
    }

    pub fn tripped(&self) -> &BTreeSet<Cap> {
        &self.tripped
    }

    /// First matrix met with an entry of magnitude above 2 when the seed is a
    /// connected quiver on at least three vertices, plus the sequence reaching it.
    pub fn infinite_witness(&self) -> Option<&(ExchangeMatrix, MutationSequence)> {
        self.infinite_witness.as_ref()
    }

    /// Position of the member with this canonical form, if discovered.
    pub fn position(&self, form: &CanonicalForm) -> Option<usize> {
        self.index
            .get(form.hash())?
            .iter()
            .copied()
            .find(|&i| self.members[i].form.matrix() == form.matrix())
    }

    pub fn contains(&self, form: &CanonicalForm) -> bool {
        self.position(form).is_some()
    }

    /// Length of the longest stored witness, i.e. the deepest level reached.
    pub fn depth(&self) -> usize {
        self.members.iter().map(|m| m.witness.len()).max().unwrap_or(0)
    }

    pub fn key(&self) -> ClassKey {
        let least = self
            .members
            .iter()
            .map(|m| &m.form)
            .min_by(|a, b| a.matrix().entries().cmp(b.matrix().entries()))
            .expect("seed is a member");
        ClassKey {
            form: least.clone(),
            status: self.status(),
        }
    }

    fn insert(&mut self, member: Member) {
        let idx = self.members.len();
        self.index.entry(*member.form.hash()).or_default().push(idx);
        self.members.push(member);
    }

    pub fn dump(&self) -> EnumerationDump {
        EnumerationDump {
            seed: self.seed.hex(),
            status: self.status(),
            budget: self.budget,
            truncated_by: self.tripped.iter().copied().collect(),
            members: self
                .members
                .iter()
                .map(|m| DumpMember {
                    hash: m.form.hex(),
                    matrix: MatrixJson::from(m.form.matrix()),
                    witness: m.witness.to_one_based(),
                })
                .collect(),
            infinite_witness: self.infinite_witness.as_ref().map(|(b, seq)| InfiniteWitness {
                matrix: MatrixJson::from(b),
                sequence: seq.to_one_based(),
            }),
        }
    }

    /// Rebuilds an enumeration from its dump, replaying every witness from the
    /// seed and checking it reproduces the stored member.
    pub fn from_dump(dump: &EnumerationDump) -> Result<Self, String> {
        let first = dump.members.first().ok_or("enumeration has no members")?;
        let seed_matrix = ExchangeMatrix::try_from(first.matrix.clone()).map_err(|e| e.to_string())?;
        let seed = canonical_form(&seed_matrix);
        if seed.hex() != dump.seed || seed.matrix() != &seed_matrix {
            return Err("seed does not match its hash".into());
        }
        let mut out = Self {
            seed: seed.clone(),
            budget: dump.budget,
            members: Vec::with_capacity(dump.members.len()),
            index: HashMap::new(),
            tripped: dump.truncated_by.iter().copied().collect(),
            infinite_witness: None,
        };
        if (dump.status == Status::Closed) != out.tripped.is_empty() {
            return Err("status disagrees with truncation causes".into());
        }
        for (i, m) in dump.members.iter().enumerate() {
            let witness = MutationSequence::from_one_based(&m.witness).map_err(|e| e.to_string())?;
            let representative = seed.matrix().mutate_along(&witness).map_err(|e| e.to_string())?;
            let form = canonical_form(&representative);
            if form.hex() != m.hash || MatrixJson::from(form.matrix()) != m.matrix {
                return Err(format!("member {} does not replay to its stored hash", i + 1));
            }
            if out.contains(&form) {
                return Err(format!("member {} is duplicated", i + 1));
            }
            out.insert(Member {
                form,
                witness,
                representative,
            });
        }
        if let Some(w) = &dump.infinite_witness {
            let sequence = MutationSequence::from_one_based(&w.sequence).map_err(|e| e.to_string())?;
            let matrix = seed.matrix().mutate_along(&sequence).map_err(|e| e.to_string())?;
            if MatrixJson::from(&matrix) != w.matrix {
                return Err("infinite witness does not replay".into());
            }
            out.infinite_witness = Some((matrix, sequence));
        }
        Ok(out)
    }

    /// Whether running under `budget` would reproduce this closed enumeration
    /// exactly: nothing was pruned, so only the member count, the largest
    /// entry, and the depth matter.
    pub fn closed_within(&self, budget: &Budget) -> bool {
        self.is_closed()
            && self.len() <= budget.max_members
            && self.members.iter().all(|m| m.form.matrix().max_abs_entry() <= budget.max_entry)
            && budget.max_depth.is_none_or(|d| self.depth() <= d)
    }

    /// The same enumeration labelled with another budget; only meaningful when
    /// [`closed_within`](Self::closed_within) holds for it.
    pub(crate) fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }
}

/// Enumeration dump: `{"seed", "status", "budget", "truncated_by", "members": [{"hash", "matrix", "witness"}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationDump {
    pub seed: String,
    pub status: Status,
    pub budget: Budget,
    pub truncated_by: Vec<Cap>,
    pub members: Vec<DumpMember>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinite_witness: Option<InfiniteWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpMember {
    pub hash: String,
    pub matrix: MatrixJson,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfiniteWitness {
    pub matrix: MatrixJson,
    pub sequence: Vec<usize>,
}

/// Finite identifier of a mutation class: the least canonical member found.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassKey {
    pub form: CanonicalForm,
    pub status: Status,
}

impl ClassKey {
    pub fn hex(&self) -> String {
        self.form.hex()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinitenessVerdict {
    Finite { members: usize },
    Infinite { matrix: ExchangeMatrix, sequence: MutationSequence },
    Unknown { members: usize, tripped: Vec<Cap> },
}

impl FinitenessVerdict {
    pub fn verdict(&self) -> Verdict {
        match self {
            FinitenessVerdict::Finite { .. } => Verdict::Yes,
            FinitenessVerdict::Infinite { .. } => Verdict::No,
            FinitenessVerdict::Unknown { .. } => Verdict::Unknown,
        }
    }
}

impl std::fmt::Display for FinitenessVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FinitenessVerdict::Finite { members } => write!(f, "FINITE members={members}"),
            FinitenessVerdict::Infinite { matrix, .. } => {
                write!(f, "INFINITE max_entry={}", matrix.max_abs_entry())
            }
            FinitenessVerdict::Unknown { members, tripped } => {
                let caps: Vec<String> = tripped.iter().map(Cap::to_string).collect();
                write!(f, "UNKNOWN members={members} tripped={}", caps.join(","))
            }
        }
    }
}

/// Whether the entry-above-2 rule decides infiniteness for this seed: a
/// connected skew-symmetric matrix without frozen indices and at least three
/// mutable ones. The rule rests on the classification of finite mutation type.
pub fn infinite_rule_applies(seed: &ExchangeMatrix) -> bool {
    seed.frozen() == 0 && seed.mutable() >= 3 && seed.is_skew_symmetric() && seed.is_connected()
}

enum Step {
    Next(CanonicalForm, ExchangeMatrix),
    Overflow,
}

pub fn enumerate_class(b: &ExchangeMatrix, budget: &Budget) -> ClassEnumeration {
    let seed = canonical_form(b);
    let start = seed.matrix().clone();
    let watch_entries = infinite_rule_applies(&start);
    let mut out = ClassEnumeration {
        seed: seed.clone(),
        budget: *budget,
        members: Vec::new(),
        index: HashMap::new(),
        tripped: BTreeSet::new(),
        infinite_witness: None,
    };
    if watch_entries && start.max_abs_entry() > 2 {
        out.infinite_witness = Some((start.clone(), MutationSequence::empty()));
    }
    let seed_too_large = start.max_abs_entry() > budget.max_entry;
    out.insert(Member {
        form: seed,
        witness: MutationSequence::empty(),
        representative: start,
    });
    if seed_too_large {
        out.tripped.insert(Cap::MaxEntry);
        return out;
    }

    let n = out.members[0].representative.mutable();
    let mut frontier = vec![0usize];
    let mut depth = 0usize;
    'levels: while !frontier.is_empty() {
        let at_depth_cap = budget.max_depth == Some(depth);
        let steps: Vec<(usize, usize, Step)> = frontier
            .par_iter()
            .flat_map_iter(|&p| {
                let rep = &out.members[p].representative;
                (0..n).map(move |k| {
                    let step = match rep.mutate(k) {
                        Ok(next) => Step::Next(canonical_form(&next), next),
                        Err(_) => Step::Overflow,
                    };
                    (p, k, step)
                })
            })
            .collect();

        let mut next_frontier = Vec::new();
        for (p, k, step) in steps {
            let (form, next) = match step {
                Step::Next(form, next) => (form, next),
                Step::Overflow => {
                    out.tripped.insert(Cap::MaxEntry);
                    continue;
                }
            };
            if watch_entries && out.infinite_witness.is_none() && next.max_abs_entry() > 2 {
                out.infinite_witness = Some((next.clone(), out.members[p].witness.then(k)));
            }
            if next.max_abs_entry() > budget.max_entry {
                out.tripped.insert(Cap::MaxEntry);
                continue;
            }
            if out.contains(&form) {
                continue;
            }
            if at_depth_cap {
                out.tripped.insert(Cap::MaxDepth);
                continue;
            }
            if out.len() >= budget.max_members {
                out.tripped.insert(Cap::MaxMembers);
                break 'levels;
            }
            let witness = out.members[p].witness.then(k);
            out.insert(Member {
                form,
                witness,
                representative: next,
            });
            next_frontier.push(out.len() - 1);
        }
        if at_depth_cap {
            break;
        }
        frontier = next_frontier;
        depth += 1;
    }
    out
}

pub fn class_key(b: &ExchangeMatrix, budget: &Budget) -> ClassKey {
    enumerate_class(b, budget).key()
}

pub fn same_class(a: &ExchangeMatrix, b: &ExchangeMatrix, budget: &Budget) -> Verdict {
    same_class_in(&enumerate_class(a, budget), b)
}

/// `same_class` against an existing enumeration of the first argument.
pub fn same_class_in(class: &ClassEnumeration, b: &ExchangeMatrix) -> Verdict {
    let seed = class.seed().matrix();
    if seed.mutable() != b.mutable() || seed.frozen() != b.frozen() {
        return Verdict::No;
    }
    if class.contains(&canonical_form(b)) {
        Verdict::Yes
    } else if class.is_closed() {
        Verdict::No
    } else {
        Verdict::Unknown
    }
}

pub fn is_mutation_finite(b: &ExchangeMatrix, budget: &Budget) -> FinitenessVerdict {
    finiteness_of(&enumerate_class(b, budget), true)
}

/// Finiteness from an enumeration; `infinite_exit` enables the entry-above-2 rule.
pub fn finiteness_of(class: &ClassEnumeration, infinite_exit: bool) -> FinitenessVerdict {
    if infinite_exit {
        if let Some((matrix, sequence)) = class.infinite_witness() {
            return FinitenessVerdict::Infinite {
                matrix: matrix.clone(),
                sequence: sequence.clone(),
            };
        }
    }
    if class.is_closed() {
        FinitenessVerdict::Finite { members: class.len() }
    } else {
        FinitenessVerdict::Unknown {
            members: class.len(),
            tripped: class.tripped().iter().copied().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a3() -> ExchangeMatrix {
        ExchangeMatrix::path(3).unwrap()
    }

    #[test]
    fn budget_validation() {
        assert!(Budget::new(0, 1, None).is_err());
        assert!(Budget::new(1, 0, None).is_err());
        assert!(Budget::new(1, 1, Some(0)).is_err());
        let b = Budget::new(10, 5, Some(3)).unwrap();
        assert!(Budget::default().covers(&b));
        assert!(!b.covers(&Budget::default()));
    }

    #[test]
    fn small_classes() {
        let budget = Budget::default();
        let a2 = enumerate_class(&ExchangeMatrix::kronecker(1), &budget);
        assert_eq!((a2.status(), a2.len()), (Status::Closed, 1));
        let a3 = enumerate_class(&a3(), &budget);
        assert_eq!((a3.status(), a3.len()), (Status::Closed, 4));
        let markov = enumerate_class(&ExchangeMatrix::cycle3(2, 2, 2), &budget);
        assert_eq!((markov.status(), markov.len()), (Status::Closed, 1));
    }

    #[test]
    fn a3_members_are_the_four_shapes() {
        let class = enumerate_class(&a3(), &Budget::default());
        let shapes = [
            a3(),
            ExchangeMatrix::quiver(&[vec![0, -1, 0], vec![1, 0, 1], vec![0, -1, 0]]).unwrap(),
            ExchangeMatrix::quiver(&[vec![0, 1, 0], vec![-1, 0, -1], vec![0, 1, 0]]).unwrap(),
            ExchangeMatrix::cycle3(1, 1, 1),
        ];
        for s in &shapes {
            assert!(class.contains(&canonical_form(s)), "{s:?}");
        }
    }

    #[test]
    fn witnesses_replay() {
        let class = enumerate_class(&ExchangeMatrix::path(4).unwrap(), &Budget::default());
        for m in class.members() {
            let replayed = class.seed().matrix().mutate_along(&m.witness).unwrap();
            assert_eq!(replayed, m.representative);
            assert_eq!(canonical_form(&replayed), m.form);
        }
    }

    #[test]
    fn keys() {
        let budget = Budget::default();
        assert_eq!(
            class_key(&ExchangeMatrix::kronecker(1), &budget),
            class_key(&ExchangeMatrix::kronecker(-1), &budget)
        );
        let from_path = class_key(&a3(), &budget);
        let from_cycle = class_key(&ExchangeMatrix::cycle3(1, 1, 1), &budget);
        assert_eq!(from_path, from_cycle);
        assert_eq!(from_path.status, Status::Closed);
        let capped = Budget::new(100_000, 6, None).unwrap();
        assert_eq!(class_key(&ExchangeMatrix::cycle3(3, 3, 3), &capped).status, Status::Truncated);
    }

    #[test]
    fn same_class_examples() {
        let budget = Budget::default();
        assert_eq!(same_class(&a3(), &ExchangeMatrix::cycle3(1, 1, 1), &budget), Verdict::Yes);
        assert_eq!(
            same_class(&ExchangeMatrix::kronecker(1), &ExchangeMatrix::kronecker(2), &budget),
            Verdict::No
        );
        assert_eq!(same_class(&a3(), &a3(), &budget), Verdict::Yes);
        assert_eq!(same_class(&a3(), &ExchangeMatrix::kronecker(1), &budget), Verdict::No);
        let tight = Budget::new(50, 64, None).unwrap();
        assert_eq!(
            same_class(&ExchangeMatrix::cycle3(3, 3, 3), &ExchangeMatrix::cycle3(1, 1, 1), &tight),
            Verdict::Unknown
        );
    }

    #[test]
    fn finiteness_examples() {
        let budget = Budget::default();
        assert_eq!(is_mutation_finite(&a3(), &budget), FinitenessVerdict::Finite { members: 4 });
        assert_eq!(
            is_mutation_finite(&ExchangeMatrix::cycle3(2, 2, 2), &budget),
            FinitenessVerdict::Finite { members: 1 }
        );
        match is_mutation_finite(&ExchangeMatrix::cycle3(3, 3, 3), &budget) {
            FinitenessVerdict::Infinite { matrix, .. } => assert!(matrix.max_abs_entry() > 2),
            other => panic!("expected INFINITE, got {other}"),
        }
    }

    #[test]
    fn infinite_rule_can_be_disabled() {
        let class = enumerate_class(&ExchangeMatrix::cycle3(3, 3, 3), &Budget::default());
        assert!(matches!(finiteness_of(&class, false), FinitenessVerdict::Unknown { .. }));
    }

    #[test]
    fn infinite_rule_needs_connected_quiver() {
        // a weight-3 Kronecker plus an isolated vertex is disconnected
        let q = ExchangeMatrix::kronecker(3).disjoint_union(&ExchangeMatrix::point());
        assert!(!infinite_rule_applies(&q));
        assert_eq!(is_mutation_finite(&q, &Budget::default()), FinitenessVerdict::Finite { members: 1 });
    }

    #[test]
    fn weight_333_first_mutation_reaches_six() {
        let q = ExchangeMatrix::cycle3(3, 3, 3);
        assert_eq!(q.mutate(2).unwrap().get(0, 1).abs(), 6);
    }

    #[test]
    fn depth_cap_truncates() {
        let budget = Budget::new(100_000, 64, Some(1)).unwrap();
        let class = enumerate_class(&ExchangeMatrix::path(4).unwrap(), &budget);
        assert_eq!(class.status(), Status::Truncated);
        assert!(class.tripped().contains(&Cap::MaxDepth));
        assert!(class.members().iter().all(|m| m.witness.len() <= 1));
        // A3 closes at depth 2: one level past the deepest member adds nothing
        let a3 = enumerate_class(&a3(), &Budget::new(100, 64, Some(2)).unwrap());
        assert_eq!(a3.status(), Status::Closed);
    }

    #[test]
    fn member_cap_truncates() {
        let budget = Budget::new(2, 64, None).unwrap();
        let class = enumerate_class(&a3(), &budget);
        assert_eq!(class.len(), 2);
        assert!(class.tripped().contains(&Cap::MaxMembers));
    }

    #[test]
    fn oversized_seed_truncates_immediately() {
        let class = enumerate_class(&ExchangeMatrix::kronecker(9), &Budget::new(10, 4, None).unwrap());
        assert_eq!(class.len(), 1);
        assert_eq!(class.status(), Status::Truncated);
    }

    #[test]
    fn dump_round_trip() {
        let class = enumerate_class(&ExchangeMatrix::path(4).unwrap(), &Budget::default());
        let dump = class.dump();
        let text = serde_json::to_string(&dump).unwrap();
        let back: EnumerationDump = serde_json::from_str(&text).unwrap();
        assert_eq!(ClassEnumeration::from_dump(&back).unwrap(), class);
    }

    #[test]
    fn dump_rejects_tampering() {
        let mut dump = enumerate_class(&a3(), &Budget::default()).dump();
        dump.members[1].witness = vec![];
        assert!(ClassEnumeration::from_dump(&dump).is_err());
    }

    #[test]
    fn closed_within_budget() {
        let class = enumerate_class(&a3(), &Budget::default());
        assert!(class.closed_within(&Budget::new(4, 1, None).unwrap()));
        assert!(!class.closed_within(&Budget::new(3, 64, None).unwrap()));
        let a4 = enumerate_class(&ExchangeMatrix::path(4).unwrap(), &Budget::default());
        let depth = a4.depth();
        assert!(depth >= 2);
        assert!(a4.closed_within(&Budget::new(100, 64, Some(depth)).unwrap()));
        assert!(!a4.closed_within(&Budget::new(100, 64, Some(depth - 1)).unwrap()));
    }
}
