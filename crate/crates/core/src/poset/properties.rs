//! Named hereditary properties as three-valued checks on a single class.

use std::collections::BTreeSet;
use std::fmt;

use super::universe::{generate_seeds, group_seeds};
use super::{EmbedVerdict, EmbedWitness, UniverseKind};
use crate::class::{Cap, Verdict};
use crate::engine::Engine;
use crate::exchange::{canonical_form, ExchangeMatrix, MutationSequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyVerdict {
    pub verdict: Verdict,
    /// What decided the verdict, for display.
    pub reason: String,
    pub tripped: Vec<Cap>,
}

impl PropertyVerdict {
    fn resolved(verdict: Verdict, reason: impl Into<String>) -> Self {
        Self {
            verdict,
            reason: reason.into(),
            tripped: Vec::new(),
        }
    }

    fn unknown(reason: impl Into<String>, tripped: impl IntoIterator<Item = Cap>) -> Self {
        Self {
            verdict: Verdict::Unknown,
            reason: reason.into(),
            tripped: tripped.into_iter().collect::<BTreeSet<_>>().into_iter().collect(),
        }
    }
}

impl fmt::Display for PropertyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.verdict, self.reason)
    }
}

fn one_based(seq: &MutationSequence) -> String {
    format!("{:?}", seq.to_one_based())
}

/// NO if some class in `s` embeds into `[q]`, YES if none can.
pub fn is_avoiding(engine: &Engine, q: &ExchangeMatrix, s: &[ExchangeMatrix]) -> PropertyVerdict {
    let mut tripped = Vec::new();
    let mut undecided = None;
    for (i, p) in s.iter().enumerate() {
        match engine.embeds(p, q) {
            EmbedVerdict::Yes(w) => {
                return PropertyVerdict::resolved(
                    Verdict::No,
                    format!("forbidden class #{} embeds at subset {:?}", i + 1, w.to_json().subset),
                )
            }
            EmbedVerdict::No => {}
            EmbedVerdict::Unknown { tripped: t } => {
                undecided.get_or_insert(i);
                tripped.extend(t);
            }
        }
    }
    match undecided {
        Some(i) => PropertyVerdict::unknown(format!("embedding of forbidden class #{} unresolved", i + 1), tripped),
        None => PropertyVerdict::resolved(Verdict::Yes, "no forbidden class embeds"),
    }
}

/// YES when the class has a member without directed cycles among mutable indices.
pub fn is_mutation_acyclic(engine: &Engine, b: &ExchangeMatrix) -> PropertyVerdict {
    let class = engine.enumerate(b);
    if let Some(m) = class.members().iter().find(|m| m.representative.is_acyclic()) {
        return PropertyVerdict::resolved(
            Verdict::Yes,
            format!("acyclic member reached by {}", one_based(&m.witness)),
        );
    }
    if class.is_closed() {
        PropertyVerdict::resolved(Verdict::No, format!("none of {} members is acyclic", class.len()))
    } else {
        PropertyVerdict::unknown(
            format!("no acyclic member among {} found", class.len()),
            class.tripped().iter().copied(),
        )
    }
}

/// YES when every pair of mutable indices carries at least `n` arrows in
/// every member. Frozen indices are ignored.
pub fn is_n_abundant(engine: &Engine, b: &ExchangeMatrix, n: u64) -> PropertyVerdict {
    if b.mutable() < 2 {
        return PropertyVerdict::resolved(Verdict::Yes, "fewer than two mutable indices");
    }
    let class = engine.enumerate(b);
    for m in class.members() {
        let r = &m.representative;
        for i in 0..r.mutable() {
            for j in 0..r.mutable() {
                if i != j && r.get(i, j).unsigned_abs() < n {
                    return PropertyVerdict::resolved(
                        Verdict::No,
                        format!(
                            "|b[{}][{}]| = {} after {}",
                            i + 1,
                            j + 1,
                            r.get(i, j).abs(),
                            one_based(&m.witness)
                        ),
                    );
                }
            }
        }
    }
    if class.is_closed() {
        PropertyVerdict::resolved(Verdict::Yes, format!("all {} members checked", class.len()))
    } else {
        PropertyVerdict::unknown(
            format!("{} members checked", class.len()),
            class.tripped().iter().copied(),
        )
    }
}

/// Membership in E_N: avoiding the arrowless quiver on `n + 1` vertices.
pub fn in_e_n(engine: &Engine, b: &ExchangeMatrix, n: usize) -> PropertyVerdict {
    let forbidden = ExchangeMatrix::isolated(n + 1).expect("n + 1 > 0");
    is_avoiding(engine, b, &[forbidden])
}

/// Whether every quiver class with at most `k` vertices and a seed with
/// entries at most `w` embeds into `[q]`.
pub fn is_k_universal_bounded(engine: &Engine, q: &ExchangeMatrix, k: usize, w: u64) -> PropertyVerdict {
    if q.mutable() < k {
        return PropertyVerdict::resolved(Verdict::No, format!("fewer than {k} mutable indices"));
    }
    let upper = canonical_form(q);
    let mut tripped = Vec::new();
    let mut undecided = None;
    for (seeds, _) in group_seeds(engine, generate_seeds(k, w, UniverseKind::Quiver)) {
        match engine.embeds_canonical(&seeds[0], &upper) {
            EmbedVerdict::Yes(_) => {}
            EmbedVerdict::No => {
                return PropertyVerdict::resolved(
                    Verdict::No,
                    format!("class of {:?} does not embed", seeds[0].matrix().rows()),
                )
            }
            EmbedVerdict::Unknown { tripped: t } => {
                undecided.get_or_insert_with(|| seeds[0].matrix().rows());
                tripped.extend(t);
            }
        }
    }
    match undecided {
        Some(rows) => PropertyVerdict::unknown(format!("embedding of {rows:?} unresolved"), tripped),
        None => PropertyVerdict::resolved(Verdict::Yes, "every test class embeds"),
    }
}

/// `[P]` and `[Q]` both embed into `[P ⊔ Q]` by restricting to a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityWitness {
    pub union: ExchangeMatrix,
    pub p_into_union: EmbedVerdict,
    pub q_into_union: EmbedVerdict,
}

pub fn density_witness(p: &ExchangeMatrix, q: &ExchangeMatrix) -> DensityWitness {
    let union = p.disjoint_union(q);
    let (p_block, q_block) = ExchangeMatrix::union_blocks(p, q);
    let block = |subset| {
        EmbedVerdict::Yes(EmbedWitness {
            upper_sequence: MutationSequence::empty(),
            subset,
            lower_sequence: MutationSequence::empty(),
        })
    };
    DensityWitness {
        union,
        p_into_union: block(p_block),
        q_into_union: block(q_block),
    }
}
