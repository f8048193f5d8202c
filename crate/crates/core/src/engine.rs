//! A fixed-budget session that memoizes enumerations, restriction indexes and
//! embedding verdicts, optionally backed by the persistent [`Store`].
//!
//! Every method is a pure function of its arguments and the budget; the memo
//! tables and the store only avoid recomputation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::class::{self, Budget, ClassEnumeration, ClassKey, FinitenessVerdict, Verdict};
use crate::exchange::{canonical_form, canonical_labeling, CanonicalForm, ExchangeMatrix};
use crate::poset::{self, EmbedVerdict, EmbedWitness, RestrictionIndex};
use crate::store::{EmbedRecord, Record, Store};

type Hash = [u8; 32];

pub struct Engine {
    budget: Budget,
    infinite_exit: bool,
    classes: Mutex<HashMap<Hash, Arc<ClassEnumeration>>>,
    restrictions: Mutex<HashMap<(Hash, usize, usize), Arc<RestrictionIndex>>>,
    embeddings: Mutex<HashMap<(Hash, Hash), EmbedVerdict>>,
    store: Option<Mutex<Store>>,
    cache_errors: Mutex<Vec<String>>,
}

impl Engine {
    pub fn new(budget: Budget) -> Self {
        Self {
            budget,
            infinite_exit: true,
            classes: Mutex::default(),
            restrictions: Mutex::default(),
            embeddings: Mutex::default(),
            store: None,
            cache_errors: Mutex::default(),
        }
    }

    pub fn with_store(budget: Budget, store: Store) -> Self {
        Self {
            store: Some(Mutex::new(store)),
            ..Self::new(budget)
        }
    }

    /// Enables or disables the entry-above-2 early INFINITE verdict.
    pub fn infinite_exit(mut self, enabled: bool) -> Self {
        self.infinite_exit = enabled;
        self
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn uses_infinite_exit(&self) -> bool {
        self.infinite_exit
    }

    /// Failed cache writes, oldest first. Results are unaffected by them.
    pub fn cache_errors(&self) -> Vec<String> {
        self.cache_errors.lock().expect("poisoned").clone()
    }

    pub fn into_store(self) -> Option<Store> {
        self.store.map(|s| s.into_inner().expect("poisoned"))
    }

    pub fn enumerate(&self, b: &ExchangeMatrix) -> Arc<ClassEnumeration> {
        self.enumerate_canonical(&canonical_form(b))
    }

    pub fn enumerate_canonical(&self, seed: &CanonicalForm) -> Arc<ClassEnumeration> {
        if let Some(hit) = self.classes.lock().expect("poisoned").get(seed.hash()) {
            return Arc::clone(hit);
        }
        let cached = self
            .store
            .as_ref()
            .and_then(|s| s.lock().expect("poisoned").lookup_class(&seed.hex(), &self.budget));
        let class = match cached {
            Some(class) => Arc::new(class),
            None => {
                let class = Arc::new(class::enumerate_class(seed.matrix(), &self.budget));
                self.persist(Record::class(&class));
                class
            }
        };
        self.classes
            .lock()
            .expect("poisoned")
            .entry(*seed.hash())
            .or_insert(class)
            .clone()
    }

    pub fn class_key(&self, b: &ExchangeMatrix) -> ClassKey {
        self.enumerate(b).key()
    }

    pub fn same_class(&self, a: &ExchangeMatrix, b: &ExchangeMatrix) -> Verdict {
        class::same_class_in(&self.enumerate(a), b)
    }

    pub fn is_mutation_finite(&self, b: &ExchangeMatrix) -> FinitenessVerdict {
        class::finiteness_of(&self.enumerate(b), self.infinite_exit)
    }

    pub(crate) fn restriction_index(
        &self,
        class: &Arc<ClassEnumeration>,
        mutable: usize,
        frozen: usize,
    ) -> Arc<RestrictionIndex> {
        let key = (*class.seed().hash(), mutable, frozen);
        if let Some(hit) = self.restrictions.lock().expect("poisoned").get(&key) {
            return Arc::clone(hit);
        }
        let index = Arc::new(RestrictionIndex::build(class, mutable, frozen));
        self.restrictions
            .lock()
            .expect("poisoned")
            .entry(key)
            .or_insert(index)
            .clone()
    }

    /// Embedding verdict between canonical seeds; the witness is relative to
    /// the canonical seed matrices.
    pub fn embeds_canonical(&self, lower: &CanonicalForm, upper: &CanonicalForm) -> EmbedVerdict {
        let key = (*lower.hash(), *upper.hash());
        if let Some(hit) = self.embeddings.lock().expect("poisoned").get(&key) {
            return hit.clone();
        }
        let cached = self.store.as_ref().and_then(|s| {
            s.lock()
                .expect("poisoned")
                .lookup_embed(&lower.hex(), &upper.hex(), &self.budget)
        });
        let verdict = match cached {
            Some(v) => v,
            None => {
                let v = poset::embeds_between(self, lower, upper);
                self.persist(Record::Embed(EmbedRecord::new(lower, upper, self.budget, &v)));
                v
            }
        };
        self.embeddings
            .lock()
            .expect("poisoned")
            .entry(key)
            .or_insert(verdict)
            .clone()
    }

    /// Whether `[lower]` embeds into `[upper]`; a YES witness is expressed in
    /// the labels of the given matrices.
    pub fn embeds(&self, lower: &ExchangeMatrix, upper: &ExchangeMatrix) -> EmbedVerdict {
        let (lower_form, lower_perm) = canonical_labeling(lower);
        let (upper_form, upper_perm) = canonical_labeling(upper);
        match self.embeds_canonical(&lower_form, &upper_form) {
            EmbedVerdict::Yes(w) => {
                let w = w.relabeled(&lower_perm, &upper_perm);
                EmbedVerdict::Yes(self.first_subset(lower, upper, &lower_perm, w))
            }
            other => other,
        }
    }

    /// Re-picks the subset of a YES witness as the colex-first one in the
    /// labels of `upper`, keeping the member of `[upper]` it restricts.
    fn first_subset(
        &self,
        lower: &ExchangeMatrix,
        upper: &ExchangeMatrix,
        lower_perm: &[usize],
        w: EmbedWitness,
    ) -> EmbedWitness {
        let Ok(member) = upper.mutate_along(&w.upper_sequence) else {
            return w;
        };
        let lower_class = self.enumerate(lower);
        let subsets = poset::partition_subsets(upper.mutable(), upper.frozen(), lower.mutable(), lower.frozen());
        subsets
            .into_iter()
            .find_map(|subset| {
                let form = canonical_form(&member.restrict(&subset).ok()?);
                let pos = lower_class.position(&form)?;
                Some(EmbedWitness {
                    upper_sequence: w.upper_sequence.clone(),
                    subset,
                    lower_sequence: lower_class.members()[pos].witness.relabeled(lower_perm),
                })
            })
            .unwrap_or(w)
    }

    fn persist(&self, record: Record) {
        if let Some(store) = &self.store {
            if let Err(e) = store.lock().expect("poisoned").put(&record) {
                self.cache_errors.lock().expect("poisoned").push(e.to_string());
            }
        }
    }
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(Budget::default())
    }
}
