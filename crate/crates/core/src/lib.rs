//! Mutation classes of quivers and skew-symmetrizable exchange matrices, the
//! embedding order on them, and the Alexandrov topology of that order,
//! computed on finite, budget-bounded universes.

pub mod class;
pub mod engine;
pub mod error;
pub mod exchange;
pub mod poset;
pub mod store;

pub use class::{
    class_key, enumerate_class, is_mutation_finite, same_class, Budget, Cap, ClassEnumeration, ClassKey,
    FinitenessVerdict, Status, Verdict,
};
pub use engine::Engine;
pub use error::{MatrixError, StoreError, TopologyError};
pub use exchange::{
    canonical_form, canonical_labeling, is_isomorphic, CanonicalForm, ExchangeMatrix, IndexSubset, MatrixJson,
    MutationSequence,
};
pub use poset::{
    build_hasse, build_hasse_partial, build_universe, density_witness, embeds, in_e_n, is_avoiding,
    is_k_universal_bounded, is_mutation_acyclic, is_n_abundant, ClassSet, DensityWitness, EmbedVerdict, EmbedWitness,
    HasseDiagram, PropertyVerdict, Universe, UniverseKind,
};
pub use store::{Record, Store};
