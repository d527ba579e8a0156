//! Rudin-Keisler lattices `Q_k × L_{s,3}` of quite o-minimal Ehrenfeucht
//! theories, their limit-model distributions, and exact checks of the
//! counting identities behind the `3^k · 6^s` spectrum.
//!
//! - [`poset`]: IL-labeled finite preorders, quotients, Hasse covers,
//!   Pareto products and label-preserving isomorphism.
//! - [`catalog`]: the canonical lattices, closed-form counts, the
//!   decomposition formula, spectrum validation and identification.
//! - [`oracle`]: brute-force enumeration of model descriptors.
//! - [`document`], [`dot`], [`cli`]: JSON files, Graphviz output and the
//!   command-line front end.

pub mod catalog;
pub mod cli;
pub mod document;
pub mod dot;
pub mod oracle;
pub mod poset;

pub use catalog::{
    build_t1, build_t2, build_theory, compose_counts, decomposition_report, identify, il_closed_form,
    total_limit_count, validate_count, DecompositionReport, NodeCoord, TheorySignature,
};
pub use document::PreorderDocument;
pub use oracle::{
    classify, enumerate_models, node_of, oracle_counts, CountReport, ModelDescriptor, ModelKind,
};
pub use poset::{are_isomorphic, pareto_product, IsoWitness, LabeledPreorder};
