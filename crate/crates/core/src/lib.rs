//! Rewriting of traces over partially commutative alphabets, and the universal
//! group-valued invariants such systems carry.
//!
//! The central objects are [`Trace`]s: words over a [`CommutationAlphabet`]
//! taken up to swaps of adjacent commuting letters, stored as their
//! lexicographically least representative.  A [`RewriteSystem`] replaces
//! single letters by traces; [`convergence`] provides weight-based termination
//! certificates and bounded local-confluence checking, and [`group`] builds
//! the group where the normal-form invariant lives ([`TGElement`],
//! [`universal_invariant`], [`extend_homomorphism`]).
//!
//! Concrete instances live in their own modules:
//!
//! * [`graph`] — multigraphs under deletion/contraction, with the Tutte
//!   polynomial recovered as the universal invariant and an independent
//!   subset-expansion oracle;
//! * [`weyl`] — normal ordering in the Weyl algebra (optionally with a
//!   central letter);
//! * [`pbw`] — monomial straightening (normal form = sorted word);
//! * [`prefab`] — a generic adapter for multivalued composition structures,
//!   instantiated by the shuffle and multiplicative-arithmetic systems.
//!
//! Everything is deterministic and budgeted: operations that could diverge
//! take explicit [`Budgets`] and report exhaustion instead of spinning.

pub mod convergence;
pub mod error;
pub mod graph;
pub mod group;
pub mod pbw;
pub mod poly;
pub mod prefab;
pub mod rewrite;
pub mod trace;
pub mod weyl;

pub use convergence::{
    certify_convergence, check_local_confluence, verify_weight_certificate, ConfluenceCounterexample,
    ConfluenceStatus, ConvergenceCertificate, ConvergenceReport, Scope, TerminationStatus,
    WeightCertificate,
};
pub use error::Error;
pub use graph::{
    canonical_decomposition, deletion_contraction_rules, enumerate_connected_multigraphs,
    graph_system, graph_weight_certificate, tutte_oracle, tutte_polynomial, EdgeKind, Multigraph,
    TutteEngine, DEFAULT_VERTEX_CAP,
};
pub use group::{
    evaluate_trace, extend_homomorphism, group_presentation, universal_invariant, GroupCallbacks,
    Presentation, Relation, Sign, TGElement,
};
pub use pbw::{pbw_normal_order, pbw_system, pbw_weight_certificate};
pub use poly::BivarPoly;
pub use prefab::{
    arith_compose, arith_decompositions, arith_invariant, arith_system, arith_weight_certificate,
    prefab_system, shuffle_prefab_invariant, shuffle_set, shuffle_system, shuffle_weight_certificate,
    PrefabAdapter,
};
pub use rewrite::{
    Budgets, BudgetKind, ReductSet, ReductionOutcome, ReductionReport, RewriteSystem, Strategy,
};
pub use trace::{Commutation, CommutationAlphabet, Letter, Trace};
pub use weyl::{weyl_letter, weyl_normal_order, weyl_system, weyl_unit, weyl_weight_certificate};
