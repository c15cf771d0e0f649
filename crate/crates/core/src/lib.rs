//! Exact numerical calculus for weighted baskets of terminal Fano threefolds.

pub mod basket;
pub mod criteria;
pub mod error;
pub mod geography;
pub mod packing;
pub mod rational;
pub mod replay;
pub mod surd;

pub use basket::{refine_k3_lower, Basket, FanoNumerics, OrbifoldPair};
pub use criteria::{
    assumption_defaults, bir_bound_bc2, bir_bound_thm_bc, bir_bound_usage, n0_lower_bound, nonpencil_12m,
    nonpencil_np1, np1_equality_analyze, np2_min_m, np2cor_min_m, plurigenus_lower_bound, Applicability,
    CriterionParams, Np1Status, Np2Variant, RationalBound,
};
pub use error::{Error, Result};
pub use geography::{enumerate_baskets, min_positive_k3, BasketConstraints, Cmp, PlurigenusFilter};
pub use packing::{
    apply_steps, counts_of_initial, descendants, dominates, initial_basket, initial_counts, parents, prime_packings,
    unpack_pair, InitialCounts, PackingStep,
};
pub use rational::Rational;
pub use replay::{
    certify_scenario, check_claims, replay_ledger, verify_certificate, Certificate, ClaimFile, ClaimOutcome,
    ClaimsReport, Ledger, Outcome, Report, Scenario, Setting,
};
pub use surd::{ceil_add_sqrt, cmp_exceeds_sqrt, floor_add_sqrt, QuadraticSurd};
