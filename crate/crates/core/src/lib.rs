//! Privacy mechanisms under lift-based leakage budgets.
//!
//! A joint distribution `P_SX` of a sensitive variable `S` and useful data
//! `X` is released through a mechanism `P_{Y|X}`. The crate computes
//! leakage measures derived from the lift `P_{S|Y}(s|y) / P_S(s)`,
//! enumerates vertices of max-lift polytopes, solves the mixture linear
//! program that assembles mechanisms from candidate posteriors, and runs
//! seeded utility sweeps.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
mod linalg;
pub mod measures;
pub mod mechanisms;
pub mod mixture_lp;
pub mod polytope;

pub use error::{Error, Result};
pub use measures::{
    entropy, mechanism_leakage, mechanism_utility, posterior_stats, JointDistribution, Leakage,
    PosteriorStats, ProbVector, Utility,
};
pub use mechanisms::{
    algorithm1, epsilon_grid, optimal_maxlift_mechanism, MeasureKind, SweepConfig, SweepPoint,
};
pub use mixture_lp::{extract_mechanism, solve_mixture, Mechanism, MixtureLp};
pub use polytope::{build_polytope, enumerate_vertices, MaxLiftPolytope, VertexSet};
