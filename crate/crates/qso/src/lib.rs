//! Quadratic evolution operators of bisexual populations.
//!
//! A population with `n` female and `nu` male types evolves on the
//! product of two probability simplices under a quadratic operator
//! whose coefficients are inheritance probabilities. This crate
//! provides:
//!
//! - validated models, states and a plain-text model-file format
//!   ([`model`]);
//! - the evolution operator, the bilinear algebra product with the
//!   inheritance coefficients as structure constants, and the exact
//!   Jacobian ([`operator`]);
//! - contraction analysis: the coefficient-scatter bound `zeta` on the
//!   l1 Lipschitz constant, multiplicative dispersion ratios, and the
//!   derived sufficient criteria ([`contraction`]);
//! - trajectory classification, fixed-point search, and sampled
//!   Lipschitz estimates ([`dynamics`]);
//! - a command-line interface with bundled example models ([`cli`]).

pub mod cli;
pub mod contraction;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod operator;

pub use contraction::{
    analyze, mu_max_bound, mu_product_criterion, mu_ratios, mu_sum_bound, tangent_block_norm, zeta,
    ContractionReport, TriState, ZetaBound, ZetaTerm,
};
pub use dynamics::{
    classify, empirical_lipschitz, find_fixed_points, jacobian_lipschitz, sample_state,
    scalar_iterate_closed_form, trajectory, Classification, LipschitzEstimate, Trajectory, Verdict,
    DEFAULT_MAX_PERIOD, DEFAULT_MAX_STEPS, DEFAULT_TOL,
};
pub use error::{QsoError, Result, Sex};
pub use model::{
    fixed_point_locus, parse_model, serialize_model, BisexualModel, InheritanceTensors, Locus,
    PopulationState, TangentVector, TAU_VALID,
};
pub use operator::{
    algebra_product, evolve, is_idempotent, jacobian, multiplication_matrix, AlgebraElement, Basis,
    JacobianMatrix,
};
