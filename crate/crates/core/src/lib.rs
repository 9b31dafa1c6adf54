//! Uniform approximation error of single-hidden-layer networks whose weights
//! are restricted to two fixed direction vectors.
//!
//! On a finite point set the error equals the largest value of an alternating
//! functional over closed paths: sequences of points that hop between shared
//! projection levels of the two directions. This crate computes that
//! supremum exactly through a maximum-mean-cycle reduction, independently as
//! a Chebyshev linear program over sums of univariate level tables,
//! in closed form by a corner rule for smooth functions on projection boxes,
//! and constructively by fitting shifted activation functions to the optimal
//! tables. The four routes certify each other; the `verify` module bundles
//! the randomized cross-checks.

// Index loops over DP tables and tableau rows are the clearer style here.
#![allow(clippy::needless_range_loop)]

pub mod closed_form;
pub mod expr;
pub mod extremal;
pub mod geometry;
pub mod network;
pub mod paths;
pub mod ridge;
pub mod simplex;
pub mod verify;

pub use expr::Expr;
pub use extremal::{sup_closed_path, SupResult};
pub use geometry::{BoxDomainSpec, DirectionPair, SampledDomain};
pub use network::{Activation, ShallowNetwork};
pub use paths::{path_functional, ClosedPath, EdgeType, Path};
pub use ridge::{best_ridge_linf, BestApprox, RidgePair};
