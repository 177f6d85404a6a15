//! Alternating metric projections onto convex sets and random greedy
//! steps over dictionaries, with the polar-cone bridge between the two,
//! plus an analysis layer that machine-checks the structural inequalities
//! (Fejer monotonicity, step Pythagoras, cluster-pair functionals) on
//! computed trajectories.
//!
//! The numeric core is generic over the scalar via [`scalar::Scalar`]
//! (any `num_traits::Float` with the usual bounds); the instance, schema,
//! and CLI layers fix [`Real`] = `f64`.

pub mod analysis;
pub mod dictionaries;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod instances;
pub mod linalg;
pub mod scalar;
pub mod schedules;
pub mod schema;
pub mod vector;

/// Scalar used by everything above the generic core.
pub type Real = f64;

/// `f64` aliases for the generic core types.
pub type RVector = vector::Vector<Real>;
pub type RConvexSet = geometry::ConvexSet<Real>;
pub type RDictionary = dictionaries::Dictionary<Real>;
pub type RTrace = engine::Trace<Real>;

pub use error::{Error, Result};
