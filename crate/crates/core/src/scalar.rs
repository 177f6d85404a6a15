use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};

/// Scalar type the whole library is generic over. `f64` is the default
/// (see the aliases at the crate root); `f32` works with looser tolerances.
pub trait Scalar:
    Float
    + FromPrimitive
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + fmt::Debug
    + fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + Sum
        + AddAssign
        + SubAssign
        + MulAssign
        + fmt::Debug
        + fmt::Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for lifting an `f64` constant into the scalar type.
#[inline]
pub fn real<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("scalar conversion from f64")
}

/// Tolerances pinned by the library contracts. All values are in `f64`;
/// generic code lifts them with [`real`].
pub mod tol {
    /// Orthonormality of subspace bases and unit-norm checks on construction.
    pub const UNIT: f64 = 1e-12;
    /// Dual-feasibility tolerance of the non-negative least squares solver.
    pub const NNLS: f64 = 1e-12;
    /// Residual bound for projection identities (idempotence, variational
    /// inequality, cone orthogonality, Moreau decomposition).
    pub const PROJECTION: f64 = 1e-10;
    /// Relative membership tolerance: x is a member iff
    /// distance(S, x) <= MEMBERSHIP_REL * max(1, |x|).
    pub const MEMBERSHIP_REL: f64 = 1e-9;
    /// Relative threshold below which a greedy supremum counts as zero.
    pub const ZERO_CHOICE_REL: f64 = 1e-14;
    /// Per-step residual bound for the greedy Pythagoras identity and the
    /// projection decay inequality.
    pub const STEP_IDENTITY: f64 = 1e-10;
    /// Relative slack on the nonincreasing-norms check.
    pub const NORM_MONOTONE_REL: f64 = 1e-12;
    /// Slack for telescoped segment inequalities.
    pub const SEGMENT: f64 = 1e-8;
    /// Agreement between a cone and its double polar, and between the
    /// active-set projection and the face-enumeration oracle.
    pub const BIPOLAR: f64 = 1e-8;
    /// Rank threshold for certificate checks on stacked bases.
    pub const RANK: f64 = 1e-10;
}
