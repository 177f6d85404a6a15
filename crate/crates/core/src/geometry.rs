//! Convex set descriptions, metric projection, polar cones, and the
//! Moreau decomposition x = P_A(x) + P_{A*}(x).

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{real, tol, Scalar};
use crate::vector::Vector;

/// Projectable convex set. Subspace bases are orthonormal, half-space
/// normals and halfspace-cone normals are unit vectors.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet<T> {
    LinearSubspace { basis: Vec<Vector<T>> },
    AffineSubspace { basis: Vec<Vector<T>>, offset: Vector<T> },
    HalfSpace { normal: Vector<T>, offset: T },
    Ball { center: Vector<T>, radius: T },
    GeneratedCone { generators: Vec<Vector<T>> },
    HalfspaceCone { normals: Vec<Vector<T>> },
}

impl<T: Scalar> ConvexSet<T> {
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::LinearSubspace { basis } => basis.first().map_or(0, |v| v.dim()),
            ConvexSet::AffineSubspace { offset, .. } => offset.dim(),
            ConvexSet::HalfSpace { normal, .. } => normal.dim(),
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::GeneratedCone { generators } => generators.first().map_or(0, |v| v.dim()),
            ConvexSet::HalfspaceCone { normals } => normals.first().map_or(0, |v| v.dim()),
        }
    }

    pub fn is_cone(&self) -> bool {
        matches!(
            self,
            ConvexSet::LinearSubspace { .. }
                | ConvexSet::GeneratedCone { .. }
                | ConvexSet::HalfspaceCone { .. }
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConvexSet::LinearSubspace { .. } => "linear_subspace",
            ConvexSet::AffineSubspace { .. } => "affine_subspace",
            ConvexSet::HalfSpace { .. } => "half_space",
            ConvexSet::Ball { .. } => "ball",
            ConvexSet::GeneratedCone { .. } => "generated_cone",
            ConvexSet::HalfspaceCone { .. } => "halfspace_cone",
        }
    }

    /// Construction invariants: orthonormal bases, unit normals, nonzero
    /// generators, finite entries.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        let unit: T = real(tol::UNIT);
        let check_unit = |v: &Vector<T>, what: &str| -> Result<()> {
            if (v.norm() - T::one()).abs() > unit {
                return Err(Error::InstanceInvalid(format!("{what} is not unit norm")));
            }
            Ok(())
        };
        let check_orthonormal = |basis: &[Vector<T>]| -> Result<()> {
            for (i, a) in basis.iter().enumerate() {
                check_unit(a, "basis vector")?;
                for b in basis.iter().skip(i + 1) {
                    if a.dot(b).abs() > unit {
                        return Err(Error::InstanceInvalid(
                            "basis vectors are not orthogonal".into(),
                        ));
                    }
                }
            }
            Ok(())
        };
        match self {
            ConvexSet::LinearSubspace { basis } => {
                if basis.is_empty() {
                    return Err(Error::InstanceInvalid("empty subspace basis".into()));
                }
                check_orthonormal(basis)?;
            }
            ConvexSet::AffineSubspace { basis, offset } => {
                check_orthonormal(basis)?;
                if !offset.is_all_finite() {
                    return Err(Error::InstanceInvalid("non-finite offset".into()));
                }
            }
            ConvexSet::HalfSpace { normal, offset } => {
                check_unit(normal, "half-space normal")?;
                if !offset.is_finite() {
                    return Err(Error::InstanceInvalid("non-finite offset".into()));
                }
            }
            ConvexSet::Ball { center, radius } => {
                if *radius < T::zero() || !radius.is_finite() {
                    return Err(Error::InstanceInvalid("negative ball radius".into()));
                }
                if !center.is_all_finite() {
                    return Err(Error::InstanceInvalid("non-finite center".into()));
                }
            }
            ConvexSet::GeneratedCone { generators } => {
                if generators.is_empty() {
                    return Err(Error::InstanceInvalid("cone without generators".into()));
                }
                for g in generators {
                    if !g.is_all_finite() || g.norm() == T::zero() {
                        return Err(Error::InstanceInvalid("zero or non-finite generator".into()));
                    }
                }
            }
            ConvexSet::HalfspaceCone { normals } => {
                if normals.is_empty() {
                    return Err(Error::InstanceInvalid("halfspace cone without normals".into()));
                }
                for n in normals {
                    check_unit(n, "halfspace cone normal")?;
                }
            }
        }
        Ok(())
    }
}

/// Projection onto the nonnegative span of `generators` by the
/// Lawson-Hanson active-set method. Returns the projection and the
/// coefficients on the (internally normalized) generators.
fn nnls_cone_project<T: Scalar>(
    generators: &[Vector<T>],
    x: &Vector<T>,
) -> Result<(Vector<T>, Vec<T>)> {
    let m = generators.len();
    let d = x.dim();
    let cols: Vec<Vector<T>> = generators
        .iter()
        .map(|g| {
            g.normalized()
                .ok_or_else(|| Error::InstanceInvalid("zero cone generator".into()))
        })
        .collect::<Result<_>>()?;
    let dual_tol: T = real::<T>(tol::NNLS) * x.norm().max(T::one());
    let cap = 100 * m;
    let mut iters = 0usize;

    let mut passive = vec![false; m];
    let mut coef = vec![T::zero(); m];
    let mut p = Vector::zeros(d);

    loop {
        let r = x.sub(&p);
        let mut best = dual_tol;
        let mut entering: Option<usize> = None;
        for i in 0..m {
            if !passive[i] {
                let w = cols[i].dot(&r);
                if w > best {
                    best = w;
                    entering = Some(i);
                }
            }
        }
        let Some(t) = entering else {
            return Ok((p, coef));
        };
        passive[t] = true;

        loop {
            iters += 1;
            if iters > cap {
                return Err(Error::NumericalFailure(format!(
                    "cone projection did not converge within {cap} active-set iterations"
                )));
            }
            let active_idx: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let active_cols: Vec<&Vector<T>> = active_idx.iter().map(|&i| &cols[i]).collect();
            let z_active = linalg::ls_solve(&active_cols, x, tol::NNLS);
            let mut z = vec![T::zero(); m];
            for (k, &i) in active_idx.iter().enumerate() {
                z[i] = z_active[k];
            }
            let feasible = active_idx.iter().all(|&i| z[i] > T::zero());
            if feasible {
                coef = z;
                break;
            }
            // step toward z until the first coefficient hits zero
            let mut alpha = T::one();
            for &i in &active_idx {
                if z[i] <= T::zero() {
                    let denom = coef[i] - z[i];
                    if denom > T::zero() {
                        alpha = alpha.min(coef[i] / denom);
                    } else {
                        alpha = T::zero();
                    }
                }
            }
            for &i in &active_idx {
                coef[i] = coef[i] + alpha * (z[i] - coef[i]);
            }
            for &i in &active_idx {
                if z[i] <= T::zero() && coef[i] <= dual_tol {
                    passive[i] = false;
                    coef[i] = T::zero();
                }
            }
        }
        p = Vector::zeros(d);
        for i in 0..m {
            if coef[i] != T::zero() {
                p.axpy(coef[i], &cols[i]);
            }
        }
    }
}

/// Metric projection onto `set`.
pub fn project<T: Scalar>(set: &ConvexSet<T>, x: &Vector<T>) -> Result<Vector<T>> {
    if x.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: x.dim(),
        });
    }
    if !x.is_all_finite() {
        return Err(Error::NumericalFailure("non-finite input vector".into()));
    }
    match set {
        ConvexSet::LinearSubspace { basis } => {
            let mut p = Vector::zeros(x.dim());
            for b in basis {
                p.axpy(b.dot(x), b);
            }
            Ok(p)
        }
        ConvexSet::AffineSubspace { basis, offset } => {
            let shifted = x.sub(offset);
            let mut p = offset.clone();
            for b in basis {
                p.axpy(b.dot(&shifted), b);
            }
            Ok(p)
        }
        ConvexSet::HalfSpace { normal, offset } => {
            let excess = normal.dot(x) - *offset;
            if excess <= T::zero() {
                Ok(x.clone())
            } else {
                let mut p = x.clone();
                p.axpy(-excess, normal);
                Ok(p)
            }
        }
        ConvexSet::Ball { center, radius } => {
            let diff = x.sub(center);
            let n = diff.norm();
            if n <= *radius {
                Ok(x.clone())
            } else {
                let mut p = center.clone();
                p.axpy(*radius / n, &diff);
                Ok(p)
            }
        }
        ConvexSet::GeneratedCone { generators } => {
            let (p, _) = nnls_cone_project(generators, x)?;
            Ok(p)
        }
        // Moreau: P_{A*}(x) = x - P_A(x) with A the cone generated by the normals.
        ConvexSet::HalfspaceCone { normals } => {
            let (p, _) = nnls_cone_project(normals, x)?;
            Ok(x.sub(&p))
        }
    }
}

/// Polar cone A* = { y : <y, z> <= 0 for all z in A }.
pub fn polar<T: Scalar>(cone: &ConvexSet<T>) -> Result<ConvexSet<T>> {
    match cone {
        ConvexSet::GeneratedCone { generators } => {
            let normals = generators
                .iter()
                .map(|g| {
                    g.normalized()
                        .ok_or_else(|| Error::InstanceInvalid("zero cone generator".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvexSet::HalfspaceCone { normals })
        }
        ConvexSet::HalfspaceCone { normals } => Ok(ConvexSet::GeneratedCone {
            generators: normals.clone(),
        }),
        ConvexSet::LinearSubspace { basis } => {
            let dim = cone.dim();
            Ok(ConvexSet::LinearSubspace {
                basis: linalg::complement_basis(basis, dim),
            })
        }
        other => Err(Error::UnsupportedSet(format!(
            "polar cone of a {} is not defined",
            other.kind_name()
        ))),
    }
}

/// Distance |x - P_S(x)|.
pub fn distance<T: Scalar>(set: &ConvexSet<T>, x: &Vector<T>) -> Result<T> {
    Ok(project(set, x)?.dist(x))
}

/// Membership up to the relative tolerance 1e-9 * max(1, |x|).
pub fn is_member<T: Scalar>(set: &ConvexSet<T>, x: &Vector<T>) -> Result<bool> {
    let d = distance(set, x)?;
    Ok(d <= real::<T>(tol::MEMBERSHIP_REL) * x.norm().max(T::one()))
}

pub fn contains_origin<T: Scalar>(set: &ConvexSet<T>) -> Result<bool> {
    is_member(set, &Vector::zeros(set.dim()))
}

/// Residuals of the Moreau identity for one cone and point.
#[derive(Clone, Debug)]
pub struct MoreauReport<T> {
    pub decomposition_residual: T,
    pub orthogonality_residual: T,
}

/// |P_A(x) + P_{A*}(x) - x| and |<P_A(x), P_{A*}(x)>|.
pub fn moreau_check<T: Scalar>(cone: &ConvexSet<T>, x: &Vector<T>) -> Result<MoreauReport<T>> {
    if !cone.is_cone() {
        return Err(Error::UnsupportedSet(format!(
            "moreau check needs a cone, got a {}",
            cone.kind_name()
        )));
    }
    let pa = project(cone, x)?;
    let pa_star = project(&polar(cone)?, x)?;
    let recomposed = pa.add(&pa_star);
    Ok(MoreauReport {
        decomposition_residual: recomposed.dist(x),
        orthogonality_residual: pa.dot(&pa_star).abs(),
    })
}
