//! Dictionaries, the pure greedy selector and step, the no-half-space
//! condition, and the polar cones attached to dictionaries.

use crate::error::{Error, Result};
use crate::geometry::{self, ConvexSet};
use crate::scalar::{real, tol, Scalar};
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq)]
pub enum Dictionary<T> {
    /// Finite list of unit atoms.
    Finite { atoms: Vec<Vector<T>> },
    /// A cone intersected with the unit sphere; the greedy selector is the
    /// normalized metric projection onto the cone.
    ConeSection { cone: ConvexSet<T> },
}

impl<T: Scalar> Dictionary<T> {
    pub fn dim(&self) -> usize {
        match self {
            Dictionary::Finite { atoms } => atoms.first().map_or(0, |a| a.dim()),
            Dictionary::ConeSection { cone } => cone.dim(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Dictionary::Finite { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InstanceInvalid("empty dictionary".into()));
                }
                let unit: T = real(tol::UNIT);
                for a in atoms {
                    if a.dim() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: a.dim(),
                        });
                    }
                    if (a.norm() - T::one()).abs() > unit {
                        return Err(Error::InstanceInvalid("dictionary atom is not unit norm".into()));
                    }
                }
                Ok(())
            }
            Dictionary::ConeSection { cone } => {
                if !cone.is_cone() {
                    return Err(Error::UnsupportedDictionary(format!(
                        "cone section over a {}",
                        cone.kind_name()
                    )));
                }
                cone.validate(dim)
            }
        }
    }

    /// Atoms (finite) or cone generators (sections), used by the
    /// half-space check. Sections given by half-space normals only carry no
    /// generator representation.
    pub fn atoms_or_generators(&self) -> Result<Vec<Vector<T>>> {
        match self {
            Dictionary::Finite { atoms } => Ok(atoms.clone()),
            Dictionary::ConeSection { cone } => match cone {
                ConvexSet::GeneratedCone { generators } => Ok(generators.clone()),
                ConvexSet::LinearSubspace { basis } => {
                    let mut out = Vec::with_capacity(2 * basis.len());
                    for b in basis {
                        out.push(b.clone());
                        out.push(b.scaled(-T::one()));
                    }
                    Ok(out)
                }
                other => Err(Error::UnsupportedDictionary(format!(
                    "cone section over a {} has no generator representation; convert via polar first",
                    other.kind_name()
                ))),
            },
        }
    }
}

/// Result of the greedy selector: the best-correlated atom and its
/// coefficient <x, g>. The zero choice (atom 0, coefficient 0) encodes a
/// nonpositive supremum.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyChoice<T> {
    pub atom: Vector<T>,
    pub coefficient: T,
}

impl<T: Scalar> GreedyChoice<T> {
    pub fn zero(dim: usize) -> Self {
        GreedyChoice {
            atom: Vector::zeros(dim),
            coefficient: T::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient == T::zero()
    }
}

/// Greedy selector: argmax of <x, g> over the dictionary, the zero choice
/// when the supremum is not meaningfully positive. Finite ties break
/// toward the lowest list index.
pub fn select<T: Scalar>(dict: &Dictionary<T>, x: &Vector<T>) -> Result<GreedyChoice<T>> {
    let threshold = real::<T>(tol::ZERO_CHOICE_REL) * x.norm().max(T::one());
    match dict {
        Dictionary::Finite { atoms } => {
            let mut best = threshold;
            let mut choice = None;
            for a in atoms {
                let c = a.dot(x);
                if c > best {
                    best = c;
                    choice = Some(a);
                }
            }
            Ok(match choice {
                Some(a) => GreedyChoice {
                    atom: a.clone(),
                    coefficient: best,
                },
                None => GreedyChoice::zero(x.dim()),
            })
        }
        Dictionary::ConeSection { cone } => {
            let p = geometry::project(cone, x)?;
            let n = p.norm();
            if n > threshold {
                Ok(GreedyChoice {
                    atom: p.scaled(T::one() / n),
                    coefficient: n,
                })
            } else {
                Ok(GreedyChoice::zero(x.dim()))
            }
        }
    }
}

/// One pure greedy step: x - <x, g> g for the selected atom g.
pub fn greedy_step<T: Scalar>(dict: &Dictionary<T>, x: &Vector<T>) -> Result<Vector<T>> {
    let choice = select(dict, x)?;
    let mut out = x.clone();
    out.axpy(-choice.coefficient, &choice.atom);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct HalfspaceFreeReport<T> {
    pub free: bool,
    /// Unit vector with <v, g> <= 0 for every atom/generator, when not free.
    pub witness: Option<Vector<T>>,
}

/// True iff the union of the dictionaries is contained in no half-space,
/// i.e. no nonzero v has <v, g> <= 0 for all atoms. Equivalent to the
/// conic hull of the atoms being the whole space, which holds iff every
/// signed standard basis vector projects onto the hull with zero residual.
pub fn halfspace_free_check<T: Scalar>(
    dicts: &[Dictionary<T>],
) -> Result<HalfspaceFreeReport<T>> {
    let mut atoms: Vec<Vector<T>> = Vec::new();
    for d in dicts {
        atoms.extend(d.atoms_or_generators()?);
    }
    if atoms.is_empty() {
        return Err(Error::InstanceInvalid("no dictionary atoms".into()));
    }
    let dim = atoms[0].dim();
    let hull = ConvexSet::GeneratedCone { generators: atoms };
    let member_tol: T = real(tol::MEMBERSHIP_REL);
    for i in 0..dim {
        for sign in [T::one(), -T::one()] {
            let e = Vector::basis(dim, i).scaled(sign);
            let p = geometry::project(&hull, &e)?;
            let r = e.sub(&p);
            if r.norm() > member_tol {
                // the residual of a cone projection lies in the polar cone
                let witness = r.normalized().expect("nonzero residual");
                return Ok(HalfspaceFreeReport {
                    free: false,
                    witness: Some(witness),
                });
            }
        }
    }
    Ok(HalfspaceFreeReport {
        free: true,
        witness: None,
    })
}

/// The polar cone A_i = { y : <y, g> <= 0 for all g in D_i }.
pub fn polar_cone_of_dictionary<T: Scalar>(dict: &Dictionary<T>) -> Result<ConvexSet<T>> {
    match dict {
        Dictionary::Finite { atoms } => Ok(ConvexSet::HalfspaceCone {
            normals: atoms.clone(),
        }),
        Dictionary::ConeSection { cone } => geometry::polar(cone),
    }
}

/// The cone-pair to dictionary-pair bridge: greedy steps on the cone
/// sections of the polars reproduce metric projections onto the cones.
/// Triviality of the pair intersection is validated on sampled directions.
pub fn bridge_dictionaries<T: Scalar>(
    cone_a: &ConvexSet<T>,
    cone_b: &ConvexSet<T>,
    sample_count: usize,
    seed: u64,
) -> Result<(Dictionary<T>, Dictionary<T>)> {
    use rand::{Rng, SeedableRng};
    if !cone_a.is_cone() || !cone_b.is_cone() {
        return Err(Error::UnsupportedSet("bridge needs two cones".into()));
    }
    let dim = cone_a.dim();
    if cone_b.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: cone_b.dim(),
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let member_tol: T = real(1e-8);
    for _ in 0..sample_count {
        let raw: Vector<T> = Vector::new(
            (0..dim)
                .map(|_| real::<T>(rng.gen_range(-1.0..1.0)))
                .collect(),
        );
        // push the direction into each cone in turn and test the other
        for (first, second) in [(cone_a, cone_b), (cone_b, cone_a)] {
            let p = geometry::project(first, &raw)?;
            if let Some(u) = p.normalized() {
                if geometry::distance(second, &u)? <= member_tol {
                    return Err(Error::IntersectionNotTrivial);
                }
            }
        }
    }
    Ok((
        Dictionary::ConeSection {
            cone: geometry::polar(cone_a)?,
        },
        Dictionary::ConeSection {
            cone: geometry::polar(cone_b)?,
        },
    ))
}
