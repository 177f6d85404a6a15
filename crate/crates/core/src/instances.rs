//! Certified instance generators and the independent face-enumeration
//! oracle for cone projections. Every generator takes an explicit seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dictionaries::{self, Dictionary};
use crate::engine::Mode;
use crate::error::{Error, Result};
use crate::geometry::{self, ConvexSet};
use crate::linalg;
use crate::scalar::tol;
use crate::vector::Vector;
use crate::Real;

pub type RVector = Vector<Real>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    TrivialIntersectionByConstruction,
    SubspacesWithKnownIntersection,
    SymmetricDictionaries,
    SeparatedCones,
}

#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub id: String,
    pub dim: usize,
    pub mode: Mode,
    pub sets: Vec<ConvexSet<Real>>,
    pub dictionaries: Vec<Dictionary<Real>>,
    pub certificate: Certificate,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn k(&self) -> usize {
        match self.mode {
            Mode::Projection => self.sets.len(),
            Mode::Greedy => self.dictionaries.len(),
        }
    }
}

const RETRIES: usize = 100;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> RVector {
    loop {
        let v = RVector::new((0..dim).map(|_| gaussian(rng)).collect());
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

fn random_orthonormal(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<RVector> {
    loop {
        let raw: Vec<RVector> = (0..count).map(|_| random_unit(dim, rng)).collect();
        let basis = linalg::orthonormalize(&raw, 1e-8);
        if basis.len() == count {
            return basis;
        }
    }
}

/// K random subspaces with intersection {0}, certified by stacking their
/// orthogonal-complement bases and checking full rank.
pub fn gen_subspace_instance(dim: usize, k: usize, seed: u64) -> Result<InstanceSpec> {
    if dim < k || k < 2 {
        return Err(Error::PreconditionViolated(format!(
            "need d >= K >= 2, got d={dim}, K={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRIES {
        let sets: Vec<ConvexSet<Real>> = (0..k)
            .map(|_| {
                let sub_dim = rng.gen_range(1..dim);
                ConvexSet::LinearSubspace {
                    basis: random_orthonormal(dim, sub_dim, &mut rng),
                }
            })
            .collect();
        // certificate: stacked complements must span the whole space
        let mut stacked: Vec<RVector> = Vec::new();
        for s in &sets {
            if let ConvexSet::LinearSubspace { basis } = s {
                stacked.extend(linalg::complement_basis(basis, dim));
            }
        }
        if linalg::rank(&stacked, tol::RANK) == dim {
            return Ok(InstanceSpec {
                id: format!("subspaces-d{dim}-k{k}-s{seed}"),
                dim,
                mode: Mode::Projection,
                sets,
                dictionaries: vec![],
                certificate: Certificate::SubspacesWithKnownIntersection,
                seed,
            });
        }
    }
    Err(Error::RetryExhausted { attempts: RETRIES })
}

/// K finitely generated cones around well-separated center directions in a
/// random 2-plane. Generators stay within half-angle theta of the center,
/// centers are 2*pi/K apart, and theta < pi/K, so pairwise intersections
/// are {0} by construction. Revalidated on sampled directions.
pub fn gen_cone_instance(
    dim: usize,
    k: usize,
    seed: u64,
    separated: bool,
) -> Result<InstanceSpec> {
    if dim < 2 || k < 2 {
        return Err(Error::PreconditionViolated("need d >= 2 and K >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = 0.8 * std::f64::consts::PI / (k as f64) / 2.0;
    'attempt: for _ in 0..RETRIES {
        let plane = random_orthonormal(dim, 2, &mut rng);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let centers: Vec<RVector> = (0..k)
            .map(|j| {
                let phi = phase + std::f64::consts::TAU * (j as f64) / (k as f64);
                let mut c = plane[0].scaled(phi.cos());
                c.axpy(phi.sin(), &plane[1]);
                c
            })
            .collect();
        let m = (dim + 1).min(5).max(2);
        let sets: Vec<ConvexSet<Real>> = centers
            .iter()
            .map(|c| {
                let generators = (0..m)
                    .map(|_| {
                        // perturb the center within the half-angle cap
                        let p = random_unit(dim, &mut rng);
                        let mut perp = p.clone();
                        perp.axpy(-c.dot(&p), c);
                        let mut g = c.clone();
                        if let Some(u) = perp.normalized() {
                            let t = rng.gen_range(0.2..1.0) * theta;
                            g = c.scaled(t.cos());
                            g.axpy(t.sin(), &u);
                        }
                        g
                    })
                    .collect();
                ConvexSet::GeneratedCone { generators }
            })
            .collect();
        // revalidate pairwise triviality on sampled cone directions
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                for s in sample_cone_directions(&sets[i], 25, &mut rng)? {
                    if geometry::distance(&sets[j], &s)? < 1e-4 {
                        continue 'attempt;
                    }
                }
            }
        }
        if separated && k >= 4 {
            let est = crate::analysis::separation_value(
                &crate::analysis::SeparationInput::Cones(&sets),
                (1, 2, 3, 4),
                32,
                seed,
            )?;
            if let Some(v) = est.value {
                if v <= 0.05 {
                    continue 'attempt;
                }
            }
        }
        return Ok(InstanceSpec {
            id: format!(
                "{}-d{dim}-k{k}-s{seed}",
                if separated { "sepcones" } else { "cones" }
            ),
            dim,
            mode: Mode::Projection,
            sets,
            dictionaries: vec![],
            certificate: if separated {
                Certificate::SeparatedCones
            } else {
                Certificate::TrivialIntersectionByConstruction
            },
            seed,
        });
    }
    Err(Error::RetryExhausted { attempts: RETRIES })
}

fn sample_cone_directions(
    cone: &ConvexSet<Real>,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<RVector>> {
    let ConvexSet::GeneratedCone { generators } = cone else {
        return Err(Error::UnsupportedSet("expected a generated cone".into()));
    };
    let mut out = Vec::new();
    for g in generators {
        if let Some(u) = g.normalized() {
            out.push(u);
        }
    }
    let dim = cone.dim();
    while out.len() < count {
        let mut v = Vector::zeros(dim);
        for g in generators {
            v.axpy(rng.gen_range(0.0..1.0), g);
        }
        if let Some(u) = v.normalized() {
            out.push(u);
        }
    }
    Ok(out)
}

/// K finite dictionaries of random unit atoms whose union is not in a
/// half-space (with a sampled margin, for well-conditioned runs). With
/// `symmetric`, atoms come in +- pairs.
pub fn gen_dictionary_instance(
    dim: usize,
    k: usize,
    seed: u64,
    symmetric: bool,
) -> Result<InstanceSpec> {
    gen_dictionary_instance_sized(dim, k, seed, symmetric, (dim + 1).max(3))
}

pub fn gen_dictionary_instance_sized(
    dim: usize,
    k: usize,
    seed: u64,
    symmetric: bool,
    atoms_per_dict: usize,
) -> Result<InstanceSpec> {
    if dim < 2 || k < 2 || atoms_per_dict < 2 {
        return Err(Error::PreconditionViolated(
            "need d >= 2, K >= 2, >= 2 atoms per dictionary".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..RETRIES {
        let dicts: Vec<Dictionary<Real>> = (0..k)
            .map(|_| {
                let mut atoms = Vec::with_capacity(atoms_per_dict);
                if symmetric {
                    while atoms.len() + 2 <= atoms_per_dict {
                        let a = random_unit(dim, &mut rng);
                        atoms.push(a.scaled(-1.0));
                        atoms.push(a);
                    }
                    if atoms.len() < atoms_per_dict {
                        // odd count would break symmetry; pad with a +- pair member's negation partner instead
                        let a = random_unit(dim, &mut rng);
                        atoms.push(a.scaled(-1.0));
                        atoms.push(a);
                    }
                } else {
                    for _ in 0..atoms_per_dict {
                        atoms.push(random_unit(dim, &mut rng));
                    }
                }
                Dictionary::Finite { atoms }
            })
            .collect();
        let rep = dictionaries::halfspace_free_check(&dicts)?;
        if !rep.free {
            continue 'attempt;
        }
        // sampled margin of the union keeps greedy contraction healthy
        let est = crate::analysis::separation_value(
            &crate::analysis::SeparationInput::Dictionaries(&dicts),
            (1, 1.min(k).max(1), k.min(2), k),
            256,
            seed,
        );
        if let Ok(e) = est {
            if e.value.unwrap_or(0.0) < 0.1 && k <= 4 {
                continue 'attempt;
            }
        }
        return Ok(InstanceSpec {
            id: format!(
                "{}-d{dim}-k{k}-s{seed}",
                if symmetric { "symdicts" } else { "dicts" }
            ),
            dim,
            mode: Mode::Greedy,
            sets: vec![],
            dictionaries: dicts,
            certificate: if symmetric {
                Certificate::SymmetricDictionaries
            } else {
                Certificate::TrivialIntersectionByConstruction
            },
            seed,
        });
    }
    Err(Error::RetryExhausted { attempts: RETRIES })
}

const ORACLE_MAX_GENERATORS: usize = 12;
const ORACLE_MAX_DIM: usize = 8;

/// Independent oracle for projection onto a finitely generated cone:
/// enumerate every generator subset, solve the unconstrained least-squares
/// projection onto its span, and keep candidates with nonnegative
/// coefficients that satisfy the variational inequality. Test-only
/// cross-check for the active-set path.
pub fn oracle_cone_projection(cone: &ConvexSet<Real>, x: &RVector) -> Result<RVector> {
    let ConvexSet::GeneratedCone { generators } = cone else {
        return Err(Error::UnsupportedSet("oracle needs a generated cone".into()));
    };
    let m = generators.len();
    let d = x.dim();
    if m > ORACLE_MAX_GENERATORS || d > ORACLE_MAX_DIM {
        return Err(Error::BudgetExceeded(format!(
            "oracle limited to m <= {ORACLE_MAX_GENERATORS}, d <= {ORACLE_MAX_DIM}"
        )));
    }
    let cols: Vec<RVector> = generators
        .iter()
        .map(|g| {
            g.normalized()
                .ok_or_else(|| Error::InstanceInvalid("zero generator".into()))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, RVector)> = None;
    let vi_tol = 1e-10 * x.norm().max(1.0);
    for mask in 0..(1u32 << m) {
        let subset: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let candidate = if subset.is_empty() {
            Vector::zeros(d)
        } else {
            let sub_cols: Vec<&RVector> = subset.iter().map(|&i| &cols[i]).collect();
            let coef = solve_normal_equations(&sub_cols, x);
            if coef.iter().any(|&c| c < -1e-12) {
                continue;
            }
            let mut p = Vector::zeros(d);
            for (&i, &c) in subset.iter().zip(coef.iter()) {
                p.axpy(c, &cols[i]);
            }
            p
        };
        let r = x.sub(&candidate);
        if cols.iter().any(|g| r.dot(g) > vi_tol) {
            continue;
        }
        let dist = r.norm();
        if best.as_ref().map_or(true, |(b, _)| dist < *b) {
            best = Some((dist, candidate));
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::NumericalFailure("oracle found no feasible candidate".into()))
}

/// Normal-equation least squares with full-pivot Gaussian elimination; a
/// deliberately different route than the MGS solver behind project().
fn solve_normal_equations(cols: &[&RVector], b: &RVector) -> Vec<f64> {
    let n = cols.len();
    let mut a = vec![vec![0.0f64; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = cols[i].dot(cols[j]);
        }
        a[i][n] = cols[i].dot(b);
    }
    let mut col_of = (0..n).collect::<Vec<_>>();
    let mut x = vec![0.0f64; n];
    let mut used_rows = vec![false; n];
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for _ in 0..n {
        let mut best = 1e-12;
        let mut pick = None;
        for r in 0..n {
            if used_rows[r] {
                continue;
            }
            for c in 0..n {
                if pivots.iter().any(|&(_, pc)| pc == c) {
                    continue;
                }
                if a[r][c].abs() > best {
                    best = a[r][c].abs();
                    pick = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = pick else { break };
        used_rows[pr] = true;
        pivots.push((pr, pc));
        for r in 0..n {
            if r != pr && a[r][pc].abs() > 0.0 {
                let f = a[r][pc] / a[pr][pc];
                for c in 0..=n {
                    a[r][c] -= f * a[pr][c];
                }
            }
        }
    }
    for &(pr, pc) in &pivots {
        let mut rhs = a[pr][n];
        for c in 0..n {
            if c != pc {
                rhs -= a[pr][c] * x[c];
            }
        }
        x[pc] = rhs / a[pr][pc];
    }
    let _ = &mut col_of;
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteClass {
    Subspaces,
    Cones,
    SeparatedCones,
    SymmetricDictionaries,
    AsymmetricDictionaries,
}

impl SuiteClass {
    pub const ALL: [SuiteClass; 5] = [
        SuiteClass::Subspaces,
        SuiteClass::Cones,
        SuiteClass::SeparatedCones,
        SuiteClass::SymmetricDictionaries,
        SuiteClass::AsymmetricDictionaries,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SuiteClass::Subspaces => "subspaces",
            SuiteClass::Cones => "cones",
            SuiteClass::SeparatedCones => "separated_cones",
            SuiteClass::SymmetricDictionaries => "symmetric_dictionaries",
            SuiteClass::AsymmetricDictionaries => "asymmetric_dictionaries",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == name)
    }

    pub fn mode(&self) -> Mode {
        match self {
            SuiteClass::Subspaces | SuiteClass::Cones | SuiteClass::SeparatedCones => {
                Mode::Projection
            }
            _ => Mode::Greedy,
        }
    }
}

/// One instance of the standard suite: fixed per-class dimensions, seeds
/// 1..=50, K as requested.
pub fn standard_suite_instance(class: SuiteClass, k: usize, seed: u64) -> Result<InstanceSpec> {
    match class {
        SuiteClass::Subspaces => gen_subspace_instance(k.max(4), k, seed),
        SuiteClass::Cones => gen_cone_instance(4, k, seed, false),
        SuiteClass::SeparatedCones => gen_cone_instance(4, k.max(4), seed, true),
        SuiteClass::SymmetricDictionaries => gen_dictionary_instance(4, k, seed, true),
        SuiteClass::AsymmetricDictionaries => gen_dictionary_instance(4, k, seed, false),
    }
}

pub const STANDARD_SUITE_SEEDS: std::ops::RangeInclusive<u64> = 1..=50;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subspace_instance_certificate() {
        let inst = gen_subspace_instance(4, 3, 11).unwrap();
        assert_eq!(inst.sets.len(), 3);
        // independent recheck of the certificate
        let mut stacked: Vec<RVector> = Vec::new();
        for s in &inst.sets {
            if let ConvexSet::LinearSubspace { basis } = s {
                stacked.extend(linalg::complement_basis(basis, 4));
            }
        }
        assert_eq!(linalg::rank(&stacked, 1e-10), 4);
    }

    #[test]
    fn two_lines_in_plane() {
        let inst = gen_subspace_instance(2, 2, 5).unwrap();
        assert_eq!(inst.dim, 2);
        assert_eq!(inst.sets.len(), 2);
    }

    #[test]
    fn three_lines_in_plane_need_d3() {
        // d >= K is required for the subspace generator
        assert!(gen_subspace_instance(2, 3, 5).is_err());
    }

    #[test]
    fn cone_instance_pairwise_trivial() {
        let inst = gen_cone_instance(3, 3, 21, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(999);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                for u in sample_cone_directions(&inst.sets[i], 20, &mut rng).unwrap() {
                    assert!(
                        geometry::distance(&inst.sets[j], &u).unwrap() > 1e-5,
                        "cones {i} and {j} share a direction"
                    );
                }
            }
        }
    }

    #[test]
    fn separated_cone_instance() {
        let inst = gen_cone_instance(4, 4, 33, true).unwrap();
        assert_eq!(inst.certificate, Certificate::SeparatedCones);
        assert_eq!(inst.sets.len(), 4);
    }

    #[test]
    fn symmetric_dictionary_instance() {
        let inst = gen_dictionary_instance(3, 3, 17, true).unwrap();
        for d in &inst.dictionaries {
            let Dictionary::Finite { atoms } = d else {
                panic!()
            };
            // atoms come in +- pairs
            for a in atoms {
                assert!(atoms
                    .iter()
                    .any(|b| a.add(b).norm() < 1e-12));
            }
        }
        assert!(dictionaries::halfspace_free_check(&inst.dictionaries)
            .unwrap()
            .free);
    }

    #[test]
    fn asymmetric_dictionary_instance_passes_check() {
        let inst = gen_dictionary_instance(5, 4, 29, false).unwrap();
        assert!(dictionaries::halfspace_free_check(&inst.dictionaries)
            .unwrap()
            .free);
    }

    #[test]
    fn oracle_wedge() {
        let cone = ConvexSet::GeneratedCone {
            generators: vec![
                RVector::new(vec![1.0, 0.0]),
                RVector::new(vec![1.0, 1.0]),
            ],
        };
        let p = oracle_cone_projection(&cone, &RVector::new(vec![0.0, 1.0])).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-10 && (p[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn oracle_interior_point_fixed() {
        let cone = ConvexSet::GeneratedCone {
            generators: vec![
                RVector::new(vec![1.0, 0.0]),
                RVector::new(vec![0.0, 1.0]),
            ],
        };
        let x = RVector::new(vec![0.3, 0.9]);
        let p = oracle_cone_projection(&cone, &x).unwrap();
        assert!(p.dist(&x) < 1e-10);
    }

    #[test]
    fn oracle_polar_point_zero() {
        let cone = ConvexSet::GeneratedCone {
            generators: vec![
                RVector::new(vec![1.0, 0.0]),
                RVector::new(vec![1.0, 1.0]),
            ],
        };
        let p = oracle_cone_projection(&cone, &RVector::new(vec![-1.0, 0.5])).unwrap();
        assert!(p.norm() < 1e-10);
    }

    #[test]
    fn oracle_budget() {
        let cone = ConvexSet::GeneratedCone {
            generators: (0..13)
                .map(|i| RVector::new(vec![1.0, i as f64]))
                .collect(),
        };
        assert!(matches!(
            oracle_cone_projection(&cone, &RVector::new(vec![1.0, 1.0])),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn oracle_agrees_with_active_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for trial in 0..500 {
            let d = rng.gen_range(2..=4);
            let m = rng.gen_range(1..=6);
            let cone = ConvexSet::GeneratedCone {
                generators: (0..m).map(|_| random_unit(d, &mut rng)).collect(),
            };
            let x = RVector::new((0..d).map(|_| 3.0 * gaussian(&mut rng)).collect());
            let fast = geometry::project(&cone, &x).unwrap();
            let slow = oracle_cone_projection(&cone, &x).unwrap();
            assert!(
                fast.dist(&slow) <= 1e-8,
                "trial {trial}: active-set and oracle disagree by {}",
                fast.dist(&slow)
            );
        }
    }
}
