//! Cluster-point extraction and machine verification of the theorem-level
//! inequalities on computed trajectories. All pair reports are diagnostic:
//! eps-clusters only approximately satisfy exact-limit statements, so every
//! tolerance scales with the cluster radii.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dictionaries::Dictionary;
use crate::engine::Trace;
use crate::error::{Error, Result};
use crate::geometry::{self, ConvexSet};
use crate::linalg;
use crate::scalar::{real, Scalar};
use crate::vector::Vector;

#[derive(Clone, Debug)]
pub struct ClusterPoint<T> {
    /// Representative: an actual iterate (the last member), never a mean.
    pub w: Vector<T>,
    /// Iterate indices n of the members, strictly increasing.
    pub support: Vec<usize>,
    /// Max deviation of the members from the representative.
    pub radius: T,
}

/// Greedy agglomerative clustering of the stored tail iterates. A point
/// joins the first cluster whose founding member is within eps/2, which
/// bounds the final radius by eps. Clusters need >= 3 members.
pub fn cluster_points<T: Scalar>(trace: &Trace<T>, eps: T) -> Result<Vec<ClusterPoint<T>>> {
    if eps <= T::zero() {
        return Err(Error::PreconditionViolated("eps must be > 0".into()));
    }
    if trace.tail.len() < 3 {
        return Err(Error::InsufficientIterates {
            have: trace.tail.len(),
        });
    }
    let half = eps / real::<T>(2.0);
    let mut founders: Vec<Vector<T>> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (pos, (_, x)) in trace.tail.iter().enumerate() {
        match founders.iter().position(|f| f.dist(x) <= half) {
            Some(c) => members[c].push(pos),
            None => {
                founders.push(x.clone());
                members.push(vec![pos]);
            }
        }
    }
    let mut out = Vec::new();
    for mem in members {
        if mem.len() < 3 {
            continue;
        }
        let rep = trace.tail[*mem.last().unwrap()].1.clone();
        let radius = mem
            .iter()
            .map(|&p| trace.tail[p].1.dist(&rep))
            .fold(T::zero(), T::max);
        out.push(ClusterPoint {
            w: rep,
            support: mem.iter().map(|&p| trace.tail[p].0).collect(),
            radius,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JSet {
    /// 1-based indices j with distance(A_j, w) <= tol.
    pub indices: Vec<usize>,
    pub tol: f64,
}

/// Maximal index set J with w in every A_j, j in J, at tolerance `tol`.
/// In greedy mode pass the polar cones of the dictionaries as `sets`.
pub fn j_set<T: Scalar>(w: &Vector<T>, sets: &[ConvexSet<T>], tol: T) -> Result<JSet> {
    let mut indices = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        if geometry::distance(s, w)? <= tol {
            indices.push(i + 1);
        }
    }
    Ok(JSet {
        indices,
        tol: tol.to_f64().unwrap_or(f64::NAN),
    })
}

/// Members of a single set, for functional sampling: nonnegative generator
/// combinations for cones, basis combinations for subspaces, projected
/// random points otherwise.
pub fn sample_members<T: Scalar>(
    set: &ConvexSet<T>,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vector<T>>> {
    let dim = set.dim();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let v = match set {
            ConvexSet::LinearSubspace { basis } => {
                let mut v = Vector::zeros(dim);
                for b in basis {
                    v.axpy(real::<T>(rng.gen_range(-1.0..1.0)), b);
                }
                v
            }
            ConvexSet::GeneratedCone { generators } => {
                let mut v = Vector::zeros(dim);
                for g in generators {
                    v.axpy(real::<T>(rng.gen_range(0.0..1.0)), g);
                }
                v
            }
            _ => {
                let raw: Vector<T> = Vector::new(
                    (0..dim)
                        .map(|_| real::<T>(rng.gen_range(-2.0..2.0)))
                        .collect(),
                );
                geometry::project(set, &raw)?
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Members of the intersection of several sets. Uses an exact route when
/// one exists (subspaces via complements, halfspace cones by merging
/// normals) and falls back to cyclic projections from random starts.
pub fn sample_intersection_members<T: Scalar>(
    sets: &[&ConvexSet<T>],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vector<T>>> {
    match sets {
        [] => Err(Error::PreconditionViolated("empty set list".into())),
        [single] => sample_members(single, count, rng),
        _ => {
            if sets
                .iter()
                .all(|s| matches!(s, ConvexSet::LinearSubspace { .. }))
            {
                let dim = sets[0].dim();
                let mut complements: Vec<Vector<T>> = Vec::new();
                for s in sets {
                    if let ConvexSet::LinearSubspace { basis } = s {
                        complements.extend(linalg::complement_basis(basis, dim));
                    }
                }
                let inter = linalg::complement_basis(&linalg::orthonormalize(&complements, 1e-10), dim);
                if inter.is_empty() {
                    return Ok(vec![Vector::zeros(dim); count.min(1)]);
                }
                return sample_members(
                    &ConvexSet::LinearSubspace { basis: inter },
                    count,
                    rng,
                );
            }
            if sets
                .iter()
                .all(|s| matches!(s, ConvexSet::HalfspaceCone { .. }))
            {
                let mut normals: Vec<Vector<T>> = Vec::new();
                for s in sets {
                    if let ConvexSet::HalfspaceCone { normals: n } = s {
                        normals.extend(n.iter().cloned());
                    }
                }
                return sample_members(&ConvexSet::HalfspaceCone { normals }, count, rng);
            }
            // cyclic projections settle on a point of the intersection
            let dim = sets[0].dim();
            let mut out = Vec::new();
            let accept: T = real(1e-9);
            for _ in 0..count {
                let mut x: Vector<T> = Vector::new(
                    (0..dim)
                        .map(|_| real::<T>(rng.gen_range(-2.0..2.0)))
                        .collect(),
                );
                for _ in 0..2000 {
                    let mut moved = T::zero();
                    for s in sets {
                        let p = geometry::project(s, &x)?;
                        moved = moved + p.dist(&x);
                        x = p;
                    }
                    if moved <= real(1e-13) {
                        break;
                    }
                }
                let mut ok = true;
                for s in sets {
                    if geometry::distance(s, &x)? > accept {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    out.push(x);
                }
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairReport {
    pub checks: Vec<CheckResult>,
    pub j_w: JSet,
    pub j_w_prime: JSet,
    pub tol: f64,
}

impl PairReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn interleaved(support_w: &[usize], support_wp: &[usize]) -> bool {
    // needs n_1 < m_1 < n_2 < m_2 < ... on at least two alternations
    let mut pairs = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < support_w.len() && j < support_wp.len() {
        while j < support_wp.len() && support_wp[j] <= support_w[i] {
            j += 1;
        }
        if j == support_wp.len() {
            break;
        }
        pairs += 1;
        let m = support_wp[j];
        while i < support_w.len() && support_w[i] <= m {
            i += 1;
        }
    }
    pairs >= 2
}

fn pair_tolerance<T: Scalar>(w: &ClusterPoint<T>, wp: &ClusterPoint<T>) -> T {
    // exact synthetic clusters (radius 0) still need a numerical floor
    (real::<T>(10.0) * (w.radius + wp.radius)).max(real(1e-12))
}

fn check_pair<T: Scalar>(
    trace: &Trace<T>,
    w: &ClusterPoint<T>,
    wp: &ClusterPoint<T>,
    sets: &[ConvexSet<T>],
    sample_count: usize,
    seed: u64,
    two_sided: bool,
) -> Result<PairReport> {
    if !interleaved(&w.support, &wp.support) {
        return Err(Error::NotInterleaved);
    }
    let tol = pair_tolerance(w, wp);
    let j_tol = tol.max(real(1e-8));
    let jw = j_set(&w.w, sets, j_tol)?;
    let jwp = j_set(&wp.w, sets, j_tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let diff: Vec<usize> = jwp
        .indices
        .iter()
        .filter(|i| !jw.indices.contains(i))
        .copied()
        .collect();
    let inter: Vec<usize> = jwp
        .indices
        .iter()
        .filter(|i| jw.indices.contains(i))
        .copied()
        .collect();
    checks.push(CheckResult {
        name: "i_new_index".into(),
        passed: !diff.is_empty(),
        residual: diff.len() as f64,
    });
    checks.push(CheckResult {
        name: "ii_shared_pair".into(),
        passed: inter.len() >= 2,
        residual: inter.len() as f64,
    });
    checks.push(CheckResult {
        name: "iii_jset_size".into(),
        passed: jwp.indices.len() >= 3,
        residual: jwp.indices.len() as f64,
    });

    let functional_check = |name: &str,
                            over: &JSet,
                            rng: &mut ChaCha8Rng,
                            checks: &mut Vec<CheckResult>|
     -> Result<()> {
        let member_sets: Vec<&ConvexSet<T>> =
            over.indices.iter().map(|&i| &sets[i - 1]).collect();
        let dim = w.w.dim();
        let samples = if member_sets.is_empty() {
            vec![Vector::zeros(dim)]
        } else {
            let mut s = sample_intersection_members(&member_sets, sample_count, rng)?;
            if s.is_empty() {
                s.push(Vector::zeros(dim));
            }
            s
        };
        let delta = wp.w.sub(&w.w);
        let worst = samples
            .iter()
            .map(|a| delta.dot(a))
            .fold(T::infinity(), T::min);
        checks.push(CheckResult {
            name: name.into(),
            passed: worst >= -tol,
            residual: worst.to_f64().unwrap_or(f64::NAN),
        });
        Ok(())
    };
    functional_check("iv_functional", &jw, &mut rng, &mut checks)?;

    let growth =
        wp.w.norm_sq() - w.w.norm_sq() - wp.w.sub(&w.w).norm_sq();
    checks.push(CheckResult {
        name: "norm_growth".into(),
        passed: growth >= -tol,
        residual: growth.to_f64().unwrap_or(f64::NAN),
    });

    if two_sided {
        functional_check("ii_functional_w_prime", &jwp, &mut rng, &mut checks)?;
        // every index fired strictly between a w-support point and the next
        // w'-support point must lie in J(w) n J(w')
        let mut outside = 0usize;
        let mut checked = 0usize;
        for &n_k in &w.support {
            if let Some(&m_k) = wp.support.iter().find(|&&m| m > n_k) {
                for n in (n_k + 1)..=m_k {
                    if let Some(idx) = trace.index_at(n) {
                        checked += 1;
                        if !inter.contains(&idx) {
                            outside += 1;
                        }
                    }
                }
            }
        }
        checks.push(CheckResult {
            name: "segment_indices_in_intersection".into(),
            passed: checked > 0 && outside == 0,
            residual: outside as f64,
        });
    }

    Ok(PairReport {
        checks,
        j_w: jw,
        j_w_prime: jwp,
        tol: tol.to_f64().unwrap_or(f64::NAN),
    })
}

/// Theorem-level pair verification, one-sided functional inequality over
/// A_{J(w)} plus the norm-growth consequence.
pub fn verify_pair_theorem1<T: Scalar>(
    trace: &Trace<T>,
    w: &ClusterPoint<T>,
    wp: &ClusterPoint<T>,
    sets: &[ConvexSet<T>],
    sample_count: usize,
    seed: u64,
) -> Result<PairReport> {
    check_pair(trace, w, wp, sets, sample_count, seed, false)
}

/// Two-sided variant: functionals over both A_{J(w)} and A_{J(w')} plus
/// the segment-index containment.
pub fn verify_pair_theorem2<T: Scalar>(
    trace: &Trace<T>,
    w: &ClusterPoint<T>,
    wp: &ClusterPoint<T>,
    sets: &[ConvexSet<T>],
    sample_count: usize,
    seed: u64,
) -> Result<PairReport> {
    check_pair(trace, w, wp, sets, sample_count, seed, true)
}

#[derive(Clone, Debug)]
pub struct WipReport<T> {
    pub passed: bool,
    /// First sampled member a for which no -lambda*a stayed in the set.
    pub witness: Option<Vector<T>>,
}

/// Whether zero looks like a weak internal point: for sampled members a,
/// some lambda in {1, 1/2, ..., 2^-20} keeps -lambda*a in the set. The
/// set's defining vectors are always among the samples.
pub fn wip_check<T: Scalar>(
    set: &ConvexSet<T>,
    sample_count: usize,
    seed: u64,
) -> Result<WipReport<T>> {
    if !geometry::contains_origin(set)? {
        return Err(Error::PreconditionViolated(
            "wip check needs a set containing the origin".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<Vector<T>> = match set {
        ConvexSet::LinearSubspace { basis } => basis.clone(),
        ConvexSet::GeneratedCone { generators } => generators.clone(),
        ConvexSet::HalfspaceCone { normals } => {
            let mut s = Vec::new();
            for n in normals {
                s.push(geometry::project(set, &n.scaled(-T::one()))?);
            }
            s
        }
        _ => Vec::new(),
    };
    samples.extend(sample_members(set, sample_count, &mut rng)?);
    let floor = real::<T>(1e-10);
    for a in &samples {
        if a.norm() <= floor {
            continue;
        }
        let mut ok = false;
        let mut lambda = T::one();
        for _ in 0..=20 {
            if geometry::is_member(set, &a.scaled(-lambda))? {
                ok = true;
                break;
            }
            lambda = lambda / real(2.0);
        }
        if !ok {
            return Ok(WipReport {
                passed: false,
                witness: Some(a.clone()),
            });
        }
    }
    Ok(WipReport {
        passed: true,
        witness: None,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparationEstimate {
    /// Upper bound on the true infimum (dictionary mode) or the minimum
    /// sampled inter-triple distance (projection mode). `None` when no
    /// nonzero triple-intersection points exist to compare.
    pub value: Option<f64>,
    pub n_dirs: usize,
    pub refinement_depth: usize,
}

pub enum SeparationInput<'a, T> {
    Dictionaries(&'a [Dictionary<T>]),
    Cones(&'a [ConvexSet<T>]),
}

/// Sampled estimate of the four-index separation quantity:
/// dictionary mode inf over the unit sphere of the max inner product with
/// the union's atoms; projection mode the min distance between sampled
/// unit points of the quadruple's triple intersections.
pub fn separation_value<T: Scalar>(
    input: &SeparationInput<'_, T>,
    quad: (usize, usize, usize, usize),
    n_dirs: usize,
    seed: u64,
) -> Result<SeparationEstimate> {
    let depth = 30usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match input {
        SeparationInput::Dictionaries(dicts) => {
            let k = dicts.len();
            for &i in &[quad.0, quad.1, quad.2, quad.3] {
                if i < 1 || i > k {
                    return Err(Error::NotApplicable(format!("index {i} out of 1..={k}")));
                }
            }
            let mut atoms: Vec<Vector<T>> = Vec::new();
            for &i in &[quad.0, quad.1, quad.2, quad.3] {
                for a in dicts[i - 1].atoms_or_generators()? {
                    match a.normalized() {
                        Some(u) => atoms.push(u),
                        None => {
                            return Err(Error::UnsupportedDictionary("zero atom".into()));
                        }
                    }
                }
            }
            let dim = atoms[0].dim();
            let f = |s: &Vector<T>| -> T {
                atoms
                    .iter()
                    .map(|g| g.dot(s))
                    .fold(T::neg_infinity(), T::max)
            };
            let mut best_dir: Option<Vector<T>> = None;
            let mut best = T::infinity();
            let consider = |u: Vector<T>, best: &mut T, best_dir: &mut Option<Vector<T>>| {
                let v = f(&u);
                if v < *best {
                    *best = v;
                    *best_dir = Some(u);
                }
            };
            for i in 0..dim {
                consider(Vector::basis(dim, i), &mut best, &mut best_dir);
                consider(
                    Vector::basis(dim, i).scaled(-T::one()),
                    &mut best,
                    &mut best_dir,
                );
            }
            for _ in 0..n_dirs {
                let raw: Vector<T> = Vector::new(
                    (0..dim)
                        .map(|_| real::<T>(rng.gen_range(-1.0..1.0)))
                        .collect(),
                );
                if let Some(u) = raw.normalized() {
                    consider(u, &mut best, &mut best_dir);
                }
            }
            // local refinement around the argmin with shrinking steps
            let mut s = best_dir.expect("at least the basis directions were sampled");
            let mut h: T = real(0.5);
            for _ in 0..depth {
                for _ in 0..8 {
                    let mut cand = s.clone();
                    for c in 0..dim {
                        cand[c] = cand[c] + h * real::<T>(rng.gen_range(-1.0..1.0));
                    }
                    if let Some(u) = cand.normalized() {
                        if f(&u) < best {
                            best = f(&u);
                            s = u;
                        }
                    }
                }
                h = h / real(1.6);
            }
            Ok(SeparationEstimate {
                value: best.to_f64(),
                n_dirs,
                refinement_depth: depth,
            })
        }
        SeparationInput::Cones(cones) => {
            let k = cones.len();
            let idx = [quad.0, quad.1, quad.2, quad.3];
            let mut distinct = idx.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 4 || idx.iter().any(|&i| i < 1 || i > k) {
                return Err(Error::NotApplicable(
                    "projection mode needs four distinct in-range indices".into(),
                ));
            }
            // all four triples of the quadruple
            let triples: Vec<[usize; 3]> = vec![
                [idx[0], idx[1], idx[2]],
                [idx[0], idx[1], idx[3]],
                [idx[0], idx[2], idx[3]],
                [idx[1], idx[2], idx[3]],
            ];
            let mut unit_points: Vec<Vec<Vector<T>>> = Vec::new();
            for t in &triples {
                let sets: Vec<&ConvexSet<T>> = t.iter().map(|&i| &cones[i - 1]).collect();
                let pts = sample_intersection_members(&sets, n_dirs.max(8).min(64), &mut rng)?;
                let units: Vec<Vector<T>> = pts
                    .into_iter()
                    .filter(|p| p.norm() > real(1e-8))
                    .filter_map(|p| p.normalized())
                    .collect();
                unit_points.push(units);
            }
            let mut min_dist: Option<T> = None;
            for a in 0..triples.len() {
                for b in (a + 1)..triples.len() {
                    for u in &unit_points[a] {
                        for v in &unit_points[b] {
                            let d = u.dist(v);
                            min_dist = Some(match min_dist {
                                Some(m) => m.min(d),
                                None => d,
                            });
                        }
                    }
                }
            }
            Ok(SeparationEstimate {
                value: min_dist.and_then(|d| d.to_f64()),
                n_dirs,
                refinement_depth: 0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Mode, StopReason, TraceMetadata};
    use crate::schedules::ScheduleSpec;

    type V = Vector<f64>;

    fn synthetic_trace(tail: Vec<(usize, V)>, indices: Vec<(usize, usize)>) -> Trace<f64> {
        let records = indices
            .into_iter()
            .map(|(n, index)| crate::engine::StepRecord {
                n,
                index,
                norm: 0.0,
                step_norm: 0.0,
                coefficient: None,
                distances: None,
            })
            .collect();
        Trace {
            records,
            iterates: vec![],
            tail,
            initial_norm: 1.0,
            final_norm: 0.0,
            r_est: 0.0,
            metadata: TraceMetadata {
                mode: Mode::Projection,
                schedule: ScheduleSpec::Cyclic { k: 2 },
                rng: "chacha8".into(),
                stop_reason: StopReason::MaxIters,
                k: 2,
            },
            violations: vec![],
        }
    }

    #[test]
    fn constant_tail_is_one_cluster() {
        let w = V::new(vec![0.5, 0.5]);
        let tail: Vec<_> = (0..6).map(|n| (n, w.clone())).collect();
        let clusters = cluster_points(&synthetic_trace(tail, vec![]), 1e-3).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].w, w);
        assert_eq!(clusters[0].radius, 0.0);
        assert_eq!(clusters[0].support.len(), 6);
    }

    #[test]
    fn alternating_tail_is_two_clusters() {
        let a = V::new(vec![1.0, 0.0]);
        let b = V::new(vec![0.0, 1.0]);
        let tail: Vec<_> = (0..8)
            .map(|n| (n, if n % 2 == 0 { a.clone() } else { b.clone() }))
            .collect();
        let clusters = cluster_points(&synthetic_trace(tail, vec![]), 0.1).unwrap();
        assert_eq!(clusters.len(), 2);
    }

    #[test]
    fn too_few_tail_iterates() {
        let tail = vec![(0, V::zeros(2)), (1, V::zeros(2))];
        assert!(matches!(
            cluster_points(&synthetic_trace(tail, vec![]), 0.1),
            Err(Error::InsufficientIterates { have: 2 })
        ));
    }

    #[test]
    fn j_set_of_zero_is_everything() {
        let sets = vec![
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(2, 0)],
            },
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(2, 1)],
            },
        ];
        let j = j_set(&V::zeros(2), &sets, 1e-9).unwrap();
        assert_eq!(j.indices, vec![1, 2]);
    }

    #[test]
    fn j_set_monotone_in_tol() {
        let sets = vec![
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(2, 0)],
            },
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(2, 1)],
            },
        ];
        let w = V::new(vec![1.0, 1e-5]);
        let mut prev_len = usize::MAX;
        for tol in [1e-2, 1e-4, 1e-6, 1e-8] {
            let j = j_set(&w, &sets, tol).unwrap();
            assert!(j.indices.len() <= prev_len);
            prev_len = j.indices.len();
        }
    }

    #[test]
    fn wip_subspace_true() {
        let s = ConvexSet::LinearSubspace {
            basis: vec![V::basis(3, 0), V::basis(3, 2)],
        };
        assert!(wip_check(&s, 16, 1).unwrap().passed);
    }

    #[test]
    fn wip_first_quadrant_false_with_generator_witness() {
        let s = ConvexSet::GeneratedCone {
            generators: vec![V::basis(2, 0), V::basis(2, 1)],
        };
        let rep = wip_check(&s, 16, 1).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.witness.unwrap(), V::basis(2, 0));
    }

    #[test]
    fn wip_halfspace_false() {
        let s = ConvexSet::HalfspaceCone {
            normals: vec![V::basis(2, 1)],
        };
        let rep = wip_check(&s, 32, 1).unwrap();
        assert!(!rep.passed);
    }

    #[test]
    fn separation_symmetric_cross() {
        let dicts = vec![
            Dictionary::Finite {
                atoms: vec![V::basis(2, 0), V::basis(2, 0).scaled(-1.0)],
            },
            Dictionary::Finite {
                atoms: vec![V::basis(2, 1), V::basis(2, 1).scaled(-1.0)],
            },
        ];
        let est = separation_value(
            &SeparationInput::Dictionaries(&dicts),
            (1, 2, 1, 2),
            4096,
            3,
        )
        .unwrap();
        let v = est.value.unwrap();
        let truth = std::f64::consts::FRAC_1_SQRT_2;
        assert!(v >= truth - 1e-9, "estimate {v} below the true infimum");
        assert!((v - truth).abs() < 1e-3, "estimate {v} too far from {truth}");
    }

    #[test]
    fn separation_halfspace_union_nonpositive() {
        let dicts = vec![
            Dictionary::Finite {
                atoms: vec![V::basis(2, 0)],
            },
            Dictionary::Finite {
                atoms: vec![V::new(vec![std::f64::consts::FRAC_1_SQRT_2; 2])],
            },
        ];
        let est = separation_value(
            &SeparationInput::Dictionaries(&dicts),
            (1, 2, 1, 2),
            2048,
            3,
        )
        .unwrap();
        assert!(est.value.unwrap() <= 0.0);
    }

    #[test]
    fn separation_projection_mode_needs_four_indices() {
        let cones = vec![
            ConvexSet::GeneratedCone {
                generators: vec![V::basis(2, 0)],
            },
            ConvexSet::GeneratedCone {
                generators: vec![V::basis(2, 1)],
            },
            ConvexSet::GeneratedCone {
                generators: vec![V::new(vec![-1.0, 0.0])],
            },
        ];
        assert!(matches!(
            separation_value(&SeparationInput::Cones(&cones), (1, 2, 3, 3), 16, 3),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn pair_checks_on_synthetic_clusters() {
        // R^4 subspaces with J(w) = {1,2,4} and J(w') = {1,2,3}
        let w_vec = V::new(vec![0.0, 0.5, 0.0, 0.0]);
        let wp_vec = V::new(vec![0.9, 0.5, 0.0, 0.0]);
        let sets = vec![
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(4, 0), V::basis(4, 1)],
            }, // A1: span e1,e2 (contains both)
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(4, 0), V::basis(4, 1), V::basis(4, 3)],
            }, // A2: span e1,e2,e4 (contains both)
            ConvexSet::LinearSubspace {
                basis: vec![wp_vec.normalized().unwrap()],
            }, // A3: line through w' only
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(4, 1)],
            }, // A4: span e2, contains w only
        ];
        let w = ClusterPoint {
            w: w_vec,
            support: vec![10, 30, 50],
            radius: 0.0,
        };
        let wp = ClusterPoint {
            w: wp_vec,
            support: vec![20, 40, 60],
            radius: 0.0,
        };
        let trace = synthetic_trace(vec![], (1..=60).map(|n| (n, 1 + (n % 2))).collect());
        let rep = verify_pair_theorem1(&trace, &w, &wp, &sets, 32, 5).unwrap();
        let by_name = |n: &str| rep.checks.iter().find(|c| c.name == n).unwrap().clone();
        assert_eq!(rep.j_w.indices, vec![1, 2, 4]);
        assert_eq!(rep.j_w_prime.indices, vec![1, 2, 3]);
        assert!(by_name("i_new_index").passed);
        assert!(by_name("ii_shared_pair").passed);
        assert!(by_name("iii_jset_size").passed);
        // w' - w = 0.9 e1 is orthogonal to A_{J(w)} = span e2, so both the
        // functional inequality and the norm growth hold with equality
        assert!(by_name("iv_functional").passed);
        assert!(by_name("norm_growth").passed);
    }

    #[test]
    fn degenerate_pair_fails_check_i() {
        let sets = vec![
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(2, 0)],
            },
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(2, 0), V::basis(2, 1)],
            },
        ];
        let w = ClusterPoint {
            w: V::new(vec![0.5, 0.0]),
            support: vec![10, 30, 50],
            radius: 0.0,
        };
        let wp = ClusterPoint {
            w: w.w.clone(),
            support: vec![20, 40, 60],
            radius: 0.0,
        };
        let trace = synthetic_trace(vec![], (1..=60).map(|n| (n, 1 + (n % 2))).collect());
        let rep = verify_pair_theorem1(&trace, &w, &wp, &sets, 16, 5).unwrap();
        assert!(!rep.checks.iter().find(|c| c.name == "i_new_index").unwrap().passed);
    }

    #[test]
    fn non_interleaved_supports_rejected() {
        let sets = vec![
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(2, 0)],
            },
            ConvexSet::LinearSubspace {
                basis: vec![V::basis(2, 1)],
            },
        ];
        let w = ClusterPoint {
            w: V::zeros(2),
            support: vec![10, 11, 12],
            radius: 0.0,
        };
        let wp = ClusterPoint {
            w: V::zeros(2),
            support: vec![20, 21, 22],
            radius: 0.0,
        };
        let trace = synthetic_trace(vec![], vec![]);
        assert!(matches!(
            verify_pair_theorem1(&trace, &w, &wp, &sets, 16, 5),
            Err(Error::NotInterleaved)
        ));
    }
}
