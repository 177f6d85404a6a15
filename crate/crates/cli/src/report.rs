//! Cluster-pair analysis of finished runs and the budgeted equivalence
//! suites behind `check`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use alterproj::analysis::{self, PairReport};
use alterproj::dictionaries::{self};
use alterproj::engine::Mode;
use alterproj::error::{Error, Result};
use alterproj::geometry::{self, ConvexSet};
use alterproj::instances;
use alterproj::schema::RunMetadata;
use alterproj::{RConvexSet, RVector};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterJson {
    pub w: Vec<f64>,
    pub norm: f64,
    pub radius: f64,
    pub members: usize,
    pub first_n: usize,
    pub last_n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairJson {
    /// Indices into `clusters`, in (w, w') order.
    pub pair: (usize, usize),
    pub report: PairReport,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub final_norm: f64,
    pub eps: f64,
    pub persist_tol: f64,
    pub clusters: Vec<ClusterJson>,
    pub pairs: Vec<PairJson>,
    /// Some pair passed every check while the norm persisted above
    /// `persist_tol`.
    pub candidate: bool,
}

/// Cluster the stored tail, then run the pair checks on every interleaved
/// ordered pair. Greedy runs are checked against the polar cones of their
/// dictionaries.
pub fn analyze_run(
    meta: &RunMetadata,
    eps: f64,
    samples: usize,
    seed: u64,
    persist_tol: f64,
    two_sided: bool,
) -> Result<AnalysisReport> {
    let trace = meta.to_trace();
    let sets: Vec<RConvexSet> = match meta.mode {
        Mode::Projection => meta.instance.core_sets(),
        Mode::Greedy => meta
            .instance
            .core_dictionaries()
            .iter()
            .map(dictionaries::polar_cone_of_dictionary)
            .collect::<Result<_>>()?,
    };
    let clusters = match analysis::cluster_points(&trace, eps) {
        Ok(c) => c,
        Err(Error::InsufficientIterates { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    let mut pairs = Vec::new();
    let mut candidate = false;
    for i in 0..clusters.len() {
        for j in 0..clusters.len() {
            if i == j {
                continue;
            }
            let verify = if two_sided {
                analysis::verify_pair_theorem2
            } else {
                analysis::verify_pair_theorem1
            };
            match verify(&trace, &clusters[i], &clusters[j], &sets, samples, seed) {
                Ok(report) => {
                    let passed = report.all_passed();
                    if passed && meta.final_norm > persist_tol {
                        candidate = true;
                    }
                    pairs.push(PairJson {
                        pair: (i, j),
                        report,
                        passed,
                    });
                }
                Err(Error::NotInterleaved) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(AnalysisReport {
        final_norm: meta.final_norm,
        eps,
        persist_tol,
        clusters: clusters
            .iter()
            .map(|c| ClusterJson {
                w: c.w.as_slice().to_vec(),
                norm: c.w.norm(),
                radius: c.radius,
                members: c.support.len(),
                first_n: c.support.first().copied().unwrap_or(0),
                last_n: c.support.last().copied().unwrap_or(0),
            })
            .collect(),
        pairs,
        candidate,
    })
}

pub fn write_report(path: &Path, rep: &AnalysisReport) -> Result<()> {
    let text = serde_json::to_string_pretty(rep)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn random_cone(d: usize, rng: &mut ChaCha8Rng) -> RConvexSet {
    let m = rng.gen_range(1..=2 * d);
    let generators = (0..m)
        .map(|_| loop {
            let v = RVector::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect());
            if v.norm() > 1e-3 {
                return v;
            }
        })
        .collect();
    ConvexSet::GeneratedCone { generators }
}

fn random_point(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> RVector {
    RVector::new((0..d).map(|_| rng.gen_range(-scale..scale)).collect())
}

/// Moreau decomposition residuals on random cones and points; both
/// residuals must stay within 1e-10.
pub fn check_moreau(budget: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for case in 0..budget {
        let d = rng.gen_range(2..=8);
        let cone = random_cone(d, &mut rng);
        let x = random_point(d, 10.0, &mut rng);
        let rep = geometry::moreau_check(&cone, &x)?;
        let r = rep
            .decomposition_residual
            .max(rep.orthogonality_residual / x.norm_sq().max(1.0));
        worst = worst.max(r);
        if r > 1e-10 {
            return Err(Error::NumericalFailure(format!(
                "moreau case {case}: residual {r:.3e} exceeds 1e-10"
            )));
        }
    }
    Ok(worst)
}

/// Per-step agreement of alternating projections with alternating greedy
/// steps over the bridged dictionaries, on certified cone pairs.
pub fn check_bridge(budget: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for case in 0..budget {
        let d = rng.gen_range(2..=6);
        let inst = instances::gen_cone_instance(d, 2, seed.wrapping_add(1 + case as u64), false)?;
        let (da, db) = dictionaries::bridge_dictionaries(&inst.sets[0], &inst.sets[1], 64, seed)?;
        let mut xp = random_point(d, 2.0, &mut rng);
        let mut xg = xp.clone();
        for n in 0..200 {
            let (set, dict) = if n % 2 == 0 {
                (&inst.sets[0], &da)
            } else {
                (&inst.sets[1], &db)
            };
            xp = geometry::project(set, &xp)?;
            xg = dictionaries::greedy_step(dict, &xg)?;
            let diff = xp.dist(&xg);
            worst = worst.max(diff);
            if diff > 1e-10 {
                return Err(Error::NumericalFailure(format!(
                    "bridge case {case} step {n}: trajectories deviate by {diff:.3e}"
                )));
            }
            if xp.norm() < 1e-15 {
                break;
            }
        }
    }
    Ok(worst)
}

/// Active-set cone projection against the face-enumeration oracle.
pub fn check_oracle(budget: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for case in 0..budget {
        let d = rng.gen_range(2..=4);
        let m = rng.gen_range(1..=6);
        let generators = (0..m)
            .map(|_| loop {
                let v = random_point(d, 1.0, &mut rng);
                if v.norm() > 1e-3 {
                    return v;
                }
            })
            .collect();
        let cone = ConvexSet::GeneratedCone { generators };
        let x = random_point(d, 5.0, &mut rng);
        let fast = geometry::project(&cone, &x)?;
        let slow = instances::oracle_cone_projection(&cone, &x)?;
        let diff = fast.dist(&slow);
        worst = worst.max(diff);
        if diff > 1e-8 {
            return Err(Error::NumericalFailure(format!(
                "oracle case {case}: deviation {diff:.3e} exceeds 1e-8"
            )));
        }
    }
    Ok(worst)
}
