//! Batch search over instance families: generate, run, analyze, and
//! summarize, flagging counterexample candidates.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use alterproj::engine::{self, EngineConfig, Mode, StopRule};
use alterproj::error::Result;
use alterproj::instances;
use alterproj::schedules::{Schedule, ScheduleSpec};
use alterproj::schema::{self, InstanceJson};
use alterproj::{RTrace, RVector};

use crate::report;
use crate::{parse_classes, EXIT_FLAGGED, EXIT_INVALID, EXIT_OK};

#[derive(Args)]
pub struct SearchArgs {
    /// Comma-separated certificate classes.
    #[arg(
        long,
        default_value = "subspaces,cones,separated_cones,symmetric_dictionaries,asymmetric_dictionaries"
    )]
    classes: String,
    #[arg(long, default_value_t = 1)]
    seed_start: u64,
    #[arg(long, default_value_t = 50)]
    seed_end: u64,
    /// Sets/dictionaries per instance (classes may round this up).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Per-instance output directories plus summary.csv go here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    jobs: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Persisting-norm threshold for candidate flagging.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Cluster radius bound for the analysis pass.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Extra instance JSON files to include in the batch.
    instances: Vec<PathBuf>,
}

/// Deterministic unit initial point.
pub fn initial_point(dim: usize, seed: u64) -> RVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    loop {
        let v = RVector::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

pub fn run_instance(
    instance: &InstanceJson,
    schedule: &mut Schedule,
    x0: &RVector,
    stop: &StopRule,
    config: &EngineConfig,
) -> Result<RTrace> {
    match instance.mode {
        Mode::Projection => {
            engine::run_projection(&instance.core_sets(), schedule, x0, stop, config)
        }
        Mode::Greedy => {
            engine::run_greedy(&instance.core_dictionaries(), schedule, x0, stop, config)
        }
    }
}

struct Row {
    id: String,
    final_norm: f64,
    clusters: usize,
    flags: String,
    candidate: bool,
}

fn process(instance: &InstanceJson, args: &SearchArgs) -> std::result::Result<Row, String> {
    let id = instance.id.clone().unwrap_or_else(|| "<unnamed>".into());
    let seed = instance.seed.unwrap_or(0);
    let mut schedule =
        Schedule::from_spec(&instance.schedule).map_err(|e| format!("{id}: {e}"))?;
    if schedule.k() != instance.k() {
        return Err(format!(
            "{id}: schedule K={} does not match the instance K={}",
            schedule.k(),
            instance.k()
        ));
    }
    let x0 = initial_point(instance.dim, seed);
    let stop = StopRule {
        max_iters: args.max_iter,
        norm_tol: 1e-9,
        ..Default::default()
    };
    let config = EngineConfig::default();
    let trace =
        run_instance(instance, &mut schedule, &x0, &stop, &config).map_err(|e| format!("{id}: {e}"))?;
    let meta = schema::run_metadata(instance, &trace, &stop, &x0, config.checked);
    let rep = report::analyze_run(&meta, args.eps, args.samples, seed, args.tol, false)
        .map_err(|e| format!("{id}: {e}"))?;
    let persisting = meta.final_norm > args.tol;
    let nonzero_cluster = rep.clusters.iter().any(|c| c.norm > args.tol);
    // a passing pair per the theorem checks, or plain non-convergence to 0
    let candidate = rep.candidate || (persisting && nonzero_cluster);
    let mut flags = Vec::new();
    if !trace.violations.is_empty() {
        flags.push("violations".to_string());
    }
    if persisting {
        flags.push("persisting".into());
    }
    if rep.candidate {
        flags.push("passing-pair".into());
    }
    if candidate {
        flags.push("CANDIDATE".into());
    }
    if let Some(out) = &args.out {
        let dir = out.join(&id);
        std::fs::create_dir_all(&dir).map_err(|e| format!("{id}: {e}"))?;
        schema::write_trace_csv(&dir.join("trace.csv"), &trace, instance.k())
            .map_err(|e| format!("{id}: {e}"))?;
        schema::write_metadata(&dir.join("metadata.json"), &meta)
            .map_err(|e| format!("{id}: {e}"))?;
        report::write_report(&dir.join("report.json"), &rep).map_err(|e| format!("{id}: {e}"))?;
    }
    Ok(Row {
        id,
        final_norm: meta.final_norm,
        clusters: rep.clusters.len(),
        flags: if flags.is_empty() {
            "-".into()
        } else {
            flags.join(",")
        },
        candidate,
    })
}

pub fn cmd_search(args: &SearchArgs) -> u8 {
    let classes = match parse_classes(&args.classes) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    if args.jobs == 0 || args.seed_end < args.seed_start {
        eprintln!("error: need --jobs >= 1 and --seed-end >= --seed-start");
        return EXIT_INVALID;
    }
    let mut batch: Vec<InstanceJson> = Vec::new();
    for class in &classes {
        for seed in args.seed_start..=args.seed_end {
            let inst = match instances::standard_suite_instance(*class, args.k, seed) {
                Ok(i) => i,
                Err(e) => {
                    eprintln!("error: generating {} seed {seed}: {e}", class.name());
                    return EXIT_INVALID;
                }
            };
            let k = inst.k();
            batch.push(schema::instance_to_json(
                &inst,
                ScheduleSpec::Random { k, seed },
            ));
        }
    }
    for path in &args.instances {
        match schema::read_instance(path) {
            Ok(i) => batch.push(i),
            Err(e) => {
                eprintln!("error: reading {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
    }
    if let Some(out) = &args.out {
        if let Err(e) = std::fs::create_dir_all(out) {
            eprintln!("error: creating --out: {e}");
            return EXIT_INVALID;
        }
    }

    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<(usize, std::result::Result<Row, String>)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..args.jobs.min(batch.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= batch.len() {
                    break;
                }
                let row = process(&batch[i], args);
                rows.lock().unwrap().push((i, row));
            });
        }
    });
    let mut rows = rows.into_inner().unwrap();
    rows.sort_by_key(|(i, _)| *i);

    let mut any_candidate = false;
    let mut any_error = false;
    let mut summary = String::from("id,final_norm,clusters,flags\n");
    println!("{:<28} {:>13} {:>9}  flags", "id", "final_norm", "clusters");
    for (_, row) in &rows {
        match row {
            Ok(r) => {
                println!(
                    "{:<28} {:>13.6e} {:>9}  {}",
                    r.id, r.final_norm, r.clusters, r.flags
                );
                summary.push_str(&format!(
                    "{},{:e},{},{}\n",
                    r.id, r.final_norm, r.clusters, r.flags
                ));
                any_candidate |= r.candidate;
            }
            Err(e) => {
                eprintln!("error: {e}");
                any_error = true;
            }
        }
    }
    if let Some(out) = &args.out {
        if let Err(e) = std::fs::write(out.join("summary.csv"), summary) {
            eprintln!("error: writing summary.csv: {e}");
            any_error = true;
        }
    }
    println!(
        "search: {} instance(s), {}",
        rows.len(),
        if any_candidate {
            "counterexample candidate(s) FOUND"
        } else {
            "no counterexample candidates"
        }
    );
    if any_error {
        EXIT_INVALID
    } else if any_candidate {
        EXIT_FLAGGED
    } else {
        EXIT_OK
    }
}
