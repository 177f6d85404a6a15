//! On-disk formats: the JSON instance schema, run metadata sidecars, and
//! the per-step trace CSV. Floats go through serde_json's shortest
//! round-trip encoding in JSON and 17 significant digits in CSV, so a
//! written value reads back bit-identically.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dictionaries::Dictionary;
use crate::engine::{Mode, StopReason, StopRule, Trace, TraceMetadata, Violation};
use crate::error::{Error, Result};
use crate::geometry::ConvexSet;
use crate::instances::{Certificate, InstanceSpec};
use crate::schedules::ScheduleSpec;
use crate::vector::Vector;
use crate::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetJson {
    LinearSubspace { basis: Vec<Vec<f64>> },
    AffineSubspace { basis: Vec<Vec<f64>>, offset: Vec<f64> },
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    GeneratedCone { generators: Vec<Vec<f64>> },
    HalfspaceCone { normals: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DictJson {
    Finite { atoms: Vec<Vec<f64>> },
    ConeSection { cone: SetJson },
}

/// The instance document: {"dim", "mode", "sets"|"dictionaries",
/// "certificate", "schedule"}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub dim: usize,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dictionaries: Vec<DictJson>,
    pub certificate: Certificate,
    pub schedule: ScheduleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn vec_to_json(v: &Vector<Real>) -> Vec<f64> {
    v.as_slice().to_vec()
}

fn vec_from_json(v: &[f64]) -> Vector<Real> {
    Vector::new(v.to_vec())
}

pub fn set_to_json(s: &ConvexSet<Real>) -> SetJson {
    match s {
        ConvexSet::LinearSubspace { basis } => SetJson::LinearSubspace {
            basis: basis.iter().map(vec_to_json).collect(),
        },
        ConvexSet::AffineSubspace { basis, offset } => SetJson::AffineSubspace {
            basis: basis.iter().map(vec_to_json).collect(),
            offset: vec_to_json(offset),
        },
        ConvexSet::HalfSpace { normal, offset } => SetJson::HalfSpace {
            normal: vec_to_json(normal),
            offset: *offset,
        },
        ConvexSet::Ball { center, radius } => SetJson::Ball {
            center: vec_to_json(center),
            radius: *radius,
        },
        ConvexSet::GeneratedCone { generators } => SetJson::GeneratedCone {
            generators: generators.iter().map(vec_to_json).collect(),
        },
        ConvexSet::HalfspaceCone { normals } => SetJson::HalfspaceCone {
            normals: normals.iter().map(vec_to_json).collect(),
        },
    }
}

pub fn set_from_json(s: &SetJson) -> ConvexSet<Real> {
    match s {
        SetJson::LinearSubspace { basis } => ConvexSet::LinearSubspace {
            basis: basis.iter().map(|v| vec_from_json(v)).collect(),
        },
        SetJson::AffineSubspace { basis, offset } => ConvexSet::AffineSubspace {
            basis: basis.iter().map(|v| vec_from_json(v)).collect(),
            offset: vec_from_json(offset),
        },
        SetJson::HalfSpace { normal, offset } => ConvexSet::HalfSpace {
            normal: vec_from_json(normal),
            offset: *offset,
        },
        SetJson::Ball { center, radius } => ConvexSet::Ball {
            center: vec_from_json(center),
            radius: *radius,
        },
        SetJson::GeneratedCone { generators } => ConvexSet::GeneratedCone {
            generators: generators.iter().map(|v| vec_from_json(v)).collect(),
        },
        SetJson::HalfspaceCone { normals } => ConvexSet::HalfspaceCone {
            normals: normals.iter().map(|v| vec_from_json(v)).collect(),
        },
    }
}

pub fn dict_to_json(d: &Dictionary<Real>) -> DictJson {
    match d {
        Dictionary::Finite { atoms } => DictJson::Finite {
            atoms: atoms.iter().map(vec_to_json).collect(),
        },
        Dictionary::ConeSection { cone } => DictJson::ConeSection {
            cone: set_to_json(cone),
        },
    }
}

pub fn dict_from_json(d: &DictJson) -> Dictionary<Real> {
    match d {
        DictJson::Finite { atoms } => Dictionary::Finite {
            atoms: atoms.iter().map(|v| vec_from_json(v)).collect(),
        },
        DictJson::ConeSection { cone } => Dictionary::ConeSection {
            cone: set_from_json(cone),
        },
    }
}

pub fn instance_to_json(inst: &InstanceSpec, schedule: ScheduleSpec) -> InstanceJson {
    InstanceJson {
        id: Some(inst.id.clone()),
        dim: inst.dim,
        mode: inst.mode,
        sets: inst.sets.iter().map(set_to_json).collect(),
        dictionaries: inst.dictionaries.iter().map(dict_to_json).collect(),
        certificate: inst.certificate,
        schedule,
        seed: Some(inst.seed),
    }
}

impl InstanceJson {
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::Projection if self.sets.is_empty() => Err(Error::InstanceInvalid(
                "projection mode needs a \"sets\" array".into(),
            )),
            Mode::Greedy if self.dictionaries.is_empty() => Err(Error::InstanceInvalid(
                "greedy mode needs a \"dictionaries\" array".into(),
            )),
            _ if self.schedule.k() == 0 => {
                Err(Error::InstanceInvalid("schedule K must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn k(&self) -> usize {
        match self.mode {
            Mode::Projection => self.sets.len(),
            Mode::Greedy => self.dictionaries.len(),
        }
    }

    pub fn core_sets(&self) -> Vec<ConvexSet<Real>> {
        self.sets.iter().map(set_from_json).collect()
    }

    pub fn core_dictionaries(&self) -> Vec<Dictionary<Real>> {
        self.dictionaries.iter().map(dict_from_json).collect()
    }
}

pub fn read_instance(path: &Path) -> Result<InstanceJson> {
    let text = fs::read_to_string(path)?;
    let inst: InstanceJson = serde_json::from_str(&text)?;
    inst.validate()?;
    Ok(inst)
}

pub fn write_instance(path: &Path, inst: &InstanceJson) -> Result<()> {
    let text = serde_json::to_string_pretty(inst)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Sidecar for trace.csv: everything needed to reproduce and re-analyze
/// the run, including the retained iterates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetadata {
    pub instance: InstanceJson,
    pub mode: Mode,
    pub schedule: ScheduleSpec,
    pub rng: String,
    pub k: usize,
    pub stop: StopRule,
    pub stop_reason: StopReason,
    pub x0: Vec<f64>,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub r_est: f64,
    pub steps: usize,
    pub checked: bool,
    pub violations: Vec<Violation>,
    /// Thinned iterates (n, x_n), n = 0 always present.
    pub iterates: Vec<(usize, Vec<f64>)>,
    /// Trailing-window iterates, verbatim.
    pub tail: Vec<(usize, Vec<f64>)>,
}

pub fn run_metadata(
    instance: &InstanceJson,
    trace: &Trace<Real>,
    stop: &StopRule,
    x0: &Vector<Real>,
    checked: bool,
) -> RunMetadata {
    let TraceMetadata {
        mode,
        schedule,
        rng,
        stop_reason,
        k,
    } = trace.metadata.clone();
    RunMetadata {
        instance: instance.clone(),
        mode,
        schedule,
        rng,
        k,
        stop: stop.clone(),
        stop_reason,
        x0: vec_to_json(x0),
        initial_norm: trace.initial_norm,
        final_norm: trace.final_norm,
        r_est: trace.r_est,
        steps: trace.records.len(),
        checked,
        violations: trace.violations.clone(),
        iterates: trace
            .iterates
            .iter()
            .map(|(n, x)| (*n, vec_to_json(x)))
            .collect(),
        tail: trace.tail.iter().map(|(n, x)| (*n, vec_to_json(x))).collect(),
    }
}

pub fn write_metadata(path: &Path, meta: &RunMetadata) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<RunMetadata> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

impl RunMetadata {
    /// Rebuild a Trace sufficient for the analysis layer (records carry
    /// no per-step scalars; use the CSV for those).
    pub fn to_trace(&self) -> Trace<Real> {
        Trace {
            records: Vec::new(),
            iterates: self
                .iterates
                .iter()
                .map(|(n, x)| (*n, vec_from_json(x)))
                .collect(),
            tail: self
                .tail
                .iter()
                .map(|(n, x)| (*n, vec_from_json(x)))
                .collect(),
            initial_norm: self.initial_norm,
            final_norm: self.final_norm,
            r_est: self.r_est,
            metadata: TraceMetadata {
                mode: self.mode,
                schedule: self.schedule.clone(),
                rng: self.rng.clone(),
                stop_reason: self.stop_reason,
                k: self.k,
            },
            violations: self.violations.clone(),
        }
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.17e}")
}

/// One row per step: n,index,norm,step_norm,coefficient,dist_1..dist_K.
/// Coefficient and distance fields are empty when not recorded.
pub fn write_trace_csv(path: &Path, trace: &Trace<Real>, k: usize) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("n,index,norm,step_norm,coefficient");
    for i in 1..=k {
        header.push_str(&format!(",dist_{i}"));
    }
    writeln!(w, "{header}")?;
    for r in &trace.records {
        let mut row = format!(
            "{},{},{},{},{}",
            r.n,
            r.index,
            fmt_float(r.norm),
            fmt_float(r.step_norm),
            r.coefficient.map(fmt_float).unwrap_or_default()
        );
        match &r.distances {
            Some(ds) => {
                for d in ds {
                    row.push(',');
                    row.push_str(&fmt_float(*d));
                }
            }
            None => {
                for _ in 0..k {
                    row.push(',');
                }
            }
        }
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub index: usize,
    pub norm: f64,
    pub step_norm: f64,
    pub coefficient: Option<f64>,
    pub distances: Option<Vec<f64>>,
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let file = fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InstanceInvalid("empty trace csv".into()))??;
    if !header.starts_with("n,index,norm,step_norm,coefficient") {
        return Err(Error::InstanceInvalid("unrecognized trace csv header".into()));
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 {
            return Err(Error::InstanceInvalid(format!("short csv row: {line}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::InstanceInvalid(format!("bad float field: {s}")))
        };
        let dist_fields = &fields[5..];
        let distances = if dist_fields.iter().all(|f| f.is_empty()) {
            None
        } else {
            Some(
                dist_fields
                    .iter()
                    .map(|f| parse(f))
                    .collect::<Result<Vec<f64>>>()?,
            )
        };
        rows.push(TraceRow {
            n: fields[0]
                .parse()
                .map_err(|_| Error::InstanceInvalid("bad n field".into()))?,
            index: fields[1]
                .parse()
                .map_err(|_| Error::InstanceInvalid("bad index field".into()))?,
            norm: parse(fields[2])?,
            step_norm: parse(fields[3])?,
            coefficient: if fields[4].is_empty() {
                None
            } else {
                Some(parse(fields[4])?)
            },
            distances,
        });
    }
    Ok(rows)
}
