use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{run_baseline, run_pipelines, RunRecord};
use super::spec::{ExperimentSpec, GeneratorKind, Instance, MdSettings, Pipeline, ProblemSource};
use super::stats::Stats;
use crate::error::{contract, Error, Result};
use crate::ising::parisi_reference_cut;
use crate::md::save_trajectory;
use crate::subsolvers::Backend;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Divergence,
    Remote,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub instance: String,
    pub init_seed: u64,
    pub solver: String,
    pub md_steps: usize,
    pub kind: FailureKind,
    pub error: String,
}

impl RunFailure {
    fn new(instance: &str, init_seed: u64, solver: String, md_steps: usize, err: &Error) -> Self {
        let kind = match err {
            Error::Divergence { .. } => FailureKind::Divergence,
            Error::Remote(_) => FailureKind::Remote,
            _ => FailureKind::Other,
        };
        Self {
            instance: instance.to_string(),
            init_seed,
            solver,
            md_steps,
            kind,
            error: err.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub solver: String,
    pub md_steps: usize,
    pub energy: Stats,
    pub cut: Option<Stats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
    pub failures: usize,
    pub instances: usize,
    pub instance_seeds: Vec<u64>,
    pub init_seeds: Vec<u64>,
    /// Finite-size-scaling estimate of the optimal cut, for bimodal `K_n` experiments.
    pub reference_cut: Option<f64>,
}

impl AggregateReport {
    pub fn row(&self, solver: &str, md_steps: usize) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.solver == solver && r.md_steps == md_steps)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
    pub report: AggregateReport,
}

/// Groups records by `(solver, md_steps)` and summarizes energies and cuts.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(String, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.solver.clone(), r.md_steps)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((solver, md_steps), rs)| {
            let energies: Vec<f64> = rs.iter().map(|r| r.energy).collect();
            let cuts: Vec<f64> = rs.iter().filter_map(|r| r.cut).collect();
            AggregateRow {
                solver,
                md_steps,
                energy: Stats::of(&energies).expect("non-empty group"),
                cut: if cuts.len() == rs.len() { Stats::of(&cuts) } else { None },
            }
        })
        .collect()
}

struct RunPlan<'a> {
    pipelines: &'a [Pipeline],
    md: &'a MdSettings,
    baselines: &'a [Backend],
    fallback: Option<&'a Backend>,
}

/// Every pipeline at every step count plus every baseline, for one instance and seed.
fn run_seed(
    plan: &RunPlan<'_>,
    instance: &Instance,
    init_seed: u64,
    trajectory_dir: Option<&Path>,
) -> (Vec<RunRecord>, Vec<RunFailure>) {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    if !plan.pipelines.is_empty() {
        for &steps in &plan.md.steps {
            let (results, run) = run_pipelines(instance, plan.pipelines, plan.md, steps, init_seed, plan.fallback);
            for (p, res) in plan.pipelines.iter().zip(results) {
                match res {
                    Ok(r) => records.push(r),
                    Err(e) => failures.push(RunFailure::new(&instance.label, init_seed, p.label(), steps, &e)),
                }
            }
            if let (Some(dir), Some(run)) = (trajectory_dir, run) {
                if !run.samples.is_empty() {
                    let path = dir.join(format!(
                        "trajectory_{}_init{init_seed}_steps{steps}.csv.gz",
                        instance.label
                    ));
                    if let Err(e) = save_trajectory(&run.samples, &path) {
                        log::warn!("could not write {}: {e}", path.display());
                    }
                }
            }
        }
    }
    for b in plan.baselines {
        match run_baseline(instance, b, init_seed) {
            Ok(r) => records.push(r),
            Err(e) => failures.push(RunFailure::new(&instance.label, init_seed, b.id().to_string(), 0, &e)),
        }
    }
    (records, failures)
}

fn run_instance(
    plan: &RunPlan<'_>,
    instance: &Instance,
    init_seeds: &[u64],
    trajectory_dir: Option<&Path>,
) -> (Vec<RunRecord>, Vec<RunFailure>) {
    let per_seed: Vec<_> = init_seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| run_seed(plan, instance, seed, if k == 0 { trajectory_dir } else { None }))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_seed {
        records.extend(r);
        failures.extend(f);
    }
    (records, failures)
}

/// Runs instances x seeds x solvers. Output order is deterministic; failed runs
/// are listed separately and left out of the aggregate.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    if let Some(dir) = &spec.trajectory_dir {
        fs::create_dir_all(dir)?;
    }
    let plan = RunPlan {
        pipelines: &spec.pipelines,
        md: &spec.md,
        baselines: &spec.baselines,
        fallback: spec.fallback.as_ref(),
    };
    let traj = spec.trajectory_dir.as_deref().filter(|_| spec.md.record_stride > 0);
    let per_instance: Vec<_> = (0..spec.instance_count())
        .into_par_iter()
        .map(|k| match spec.instance(k) {
            Ok(inst) => run_instance(&plan, &inst, &spec.init_seeds, if k == 0 { traj } else { None }),
            Err(e) => (
                Vec::new(),
                vec![RunFailure::new(&format!("instance-{k}"), 0, "load".into(), 0, &e)],
            ),
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_instance {
        records.extend(r);
        failures.extend(f);
    }
    let (instance_seeds, reference_cut) = match &spec.source {
        ProblemSource::Generated { generator, n, seeds } => (
            seeds.clone(),
            (*generator == GeneratorKind::BimodalComplete).then(|| parisi_reference_cut(*n)),
        ),
        ProblemSource::Files { .. } => (Vec::new(), None),
    };
    let report = AggregateReport {
        rows: aggregate(&records),
        failures: failures.len(),
        instances: spec.instance_count(),
        instance_seeds,
        init_seeds: spec.init_seeds.clone(),
        reference_cut,
    };
    Ok(ExperimentOutput {
        records,
        failures,
        report,
    })
}

/// Writes `records.jsonl`, `failures.jsonl` (when non-empty) and `aggregate.json`.
pub fn write_outputs(output: &ExperimentOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join("records.jsonl"))?);
    for r in &output.records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    if !output.failures.is_empty() {
        let mut w = BufWriter::new(File::create(dir.join("failures.jsonl"))?);
        for f in &output.failures {
            serde_json::to_writer(&mut w, f)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    let mut w = BufWriter::new(File::create(dir.join("aggregate.json"))?);
    serde_json::to_writer_pretty(&mut w, &output.report)?;
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub solver: String,
    pub md_steps: usize,
    pub energies: Vec<f64>,
    pub cuts: Option<Vec<f64>>,
    pub energy: Stats,
    pub cut: Option<Stats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub instance: String,
    pub rows: Vec<StudyRow>,
    pub failures: Vec<RunFailure>,
}

impl StudyReport {
    pub fn row(&self, solver: &str, md_steps: usize) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.solver == solver && r.md_steps == md_steps)
    }
}

/// Runs every pipeline over momentum seeds `0..n_inits` on one instance and
/// reports the raw values with their spread.
pub fn initial_condition_study(
    instance: &Instance,
    n_inits: usize,
    pipelines: &[Pipeline],
    md: &MdSettings,
    fallback: Option<&Backend>,
) -> Result<StudyReport> {
    contract!(n_inits >= 1, "study needs at least one initial condition");
    contract!(!pipelines.is_empty(), "study needs at least one pipeline");
    let plan = RunPlan {
        pipelines,
        md,
        baselines: &[],
        fallback,
    };
    let seeds: Vec<u64> = (0..n_inits as u64).collect();
    let (records, failures) = run_instance(&plan, instance, &seeds, None);
    let mut groups: BTreeMap<(String, usize), Vec<RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.solver.clone(), r.md_steps)).or_default().push(r);
    }
    let rows = groups
        .into_iter()
        .map(|((solver, md_steps), rs)| {
            let energies: Vec<f64> = rs.iter().map(|r| r.energy).collect();
            let cuts: Option<Vec<f64>> = rs.iter().map(|r| r.cut).collect();
            StudyRow {
                solver,
                md_steps,
                energy: Stats::of(&energies).expect("non-empty group"),
                cut: cuts.as_deref().and_then(Stats::of),
                energies,
                cuts,
            }
        })
        .collect();
    Ok(StudyReport {
        instance: instance.label.clone(),
        rows,
        failures,
    })
}
