use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::spec::{Instance, MdSettings, Pipeline};
use crate::error::{Error, Result};
use crate::ising::{cut_from_energy, SpinConfig};
use crate::md::{leapfrog_run, MdRun};
use crate::reducer::{build_subproblem, make_partition, project_all, reconstruct};
use crate::subsolvers::{solve, Backend, SubsolverResult};

/// One solver run on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub instance_seed: Option<u64>,
    pub mirrored: bool,
    pub init_seed: u64,
    pub solver: String,
    /// Full-problem Ising energy of the returned configuration.
    pub energy: f64,
    /// Present iff the instance is a MAX-CUT problem.
    pub cut: Option<f64>,
    /// 0 for baselines that do not use MD.
    pub md_steps: usize,
    pub wall_time: f64,
    /// Single-spin moves made by the (sub)solver.
    pub spin_updates: u64,
    /// Set when a remote backend failed and the fallback answered instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
}

impl RunRecord {
    fn new(instance: &Instance, init_seed: u64, solver: String, energy: f64, md_steps: usize) -> Self {
        Self {
            instance: instance.label.clone(),
            instance_seed: instance.seed,
            mirrored: instance.mirrored,
            init_seed,
            solver,
            energy,
            cut: instance.cut_offset.map(|c0| cut_from_energy(energy, c0)),
            md_steps,
            wall_time: 0.0,
            spin_updates: 0,
            fallback: None,
        }
    }
}

/// Runs the MD preconditioner once and evaluates every pipeline on its output.
///
/// The MD run is shared, so `md` and `hqa` records for the same seed describe
/// the same trajectory. The second value is the raw MD run (when it succeeded),
/// for trajectory export.
pub fn run_pipelines(
    instance: &Instance,
    pipelines: &[Pipeline],
    md: &MdSettings,
    steps: usize,
    init_seed: u64,
    fallback: Option<&Backend>,
) -> (Vec<Result<RunRecord>>, Option<MdRun<f64>>) {
    let started = Instant::now();
    let config = md.config(steps, init_seed);
    let run = match leapfrog_run(&instance.problem, &md.schedule, &config, None) {
        Ok(r) => r,
        Err(e) => {
            let msg = e.to_string();
            let results = pipelines
                .iter()
                .map(|_| {
                    Err(match &e {
                        Error::Divergence { step } => Error::Divergence { step: *step },
                        _ => Error::Contract(msg.clone()),
                    })
                })
                .collect();
            return (results, None);
        }
    };
    let md_time = started.elapsed().as_secs_f64();
    let phibar = &run.averaged.phibar;
    let results = pipelines
        .iter()
        .map(|p| {
            let t0 = Instant::now();
            let mut rec = evaluate(instance, p, phibar, steps, init_seed, fallback)?;
            rec.wall_time = md_time + t0.elapsed().as_secs_f64();
            Ok(rec)
        })
        .collect();
    (results, Some(run))
}

/// MD followed by one pipeline.
pub fn run_pipeline(
    instance: &Instance,
    pipeline: &Pipeline,
    md: &MdSettings,
    steps: usize,
    init_seed: u64,
    fallback: Option<&Backend>,
) -> Result<RunRecord> {
    let (mut results, _) = run_pipelines(instance, std::slice::from_ref(pipeline), md, steps, init_seed, fallback);
    results.pop().expect("one result per pipeline")
}

fn evaluate(
    instance: &Instance,
    pipeline: &Pipeline,
    phibar: &[f64],
    steps: usize,
    init_seed: u64,
    fallback: Option<&Backend>,
) -> Result<RunRecord> {
    let problem = &instance.problem;
    let projected = project_all(phibar);
    match pipeline {
        Pipeline::MdOnly => {
            let energy = problem.energy(&projected)?;
            Ok(RunRecord::new(instance, init_seed, pipeline.label(), energy, steps))
        }
        Pipeline::Hqa { n_ambivalent, backend } => {
            let part = make_partition(phibar, *n_ambivalent, 0.0)?;
            if *n_ambivalent == 0 {
                let energy = problem.energy(&projected)?;
                return Ok(RunRecord::new(instance, init_seed, pipeline.label(), energy, steps));
            }
            let sub = build_subproblem(problem, &part)?;
            let warm = part.restrict(&projected)?;
            let backend = backend.reseeded(init_seed);
            let (result, fell_back) = solve_with_fallback(&sub.base, &backend, &warm, fallback, init_seed)?;
            let full = reconstruct(&part, &sub, &result.spins)?;
            let energy = problem.energy(&full)?;
            let mut rec = RunRecord::new(instance, init_seed, pipeline.label(), energy, steps);
            rec.spin_updates = result.spin_updates;
            rec.fallback = fell_back;
            Ok(rec)
        }
    }
}

fn solve_with_fallback(
    problem: &crate::ising::IsingProblem<f64>,
    backend: &Backend,
    warm: &SpinConfig,
    fallback: Option<&Backend>,
    seed: u64,
) -> Result<(SubsolverResult<f64>, Option<String>)> {
    match solve(problem, backend, Some(warm)) {
        Ok(r) => Ok((r, None)),
        Err(Error::Remote(err)) => match fallback {
            Some(fb) => {
                log::warn!("remote backend failed ({err}); falling back to {}", fb.id());
                let r = solve(problem, &fb.reseeded(seed), Some(warm))?;
                Ok((r, Some(format!("{}: {err}", fb.id()))))
            }
            None => Err(Error::Remote(err)),
        },
        Err(e) => Err(e),
    }
}

/// Runs a backend directly on the full problem.
pub fn run_baseline(instance: &Instance, backend: &Backend, init_seed: u64) -> Result<RunRecord> {
    let t0 = Instant::now();
    let r = solve(&instance.problem, &backend.reseeded(init_seed), None)?;
    let mut rec = RunRecord::new(instance, init_seed, backend.id().to_string(), r.energy, 0);
    rec.spin_updates = r.spin_updates;
    rec.wall_time = t0.elapsed().as_secs_f64();
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::spec::GeneratorKind;
    use crate::subsolvers::{RemoteConfig, TabuParams};

    fn md(steps: usize) -> MdSettings {
        MdSettings::with_steps(vec![steps])
    }

    #[test]
    fn hqa_with_exact_backend_dominates_md() {
        let inst = Instance::generate(GeneratorKind::UniformSg, 20, 3).unwrap();
        let pipes = [
            Pipeline::MdOnly,
            Pipeline::Hqa {
                n_ambivalent: 8,
                backend: Backend::Brute,
            },
        ];
        for seed in 0..5 {
            let (res, _) = run_pipelines(&inst, &pipes, &md(2000), 2000, seed, None);
            let md_e = res[0].as_ref().unwrap().energy;
            let hqa_e = res[1].as_ref().unwrap().energy;
            assert!(hqa_e <= md_e);
        }
    }

    #[test]
    fn zero_ambivalent_equals_md_only() {
        let inst = Instance::generate(GeneratorKind::BimodalComplete, 16, 2).unwrap();
        let a = run_pipeline(&inst, &Pipeline::MdOnly, &md(1000), 1000, 4, None).unwrap();
        let b = run_pipeline(
            &inst,
            &Pipeline::Hqa {
                n_ambivalent: 0,
                backend: Backend::Brute,
            },
            &md(1000),
            1000,
            4,
            None,
        )
        .unwrap();
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.cut, b.cut);
        assert!(a.cut.is_some());
    }

    #[test]
    fn unreachable_remote_falls_back() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let inst = Instance::generate(GeneratorKind::UniformSg, 12, 1).unwrap();
        let remote = Backend::Remote(
            RemoteConfig::new(format!("http://{addr}")).with_timeout(std::time::Duration::from_secs(2)),
        );
        let pipe = Pipeline::Hqa {
            n_ambivalent: 6,
            backend: remote,
        };
        let fb = Backend::Tabu(TabuParams::default());
        let rec = run_pipeline(&inst, &pipe, &md(500), 500, 0, Some(&fb)).unwrap();
        assert!(rec.fallback.as_deref().unwrap().starts_with("tabu"));
        let err = run_pipeline(&inst, &pipe, &md(500), 500, 0, None).unwrap_err();
        assert!(matches!(err, Error::Remote(_)));
    }
}
