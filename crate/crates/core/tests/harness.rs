mod common;

use std::collections::BTreeMap;

use fluxanneal_core::harness::{
    initial_condition_study, reference_line, run_experiment, run_pipeline, ExperimentSpec, GeneratorKind,
    Instance, MdSettings, Pipeline, ProblemSource, ReferenceKind, RunRecord,
};
use fluxanneal_core::ising::parisi_reference_cut;
use fluxanneal_core::subsolvers::{Backend, SaParams, TabuParams};
use fluxanneal_core::Error;

fn spec(n: usize, seeds: Vec<u64>, pipelines: Vec<Pipeline>, steps: Vec<usize>) -> ExperimentSpec {
    ExperimentSpec {
        source: ProblemSource::Generated {
            generator: GeneratorKind::UniformSg,
            n,
            seeds,
        },
        mirror_pairing: false,
        md: MdSettings::with_steps(steps),
        pipelines,
        baselines: vec![],
        init_seeds: vec![0, 1, 2],
        fallback: None,
        trajectory_dir: None,
    }
}

fn hqa(n_ambivalent: usize, backend: Backend) -> Pipeline {
    Pipeline::Hqa { n_ambivalent, backend }
}

#[test]
fn whole_problem_in_subsolver_gives_global_optimum() {
    for seed in 0..3 {
        let inst = Instance::generate(GeneratorKind::UniformSg, 18, seed).unwrap();
        let (oracle, _) = common::exhaustive_ground(&inst.problem);
        let md = MdSettings::with_steps(vec![2000]);
        let rec = run_pipeline(&inst, &hqa(18, Backend::Brute), &md, 2000, seed, None).unwrap();
        assert!((rec.energy - oracle).abs() <= 1e-12, "{} vs {oracle}", rec.energy);
    }
}

#[test]
fn whole_problem_above_exhaustive_capacity_is_refused() {
    let inst = Instance::generate(GeneratorKind::UniformSg, 30, 0).unwrap();
    let md = MdSettings::with_steps(vec![500]);
    let err = run_pipeline(&inst, &hqa(30, Backend::Brute), &md, 500, 0, None).unwrap_err();
    assert!(matches!(err, Error::Capacity { n: 30, .. }), "{err}");
}

fn without_wall_time(records: &[RunRecord]) -> Vec<RunRecord> {
    records
        .iter()
        .cloned()
        .map(|r| RunRecord { wall_time: 0.0, ..r })
        .collect()
}

#[test]
fn experiment_dominance_reproducibility_and_aggregates() {
    let mut s = spec(
        24,
        vec![3, 4, 5],
        vec![Pipeline::MdOnly, hqa(8, Backend::Brute), hqa(8, Backend::Tabu(TabuParams::default()))],
        vec![1000, 4000],
    );
    s.baselines = vec![Backend::Sa(SaParams::default())];
    let a = run_experiment(&s).unwrap();
    let b = run_experiment(&s).unwrap();
    assert!(a.failures.is_empty());
    assert_eq!(without_wall_time(&a.records), without_wall_time(&b.records));
    assert_eq!(a.records.len(), 3 * 3 * (3 * 2 + 1));

    let key = |r: &RunRecord| (r.instance.clone(), r.init_seed, r.md_steps);
    let md: BTreeMap<_, f64> = a.records.iter().filter(|r| r.solver == "md").map(|r| (key(r), r.energy)).collect();
    for r in a.records.iter().filter(|r| r.solver.starts_with("hqa")) {
        assert!(r.energy <= md[&key(r)], "{} worse than md on {:?}", r.solver, key(r));
    }

    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in &a.records {
        groups.entry((r.solver.clone(), r.md_steps)).or_default().push(r.energy);
    }
    assert_eq!(groups.len(), a.report.rows.len());
    for ((solver, steps), values) in groups {
        let row = a.report.row(&solver, steps).unwrap();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert_eq!(row.energy.count, values.len());
        assert!((row.energy.mean - mean).abs() <= 1e-12 * mean.abs().max(1.0));
        assert!((row.energy.std - var.sqrt()).abs() <= 1e-12 * var.sqrt().max(1.0));
        assert_eq!(row.energy.min, values.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(row.energy.max, values.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        assert!(row.cut.is_none());
    }
}

#[test]
fn mirror_paired_maxcut_experiment() {
    let s = ExperimentSpec {
        source: ProblemSource::Generated {
            generator: GeneratorKind::BimodalComplete,
            n: 30,
            seeds: vec![1, 2],
        },
        mirror_pairing: true,
        init_seeds: vec![0],
        ..spec(30, vec![], vec![Pipeline::MdOnly], vec![1000])
    };
    for k in [0, 2] {
        let a = s.instance(k).unwrap();
        let b = s.instance(k + 1).unwrap();
        assert_eq!(a.cut_offset.unwrap() + b.cut_offset.unwrap(), 0.0);
    }
    let out = run_experiment(&s).unwrap();
    assert_eq!(out.records.len(), 4);
    assert!(out.records.iter().all(|r| r.cut.is_some()));
    assert_eq!(out.records.iter().filter(|r| r.mirrored).count(), 2);
    assert_eq!(out.report.reference_cut, Some(reference_line(ReferenceKind::ParisiCut, 30)));
}

#[test]
fn reference_line_delegates() {
    assert_eq!(reference_line("parisi_cut".parse().unwrap(), 2000), parisi_reference_cut(2000));
    assert!("ground_state".parse::<ReferenceKind>().is_err());
}

#[test]
fn study_hqa_mean_dominates_md_mean() {
    let inst = Instance::generate(GeneratorKind::BimodalComplete, 40, 9).unwrap();
    let md = MdSettings::with_steps(vec![2000]);
    let pipes = [Pipeline::MdOnly, hqa(12, Backend::Brute)];
    let rep = initial_condition_study(&inst, 10, &pipes, &md, None).unwrap();
    let m = rep.row("md", 2000).unwrap();
    let h = rep.row("hqa-brute-12", 2000).unwrap();
    assert_eq!(m.energies.len(), 10);
    for (a, b) in m.cuts.as_ref().unwrap().iter().zip(h.cuts.as_ref().unwrap()) {
        assert!(b >= a);
    }
    assert!(h.cut.unwrap().mean >= m.cut.unwrap().mean);
}

#[test]
fn study_spread_narrows_with_longer_runs() {
    let inst = Instance::generate(GeneratorKind::BimodalComplete, 200, 0).unwrap();
    let steps = vec![5_000, 50_000, 500_000];
    let md = MdSettings::with_steps(steps.clone());
    let rep = initial_condition_study(&inst, 8, &[Pipeline::MdOnly], &md, None).unwrap();
    let sigma: Vec<f64> = steps.iter().map(|&s| rep.row("md", s).unwrap().cut.unwrap().std).collect();
    assert!(sigma[0] > sigma[1] && sigma[1] > sigma[2], "cut sigma over steps: {sigma:?}");
}
