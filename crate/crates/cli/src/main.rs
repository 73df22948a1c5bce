use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fluxanneal_core::harness::{
    adiabaticity_sweep, initial_condition_study, run_experiment, write_outputs, ExperimentSpec, FailureKind,
    GeneratorKind, Instance, MdSettings, Pipeline, ProblemSource,
};
use fluxanneal_core::ising::io::save_instance;
use fluxanneal_core::ising::parisi_reference_cut;
use fluxanneal_core::md::{leapfrog_run, save_trajectory, Schedule};
use fluxanneal_core::reducer::make_partition;
use fluxanneal_core::subsolvers::{Backend, RemoteConfig, SaParams, TabuParams};
use fluxanneal_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;
const EXIT_REMOTE: u8 = 4;

#[derive(Parser)]
#[command(name = "fluxanneal", version, about = "Hybrid annealing of Ising problems via flux dynamics")]
struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instance files.
    Gen(GenArgs),
    /// Run pipelines and baselines, writing records.jsonl and aggregate.json.
    Run(RunArgs),
    /// Adiabaticity sweep over kappa2, or an initial-condition study.
    Sweep(SweepArgs),
    /// Summarize an instance and optionally the partition an MD run produces.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    BimodalComplete,
    UniformSg,
}

impl From<GenKind> for GeneratorKind {
    fn from(k: GenKind) -> Self {
        match k {
            GenKind::BimodalComplete => GeneratorKind::BimodalComplete,
            GenKind::UniformSg => GeneratorKind::UniformSg,
        }
    }
}

#[derive(Args)]
struct SourceArgs {
    /// Instance file; repeat for several.
    #[arg(long, conflicts_with = "gen")]
    instance: Vec<PathBuf>,
    /// Treat instance files as MAX-CUT graphs (weights as couplings, no fields).
    #[arg(long, requires = "instance")]
    maxcut: bool,
    #[arg(long, value_enum)]
    gen: Option<GenKind>,
    #[arg(long, requires = "gen")]
    n: Option<usize>,
    /// First instance seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of generated instances, with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Follow every instance with its mirror `-J`.
    #[arg(long)]
    mirror_pairs: bool,
}

impl SourceArgs {
    fn source(&self) -> anyhow::Result<ProblemSource> {
        match (self.gen, self.instance.is_empty()) {
            (Some(g), true) => {
                let Some(n) = self.n else { bail!(config("--gen needs --n")) };
                Ok(ProblemSource::Generated {
                    generator: g.into(),
                    n,
                    seeds: (self.seed..self.seed + self.count as u64).collect(),
                })
            }
            (None, false) => Ok(ProblemSource::Files {
                paths: self.instance.clone(),
                maxcut: self.maxcut,
            }),
            _ => bail!(config("give either --instance FILE or --gen KIND --n N")),
        }
    }

    fn instances(&self) -> anyhow::Result<Vec<Instance>> {
        let spec = ExperimentSpec {
            source: self.source()?,
            mirror_pairing: self.mirror_pairs,
            md: MdSettings::default(),
            pipelines: vec![Pipeline::MdOnly],
            baselines: vec![],
            init_seeds: vec![0],
            fallback: None,
            trajectory_dir: None,
        };
        (0..spec.instance_count()).map(|k| Ok(spec.instance(k)?)).collect()
    }

    fn single(&self) -> anyhow::Result<Instance> {
        let mut all = self.instances()?;
        if all.len() != 1 {
            bail!(config("this command takes exactly one instance"));
        }
        Ok(all.pop().expect("one instance"))
    }
}

#[derive(Args)]
struct MdArgs {
    /// MD step counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "50000")]
    md_steps: Vec<usize>,
    #[arg(long, default_value_t = 6)]
    potential_power: u32,
    /// Trailing averaging window in steps.
    #[arg(long, default_value_t = 100)]
    window: usize,
    /// Schedule coefficients `a_f,r1,r2,b_f,k1,k2`.
    #[arg(long, allow_hyphen_values = true)]
    schedule: Option<String>,
    /// Multiplier on both leapfrog update lines.
    #[arg(long, default_value_t = 1.0)]
    time_scale: f64,
    /// Record the trajectory every this many steps (0 = off).
    #[arg(long, default_value_t = 0)]
    record_stride: usize,
}

impl MdArgs {
    fn settings(&self) -> anyhow::Result<MdSettings> {
        let schedule = match &self.schedule {
            Some(text) => Schedule::parse(text)?,
            None => Schedule::reference(),
        };
        Ok(MdSettings {
            steps: self.md_steps.clone(),
            potential_power: self.potential_power,
            window_steps: self.window,
            time_scale: self.time_scale,
            record_stride: self.record_stride,
            schedule,
        })
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PipelineKind {
    Md,
    Hqa,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Brute,
    Sa,
    Tabu,
    Remote,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum LocalKind {
    None,
    Brute,
    Sa,
    Tabu,
}

#[derive(Args)]
struct PipelineArgs {
    /// Pipelines to run, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "md")]
    pipeline: Vec<PipelineKind>,
    /// Sites handed to the subsolver by the hqa pipeline.
    #[arg(long)]
    n_ambivalent: Option<usize>,
    #[arg(long, value_enum, default_value = "tabu")]
    backend: BackendKind,
    /// Remote annealer base URI (for `--backend remote`).
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value_t = 30_000)]
    remote_timeout_ms: u64,
    /// Local backend used when the remote one fails.
    #[arg(long, value_enum, default_value = "none")]
    fallback: LocalKind,
}

impl PipelineArgs {
    fn backend(&self) -> anyhow::Result<Backend> {
        Ok(match self.backend {
            BackendKind::Brute => Backend::Brute,
            BackendKind::Sa => Backend::Sa(SaParams::default()),
            BackendKind::Tabu => Backend::Tabu(TabuParams::default()),
            BackendKind::Remote => {
                let Some(endpoint) = &self.endpoint else { bail!(config("--backend remote needs --endpoint")) };
                Backend::Remote(
                    RemoteConfig::new(endpoint.clone()).with_timeout(Duration::from_millis(self.remote_timeout_ms)),
                )
            }
        })
    }

    fn pipelines(&self) -> anyhow::Result<Vec<Pipeline>> {
        let mut out = Vec::new();
        for kind in &self.pipeline {
            out.push(match kind {
                PipelineKind::Md => Pipeline::MdOnly,
                PipelineKind::Hqa => {
                    let Some(n_ambivalent) = self.n_ambivalent else {
                        bail!(config("--pipeline hqa needs --n-ambivalent"))
                    };
                    Pipeline::Hqa {
                        n_ambivalent,
                        backend: self.backend()?,
                    }
                }
            });
        }
        Ok(out)
    }

    fn fallback(&self) -> Option<Backend> {
        local_backend(self.fallback)
    }
}

fn local_backend(kind: LocalKind) -> Option<Backend> {
    match kind {
        LocalKind::None => None,
        LocalKind::Brute => Some(Backend::Brute),
        LocalKind::Sa => Some(Backend::Sa(SaParams::default())),
        LocalKind::Tabu => Some(Backend::Tabu(TabuParams::default())),
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Directory for the generated `.ising` files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    md: MdArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Full-problem baselines, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    baselines: Vec<LocalKind>,
    /// Number of initial conditions (momentum seeds 0..inits).
    #[arg(long, default_value_t = 1)]
    inits: u64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SweepMode {
    Adiabaticity,
    Inits,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    md: MdArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value = "adiabaticity")]
    mode: SweepMode,
    /// kappa2 values for the adiabaticity sweep.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0,1")]
    kappa2: Vec<f64>,
    /// kappa2 of the normalizing cell.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    reference_kappa2: f64,
    #[arg(long, default_value_t = 10)]
    inits: usize,
    /// Directory for the JSON result.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    md: MdArgs,
    /// Run MD and print the partition with this many ambivalent sites.
    #[arg(long)]
    n_ambivalent: Option<usize>,
    /// Momentum seed for the MD run.
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
    /// Directory for partition.json and the trajectory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(msg: &str) -> Error {
    Error::Contract(msg.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Inspect(a) => inspect(a),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Divergence { .. }) => EXIT_DIVERGENCE,
        Some(Error::Remote(_)) => EXIT_REMOTE,
        _ => EXIT_CONFIG,
    }
}

fn gen(args: GenArgs) -> anyhow::Result<ExitCode> {
    if args.source.gen.is_none() {
        bail!(config("gen needs --gen KIND --n N"));
    }
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for inst in args.source.instances()? {
        let path = args.out.join(format!("{}.ising", inst.label));
        save_instance(&inst.problem, &path)?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let mut baselines = Vec::new();
    for &b in &args.baselines {
        match local_backend(b) {
            Some(backend) => baselines.push(backend),
            None => bail!(config("`none` is not a baseline")),
        }
    }
    if args.inits == 0 {
        bail!(config("--inits must be at least 1"));
    }
    let spec = ExperimentSpec {
        source: args.source.source()?,
        mirror_pairing: args.source.mirror_pairs,
        md: args.md.settings()?,
        pipelines: args.pipeline.pipelines()?,
        baselines,
        init_seeds: (0..args.inits).collect(),
        fallback: args.pipeline.fallback(),
        trajectory_dir: (args.md.record_stride > 0).then(|| args.out.join("trajectories")),
    };
    let output = run_experiment(&spec)?;
    write_outputs(&output, &args.out)?;

    println!("{:<22} {:>9} {:>6} {:>16} {:>12} {:>16}", "solver", "md_steps", "count", "mean_energy", "std", "mean_cut");
    for row in &output.report.rows {
        let cut = row.cut.map(|c| format!("{:.3}", c.mean)).unwrap_or_else(|| "-".into());
        println!(
            "{:<22} {:>9} {:>6} {:>16.6} {:>12.6} {:>16}",
            row.solver, row.md_steps, row.energy.count, row.energy.mean, row.energy.std, cut
        );
    }
    if let Some(c) = output.report.reference_cut {
        println!("reference cut: {c:.3}");
    }
    println!("wrote {}", args.out.display());

    for f in &output.failures {
        eprintln!("failed: {} init {} {} ({} steps): {}", f.instance, f.init_seed, f.solver, f.md_steps, f.error);
    }
    let kinds: Vec<FailureKind> = output.failures.iter().map(|f| f.kind).collect();
    Ok(if kinds.contains(&FailureKind::Remote) {
        ExitCode::from(EXIT_REMOTE)
    } else if kinds.contains(&FailureKind::Divergence) {
        ExitCode::from(EXIT_DIVERGENCE)
    } else if kinds.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CONFIG)
    })
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let instance = args.source.single()?;
    let md = args.md.settings()?;
    match args.mode {
        SweepMode::Adiabaticity => {
            let table = adiabaticity_sweep(
                &instance.problem,
                &args.kappa2,
                &md.steps,
                args.inits,
                &md,
                args.reference_kappa2,
            )?;
            print!("{:>8}", "kappa2");
            for s in &table.steps {
                print!(" {s:>12}");
            }
            println!();
            for (k, row) in table.kappa2.iter().zip(&table.ratio) {
                print!("{k:>8}");
                for r in row {
                    print!(" {r:>12.6}");
                }
                println!();
            }
            if let Some(dir) = &args.out {
                write_json(dir, "adiabaticity.json", &table)?;
            }
        }
        SweepMode::Inits => {
            let pipelines = args.pipeline.pipelines()?;
            let fallback = args.pipeline.fallback();
            let report = initial_condition_study(&instance, args.inits, &pipelines, &md, fallback.as_ref())?;
            println!("{:<22} {:>9} {:>16} {:>12}", "solver", "md_steps", "mean_energy", "std");
            for row in &report.rows {
                println!("{:<22} {:>9} {:>16.6} {:>12.6}", row.solver, row.md_steps, row.energy.mean, row.energy.std);
            }
            if let Some(dir) = &args.out {
                write_json(dir, "study.json", &report)?;
            }
            if let Some(f) = report.failures.first() {
                eprintln!("{} runs failed, first: {}", report.failures.len(), f.error);
                return Ok(ExitCode::from(match f.kind {
                    FailureKind::Remote => EXIT_REMOTE,
                    FailureKind::Divergence => EXIT_DIVERGENCE,
                    FailureKind::Other => EXIT_CONFIG,
                }));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn inspect(args: InspectArgs) -> anyhow::Result<ExitCode> {
    let instance = args.source.single()?;
    let p = &instance.problem;
    let fields = p.fields();
    let mut summary = serde_json::json!({
        "label": instance.label,
        "n": p.n_sites(),
        "storage": format!("{:?}", p.storage()),
        "nonzero_couplings": p.n_pairs(),
        "nonzero_fields": fields.iter().filter(|&&h| h != 0.0).count(),
        "max_abs_field": fields.iter().fold(0.0f64, |m, h| m.max(h.abs())),
        "cut_offset": instance.cut_offset,
    });
    if instance.cut_offset.is_some() {
        summary["reference_cut"] = parisi_reference_cut(p.n_sites()).into();
    }

    if let Some(n_amb) = args.n_ambivalent {
        let md = args.md.settings()?;
        let &[steps] = md.steps.as_slice() else { bail!(config("inspect takes a single --md-steps value")) };
        let run = leapfrog_run(p, &md.schedule, &md.config(steps, args.init_seed), None)?;
        let part = make_partition(&run.averaged.phibar, n_amb, 0.0)?;
        let mean_abs = |sites: &mut dyn Iterator<Item = usize>| {
            let v: Vec<f64> = sites.map(|i| run.averaged.phibar[i].abs()).collect();
            if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 }
        };
        summary["md_steps"] = steps.into();
        summary["mean_abs_phibar_ambivalent"] = mean_abs(&mut part.ambivalent().iter().copied()).into();
        summary["mean_abs_phibar_frozen"] = mean_abs(&mut part.frozen_spins.keys().copied()).into();
        if let Some(dir) = &args.out {
            fs::create_dir_all(dir)?;
            let path = dir.join("partition.json");
            fs::write(&path, part.to_json()?)?;
            summary["partition"] = path.display().to_string().into();
            if !run.samples.is_empty() {
                let path = dir.join("trajectory.csv.gz");
                save_trajectory(&run.samples, &path)?;
                summary["trajectory"] = path.display().to_string().into();
            }
        } else {
            summary["partition"] = serde_json::from_str::<serde_json::Value>(&part.to_json()?)?;
        }
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ExitCode::SUCCESS)
}
