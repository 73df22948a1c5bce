use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::ising::generate::{DEFAULT_H_RANGE, DEFAULT_J_RANGE};
use crate::ising::{gen_bimodal_complete, gen_uniform_spinglass, io, maxcut_offset, maxcut_to_ising, IsingProblem};
use crate::md::{MdConfig, Schedule};
use crate::subsolvers::Backend;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// MAX-CUT on `K_n` with `+1`/`-1` weights.
    BimodalComplete,
    /// Dense spin glass with `J` in `[-1, 1]`, `h` in `[-2, 2]`.
    UniformSg,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::BimodalComplete => "bimodal-complete",
            GeneratorKind::UniformSg => "uniform-sg",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bimodal-complete" => Ok(GeneratorKind::BimodalComplete),
            "uniform-sg" => Ok(GeneratorKind::UniformSg),
            other => Err(Error::Contract(format!("unknown generator `{other}`"))),
        }
    }
}

/// One problem of an experiment, with the MAX-CUT offset when it came from a graph.
#[derive(Clone, Debug)]
pub struct Instance {
    pub label: String,
    pub seed: Option<u64>,
    pub mirrored: bool,
    pub problem: IsingProblem<f64>,
    pub cut_offset: Option<f64>,
}

impl Instance {
    pub fn generate(kind: GeneratorKind, n: usize, seed: u64) -> Result<Self> {
        let (problem, cut_offset) = match kind {
            GeneratorKind::BimodalComplete => {
                let (p, c0) = maxcut_to_ising(&gen_bimodal_complete::<f64>(n, seed)?)?;
                (p, Some(c0))
            }
            GeneratorKind::UniformSg => (gen_uniform_spinglass(n, seed, DEFAULT_J_RANGE, DEFAULT_H_RANGE)?, None),
        };
        Ok(Self {
            label: format!("{kind}-n{n}-s{seed}"),
            seed: Some(seed),
            mirrored: false,
            problem,
            cut_offset,
        })
    }

    /// The same instance with negated couplings.
    pub fn mirror(&self) -> Self {
        let problem = self.problem.mirror();
        let cut_offset = self.cut_offset.map(|_| maxcut_offset(&problem));
        Self {
            label: format!("{}-mirror", self.label),
            seed: self.seed,
            mirrored: !self.mirrored,
            problem,
            cut_offset,
        }
    }

    /// Loads an instance file; `maxcut` marks it as a graph mapped with `J = w`, `h = 0`.
    pub fn load(path: &std::path::Path, maxcut: bool) -> Result<Self> {
        let problem: IsingProblem<f64> = io::load_instance(path)?;
        let cut_offset = if maxcut {
            contract!(
                problem.fields().iter().all(|&h| h == 0.0),
                "{} has non-zero fields and cannot be a MAX-CUT instance",
                path.display()
            );
            Some(maxcut_offset(&problem))
        } else {
            None
        };
        Ok(Self {
            label: path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            seed: None,
            mirrored: false,
            problem,
            cut_offset,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemSource {
    Generated {
        generator: GeneratorKind,
        n: usize,
        seeds: Vec<u64>,
    },
    Files {
        paths: Vec<PathBuf>,
        maxcut: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdSettings {
    /// Step counts to run; each gives its own set of records.
    pub steps: Vec<usize>,
    pub potential_power: u32,
    pub window_steps: usize,
    pub time_scale: f64,
    pub record_stride: usize,
    pub schedule: Schedule<f64>,
}

impl Default for MdSettings {
    fn default() -> Self {
        let c = MdConfig::default();
        Self {
            steps: vec![c.steps],
            potential_power: c.potential_power,
            window_steps: c.window_steps,
            time_scale: c.time_scale,
            record_stride: 0,
            schedule: Schedule::reference(),
        }
    }
}

impl MdSettings {
    pub fn with_steps(steps: Vec<usize>) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }

    /// Engine configuration for one run; the window is capped at the step count.
    pub fn config(&self, steps: usize, seed: u64) -> MdConfig {
        MdConfig {
            steps,
            potential_power: self.potential_power,
            window_steps: self.window_steps.min(steps),
            seed,
            record_stride: self.record_stride,
            time_scale: self.time_scale,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "kebab-case")]
pub enum Pipeline {
    /// Sign projection of the averaged fluxes.
    MdOnly,
    /// Freeze all but `n_ambivalent` sites and solve the rest with `backend`.
    Hqa { n_ambivalent: usize, backend: Backend },
}

impl Pipeline {
    pub fn label(&self) -> String {
        match self {
            Pipeline::MdOnly => "md".to_string(),
            Pipeline::Hqa { n_ambivalent, backend } => format!("hqa-{}-{n_ambivalent}", backend.id()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub source: ProblemSource,
    /// Follow every generated instance with its mirror `-J`.
    pub mirror_pairing: bool,
    pub md: MdSettings,
    pub pipelines: Vec<Pipeline>,
    /// Solvers run directly on the full problem, once per instance and seed.
    pub baselines: Vec<Backend>,
    /// Seeds for the initial momenta (and for seeded backends).
    pub init_seeds: Vec<u64>,
    /// Local backend used when a remote backend fails.
    pub fallback: Option<Backend>,
    /// Where to write trajectories of the first instance and seed, if recording.
    #[serde(default)]
    pub trajectory_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        contract!(!self.init_seeds.is_empty(), "experiment needs at least one initial seed");
        contract!(
            !self.pipelines.is_empty() || !self.baselines.is_empty(),
            "experiment has nothing to run"
        );
        if !self.pipelines.is_empty() {
            contract!(!self.md.steps.is_empty(), "experiment needs at least one MD step count");
            for &steps in &self.md.steps {
                self.md.config(steps, 0).validate()?;
            }
        }
        if let ProblemSource::Generated { n, seeds, .. } = &self.source {
            contract!(!seeds.is_empty(), "experiment needs at least one instance seed");
            for p in &self.pipelines {
                if let Pipeline::Hqa { n_ambivalent, .. } = p {
                    contract!(
                        n_ambivalent <= n,
                        "n_ambivalent = {n_ambivalent} exceeds problem size {n}"
                    );
                }
            }
        }
        if let Some(fb) = &self.fallback {
            contract!(!matches!(fb, Backend::Remote(_)), "fallback backend must be local");
        }
        Ok(())
    }

    pub fn instance_count(&self) -> usize {
        match &self.source {
            ProblemSource::Generated { seeds, .. } => seeds.len() * if self.mirror_pairing { 2 } else { 1 },
            ProblemSource::Files { paths, .. } => paths.len() * if self.mirror_pairing { 2 } else { 1 },
        }
    }

    /// Builds instance `k`; with mirror pairing odd indices are mirrors.
    pub fn instance(&self, k: usize) -> Result<Instance> {
        let (base, mirrored) = if self.mirror_pairing { (k / 2, k % 2 == 1) } else { (k, false) };
        let inst = match &self.source {
            ProblemSource::Generated { generator, n, seeds } => Instance::generate(*generator, *n, seeds[base])?,
            ProblemSource::Files { paths, maxcut } => Instance::load(&paths[base], *maxcut)?,
        };
        Ok(if mirrored { inst.mirror() } else { inst })
    }
}
