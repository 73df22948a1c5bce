use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::MdSettings;
use crate::error::{contract, Error, Result};
use crate::ising::{parisi_reference_cut, IsingProblem};
use crate::md::{md_hamiltonian, Leapfrog, DIVERGENCE_CHECK_EVERY};

/// Mean final `H_MD` per `(kappa2, steps)` cell, normalized by the reference cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityTable {
    pub kappa2: Vec<f64>,
    pub steps: Vec<usize>,
    /// `mean_h[k][s]` for `kappa2[k]` and `steps[s]`.
    pub mean_h: Vec<Vec<f64>>,
    pub ratio: Vec<Vec<f64>>,
    /// `(kappa2, steps)` of the normalizing cell.
    pub reference: (f64, usize),
    pub n_inits: usize,
}

impl AdiabaticityTable {
    pub fn ratio_at(&self, kappa2: f64, steps: usize) -> Option<f64> {
        let k = self.kappa2.iter().position(|&v| v == kappa2)?;
        let s = self.steps.iter().position(|&v| v == steps)?;
        Some(self.ratio[k][s])
    }
}

fn final_hamiltonian(problem: &IsingProblem<f64>, md: &MdSettings, kappa2: f64, steps: usize, seed: u64) -> Result<f64> {
    let schedule = md.schedule.with_kappa2(kappa2);
    let mut config = md.config(steps, seed);
    config.record_stride = 0;
    let mut lf = Leapfrog::new(problem, &schedule, &config, None)?;
    while !lf.is_finished() {
        lf.advance();
        let m = lf.step_index();
        if (m % DIVERGENCE_CHECK_EVERY == 0 || m == steps) && !lf.is_finite() {
            return Err(Error::Divergence { step: m });
        }
    }
    md_hamiltonian(problem, &lf.synchronized_state(), &schedule, config.potential_power)
}

/// Runs the MD engine over a `kappa2 x steps` grid with momentum seeds
/// `0..n_inits` and normalizes by the cell at `reference_kappa2` and the
/// largest step count. The rest of the schedule comes from `md`.
pub fn adiabaticity_sweep(
    problem: &IsingProblem<f64>,
    kappa2_values: &[f64],
    steps_values: &[usize],
    n_inits: usize,
    md: &MdSettings,
    reference_kappa2: f64,
) -> Result<AdiabaticityTable> {
    contract!(!kappa2_values.is_empty() && !steps_values.is_empty(), "sweep grid is empty");
    contract!(n_inits >= 1, "sweep needs at least one initial condition");
    for &k in kappa2_values {
        contract!((-1.0..=1.0).contains(&k), "kappa2 = {k} is outside [-1, 1]");
    }
    let kref = kappa2_values
        .iter()
        .position(|&k| k == reference_kappa2)
        .ok_or_else(|| Error::Contract(format!("reference kappa2 = {reference_kappa2} is not in the grid")))?;
    let sref = (0..steps_values.len()).max_by_key(|&s| steps_values[s]).expect("non-empty");
    for &steps in steps_values {
        md.config(steps, 0).validate()?;
    }

    let jobs: Vec<(usize, usize, u64)> = (0..kappa2_values.len())
        .flat_map(|k| (0..steps_values.len()).flat_map(move |s| (0..n_inits as u64).map(move |seed| (k, s, seed))))
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(k, s, seed)| final_hamiltonian(problem, md, kappa2_values[k], steps_values[s], seed))
        .collect::<Result<Vec<f64>>>()?;

    let mut mean_h = vec![vec![0.0; steps_values.len()]; kappa2_values.len()];
    for (&(k, s, _), v) in jobs.iter().zip(&values) {
        mean_h[k][s] += v / n_inits as f64;
    }
    let best = mean_h[kref][sref];
    contract!(best != 0.0, "reference cell has H_MD = 0 and cannot normalize");
    let ratio = mean_h
        .iter()
        .map(|row| row.iter().map(|h| h / best).collect())
        .collect();
    Ok(AdiabaticityTable {
        kappa2: kappa2_values.to_vec(),
        steps: steps_values.to_vec(),
        mean_h,
        ratio,
        reference: (reference_kappa2, steps_values[sref]),
        n_inits,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    ParisiCut,
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceKind::ParisiCut => f.write_str("parisi_cut"),
        }
    }
}

impl FromStr for ReferenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parisi_cut" | "parisi-cut" => Ok(ReferenceKind::ParisiCut),
            other => Err(Error::Contract(format!("unknown reference line `{other}`"))),
        }
    }
}

/// Reference value drawn alongside benchmark results.
pub fn reference_line(kind: ReferenceKind, n: usize) -> f64 {
    match kind {
        ReferenceKind::ParisiCut => parisi_reference_cut(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::generate::{gen_uniform_spinglass, DEFAULT_H_RANGE, DEFAULT_J_RANGE};

    #[test]
    fn reference_cell_is_one() {
        let p = gen_uniform_spinglass(12, 1, DEFAULT_J_RANGE, DEFAULT_H_RANGE).unwrap();
        let md = MdSettings::default();
        let t = adiabaticity_sweep(&p, &[-1.0, 1.0], &[200, 800], 2, &md, 1.0).unwrap();
        assert_eq!(t.ratio_at(1.0, 800), Some(1.0));
        assert_eq!(t.reference, (1.0, 800));
        assert_eq!(t.mean_h.len(), 2);
    }

    #[test]
    fn grid_is_validated() {
        let p = gen_uniform_spinglass(4, 1, DEFAULT_J_RANGE, DEFAULT_H_RANGE).unwrap();
        let md = MdSettings::default();
        assert!(adiabaticity_sweep(&p, &[1.5], &[100], 1, &md, 1.5).is_err());
        assert!(adiabaticity_sweep(&p, &[0.0], &[100], 1, &md, 1.0).is_err());
        assert!(adiabaticity_sweep(&p, &[1.0], &[], 1, &md, 1.0).is_err());
    }

    #[test]
    fn reference_kinds() {
        assert_eq!("parisi_cut".parse::<ReferenceKind>().unwrap(), ReferenceKind::ParisiCut);
        assert!("gs_energy".parse::<ReferenceKind>().is_err());
        assert_eq!(reference_line(ReferenceKind::ParisiCut, 200), parisi_reference_cut(200));
    }
}
