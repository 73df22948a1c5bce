//! Ising model representation, MAX-CUT mapping and instance generation.

pub mod generate;
pub mod io;
pub mod maxcut;
pub mod parisi;
pub mod problem;

pub use generate::{gen_bimodal_complete, gen_uniform_spinglass, seeded_rng, Interval, InstanceRng};
pub use maxcut::{cut_from_energy, cut_value, maxcut_offset, maxcut_to_ising, CutReport, WeightMatrix};
pub use parisi::{parisi_reference_cut, parisi_reference_energy};
pub use problem::{mirror, IsingProblem, SpinConfig, Storage, DENSE_LIMIT};

use crate::error::Result;
use crate::scalar::Scalar;

/// Ising energy of `s` under `problem`.
pub fn energy<T: Scalar>(problem: &IsingProblem<T>, s: &SpinConfig) -> Result<T> {
    problem.energy(s)
}
