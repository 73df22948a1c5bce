//! Interchangeable Ising solvers for reduced (or full) problems.
//!
//! Every backend returns a [`SubsolverResult`] whose energy is recomputed from
//! the returned spins and is never worse than a supplied warm start.

mod anneal;
mod brute;
pub mod loopback;
pub mod remote;
mod tabu;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use anneal::{simulated_annealing, SaParams};
pub use brute::{brute_force, BRUTE_FORCE_MAX_SITES};
pub use remote::{remote_solve, RemoteConfig, SolveRequest, SolveResponse, TOKEN_ENV};
pub use tabu::{tabu_search, TabuParams};

use crate::error::{contract, Result};
use crate::ising::{IsingProblem, SpinConfig};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SubsolverResult<T> {
    pub spins: SpinConfig,
    pub energy: T,
    pub backend: String,
    pub elapsed: Duration,
    /// The warm start was better than what the backend found and was returned instead.
    pub warm_start_used: bool,
    /// Single-spin moves proposed (annealing) or made (tabu, exhaustive search).
    pub spin_updates: u64,
}

/// Solver selection with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Backend {
    Brute,
    Sa(SaParams),
    Tabu(TabuParams),
    Remote(RemoteConfig),
}

impl Backend {
    pub fn id(&self) -> &'static str {
        match self {
            Backend::Brute => "brute",
            Backend::Sa(_) => "sa",
            Backend::Tabu(_) => "tabu",
            Backend::Remote(_) => "remote",
        }
    }

    /// Same backend with its random seed replaced (no-op for seedless backends).
    pub fn reseeded(&self, seed: u64) -> Self {
        match self {
            Backend::Sa(p) => Backend::Sa(SaParams { seed, ..p.clone() }),
            Backend::Tabu(p) => Backend::Tabu(TabuParams { seed, ..p.clone() }),
            other => other.clone(),
        }
    }
}

pub fn solve<T: Scalar>(
    problem: &IsingProblem<T>,
    backend: &Backend,
    warm_start: Option<&SpinConfig>,
) -> Result<SubsolverResult<T>> {
    match backend {
        Backend::Brute => brute_force(problem, warm_start),
        Backend::Sa(p) => simulated_annealing(problem, p, warm_start),
        Backend::Tabu(p) => tabu_search(problem, p, warm_start),
        Backend::Remote(c) => remote_solve(problem, c, warm_start),
    }
}

pub(crate) fn check_warm_start<T: Scalar>(problem: &IsingProblem<T>, warm: Option<&SpinConfig>) -> Result<()> {
    if let Some(w) = warm {
        contract!(
            w.len() == problem.n_sites(),
            "warm start has length {}, problem has {} sites",
            w.len(),
            problem.n_sites()
        );
    }
    Ok(())
}

/// Recomputes the energy of `found` and swaps in the warm start if it is strictly better.
pub(crate) fn finish<T: Scalar>(
    problem: &IsingProblem<T>,
    found: SpinConfig,
    warm: Option<&SpinConfig>,
    backend: &str,
    started: Instant,
    spin_updates: u64,
) -> Result<SubsolverResult<T>> {
    let mut spins = found;
    let mut energy = problem.energy(&spins)?;
    let mut warm_start_used = false;
    if let Some(w) = warm {
        let we = problem.energy(w)?;
        if we < energy {
            spins = w.clone();
            energy = we;
            warm_start_used = true;
        }
    }
    Ok(SubsolverResult {
        spins,
        energy,
        backend: backend.to_string(),
        elapsed: started.elapsed(),
        warm_start_used,
        spin_updates,
    })
}

/// Steepest single-flip descent to a local minimum.
pub fn greedy_descent<T: Scalar>(problem: &IsingProblem<T>, start: &SpinConfig) -> Result<SpinConfig> {
    contract!(start.len() == problem.n_sites(), "configuration length does not match problem");
    let mut s = start.clone();
    let mut local = problem.local_fields(&s);
    let two = T::of(2.0);
    loop {
        let mut best: Option<(usize, T)> = None;
        for (i, &l) in local.iter().enumerate() {
            let delta = -two * spin_of::<T>(&s, i) * l;
            if delta < T::zero() && best.map_or(true, |(_, d)| delta < d) {
                best = Some((i, delta));
            }
        }
        let Some((i, _)) = best else { return Ok(s) };
        flip_site(problem, &mut s, &mut local, i);
    }
}

#[inline]
pub(crate) fn spin_of<T: Scalar>(s: &SpinConfig, i: usize) -> T {
    if s.get(i) > 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Flips site `i` and updates the local fields `sum_j J_ij s_j + h_i`.
#[inline]
pub(crate) fn flip_site<T: Scalar>(problem: &IsingProblem<T>, s: &mut SpinConfig, local: &mut [T], i: usize) {
    s.flip(i);
    let shift = T::of(2.0) * spin_of::<T>(s, i);
    problem.for_each_in_row(i, |j, v| local[j] += shift * v);
}
