use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_warm_start, finish, flip_site, spin_of, SubsolverResult};
use crate::error::{contract, Result};
use crate::ising::{seeded_rng, IsingProblem, SpinConfig};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabuParams {
    /// Iterations a flipped site stays tabu; capped at `n / 4` (at least 1).
    pub tenure: usize,
    /// Defaults to `50 n`.
    pub max_iterations: Option<usize>,
    /// Non-improving iterations before stopping; defaults to `5 n`.
    pub stall_limit: Option<usize>,
    pub seed: u64,
}

impl Default for TabuParams {
    fn default() -> Self {
        Self {
            tenure: 20,
            max_iterations: None,
            stall_limit: None,
            seed: 0,
        }
    }
}

/// Best-improvement single-flip tabu search with recency tenure and aspiration.
///
/// Starts from the warm start or a seeded random configuration. Among equally
/// good moves one is picked uniformly at random.
pub fn tabu_search<T: Scalar>(
    problem: &IsingProblem<T>,
    params: &TabuParams,
    warm_start: Option<&SpinConfig>,
) -> Result<SubsolverResult<T>> {
    let started = Instant::now();
    contract!(params.tenure >= 1, "tabu tenure must be at least 1");
    check_warm_start(problem, warm_start)?;
    let n = problem.n_sites();
    let mut rng = seeded_rng(params.seed);
    let mut s = match warm_start {
        Some(w) => w.clone(),
        None => SpinConfig::random(n, &mut rng),
    };
    if n == 0 {
        return finish(problem, s, warm_start, "tabu", started, 0);
    }
    let tenure = params.tenure.min(n / 4).max(1);
    let max_iterations = params.max_iterations.unwrap_or(50 * n);
    let stall_limit = params.stall_limit.unwrap_or(5 * n);

    let mut local = problem.local_fields(&s);
    let mut energy = problem.energy(&s)?;
    let mut best = s.clone();
    let mut best_energy = energy;
    let mut tabu_until = vec![0usize; n];
    let mut stall = 0usize;
    let mut moves = 0u64;
    let two = T::of(2.0);

    for it in 1..=max_iterations {
        let mut chosen: Option<(usize, T)> = None;
        let mut ties = 0u32;
        for i in 0..n {
            let delta = -two * spin_of::<T>(&s, i) * local[i];
            let allowed = tabu_until[i] < it || energy + delta < best_energy;
            if !allowed {
                continue;
            }
            match chosen {
                Some((_, d)) if delta > d => {}
                Some((_, d)) if delta == d => {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        chosen = Some((i, delta));
                    }
                }
                _ => {
                    chosen = Some((i, delta));
                    ties = 1;
                }
            }
        }
        let Some((i, delta)) = chosen else { break };
        flip_site(problem, &mut s, &mut local, i);
        energy += delta;
        moves += 1;
        tabu_until[i] = it + tenure;
        if energy < best_energy {
            best.clone_from(&s);
            best_energy = energy;
            stall = 0;
        } else {
            stall += 1;
            if stall >= stall_limit {
                break;
            }
        }
    }
    finish(problem, best, warm_start, "tabu", started, moves)
}
