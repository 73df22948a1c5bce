use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_warm_start, finish, flip_site, spin_of, SubsolverResult};
use crate::error::{contract, Result};
use crate::ising::{seeded_rng, IsingProblem, SpinConfig};
use crate::scalar::Scalar;

/// Single-spin-flip Metropolis annealing with a geometric inverse-temperature ramp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub sweeps: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            sweeps: 1000,
            beta_initial: 0.01,
            beta_final: 1.0,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        contract!(self.sweeps >= 1, "annealing needs at least one sweep");
        contract!(
            self.beta_initial > 0.0 && self.beta_initial < self.beta_final && self.beta_final.is_finite(),
            "need 0 < beta_initial < beta_final, got {} and {}",
            self.beta_initial,
            self.beta_final
        );
        Ok(())
    }

    /// Factor applied to beta after every sweep.
    pub fn beta_ratio(&self) -> f64 {
        if self.sweeps <= 1 {
            1.0
        } else {
            (self.beta_final / self.beta_initial).powf(1.0 / (self.sweeps - 1) as f64)
        }
    }
}

/// Sweeps sites in index order, proposing one flip per site. Returns the
/// lowest-energy configuration seen.
pub fn simulated_annealing<T: Scalar>(
    problem: &IsingProblem<T>,
    params: &SaParams,
    warm_start: Option<&SpinConfig>,
) -> Result<SubsolverResult<T>> {
    let started = Instant::now();
    params.validate()?;
    check_warm_start(problem, warm_start)?;
    let n = problem.n_sites();
    let mut rng = seeded_rng(params.seed);
    let mut s = match warm_start {
        Some(w) => w.clone(),
        None => SpinConfig::random(n, &mut rng),
    };
    let mut local = problem.local_fields(&s);
    let mut energy = problem.energy(&s)?.as_f64();
    let mut best = s.clone();
    let mut best_energy = energy;
    // flips applied to `s` since `best` was last synchronized
    let mut pending: Vec<usize> = Vec::new();

    let ratio = params.beta_ratio();
    let mut beta = params.beta_initial;
    for _ in 0..params.sweeps {
        for i in 0..n {
            let delta = (-T::of(2.0) * spin_of::<T>(&s, i) * local[i]).as_f64();
            let accept = delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp();
            if !accept {
                continue;
            }
            flip_site(problem, &mut s, &mut local, i);
            energy += delta;
            pending.push(i);
            if energy < best_energy {
                for &k in &pending {
                    best.flip(k);
                }
                pending.clear();
                best_energy = energy;
            }
        }
        beta *= ratio;
    }
    finish(problem, best, warm_start, "sa", started, (params.sweeps * n) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{gen_uniform_spinglass, Interval};
    use crate::subsolvers::brute_force;

    #[test]
    fn independent_spins_align_against_fields() {
        let h = vec![0.5, -1.5, 2.0, -0.1, 0.3];
        let p = IsingProblem::from_pairs(5, [], h).unwrap();
        let r = simulated_annealing(&p, &SaParams::default(), None).unwrap();
        assert_eq!(r.spins.as_slice(), &[-1, 1, -1, 1, -1]);
    }

    #[test]
    fn optimal_warm_start_is_kept() {
        let p = gen_uniform_spinglass::<f64>(12, 1, Interval::new(-1.0, 1.0).unwrap(), Interval::new(-2.0, 2.0).unwrap())
            .unwrap();
        let opt = brute_force(&p, None).unwrap();
        let params = SaParams {
            sweeps: 5,
            ..SaParams::default()
        };
        let r = simulated_annealing(&p, &params, Some(&opt.spins)).unwrap();
        assert_eq!(r.energy, opt.energy);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = gen_uniform_spinglass::<f64>(30, 2, Interval::new(-1.0, 1.0).unwrap(), Interval::new(-2.0, 2.0).unwrap())
            .unwrap();
        let params = SaParams {
            sweeps: 50,
            seed: 4,
            ..SaParams::default()
        };
        let a = simulated_annealing(&p, &params, None).unwrap();
        let b = simulated_annealing(&p, &params, None).unwrap();
        assert_eq!(a.spins, b.spins);
        assert_eq!(a.energy, p.energy(&a.spins).unwrap());
    }

    #[test]
    fn invalid_parameters() {
        let p = IsingProblem::<f64>::from_pairs(2, [], vec![0.0; 2]).unwrap();
        for params in [
            SaParams { sweeps: 0, ..SaParams::default() },
            SaParams { beta_initial: 0.0, ..SaParams::default() },
            SaParams { beta_initial: 2.0, beta_final: 1.0, ..SaParams::default() },
        ] {
            assert!(simulated_annealing(&p, &params, None).is_err());
        }
    }

    #[test]
    fn geometric_ramp_ends_at_beta_final() {
        let p = SaParams::default();
        let end = p.beta_initial * p.beta_ratio().powi(p.sweeps as i32 - 1);
        assert!((end - p.beta_final).abs() < 1e-12);
    }
}
