use rand::Rng;
use serde::{Deserialize, Serialize};

use super::schedule::Schedule;
use super::window::FluxWindow;
use crate::error::{contract, Error, Result};
use crate::ising::{seeded_rng, IsingProblem};
use crate::scalar::Scalar;

/// Steps between finiteness checks of the state.
pub const DIVERGENCE_CHECK_EVERY: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdConfig {
    /// Number of steps over `tau` in `[0, 1]`; the step is `1 / steps`.
    pub steps: usize,
    /// Even exponent `M` of the confining potential `phi^M`.
    pub potential_power: u32,
    /// Length of the trailing average, in steps.
    pub window_steps: usize,
    /// Seed for the random initial momenta.
    pub seed: u64,
    /// Record a trajectory sample every this many steps; 0 disables recording.
    pub record_stride: usize,
    /// Multiplies both update lines. 1 ties the coupling rate to the step size.
    pub time_scale: f64,
}

impl Default for MdConfig {
    fn default() -> Self {
        Self {
            steps: 50_000,
            potential_power: 6,
            window_steps: 100,
            seed: 0,
            record_stride: 0,
            time_scale: 1.0,
        }
    }
}

impl MdConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            window_steps: 100.min(steps.max(1)),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        contract!(self.steps >= 1, "MD needs at least one step");
        contract!(
            self.potential_power >= 4 && self.potential_power % 2 == 0,
            "potential power must be even and at least 4, got {}",
            self.potential_power
        );
        contract!(
            self.window_steps >= 1 && self.window_steps <= self.steps,
            "window of {} steps must lie in 1..={}",
            self.window_steps,
            self.steps
        );
        contract!(
            self.time_scale.is_finite() && self.time_scale > 0.0,
            "time scale must be positive, got {}",
            self.time_scale
        );
        Ok(())
    }
}

/// Flux variables and momenta. `mom` is known at `mom_tau`, which trails `tau`
/// by half a step while integrating.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxState<T> {
    pub phi: Vec<T>,
    pub mom: Vec<T>,
    pub tau: T,
    pub mom_tau: T,
}

impl<T: Scalar> FluxState<T> {
    pub fn is_synchronized(&self) -> bool {
        self.mom_tau == self.tau
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeAveragedFlux<T> {
    pub phibar: Vec<T>,
    /// Averaging interval in units of `tau`.
    pub window: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample<T> {
    pub tau: T,
    pub phi: Vec<T>,
    pub phibar: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct MdRun<T> {
    /// State at `tau = 1` with momenta half a step behind.
    pub state: FluxState<T>,
    pub averaged: TimeAveragedFlux<T>,
    pub samples: Vec<TrajectorySample<T>>,
    pub steps: usize,
}

/// `-dH/dphi` without the kinetic term:
/// `-alpha M phi^{M-1} - 2 beta (1/2 sum_j J_ij phi_j + h_i |phi_i|)`.
pub fn force<T: Scalar>(problem: &IsingProblem<T>, phi: &[T], alpha: T, beta: T, power: u32) -> Result<Vec<T>> {
    contract!(
        phi.len() == problem.n_sites(),
        "flux vector has length {}, problem has {} sites",
        phi.len(),
        problem.n_sites()
    );
    let mut coupled = vec![T::zero(); phi.len()];
    problem.couple(phi, &mut coupled);
    let m = T::of_usize(power as usize);
    let two = T::of(2.0);
    Ok(phi
        .iter()
        .zip(&coupled)
        .zip(problem.fields())
        .map(|((&x, &c), &h)| -alpha * m * x.powi(power as i32 - 1) - beta * c - two * beta * h * x.abs())
        .collect())
}

/// `alpha (sum p^2/2 + phi^M) + beta (1/2 sum_{i != j} J phi phi + sum h |phi| phi)`
/// at `state.tau`. Momenta must be synchronized with the fluxes.
pub fn md_hamiltonian<T: Scalar>(
    problem: &IsingProblem<T>,
    state: &FluxState<T>,
    schedule: &Schedule<T>,
    power: u32,
) -> Result<T> {
    contract!(
        state.is_synchronized(),
        "momenta at tau = {} are not synchronized with fluxes at tau = {}",
        state.mom_tau,
        state.tau
    );
    let n = problem.n_sites();
    contract!(
        state.phi.len() == n && state.mom.len() == n,
        "state dimensions do not match the problem"
    );
    let half = T::of(0.5);
    let mut coupled = vec![T::zero(); n];
    problem.couple(&state.phi, &mut coupled);
    let mut local = T::zero();
    let mut ising = T::zero();
    for i in 0..n {
        let (x, p) = (state.phi[i], state.mom[i]);
        local += half * p * p + x.powi(power as i32);
        ising += half * coupled[i] * x + problem.fields()[i] * x.abs() * x;
    }
    Ok(schedule.alpha(state.tau) * local + schedule.beta(state.tau) * ising)
}

/// Leapfrog integrator for the scheduled flux Hamiltonian.
///
/// Starts at `phi = 0`. The first [`advance`](Self::advance) applies the
/// initial half kick at `tau = 0` followed by a drift; each later call applies
/// a full kick at `tau = m dtau` and a drift with `alpha((m + 1/2) dtau)`.
pub struct Leapfrog<'a, T> {
    problem: &'a IsingProblem<T>,
    schedule: Schedule<T>,
    power: u32,
    steps: usize,
    dtau: T,
    scale: T,
    step: usize,
    phi: Vec<T>,
    mom: Vec<T>,
    coupled: Vec<T>,
}

impl<'a, T: Scalar> Leapfrog<'a, T> {
    pub fn new(
        problem: &'a IsingProblem<T>,
        schedule: &Schedule<T>,
        config: &MdConfig,
        p0: Option<&[T]>,
    ) -> Result<Self> {
        config.validate()?;
        let n = problem.n_sites();
        let mom = match p0 {
            Some(p) => {
                contract!(p.len() == n, "initial momenta have length {}, expected {n}", p.len());
                contract!(
                    p.iter().all(|&x| x == T::one() || x == -T::one()),
                    "initial momenta must be +1 or -1"
                );
                p.to_vec()
            }
            None => {
                let mut rng = seeded_rng(config.seed);
                (0..n)
                    .map(|_| if rng.gen::<bool>() { T::one() } else { -T::one() })
                    .collect()
            }
        };
        Ok(Self {
            problem,
            schedule: *schedule,
            power: config.potential_power,
            steps: config.steps,
            dtau: T::one() / T::of_usize(config.steps),
            scale: T::of(config.time_scale),
            step: 0,
            phi: vec![T::zero(); n],
            mom,
            coupled: vec![T::zero(); n],
        })
    }

    /// Index `m` of the current fluxes `phi^(m)`.
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.steps
    }

    pub fn tau(&self) -> T {
        self.tau_at(self.step)
    }

    fn tau_at(&self, m: usize) -> T {
        if m == self.steps {
            T::one()
        } else {
            T::of_usize(m) * self.dtau
        }
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    /// Adds `weight * force(phi, tau)` to the momenta.
    fn kick(&mut self, tau: T, weight: T) {
        let alpha = self.schedule.alpha(tau);
        let beta = self.schedule.beta(tau);
        let m = T::of_usize(self.power as usize);
        let two = T::of(2.0);
        let exp = self.power as i32 - 1;
        self.problem.couple(&self.phi, &mut self.coupled);
        let fields = self.problem.fields();
        for i in 0..self.phi.len() {
            let x = self.phi[i];
            let f = -alpha * m * x.powi(exp) - beta * self.coupled[i] - two * beta * fields[i] * x.abs();
            self.mom[i] += weight * f;
        }
    }

    fn drift(&mut self, tau_half: T) {
        let a = self.scale * self.schedule.alpha(tau_half);
        for (x, p) in self.phi.iter_mut().zip(&self.mom) {
            *x += a * *p;
        }
    }

    /// Advances the fluxes by one step.
    pub fn advance(&mut self) {
        debug_assert!(!self.is_finished());
        let half = T::of(0.5);
        let tau = self.tau();
        if self.step == 0 {
            self.kick(tau, half * self.scale);
        } else {
            self.kick(tau, self.scale);
        }
        self.drift(tau + half * self.dtau);
        self.step += 1;
    }

    pub fn is_finite(&self) -> bool {
        self.phi.iter().chain(&self.mom).all(|v| v.is_finite())
    }

    /// Current state with momenta as stored (half a step behind after the first advance).
    pub fn state(&self) -> FluxState<T> {
        let tau = self.tau();
        let mom_tau = if self.step == 0 {
            tau
        } else {
            tau - T::of(0.5) * self.dtau
        };
        FluxState {
            phi: self.phi.clone(),
            mom: self.mom.clone(),
            tau,
            mom_tau,
        }
    }

    /// Current state with momenta brought to `tau` by a temporary half kick.
    pub fn synchronized_state(&self) -> FluxState<T> {
        let mut state = self.state();
        if self.step > 0 {
            let f = force(
                self.problem,
                &self.phi,
                self.schedule.alpha(state.tau),
                self.schedule.beta(state.tau),
                self.power,
            )
            .expect("dimensions checked at construction");
            let w = T::of(0.5) * self.scale;
            for (p, f) in state.mom.iter_mut().zip(f) {
                *p += w * f;
            }
            state.mom_tau = state.tau;
        }
        state
    }
}

/// Integrates from `tau = 0` to `tau = 1` and returns the final state, the
/// trailing-window average of the fluxes and any recorded samples.
pub fn leapfrog_run<T: Scalar>(
    problem: &IsingProblem<T>,
    schedule: &Schedule<T>,
    config: &MdConfig,
    p0: Option<&[T]>,
) -> Result<MdRun<T>> {
    let mut lf = Leapfrog::new(problem, schedule, config, p0)?;
    let mut window = FluxWindow::new(problem.n_sites(), config.window_steps);
    let mut samples = Vec::new();
    while !lf.is_finished() {
        lf.advance();
        let m = lf.step_index();
        if (m % DIVERGENCE_CHECK_EVERY == 0 || m == config.steps) && !lf.is_finite() {
            return Err(Error::Divergence { step: m });
        }
        if m + config.window_steps > config.steps || config.record_stride > 0 {
            window.push(lf.phi());
        }
        if config.record_stride > 0 && m % config.record_stride == 0 {
            samples.push(TrajectorySample {
                tau: lf.tau(),
                phi: lf.phi().to_vec(),
                phibar: window.mean(),
            });
        }
    }
    let dtau = T::one() / T::of_usize(config.steps);
    Ok(MdRun {
        state: lf.state(),
        averaged: TimeAveragedFlux {
            phibar: window.mean(),
            window: T::of_usize(config.window_steps) * dtau,
        },
        samples,
        steps: config.steps,
    })
}
