//! Hybrid annealing for Ising spin glasses and MAX-CUT.
//!
//! A classical molecular-dynamics run over continuous flux variables sorts the
//! spins into *frozen* ones, fixed by the sign of their time-averaged flux, and
//! *ambivalent* ones. The ambivalent spins form a reduced Ising problem that is
//! handed to a pluggable subsolver (exhaustive search, simulated annealing,
//! tabu search or a remote annealer).
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, the precision used by the experiment harness.

pub mod error;
pub mod harness;
pub mod ising;
pub mod md;
pub mod reducer;
pub mod scalar;
pub mod subsolvers;

pub use error::{Error, RemoteError, Result};
pub use scalar::Scalar;

pub type IsingProblemF64 = ising::IsingProblem<f64>;
pub type IsingProblemF32 = ising::IsingProblem<f32>;
pub type WeightMatrixF64 = ising::WeightMatrix<f64>;
pub type ScheduleF64 = md::Schedule<f64>;
pub type FluxStateF64 = md::FluxState<f64>;
pub type MdRunF64 = md::MdRun<f64>;
pub type SubProblemF64 = reducer::SubProblem<f64>;
pub type SubsolverResultF64 = subsolvers::SubsolverResult<f64>;
