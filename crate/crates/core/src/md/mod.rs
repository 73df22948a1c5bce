//! Molecular dynamics of continuous flux variables under a scheduled Hamiltonian.

mod engine;
mod schedule;
mod trajectory;
mod window;

pub use engine::{
    force, leapfrog_run, md_hamiltonian, FluxState, DIVERGENCE_CHECK_EVERY, Leapfrog, MdConfig, MdRun, TimeAveragedFlux, TrajectorySample,
};
pub use schedule::{schedule_eval, Schedule};
pub use trajectory::{save_trajectory, write_trajectory_csv};
pub use window::FluxWindow;
