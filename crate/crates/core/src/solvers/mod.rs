//! Classical solvers. Each reports its effort in native work units and in
//! model microseconds: `TAU_SA_US` per Monte Carlo sweep, `HFS_CELL_UPDATE_US`
//! per unit-cell update. Parallel-hardware divisors are applied later, at
//! time-to-solution estimation.

mod anneal;
mod brute;
mod hfs;

pub use anneal::{sas_solve_many, saa_sample, sas_solve, sa_run, Annealer, SaSchedule};
pub use brute::{brute_force, BruteForce, MAX_BRUTE_SPINS};
pub use hfs::{conditional_minimize, hfs_solve, hfs_solve_observed, random_induced_tree, HalfCellGraph, HfsConfig};

use crate::ising::SpinState;

/// Model time of one Monte Carlo sweep, in microseconds.
pub const TAU_SA_US: f64 = 3.54;
/// Model time of one HFS unit-cell update, in microseconds.
pub const HFS_CELL_UPDATE_US: f64 = 1.0;

/// Outcome of one anneal or one search.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub energy: T,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult<T> {
    pub best_state: SpinState,
    pub best_energy: T,
    /// Whether any sample reached the target energy.
    pub success: bool,
    pub samples: Vec<Sample<T>>,
    /// Sweeps, unit-cell updates or enumerated states, depending on the solver.
    pub work: f64,
    pub model_time_us: f64,
    pub restarts: u64,
}

impl<T> SolveResult<T> {
    pub fn successes(&self) -> usize {
        self.samples.iter().filter(|s| s.success).count()
    }

    /// Fraction of samples that reached the target.
    pub fn success_probability(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.successes() as f64 / self.samples.len() as f64
        }
    }
}
