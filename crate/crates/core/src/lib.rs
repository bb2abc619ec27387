//! Frustrated-loop Ising benchmark toolkit.
//!
//! Generates range-limited frustrated-loop instances with planted ground
//! states on Chimera graphs, solves them with simulated annealing (solver and
//! thermal-annealer modes), a low-treewidth large-neighbourhood search and
//! exhaustive enumeration, and turns the per-run outcomes into
//! time-to-solution and scaling statistics.
//!
//! Numerical code is generic over [`Scalar`]: instances are exact integer
//! models, solvers run on normalized `f64`/`f32` models, and
//! [`Rational64`] gives an exact normalized model for oracle checks.

pub mod analysis;
pub mod chimera;
pub mod error;
pub mod format;
pub mod instance;
pub mod ising;
pub mod record;
pub mod rng;
pub mod scalar;
pub mod solvers;

pub use chimera::ChimeraTopology;
pub use error::{Error, Result};
pub use instance::{generate_instance, Alpha, FrustratedLoopInstance, Loop, LoopPolicy, RangeLimit};
pub use ising::{Gauge, IsingModel, SpinState};
pub use num_rational::Rational64;
pub use record::RunRecord;
pub use scalar::{Field, Real, Scalar};
pub use solvers::{HfsConfig, SaSchedule, Sample, SolveResult};

/// Integer-valued model, the native representation of generated instances.
pub type IntegerModel = IsingModel<i64>;
/// Exact rational model, used when normalization must not round.
pub type ExactModel = IsingModel<Rational64>;
/// Double-precision model fed to the annealers.
pub type Model64 = IsingModel<f64>;
/// Single-precision model.
pub type Model32 = IsingModel<f32>;

pub type SolveResult64 = SolveResult<f64>;
pub type IntegerSolveResult = SolveResult<i64>;
