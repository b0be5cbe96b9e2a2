//! Kernel regularized risk minimization with power losses, closed-form
//! learning-theory bounds, covering-number estimation and a Monte-Carlo
//! harness that checks the bounds against simulated data.

pub mod bounds;
pub mod covering;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod losses;
pub mod solver;

pub use error::{Error, Result};
pub use kernels::{kernel_matrix, DomainBox, GramOperator, Kernel, KernelExpansion, KernelFamily, KernelSpec};
pub use losses::{CalibrationFactor, FiniteDistribution, LossSpec};
pub use solver::{fit, objective, FitResult, SolverConfig, SolverMethod, TrainingSet};
