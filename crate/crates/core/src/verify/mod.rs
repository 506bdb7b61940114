//! Manufactured solutions, interpolation operators, error norms and
//! convergence studies, plus the energy monitor.

pub mod convergence;
pub mod energy;
pub mod manufactured;
pub mod norms;
pub mod projection;

pub use convergence::{
    convergence_study, manufactured_problem, manufactured_problem_on, observed_rates, single_solve, ConvergenceReport,
    FieldColumn, LevelRecord, Norm, StudyOptions,
};
pub use energy::{max_energy_increase, zero_data_energy, SineSeries};
pub use manufactured::{example1_case, example1_with_params, residual_oracle, ExactSolution, ManufacturedCase};
pub use norms::{difference_norms, error_norms, scalar_error_norms, weighted_norm, Combination, ErrorNorms, Quantity};
pub use projection::{elliptic_projection, static_solve, stokes_interpolant};
