//! Maximum-likelihood density-matrix estimation with the diluted RρR
//! iteration and Armijo backtracking.

pub mod eigen;
pub mod error;
pub mod hermitian;
pub mod likelihood;
pub mod quantum;
pub mod scalar;
pub mod simulate;
pub mod solver;
pub mod sweep;

pub use eigen::Eigen;
pub use error::{Error, Result};
pub use hermitian::HermitianOperator;
pub use likelihood::{Evaluation, ObjectiveContext, StationarityReport};
pub use quantum::{Dataset, DensityMatrix, Povm, PureState};
pub use scalar::{ComplexScalar, NumericPolicy, Real};
pub use solver::{solve, Solution, SolveFailure, SolverConfig, StepSizeRule, Termination};
pub use sweep::{run_sweep, SweepRow, SweepRule};

pub type Hermitian64 = HermitianOperator<f64>;
pub type Density64 = DensityMatrix<f64>;
pub type Povm64 = Povm<f64>;
pub type Dataset64 = Dataset<f64>;
pub type PureState64 = PureState<f64>;
pub type Context64 = ObjectiveContext<f64>;
