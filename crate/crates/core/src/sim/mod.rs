//! State simulation and operator extraction.

mod engine;
pub(crate) mod kernel;
mod operator;
mod state;

pub use engine::{simulate, simulate_with, MeasurementPolicy, Outcomes, SimConfig, MIN_OUTCOME_PROBABILITY};
pub use operator::{
    effective_operator, effective_operator_with, spectral_distance, unitarity_deviation, unitary_of,
    unitary_of_with, AncillaSpec, EffectiveOperator, OperatorMatrix, RESTORATION_TOL, UNITARITY_TOL,
};
pub use state::{StateVector, DENSE_CAP};
