//! State-vector and noisy-trajectory simulation.

pub mod estimator;
pub mod noise;
pub mod sampling;
pub mod statevector;
pub mod trajectory;

pub use estimator::EnergyEstimator;
pub use noise::{make_backend, parse_backend, Backend, Durations, NoiseSpec};
pub use sampling::{
    estimate_from_counts, sampled_expectation, Estimate, EstimatorOptions, MeasurementPlan, ShotResult,
    SymmetryFilter,
};
pub use statevector::{exact_expectation, run_statevector, StateVector};
pub use trajectory::{run_noisy, TrajectoryEngine};
