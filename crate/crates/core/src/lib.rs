//! Distributed conjugate-gradient adaptive filtering over incremental and
//! diffusion networks, with LMS, RLS and affine-projection baselines and a
//! Monte-Carlo harness.

pub mod adaptive;
pub mod algorithm;
pub mod baseline;
pub mod complexity;
pub mod config;
pub mod diffusion;
pub mod error;
pub mod incremental;
pub mod linalg;
pub mod report;
pub mod sim;

pub use adaptive::{CgParams, CgState, RegressionSample, SecondOrderState, StepRule};
pub use algorithm::{AlgoConfig, AlgorithmKind, Forgetting, Strategy};
pub use complexity::{complexity_count, OpCount};
pub use config::RunConfig;
pub use diffusion::{
    metropolis_combiner, random_topology, Combiner, DiffusionNetwork, TopologyGraph,
};
pub use error::{Error, Result};
pub use incremental::{IncrementalNetwork, RingSchedule};
pub use linalg::{ComplexVector, HermitianMatrix};
pub use sim::{emse_at, generate_scenario, run_experiment, Experiment, MetricSeries, Scenario};
