//! One-parameter multi-objective filled function method for box-constrained
//! problems, with the benchmark problems and front-quality metrics used to
//! evaluate it.

pub mod config;
pub mod driver;
pub mod error;
pub mod filled;
pub mod local;
pub mod metrics;
pub mod mop;
pub mod problem;
pub mod problems;

pub use config::SolverConfig;
pub use driver::{run_local_only, run_omffm, RunReport, Termination};
pub use error::{Error, Result};
pub use local::{local_weak_efficient, LocalDescentResult, LocalStatus};
pub use metrics::{hypervolume, performance_profile, purity, MetricsReport, ProfileCurve};
pub use mop::{
    dominates, nondominated_filter, on_boundary, project_to_box, strictly_dominates,
    ArchiveEntry, Bounds, ParetoArchive,
};
pub use problem::{Jacobian, MopProblem};
pub use problems::get_problem;
