//! Decision engine for co-locating jobs on partitionable, power-capped GPUs.
//!
//! Given hardware-counter profiles of the applications to co-locate, the
//! crate trains a per-hardware-state linear regression model of relative
//! performance and searches the partitioning / job-mapping / power-cap space
//! for the best setup under a fairness constraint. A deterministic synthetic
//! oracle substitutes for real hardware so the whole pipeline can be trained
//! and validated without a GPU.
//!
//! The pipeline, end to end:
//!
//! 1. [`oracle`] (or a real profiling run) produces counter profiles and
//!    relative-performance observations,
//! 2. [`model`] fits scalability and interference coefficients per slice key
//!    by ordinary least squares,
//! 3. [`policy`] evaluates every candidate `(partition state, power cap)`
//!    and picks the one maximizing throughput or energy efficiency subject
//!    to `fairness > alpha`.

pub mod files;
mod lstsq;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod profiles;
pub mod statespace;

pub use model::{CoefficientEntry, CoefficientTable, SliceKey, TrainingSample};
pub use policy::{PolicyKind, PolicyProblem, Solution, SolverReport};
pub use profiles::{ApplicationProfile, CounterVector, FeatureH, FeatureJ, WorkloadClass};
pub use statespace::{HardwareState, MemoryOption, PartitionState, PowerCap, StateSpace};
