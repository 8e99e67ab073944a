//! Application counter profiles, the basis-function feature vectors derived
//! from them, and behavior classification.
//!
//! A profile is the vector of eight counter values collected during one
//! unconstrained run of an application (no partitioning, no power cap, no
//! co-runner). All counters are kept on their native 0..=100 percent scale;
//! conversion to fractions happens only inside the basis functions, so
//! ingestion stays lossless.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Counter level (percent) at or below which a pipe is treated as idle.
///
/// Guards the `memory/compute` ratio in [`ApplicationProfile::feature_h`] and
/// the `compute/memory` ratio in [`ApplicationProfile::classify`] against
/// division by a dead counter.
pub const EPSILON_F1: f64 = 0.01;

/// Tensor-pipe utilization (percent) above which an application counts as
/// actually using the tensor units.
pub const EPSILON_TENSOR: f64 = 0.1;

/// Degradation bound under the minimum allocation: applications losing less
/// than this fraction of their exclusive performance are un-scalable.
pub const UNSCALABLE_DEGRADATION: f64 = 0.10;

/// Compute/memory throughput ratio separating compute-bound behavior from
/// memory-bound behavior.
pub const COMPUTE_MEMORY_RATIO: f64 = 0.80;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile '{app_id}': counter {counter} = {value} outside [0, 100]")]
    CounterOutOfRange {
        app_id: String,
        counter: &'static str,
        value: f64,
    },
    #[error("profile '{app_id}': tensor counters sum to {sum}, exceeding 100")]
    TensorSumTooLarge { app_id: String, sum: f64 },
    #[error(
        "profile '{app_id}': {counter} = {value} is at or below {threshold} ({quantity} undefined)"
    )]
    DegenerateProfile {
        app_id: String,
        counter: &'static str,
        value: f64,
        threshold: f64,
        quantity: &'static str,
    },
}

/// The eight counter values of one profile run, percent scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterVector {
    pub compute_throughput: f64,
    pub memory_throughput: f64,
    pub dram_throughput: f64,
    pub l2_hit_rate: f64,
    pub occupancy: f64,
    pub tensor_mixed: f64,
    pub tensor_double: f64,
    pub tensor_integer: f64,
}

impl CounterVector {
    const NAMES: [&'static str; 8] = [
        "compute_throughput",
        "memory_throughput",
        "dram_throughput",
        "l2_hit_rate",
        "occupancy",
        "tensor_mixed",
        "tensor_double",
        "tensor_integer",
    ];

    pub fn as_array(&self) -> [f64; 8] {
        [
            self.compute_throughput,
            self.memory_throughput,
            self.dram_throughput,
            self.l2_hit_rate,
            self.occupancy,
            self.tensor_mixed,
            self.tensor_double,
            self.tensor_integer,
        ]
    }

    /// Combined utilization of the mixed/double/integer tensor pipes.
    pub fn tensor_sum(&self) -> f64 {
        self.tensor_mixed + self.tensor_double + self.tensor_integer
    }
}

/// One application's identity plus its profiled counter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplicationProfile {
    pub app_id: String,
    pub counters: CounterVector,
}

impl ApplicationProfile {
    /// Builds a profile, rejecting counters outside [0, 100] and tensor
    /// utilizations summing past full scale.
    pub fn new(app_id: impl Into<String>, counters: CounterVector) -> Result<Self, ProfileError> {
        let profile = Self {
            app_id: app_id.into(),
            counters,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Re-checks the profile invariants; used after deserialization.
    pub fn validate(&self) -> Result<(), ProfileError> {
        let values = self.counters.as_array();
        for (value, name) in values.iter().zip(CounterVector::NAMES) {
            if !value.is_finite() || *value < 0.0 || *value > 100.0 {
                return Err(ProfileError::CounterOutOfRange {
                    app_id: self.app_id.clone(),
                    counter: name,
                    value: *value,
                });
            }
        }
        let sum = self.counters.tensor_sum();
        if sum > 100.0 {
            return Err(ProfileError::TensorSumTooLarge {
                app_id: self.app_id.clone(),
                sum,
            });
        }
        Ok(())
    }

    /// Scalability features: non-tensor and tensor compute intensity, the
    /// memory/compute ratio, L2 hit fraction, occupancy, constant term.
    ///
    /// Fails with [`ProfileError::DegenerateProfile`] when the compute pipe is
    /// idle, since the memory/compute ratio is undefined there.
    pub fn feature_h(&self) -> Result<FeatureH, ProfileError> {
        let f = &self.counters;
        if f.compute_throughput <= EPSILON_F1 {
            return Err(ProfileError::DegenerateProfile {
                app_id: self.app_id.clone(),
                counter: "compute_throughput",
                value: f.compute_throughput,
                threshold: EPSILON_F1,
                quantity: "memory/compute ratio",
            });
        }
        let tensor_intensity = f.tensor_sum() / 100.0;
        let h = [
            f.compute_throughput / 100.0 - tensor_intensity,
            tensor_intensity,
            f.memory_throughput / f.compute_throughput,
            f.l2_hit_rate / 100.0,
            f.occupancy / 100.0,
            1.0,
        ];
        Ok(FeatureH(h))
    }

    /// Interference features: DRAM intensity, access-pattern proxy, constant
    /// term. Total over all valid profiles.
    pub fn feature_j(&self) -> FeatureJ {
        let f = &self.counters;
        FeatureJ([f.dram_throughput / 100.0, f.l2_hit_rate / 100.0, 1.0])
    }

    /// Assigns the profile to one of the four behavior classes given its
    /// measured relative performance at the minimum allocation (1 GPC,
    /// private memory, minimum power cap).
    pub fn classify(&self, rperf_at_min_alloc: f64) -> Result<WorkloadClass, ProfileError> {
        if 1.0 - rperf_at_min_alloc < UNSCALABLE_DEGRADATION {
            return Ok(WorkloadClass::US);
        }
        let f = &self.counters;
        if f.memory_throughput <= EPSILON_F1 {
            return Err(ProfileError::DegenerateProfile {
                app_id: self.app_id.clone(),
                counter: "memory_throughput",
                value: f.memory_throughput,
                threshold: EPSILON_F1,
                quantity: "compute/memory ratio",
            });
        }
        if f.compute_throughput / f.memory_throughput > COMPUTE_MEMORY_RATIO {
            if f.tensor_sum() > EPSILON_TENSOR {
                Ok(WorkloadClass::TI)
            } else {
                Ok(WorkloadClass::CI)
            }
        } else {
            Ok(WorkloadClass::MI)
        }
    }
}

/// Scalability feature vector `h1..h6` feeding the model's first term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureH(pub [f64; 6]);

impl FeatureH {
    pub fn as_array(&self) -> &[f64; 6] {
        &self.0
    }

    pub fn dot(&self, coefficients: &[f64; 6]) -> f64 {
        self.0
            .iter()
            .zip(coefficients)
            .map(|(h, c)| h * c)
            .sum()
    }
}

/// Interference feature vector `j1..j3` feeding the model's partner terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureJ(pub [f64; 3]);

impl FeatureJ {
    pub fn as_array(&self) -> &[f64; 3] {
        &self.0
    }

    pub fn dot(&self, coefficients: &[f64; 3]) -> f64 {
        self.0
            .iter()
            .zip(coefficients)
            .map(|(j, d)| j * d)
            .sum()
    }
}

/// The four behavior classes: tensor-core intensive, compute intensive,
/// memory intensive, un-scalable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WorkloadClass {
    TI,
    CI,
    MI,
    US,
}

impl std::fmt::Display for WorkloadClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WorkloadClass::TI => write!(f, "TI"),
            WorkloadClass::CI => write!(f, "CI"),
            WorkloadClass::MI => write!(f, "MI"),
            WorkloadClass::US => write!(f, "US"),
        }
    }
}
