//! Deterministic synthetic ground truth standing in for hardware
//! measurement.
//!
//! Each synthetic application is a small demand vector (compute, bandwidth,
//! tensor share, L2 behavior). Its true relative performance under any
//! `(partition, power cap)` follows a closed-form supply/demand model with
//! chip-level power throttling and demand-proportional sharing of the memory
//! pool, normalized to the exclusive full-chip uncapped run. Private slices
//! see no interference at all: isolated memory modules by construction, and
//! an isolated power domain so that a private co-run reproduces the solo run
//! exactly.
//!
//! The module also synthesizes matching counter profiles and emits the
//! training datasets that the fitting pipeline consumes, so the whole
//! decision engine can be exercised and validated without a GPU.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::files::{self, FileError, TrainingRecord};
use crate::profiles::{ApplicationProfile, CounterVector, ProfileError, WorkloadClass, EPSILON_F1};
use crate::statespace::{
    private_memory_modules, HardwareState, MemoryOption, PartitionState, StateError,
    MEMORY_MODULES_TOTAL, SLICE_GPC_CHOICES,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid synthetic app '{app_id}': {reason}")]
    InvalidApp { app_id: String, reason: String },
    #[error("invalid oracle config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    File(#[from] FileError),
}

/// A parametric synthetic application: demands as fractions of the full
/// chip's compute and bandwidth, the tensor share of its compute, and an
/// L2-hit proxy that only shapes the synthesized profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticApp {
    pub app_id: String,
    pub compute: f64,
    pub bandwidth: f64,
    pub tensor: f64,
    pub l2_hit: f64,
}

impl SyntheticApp {
    pub fn new(
        app_id: impl Into<String>,
        compute: f64,
        bandwidth: f64,
        tensor: f64,
        l2_hit: f64,
    ) -> Result<Self, OracleError> {
        let app = Self {
            app_id: app_id.into(),
            compute,
            bandwidth,
            tensor,
            l2_hit,
        };
        app.validate()?;
        Ok(app)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let fail = |reason: String| {
            Err(OracleError::InvalidApp {
                app_id: self.app_id.clone(),
                reason,
            })
        };
        if !(self.compute > EPSILON_F1 / 100.0 && self.compute <= 1.0) {
            return fail(format!(
                "compute demand {} outside ({}, 1]",
                self.compute,
                EPSILON_F1 / 100.0
            ));
        }
        for (name, v) in [
            ("bandwidth", self.bandwidth),
            ("tensor", self.tensor),
            ("l2_hit", self.l2_hit),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} = {v} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Compute weight including the tensor power premium.
    fn effective_compute(&self, config: &OracleConfig) -> f64 {
        self.compute * (1.0 + config.tensor_power_factor * self.tensor)
    }
}

/// Simulation parameters. The defaults make a full-tensor application draw
/// well past the cap menu (so power sensitivity shows up) while streaming
/// and idle applications stay far below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Static chip draw in watts.
    pub base_power_w: f64,
    /// Watts per GPC running full non-tensor compute.
    pub gpc_power_w: f64,
    /// Extra draw multiplier for tensor work.
    pub tensor_power_factor: f64,
    /// Floor for the compute throttle factor.
    pub min_throttle: f64,
    /// GPCs available with partitioning disabled.
    pub total_gpcs: u32,
    /// GPCs available once partitioning is active.
    pub usable_gpcs_partitioned: u32,
    /// Power cap of the normalization baseline run.
    pub baseline_power_w: u32,
    /// Seed for dataset noise.
    pub seed: u64,
    /// Standard deviation of additive measurement noise (0 disables it).
    pub noise_sigma: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            base_power_w: 50.0,
            gpc_power_w: 25.0,
            tensor_power_factor: 0.6,
            min_throttle: 0.1,
            total_gpcs: 8,
            usable_gpcs_partitioned: 7,
            baseline_power_w: 250,
            seed: 0,
            noise_sigma: 0.0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self, min_power_w: u32) -> Result<(), OracleError> {
        if !self.base_power_w.is_finite() || self.base_power_w >= min_power_w as f64 {
            return Err(OracleError::InvalidConfig(format!(
                "base power {} W must stay below the minimum cap {} W",
                self.base_power_w, min_power_w
            )));
        }
        if !self.min_throttle.is_finite() || self.min_throttle <= 0.0 || self.min_throttle >= 1.0 {
            return Err(OracleError::InvalidConfig(format!(
                "min throttle {} outside (0, 1)",
                self.min_throttle
            )));
        }
        if self.noise_sigma < 0.0 {
            return Err(OracleError::InvalidConfig(format!(
                "noise sigma {} is negative",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Raw (un-normalized) performance of `members[slot]` when the listed
/// members share one power domain. Memory supply follows the option: private
/// slices own their module share, shared slices split the unit pool in
/// proportion to demand once it oversubscribes.
fn slot_raw_value(
    members: &[(u32, &SyntheticApp)],
    slot: usize,
    option: MemoryOption,
    power_w: f64,
    config: &OracleConfig,
) -> f64 {
    let draw: f64 = config.base_power_w
        + config.gpc_power_w
            * members
                .iter()
                .map(|(gpcs, app)| *gpcs as f64 * app.effective_compute(config))
                .sum::<f64>();
    let throttle = if draw > power_w {
        ((power_w - config.base_power_w) / (draw - config.base_power_w))
            .clamp(config.min_throttle, 1.0)
    } else {
        1.0
    };

    let (gpcs, app) = members[slot];
    let compute_supply = gpcs as f64 / config.total_gpcs as f64 * throttle;
    let mut value = (compute_supply / app.compute).min(1.0);

    if app.bandwidth > 0.0 {
        let mem_supply = match option {
            MemoryOption::Private => {
                let modules = private_memory_modules(gpcs).expect("validated slice size");
                modules as f64 / MEMORY_MODULES_TOTAL as f64
            }
            MemoryOption::Shared => {
                let demand: f64 = members.iter().map(|(_, a)| a.bandwidth).sum();
                if demand <= 1.0 {
                    app.bandwidth
                } else {
                    app.bandwidth / demand
                }
            }
        };
        value = value.min(mem_supply / app.bandwidth);
    }
    value
}

/// Raw performance of the exclusive full-chip run the model normalizes to.
fn baseline_raw(app: &SyntheticApp, config: &OracleConfig) -> f64 {
    slot_raw_value(
        &[(config.total_gpcs, app)],
        0,
        MemoryOption::Shared,
        config.baseline_power_w as f64,
        config,
    )
}

/// True relative performance of `apps[slot]` under the given hardware state,
/// normalized to that application's exclusive full-chip uncapped run.
pub fn true_rperf(
    apps: &[SyntheticApp],
    state: &HardwareState,
    slot: usize,
    config: &OracleConfig,
) -> Result<f64, OracleError> {
    state.partition.validate_structure()?;
    for app in apps {
        app.validate()?;
    }
    if apps.len() != state.partition.slices.len() {
        return Err(StateError::InvalidAllocation(format!(
            "{} applications for state '{}' with {} slices",
            apps.len(),
            state.partition.state_id,
            state.partition.slices.len()
        ))
        .into());
    }
    if slot >= apps.len() {
        return Err(StateError::InvalidAllocation(format!("slot {slot} out of range")).into());
    }
    let gpc_sum = state.partition.gpc_sum();
    if gpc_sum > config.usable_gpcs_partitioned {
        return Err(StateError::InvalidAllocation(format!(
            "state '{}' allocates {gpc_sum} GPCs, exceeding the partitioned budget of {}",
            state.partition.state_id, config.usable_gpcs_partitioned
        ))
        .into());
    }

    let power_w = state.power.watts as f64;
    let slice = state.partition.slices[slot];
    let raw = match slice.option {
        // Private slices are fully isolated: partners influence neither the
        // memory modules nor the power domain, so a co-run reproduces solo.
        MemoryOption::Private => slot_raw_value(
            &[(slice.gpcs, &apps[slot])],
            0,
            MemoryOption::Private,
            power_w,
            config,
        ),
        MemoryOption::Shared => {
            let members: Vec<(u32, &SyntheticApp)> = state
                .partition
                .slices
                .iter()
                .zip(apps)
                .map(|(s, a)| (s.gpcs, a))
                .collect();
            slot_raw_value(&members, slot, MemoryOption::Shared, power_w, config)
        }
    };
    Ok(raw / baseline_raw(&apps[slot], config))
}

/// Relative performance at the minimum allocation (1 GPC, private memory,
/// the given minimum cap) — the degradation probe classification relies on.
pub fn min_allocation_rperf(
    app: &SyntheticApp,
    min_power_w: u32,
    config: &OracleConfig,
) -> Result<f64, OracleError> {
    let state = HardwareState::new(
        PartitionState::solo(1, MemoryOption::Private),
        min_power_w,
    );
    true_rperf(std::slice::from_ref(app), &state, 0, config)
}

/// Counter profile the profiler would report for a synthetic application.
pub fn synthesize_profile(app: &SyntheticApp) -> ApplicationProfile {
    let counters = CounterVector {
        compute_throughput: 100.0 * app.compute,
        memory_throughput: (100.0 * app.bandwidth.max(0.25 * app.compute)).min(100.0),
        dram_throughput: 100.0 * app.bandwidth,
        l2_hit_rate: 100.0 * app.l2_hit,
        occupancy: 100.0 * (app.compute + app.bandwidth).min(1.0),
        tensor_mixed: 100.0 * app.compute * app.tensor,
        tensor_double: 0.0,
        tensor_integer: 0.0,
    };
    ApplicationProfile::new(app.app_id.clone(), counters)
        .expect("synthetic demands stay within counter ranges")
}

/// Classifies a synthetic application the same way the pipeline would: from
/// its synthesized profile and its oracle-measured minimum-allocation rperf.
pub fn classify_app(
    app: &SyntheticApp,
    min_power_w: u32,
    config: &OracleConfig,
) -> Result<WorkloadClass, OracleError> {
    let rperf = min_allocation_rperf(app, min_power_w, config)?;
    Ok(synthesize_profile(app).classify(rperf)?)
}

/// The built-in workload suite: three applications per behavior class, with
/// the class each is designed (and verified) to land in.
pub fn default_workload_suite() -> Vec<(SyntheticApp, WorkloadClass)> {
    let app = |id: &str, c: f64, b: f64, t: f64, l2: f64| {
        SyntheticApp::new(id, c, b, t, l2).expect("suite parameters are valid")
    };
    vec![
        (app("tensor_dense", 1.00, 0.10, 1.00, 0.50), WorkloadClass::TI),
        (app("tensor_mixed", 0.90, 0.15, 0.80, 0.40), WorkloadClass::TI),
        (app("tensor_small", 0.95, 0.05, 0.90, 0.60), WorkloadClass::TI),
        (app("compute_fp64", 0.90, 0.20, 0.00, 0.60), WorkloadClass::CI),
        (app("compute_fp32", 0.80, 0.10, 0.00, 0.50), WorkloadClass::CI),
        (app("compute_sfu", 0.70, 0.25, 0.00, 0.70), WorkloadClass::CI),
        (app("stream_copy", 0.30, 0.90, 0.00, 0.10), WorkloadClass::MI),
        (app("random_access", 0.25, 0.80, 0.00, 0.05), WorkloadClass::MI),
        (app("spmv_bw", 0.35, 0.85, 0.00, 0.15), WorkloadClass::MI),
        (app("sparse_walk", 0.10, 0.05, 0.00, 0.50), WorkloadClass::US),
        (app("tiny_kernel", 0.12, 0.08, 0.00, 0.30), WorkloadClass::US),
        (app("latency_bound", 0.11, 0.06, 0.00, 0.40), WorkloadClass::US),
    ]
}

/// Eighteen ordered co-run pairings over the default suite: two per
/// same-class pair and two per tensor/compute vs memory/un-scalable mix,
/// indexed into [`default_workload_suite`] order.
pub fn default_pairings() -> Vec<(usize, usize)> {
    vec![
        (0, 1),
        (1, 2), // TI-TI
        (3, 4),
        (4, 5), // CI-CI
        (6, 7),
        (7, 8), // MI-MI
        (9, 10),
        (10, 11), // US-US
        (0, 6),
        (1, 7), // TI-MI
        (3, 6),
        (4, 7), // CI-MI
        (0, 9),
        (1, 10), // TI-US
        (3, 9),
        (4, 10), // CI-US
        (6, 9),
        (7, 10), // MI-US
    ]
}

/// Human-readable labels ("TI-MI1", "TI-MI2", ...) for a pairing list.
pub fn pairing_labels(
    suite: &[(SyntheticApp, WorkloadClass)],
    pairings: &[(usize, usize)],
) -> Vec<String> {
    let mut counts = std::collections::BTreeMap::new();
    pairings
        .iter()
        .map(|(i, j)| {
            let base = format!("{}-{}", suite[*i].1, suite[*j].1);
            let n = counts.entry(base.clone()).or_insert(0usize);
            *n += 1;
            format!("{base}{n}")
        })
        .collect()
}

/// Record counts written by [`generate_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DatasetSummary {
    pub n_profiles: usize,
    pub n_solo: usize,
    pub n_corun: usize,
}

/// Emits a profile file and a training file for the given applications.
///
/// Solo samples cover every application on the full solo grid — each
/// supported slice size, both memory options, every cap on the menu — and
/// co-run samples cover every pairing on every `(state, power)` candidate,
/// one record per subject slot. With `noise_sigma > 0`, seeded Gaussian
/// noise is added to each measured value; generation is byte-deterministic
/// for a fixed config.
pub fn generate_dataset(
    apps: &[SyntheticApp],
    states: &[PartitionState],
    powers: &[u32],
    pairings: &[(usize, usize)],
    config: &OracleConfig,
    profiles_path: &Path,
    training_path: &Path,
) -> Result<DatasetSummary, OracleError> {
    let profiles: Vec<ApplicationProfile> = apps.iter().map(synthesize_profile).collect();

    let mut noise = if config.noise_sigma > 0.0 {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, config.noise_sigma)
            .map_err(|e| OracleError::InvalidConfig(format!("noise sigma: {e}")))?;
        Some((rng, normal))
    } else {
        None
    };
    let mut measure = |value: f64| -> f64 {
        match &mut noise {
            Some((rng, normal)) => (value + normal.sample(rng)).max(1e-6),
            None => value,
        }
    };

    let mut records = Vec::new();
    let mut n_solo = 0usize;
    for app in apps {
        for option in [MemoryOption::Shared, MemoryOption::Private] {
            for gpcs in SLICE_GPC_CHOICES {
                let state = PartitionState::solo(gpcs, option);
                for &power_w in powers {
                    let hw = HardwareState::new(state.clone(), power_w);
                    let rperf = true_rperf(std::slice::from_ref(app), &hw, 0, config)?;
                    records.push(TrainingRecord {
                        subject: app.app_id.clone(),
                        partners: vec![],
                        state_id: state.state_id.clone(),
                        slot: 0,
                        power_w,
                        rperf: measure(rperf),
                    });
                    n_solo += 1;
                }
            }
        }
    }

    let mut n_corun = 0usize;
    for &(i, j) in pairings {
        let pair = [apps[i].clone(), apps[j].clone()];
        for state in states {
            for &power_w in powers {
                let hw = HardwareState::new(state.clone(), power_w);
                for slot in 0..pair.len() {
                    let rperf = true_rperf(&pair, &hw, slot, config)?;
                    records.push(TrainingRecord {
                        subject: pair[slot].app_id.clone(),
                        partners: pair
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| *k != slot)
                            .map(|(_, a)| a.app_id.clone())
                            .collect(),
                        state_id: state.state_id.clone(),
                        slot,
                        power_w,
                        rperf: measure(rperf),
                    });
                    n_corun += 1;
                }
            }
        }
    }

    files::write_profiles(profiles_path, &profiles)?;
    files::write_training_records(training_path, &records)?;
    Ok(DatasetSummary {
        n_profiles: profiles.len(),
        n_solo,
        n_corun,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OracleConfig {
        OracleConfig::default()
    }

    fn solo_state(gpcs: u32, option: MemoryOption, power_w: u32) -> HardwareState {
        HardwareState::new(PartitionState::solo(gpcs, option), power_w)
    }

    #[test]
    fn light_app_keeps_full_performance_at_minimum_allocation() {
        let app = SyntheticApp::new("light", 0.1, 0.05, 0.0, 0.5).unwrap();
        let rperf = true_rperf(
            std::slice::from_ref(&app),
            &solo_state(1, MemoryOption::Private, 150),
            0,
            &cfg(),
        )
        .unwrap();
        assert!((rperf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_app_throttles_under_lower_caps() {
        let app = SyntheticApp::new("tensor", 1.0, 0.1, 1.0, 0.5).unwrap();
        let at_250 = true_rperf(
            std::slice::from_ref(&app),
            &solo_state(7, MemoryOption::Shared, 250),
            0,
            &cfg(),
        )
        .unwrap();
        let at_150 = true_rperf(
            std::slice::from_ref(&app),
            &solo_state(7, MemoryOption::Shared, 150),
            0,
            &cfg(),
        )
        .unwrap();
        assert!(at_150 < at_250, "{at_150} !< {at_250}");
        // draw = 50 + 25*7*1.6 = 330 W; baseline throttles to 200/320
        assert!((at_250 - 1.0).abs() < 1e-12);
        assert!((at_150 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bandwidth_app_prefers_shared_pool() {
        let app = SyntheticApp::new("bw", 0.3, 0.9, 0.0, 0.1).unwrap();
        let shared = true_rperf(
            std::slice::from_ref(&app),
            &solo_state(3, MemoryOption::Shared, 250),
            0,
            &cfg(),
        )
        .unwrap();
        let private = true_rperf(
            std::slice::from_ref(&app),
            &solo_state(3, MemoryOption::Private, 250),
            0,
            &cfg(),
        )
        .unwrap();
        assert!(shared > private, "{shared} !> {private}");
        assert!((shared - 1.0).abs() < 1e-12);
        // private grants 4 of 8 modules: min term is (4/8) / 0.9
        assert!((private - 0.5 / 0.9).abs() < 1e-12);
    }

    #[test]
    fn baseline_run_is_identity() {
        // the normalization run (all GPCs, full pool, baseline cap, solo)
        // scores exactly 1 for every application
        let config = cfg();
        for (app, _) in default_workload_suite() {
            let raw = slot_raw_value(
                &[(config.total_gpcs, &app)],
                0,
                MemoryOption::Shared,
                config.baseline_power_w as f64,
                &config,
            );
            assert_eq!(raw / baseline_raw(&app, &config), 1.0);
        }
    }

    #[test]
    fn private_corun_equals_solo_exactly() {
        let suite = default_workload_suite();
        let pair = [suite[0].0.clone(), suite[6].0.clone()];
        for power_w in [150, 250] {
            let corun_state = HardwareState::new(
                PartitionState::uniform("S3", &[4, 3], MemoryOption::Private),
                power_w,
            );
            for slot in 0..2 {
                let corun = true_rperf(&pair, &corun_state, slot, &cfg()).unwrap();
                let solo_gpcs = corun_state.partition.slices[slot].gpcs;
                let solo = true_rperf(
                    std::slice::from_ref(&pair[slot]),
                    &solo_state(solo_gpcs, MemoryOption::Private, power_w),
                    0,
                    &cfg(),
                )
                .unwrap();
                assert_eq!(corun, solo);
            }
        }
    }

    #[test]
    fn oversubscribed_shared_pool_slows_memory_bound_apps() {
        let suite = default_workload_suite();
        // two memory-intensive apps: total demand 1.7 oversubscribes the pool
        let pair = [suite[6].0.clone(), suite[7].0.clone()];
        let corun_state = HardwareState::new(
            PartitionState::uniform("S1", &[4, 3], MemoryOption::Shared),
            250,
        );
        for slot in 0..2 {
            let corun = true_rperf(&pair, &corun_state, slot, &cfg()).unwrap();
            let gpcs = corun_state.partition.slices[slot].gpcs;
            let solo = true_rperf(
                std::slice::from_ref(&pair[slot]),
                &solo_state(gpcs, MemoryOption::Shared, 250),
                0,
                &cfg(),
            )
            .unwrap();
            assert!(corun < solo, "slot {slot}: {corun} !< {solo}");
        }
    }

    #[test]
    fn synthesized_profiles_match_demand_formulas() {
        let app = SyntheticApp::new("a", 1.0, 0.0, 0.0, 0.5).unwrap();
        let f = synthesize_profile(&app).counters.as_array();
        assert_eq!(f, [100.0, 25.0, 0.0, 50.0, 100.0, 0.0, 0.0, 0.0]);

        let app = SyntheticApp::new("b", 0.5, 0.8, 0.5, 0.2).unwrap();
        let f = synthesize_profile(&app).counters.as_array();
        assert_eq!(f, [50.0, 80.0, 80.0, 20.0, 100.0, 25.0, 0.0, 0.0]);
    }

    #[test]
    fn suite_classifies_as_declared() {
        let config = cfg();
        for (app, expected) in default_workload_suite() {
            let got = classify_app(&app, 150, &config).unwrap();
            assert_eq!(got, expected, "app {}", app.app_id);
        }
    }

    #[test]
    fn pairings_cover_eighteen_workloads() {
        let suite = default_workload_suite();
        let pairings = default_pairings();
        assert_eq!(pairings.len(), 18);
        let labels = pairing_labels(&suite, &pairings);
        assert_eq!(labels.len(), 18);
        assert!(labels.contains(&"TI-MI1".to_string()));
        assert!(labels.contains(&"MI-US2".to_string()));
        for (i, j) in pairings {
            assert!(i < suite.len() && j < suite.len());
        }
    }

    #[test]
    fn dataset_counts_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let suite = default_workload_suite();
        let apps: Vec<SyntheticApp> = suite.iter().map(|(a, _)| a.clone()).take(1).collect();
        let states = crate::statespace::default_state_space();
        let powers = crate::statespace::DEFAULT_POWER_MENU_W;
        let config = OracleConfig {
            noise_sigma: 0.01,
            seed: 7,
            ..OracleConfig::default()
        };

        let p1 = dir.path().join("profiles.jsonl");
        let t1 = dir.path().join("training.jsonl");
        let summary = generate_dataset(&apps, &states, &powers, &[], &config, &p1, &t1).unwrap();
        // 5 slice sizes x 6 caps per option, both options
        assert_eq!(summary.n_solo, 60);
        assert_eq!(summary.n_corun, 0);
        assert_eq!(summary.n_profiles, 1);

        let p2 = dir.path().join("profiles2.jsonl");
        let t2 = dir.path().join("training2.jsonl");
        generate_dataset(&apps, &states, &powers, &[], &config, &p2, &t2).unwrap();
        assert_eq!(
            std::fs::read(&p1).unwrap(),
            std::fs::read(&p2).unwrap()
        );
        assert_eq!(
            std::fs::read(&t1).unwrap(),
            std::fs::read(&t2).unwrap()
        );
    }

    #[test]
    fn corun_record_cardinality() {
        let dir = tempfile::tempdir().unwrap();
        let suite = default_workload_suite();
        let apps: Vec<SyntheticApp> = suite.iter().map(|(a, _)| a.clone()).collect();
        let states = crate::statespace::default_state_space();
        let powers = crate::statespace::DEFAULT_POWER_MENU_W;
        let summary = generate_dataset(
            &apps,
            &states,
            &powers,
            &default_pairings(),
            &cfg(),
            &dir.path().join("p.jsonl"),
            &dir.path().join("t.jsonl"),
        )
        .unwrap();
        assert_eq!(summary.n_corun, 18 * 4 * 6 * 2);
        assert_eq!(summary.n_solo, 12 * 60);
    }

    #[test]
    fn config_defaults_embedded_in_file_form() {
        let parsed: OracleConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(parsed, OracleConfig::default());
        let parsed: OracleConfig = serde_json::from_str(r#"{"seed": 9}"#).unwrap();
        assert_eq!(parsed.seed, 9);
        assert_eq!(parsed.base_power_w, 50.0);
    }
}
