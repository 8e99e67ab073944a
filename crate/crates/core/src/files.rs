//! On-disk artifact formats: line-delimited profile and training datasets,
//! the coefficient file, and the two optional config files.
//!
//! Training records reference applications and states by id; resolution
//! happens against a profile list and a state-space menu, with the canonical
//! `solo-<gpcs>g-<option>` naming covering single-slice states that no menu
//! needs to list.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CoefficientEntry, CoefficientTable, ModelError, SliceKey, H_DIM, J_DIM};
use crate::oracle::OracleConfig;
use crate::profiles::{ApplicationProfile, ProfileError};
use crate::statespace::{HardwareState, MemoryOption, StateSpace, StateSpaceConfig};

pub const COEFFICIENT_FILE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: unsupported coefficient file version {version}")]
    UnsupportedVersion { path: PathBuf, version: u32 },
    #[error("duplicate app_id '{0}' in profile file")]
    DuplicateAppId(String),
    #[error("unknown app_id '{0}' referenced by training record")]
    UnknownAppId(String),
    #[error("unknown state_id '{0}' referenced by training record")]
    UnknownStateId(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FileError + '_ {
    move |source| FileError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, FileError> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    let mut items = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| FileError::Parse {
            path: path.to_path_buf(),
            line: index + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), FileError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut writer = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut writer, item).map_err(|e| FileError::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        writer.write_all(b"\n").map_err(io_err(path))?;
    }
    writer.flush().map_err(io_err(path))
}

/// Loads and validates a line-delimited profile file.
pub fn load_profiles(path: &Path) -> Result<Vec<ApplicationProfile>, FileError> {
    let profiles: Vec<ApplicationProfile> = read_jsonl(path)?;
    let mut seen = std::collections::BTreeSet::new();
    for profile in &profiles {
        profile.validate()?;
        if !seen.insert(profile.app_id.clone()) {
            return Err(FileError::DuplicateAppId(profile.app_id.clone()));
        }
    }
    Ok(profiles)
}

pub fn write_profiles(path: &Path, profiles: &[ApplicationProfile]) -> Result<(), FileError> {
    write_jsonl(path, profiles)
}

/// One line of the training dataset, with applications and state referenced
/// by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub subject: String,
    pub partners: Vec<String>,
    pub state_id: String,
    pub slot: usize,
    pub power_w: u32,
    pub rperf: f64,
}

pub fn load_training_records(path: &Path) -> Result<Vec<TrainingRecord>, FileError> {
    read_jsonl(path)
}

pub fn write_training_records(
    path: &Path,
    records: &[TrainingRecord],
) -> Result<(), FileError> {
    write_jsonl(path, records)
}

/// Resolves id-based training records into full samples against a profile
/// list and a state-space menu.
pub fn resolve_training(
    records: &[TrainingRecord],
    profiles: &[ApplicationProfile],
    space: &StateSpace,
) -> Result<Vec<crate::model::TrainingSample>, FileError> {
    let by_id: BTreeMap<&str, &ApplicationProfile> = profiles
        .iter()
        .map(|p| (p.app_id.as_str(), p))
        .collect();
    let lookup = |id: &str| -> Result<ApplicationProfile, FileError> {
        by_id
            .get(id)
            .map(|p| (*p).clone())
            .ok_or_else(|| FileError::UnknownAppId(id.to_string()))
    };
    records
        .iter()
        .map(|record| {
            let partition = space
                .resolve_state(&record.state_id)
                .ok_or_else(|| FileError::UnknownStateId(record.state_id.clone()))?;
            let sample = crate::model::TrainingSample {
                subject: lookup(&record.subject)?,
                partners: record
                    .partners
                    .iter()
                    .map(|id| lookup(id))
                    .collect::<Result<_, _>>()?,
                state: HardwareState::new(partition, record.power_w),
                subject_slot: record.slot,
                measured_rperf: record.rperf,
            };
            sample.validate()?;
            Ok(sample)
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct CoefficientFile {
    version: u32,
    keys: Vec<CoefficientRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CoefficientRecord {
    gpcs: u32,
    option: MemoryOption,
    power_w: u32,
    c: Vec<f64>,
    d: Option<Vec<f64>>,
    n_solo: usize,
    n_corun: usize,
    rms_solo: f64,
    rms_corun: Option<f64>,
}

/// Writes the fitted model with keys in deterministic order.
pub fn save_coefficients(path: &Path, table: &CoefficientTable) -> Result<(), FileError> {
    let file = CoefficientFile {
        version: COEFFICIENT_FILE_VERSION,
        keys: table
            .iter()
            .map(|(key, entry)| CoefficientRecord {
                gpcs: key.gpcs,
                option: key.option,
                power_w: key.power_w,
                c: entry.c.to_vec(),
                d: entry.d.map(|d| d.to_vec()),
                n_solo: entry.n_solo,
                n_corun: entry.n_corun,
                rms_solo: entry.rms_solo,
                rms_corun: entry.rms_corun,
            })
            .collect(),
    };
    let out = File::create(path).map_err(io_err(path))?;
    let mut writer = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut writer, &file).map_err(|e| FileError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    writer.write_all(b"\n").map_err(io_err(path))?;
    writer.flush().map_err(io_err(path))
}

pub fn load_coefficients(path: &Path) -> Result<CoefficientTable, FileError> {
    let file = File::open(path).map_err(io_err(path))?;
    let parsed: CoefficientFile =
        serde_json::from_reader(BufReader::new(file)).map_err(|e| FileError::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
    if parsed.version != COEFFICIENT_FILE_VERSION {
        return Err(FileError::UnsupportedVersion {
            path: path.to_path_buf(),
            version: parsed.version,
        });
    }
    let mut table = CoefficientTable::new();
    for record in parsed.keys {
        let key = SliceKey {
            gpcs: record.gpcs,
            option: record.option,
            power_w: record.power_w,
        };
        let c: [f64; H_DIM] = record.c.try_into().map_err(|v: Vec<f64>| FileError::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("key {key}: c has {} entries, expected {H_DIM}", v.len()),
        })?;
        let d: Option<[f64; J_DIM]> = match record.d {
            None => None,
            Some(d) => Some(d.try_into().map_err(|v: Vec<f64>| FileError::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: format!("key {key}: d has {} entries, expected {J_DIM}", v.len()),
            })?),
        };
        table.insert(
            key,
            CoefficientEntry {
                c,
                d,
                n_solo: record.n_solo,
                n_corun: record.n_corun,
                rms_solo: record.rms_solo,
                rms_corun: record.rms_corun,
            },
        );
    }
    Ok(table)
}

/// State-space menu from an optional config file; the built-in menu when
/// `None`.
pub fn load_state_space(path: Option<&Path>) -> Result<StateSpace, FileError> {
    match path {
        None => Ok(StateSpace::default()),
        Some(path) => {
            let file = File::open(path).map_err(io_err(path))?;
            let config: StateSpaceConfig = serde_json::from_reader(BufReader::new(file))
                .map_err(|e| FileError::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: e.to_string(),
                })?;
            Ok(config.into())
        }
    }
}

/// Oracle parameters from an optional config file; defaults when `None`.
pub fn load_oracle_config(path: Option<&Path>) -> Result<OracleConfig, FileError> {
    match path {
        None => Ok(OracleConfig::default()),
        Some(path) => {
            let file = File::open(path).map_err(io_err(path))?;
            serde_json::from_reader(BufReader::new(file)).map_err(|e| FileError::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: e.to_string(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fit_interference, fit_solo};
    use crate::oracle::{self, OracleConfig};
    use crate::statespace::{default_state_space, DEFAULT_POWER_MENU_W};

    #[test]
    fn profile_file_round_trip_and_field_names() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.jsonl");
        let suite = oracle::default_workload_suite();
        let profiles: Vec<ApplicationProfile> = suite
            .iter()
            .map(|(app, _)| oracle::synthesize_profile(app))
            .collect();
        write_profiles(&path, &profiles).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let first = text.lines().next().unwrap();
        for field in [
            "app_id",
            "counters",
            "compute_throughput",
            "memory_throughput",
            "dram_throughput",
            "l2_hit_rate",
            "occupancy",
            "tensor_mixed",
            "tensor_double",
            "tensor_integer",
        ] {
            assert!(first.contains(field), "missing field {field} in {first}");
        }

        let loaded = load_profiles(&path).unwrap();
        assert_eq!(loaded, profiles);
    }

    #[test]
    fn duplicate_app_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.jsonl");
        let suite = oracle::default_workload_suite();
        let profile = oracle::synthesize_profile(&suite[0].0);
        write_profiles(&path, &[profile.clone(), profile]).unwrap();
        assert!(matches!(
            load_profiles(&path).unwrap_err(),
            FileError::DuplicateAppId(_)
        ));
    }

    #[test]
    fn training_records_resolve_against_menu_and_solo_ids() {
        let dir = tempfile::tempdir().unwrap();
        let profiles_path = dir.path().join("profiles.jsonl");
        let training_path = dir.path().join("training.jsonl");
        let suite = oracle::default_workload_suite();
        let apps: Vec<_> = suite.iter().map(|(a, _)| a.clone()).take(2).collect();
        oracle::generate_dataset(
            &apps,
            &default_state_space(),
            &DEFAULT_POWER_MENU_W,
            &[(0, 1)],
            &OracleConfig::default(),
            &profiles_path,
            &training_path,
        )
        .unwrap();

        let profiles = load_profiles(&profiles_path).unwrap();
        let records = load_training_records(&training_path).unwrap();
        let samples = resolve_training(&records, &profiles, &StateSpace::default()).unwrap();
        assert_eq!(samples.len(), records.len());
        assert!(samples.iter().any(|s| s.is_solo()));
        assert!(samples.iter().any(|s| !s.is_solo()));
    }

    #[test]
    fn unknown_ids_are_reported() {
        let profiles = vec![oracle::synthesize_profile(
            &oracle::default_workload_suite()[0].0,
        )];
        let space = StateSpace::default();
        let mut record = TrainingRecord {
            subject: "nobody".into(),
            partners: vec![],
            state_id: "solo-1g-private".into(),
            slot: 0,
            power_w: 150,
            rperf: 0.5,
        };
        assert!(matches!(
            resolve_training(std::slice::from_ref(&record), &profiles, &space).unwrap_err(),
            FileError::UnknownAppId(_)
        ));
        record.subject = profiles[0].app_id.clone();
        record.state_id = "S99".into();
        assert!(matches!(
            resolve_training(std::slice::from_ref(&record), &profiles, &space).unwrap_err(),
            FileError::UnknownStateId(_)
        ));
    }

    #[test]
    fn coefficient_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let profiles_path = dir.path().join("profiles.jsonl");
        let training_path = dir.path().join("training.jsonl");
        let suite = oracle::default_workload_suite();
        let apps: Vec<_> = suite.iter().map(|(a, _)| a.clone()).collect();
        oracle::generate_dataset(
            &apps,
            &default_state_space(),
            &DEFAULT_POWER_MENU_W,
            &oracle::default_pairings(),
            &OracleConfig::default(),
            &profiles_path,
            &training_path,
        )
        .unwrap();
        let profiles = load_profiles(&profiles_path).unwrap();
        let records = load_training_records(&training_path).unwrap();
        let samples = resolve_training(&records, &profiles, &StateSpace::default()).unwrap();
        let (solo, corun): (Vec<_>, Vec<_>) =
            samples.into_iter().partition(|s| s.is_solo());
        let table = fit_solo(&solo).unwrap();
        let table = fit_interference(&corun, table).unwrap();

        // the full default run covers every solo slice key, and the co-run
        // menu trains interference on the two-slot sizes
        assert_eq!(table.len(), 60);
        assert_eq!(table.iter().filter(|(_, e)| e.d.is_some()).count(), 24);

        let path = dir.path().join("coefficients.json");
        save_coefficients(&path, &table).unwrap();
        let loaded = load_coefficients(&path).unwrap();
        assert_eq!(loaded, table);

        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"version\": 1"));
    }

    #[test]
    fn coefficient_version_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("coefficients.json");
        std::fs::write(&path, r#"{"version": 2, "keys": []}"#).unwrap();
        assert!(matches!(
            load_coefficients(&path).unwrap_err(),
            FileError::UnsupportedVersion { version: 2, .. }
        ));
    }

    #[test]
    fn missing_files_name_the_path() {
        let err = load_profiles(Path::new("/nonexistent/profiles.jsonl")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/profiles.jsonl"));
    }
}
