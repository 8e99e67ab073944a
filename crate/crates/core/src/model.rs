//! The per-hardware-state linear performance model.
//!
//! Relative performance of an application on a slice is modeled as
//! `c . H(subject) + sum over partners of d . J(partner)`, where the
//! scalability coefficients `c` and the interference coefficients `d` are
//! fitted independently for every slice key — the (GPC count, memory option,
//! power cap) triple the subject runs under. Solo runs train `c` (the partner
//! term vanishes); co-runs train `d` on the residuals left by `c`.
//!
//! Keying by the subject's slice rather than the full partition state lets
//! solo runs at any supported GPC count contribute, and is
//! information-equivalent for menus where a slice size determines its
//! complement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lstsq;
use crate::profiles::{ApplicationProfile, ProfileError};
use crate::statespace::{HardwareState, MemoryOption, StateError};

/// Dimension of the scalability feature vector H.
pub const H_DIM: usize = 6;
/// Dimension of the interference feature vector J.
pub const J_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("key {key}: {have} samples, need at least {need}")]
    InsufficientSamples {
        key: SliceKey,
        have: usize,
        need: usize,
    },
    #[error("key {key}: design matrix is numerically rank-deficient")]
    RankDeficient { key: SliceKey },
    #[error("key {key}: no scalability coefficients fitted before interference")]
    MissingScalabilityCoefficients { key: SliceKey },
    #[error("key {key}: no coefficients in table")]
    UnknownKey { key: SliceKey },
    #[error("invalid training sample: {0}")]
    InvalidSample(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Identifies one fitted coefficient set: the slice a subject runs on plus
/// the chip power cap.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct SliceKey {
    pub gpcs: u32,
    pub option: MemoryOption,
    pub power_w: u32,
}

impl SliceKey {
    /// Key for the given application slot of a hardware state.
    pub fn for_slot(state: &HardwareState, slot: usize) -> Result<Self, StateError> {
        let slice = state.partition.slices.get(slot).ok_or_else(|| {
            StateError::InvalidAllocation(format!(
                "slot {slot} out of range for state '{}' with {} slices",
                state.partition.state_id,
                state.partition.slices.len()
            ))
        })?;
        Ok(Self {
            gpcs: slice.gpcs,
            option: slice.option,
            power_w: state.power.watts,
        })
    }
}

impl std::fmt::Display for SliceKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}g-{}@{}W", self.gpcs, self.option, self.power_w)
    }
}

/// Fitted coefficients for one slice key, plus enough bookkeeping to judge
/// how thin the training coverage was.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    /// Scalability coefficients (dot with H of the subject).
    pub c: [f64; H_DIM],
    /// Interference coefficients (dot with J of each partner); `None` until
    /// co-run samples for this key have been fitted.
    pub d: Option<[f64; J_DIM]>,
    pub n_solo: usize,
    pub n_corun: usize,
    pub rms_solo: f64,
    pub rms_corun: Option<f64>,
}

/// The persisted model: per-key coefficient entries in deterministic key
/// order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientTable {
    entries: BTreeMap<SliceKey, CoefficientEntry>,
}

impl CoefficientTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entry(&self, key: &SliceKey) -> Option<&CoefficientEntry> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: SliceKey, entry: CoefficientEntry) {
        self.entries.insert(key, entry);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SliceKey, &CoefficientEntry)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &SliceKey> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One measured observation: the subject's relative performance on its slot
/// of `state`, with `partners` occupying the remaining slots (empty for solo
/// runs). `measured_rperf` is always relative to the subject's exclusive
/// full-chip uncapped run; the library never renormalizes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub subject: ApplicationProfile,
    pub partners: Vec<ApplicationProfile>,
    pub state: HardwareState,
    pub subject_slot: usize,
    pub measured_rperf: f64,
}

impl TrainingSample {
    pub fn is_solo(&self) -> bool {
        self.partners.is_empty()
    }

    pub fn slice_key(&self) -> Result<SliceKey, StateError> {
        SliceKey::for_slot(&self.state, self.subject_slot)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.state.partition.validate_structure()?;
        if !self.measured_rperf.is_finite() || self.measured_rperf <= 0.0 {
            return Err(ModelError::InvalidSample(format!(
                "subject '{}': measured rperf {} must be positive and finite",
                self.subject.app_id, self.measured_rperf
            )));
        }
        if self.partners.len() + 1 != self.state.partition.slices.len() {
            return Err(ModelError::InvalidSample(format!(
                "subject '{}': {} partners for state '{}' with {} slices",
                self.subject.app_id,
                self.partners.len(),
                self.state.partition.state_id,
                self.state.partition.slices.len()
            )));
        }
        if self.subject_slot >= self.state.partition.slices.len() {
            return Err(ModelError::InvalidSample(format!(
                "subject '{}': slot {} out of range",
                self.subject.app_id, self.subject_slot
            )));
        }
        Ok(())
    }

    /// Canonical sample ordering within a key group, so that fitting is
    /// invariant under permutation of the input.
    fn sort_token(&self) -> (String, String, u64) {
        let partner_ids = self
            .partners
            .iter()
            .map(|p| p.app_id.as_str())
            .collect::<Vec<_>>()
            .join(",");
        (
            self.subject.app_id.clone(),
            partner_ids,
            self.measured_rperf.to_bits(),
        )
    }
}

fn group_by_key(
    samples: &[TrainingSample],
    want_solo: bool,
) -> Result<BTreeMap<SliceKey, Vec<&TrainingSample>>, ModelError> {
    let mut groups: BTreeMap<SliceKey, Vec<&TrainingSample>> = BTreeMap::new();
    for sample in samples {
        sample.validate()?;
        if sample.is_solo() != want_solo {
            return Err(ModelError::InvalidSample(format!(
                "subject '{}': expected a {} sample",
                sample.subject.app_id,
                if want_solo { "solo" } else { "co-run" }
            )));
        }
        groups.entry(sample.slice_key()?).or_default().push(sample);
    }
    for group in groups.values_mut() {
        group.sort_by_key(|s| s.sort_token());
    }
    Ok(groups)
}

/// Fits the scalability coefficients `c` per slice key from solo-run samples.
///
/// Every key needs at least [`H_DIM`] samples whose H vectors span the basis;
/// otherwise the key is reported as insufficient or rank-deficient.
pub fn fit_solo(samples: &[TrainingSample]) -> Result<CoefficientTable, ModelError> {
    let groups = group_by_key(samples, true)?;
    let mut table = CoefficientTable::new();
    for (key, group) in groups {
        if group.len() < H_DIM {
            return Err(ModelError::InsufficientSamples {
                key,
                have: group.len(),
                need: H_DIM,
            });
        }
        let mut rows = Vec::with_capacity(group.len() * H_DIM);
        let mut targets = Vec::with_capacity(group.len());
        for sample in &group {
            rows.extend_from_slice(sample.subject.feature_h()?.as_array());
            targets.push(sample.measured_rperf);
        }
        let fit = lstsq::fit(H_DIM, &rows, &targets)
            .map_err(|_| ModelError::RankDeficient { key })?;
        let mut c = [0.0; H_DIM];
        c.copy_from_slice(&fit.coefficients);
        table.insert(
            key,
            CoefficientEntry {
                c,
                d: None,
                n_solo: group.len(),
                n_corun: 0,
                rms_solo: fit.residual_rms,
                rms_corun: None,
            },
        );
    }
    Ok(table)
}

/// Fits the interference coefficients `d` per slice key from co-run samples,
/// regressing the residual left by the already-fitted `c` against the summed
/// J vectors of the partners. Returns the completed table.
pub fn fit_interference(
    samples: &[TrainingSample],
    mut table: CoefficientTable,
) -> Result<CoefficientTable, ModelError> {
    let groups = group_by_key(samples, false)?;
    for (key, group) in groups {
        let c = table
            .entry(&key)
            .map(|e| e.c)
            .ok_or(ModelError::MissingScalabilityCoefficients { key })?;
        if group.len() < J_DIM {
            return Err(ModelError::InsufficientSamples {
                key,
                have: group.len(),
                need: J_DIM,
            });
        }
        let mut rows = Vec::with_capacity(group.len() * J_DIM);
        let mut targets = Vec::with_capacity(group.len());
        for sample in &group {
            let mut summed = [0.0; J_DIM];
            for partner in &sample.partners {
                for (acc, j) in summed.iter_mut().zip(partner.feature_j().as_array()) {
                    *acc += j;
                }
            }
            rows.extend_from_slice(&summed);
            targets.push(sample.measured_rperf - sample.subject.feature_h()?.dot(&c));
        }
        let fit = lstsq::fit(J_DIM, &rows, &targets)
            .map_err(|_| ModelError::RankDeficient { key })?;
        let mut d = [0.0; J_DIM];
        d.copy_from_slice(&fit.coefficients);
        let entry = table.entries.get_mut(&key).expect("checked above");
        entry.d = Some(d);
        entry.n_corun = group.len();
        entry.rms_corun = Some(fit.residual_rms);
    }
    Ok(table)
}

/// Predicted relative performance of `subject` on the slice identified by
/// `key` with the given co-located partners. Clamped below at zero; no upper
/// clamp, so modeling noise above 1 is reported rather than hidden.
pub fn predict_rperf(
    subject: &ApplicationProfile,
    partners: &[&ApplicationProfile],
    key: &SliceKey,
    table: &CoefficientTable,
) -> Result<f64, ModelError> {
    let entry = table.entry(key).ok_or(ModelError::UnknownKey { key: *key })?;
    let mut value = subject.feature_h()?.dot(&entry.c);
    if !partners.is_empty() {
        let d = entry.d.ok_or(ModelError::UnknownKey { key: *key })?;
        for partner in partners {
            value += partner.feature_j().dot(&d);
        }
    }
    Ok(value.max(0.0))
}

/// Predicts relative performance for every application slot of `state`, in
/// input order. Slot `i` uses `apps[i]` as the subject and the remaining
/// applications as partners.
pub fn predict_pair(
    apps: &[ApplicationProfile],
    state: &HardwareState,
    table: &CoefficientTable,
) -> Result<Vec<f64>, ModelError> {
    state.partition.validate_structure()?;
    if apps.len() != state.partition.slices.len() {
        return Err(StateError::InvalidAllocation(format!(
            "{} applications for state '{}' with {} slices",
            apps.len(),
            state.partition.state_id,
            state.partition.slices.len()
        ))
        .into());
    }
    let mut rperfs = Vec::with_capacity(apps.len());
    for (slot, subject) in apps.iter().enumerate() {
        let key = SliceKey::for_slot(state, slot)?;
        let partners: Vec<&ApplicationProfile> = apps
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != slot)
            .map(|(_, p)| p)
            .collect();
        rperfs.push(predict_rperf(subject, &partners, &key, table)?);
    }
    Ok(rperfs)
}
