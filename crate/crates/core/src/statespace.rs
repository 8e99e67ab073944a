//! Partition states, power-cap menus, the private-option memory-module
//! mapping, and enumeration/validation of the searchable hardware space.
//!
//! The defaults reproduce the four-state, six-cap menu of a two-slot
//! MIG-style partitioning (4+3 GPC splits, shared or private LLC/HBM,
//! 150..=250 W in 20 W steps), but every menu is plain configuration data so
//! finer-grained future hardware fits without code changes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// GPC counts a single slice may occupy. 5 and 6 are not offered by the
/// hardware; 8 only exists with partitioning disabled.
pub const SLICE_GPC_CHOICES: [u32; 5] = [1, 2, 3, 4, 7];

/// One GPC is turned off whenever partitioning is active.
pub const USABLE_GPCS_PARTITIONED: u32 = 7;

/// Total LLC/HBM modules on the chip.
pub const MEMORY_MODULES_TOTAL: u32 = 8;

/// Default chip power-cap menu in watts.
pub const DEFAULT_POWER_MENU_W: [u32; 6] = [150, 170, 190, 210, 230, 250];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
}

/// Whether co-located slices share the full LLC/HBM pool or receive disjoint
/// memory modules.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum MemoryOption {
    Shared,
    Private,
}

impl std::fmt::Display for MemoryOption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MemoryOption::Shared => write!(f, "shared"),
            MemoryOption::Private => write!(f, "private"),
        }
    }
}

impl std::str::FromStr for MemoryOption {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shared" => Ok(MemoryOption::Shared),
            "private" => Ok(MemoryOption::Private),
            other => Err(StateError::InvalidAllocation(format!(
                "unknown memory option '{other}'"
            ))),
        }
    }
}

/// GPCs and memory option granted to one application slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SliceAllocation {
    pub gpcs: u32,
    pub option: MemoryOption,
}

impl SliceAllocation {
    pub fn validate(&self) -> Result<(), StateError> {
        if !SLICE_GPC_CHOICES.contains(&self.gpcs) {
            return Err(StateError::InvalidAllocation(format!(
                "{} GPCs per slice is not supported (choices: {:?})",
                self.gpcs, SLICE_GPC_CHOICES
            )));
        }
        Ok(())
    }
}

/// LLC/HBM modules granted to a private slice of the given size.
pub fn private_memory_modules(gpcs: u32) -> Result<u32, StateError> {
    match gpcs {
        1 => Ok(1),
        2 => Ok(2),
        3 => Ok(4),
        4 => Ok(4),
        7 => Ok(8),
        other => Err(StateError::InvalidAllocation(format!(
            "no private memory-module mapping for {other} GPCs"
        ))),
    }
}

/// An ordered partition layout: slice `i` hosts application slot `i`.
///
/// The memory option is stored once per state because the evaluated menus use
/// uniform options; the per-slice field exists as an extension point, and
/// [`PartitionState::validate_structure`] rejects mixed options under the
/// default ruleset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionState {
    pub state_id: String,
    pub slices: Vec<SliceAllocation>,
    pub option: MemoryOption,
}

impl PartitionState {
    /// Builds a state whose slices all use the same memory option.
    pub fn uniform(state_id: impl Into<String>, gpcs: &[u32], option: MemoryOption) -> Self {
        Self {
            state_id: state_id.into(),
            slices: gpcs
                .iter()
                .map(|&g| SliceAllocation { gpcs: g, option })
                .collect(),
            option,
        }
    }

    /// Single-slice state for exclusive solo runs, named so dataset records
    /// can refer to it without a state-space entry (`solo-3g-private`).
    pub fn solo(gpcs: u32, option: MemoryOption) -> Self {
        Self::uniform(format!("solo-{gpcs}g-{option}"), &[gpcs], option)
    }

    /// Recovers a solo state from its canonical id; `None` if the id does not
    /// follow the `solo-<gpcs>g-<option>` form.
    pub fn parse_solo_id(id: &str) -> Option<Self> {
        let rest = id.strip_prefix("solo-")?;
        let (gpcs_part, option_part) = rest.split_once('-')?;
        let gpcs: u32 = gpcs_part.strip_suffix('g')?.parse().ok()?;
        let option: MemoryOption = option_part.parse().ok()?;
        Some(Self::solo(gpcs, option))
    }

    pub fn gpc_sum(&self) -> u32 {
        self.slices.iter().map(|s| s.gpcs).sum()
    }

    /// Checks the menu-independent invariants: at least one slice, supported
    /// per-slice GPC counts, the partitioned-GPC budget, uniform options.
    pub fn validate_structure(&self) -> Result<(), StateError> {
        if self.slices.is_empty() {
            return Err(StateError::InvalidAllocation(format!(
                "state '{}' has no slices",
                self.state_id
            )));
        }
        for slice in &self.slices {
            slice.validate()?;
            if slice.option != self.option {
                return Err(StateError::InvalidAllocation(format!(
                    "state '{}' mixes memory options",
                    self.state_id
                )));
            }
        }
        let sum = self.gpc_sum();
        if sum > USABLE_GPCS_PARTITIONED {
            return Err(StateError::InvalidAllocation(format!(
                "state '{}' allocates {sum} GPCs, exceeding the partitioned budget of {}",
                self.state_id, USABLE_GPCS_PARTITIONED
            )));
        }
        Ok(())
    }
}

/// Chip-level power cap in watts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PowerCap {
    pub watts: u32,
}

/// One candidate hardware setup: a partition layout plus a power cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareState {
    pub partition: PartitionState,
    pub power: PowerCap,
}

impl HardwareState {
    pub fn new(partition: PartitionState, watts: u32) -> Self {
        Self {
            partition,
            power: PowerCap { watts },
        }
    }
}

/// The four default two-slot states, in menu order.
pub fn default_state_space() -> Vec<PartitionState> {
    vec![
        PartitionState::uniform("S1", &[4, 3], MemoryOption::Shared),
        PartitionState::uniform("S2", &[3, 4], MemoryOption::Shared),
        PartitionState::uniform("S3", &[4, 3], MemoryOption::Private),
        PartitionState::uniform("S4", &[3, 4], MemoryOption::Private),
    ]
}

/// The searchable menu: partition states plus the power-cap list.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub states: Vec<PartitionState>,
    pub power_caps_w: Vec<u32>,
}

impl Default for StateSpace {
    fn default() -> Self {
        Self {
            states: default_state_space(),
            power_caps_w: DEFAULT_POWER_MENU_W.to_vec(),
        }
    }
}

impl StateSpace {
    /// Accepts a hardware state iff its structure is valid, its slice count
    /// matches the application count, and its power cap is on the menu.
    pub fn validate(&self, state: &HardwareState, n_apps: usize) -> Result<(), StateError> {
        state.partition.validate_structure()?;
        if state.partition.slices.len() != n_apps {
            return Err(StateError::InvalidAllocation(format!(
                "state '{}' has {} slices for {} applications",
                state.partition.state_id,
                state.partition.slices.len(),
                n_apps
            )));
        }
        if !self.power_caps_w.contains(&state.power.watts) {
            return Err(StateError::InvalidAllocation(format!(
                "power cap {} W not in menu {:?}",
                state.power.watts, self.power_caps_w
            )));
        }
        Ok(())
    }

    pub fn candidate_count(&self) -> usize {
        self.states.len() * self.power_caps_w.len()
    }

    /// All `(state, power)` combinations in state-major, power-ascending-menu
    /// order.
    pub fn candidates(&self) -> impl Iterator<Item = HardwareState> + '_ {
        self.states.iter().flat_map(move |state| {
            self.power_caps_w
                .iter()
                .map(move |&watts| HardwareState::new(state.clone(), watts))
        })
    }

    pub fn min_power_w(&self) -> Option<u32> {
        self.power_caps_w.iter().copied().min()
    }

    pub fn find_state(&self, state_id: &str) -> Option<&PartitionState> {
        self.states.iter().find(|s| s.state_id == state_id)
    }

    /// Resolves a dataset `state_id` against the menu, falling back to the
    /// canonical solo-state naming.
    pub fn resolve_state(&self, state_id: &str) -> Option<PartitionState> {
        self.find_state(state_id)
            .cloned()
            .or_else(|| PartitionState::parse_solo_id(state_id))
    }
}

/// On-disk form of a state-space menu. Both fields default to the built-in
/// menu, so a config file may override either independently or be omitted
/// entirely.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSpaceConfig {
    #[serde(default = "default_state_configs")]
    pub states: Vec<StateConfig>,
    #[serde(default = "default_power_menu")]
    pub power_caps_w: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateConfig {
    pub id: String,
    pub gpcs: Vec<u32>,
    pub option: MemoryOption,
}

fn default_state_configs() -> Vec<StateConfig> {
    default_state_space()
        .into_iter()
        .map(|s| StateConfig {
            id: s.state_id.clone(),
            gpcs: s.slices.iter().map(|a| a.gpcs).collect(),
            option: s.option,
        })
        .collect()
}

fn default_power_menu() -> Vec<u32> {
    DEFAULT_POWER_MENU_W.to_vec()
}

impl Default for StateSpaceConfig {
    fn default() -> Self {
        Self {
            states: default_state_configs(),
            power_caps_w: default_power_menu(),
        }
    }
}

impl From<StateSpaceConfig> for StateSpace {
    fn from(config: StateSpaceConfig) -> Self {
        Self {
            states: config
                .states
                .into_iter()
                .map(|s| PartitionState::uniform(s.id, &s.gpcs, s.option))
                .collect(),
            power_caps_w: config.power_caps_w,
        }
    }
}
