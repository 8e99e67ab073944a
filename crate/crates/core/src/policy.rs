//! Throughput and fairness metrics, and the solvers that pick a partition
//! state (and power cap) for a set of co-located applications.
//!
//! Two policies are supported: maximize weighted speedup at a fixed power cap
//! (`p1`), or maximize weighted speedup per watt while searching power caps
//! too (`p2`). Both enforce `fairness > alpha` structurally — an infeasible
//! menu is an explicit error, never a silently relaxed constraint, and the
//! caller is expected to fall back to exclusive scheduling in that case.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, CoefficientTable, ModelError};
use crate::profiles::ApplicationProfile;
use crate::statespace::{HardwareState, PartitionState, StateError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("empty input")]
    EmptyInput,
    #[error("no candidate satisfies the fairness constraint")]
    Infeasible,
    #[error("a fixed-power problem requires a power cap")]
    MissingPowerCap,
    #[error("a power-sweep problem must not pin a power cap")]
    UnexpectedPowerCap,
    #[error("fairness threshold {0} must be non-negative")]
    InvalidAlpha(f64),
    #[error("start index ({0}, {1}) outside the candidate grid")]
    StartOutOfRange(usize, usize),
    #[error("candidate (state '{state_id}', {power_w} W): {source}")]
    Candidate {
        state_id: String,
        power_w: u32,
        source: ModelError,
    },
    #[error("ground truth evaluation failed: {0}")]
    GroundTruth(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Which objective the solver maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    /// Weighted speedup at a caller-fixed power cap.
    #[serde(rename = "p1")]
    Throughput,
    /// Weighted speedup per watt, with the power cap a decision variable.
    #[serde(rename = "p2")]
    Efficiency,
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicyKind::Throughput => write!(f, "p1"),
            PolicyKind::Efficiency => write!(f, "p2"),
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "p1" => Ok(PolicyKind::Throughput),
            "p2" => Ok(PolicyKind::Efficiency),
            other => Err(format!("unknown problem '{other}' (expected p1 or p2)")),
        }
    }
}

/// One policy instance: the applications to co-locate (slot order matters),
/// the fairness threshold, and — for fixed-power problems — the cap.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyProblem {
    pub kind: PolicyKind,
    pub apps: Vec<ApplicationProfile>,
    pub alpha: f64,
    pub power_w: Option<u32>,
}

impl PolicyProblem {
    pub fn throughput_at(apps: Vec<ApplicationProfile>, alpha: f64, power_w: u32) -> Self {
        Self {
            kind: PolicyKind::Throughput,
            apps,
            alpha,
            power_w: Some(power_w),
        }
    }

    pub fn efficiency(apps: Vec<ApplicationProfile>, alpha: f64) -> Self {
        Self {
            kind: PolicyKind::Efficiency,
            apps,
            alpha,
            power_w: None,
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.apps.is_empty() {
            return Err(PolicyError::EmptyInput);
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(PolicyError::InvalidAlpha(self.alpha));
        }
        match self.kind {
            PolicyKind::Throughput if self.power_w.is_none() => {
                Err(PolicyError::MissingPowerCap)
            }
            PolicyKind::Efficiency if self.power_w.is_some() => {
                Err(PolicyError::UnexpectedPowerCap)
            }
            _ => Ok(()),
        }
    }

    /// The power caps this problem actually explores.
    fn effective_powers(&self, menu: &[u32]) -> Result<Vec<u32>, PolicyError> {
        match self.kind {
            PolicyKind::Throughput => {
                let p = self.power_w.ok_or(PolicyError::MissingPowerCap)?;
                if !menu.contains(&p) {
                    return Err(StateError::InvalidAllocation(format!(
                        "power cap {p} W not in menu {menu:?}"
                    ))
                    .into());
                }
                Ok(vec![p])
            }
            PolicyKind::Efficiency => Ok(menu.to_vec()),
        }
    }
}

/// Weighted speedup: the sum of per-application relative performances.
/// Values above 1 beat time-sharing the chip.
pub fn throughput(rperfs: &[f64]) -> f64 {
    rperfs.iter().sum()
}

/// Minimum relative performance across the co-located applications.
pub fn fairness(rperfs: &[f64]) -> Result<f64, PolicyError> {
    rperfs
        .iter()
        .copied()
        .min_by(|a, b| a.partial_cmp(b).expect("rperfs are finite"))
        .ok_or(PolicyError::EmptyInput)
}

/// The objective a candidate is ranked by under the given policy.
pub fn objective_value(kind: PolicyKind, throughput: f64, power_w: u32) -> f64 {
    match kind {
        PolicyKind::Throughput => throughput,
        PolicyKind::Efficiency => throughput / power_w as f64,
    }
}

/// Predicted metrics for one `(state, power)` candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvaluation {
    #[serde(skip)]
    pub state_index: usize,
    #[serde(skip)]
    pub power_index: usize,
    pub state_id: String,
    pub power_w: u32,
    pub rperfs: Vec<f64>,
    pub throughput: f64,
    pub fairness: f64,
    pub feasible: bool,
}

impl CandidateEvaluation {
    pub fn objective(&self, kind: PolicyKind) -> f64 {
        objective_value(kind, self.throughput, self.power_w)
    }
}

/// Evaluates every `(state, power)` candidate in deterministic state-major,
/// power-menu order. Fixed-power problems restrict the sweep to their single
/// cap; the evaluation list length is always `|states| * |powers explored|`.
pub fn evaluate_candidates(
    problem: &PolicyProblem,
    states: &[PartitionState],
    powers: &[u32],
    table: &CoefficientTable,
) -> Result<Vec<CandidateEvaluation>, PolicyError> {
    problem.validate()?;
    let explored = problem.effective_powers(powers)?;
    let mut evaluations = Vec::with_capacity(states.len() * explored.len());
    for (state_index, state) in states.iter().enumerate() {
        for (power_index, &power_w) in explored.iter().enumerate() {
            let hw = HardwareState::new(state.clone(), power_w);
            let rperfs = model::predict_pair(&problem.apps, &hw, table).map_err(|source| {
                PolicyError::Candidate {
                    state_id: state.state_id.clone(),
                    power_w,
                    source,
                }
            })?;
            let throughput = throughput(&rperfs);
            let fairness = fairness(&rperfs)?;
            evaluations.push(CandidateEvaluation {
                state_index,
                power_index,
                state_id: state.state_id.clone(),
                power_w,
                rperfs,
                throughput,
                fairness,
                feasible: fairness > problem.alpha,
            });
        }
    }
    Ok(evaluations)
}

/// Best feasible candidate under the policy objective; ties go to the first
/// candidate in evaluation order. `None` when nothing is feasible.
pub fn select_best(
    kind: PolicyKind,
    evaluations: &[CandidateEvaluation],
) -> Option<&CandidateEvaluation> {
    let mut best: Option<(&CandidateEvaluation, f64)> = None;
    for eval in evaluations.iter().filter(|e| e.feasible) {
        let objective = eval.objective(kind);
        match best {
            Some((_, best_objective)) if objective <= best_objective => {}
            _ => best = Some((eval, objective)),
        }
    }
    best.map(|(eval, _)| eval)
}

/// A solver's pick with its predicted metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub state: PartitionState,
    pub power_w: u32,
    pub predicted_rperfs: Vec<f64>,
    pub predicted_throughput: f64,
    pub predicted_fairness: f64,
    pub objective: f64,
}

impl Solution {
    fn from_evaluation(
        kind: PolicyKind,
        states: &[PartitionState],
        eval: &CandidateEvaluation,
    ) -> Self {
        Self {
            state: states[eval.state_index].clone(),
            power_w: eval.power_w,
            predicted_rperfs: eval.rperfs.clone(),
            predicted_throughput: eval.throughput,
            predicted_fairness: eval.fairness,
            objective: eval.objective(kind),
        }
    }
}

/// Exhaustive search: evaluates the full candidate grid and returns the
/// feasible maximizer of the policy objective.
pub fn solve(
    problem: &PolicyProblem,
    states: &[PartitionState],
    powers: &[u32],
    table: &CoefficientTable,
) -> Result<Solution, PolicyError> {
    let evaluations = evaluate_candidates(problem, states, powers, table)?;
    select_best(problem.kind, &evaluations)
        .map(|eval| Solution::from_evaluation(problem.kind, states, eval))
        .ok_or(PolicyError::Infeasible)
}

/// Greedy ascent on the `(state index, power index)` grid with a
/// 4-neighborhood, maximizing the feasibility-filtered objective.
///
/// Returns the local optimum reached from `start`; when that walk strands on
/// infeasible ground, every grid cell is retried as a start before giving up.
/// The result is approximate: its objective never exceeds [`solve`]'s, with
/// equality guaranteed only on unimodal landscapes.
pub fn hill_climb(
    problem: &PolicyProblem,
    states: &[PartitionState],
    powers: &[u32],
    table: &CoefficientTable,
    start: (usize, usize),
) -> Result<Solution, PolicyError> {
    let evaluations = evaluate_candidates(problem, states, powers, table)?;
    let n_states = states.len();
    let n_powers = evaluations.len() / n_states.max(1);
    if start.0 >= n_states || start.1 >= n_powers {
        return Err(PolicyError::StartOutOfRange(start.0, start.1));
    }

    let value = |si: usize, pi: usize| -> f64 {
        let eval = &evaluations[si * n_powers + pi];
        if eval.feasible {
            eval.objective(problem.kind)
        } else {
            f64::NEG_INFINITY
        }
    };

    let climb = |start: (usize, usize)| -> Option<usize> {
        let (mut si, mut pi) = start;
        loop {
            let mut best = (si, pi);
            let mut best_value = value(si, pi);
            let mut neighbors = Vec::with_capacity(4);
            if si > 0 {
                neighbors.push((si - 1, pi));
            }
            if si + 1 < n_states {
                neighbors.push((si + 1, pi));
            }
            if pi > 0 {
                neighbors.push((si, pi - 1));
            }
            if pi + 1 < n_powers {
                neighbors.push((si, pi + 1));
            }
            for (ns, np) in neighbors {
                let v = value(ns, np);
                if v > best_value {
                    best = (ns, np);
                    best_value = v;
                }
            }
            if best == (si, pi) {
                break;
            }
            (si, pi) = best;
        }
        let index = si * n_powers + pi;
        evaluations[index].feasible.then_some(index)
    };

    let found = climb(start).or_else(|| {
        (0..n_states)
            .flat_map(|si| (0..n_powers).map(move |pi| (si, pi)))
            .find_map(climb)
    });
    found
        .map(|index| Solution::from_evaluation(problem.kind, states, &evaluations[index]))
        .ok_or(PolicyError::Infeasible)
}

/// True metrics of one candidate under a ground-truth evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub state_id: String,
    pub power_w: u32,
    pub rperfs: Vec<f64>,
    pub throughput: f64,
    pub fairness: f64,
    pub objective: f64,
}

/// Worst, model-proposed, and best candidates, all scored by ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub worst: CandidateScore,
    pub proposal: CandidateScore,
    pub best: CandidateScore,
    /// True when the proposal's *true* fairness misses the threshold even
    /// though its predicted fairness cleared it.
    pub proposal_fairness_violation: bool,
}

/// Scores the model's proposal against the true worst and best choices.
///
/// `ground_truth` maps a candidate `(state, power)` to the true per-slot
/// relative performances (from measurement or the synthetic oracle). Worst
/// and best extremize the true objective over truly feasible candidates; the
/// proposal is [`solve`]'s pick re-scored by ground truth.
pub fn compare_worst_best<F>(
    problem: &PolicyProblem,
    states: &[PartitionState],
    powers: &[u32],
    table: &CoefficientTable,
    mut ground_truth: F,
) -> Result<ComparisonReport, PolicyError>
where
    F: FnMut(&PartitionState, u32) -> Result<Vec<f64>, PolicyError>,
{
    let solution = solve(problem, states, powers, table)?;
    let explored = problem.effective_powers(powers)?;

    let mut scores = Vec::with_capacity(states.len() * explored.len());
    for state in states {
        for &power_w in &explored {
            let rperfs = ground_truth(state, power_w)?;
            let thr = throughput(&rperfs);
            let fair = fairness(&rperfs)?;
            scores.push(CandidateScore {
                state_id: state.state_id.clone(),
                power_w,
                rperfs,
                throughput: thr,
                fairness: fair,
                objective: objective_value(problem.kind, thr, power_w),
            });
        }
    }

    let mut worst: Option<&CandidateScore> = None;
    let mut best: Option<&CandidateScore> = None;
    for score in scores.iter().filter(|s| s.fairness > problem.alpha) {
        if worst.is_none_or(|w| score.objective < w.objective) {
            worst = Some(score);
        }
        if best.is_none_or(|b| score.objective > b.objective) {
            best = Some(score);
        }
    }
    let (worst, best) = match (worst, best) {
        (Some(w), Some(b)) => (w.clone(), b.clone()),
        _ => return Err(PolicyError::Infeasible),
    };

    let proposal = scores
        .iter()
        .find(|s| s.state_id == solution.state.state_id && s.power_w == solution.power_w)
        .expect("proposal comes from the same candidate grid")
        .clone();
    let proposal_fairness_violation = proposal.fairness <= problem.alpha;

    Ok(ComparisonReport {
        worst,
        proposal,
        best,
        proposal_fairness_violation,
    })
}

/// The chosen candidate in a solver report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenState {
    pub state_id: String,
    pub power_w: u32,
}

/// Predicted metrics of the chosen candidate in a solver report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedMetrics {
    pub rperfs: Vec<f64>,
    pub throughput: f64,
    pub fairness: f64,
    pub objective: f64,
}

/// Machine-readable solver output. `chosen` and `predicted` are `null` when
/// the menu is infeasible; `candidates` always lists the full evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub problem: PolicyKind,
    pub alpha: f64,
    pub power_w: Option<u32>,
    pub chosen: Option<ChosenState>,
    pub predicted: Option<PredictedMetrics>,
    pub candidates: Vec<CandidateEvaluation>,
}

/// Assembles the report for a solved (or infeasible) problem.
pub fn build_report(
    problem: &PolicyProblem,
    evaluations: Vec<CandidateEvaluation>,
    solution: Option<&Solution>,
) -> SolverReport {
    SolverReport {
        problem: problem.kind,
        alpha: problem.alpha,
        power_w: problem.power_w,
        chosen: solution.map(|s| ChosenState {
            state_id: s.state.state_id.clone(),
            power_w: s.power_w,
        }),
        predicted: solution.map(|s| PredictedMetrics {
            rperfs: s.predicted_rperfs.clone(),
            throughput: s.predicted_throughput,
            fairness: s.predicted_fairness,
            objective: s.objective,
        }),
        candidates: evaluations,
    }
}
