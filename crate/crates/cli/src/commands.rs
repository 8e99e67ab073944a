//! Implementations of the five subcommands. Each returns an [`Outcome`] so
//! `main` can map infeasible policies to their dedicated exit code; all other
//! failures bubble up as errors.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;

use migopt_core::files;
use migopt_core::model::{fit_interference, fit_solo};
use migopt_core::oracle::{self, OracleConfig, SyntheticApp};
use migopt_core::policy::{
    build_report, compare_worst_best, evaluate_candidates, hill_climb, select_best, PolicyError,
    PolicyKind, PolicyProblem, Solution,
};
use migopt_core::profiles::ApplicationProfile;
use migopt_core::statespace::{MemoryOption, StateSpace};

use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Infeasible,
}

fn load_space(states: Option<&Path>) -> anyhow::Result<StateSpace> {
    files::load_state_space(states).context("loading state-space config")
}

fn load_oracle(config: Option<&Path>) -> anyhow::Result<OracleConfig> {
    files::load_oracle_config(config).context("loading oracle config")
}

pub struct SynthOptions {
    pub out_dir: PathBuf,
    pub oracle_config: Option<PathBuf>,
    pub states: Option<PathBuf>,
    pub seed: Option<u64>,
    pub noise_sigma: Option<f64>,
}

pub fn synth(options: SynthOptions, manifest: &RunManifest) -> anyhow::Result<Outcome> {
    if !options.out_dir.is_dir() {
        bail!(
            "output directory {} does not exist",
            options.out_dir.display()
        );
    }
    let oracle_path = crate::manifest::pick(options.oracle_config, &manifest.oracle_config);
    let mut config = load_oracle(oracle_path.as_deref())?;
    if let Some(seed) = options.seed {
        config.seed = seed;
    }
    if let Some(sigma) = options.noise_sigma {
        config.noise_sigma = sigma;
    }
    let states_path = crate::manifest::pick(options.states, &manifest.states);
    let space = load_space(states_path.as_deref())?;
    let min_power = space
        .min_power_w()
        .context("state-space config has an empty power menu")?;
    config.validate(min_power)?;

    let suite = oracle::default_workload_suite();
    let apps: Vec<SyntheticApp> = suite.into_iter().map(|(app, _)| app).collect();
    let profiles_path = options.out_dir.join("profiles.jsonl");
    let training_path = options.out_dir.join("training.jsonl");
    let summary = oracle::generate_dataset(
        &apps,
        &space.states,
        &space.power_caps_w,
        &oracle::default_pairings(),
        &config,
        &profiles_path,
        &training_path,
    )?;

    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "profiles": profiles_path,
            "training": training_path,
            "n_profiles": summary.n_profiles,
            "n_solo": summary.n_solo,
            "n_corun": summary.n_corun,
            "seed": config.seed,
            "noise_sigma": config.noise_sigma,
        }))?
    );
    Ok(Outcome::Success)
}

pub struct TrainOptions {
    pub profiles: Option<PathBuf>,
    pub training: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub states: Option<PathBuf>,
}

pub fn train(options: TrainOptions, manifest: &RunManifest) -> anyhow::Result<Outcome> {
    let profiles_path = crate::manifest::pick(options.profiles, &manifest.profiles)
        .context("--profiles is required (flag or manifest)")?;
    let training_path = crate::manifest::pick(options.training, &manifest.training)
        .context("--training is required (flag or manifest)")?;
    let out_path = crate::manifest::pick(options.out, &manifest.coefficients)
        .context("--out is required (flag or manifest)")?;
    let states_path = crate::manifest::pick(options.states, &manifest.states);

    let space = load_space(states_path.as_deref())?;
    let profiles = files::load_profiles(&profiles_path)?;
    let records = files::load_training_records(&training_path)?;
    if records.is_empty() {
        bail!("training file {} has no records", training_path.display());
    }
    let samples = files::resolve_training(&records, &profiles, &space)?;
    let (solo, corun): (Vec<_>, Vec<_>) = samples.into_iter().partition(|s| s.is_solo());

    let table = fit_solo(&solo)?;
    let table = if corun.is_empty() {
        table
    } else {
        fit_interference(&corun, table)?
    };
    files::save_coefficients(&out_path, &table)?;

    println!("{:<22} {:>7} {:>12} {:>8} {:>12}", "key", "n_solo", "rms_solo", "n_corun", "rms_corun");
    let mut with_d = 0usize;
    for (key, entry) in table.iter() {
        let rms_corun = entry
            .rms_corun
            .map(|v| format!("{v:.4e}"))
            .unwrap_or_else(|| "-".into());
        let n_corun = if entry.n_corun > 0 {
            entry.n_corun.to_string()
        } else {
            "-".into()
        };
        println!(
            "{:<22} {:>7} {:>12.4e} {:>8} {:>12}",
            key.to_string(),
            entry.n_solo,
            entry.rms_solo,
            n_corun,
            rms_corun
        );
        if entry.d.is_some() {
            with_d += 1;
        }
    }
    println!(
        "{} keys fitted ({} with interference coefficients) -> {}",
        table.len(),
        with_d,
        out_path.display()
    );
    Ok(Outcome::Success)
}

pub struct SolveOptions {
    pub coeffs: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub problem: Option<String>,
    pub alpha: Option<f64>,
    pub power_w: Option<u32>,
    pub apps: Option<String>,
    pub states: Option<PathBuf>,
    pub hill_climb: bool,
    pub out: Option<PathBuf>,
}

fn parse_problem(
    problem: Option<String>,
    alpha: Option<f64>,
    power_w: Option<u32>,
    apps: Vec<ApplicationProfile>,
    manifest: &RunManifest,
) -> anyhow::Result<PolicyProblem> {
    let kind: PolicyKind = crate::manifest::pick(problem, &manifest.problem)
        .context("--problem is required (p1 or p2)")?
        .parse()
        .map_err(anyhow::Error::msg)?;
    let alpha = crate::manifest::pick(alpha, &manifest.alpha).context("--alpha is required")?;
    let power_w = crate::manifest::pick(power_w, &manifest.power_w);
    let problem = PolicyProblem {
        kind,
        apps,
        alpha,
        power_w: match kind {
            PolicyKind::Throughput => power_w,
            PolicyKind::Efficiency => None,
        },
    };
    problem.validate()?;
    Ok(problem)
}

fn resolve_apps(
    spec: &str,
    profiles: &[ApplicationProfile],
) -> anyhow::Result<Vec<ApplicationProfile>> {
    spec.split(',')
        .map(|id| {
            let id = id.trim();
            profiles
                .iter()
                .find(|p| p.app_id == id)
                .cloned()
                .with_context(|| format!("unknown app_id '{id}'"))
        })
        .collect()
}

fn emit(report: &impl Serialize, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn solve_cmd(options: SolveOptions, manifest: &RunManifest) -> anyhow::Result<Outcome> {
    let coeffs_path = crate::manifest::pick(options.coeffs, &manifest.coefficients)
        .context("--coeffs is required (flag or manifest)")?;
    let profiles_path = crate::manifest::pick(options.profiles, &manifest.profiles)
        .context("--profiles is required (flag or manifest)")?;
    let states_path = crate::manifest::pick(options.states, &manifest.states);

    let table = files::load_coefficients(&coeffs_path)?;
    let profiles = files::load_profiles(&profiles_path)?;
    let space = load_space(states_path.as_deref())?;

    let apps_spec = crate::manifest::pick(options.apps, &manifest.apps.clone().map(|v| v.join(",")))
        .context("--apps is required (comma-separated ids)")?;
    let apps = resolve_apps(&apps_spec, &profiles)?;
    let problem = parse_problem(
        options.problem,
        options.alpha,
        options.power_w,
        apps,
        manifest,
    )?;

    let evaluations = evaluate_candidates(&problem, &space.states, &space.power_caps_w, &table)?;
    let solution: Option<Solution> = if options.hill_climb {
        match hill_climb(&problem, &space.states, &space.power_caps_w, &table, (0, 0)) {
            Ok(s) => Some(s),
            Err(PolicyError::Infeasible) => None,
            Err(err) => return Err(err.into()),
        }
    } else {
        select_best(problem.kind, &evaluations).map(|eval| {
            // rebuild the solution from the chosen evaluation
            Solution {
                state: space.states[eval.state_index].clone(),
                power_w: eval.power_w,
                predicted_rperfs: eval.rperfs.clone(),
                predicted_throughput: eval.throughput,
                predicted_fairness: eval.fairness,
                objective: eval.objective(problem.kind),
            }
        })
    };

    let report = build_report(&problem, evaluations, solution.as_ref());
    emit(&report, options.out.as_deref())?;
    if solution.is_none() {
        eprintln!(
            "{}",
            serde_json::json!({"error": "no candidate satisfies the fairness constraint"})
        );
        return Ok(Outcome::Infeasible);
    }
    Ok(Outcome::Success)
}

pub struct EvalOptions {
    pub coeffs: Option<PathBuf>,
    pub oracle_config: Option<PathBuf>,
    pub states: Option<PathBuf>,
    pub problem: Option<String>,
    pub alphas: Vec<f64>,
    pub power_w: Option<u32>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct PairOutcome {
    pair: String,
    apps: [String; 2],
    worst: f64,
    proposal: f64,
    best: f64,
    chosen_state_id: String,
    chosen_power_w: u32,
    fairness_violation: bool,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    problem: PolicyKind,
    alpha: f64,
    power_w: Option<u32>,
    pairs: Vec<PairOutcome>,
    geomean: GeomeanSummary,
    fairness_violations: usize,
}

#[derive(Debug, Serialize)]
struct GeomeanSummary {
    worst: f64,
    proposal: f64,
    best: f64,
    proposal_over_best: f64,
}

fn geomean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, n), v| (s + v.ln(), n + 1));
    if count == 0 {
        return f64::NAN;
    }
    (sum / count as f64).exp()
}

pub fn eval_cmd(options: EvalOptions, manifest: &RunManifest) -> anyhow::Result<Outcome> {
    let coeffs_path = crate::manifest::pick(options.coeffs, &manifest.coefficients)
        .context("--coeffs is required (flag or manifest)")?;
    let oracle_path = crate::manifest::pick(options.oracle_config, &manifest.oracle_config);
    let states_path = crate::manifest::pick(options.states, &manifest.states);

    let table = files::load_coefficients(&coeffs_path)?;
    let config = load_oracle(oracle_path.as_deref())?;
    let space = load_space(states_path.as_deref())?;
    let kind: PolicyKind = crate::manifest::pick(options.problem, &manifest.problem)
        .context("--problem is required (p1 or p2)")?
        .parse()
        .map_err(anyhow::Error::msg)?;
    let alphas = if options.alphas.is_empty() {
        manifest.alpha.map(|a| vec![a]).unwrap_or_default()
    } else {
        options.alphas.clone()
    };
    if alphas.is_empty() {
        bail!("--alpha is required (one value or a comma-separated sweep)");
    }
    let power_w = crate::manifest::pick(options.power_w, &manifest.power_w);

    let suite = oracle::default_workload_suite();
    let pairings = oracle::default_pairings();
    let labels = oracle::pairing_labels(&suite, &pairings);

    let mut reports = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let mut pairs = Vec::with_capacity(pairings.len());
        for (&(i, j), label) in pairings.iter().zip(&labels) {
            let pair_apps = [suite[i].0.clone(), suite[j].0.clone()];
            let profiles = vec![
                oracle::synthesize_profile(&pair_apps[0]),
                oracle::synthesize_profile(&pair_apps[1]),
            ];
            let problem = match kind {
                PolicyKind::Throughput => PolicyProblem::throughput_at(
                    profiles,
                    alpha,
                    power_w.context("--power-w is required for p1")?,
                ),
                PolicyKind::Efficiency => PolicyProblem::efficiency(profiles, alpha),
            };
            let truth = |state: &migopt_core::PartitionState, power: u32| {
                let hw = migopt_core::HardwareState::new(state.clone(), power);
                (0..pair_apps.len())
                    .map(|slot| {
                        oracle::true_rperf(&pair_apps, &hw, slot, &config)
                            .map_err(|e| PolicyError::GroundTruth(e.to_string()))
                    })
                    .collect()
            };
            let comparison = compare_worst_best(
                &problem,
                &space.states,
                &space.power_caps_w,
                &table,
                truth,
            )
            .with_context(|| format!("pair {label} at alpha {alpha}"))?;
            pairs.push(PairOutcome {
                pair: label.clone(),
                apps: [pair_apps[0].app_id.clone(), pair_apps[1].app_id.clone()],
                worst: comparison.worst.objective,
                proposal: comparison.proposal.objective,
                best: comparison.best.objective,
                chosen_state_id: comparison.proposal.state_id.clone(),
                chosen_power_w: comparison.proposal.power_w,
                fairness_violation: comparison.proposal_fairness_violation,
            });
        }
        let violations = pairs.iter().filter(|p| p.fairness_violation).count();
        let g_worst = geomean(pairs.iter().map(|p| p.worst));
        let g_proposal = geomean(pairs.iter().map(|p| p.proposal));
        let g_best = geomean(pairs.iter().map(|p| p.best));
        reports.push(EvalReport {
            problem: kind,
            alpha,
            power_w: match kind {
                PolicyKind::Throughput => power_w,
                PolicyKind::Efficiency => None,
            },
            pairs,
            geomean: GeomeanSummary {
                worst: g_worst,
                proposal: g_proposal,
                best: g_best,
                proposal_over_best: g_proposal / g_best,
            },
            fairness_violations: violations,
        });
    }

    emit(&reports, options.out.as_deref())?;
    Ok(Outcome::Success)
}

pub struct ClassifyOptions {
    pub profiles: Option<PathBuf>,
    pub training: Option<PathBuf>,
    pub use_oracle: bool,
    pub oracle_config: Option<PathBuf>,
    pub states: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum ClassifyRow {
    Ok { app_id: String, class: String },
    Err { app_id: String, error: String },
}

pub fn classify_cmd(options: ClassifyOptions, manifest: &RunManifest) -> anyhow::Result<Outcome> {
    let states_path = crate::manifest::pick(options.states, &manifest.states);
    let space = load_space(states_path.as_deref())?;
    let min_power = space
        .min_power_w()
        .context("state-space config has an empty power menu")?;

    let rows: Vec<ClassifyRow> = if options.use_oracle {
        let oracle_path = crate::manifest::pick(options.oracle_config, &manifest.oracle_config);
        let config = load_oracle(oracle_path.as_deref())?;
        oracle::default_workload_suite()
            .iter()
            .map(|(app, _)| match oracle::classify_app(app, min_power, &config) {
                Ok(class) => ClassifyRow::Ok {
                    app_id: app.app_id.clone(),
                    class: class.to_string(),
                },
                Err(err) => ClassifyRow::Err {
                    app_id: app.app_id.clone(),
                    error: err.to_string(),
                },
            })
            .collect()
    } else {
        let profiles_path = crate::manifest::pick(options.profiles, &manifest.profiles)
            .context("--profiles is required unless --use-oracle is set")?;
        let training_path = crate::manifest::pick(options.training, &manifest.training)
            .context("--training is required unless --use-oracle is set")?;
        let profiles = files::load_profiles(&profiles_path)?;
        let records = files::load_training_records(&training_path)?;

        // index min-allocation solo observations: 1 GPC, private, minimum cap
        let min_alloc_rperf = |app_id: &str| -> Option<f64> {
            records.iter().find_map(|r| {
                if r.subject != app_id || !r.partners.is_empty() || r.power_w != min_power {
                    return None;
                }
                let state = space.resolve_state(&r.state_id)?;
                let is_min_alloc = state.slices.len() == 1
                    && state.slices[0].gpcs == 1
                    && state.slices[0].option == MemoryOption::Private;
                is_min_alloc.then_some(r.rperf)
            })
        };

        profiles
            .iter()
            .map(|profile| {
                let Some(rperf) = min_alloc_rperf(&profile.app_id) else {
                    return ClassifyRow::Err {
                        app_id: profile.app_id.clone(),
                        error: format!(
                            "no min-allocation sample (solo, 1 GPC, private, {min_power} W)"
                        ),
                    };
                };
                match profile.classify(rperf) {
                    Ok(class) => ClassifyRow::Ok {
                        app_id: profile.app_id.clone(),
                        class: class.to_string(),
                    },
                    Err(err) => ClassifyRow::Err {
                        app_id: profile.app_id.clone(),
                        error: err.to_string(),
                    },
                }
            })
            .collect()
    };

    for row in &rows {
        println!("{}", serde_json::to_string(row)?);
    }
    Ok(Outcome::Success)
}
