//! Scenario configuration files and the convergence experiment: how close
//! reconstructions from `m` random configurations get to the full-data fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{derive_seed, Exec};
use crate::measurement::{
    exact_dataset, full_config_set, normalize_counts, select_configs, simulate_counts, ConfigSet, Dataset,
    Selection,
};
use crate::process::{process_fidelity, unitary_fidelity, ProcessMatrix, UnitaryGate};
use crate::solver::{
    epsilon_from_sigma, solve_constrained_ls, solve_cqpt, RecoveryProblem, RecoveryResult, SolverOptions,
};

use super::channels::{
    calibrate_near_identity, calibrate_qft_time, cz_decohered_with, near_identity_channel, qft_env_channel,
    DecoherenceModel, EnvironmentCoupling,
};

pub const DEFAULT_EPSILON_FACTOR: f64 = 1.05;

fn default_qft_env_dim() -> usize {
    2
}

/// Which channel a scenario simulates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    CzMixture {
        target_purity: f64,
        #[serde(default)]
        model: DecoherenceModel,
    },
    /// Either `evolution_time` is given or it is calibrated so that the
    /// fidelity with the ideal QFT equals `target_fidelity`.
    QftEnv {
        gamma: f64,
        #[serde(default = "default_qft_env_dim")]
        env_dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        evolution_time: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_fidelity: Option<f64>,
    },
    /// Either `strength` is given or it is calibrated to `target_fidelity`.
    NearIdentity {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strength: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_fidelity: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub kind: ScenarioKind,
    /// Shots per measurement setting; `None` gives exact expectations.
    #[serde(default)]
    pub shots: Option<u64>,
    /// Seeds the channel's random environment.
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self.kind {
            ScenarioKind::CzMixture { .. } => "cz_mixture",
            ScenarioKind::QftEnv { .. } => "qft_env",
            ScenarioKind::NearIdentity { .. } => "near_identity",
        }
    }

    pub fn ideal_gate(&self) -> Result<UnitaryGate> {
        Ok(match self.kind {
            ScenarioKind::CzMixture { .. } => UnitaryGate::cz(),
            ScenarioKind::QftEnv { .. } => UnitaryGate::qft(2),
            ScenarioKind::NearIdentity { n, .. } => {
                if !(2..=4).contains(&n) {
                    return Err(Error::InvalidArgument(format!("near-identity needs n ∈ 2..=4, got {n}")));
                }
                UnitaryGate::identity(1 << n)
            }
        })
    }

    pub fn qubits(&self) -> Result<usize> {
        Ok(self.ideal_gate()?.qubits())
    }

    /// The simulated channel, in the gate basis of the ideal gate.
    pub fn channel(&self) -> Result<ProcessMatrix> {
        match self.kind {
            ScenarioKind::CzMixture { target_purity, model } => cz_decohered_with(target_purity, model, self.seed),
            ScenarioKind::QftEnv { gamma, env_dim, evolution_time, target_fidelity } => {
                let coupling = match (evolution_time, target_fidelity) {
                    (Some(t), _) => EnvironmentCoupling::random(4, env_dim, gamma, t, self.seed)?,
                    (None, Some(f)) => calibrate_qft_time(gamma, env_dim, self.seed, f)?,
                    (None, None) => EnvironmentCoupling::random(4, env_dim, gamma, 1.0, self.seed)?,
                };
                qft_env_channel(&coupling)
            }
            ScenarioKind::NearIdentity { n, strength, target_fidelity } => {
                let g = match (strength, target_fidelity) {
                    (Some(g), _) => g,
                    (None, Some(f)) => calibrate_near_identity(n, self.seed, f)?,
                    (None, None) => {
                        return Err(Error::InvalidArgument("near_identity needs strength or target_fidelity".into()))
                    }
                };
                near_identity_channel(n, g, self.seed)
            }
        }
    }

    /// Dataset over the full configuration set: counts when `shots` is set,
    /// exact expectations otherwise.
    pub fn simulate(&self, chi: &ProcessMatrix, data_seed: u64) -> Result<(ConfigSet, Dataset)> {
        let full = full_config_set(chi.basis().dim().trailing_zeros() as usize)?;
        let data = match self.shots {
            Some(shots) => simulate_counts(chi, &full, shots, data_seed)?,
            None => exact_dataset(chi, &full)?,
        };
        Ok((full, data.with_scenario(self.name())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub m: usize,
    pub trials: usize,
    pub failed: usize,
    pub f_full_mean: f64,
    pub f_full_std: f64,
    pub f_ideal_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: ScenarioConfig,
    pub rows: Vec<ExperimentRow>,
}

/// Inputs shared by every trial: the full dataset and its least-squares fit.
#[derive(Debug, Clone)]
pub struct FullFit {
    pub set: ConfigSet,
    pub data: Dataset,
    pub fit: RecoveryResult,
}

impl FullFit {
    pub fn new(chi: &ProcessMatrix, scenario: &ScenarioConfig, data_seed: u64, exec: Exec) -> Result<Self> {
        let (set, data) = scenario.simulate(chi, data_seed)?;
        let data = normalize_counts(&data)?;
        let problem = RecoveryProblem::from_dataset(&data, &set, chi.basis().clone(), 0.0, exec)?;
        let fit = solve_constrained_ls(&problem, &SolverOptions::default())?;
        Ok(Self { set, data, fit })
    }

    /// Per-configuration RMS residual of the full fit.
    pub fn sigma(&self) -> f64 {
        self.fit.residual
    }

    /// ℓ1 reconstruction from `subset`, with `ε = factor·√m·σ`.
    pub fn reconstruct(&self, subset: &ConfigSet, factor: f64, opts: &SolverOptions) -> Result<RecoveryResult> {
        let m = subset.len();
        let eps = epsilon_from_sigma(self.sigma(), m, factor);
        let basis = self.fit.chi_star.basis().clone();
        let problem = RecoveryProblem::from_dataset(&self.data, subset, basis, eps, Exec::Sequential)?;
        solve_cqpt(&problem, opts)
    }
}

/// For each `m`, reconstructs from `trials` seeded random selections and
/// compares with the full-data fit and the ideal gate. Trials that fail to
/// solve are counted and excluded from the statistics.
pub fn convergence_experiment(
    scenario: &ScenarioConfig,
    m_list: &[usize],
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<ExperimentReport> {
    let chi = scenario.channel()?;
    let ideal = scenario.ideal_gate()?;
    let full = FullFit::new(&chi, scenario, derive_seed(seed, u64::MAX), exec)?;
    let n_full = full.set.len();
    if let Some(&bad) = m_list.iter().find(|&&m| m == 0 || m > n_full) {
        return Err(Error::InvalidArgument(format!("m = {bad} outside 1..={n_full}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial per m is required".into()));
    }

    let jobs: Vec<(usize, usize)> = m_list.iter().flat_map(|&m| (0..trials).map(move |t| (m, t))).collect();
    let opts = SolverOptions::default();
    let outcomes = exec.map_slice(&jobs, |&(m, t)| -> Option<(f64, f64)> {
        let trial_seed = derive_seed(seed, (m as u64) << 32 | t as u64);
        let subset = select_configs(&full.set, &Selection::Random { m, seed: trial_seed }).ok()?;
        let res = full.reconstruct(&subset, DEFAULT_EPSILON_FACTOR, &opts).ok()?;
        if !res.converged {
            return None;
        }
        let f_full = process_fidelity(&full.fit.chi_star, &res.chi_star).ok()?;
        let f_ideal = unitary_fidelity(&ideal, &res.chi_star).ok()?;
        Some((f_full, f_ideal))
    });

    let rows = m_list
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let ok: Vec<(f64, f64)> = outcomes[k * trials..(k + 1) * trials].iter().flatten().copied().collect();
            let (mean, std) = mean_std(ok.iter().map(|p| p.0));
            let (f_ideal_mean, _) = mean_std(ok.iter().map(|p| p.1));
            ExperimentRow { m, trials, failed: trials - ok.len(), f_full_mean: mean, f_full_std: std, f_ideal_mean }
        })
        .collect();
    Ok(ExperimentReport { scenario: scenario.clone(), rows })
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}
