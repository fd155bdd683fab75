use std::collections::HashSet;

use nalgebra::DVector;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use crate::measurement::library::{state_library, StateLibrary, INPUT_LETTERS, STATE_LETTERS};
use crate::process::{Observable, QState};

/// One (input state, observable) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub input: QState,
    pub observable: Observable,
    pub input_label: String,
    pub obs_label: String,
}

impl Configuration {
    pub fn from_labels(lib: &StateLibrary, input: &str, obs: &str) -> Result<Self> {
        Ok(Self {
            input: lib.state(input)?,
            observable: lib.observable(obs)?,
            input_label: input.to_string(),
            obs_label: obs.to_string(),
        })
    }
}

/// An ordered collection of configurations, optionally remembering which rows
/// of a parent set it was drawn from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigSet {
    configs: Vec<Configuration>,
    selection: Option<Vec<usize>>,
}

impl ConfigSet {
    pub fn new(configs: Vec<Configuration>) -> Self {
        Self { configs, selection: None }
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn selection(&self) -> Option<&[usize]> {
        self.selection.as_deref()
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.configs.first().map(|c| c.input.dim())
    }

    /// Row subset; indices must be unique and in range.
    pub fn subset(&self, indices: &[usize]) -> Result<ConfigSet> {
        let mut seen = HashSet::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() || !seen.insert(i) {
                return Err(Error::InvalidArgument(format!(
                    "selection index {i} is out of range or repeated"
                )));
            }
        }
        Ok(ConfigSet {
            configs: indices.iter().map(|&i| self.configs[i].clone()).collect(),
            selection: Some(indices.to_vec()),
        })
    }

    pub fn position(&self, input: &str, obs: &str) -> Option<usize> {
        self.configs
            .iter()
            .position(|c| c.input_label == input && c.obs_label == obs)
    }
}

/// Product of every input in `{H,V,D,R}^n` with every projector in
/// `{H,V,D,A,R,L}^n`; inputs vary in the outer loop. For two qubits this is the
/// 576-configuration tomography set.
pub fn full_config_set(n: usize) -> Result<ConfigSet> {
    let lib = state_library(n)?;
    let inputs = lib.words(&INPUT_LETTERS);
    let observables = lib.words(&STATE_LETTERS);
    let mut configs = Vec::with_capacity(inputs.len() * observables.len());
    for i in &inputs {
        let input = lib.state(i)?;
        for o in &observables {
            configs.push(Configuration {
                input: input.clone(),
                observable: lib.observable(o)?,
                input_label: i.clone(),
                obs_label: o.clone(),
            });
        }
    }
    Ok(ConfigSet::new(configs))
}

/// Named two-qubit configuration sets with local observables.
pub const TABLE1_IDS: [&str; 8] = [
    "HVDR-RI-IR",
    "HVDR-DI-ID",
    "HVDR-RL",
    "HVDR-DAxDA",
    "VDR-RI-IR",
    "VDR-DI-ID",
    "VDR-RL",
    "VDR-DA",
];

fn table1_parts(id: &str) -> Option<(&'static [char], Vec<&'static str>)> {
    const HVDR: &[char] = &['H', 'V', 'D', 'R'];
    const VDR: &[char] = &['V', 'D', 'R'];
    let (inputs, obs): (&[char], Vec<&str>) = match id {
        "HVDR-RI-IR" => (HVDR, vec!["RI", "IR"]),
        "HVDR-DI-ID" => (HVDR, vec!["DI", "ID"]),
        "HVDR-RL" => (HVDR, vec!["RR", "RL", "LR", "LL"]),
        "HVDR-DAxDA" => (HVDR, vec!["DD", "DA", "AD", "AA"]),
        "VDR-RI-IR" => (VDR, vec!["RI", "IR"]),
        "VDR-DI-ID" => (VDR, vec!["DI", "ID"]),
        "VDR-RL" => (VDR, vec!["RR", "RL", "LR", "LL"]),
        "VDR-DA" => (VDR, vec!["DD", "DA", "AD", "AA"]),
        _ => return None,
    };
    Some((inputs, obs))
}

/// Builds a named set: all two-qubit products of the listed input letters,
/// each paired with every listed observable.
pub fn table1_set(id: &str) -> Result<ConfigSet> {
    let (letters, obs) = table1_parts(id).ok_or_else(|| Error::UnknownLabel(id.to_string()))?;
    let lib = state_library(2)?;
    let mut configs = Vec::new();
    for i in lib.words(letters) {
        for o in &obs {
            configs.push(Configuration::from_labels(&lib, &i, o)?);
        }
    }
    Ok(ConfigSet::new(configs))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    Random { m: usize, seed: u64 },
    Named(String),
    All,
}

impl std::str::FromStr for Selection {
    type Err = Error;

    /// `all`, `random:<m>:<seed>` or `table1:<id>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad selection `{s}`"));
        if s == "all" {
            return Ok(Selection::All);
        }
        if let Some(id) = s.strip_prefix("table1:") {
            return Ok(Selection::Named(id.to_string()));
        }
        let rest = s.strip_prefix("random:").ok_or_else(bad)?;
        let (m, seed) = rest.split_once(':').ok_or_else(bad)?;
        Ok(Selection::Random {
            m: m.parse().map_err(|_| bad())?,
            seed: seed.parse().map_err(|_| bad())?,
        })
    }
}

/// Selects configurations from `parent`. Random selections draw `m` distinct
/// rows uniformly; named selections are rebuilt from labels and keep parent
/// indices only when every configuration exists in the parent.
pub fn select_configs(parent: &ConfigSet, strategy: &Selection) -> Result<ConfigSet> {
    match strategy {
        Selection::All => parent.subset(&(0..parent.len()).collect::<Vec<_>>()),
        Selection::Random { m, seed } => {
            if *m == 0 || *m > parent.len() {
                return Err(Error::InvalidArgument(format!(
                    "cannot select {m} of {} configurations",
                    parent.len()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let idx = sample(&mut rng, parent.len(), *m).into_vec();
            parent.subset(&idx)
        }
        Selection::Named(id) => {
            let mut set = table1_set(id)?;
            let found: Option<Vec<usize>> = set
                .configs
                .iter()
                .map(|c| parent.position(&c.input_label, &c.obs_label))
                .collect();
            set.selection = found;
            Ok(set)
        }
    }
}

/// Random product pure inputs combined with random single-body Pauli
/// observables: `n_inputs × n_obs` configurations.
pub fn random_pauli_configs(
    n: usize,
    n_inputs: usize,
    n_obs: usize,
    seed: u64,
) -> Result<ConfigSet> {
    let lib = state_library(n)?;
    let paulis = lib.single_body_paulis();
    if n_obs == 0 || n_obs > paulis.len() || n_inputs == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 1..={} observables and at least one input",
            paulis.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut configs = Vec::with_capacity(n_inputs * n_obs);
    for k in 0..n_inputs {
        let mut psi = random_qubit(&mut rng);
        for _ in 1..n {
            psi = psi.kronecker(&random_qubit(&mut rng));
        }
        let input = QState::pure(&psi);
        let chosen = sample(&mut rng, paulis.len(), n_obs).into_vec();
        for j in chosen {
            configs.push(Configuration {
                input: input.clone(),
                observable: lib.observable(&paulis[j])?,
                input_label: format!("psi{k}"),
                obs_label: paulis[j].clone(),
            });
        }
    }
    Ok(ConfigSet::new(configs))
}

/// Haar-random single-qubit pure state.
fn random_qubit<R: Rng>(rng: &mut R) -> DVector<C64> {
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let theta = cos_theta.acos();
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    DVector::from_row_slice(&[
        c((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ])
}
