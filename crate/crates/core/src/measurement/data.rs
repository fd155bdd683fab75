use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::config::ConfigSet;
use crate::measurement::library::{classify_observable, LocalBasis, ObsLabelKind};
use crate::measurement::sensing::predict_expectations;
use crate::process::{ObservableKind, ProcessMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Probability,
    Expectation,
    /// Raw detector counts, to be normalized within their measurement group.
    Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub input: String,
    pub obs: String,
    pub value: f64,
    pub shots: u64,
    pub kind: RecordKind,
}

/// Measured (or simulated) outcomes, one record per configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub scenario: String,
    pub seed: u64,
    pub basis: String,
    pub records: Vec<Record>,
}

impl Dataset {
    pub fn to_json(&self) -> Result<String> {
        crate::json::to_string(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let data: Dataset = crate::json::from_str(s)?;
        data.validate()?;
        Ok(data)
    }

    pub fn with_scenario(mut self, name: impl Into<String>) -> Self {
        self.scenario = name.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.records {
            if !r.value.is_finite() {
                return Err(Error::NonFinite("dataset value"));
            }
            if r.kind == RecordKind::Probability && !(0.0..=1.0).contains(&r.value) {
                return Err(Error::InvalidProbability(r.value));
            }
        }
        Ok(())
    }

    /// Values of `set`'s configurations, in order. Projector labels padded with
    /// `I` that were not measured directly are marginalized from complete
    /// measurement groups, averaging over every local basis that completes the
    /// padded positions.
    pub fn values_for(&self, set: &ConfigSet) -> Result<Vec<f64>> {
        if self.records.iter().any(|r| r.kind == RecordKind::Counts) {
            return Err(Error::NormalizationImpossible(
                "dataset holds raw counts; normalize first".into(),
            ));
        }
        let table: HashMap<(&str, &str), f64> = self
            .records
            .iter()
            .map(|r| ((r.input.as_str(), r.obs.as_str()), r.value))
            .collect();
        set.configs()
            .iter()
            .map(|cfg| {
                let (i, o) = (cfg.input_label.as_str(), cfg.obs_label.as_str());
                if let Some(&v) = table.get(&(i, o)) {
                    return Ok(v);
                }
                marginal(&table, i, o).ok_or_else(|| {
                    Error::InvalidArgument(format!("no data for input {i}, observable {o}"))
                })
            })
            .collect()
    }
}

fn marginal(table: &HashMap<(&str, &str), f64>, input: &str, obs: &str) -> Option<f64> {
    if classify_observable(obs).ok()? != ObsLabelKind::Projector {
        return None;
    }
    let letters: Vec<char> = obs.chars().collect();
    let padded: Vec<usize> = (0..letters.len()).filter(|&q| letters[q] == 'I').collect();
    if padded.is_empty() {
        return None;
    }
    let mut total = 0.0;
    let mut settings = 0usize;
    for choice in 0..3usize.pow(padded.len() as u32) {
        let bases: Vec<LocalBasis> = (0..padded.len())
            .map(|j| LocalBasis::ALL[(choice / 3usize.pow(j as u32)) % 3])
            .collect();
        let mut sum = 0.0;
        let mut complete = true;
        for outcome in 0..(1usize << padded.len()) {
            let mut w = letters.clone();
            for (j, &q) in padded.iter().enumerate() {
                w[q] = bases[j].outcomes()[(outcome >> j) & 1];
            }
            let label: String = w.into_iter().collect();
            match table.get(&(input, label.as_str())) {
                Some(v) => sum += v,
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            total += sum;
            settings += 1;
        }
    }
    (settings > 0).then(|| total / settings as f64)
}

/// Measurement-group key: the input plus the local basis of every
/// non-identity position of a projector label.
fn group_key(input: &str, obs: &str) -> Option<(String, Vec<Option<LocalBasis>>)> {
    if classify_observable(obs).ok()? != ObsLabelKind::Projector {
        return None;
    }
    let setting = obs.chars().map(LocalBasis::of).collect();
    Some((input.to_string(), setting))
}

fn group_size(setting: &[Option<LocalBasis>]) -> usize {
    1 << setting.iter().filter(|b| b.is_some()).count()
}

/// Groups row indices by measurement group, in order of first appearance.
fn groups<'a, I>(items: I) -> Result<Vec<Vec<usize>>>
where
    I: Iterator<Item = (usize, &'a str, &'a str)>,
{
    let mut order: Vec<(String, Vec<Option<LocalBasis>>)> = Vec::new();
    let mut members: HashMap<(String, Vec<Option<LocalBasis>>), Vec<usize>> = HashMap::new();
    for (idx, input, obs) in items {
        let key = group_key(input, obs).ok_or_else(|| {
            Error::NormalizationImpossible(format!("{obs} is not a projector outcome"))
        })?;
        members
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(idx);
    }
    order
        .into_iter()
        .map(|key| {
            let rows = members.remove(&key).unwrap();
            let need = group_size(&key.1);
            if rows.len() != need {
                return Err(Error::NormalizationImpossible(format!(
                    "group for input {} has {} of {need} outcomes",
                    key.0,
                    rows.len()
                )));
            }
            Ok(rows)
        })
        .collect()
}

fn base_dataset(chi: &ProcessMatrix, seed: u64) -> Dataset {
    Dataset {
        scenario: String::new(),
        seed,
        basis: chi.basis().tag().to_string(),
        records: Vec::new(),
    }
}

/// Noise-free data: exact probabilities and expectation values.
pub fn exact_dataset(chi: &ProcessMatrix, set: &ConfigSet) -> Result<Dataset> {
    let y = predict_expectations(chi, set)?;
    let mut data = base_dataset(chi, 0);
    for (cfg, v) in set.configs().iter().zip(y) {
        let kind = match cfg.observable.kind() {
            ObservableKind::Projector => RecordKind::Probability,
            ObservableKind::Expectation => RecordKind::Expectation,
        };
        let value = if kind == RecordKind::Probability { v.clamp(0.0, 1.0) } else { v };
        data.records.push(Record {
            input: cfg.input_label.clone(),
            obs: cfg.obs_label.clone(),
            value,
            shots: 0,
            kind,
        });
    }
    Ok(data)
}

/// Finite-statistics data. Every complete group of projector outcomes receives
/// a multinomial sample of `shots` counts; expectation observables receive
/// additive Gaussian noise of standard deviation `1/√shots`.
pub fn simulate_counts(chi: &ProcessMatrix, set: &ConfigSet, shots: u64, seed: u64) -> Result<Dataset> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let y = predict_expectations(chi, set)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; set.len()];
    let mut kinds = vec![RecordKind::Counts; set.len()];

    let projector_rows = set
        .configs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.observable.kind() == ObservableKind::Projector)
        .map(|(i, c)| (i, c.input_label.as_str(), c.obs_label.as_str()));
    for rows in groups(projector_rows)? {
        let mut probs = Vec::with_capacity(rows.len());
        for &r in &rows {
            let p = y[r];
            if !(-1e-9..=1.0 + 1e-9).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
            probs.push(p.clamp(0.0, 1.0));
        }
        let counts = multinomial(&mut rng, shots, &probs);
        for (&r, c) in rows.iter().zip(counts) {
            values[r] = c as f64;
        }
    }

    let noise = Normal::new(0.0, 1.0 / (shots as f64).sqrt()).expect("positive std");
    for (i, cfg) in set.configs().iter().enumerate() {
        if cfg.observable.kind() == ObservableKind::Expectation {
            let bound = cfg.observable.operator_norm();
            values[i] = (y[i] + noise.sample(&mut rng)).clamp(-bound, bound);
            kinds[i] = RecordKind::Expectation;
        }
    }

    let mut data = base_dataset(chi, seed);
    for (i, cfg) in set.configs().iter().enumerate() {
        data.records.push(Record {
            input: cfg.input_label.clone(),
            obs: cfg.obs_label.clone(),
            value: values[i],
            shots,
            kind: kinds[i],
        });
    }
    Ok(data)
}

/// Multinomial draw via sequential conditional binomials.
fn multinomial<R: rand::Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut remaining = n;
    let mut mass: f64 = probs.iter().sum();
    let mut out = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() {
            out.push(remaining);
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = if remaining == 0 || q == 0.0 {
            0
        } else if q >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        out.push(c);
        remaining -= c;
        mass -= p;
    }
    out
}

/// Converts count records into probabilities within their complete
/// measurement groups; other records pass through.
pub fn normalize_counts(data: &Dataset) -> Result<Dataset> {
    let count_rows = data
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.kind == RecordKind::Counts)
        .map(|(i, r)| (i, r.input.as_str(), r.obs.as_str()));
    let mut out = data.clone();
    for rows in groups(count_rows)? {
        let total: f64 = rows.iter().map(|&r| data.records[r].value).sum();
        if !(total > 0.0) {
            return Err(Error::NormalizationImpossible(format!(
                "group for input {} has zero total counts",
                data.records[rows[0]].input
            )));
        }
        for &r in &rows {
            out.records[r].value = data.records[r].value / total;
            out.records[r].kind = RecordKind::Probability;
        }
    }
    Ok(out)
}
