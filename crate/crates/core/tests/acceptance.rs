//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use cqpt::analysis::{recovery_constants, sorted_spectrum, sparsity_certification};
use cqpt::exec::{derive_seed, Exec};
use cqpt::linalg::{frobenius, random_unitary, CMat, C64};
use cqpt::measurement::{
    build_phi, full_config_set, predict_expectations, random_pauli_configs, select_configs, ConfigSet,
    Selection,
};
use cqpt::process::gates::{pauli_i, rz, tensor_all};
use cqpt::process::{
    chi_from_kraus, chi_from_unitary, gate_basis, matrix_norm, pauli_basis, process_fidelity, purity,
    unitary_fidelity, Norm, OperatorBasis, ProcessMatrix, UnitaryGate,
};
use cqpt::scenarios::{
    calibrate_near_identity, calibrate_qft_time, convergence_experiment, cz_decohered,
    local_correction_search, near_identity_channel, qft_env_channel, CorrectionOptions, DecoherenceModel,
    FullFit, ScenarioConfig, ScenarioKind, DEFAULT_EPSILON_FACTOR,
};
use cqpt::solver::{solve_cqpt, RecoveryProblem, RecoveryResult, SolverOptions};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, budget_s: u64) -> bool {
    elapsed <= Duration::from_secs(budget_s)
}

const EXEC: Exec = Exec::Parallel;

fn cz_gate_basis() -> Arc<OperatorBasis> {
    Arc::new(gate_basis(&UnitaryGate::cz()))
}

/// Noise-free problem over `set` with `ε` in scaled units.
fn exact_problem(chi: &ProcessMatrix, set: &ConfigSet, epsilon: f64) -> RecoveryProblem {
    let scale = 1.0 / (set.len() as f64).sqrt();
    let y = predict_expectations(chi, set).unwrap().iter().map(|v| v * scale).collect();
    let phi = build_phi(set, chi.basis().clone(), Exec::Sequential).unwrap();
    RecoveryProblem::new(y, phi, epsilon).unwrap()
}

fn certificates_hold(res: &RecoveryResult) -> bool {
    res.min_eig >= -1e-7 && res.tp_residual <= 1e-6 && res.residual <= res.epsilon * (1.0 + 1e-6) + 1e-8
}

/// Random channel of Kraus rank `k`, built from an isometry `d → d·k`.
fn random_channel(d: usize, k: usize, basis: Arc<OperatorBasis>, rng: &mut ChaCha8Rng) -> ProcessMatrix {
    let u = random_unitary(d * k, rng);
    let kraus: Vec<CMat> = (0..k).map(|e| u.view((e * d, 0), (d, d)).into_owned()).collect();
    chi_from_kraus(&kraus, basis).unwrap()
}

fn c1_sparse_representation() -> Outcome {
    let start = Instant::now();
    let chi = chi_from_unitary(&UnitaryGate::cz(), cz_gate_basis()).unwrap();
    let m = chi.chi();
    let lead = m[(0, 0)];
    let others = m.iter().enumerate().filter(|(i, _)| *i != 0).map(|(_, z)| z.norm()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        (lead - C64::new(4.0, 0.0)).norm() <= 1e-12 && others <= 1e-12 && within(elapsed, 1),
        format!("chi_11 = {:.3e}{:+.3e}i, max other = {others:.2e}, {elapsed:.2?}", lead.re, lead.im),
    )
}

fn c2_exact_recovery() -> Outcome {
    let start = Instant::now();
    let chi0 = chi_from_unitary(&UnitaryGate::cz(), cz_gate_basis()).unwrap();
    let full = full_config_set(2).unwrap();
    let opts = SolverOptions::default();
    let errors = EXEC.map_range(50, |t| {
        let set = select_configs(&full, &Selection::Random { m: 32, seed: derive_seed(2, t as u64) }).unwrap();
        match solve_cqpt(&exact_problem(&chi0, &set, 1e-8), &opts) {
            Ok(res) => frobenius(&(res.chi_star.chi() - chi0.chi())),
            Err(_) => f64::INFINITY,
        }
    });
    let ok = errors.iter().filter(|&&e| e <= 1e-4).count();
    let elapsed = start.elapsed();
    outcome(ok >= 48 && within(elapsed, 120), format!("{ok}/50 trials within 1e-4, {elapsed:.2?}"))
}

fn cz091_scenario() -> ScenarioConfig {
    ScenarioConfig {
        kind: ScenarioKind::CzMixture { target_purity: 0.91, model: DecoherenceModel::Environment },
        shots: Some(10_000),
        seed: 0,
    }
}

const EXPERIMENT_SEED: u64 = 0;

fn c3_convergence() -> Outcome {
    let start = Instant::now();
    let report = convergence_experiment(&cz091_scenario(), &[18, 32, 64, 128], 50, EXPERIMENT_SEED, EXEC).unwrap();
    let mean = |m: usize| report.rows.iter().find(|r| r.m == m).unwrap().f_full_mean;
    let (f18, f32_, f128) = (mean(18), mean(32), mean(128));
    let failed: usize = report.rows.iter().map(|r| r.failed).sum();
    let elapsed = start.elapsed();
    let rows: Vec<String> = report.rows.iter().map(|r| format!("m={} F={:.4}±{:.4}", r.m, r.f_full_mean, r.f_full_std)).collect();
    outcome(
        f18 >= 0.88 && f32_ >= 0.90 && f128 >= f18 - 0.02 && within(elapsed, 900),
        format!("{}, failed trials {failed}, {elapsed:.2?}", rows.join(", ")),
    )
}

fn c4_table1() -> Outcome {
    let start = Instant::now();
    let scenario = cz091_scenario();
    let chi = scenario.channel().unwrap();
    let full = FullFit::new(&chi, &scenario, derive_seed(EXPERIMENT_SEED, u64::MAX), EXEC).unwrap();
    let fid = |id: &str| -> f64 {
        let set = select_configs(&full.set, &Selection::Named(id.into())).unwrap();
        let res = full.reconstruct(&set, DEFAULT_EPSILON_FACTOR, &SolverOptions::default()).unwrap();
        process_fidelity(&full.fit.chi_star, &res.chi_star).unwrap()
    };
    let f32_ = fid("HVDR-RI-IR");
    let f18 = fid("VDR-RI-IR");
    let elapsed = start.elapsed();
    outcome(
        f32_ >= 0.90 && f18 >= 0.85 && within(elapsed, 120),
        format!("HVDR-RI-IR F={f32_:.4}, VDR-RI-IR F={f18:.4}, {elapsed:.2?}"),
    )
}

fn c5_qft() -> Outcome {
    let start = Instant::now();
    let targets = [(0.5, 0.95), (1.0, 0.80), (1.25, 0.70)];
    let mut pass = true;
    let mut capped = 0;
    let mut parts = Vec::new();
    for (gamma, target) in targets {
        let runs = EXEC.map_range(5, |s| {
            let seed = s as u64;
            let coupling = calibrate_qft_time(gamma, 2, seed, target).unwrap();
            let chi = qft_env_channel(&coupling).unwrap();
            let f_ideal = unitary_fidelity(&UnitaryGate::qft(2), &chi).unwrap();
            let set = random_pauli_configs(2, 16, 4, derive_seed(5, seed)).unwrap();
            let res = solve_cqpt(&exact_problem(&chi, &set, 1e-8), &SolverOptions::default()).unwrap();
            (f_ideal, process_fidelity(&res.chi_star, &chi).unwrap_or(0.0), res.converged)
        });
        capped += runs.iter().filter(|r| !r.2).count();
        let calibrated = runs.iter().all(|r| (r.0 - target).abs() <= 0.03);
        let mean = runs.iter().map(|r| r.1).sum::<f64>() / runs.len() as f64;
        pass &= calibrated && mean >= 0.85;
        parts.push(format!("gamma={gamma} F_ideal~{target}{} mean F={mean:.4} per seed {:?}", if calibrated { "" } else { " (miscalibrated)" }, runs.iter().map(|r| (r.1 * 1e4).round() / 1e4).collect::<Vec<_>>()));
    }
    let elapsed = start.elapsed();
    outcome(
        pass && within(elapsed, 600),
        format!("{}, {capped}/15 solves at the iteration cap, {elapsed:.2?}", parts.join(", ")),
    )
}

fn c6_metric_endpoints() -> Outcome {
    let p = Arc::new(pauli_basis(2));
    let cz = UnitaryGate::cz();
    let unitary = chi_from_unitary(&cz, p.clone()).unwrap();
    let identity = ProcessMatrix::identity(p.clone());
    let dep = ProcessMatrix::depolarizing(p);
    let checks = [
        ("purity(U)", purity(&unitary), 1.0),
        ("purity(dep)", purity(&dep), 1.0 / 16.0),
        ("F(chi,chi)", process_fidelity(&unitary, &unitary).unwrap(), 1.0),
        ("F(CZ,I)", unitary_fidelity(&cz, &identity).unwrap(), 0.25),
    ];
    let pass = checks.iter().all(|(_, v, want)| (v - want).abs() <= 1e-10);
    let detail: Vec<String> = checks.iter().map(|(k, v, _)| format!("{k}={v:.12}")).collect();
    outcome(pass, detail.join(", "))
}

fn c7_constants() -> Outcome {
    let (a0, b0) = recovery_constants(0.0).unwrap();
    let (a, b) = recovery_constants(0.2).unwrap();
    // hand evaluation at delta = 0.2
    let (want_a, want_b) = (4.1876726427121085, 8.472819712177566);
    outcome(
        a0 == 2.0 && b0 == 4.0 && (a - want_a).abs() <= 1e-9 && (b - want_b).abs() <= 1e-9,
        format!("(C1,C2)(0)=({a0},{b0}), (C1,C2)(0.2)=({a:.12},{b:.12})"),
    )
}

fn c8_spectrum() -> Outcome {
    let low = sorted_spectrum(&cz_decohered(0.91).unwrap()).unwrap().count_above(0.02);
    let high = sorted_spectrum(&cz_decohered(0.62).unwrap()).unwrap().count_above(0.02);
    outcome((10..=40).contains(&low) && high > low, format!("count>0.02: P=0.91 -> {low}, P=0.62 -> {high}"))
}

fn c9_oracle() -> Outcome {
    let worst = EXEC.map_range(100, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(9, k as u64));
        let n = 1 + k % 2;
        let d = 1 << n;
        let basis = if rng.random_bool(0.5) {
            Arc::new(pauli_basis(n))
        } else {
            Arc::new(gate_basis(&UnitaryGate::new("u", random_unitary(d, &mut rng)).unwrap()))
        };
        let chi = random_channel(d, rng.random_range(1..=d * d), basis.clone(), &mut rng);
        let set = if rng.random_bool(0.5) {
            let full = full_config_set(n).unwrap();
            let m = rng.random_range(1..=full.len());
            select_configs(&full, &Selection::Random { m, seed: rng.random() }).unwrap()
        } else {
            random_pauli_configs(n, rng.random_range(1..=8), rng.random_range(1..=3 * n), rng.random()).unwrap()
        };
        let phi = build_phi(&set, basis, Exec::Sequential).unwrap();
        let scale = 1.0 / (set.len() as f64).sqrt();
        let direct = predict_expectations(&chi, &set).unwrap();
        phi.apply(&chi).iter().zip(&direct).map(|(a, b)| (a - C64::new(b * scale, 0.0)).norm()).fold(0.0, f64::max)
    });
    let max = worst.iter().copied().fold(0.0, f64::max);
    outcome(max <= 1e-10, format!("max deviation {max:.2e} over 100 channels"))
}

fn c10_certificates() -> Outcome {
    let full = full_config_set(2).unwrap();
    let runs = EXEC.map_range(20, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(10, k as u64));
        let basis = if k % 2 == 0 { cz_gate_basis() } else { Arc::new(pauli_basis(2)) };
        let cz = chi_from_unitary(&UnitaryGate::cz(), basis.clone()).unwrap();
        let noise_channel = random_channel(4, 2, basis, &mut rng);
        let chi0 = cz.mix(&noise_channel, rng.random_range(0.5..1.0)).unwrap();
        let m = rng.random_range(24..=128);
        let set = select_configs(&full, &Selection::Random { m, seed: rng.random() }).unwrap();
        let epsilon = 0.01;
        let mut problem = exact_problem(&chi0, &set, epsilon);
        let noise: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let norm = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (y, e) in problem.y.iter_mut().zip(&noise) {
            *y += 0.5 * epsilon * e / norm;
        }
        let l1 = matrix_norm(chi0.chi(), Norm::L1);
        match solve_cqpt(&problem, &SolverOptions::default()) {
            Ok(res) if res.converged => (true, certificates_hold(&res), res.objective <= l1 + 4e-4, res.objective - l1),
            _ => (false, false, false, f64::NAN),
        }
    });
    let converged = runs.iter().filter(|r| r.0).count();
    let certified = runs.iter().filter(|r| r.1).count();
    let optimal = runs.iter().filter(|r| r.2).count();
    let gap = runs.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    outcome(
        certified == converged && optimal == 20,
        format!("{converged}/20 converged, {certified} certified, {optimal} with objective <= l1(chi0)+4e-4 (max excess {gap:.2e})"),
    )
}

fn c11_certification() -> Outcome {
    let chi0 = chi_from_unitary(&UnitaryGate::cz(), cz_gate_basis()).unwrap();
    let full = full_config_set(2).unwrap();
    let ms = [16, 32, 64, 128];
    let estimates: Vec<(usize, ProcessMatrix)> = EXEC.map_slice(&ms, |&m| {
        let set = select_configs(&full, &Selection::Random { m, seed: derive_seed(11, m as u64) }).unwrap();
        (m, solve_cqpt(&exact_problem(&chi0, &set, 1e-8), &SolverOptions::default()).unwrap().chi_star)
    });
    let cert = sparsity_certification(&estimates, 1e-3).unwrap();
    let inc = &cert.increments;
    let nonincreasing = inc[1..].windows(2).all(|w| w[1] <= w[0] + 1e-6);
    let detail: Vec<String> = inc.iter().map(|v| format!("{v:.2e}")).collect();
    outcome(nonincreasing && cert.certified, format!("increments [{}]", detail.join(", ")))
}

fn c12_local_corrections() -> Outcome {
    let cz = UnitaryGate::cz();
    let planted = UnitaryGate::new("planted", tensor_all(&[rz(0.3), pauli_i()]) * cz.matrix()).unwrap();
    let chi_planted = chi_from_unitary(&planted, cz_gate_basis()).unwrap();
    let fixed = local_correction_search(&chi_planted, &cz, &CorrectionOptions::default()).unwrap().fidelity;

    let scenario = ScenarioConfig {
        kind: ScenarioKind::CzMixture { target_purity: 0.80, model: DecoherenceModel::Environment },
        shots: Some(10_000),
        seed: 0,
    };
    let chi = scenario.channel().unwrap();
    let gains = EXEC.map_range(10, |k| {
        let seed = derive_seed(12, k as u64);
        let full = FullFit::new(&chi, &scenario, seed, Exec::Sequential).unwrap();
        let set = select_configs(&full.set, &Selection::Random { m: 32, seed }).unwrap();
        let est = full.reconstruct(&set, DEFAULT_EPSILON_FACTOR, &SolverOptions::default()).unwrap();
        let opts = CorrectionOptions { seed, ..CorrectionOptions::default() };
        let corr = local_correction_search(&est.chi_star, &cz, &opts).unwrap();
        let before = unitary_fidelity(&cz, &full.fit.chi_star).unwrap();
        let after = unitary_fidelity(&cz, &corr.apply(&full.fit.chi_star).unwrap()).unwrap();
        after - before
    });
    let improved = gains.iter().filter(|&&g| g >= 0.0).count();
    let worst = gains.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = gains.iter().sum::<f64>() / gains.len() as f64;
    outcome(
        fixed >= 1.0 - 1e-5 && improved >= 9 && worst >= -1e-9,
        format!("planted F={fixed:.8}, {improved}/10 seeds improved, mean gain {mean:+.4}, worst {worst:+.2e}"),
    )
}

fn c13_three_qubits() -> Outcome {
    let start = Instant::now();
    let strength = calibrate_near_identity(3, 0, 0.83).unwrap();
    let chi = near_identity_channel(3, strength, 0).unwrap();
    let f = unitary_fidelity(&UnitaryGate::identity(8), &chi).unwrap();
    let count = sorted_spectrum(&chi).unwrap().count_above(0.01);
    let elapsed = start.elapsed();
    outcome(
        (f - 0.83).abs() <= 0.01 && (50..=200).contains(&count) && within(elapsed, 1800),
        format!("F={f:.4}, count>0.01 = {count}, {elapsed:.2?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("sparse representation", c1_sparse_representation),
        ("noise-free exact recovery", c2_exact_recovery),
        ("convergence curve", c3_convergence),
        ("named selections", c4_table1),
        ("QFT with environment", c5_qft),
        ("metric endpoints", c6_metric_endpoints),
        ("recovery constants", c7_constants),
        ("sparsity spectrum", c8_spectrum),
        ("oracle equivalence", c9_oracle),
        ("solver certificates", c10_certificates),
        ("sparsity certification", c11_certification),
        ("local corrections", c12_local_corrections),
        ("three-qubit sparsity", c13_three_qubits),
    ];
    // optional criterion numbers on the command line select a subset
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let o = run();
        failures += usize::from(!o.pass);
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {ran} criteria passed", ran - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
