//! Acceptance suite. Each test prints one `criterion N [PASS|FAIL]` line.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::Rng;

use nhqc_rescale::algebra::{ErrorClass, GeneralizedPauliLabel};
use nhqc_rescale::analysis::{
    closed_form_detection, decompose_on_pair, run_experiment, simulate_detection, subset_sums, Sampling,
};
use nhqc_rescale::circuit::Circuit;
use nhqc_rescale::config::ExperimentConfig;
use nhqc_rescale::estimation::{
    estimate_conventional, estimate_rescaled, exact_distribution, ideal_weight_after_projection, logical_pauli_string,
    observable_from_logical,
};
use nhqc_rescale::holonomy::{embed_logical_unitary, integrate_schedule, logical, PulseSchedule};
use nhqc_rescale::noise::NoiseSpec;
use nhqc_rescale::output::result_document;
use nhqc_rescale::random;
use nhqc_rescale::rng::{substream, Domain};
use nhqc_rescale::state::{DensityMatrix, LogicalProjection, QutritState};

fn report(id: u32, title: &str, pass: bool, elapsed: Duration, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {id} [{verdict}] {title}: {detail} ({:.2} s)", elapsed.as_secs_f64());
    // Written to the process stdout directly so it shows without --nocapture.
    let _ = writeln!(std::io::stdout().lock(), "{line}");
    assert!(pass, "{line}");
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nhqc"))
}

#[test]
fn criterion_1_subset_cardinalities() {
    let start = Instant::now();
    let out = bin().arg("enumerate-errors").output().unwrap();
    let elapsed = start.elapsed();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let counts = &doc["result"]["counts"];
    let rows = doc["result"]["labels"].as_array().map_or(0, |a| a.len());
    let expected = [("Identity", 1), ("S1", 36), ("S2", 18), ("S3", 18), ("S4", 8)];
    let matches = expected.iter().all(|(k, v)| counts[k] == *v);
    report(
        1,
        "subset cardinalities",
        out.status.success() && rows == 81 && matches && elapsed < Duration::from_secs(1),
        elapsed,
        format!("{rows} labels, counts {counts}"),
    );
}

#[test]
fn criterion_2_subset_sums() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..100 {
        let mut rng = substream(2, Domain::Fixture, k);
        let n = rng.random_range(2..=5);
        let state = random::logical_state(n, &mut rng).unwrap();
        let (a, b) = common::random_pair(n, &mut rng);
        let r = subset_sums(&decompose_on_pair(&state, a, b).unwrap());
        for (class, target) in [(ErrorClass::S1, 27.0), (ErrorClass::S2, 9.0), (ErrorClass::S3, 9.0), (ErrorClass::S4, 0.0)]
        {
            worst = worst.max((r.subset_sum(class) - target).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        "N(S1..S4) = 27, 9, 9, 0",
        worst <= 1e-10 && elapsed < Duration::from_secs(10),
        elapsed,
        format!("100 states, max deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_3_headline_aggregate() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..100 {
        let mut rng = substream(3, Domain::Fixture, k);
        let n = rng.random_range(2..=5);
        let state = random::logical_state(n, &mut rng).unwrap();
        let (a, b) = common::random_pair(n, &mut rng);
        worst = worst.max((subset_sums(&decompose_on_pair(&state, a, b).unwrap()).aggregate - 0.5625).abs());
    }

    let mut rng = substream(3, Domain::Fixture, 1000);
    let circuit = Circuit::new(
        3,
        vec![
            embed_logical_unitary(&logical::h(), &[0]).unwrap(),
            embed_logical_unitary(&logical::cnot(), &[0, 1]).unwrap(),
            embed_logical_unitary(&random::haar_unitary(2, &mut rng), &[2]).unwrap(),
            embed_logical_unitary(&logical::cz(), &[1, 2]).unwrap(),
            embed_logical_unitary(&logical::t(), &[0]).unwrap(),
        ],
    )
    .unwrap();
    let initial = QutritState::basis("000").unwrap();
    let (mc, _) =
        simulate_detection(&initial, &circuit, &NoiseSpec::symmetric(33), 100_000, Sampling::Shots { shots: 1 })
            .unwrap();
    let elapsed = start.elapsed();
    let mc_dev = (mc.aggregate - 0.5625).abs();
    report(
        3,
        "aggregate detection 45/80",
        worst <= 1e-12 && mc_dev <= 0.005 && elapsed < Duration::from_secs(60),
        elapsed,
        format!(
            "closed form max deviation {worst:.2e}; Monte Carlo (1e5 shots) {:.5} ± {:.5}",
            mc.aggregate,
            mc.aggregate_std_error.unwrap_or(f64::NAN)
        ),
    );
}

#[test]
fn criterion_4_oracle_equivalence() {
    let start = Instant::now();
    let (mut worst_p, mut worst_m) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let mut rng = substream(4, Domain::Fixture, k);
        let n = rng.random_range(2..=4);
        let state = random::logical_state(n, &mut rng).unwrap();
        let (a, b) = common::random_pair(n, &mut rng);
        let d = decompose_on_pair(&state, a, b).unwrap();
        let oracle = common::brute_decomposition(&state, a, b);
        worst_m = worst_m
            .max((d.mass_00 - oracle.mass_00).abs())
            .max((d.mass_01 - oracle.mass_01).abs())
            .max((d.mass_10 - oracle.mass_10).abs())
            .max((d.mass_11 - oracle.mass_11).abs());
        for label in GeneralizedPauliLabel::all() {
            let brute = common::brute_detection(&state, label, a, b);
            worst_p = worst_p.max((closed_form_detection(&d, label) - brute).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        "closed form vs matrix application",
        worst_p <= 1e-10 && worst_m <= 1e-10 && elapsed < Duration::from_secs(30),
        elapsed,
        format!("81 labels x 50 states, max |ΔP| {worst_p:.2e}, max |Δmass| {worst_m:.2e}"),
    );
}

#[test]
fn criterion_5_holonomy_validation() {
    let start = Instant::now();
    let (mut cyc, mut pt, mut oracle_dev) = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = 0;
    for k in 0..20 {
        let mut rng = substream(5, Domain::Fixture, k);
        let schedule = PulseSchedule::single_loop(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
        let Ok(r) = integrate_schedule(&schedule) else {
            failures += 1;
            continue;
        };
        cyc = cyc.max(r.cyclicity_defect);
        pt = pt.max(r.parallel_transport_residual);
        let u = common::stepwise_propagator(&schedule, 2_000);
        for i in 0..2 {
            for j in 0..2 {
                oracle_dev = oracle_dev.max((r.projected_gate[(i, j)] - u[(i, j)]).norm());
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        5,
        "single-loop Λ pulse is holonomic",
        failures == 0 && cyc <= 1e-8 && pt <= 1e-8 && oracle_dev <= 1e-6 && elapsed < Duration::from_secs(30),
        elapsed,
        format!("20 schedules, cyclicity {cyc:.2e}, transport {pt:.2e}, oracle {oracle_dev:.2e}, {failures} failed"),
    );
}

#[test]
fn criterion_6_estimator_identities() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..20 {
        let mut rng = substream(6, Domain::Fixture, k);
        let mut exp = common::random_experiment(&mut rng, k);
        exp.noise = NoiseSpec::none();
        let e = run_experiment(&exp).unwrap().estimation;
        worst = worst.max((e.mean_conventional - e.e_ideal).abs()).max((e.mean_rescaled.unwrap() - e.e_ideal).abs());
    }

    let obs = observable_from_logical(&logical_pauli_string("ZZ").unwrap(), 2).unwrap();
    let good = DensityMatrix::from_pure(&QutritState::basis("00").unwrap()).unwrap();
    let leaked = DensityMatrix::from_pure(&QutritState::basis("22").unwrap()).unwrap();
    let fixture = DensityMatrix::mixture(&[(0.8, &good), (0.2, &leaked)]).unwrap();
    let dist = exact_distribution(&fixture, &obs).unwrap();
    let conv = estimate_conventional(&dist, &obs).unwrap();
    let resc = estimate_rescaled(&dist, &obs).unwrap();
    let elapsed = start.elapsed();
    report(
        6,
        "estimator identities",
        worst <= 1e-10 && (conv - 0.8).abs() <= 1e-12 && (resc - 1.0).abs() <= 1e-12,
        elapsed,
        format!("noiseless max |Δ| {worst:.2e}; fixture E' = {conv:.15}, E_r = {resc:.15}"),
    );
}

#[test]
fn criterion_7_weight_increase() {
    let start = Instant::now();
    let (mut violation, mut formula_dev) = (0.0f64, 0.0f64);
    for k in 0..200 {
        let mut rng = substream(7, Domain::Fixture, k);
        let n = rng.random_range(1..=3);
        let rank_f = rng.random_range(1..=3);
        let rank_e = rng.random_range(1..=4);
        let rho_f = random::density_from(rank_f, &mut rng, |r| random::logical_state(n, r)).unwrap();
        let rho_e = random::density_from(rank_e, &mut rng, |r| random::full_state(n, r)).unwrap();
        let p: f64 = rng.random_range(1e-6..1.0 - 1e-6);
        let mixed = DensityMatrix::mixture(&[(1.0 - p, &rho_f), (p, &rho_e)]).unwrap();
        let (_, retained) = mixed.project_logical().unwrap();
        // After projection and renormalization ρ_f carries (1 − p) / Tr(P̂ρ′P̂).
        let direct = (1.0 - p) / retained;
        let weight = ideal_weight_after_projection(p, rho_e.retained_probability());
        formula_dev = formula_dev.max((direct - weight).abs());
        violation = violation.max((1.0 - p) - weight);
    }
    let elapsed = start.elapsed();
    report(
        7,
        "post-projection ideal weight >= 1 - p",
        violation <= 1e-10 && formula_dev <= 1e-10,
        elapsed,
        format!("200 triples, max (1-p) - w = {violation:.2e}, formula vs projection {formula_dev:.2e}"),
    );
}

#[test]
fn criterion_8_method_comparison() {
    let start = Instant::now();
    let (mut wins, mut pooled_wins) = (0, 0);
    let (mut sum_conv, mut sum_resc) = (0.0, 0.0);
    for k in 0..100 {
        let mut rng = substream(8, Domain::Fixture, k);
        let exp = common::random_experiment(&mut rng, k);
        let e = run_experiment(&exp).unwrap().estimation;
        let resc = e.mean_abs_error_rescaled.unwrap();
        sum_conv += e.mean_abs_error_conventional;
        sum_resc += resc;
        if resc < e.mean_abs_error_conventional {
            wins += 1;
        }
        if (e.pooled_rescaled.unwrap() - e.e_ideal).abs() < (e.pooled_conventional - e.e_ideal).abs() {
            pooled_wins += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        8,
        "rescaled beats conventional in >= 95% of configs",
        wins >= 95 && elapsed < Duration::from_secs(300),
        elapsed,
        format!(
            "{wins}/100 configs (pooled distribution: {pooled_wins}/100); \
             average mean |E'-E| {:.4}, average mean |E_r-E| {:.4}",
            sum_conv / 100.0,
            sum_resc / 100.0
        ),
    );
}

const DETERMINISM_CONFIG: &str = r#"{
    "system": { "n": 3, "initial_state": { "logical_amplitudes": [
        [0.5, 0], [0, 0.5], [0, 0], [0, 0], [0, 0], [0, 0], [0.5, 0], [0, -0.5]
    ] } },
    "circuit": [
        { "kind": "named", "name": "h", "sites": [0] },
        { "kind": "named", "name": "cnot", "sites": [0, 1] },
        { "kind": "holonomic", "site": 2, "theta": 1.1, "phi": 0.4 },
        { "kind": "named", "name": "cz", "sites": [1, 2] },
        { "kind": "named", "name": "swap", "sites": [2, 0] }
    ],
    "noise": { "mode": "asymmetric", "x_weight": 2.0, "z_weight": 0.5 },
    "observable": { "pauli": "ZXY" },
    "run": { "ensemble": "sampled", "trials": 4000, "shots": 64, "seed": 99 }
}"#;

fn run_document(cfg: &ExperimentConfig, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let report = run_experiment(&cfg.experiment().unwrap()).unwrap();
        result_document("run", Some(cfg), &report).unwrap()
    })
}

#[test]
fn criterion_9_determinism() {
    let start = Instant::now();
    let cfg = ExperimentConfig::from_json(DETERMINISM_CONFIG).unwrap();
    let one = run_document(&cfg, 1);
    let same = one == run_document(&cfg, 1) && one == run_document(&cfg, 4) && one == run_document(&cfg, 7);

    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(&config_path, DETERMINISM_CONFIG).unwrap();
    let mut cli_outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("out{threads}.json"));
        let status = bin()
            .env("RAYON_NUM_THREADS", threads)
            .args(["run", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        cli_outputs.push(std::fs::read(out).unwrap());
    }
    let cli_same = cli_outputs[0] == cli_outputs[1] && cli_outputs[0] == one;
    let elapsed = start.elapsed();
    report(
        9,
        "byte-identical JSON across runs and thread counts",
        same && cli_same,
        elapsed,
        format!("{} bytes, library 1/4/7 threads equal: {same}, CLI 1/4 threads equal: {cli_same}", one.len()),
    );
}

#[test]
fn fixture_amplitudes_are_normalized() {
    let cfg = ExperimentConfig::from_json(DETERMINISM_CONFIG).unwrap();
    let state = cfg.initial_state().unwrap();
    assert!((state.norm_sqr() - 1.0).abs() < 1e-15);
    assert_eq!(state.amplitudes()[0], C64::new(0.5, 0.0));
}
