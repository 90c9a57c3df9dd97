mod common;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use nhqc_rescale::algebra::{build_error_operator, classify_label, ErrorClass, GeneralizedPauliLabel};
use nhqc_rescale::analysis::{closed_form_detection, decompose_on_pair, subset_sums, LogicalAmplitudeDecomposition};
use nhqc_rescale::circuit::Circuit;
use nhqc_rescale::estimation::{
    estimate_conventional, estimate_rescaled, exact_distribution, observable_from_logical, retained_mass,
};
use nhqc_rescale::holonomy::{embed_logical_unitary, integrate_schedule, PulseSchedule};
use nhqc_rescale::noise::{apply_noisy_circuit, error_distribution, NoiseDraw, NoiseSpec};
use nhqc_rescale::random;
use nhqc_rescale::rng::{substream, Domain};
use nhqc_rescale::state::QutritState;

fn masses() -> impl Strategy<Value = LogicalAmplitudeDecomposition> {
    prop::array::uniform4(0.0f64..1.0).prop_filter("nonzero", |m| m.iter().sum::<f64>() > 1e-3).prop_map(|m| {
        let t: f64 = m.iter().sum();
        LogicalAmplitudeDecomposition { mass_00: m[0] / t, mass_01: m[1] / t, mass_10: m[2] / t, mass_11: m[3] / t }
    })
}

fn label() -> impl Strategy<Value = GeneralizedPauliLabel> {
    (0usize..81).prop_map(GeneralizedPauliLabel::from_index)
}

proptest! {
    #[test]
    fn subset_sums_state_independent(d in masses()) {
        let r = subset_sums(&d);
        prop_assert!((r.subset_sum(ErrorClass::S1) - 27.0).abs() < 1e-10);
        prop_assert!((r.subset_sum(ErrorClass::S2) - 9.0).abs() < 1e-10);
        prop_assert!((r.subset_sum(ErrorClass::S3) - 9.0).abs() < 1e-10);
        prop_assert_eq!(r.subset_sum(ErrorClass::S4), 0.0);
        prop_assert!((r.aggregate - 0.5625).abs() < 1e-12);
    }

    #[test]
    fn detection_is_a_probability_independent_of_phase_exponents(d in masses(), l in label(), a2 in 0u8..3, b2 in 0u8..3) {
        let p = closed_form_detection(&d, l);
        prop_assert!((0.0..=1.0).contains(&p));
        let other = GeneralizedPauliLabel::new(l.a1(), a2, l.b1(), b2).unwrap();
        prop_assert_eq!(p, closed_form_detection(&d, other));
    }

    #[test]
    fn closed_form_matches_matrix_application(seed in any::<u64>(), l in label()) {
        let mut rng = substream(seed, Domain::Fixture, 0);
        let n = 2 + (seed % 3) as usize;
        let state = random::logical_state(n, &mut rng).unwrap();
        let (a, b) = common::random_pair(n, &mut rng);
        let d = decompose_on_pair(&state, a, b).unwrap();
        prop_assert!((d.total() - 1.0).abs() < 1e-10);
        let brute = common::brute_detection(&state, l, a, b);
        prop_assert!((closed_form_detection(&d, l) - brute).abs() < 1e-10);
    }

    #[test]
    fn error_operators_are_unitary(l in label()) {
        prop_assert!(build_error_operator(l).is_unitary(1e-12));
    }

    #[test]
    fn asymmetric_distribution_normalized(x in 0.01f64..10.0, z in 0.0f64..10.0) {
        let dist = error_distribution(&NoiseSpec::asymmetric(x, z, 0)).unwrap();
        prop_assert_eq!(dist.len(), 80);
        let total: f64 = dist.iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conventional_is_retained_times_rescaled(seed in any::<u64>()) {
        let mut rng = substream(seed, Domain::Fixture, 1);
        let n = 1 + (seed % 3) as usize;
        let obs = observable_from_logical(&random::hermitian(1 << n, &mut rng), n).unwrap();
        let state = random::full_state(n, &mut rng).unwrap();
        let dist = exact_distribution(&state, &obs).unwrap();
        let r = retained_mass(&dist, &obs).unwrap();
        let conv = estimate_conventional(&dist, &obs).unwrap();
        let resc = estimate_rescaled(&dist, &obs).unwrap();
        prop_assert!((conv - r * resc).abs() < 1e-10);
        prop_assert!((r - state.retained_probability()).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn single_loop_pulse_reflects_about_bright_state(theta in 0.0f64..std::f64::consts::PI, phi in -3.2f64..3.2) {
        let schedule = PulseSchedule::single_loop(theta, phi);
        let report = integrate_schedule(&schedule).unwrap();
        prop_assert!(report.is_holonomic(1e-8));
        // Logical block of the single-loop gate: I − 2|b⟩⟨b|.
        let b = [C64::from_polar((theta / 2.0).sin(), phi), C64::new(-(theta / 2.0).cos(), 0.0)];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                let expected = C64::new(id, 0.0) - b[i] * b[j].conj() * 2.0;
                prop_assert!((report.projected_gate[(i, j)] - expected).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn gates_after_the_error_keep_leak_probability(seed in any::<u64>(), l in label(), extra in 1usize..6) {
        let mut rng = substream(seed, Domain::Fixture, 2);
        let n = 3;
        let base = common::random_circuit(n, 4, &mut rng);
        let initial = random::logical_state(n, &mut rng).unwrap();
        let k = base.summary().two_qutrit_gates[0];
        let draw = NoiseDraw { gate_index: k, label: l };
        let short = apply_noisy_circuit(&initial, &base, &draw).unwrap();
        let mut gates = base.gates().to_vec();
        gates.extend(common::random_circuit(n, extra, &mut rng).gates().iter().cloned());
        let long = apply_noisy_circuit(&initial, &Circuit::new(n, gates).unwrap(), &draw).unwrap();
        prop_assert!((short.leak_probability() - long.leak_probability()).abs() < 1e-10);
    }
}

#[test]
fn subset_classes_partition_labels() {
    let mut counts = std::collections::BTreeMap::new();
    for l in GeneralizedPauliLabel::all() {
        *counts.entry(classify_label(l)).or_insert(0) += 1;
    }
    assert_eq!(counts[&ErrorClass::Identity], 1);
    assert_eq!(counts[&ErrorClass::S1], 36);
    assert_eq!(counts[&ErrorClass::S2], 18);
    assert_eq!(counts[&ErrorClass::S3], 18);
    assert_eq!(counts[&ErrorClass::S4], 8);
}

#[test]
fn z_free_noise_detects_more() {
    // Only X-type labels with weight x = 1: (3x + 2) / (4x + 4) = 5/8.
    let state = QutritState::basis("01").unwrap();
    let circuit = Circuit::new(2, vec![embed_logical_unitary(&nhqc_rescale::holonomy::logical::cz(), &[0, 1]).unwrap()])
        .unwrap();
    let p = nhqc_rescale::analysis::closed_form_expected_detection(&state, &circuit, &NoiseSpec::asymmetric(1.0, 0.0, 0))
        .unwrap();
    assert!((p - 0.625).abs() < 1e-12);
    assert!(p > 0.5625);
}
