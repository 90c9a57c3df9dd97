//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::Rng;

use nhqc_rescale::algebra::{build_error_operator, ComplexMatrix, GeneralizedPauliLabel};
use nhqc_rescale::analysis::{Ensemble, Experiment, LogicalAmplitudeDecomposition, Sampling};
use nhqc_rescale::circuit::Circuit;
use nhqc_rescale::estimation::observable_from_logical;
use nhqc_rescale::holonomy::{embed_logical_unitary, logical, HolonomicGate, PulseSchedule};
use nhqc_rescale::noise::NoiseSpec;
use nhqc_rescale::random;
use nhqc_rescale::state::QutritState;

/// `exp(A)` by scaling and squaring with a 30-term Taylor series.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let norm: f64 = (0..a.rows()).map(|r| a.row(r).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut term = ComplexMatrix::identity(a.rows());
    let mut sum = term.clone();
    for k in 1..30 {
        term = (&term * &scaled).scale(C64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Time-ordered product of `exp(−iH(t_mid)Δt)` over `steps` slices.
pub fn stepwise_propagator(schedule: &PulseSchedule, steps: usize) -> ComplexMatrix {
    let dt = schedule.tau / steps as f64;
    let mut u = ComplexMatrix::identity(3);
    for k in 0..steps {
        let h = schedule.hamiltonian((k as f64 + 0.5) * dt);
        u = &expm(&h.scale(C64::new(0.0, -dt))) * &u;
    }
    u
}

/// Trit of site `site` in a big-endian ternary index, by repeated division.
fn trit_of(mut index: usize, site: usize, n: usize) -> usize {
    for _ in 0..(n - 1 - site) {
        index /= 3;
    }
    index % 3
}

/// Mass regrouping by explicit loops over all basis kets.
pub fn brute_decomposition(state: &QutritState, a: usize, b: usize) -> LogicalAmplitudeDecomposition {
    let n = state.n();
    let mut m = [[0.0; 3]; 3];
    for (i, amp) in state.amplitudes().iter().enumerate() {
        m[trit_of(i, a, n)][trit_of(i, b, n)] += amp.norm_sqr();
    }
    LogicalAmplitudeDecomposition { mass_00: m[0][0], mass_01: m[0][1], mass_10: m[1][0], mass_11: m[1][1] }
}

/// Leak probability after applying the full 9×9 error operator to sites `(a, b)`.
pub fn brute_detection(state: &QutritState, label: GeneralizedPauliLabel, a: usize, b: usize) -> f64 {
    let out = state.apply_two_site(&build_error_operator(label), a, b).unwrap();
    let n = out.n();
    out.amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| (0..n).any(|s| trit_of(*i, s, n) == 2))
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

/// Two distinct random sites in `0..n`.
pub fn random_pair<R: Rng>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

fn random_gate<R: Rng>(n: usize, two_qutrit: bool, rng: &mut R) -> HolonomicGate {
    if two_qutrit {
        let (a, b) = random_pair(n, rng);
        match rng.random_range(0..4) {
            0 => embed_logical_unitary(&logical::cnot(), &[a, b]).unwrap(),
            1 => embed_logical_unitary(&logical::cz(), &[a, b]).unwrap(),
            2 => embed_logical_unitary(&logical::swap(), &[a, b]).unwrap(),
            _ => embed_logical_unitary(&random::haar_unitary(4, rng), &[a, b]).unwrap(),
        }
    } else {
        let site = rng.random_range(0..n);
        let m = match rng.random_range(0..5) {
            0 => logical::h(),
            1 => logical::s(),
            2 => logical::t(),
            3 => logical::x(),
            _ => random::haar_unitary(2, rng),
        };
        embed_logical_unitary(&m, &[site]).unwrap()
    }
}

/// Random logical circuit with `gates` gates, at least one of them two-qutrit.
pub fn random_circuit<R: Rng>(n: usize, gates: usize, rng: &mut R) -> Circuit {
    let forced = rng.random_range(0..gates);
    let list = (0..gates).map(|k| random_gate(n, k == forced || rng.random_bool(0.5), rng)).collect();
    Circuit::new(n, list).unwrap()
}

/// Random circuit on `|0…0⟩` with a random Hermitian logical observable,
/// exhaustive symmetric noise and exact distributions.
pub fn random_experiment<R: Rng>(rng: &mut R, seed: u64) -> Experiment {
    let n = rng.random_range(2..=4);
    let gates = rng.random_range(5..=20);
    let circuit = random_circuit(n, gates, rng);
    let observable = observable_from_logical(&random::hermitian(1 << n, rng), n).unwrap();
    Experiment {
        circuit,
        initial: QutritState::basis(&"0".repeat(n)).unwrap(),
        noise: NoiseSpec::symmetric(seed),
        observable,
        ensemble: Ensemble::Exhaustive,
        sampling: Sampling::Exact,
        seed,
    }
}
