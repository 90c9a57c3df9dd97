//! Single-faulty-gate depolarizing noise.
//!
//! Each circuit execution has exactly one faulty two-qutrit gate `k`. Right
//! after it, a generalized Pauli error acts on that gate's two sites. The
//! location distribution defaults to uniform over the two-qutrit gates.
//! Symmetric mode puts weight 1/80 on every error label. Asymmetric mode
//! weights a label by `x_weight^{#X factors} · z_weight^{#Z factors}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{build_error_operator, GeneralizedPauliLabel};
use crate::circuit::{Circuit, CircuitSummary};
use crate::error::{Error, Result};
use crate::rng::{substream, Domain};
use crate::state::QutritState;

/// Tolerance on the sum of a user-supplied probability vector.
pub const DISTRIBUTION_SUM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    #[default]
    Symmetric,
    Asymmetric,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default)]
    pub mode: NoiseMode,
    #[serde(default = "unit")]
    pub x_weight: f64,
    #[serde(default = "unit")]
    pub z_weight: f64,
    /// Probability of each two-qutrit gate (in circuit order) being the faulty one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
}

fn unit() -> f64 {
    1.0
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::symmetric(0)
    }
}

impl NoiseSpec {
    pub fn symmetric(seed: u64) -> Self {
        Self { mode: NoiseMode::Symmetric, x_weight: 1.0, z_weight: 1.0, location: None, seed }
    }

    pub fn asymmetric(x_weight: f64, z_weight: f64, seed: u64) -> Self {
        Self { mode: NoiseMode::Asymmetric, x_weight, z_weight, location: None, seed }
    }

    pub fn none() -> Self {
        Self { mode: NoiseMode::None, ..Self::symmetric(0) }
    }

    /// Faulty-gate distribution over the circuit's two-qutrit gates.
    pub fn location_distribution(&self, summary: &CircuitSummary) -> Result<Vec<f64>> {
        let count = summary.two_qutrit_gates.len();
        if count == 0 {
            return Err(Error::NoTwoQutritGate);
        }
        match &self.location {
            None => Ok(vec![1.0 / count as f64; count]),
            Some(p) => {
                if p.len() != count {
                    return Err(Error::InvalidDistribution(format!(
                        "location distribution has {} entries for {count} two-qutrit gates",
                        p.len()
                    )));
                }
                check_distribution(p)?;
                Ok(p.clone())
            }
        }
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("entry {bad} is not a probability")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_SUM_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Error-label distribution. In `None` mode the only outcome is the identity.
pub fn error_distribution(spec: &NoiseSpec) -> Result<Vec<(GeneralizedPauliLabel, f64)>> {
    match spec.mode {
        NoiseMode::None => Ok(vec![(GeneralizedPauliLabel::IDENTITY, 1.0)]),
        NoiseMode::Symmetric => Ok(GeneralizedPauliLabel::errors().map(|l| (l, 1.0 / 80.0)).collect()),
        NoiseMode::Asymmetric => {
            let (x, z) = (spec.x_weight, spec.z_weight);
            if !(x.is_finite() && z.is_finite() && x >= 0.0 && z >= 0.0) {
                return Err(Error::InvalidDistribution(format!("weights must be nonnegative, got x={x}, z={z}")));
            }
            if x == 0.0 && z == 0.0 {
                return Err(Error::ZeroWeights);
            }
            let raw: Vec<(GeneralizedPauliLabel, f64)> = GeneralizedPauliLabel::errors()
                .map(|l| (l, x.powi(l.x_factors() as i32) * z.powi(l.z_factors() as i32)))
                .collect();
            let total: f64 = raw.iter().map(|(_, w)| w).sum();
            if !(total > 0.0 && total.is_finite()) {
                return Err(Error::ZeroWeights);
            }
            Ok(raw.into_iter().map(|(l, w)| (l, w / total)).collect())
        }
    }
}

/// One sampled error event: the faulty gate (circuit index) and its error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseDraw {
    pub gate_index: usize,
    pub label: GeneralizedPauliLabel,
}

fn pick<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    match cumulative.iter().position(|&c| c > u) {
        Some(i) => i,
        // u landed above the rounded total; take the last outcome with mass.
        None => cumulative.windows(2).rposition(|w| w[1] > w[0]).map_or(0, |i| i + 1),
    }
}

fn cumulative(p: impl IntoIterator<Item = f64>) -> Vec<f64> {
    p.into_iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Precomputed sampler for repeated draws from one spec and circuit.
#[derive(Clone, Debug)]
pub struct NoiseSampler {
    seed: u64,
    labels: Vec<GeneralizedPauliLabel>,
    label_cdf: Vec<f64>,
    gates: Vec<usize>,
    gate_cdf: Vec<f64>,
}

impl NoiseSampler {
    pub fn new(spec: &NoiseSpec, summary: &CircuitSummary) -> Result<Self> {
        let location = spec.location_distribution(summary)?;
        let dist = error_distribution(spec)?;
        Ok(Self {
            seed: spec.seed,
            labels: dist.iter().map(|(l, _)| *l).collect(),
            label_cdf: cumulative(dist.iter().map(|(_, p)| *p)),
            gates: summary.two_qutrit_gates.clone(),
            gate_cdf: cumulative(location),
        })
    }

    /// Draw for `trial`; a pure function of `(seed, trial)`.
    pub fn sample(&self, trial: u64) -> NoiseDraw {
        let mut rng = substream(self.seed, Domain::NoiseDraw, trial);
        let gate_index = self.gates[pick(&self.gate_cdf, &mut rng)];
        let label = self.labels[pick(&self.label_cdf, &mut rng)];
        NoiseDraw { gate_index, label }
    }
}

pub fn sample_noise(spec: &NoiseSpec, summary: &CircuitSummary, trial: u64) -> Result<NoiseDraw> {
    Ok(NoiseSampler::new(spec, summary)?.sample(trial))
}

/// Every `(draw, probability)` with positive probability, ordered by gate then label.
pub fn enumerate_draws(spec: &NoiseSpec, summary: &CircuitSummary) -> Result<Vec<(NoiseDraw, f64)>> {
    let location = spec.location_distribution(summary)?;
    let dist = error_distribution(spec)?;
    let mut out = Vec::with_capacity(location.len() * dist.len());
    for (&gate_index, &pg) in summary.two_qutrit_gates.iter().zip(&location) {
        for &(label, pl) in &dist {
            if pg * pl > 0.0 {
                out.push((NoiseDraw { gate_index, label }, pg * pl));
            }
        }
    }
    Ok(out)
}

/// Applies the error of `draw` right after the faulty gate `k`.
pub fn apply_error_after(state_after_gate: &QutritState, circuit: &Circuit, draw: &NoiseDraw) -> Result<QutritState> {
    let gate = circuit.gates().get(draw.gate_index).ok_or(Error::NoTwoQutritGate)?;
    match gate.sites() {
        &[a, b] => state_after_gate.apply_two_site(&build_error_operator(draw.label), a, b),
        _ => Err(Error::Config(format!("gate {} is not a two-qutrit gate", draw.gate_index))),
    }
}

/// Runs the circuit with the error of `draw` inserted after gate `draw.gate_index`.
pub fn apply_noisy_circuit(initial: &QutritState, circuit: &Circuit, draw: &NoiseDraw) -> Result<QutritState> {
    let k = draw.gate_index;
    if k >= circuit.len() {
        return Err(Error::Config(format!("faulty gate index {k} outside circuit of {} gates", circuit.len())));
    }
    let before = circuit.run_range(initial, 0..k + 1)?;
    let hit = apply_error_after(&before, circuit, draw)?;
    circuit.run_range(&hit, k + 1..circuit.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{classify_label, ErrorClass};
    use crate::holonomy::{embed_logical_unitary, logical};

    fn two_gate_circuit() -> Circuit {
        let g0 = embed_logical_unitary(&logical::h(), &[0]).unwrap();
        let g1 = embed_logical_unitary(&logical::cnot(), &[0, 1]).unwrap();
        let g2 = embed_logical_unitary(&logical::cz(), &[1, 2]).unwrap();
        Circuit::new(3, vec![g0, g1, g2]).unwrap()
    }

    #[test]
    fn symmetric_is_uniform() {
        let dist = error_distribution(&NoiseSpec::symmetric(0)).unwrap();
        assert_eq!(dist.len(), 80);
        assert!(dist.iter().all(|&(l, p)| p == 0.0125 && !l.is_identity()));
    }

    #[test]
    fn asymmetric_limits_and_normalization() {
        let dist = error_distribution(&NoiseSpec::asymmetric(0.0, 1.0, 0)).unwrap();
        let mass: f64 = dist.iter().filter(|(l, _)| classify_label(*l) == ErrorClass::S4).map(|(_, p)| p).sum();
        assert!((mass - 1.0).abs() < 1e-12);

        for (x, z) in [(0.3, 2.5), (1.7, 0.01), (4.0, 4.0)] {
            let dist = error_distribution(&NoiseSpec::asymmetric(x, z, 0)).unwrap();
            let total: f64 = dist.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        // Unit weights reduce to the symmetric model.
        let dist = error_distribution(&NoiseSpec::asymmetric(1.0, 1.0, 0)).unwrap();
        assert_eq!(dist.len(), 80);
        assert!(dist.iter().all(|(_, p)| (p - 1.0 / 80.0).abs() < 1e-15));
        assert!(matches!(error_distribution(&NoiseSpec::asymmetric(0.0, 0.0, 0)), Err(Error::ZeroWeights)));
        assert!(error_distribution(&NoiseSpec::asymmetric(-1.0, 1.0, 0)).is_err());
    }

    #[test]
    fn z_free_draws_always_carry_x() {
        let circuit = two_gate_circuit();
        let sampler = NoiseSampler::new(&NoiseSpec::asymmetric(1.0, 0.0, 11), &circuit.summary()).unwrap();
        for t in 0..2000 {
            let l = sampler.sample(t).label;
            assert!(l.a1() != 0 || l.b1() != 0, "{l}");
        }
    }

    #[test]
    fn location_is_two_qutrit_gate() {
        let circuit = two_gate_circuit();
        let sampler = NoiseSampler::new(&NoiseSpec::symmetric(3), &circuit.summary()).unwrap();
        let mut seen = [0usize; 3];
        for t in 0..1000 {
            seen[sampler.sample(t).gate_index] += 1;
        }
        assert_eq!(seen[0], 0);
        assert!(seen[1] > 400 && seen[2] > 400);

        let single = Circuit::new(2, vec![embed_logical_unitary(&logical::cnot(), &[0, 1]).unwrap()]).unwrap();
        let s = NoiseSampler::new(&NoiseSpec::symmetric(3), &single.summary()).unwrap();
        assert!((0..100).all(|t| s.sample(t).gate_index == 0));
    }

    #[test]
    fn explicit_location_distribution() {
        let circuit = two_gate_circuit();
        let spec = NoiseSpec { location: Some(vec![0.0, 1.0]), ..NoiseSpec::symmetric(5) };
        let sampler = NoiseSampler::new(&spec, &circuit.summary()).unwrap();
        assert!((0..500).all(|t| sampler.sample(t).gate_index == 2));
        let bad = NoiseSpec { location: Some(vec![0.5, 0.6]), ..NoiseSpec::symmetric(5) };
        assert!(matches!(NoiseSampler::new(&bad, &circuit.summary()), Err(Error::InvalidDistribution(_))));
        let short = NoiseSpec { location: Some(vec![1.0]), ..NoiseSpec::symmetric(5) };
        assert!(NoiseSampler::new(&short, &circuit.summary()).is_err());
    }

    #[test]
    fn no_two_qutrit_gate_is_an_error() {
        let c = Circuit::new(1, vec![embed_logical_unitary(&logical::x(), &[0]).unwrap()]).unwrap();
        assert!(matches!(sample_noise(&NoiseSpec::symmetric(0), &c.summary(), 0), Err(Error::NoTwoQutritGate)));
    }

    #[test]
    fn draws_are_deterministic() {
        let circuit = two_gate_circuit();
        let spec = NoiseSpec::asymmetric(0.7, 1.3, 99);
        for t in [0, 1, 17, 123_456] {
            assert_eq!(sample_noise(&spec, &circuit.summary(), t).unwrap(), sample_noise(&spec, &circuit.summary(), t).unwrap());
        }
    }

    #[test]
    fn identity_label_matches_noiseless_run() {
        let circuit = two_gate_circuit();
        let psi = QutritState::basis("010").unwrap();
        let draw = NoiseDraw { gate_index: 1, label: GeneralizedPauliLabel::IDENTITY };
        let noisy = apply_noisy_circuit(&psi, &circuit, &draw).unwrap();
        assert_eq!(noisy, circuit.run(&psi).unwrap());
        let bad = NoiseDraw { gate_index: 0, label: GeneralizedPauliLabel::IDENTITY };
        assert!(apply_noisy_circuit(&psi, &circuit, &bad).is_err());
    }

    #[test]
    fn enumeration_covers_all_draws() {
        let circuit = two_gate_circuit();
        let draws = enumerate_draws(&NoiseSpec::symmetric(0), &circuit.summary()).unwrap();
        assert_eq!(draws.len(), 160);
        let total: f64 = draws.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let none = enumerate_draws(&NoiseSpec::none(), &circuit.summary()).unwrap();
        assert_eq!(none.len(), 2);
    }
}
