//! Detection probabilities and the end-to-end estimator comparison.
//!
//! For a logical state and a faulty pair `(a, b)`, group the amplitude mass by
//! the pair's trits: `m00, m01, m10, m11`. A label `X^{a1}Z^{a2} ⊗ X^{b1}Z^{b2}`
//! leaks exactly the components whose shifted trit lands on `|2⟩`, so its
//! detection probability depends only on `(a1, b1)`:
//!
//! | (a1, b1) | detected mass |
//! |----------|---------------|
//! | (1, 1)   | 1 − m00       |
//! | (1, 2)   | 1 − m01       |
//! | (2, 1)   | 1 − m10       |
//! | (2, 2)   | 1 − m11       |
//! | (1, 0)   | m10 + m11     |
//! | (2, 0)   | m00 + m01     |
//! | (0, 1)   | m01 + m11     |
//! | (0, 2)   | m00 + m10     |
//! | (0, 0)   | 0             |
//!
//! Summed over `a2, b2` this gives 27, 9, 9 and 0 for S1..S4 whatever the
//! state, so 45 of the 80 equally likely errors are detected on average.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{classify_label, ErrorClass, GeneralizedPauliLabel};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::estimation::{
    estimate_conventional, estimate_rescaled, exact_distribution, retained_mass, sample_distribution, Observable,
    OutcomeDistribution,
};
use crate::noise::{apply_error_after, enumerate_draws, error_distribution, NoiseDraw, NoiseSampler, NoiseSpec};
use crate::rng::{substream, Domain};
use crate::state::{trit, QutritState};

/// Leak tolerance for states that must lie in the logical subspace.
pub const LOGICAL_STATE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogicalAmplitudeDecomposition {
    pub mass_00: f64,
    pub mass_01: f64,
    pub mass_10: f64,
    pub mass_11: f64,
}

impl LogicalAmplitudeDecomposition {
    pub fn total(&self) -> f64 {
        self.mass_00 + self.mass_01 + self.mass_10 + self.mass_11
    }
}

/// Groups `|amplitude|²` by the trits at `(site_a, site_b)`.
pub fn decompose_on_pair(state: &QutritState, site_a: usize, site_b: usize) -> Result<LogicalAmplitudeDecomposition> {
    let n = state.n();
    for site in [site_a, site_b] {
        if site >= n {
            return Err(Error::SiteOutOfRange { site, n });
        }
    }
    if site_a == site_b {
        return Err(Error::SiteCollision(site_a));
    }
    let leak = state.leak_probability();
    if leak > LOGICAL_STATE_TOL {
        return Err(Error::LeakedState(leak));
    }
    let mut mass = [0.0f64; 4];
    for (i, amp) in state.amplitudes().iter().enumerate() {
        let (ta, tb) = (trit(i, site_a, n), trit(i, site_b, n));
        if ta < 2 && tb < 2 {
            mass[2 * ta + tb] += amp.norm_sqr();
        }
    }
    Ok(LogicalAmplitudeDecomposition { mass_00: mass[0], mass_01: mass[1], mass_10: mass[2], mass_11: mass[3] })
}

/// Probability that `label` moves the state out of the logical subspace.
pub fn closed_form_detection(d: &LogicalAmplitudeDecomposition, label: GeneralizedPauliLabel) -> f64 {
    let p = match (label.a1(), label.b1()) {
        (0, 0) => 0.0,
        (1, 1) => 1.0 - d.mass_00,
        (1, 2) => 1.0 - d.mass_01,
        (2, 1) => 1.0 - d.mass_10,
        (2, 2) => 1.0 - d.mass_11,
        (1, 0) => d.mass_10 + d.mass_11,
        (2, 0) => d.mass_00 + d.mass_01,
        (0, 1) => d.mass_01 + d.mass_11,
        (0, 2) => d.mass_00 + d.mass_10,
        _ => unreachable!("label exponents are in 0..3"),
    };
    p.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMethod {
    ClosedForm,
    Simulated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelDetection {
    pub label: GeneralizedPauliLabel,
    pub subset: ErrorClass,
    /// Conditional detection probability; `None` if the label was never drawn.
    pub probability: Option<f64>,
    /// Number of trials (or enumerated cases) that used this label.
    pub samples: u64,
}

/// Conditional detection probabilities for the 80 error labels, their
/// per-subset sums `N(S_i)` and the aggregate detection probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionReport {
    pub method: DetectionMethod,
    pub per_label: Vec<LabelDetection>,
    pub subset_sums: BTreeMap<ErrorClass, f64>,
    /// Probability that the error event is detected under the noise model's
    /// label weights. Uniform weights make this `Σ N(S_i) / 80`.
    pub aggregate: f64,
    pub aggregate_std_error: Option<f64>,
    pub trials: Option<u64>,
}

impl DetectionReport {
    pub fn subset_sum(&self, class: ErrorClass) -> f64 {
        self.subset_sums.get(&class).copied().unwrap_or(0.0)
    }
}

fn subset_sums_of(per_label: &[LabelDetection]) -> BTreeMap<ErrorClass, f64> {
    let mut sums: BTreeMap<ErrorClass, f64> = ErrorClass::SUBSETS.iter().map(|&c| (c, 0.0)).collect();
    for d in per_label {
        if let Some(p) = d.probability {
            *sums.entry(d.subset).or_default() += p;
        }
    }
    sums
}

/// Closed-form report with label weights from `noise` (identity excluded).
pub fn closed_form_report(d: &LogicalAmplitudeDecomposition, noise: &NoiseSpec) -> Result<DetectionReport> {
    let per_label: Vec<LabelDetection> = GeneralizedPauliLabel::errors()
        .map(|label| LabelDetection {
            label,
            subset: classify_label(label),
            probability: Some(closed_form_detection(d, label)),
            samples: 1,
        })
        .collect();
    let aggregate = error_distribution(noise)?.iter().map(|&(l, w)| w * closed_form_detection(d, l)).sum();
    Ok(DetectionReport {
        method: DetectionMethod::ClosedForm,
        subset_sums: subset_sums_of(&per_label),
        per_label,
        aggregate,
        aggregate_std_error: None,
        trials: None,
    })
}

/// Closed-form `N(S1..S4)` and aggregate under the symmetric model.
pub fn subset_sums(d: &LogicalAmplitudeDecomposition) -> DetectionReport {
    closed_form_report(d, &NoiseSpec::symmetric(0)).expect("symmetric distribution is always valid")
}

/// Expected detection probability over the noise model's location and label
/// distributions, from closed forms evaluated on the state after each faulty gate.
pub fn closed_form_expected_detection(initial: &QutritState, circuit: &Circuit, noise: &NoiseSpec) -> Result<f64> {
    let summary = circuit.summary();
    let location = noise.location_distribution(&summary)?;
    let labels = error_distribution(noise)?;
    let mut state = initial.clone();
    let mut done = 0;
    let mut total = 0.0;
    for (&k, &pk) in summary.two_qutrit_gates.iter().zip(&location) {
        state = circuit.run_range(&state, done..k + 1)?;
        done = k + 1;
        let sites = circuit.gates()[k].sites();
        let d = decompose_on_pair(&state, sites[0], sites[1])?;
        total += pk * labels.iter().map(|&(l, w)| w * closed_form_detection(&d, l)).sum::<f64>();
    }
    Ok(total)
}

/// How a trial's outcome statistics are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Sampling {
    /// Use exact probabilities (leak probability, Born distribution).
    Exact,
    /// Sample measurement shots per trial.
    Shots { shots: u64 },
}

/// Which noise realizations make up the ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Ensemble {
    /// Every (faulty gate, label) pair with its model probability.
    Exhaustive,
    /// `trials` independent draws with equal weight.
    Sampled { trials: u64 },
}

/// A prepared experiment: everything needed to run the noisy ensemble.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub circuit: Circuit,
    pub initial: QutritState,
    pub noise: NoiseSpec,
    pub observable: Observable,
    pub ensemble: Ensemble,
    pub sampling: Sampling,
    pub seed: u64,
}

/// Outcome of one noise realization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub gate_index: usize,
    pub label: GeneralizedPauliLabel,
    pub subset: ErrorClass,
    pub weight: f64,
    /// Exact leak probability, or 0/1 for a single sampled detection shot.
    pub detection: f64,
    pub retained_mass: f64,
    pub e_conventional: f64,
    pub e_rescaled: Option<f64>,
    #[serde(skip)]
    pub distribution: Option<OutcomeDistribution>,
}

fn ensemble_draws(exp: &Experiment) -> Result<Vec<(u64, NoiseDraw, f64)>> {
    let summary = exp.circuit.summary();
    match exp.ensemble {
        Ensemble::Exhaustive => Ok(enumerate_draws(&exp.noise, &summary)?
            .into_iter()
            .enumerate()
            .map(|(i, (d, w))| (i as u64, d, w))
            .collect()),
        Ensemble::Sampled { trials } => {
            if trials == 0 {
                return Err(Error::Config("trials must be at least 1".into()));
            }
            let sampler = NoiseSampler::new(&exp.noise, &summary)?;
            let w = 1.0 / trials as f64;
            Ok((0..trials).map(|t| (t, sampler.sample(t), w)).collect())
        }
    }
}

/// States right after each two-qutrit gate, keyed by circuit index.
fn states_after_gates(circuit: &Circuit, initial: &QutritState) -> Result<BTreeMap<usize, QutritState>> {
    let mut out = BTreeMap::new();
    let mut state = initial.clone();
    for (k, gate) in circuit.gates().iter().enumerate() {
        state = gate.apply(&state)?;
        if gate.arity() == 2 {
            out.insert(k, state.clone());
        }
    }
    Ok(out)
}

fn noisy_final(
    circuit: &Circuit,
    prefix: &BTreeMap<usize, QutritState>,
    draw: &NoiseDraw,
) -> Result<QutritState> {
    let before = prefix.get(&draw.gate_index).ok_or(Error::NoTwoQutritGate)?;
    let hit = apply_error_after(before, circuit, draw)?;
    circuit.run_range(&hit, draw.gate_index + 1..circuit.len())
}

fn run_trials(exp: &Experiment, keep_distributions: bool) -> Result<Vec<TrialRecord>> {
    if exp.initial.leak_probability() > LOGICAL_STATE_TOL {
        return Err(Error::LeakedState(exp.initial.leak_probability()));
    }
    let draws = ensemble_draws(exp)?;
    let prefix = states_after_gates(&exp.circuit, &exp.initial)?;
    draws
        .par_iter()
        .map(|&(trial, draw, weight)| {
            let state = noisy_final(&exp.circuit, &prefix, &draw)?;
            let exact = exact_distribution(&state, &exp.observable)?;
            let (dist, detection) = match exp.sampling {
                Sampling::Exact => (exact, state.leak_probability()),
                Sampling::Shots { shots } => {
                    let sampled = sample_distribution(&exact, shots, exp.seed, trial)?;
                    let mut rng = substream(exp.seed, Domain::DetectionShot, trial);
                    let hit = rng.random::<f64>() < state.leak_probability();
                    (sampled, if hit { 1.0 } else { 0.0 })
                }
            };
            let e_rescaled = match estimate_rescaled(&dist, &exp.observable) {
                Ok(v) => Some(v),
                Err(Error::AllLeaked { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(TrialRecord {
                trial,
                gate_index: draw.gate_index,
                label: draw.label,
                subset: classify_label(draw.label),
                weight,
                detection,
                retained_mass: retained_mass(&dist, &exp.observable)?,
                e_conventional: estimate_conventional(&dist, &exp.observable)?,
                e_rescaled,
                distribution: keep_distributions.then_some(dist),
            })
        })
        .collect()
}

fn detection_from_records(records: &[TrialRecord], method: DetectionMethod) -> DetectionReport {
    let mut sum = [0.0f64; GeneralizedPauliLabel::COUNT];
    let mut weight = [0.0f64; GeneralizedPauliLabel::COUNT];
    let mut count = [0u64; GeneralizedPauliLabel::COUNT];
    let (mut agg, mut agg_sq, mut total_w) = (0.0, 0.0, 0.0);
    for r in records {
        let i = r.label.index();
        sum[i] += r.weight * r.detection;
        weight[i] += r.weight;
        count[i] += 1;
        agg += r.weight * r.detection;
        agg_sq += r.weight * r.detection * r.detection;
        total_w += r.weight;
    }
    let per_label: Vec<LabelDetection> = GeneralizedPauliLabel::errors()
        .map(|label| {
            let i = label.index();
            LabelDetection {
                label,
                subset: classify_label(label),
                probability: (weight[i] > 0.0).then(|| sum[i] / weight[i]),
                samples: count[i],
            }
        })
        .collect();
    let mean = if total_w > 0.0 { agg / total_w } else { 0.0 };
    let trials = records.len() as u64;
    let std_error = (method == DetectionMethod::Simulated && trials > 1).then(|| {
        let var = (agg_sq / total_w - mean * mean).max(0.0) * trials as f64 / (trials - 1) as f64;
        (var / trials as f64).sqrt()
    });
    DetectionReport {
        method,
        subset_sums: subset_sums_of(&per_label),
        per_label,
        aggregate: mean,
        aggregate_std_error: std_error,
        trials: Some(trials),
    }
}

/// Monte Carlo detection rates for `trials` sampled noise realizations.
pub fn simulate_detection(
    initial: &QutritState,
    circuit: &Circuit,
    noise: &NoiseSpec,
    trials: u64,
    sampling: Sampling,
) -> Result<(DetectionReport, Vec<TrialRecord>)> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let summary = circuit.summary();
    let sampler = NoiseSampler::new(noise, &summary)?;
    if initial.leak_probability() > LOGICAL_STATE_TOL {
        return Err(Error::LeakedState(initial.leak_probability()));
    }
    let prefix = states_after_gates(circuit, initial)?;
    let w = 1.0 / trials as f64;
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let draw = sampler.sample(t);
            let state = noisy_final(circuit, &prefix, &draw)?;
            let leak = state.leak_probability();
            let detection = match sampling {
                Sampling::Exact => leak,
                Sampling::Shots { .. } => {
                    let mut rng = substream(noise.seed, Domain::DetectionShot, t);
                    if rng.random::<f64>() < leak { 1.0 } else { 0.0 }
                }
            };
            Ok(TrialRecord {
                trial: t,
                gate_index: draw.gate_index,
                label: draw.label,
                subset: classify_label(draw.label),
                weight: w,
                detection,
                retained_mass: 1.0 - leak,
                e_conventional: f64::NAN,
                e_rescaled: None,
                distribution: None,
            })
        })
        .collect::<Result<_>>()?;
    Ok((detection_from_records(&records, DetectionMethod::Simulated), records))
}

/// Ensemble summary of the two estimators against the ideal value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub e_ideal: f64,
    /// Weighted mean of per-trial `E′`.
    pub mean_conventional: f64,
    /// Weighted mean of per-trial `E_r`, over trials where it is defined.
    pub mean_rescaled: Option<f64>,
    pub mean_abs_error_conventional: f64,
    pub mean_abs_error_rescaled: Option<f64>,
    /// Estimates from the ensemble-averaged outcome distribution (all trials pooled).
    pub pooled_conventional: f64,
    pub pooled_rescaled: Option<f64>,
    pub mean_retained_mass: f64,
    pub min_retained_mass: f64,
    pub max_retained_mass: f64,
    /// Trials where every outcome leaked; excluded from the `E_r` averages.
    pub all_leaked_trials: u64,
    pub all_leaked_weight: f64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub estimation: EstimatorSummary,
    pub detection: DetectionReport,
    pub closed_form_detection: f64,
    pub ensemble: Ensemble,
    pub sampling: Sampling,
    pub seed: u64,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Noiseless reference value `E = Tr(ρ_f Ô)`.
pub fn ideal_value(exp: &Experiment) -> Result<f64> {
    let final_state = exp.circuit.run(&exp.initial)?;
    estimate_conventional(&exact_distribution(&final_state, &exp.observable)?, &exp.observable)
}

/// Runs the noisy ensemble and compares `E′` and `E_r` with `E`.
/// Fails with [`Error::AllLeaked`] if no trial retains any logical mass.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentReport> {
    let e_ideal = ideal_value(exp)?;
    let records = run_trials(exp, true)?;
    let total_w: f64 = records.iter().map(|r| r.weight).sum();

    let mut pooled = vec![0.0f64; exp.observable.outcome_count()];
    let (mut conv, mut conv_err, mut retained) = (0.0, 0.0, 0.0);
    let (mut resc, mut resc_err, mut resc_w) = (0.0, 0.0, 0.0);
    let (mut leaked_trials, mut leaked_w) = (0u64, 0.0);
    let (mut min_ret, mut max_ret) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &records {
        conv += r.weight * r.e_conventional;
        conv_err += r.weight * (r.e_conventional - e_ideal).abs();
        retained += r.weight * r.retained_mass;
        min_ret = min_ret.min(r.retained_mass);
        max_ret = max_ret.max(r.retained_mass);
        match r.e_rescaled {
            Some(v) => {
                resc += r.weight * v;
                resc_err += r.weight * (v - e_ideal).abs();
                resc_w += r.weight;
            }
            None => {
                leaked_trials += 1;
                leaked_w += r.weight;
            }
        }
        if let Some(d) = &r.distribution {
            pooled.iter_mut().zip(&d.probabilities).for_each(|(acc, p)| *acc += r.weight * p);
        }
    }
    if resc_w == 0.0 {
        return Err(Error::AllLeaked { retained: retained / total_w });
    }
    pooled.iter_mut().for_each(|p| *p /= total_w);
    let pooled = OutcomeDistribution { probabilities: pooled, source: crate::estimation::DistributionSource::Exact };
    let pooled_rescaled = match estimate_rescaled(&pooled, &exp.observable) {
        Ok(v) => Some(v),
        Err(Error::AllLeaked { .. }) => None,
        Err(e) => return Err(e),
    };

    let method = match exp.ensemble {
        Ensemble::Exhaustive if exp.sampling == Sampling::Exact => DetectionMethod::ClosedForm,
        _ => DetectionMethod::Simulated,
    };
    let mut detection = detection_from_records(&records, DetectionMethod::Simulated);
    detection.method = method;
    if method == DetectionMethod::ClosedForm {
        detection.aggregate_std_error = None;
    }

    let estimation = EstimatorSummary {
        e_ideal,
        mean_conventional: conv / total_w,
        mean_rescaled: Some(resc / resc_w),
        mean_abs_error_conventional: conv_err / total_w,
        mean_abs_error_rescaled: Some(resc_err / resc_w),
        pooled_conventional: estimate_conventional(&pooled, &exp.observable)?,
        pooled_rescaled,
        mean_retained_mass: retained / total_w,
        min_retained_mass: min_ret,
        max_retained_mass: max_ret,
        all_leaked_trials: leaked_trials,
        all_leaked_weight: leaked_w,
        trials: records.len() as u64,
    };
    let mut records = records;
    records.iter_mut().for_each(|r| r.distribution = None);
    Ok(ExperimentReport {
        estimation,
        detection,
        closed_form_detection: closed_form_expected_detection(&exp.initial, &exp.circuit, &exp.noise)?,
        ensemble: exp.ensemble,
        sampling: exp.sampling,
        seed: exp.seed,
        records,
    })
}
