//! Observables supported on the logical subspace and the two ways of turning
//! measurement statistics into an average value.
//!
//! With eigenpairs `(λ_j, |j⟩)` split into logical and leaked parts and
//! `P_j = Tr(ρ|j⟩⟨j|)`:
//!
//! * conventional: `E′ = Σ_j P_j λ_j`
//! * rescaled: `E_r = Σ_{j∈L} P_j λ_j / Σ_{j∈L} P_j`
//!
//! Leaked eigenvectors all carry `λ = 0`, so they only enter `E′` through the
//! probability mass they take away from the logical outcomes.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::algebra::ComplexMatrix;
use crate::error::{Error, Result};
use crate::rng::{substream, Domain};
use crate::state::{dim, is_logical_index, logical_to_ternary, DensityMatrix, QutritState};

pub const HERMITIAN_TOL: f64 = 1e-10;
/// Retained mass at or below which the rescaled estimator is undefined.
pub const RETAINED_MASS_TOL: f64 = 1e-12;
const NEGATIVE_CLIP_TOL: f64 = 1e-12;
const RENORMALIZE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Logical,
    Leaked,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: QutritState,
    pub region: Region,
}

/// Hermitian operator with support in the logical subspace.
///
/// Outcome order: the `2^n` logical eigenvectors (ascending eigenvalue),
/// then one leaked zero-mode per non-logical basis ket in ternary order.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    n: usize,
    logical_values: Vec<f64>,
    /// Columns are logical eigenvectors in binary big-endian coordinates.
    logical_vectors: ComplexMatrix,
    leaked_indices: Vec<usize>,
}

impl Observable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outcome_count(&self) -> usize {
        dim(self.n)
    }

    pub fn logical_count(&self) -> usize {
        self.logical_values.len()
    }

    pub fn eigenvalue(&self, j: usize) -> f64 {
        self.logical_values.get(j).copied().unwrap_or(0.0)
    }

    pub fn region(&self, j: usize) -> Region {
        if j < self.logical_count() { Region::Logical } else { Region::Leaked }
    }

    pub fn logical_values(&self) -> &[f64] {
        &self.logical_values
    }

    /// Ternary indices of the leaked zero-modes, in outcome order.
    pub fn leaked_indices(&self) -> &[usize] {
        &self.leaked_indices
    }

    /// Materializes every eigenpair as a full `3^n` ket.
    pub fn eigenpairs(&self) -> Vec<Eigenpair> {
        let d = dim(self.n);
        let mut out = Vec::with_capacity(d);
        for (j, &value) in self.logical_values.iter().enumerate() {
            let mut amps = vec![C64::new(0.0, 0.0); d];
            for l in 0..self.logical_count() {
                amps[logical_to_ternary(l, self.n)] = self.logical_vectors[(l, j)];
            }
            let vector = QutritState::new(self.n, amps).expect("dimension fixed by n");
            out.push(Eigenpair { value, vector, region: Region::Logical });
        }
        for &i in &self.leaked_indices {
            let mut amps = vec![C64::new(0.0, 0.0); d];
            amps[i] = C64::new(1.0, 0.0);
            let vector = QutritState::new(self.n, amps).expect("dimension fixed by n");
            out.push(Eigenpair { value: 0.0, vector, region: Region::Leaked });
        }
        out
    }

    /// `Σ_j λ_j |j⟩⟨j|` on the full space.
    pub fn full_matrix(&self) -> ComplexMatrix {
        let d = dim(self.n);
        let logical = self.logical_matrix();
        let mut m = ComplexMatrix::zeros(d, d);
        for r in 0..self.logical_count() {
            for c in 0..self.logical_count() {
                m[(logical_to_ternary(r, self.n), logical_to_ternary(c, self.n))] = logical[(r, c)];
            }
        }
        m
    }

    /// `Σ_{j∈L} λ_j |j⟩⟨j|` in logical coordinates.
    pub fn logical_matrix(&self) -> ComplexMatrix {
        let k = self.logical_count();
        let v = &self.logical_vectors;
        ComplexMatrix::from_fn(k, k, |r, c| {
            (0..k).map(|j| v[(r, j)] * v[(c, j)].conj() * self.logical_values[j]).sum()
        })
    }

    /// Checks orthonormality (1e-10) and that logical/leaked tags match the
    /// eigenvectors' support.
    pub fn validate(&self) -> Result<()> {
        let pairs = self.eigenpairs();
        for (a, pa) in pairs.iter().enumerate() {
            for (b, pb) in pairs.iter().enumerate().skip(a) {
                let g = pa.vector.inner(&pb.vector);
                let target = if a == b { 1.0 } else { 0.0 };
                if (g - C64::new(target, 0.0)).norm() > 1e-10 {
                    return Err(Error::NotUnitary((g - C64::new(target, 0.0)).norm()));
                }
            }
            let leak = pa.vector.leak_probability();
            let consistent = match pa.region {
                Region::Logical => leak <= 1e-10,
                Region::Leaked => leak >= 1.0 - 1e-10 && pa.value == 0.0,
            };
            if !consistent {
                return Err(Error::LeakedState(leak));
            }
        }
        Ok(())
    }
}

/// Embeds a Hermitian `2^n × 2^n` logical operator, zero on the complement.
pub fn observable_from_logical(matrix: &ComplexMatrix, n: usize) -> Result<Observable> {
    let k = 1usize << n;
    if matrix.rows() != k || matrix.cols() != k {
        return Err(Error::DimensionMismatch { expected: k, found: matrix.rows() });
    }
    let defect = matrix.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (matrix + &matrix.adjoint()).scale(C64::new(0.5, 0.0));
    let eig = DMatrix::from_row_slice(k, k, sym.as_slice()).symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let logical_values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let logical_vectors = ComplexMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    let leaked_indices = (0..dim(n)).filter(|&i| !is_logical_index(i, n)).collect();
    Ok(Observable { n, logical_values, logical_vectors, leaked_indices })
}

/// Tensor product of logical Paulis, e.g. `"ZIX"`; site 0 is the leftmost character.
pub fn logical_pauli_string(spec: &str) -> Result<ComplexMatrix> {
    use crate::holonomy::logical;
    let mut acc: Option<ComplexMatrix> = None;
    for ch in spec.chars() {
        let f = match ch.to_ascii_uppercase() {
            'I' => logical::identity(1),
            'X' => logical::x(),
            'Y' => logical::y(),
            'Z' => logical::z(),
            _ => return Err(Error::Config(format!("invalid Pauli character {ch:?} in {spec:?}"))),
        };
        acc = Some(match acc {
            None => f,
            Some(a) => a.kron(&f),
        });
    }
    acc.ok_or_else(|| Error::Config("empty Pauli string".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DistributionSource {
    Exact,
    Shots { shots: u64, counts: Vec<u64> },
}

/// Outcome probabilities aligned with an observable's outcome order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub probabilities: Vec<f64>,
    pub source: DistributionSource,
}

impl OutcomeDistribution {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// Anything that assigns Born probabilities to the outcomes of an observable.
pub trait Measurable {
    fn raw_probabilities(&self, observable: &Observable) -> Result<Vec<f64>>;
}

impl Measurable for QutritState {
    fn raw_probabilities(&self, obs: &Observable) -> Result<Vec<f64>> {
        if self.n() != obs.n {
            return Err(Error::DimensionMismatch { expected: obs.n, found: self.n() });
        }
        let psi = self.amplitudes();
        let k = obs.logical_count();
        let logical: Vec<C64> = (0..k).map(|l| psi[logical_to_ternary(l, obs.n)]).collect();
        let mut p = Vec::with_capacity(dim(obs.n));
        for j in 0..k {
            let overlap: C64 = (0..k).map(|l| obs.logical_vectors[(l, j)].conj() * logical[l]).sum();
            p.push(overlap.norm_sqr());
        }
        p.extend(obs.leaked_indices.iter().map(|&i| psi[i].norm_sqr()));
        Ok(p)
    }
}

impl Measurable for DensityMatrix {
    fn raw_probabilities(&self, obs: &Observable) -> Result<Vec<f64>> {
        if self.n() != obs.n {
            return Err(Error::DimensionMismatch { expected: obs.n, found: self.n() });
        }
        let rho = self.matrix();
        let k = obs.logical_count();
        let idx: Vec<usize> = (0..k).map(|l| logical_to_ternary(l, obs.n)).collect();
        let mut p = Vec::with_capacity(dim(obs.n));
        for j in 0..k {
            let v: Vec<C64> = (0..k).map(|l| obs.logical_vectors[(l, j)]).collect();
            let mut acc = C64::new(0.0, 0.0);
            for (r, &ir) in idx.iter().enumerate() {
                for (c, &ic) in idx.iter().enumerate() {
                    acc += v[r].conj() * rho[(ir, ic)] * v[c];
                }
            }
            p.push(acc.re);
        }
        p.extend(obs.leaked_indices.iter().map(|&i| rho[(i, i)].re));
        Ok(p)
    }
}

/// Born-rule distribution; tiny negative values are clipped and a total within
/// 1e-8 of one is renormalized.
pub fn exact_distribution<M: Measurable + ?Sized>(source: &M, observable: &Observable) -> Result<OutcomeDistribution> {
    let mut p = source.raw_probabilities(observable)?;
    for v in p.iter_mut() {
        if *v < -NEGATIVE_CLIP_TOL || !v.is_finite() {
            return Err(Error::InvalidDistribution(format!("negative outcome probability {v:e}")));
        }
        *v = v.max(0.0);
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > RENORMALIZE_TOL {
        return Err(Error::NotNormalized(total));
    }
    p.iter_mut().for_each(|v| *v /= total);
    Ok(OutcomeDistribution { probabilities: p, source: DistributionSource::Exact })
}

/// Multinomial draw of `shots` outcomes, deterministic in `(seed, stream)`.
pub fn sample_distribution(exact: &OutcomeDistribution, shots: u64, seed: u64, stream: u64) -> Result<OutcomeDistribution> {
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let mut rng = substream(seed, Domain::Shots, stream);
    let mut counts = vec![0u64; exact.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for (j, &p) in exact.probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 1.0 };
        let c = if j + 1 == exact.len() || q >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q).map_err(|e| Error::InvalidDistribution(e.to_string()))?.sample(&mut rng)
        };
        counts[j] = c;
        remaining -= c;
        mass_left -= p;
    }
    let probabilities = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    Ok(OutcomeDistribution { probabilities, source: DistributionSource::Shots { shots, counts } })
}

fn check_aligned(dist: &OutcomeDistribution, obs: &Observable) -> Result<()> {
    if dist.len() != obs.outcome_count() {
        return Err(Error::DimensionMismatch { expected: obs.outcome_count(), found: dist.len() });
    }
    Ok(())
}

/// `Σ_{j∈L} P_j`.
pub fn retained_mass(dist: &OutcomeDistribution, obs: &Observable) -> Result<f64> {
    check_aligned(dist, obs)?;
    Ok(dist.probabilities[..obs.logical_count()].iter().sum())
}

/// `E′ = Σ_j P_j λ_j`.
pub fn estimate_conventional(dist: &OutcomeDistribution, obs: &Observable) -> Result<f64> {
    check_aligned(dist, obs)?;
    Ok(dist.probabilities.iter().enumerate().map(|(j, p)| p * obs.eigenvalue(j)).sum())
}

/// `E_r = Σ_{j∈L} P_j λ_j / Σ_{j∈L} P_j`; undefined when nothing is retained.
pub fn estimate_rescaled(dist: &OutcomeDistribution, obs: &Observable) -> Result<f64> {
    let retained = retained_mass(dist, obs)?;
    if retained <= RETAINED_MASS_TOL {
        return Err(Error::AllLeaked { retained });
    }
    let k = obs.logical_count();
    let numerator: f64 = dist.probabilities[..k].iter().zip(&obs.logical_values).map(|(p, l)| p * l).sum();
    Ok(numerator / retained)
}

/// Estimates from a single noisy final state against the noiseless one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub e_ideal: f64,
    pub e_conventional: f64,
    /// `None` when every outcome leaked.
    pub e_rescaled: Option<f64>,
    pub retained_mass: f64,
    pub shots: Option<u64>,
    pub seed: u64,
}

/// `shots = None` uses exact distributions.
pub fn estimate(
    ideal: &QutritState,
    noisy: &QutritState,
    obs: &Observable,
    shots: Option<u64>,
    seed: u64,
    stream: u64,
) -> Result<EstimationResult> {
    let e_ideal = estimate_conventional(&exact_distribution(ideal, obs)?, obs)?;
    let mut dist = exact_distribution(noisy, obs)?;
    if let Some(s) = shots {
        dist = sample_distribution(&dist, s, seed, stream)?;
    }
    let e_rescaled = match estimate_rescaled(&dist, obs) {
        Ok(v) => Some(v),
        Err(Error::AllLeaked { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(EstimationResult {
        e_ideal,
        e_conventional: estimate_conventional(&dist, obs)?,
        e_rescaled,
        retained_mass: retained_mass(&dist, obs)?,
        shots,
        seed,
    })
}

/// Weight of the ideal state in `α·P̂ρ′P̂` for `ρ′ = (1−p)ρ_f + pρ_ε` with
/// `ρ_f` inside L and `noise_retained = Tr(P̂ρ_εP̂)`.
pub fn ideal_weight_after_projection(p: f64, noise_retained: f64) -> f64 {
    (1.0 - p) / ((1.0 - p) + p * noise_retained)
}
