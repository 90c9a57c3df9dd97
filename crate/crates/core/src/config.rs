//! Experiment configuration files (JSON).
//!
//! ```json
//! {
//!   "system": { "n": 2, "initial_state": "00" },
//!   "circuit": [
//!     { "kind": "named", "name": "h", "sites": [0] },
//!     { "kind": "named", "name": "cnot", "sites": [0, 1] },
//!     { "kind": "holonomic", "site": 1, "theta": 0.7, "phi": 0.2 }
//!   ],
//!   "noise": { "mode": "symmetric" },
//!   "observable": { "pauli": "ZZ" },
//!   "run": { "ensemble": "exhaustive", "seed": 7 }
//! }
//! ```
//!
//! `initial_state` is a ternary basis string, `{"logical_amplitudes": [[re, im], ...]}`
//! over the `2^n` logical kets, or `{"amplitudes": [...]}` over all `3^n` kets.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::ComplexMatrix;
use crate::analysis::{Ensemble, Experiment, Sampling};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::estimation::{logical_pauli_string, observable_from_logical, Observable};
use crate::holonomy::{embed_logical_unitary, gate_from_schedule, logical, Envelope, HolonomicGate, PulseSchedule};
use crate::noise::NoiseSpec;
use crate::state::QutritState;

/// Maximum leak probability of a configured initial state.
pub const INITIAL_LEAK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub circuit: Vec<GateConfig>,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub observable: ObservableConfig,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n: usize,
    pub initial_state: InitialState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Basis(String),
    Logical { logical_amplitudes: Vec<[f64; 2]> },
    Full { amplitudes: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateConfig {
    /// A standard logical gate (`h`, `cnot`, ...) embedded on the given sites.
    Named { name: String, sites: Vec<usize> },
    /// An arbitrary `2^k × 2^k` logical unitary.
    Logical { sites: Vec<usize>, matrix: ComplexMatrix },
    /// A single-qutrit gate obtained by integrating a Λ pulse.
    Holonomic {
        site: usize,
        theta: f64,
        phi: f64,
        #[serde(default = "default_area")]
        area: f64,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default)]
        envelope: Envelope,
    },
}

fn default_area() -> f64 {
    std::f64::consts::PI
}

fn default_steps() -> usize {
    crate::holonomy::DEFAULT_STEPS
}

fn default_tau() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    /// Tensor product of logical Paulis, one letter per qutrit (site 0 first).
    Pauli(String),
    /// Hermitian `2^n × 2^n` logical matrix.
    Matrix(ComplexMatrix),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    #[default]
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub ensemble: EnsembleKind,
    /// Trial count for the sampled ensemble and for `simulate`.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Shots per trial; `None` or `exact = true` uses exact distributions.
    #[serde(default)]
    pub shots: Option<u64>,
    /// Overrides `noise.seed` when present.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub draws_csv: Option<PathBuf>,
}

fn default_trials() -> u64 {
    10_000
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ensemble: EnsembleKind::Exhaustive,
            trials: default_trials(),
            shots: None,
            seed: None,
            exact: false,
            out: None,
            draws_csv: None,
        }
    }
}

impl RunConfig {
    pub fn sampling(&self) -> Sampling {
        match self.shots {
            Some(shots) if !self.exact => Sampling::Shots { shots },
            _ => Sampling::Exact,
        }
    }

    pub fn ensemble(&self) -> Ensemble {
        match self.ensemble {
            EnsembleKind::Exhaustive => Ensemble::Exhaustive,
            EnsembleKind::Sampled => Ensemble::Sampled { trials: self.trials },
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON, reporting the failing field path and line/column on error.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." || path.is_empty() {
                Error::Config(inner.to_string())
            } else {
                Error::Config(format!("at `{path}`: {inner}"))
            }
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(self.noise.seed)
    }

    pub fn initial_state(&self) -> Result<QutritState> {
        let n = self.system.n;
        let state = match &self.system.initial_state {
            InitialState::Basis(s) => {
                let state = QutritState::basis(s)?;
                if state.n() != n {
                    return Err(Error::Config(format!("initial state {s:?} has {} qutrits, expected {n}", state.n())));
                }
                state
            }
            InitialState::Logical { logical_amplitudes } => QutritState::from_logical(n, &to_complex(logical_amplitudes))?,
            InitialState::Full { amplitudes } => QutritState::new(n, to_complex(amplitudes))?,
        };
        if !state.is_normalized() {
            return Err(Error::NotNormalized(state.norm_sqr()));
        }
        let leak = state.leak_probability();
        if leak > INITIAL_LEAK_TOL {
            return Err(Error::LeakedState(leak));
        }
        Ok(state)
    }

    pub fn circuit(&self) -> Result<Circuit> {
        let gates = self.circuit.iter().map(build_gate).collect::<Result<Vec<_>>>()?;
        Circuit::new(self.system.n, gates)
    }

    pub fn observable(&self) -> Result<Observable> {
        let n = self.system.n;
        let matrix = match &self.observable {
            ObservableConfig::Pauli(s) => {
                if s.chars().count() != n {
                    return Err(Error::Config(format!("observable {s:?} must have one letter per qutrit ({n})")));
                }
                logical_pauli_string(s)?
            }
            ObservableConfig::Matrix(m) => m.clone(),
        };
        observable_from_logical(&matrix, n)
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec { seed: self.seed(), ..self.noise.clone() }
    }

    pub fn experiment(&self) -> Result<Experiment> {
        Ok(Experiment {
            circuit: self.circuit()?,
            initial: self.initial_state()?,
            noise: self.noise(),
            observable: self.observable()?,
            ensemble: self.run.ensemble(),
            sampling: self.run.sampling(),
            seed: self.seed(),
        })
    }
}

fn to_complex(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

fn build_gate(gate: &GateConfig) -> Result<HolonomicGate> {
    match gate {
        GateConfig::Named { name, sites } => {
            let (matrix, arity) =
                logical::by_name(name).ok_or_else(|| Error::Config(format!("unknown gate name {name:?}")))?;
            if sites.len() != arity {
                return Err(Error::Config(format!("gate {name:?} acts on {arity} sites, got {}", sites.len())));
            }
            embed_logical_unitary(&matrix, sites)
        }
        GateConfig::Logical { sites, matrix } => embed_logical_unitary(matrix, sites),
        GateConfig::Holonomic { site, theta, phi, area, steps, tau, envelope } => {
            let schedule =
                PulseSchedule { theta: *theta, phi: *phi, area: *area, steps: *steps, tau: *tau, envelope: *envelope };
            gate_from_schedule(&schedule, *site)
        }
    }
}
