use crate::error::{Error, Result};
use crate::holonomy::HolonomicGate;
use crate::state::QutritState;

/// Ordered list of holonomic gates on `n` qutrits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<HolonomicGate>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<HolonomicGate>) -> Result<Self> {
        for gate in &gates {
            if let Some(&site) = gate.sites().iter().find(|&&s| s >= n) {
                return Err(Error::SiteOutOfRange { site, n });
            }
        }
        Ok(Self { n, gates })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[HolonomicGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn summary(&self) -> CircuitSummary {
        CircuitSummary {
            gate_count: self.gates.len(),
            two_qutrit_gates: self.gates.iter().enumerate().filter(|(_, g)| g.arity() == 2).map(|(i, _)| i).collect(),
        }
    }

    /// Applies `gates[range]` in order.
    pub fn run_range(&self, state: &QutritState, range: std::ops::Range<usize>) -> Result<QutritState> {
        if state.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: state.n() });
        }
        self.gates[range].iter().try_fold(state.clone(), |s, g| g.apply(&s))
    }

    /// Noiseless execution.
    pub fn run(&self, state: &QutritState) -> Result<QutritState> {
        self.run_range(state, 0..self.gates.len())
    }
}

/// What the noise model needs to know about a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitSummary {
    pub gate_count: usize,
    /// Circuit indices of the two-qutrit gates, in order.
    pub two_qutrit_gates: Vec<usize>,
}
