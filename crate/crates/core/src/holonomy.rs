//! Nonadiabatic holonomic gates on Λ-type qutrits.
//!
//! A single-qutrit gate comes from the resonant single-loop pulse
//! `H(t) = Ω(t)(|b⟩⟨2| + |2⟩⟨b|)` with bright state
//! `|b⟩ = sin(θ/2)e^{iφ}|0⟩ − cos(θ/2)|1⟩` and `∫Ω dt = π`. The dark state is
//! untouched, `|b⟩` picks up a sign, and the logical block becomes
//! `I − 2|b⟩⟨b|`. The integrator does not assume any of this: it evolves the
//! propagator with RK4 and measures the cyclicity and parallel-transport
//! conditions directly.
//!
//! Two-qutrit gates are embedded logical unitaries acting as the identity on
//! the complement of `span{|0⟩, |1⟩}^{⊗2}`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::ComplexMatrix;
use crate::error::{Error, Result};
use crate::state::{is_logical_index, logical_to_ternary, QutritState};

/// Unitarity tolerance accepted for a gate.
pub const GATE_UNITARY_TOL: f64 = 1e-10;
/// Block-preservation tolerance accepted for a gate.
pub const GATE_BLOCK_TOL: f64 = 1e-8;
/// Largest cyclicity or parallel-transport defect for which a schedule yields a gate.
pub const HOLONOMY_ACCEPT_TOL: f64 = 1e-6;
/// Largest propagator change under step halving for an accepted integration.
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Tolerance on the pulse area for the single-loop condition.
pub const AREA_TOL: f64 = 1e-6;

pub const DEFAULT_STEPS: usize = 1000;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A unitary on one or two qutrit sites that maps the logical subspace and
/// its complement to themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomicGate {
    unitary: ComplexMatrix,
    sites: Vec<usize>,
}

impl HolonomicGate {
    /// Validates arity, unitarity (1e-10) and block preservation (1e-8).
    pub fn new(unitary: ComplexMatrix, sites: Vec<usize>) -> Result<Self> {
        let arity = sites.len();
        if !(1..=2).contains(&arity) {
            return Err(Error::Config(format!("gate arity must be 1 or 2, got {arity}")));
        }
        if arity == 2 && sites[0] == sites[1] {
            return Err(Error::SiteCollision(sites[0]));
        }
        let d = 3usize.pow(arity as u32);
        if unitary.rows() != d || unitary.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: unitary.rows() });
        }
        let defect = unitary.unitarity_defect();
        if defect > GATE_UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        let gate = Self { unitary, sites };
        let block = gate.block_defect();
        if block > GATE_BLOCK_TOL {
            return Err(Error::NotBlockPreserving(block));
        }
        Ok(gate)
    }

    pub fn arity(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    /// `‖(I − P̂)·U·P̂‖_max` over the gate's own sites.
    pub fn block_defect(&self) -> f64 {
        let k = self.arity();
        let d = self.unitary.rows();
        let mut worst = 0.0f64;
        for r in (0..d).filter(|&r| !is_logical_index(r, k)) {
            for c in (0..d).filter(|&c| is_logical_index(c, k)) {
                worst = worst.max(self.unitary[(r, c)].norm());
            }
        }
        worst
    }

    /// Restriction of the unitary to the `2^k`-dimensional logical block.
    pub fn logical_block(&self) -> ComplexMatrix {
        let k = self.arity();
        ComplexMatrix::from_fn(1 << k, 1 << k, |r, c| {
            self.unitary[(logical_to_ternary(r, k), logical_to_ternary(c, k))]
        })
    }

    pub fn apply(&self, state: &QutritState) -> Result<QutritState> {
        match *self.sites.as_slice() {
            [s] => state.apply_single_site(&self.unitary, s),
            [a, b] => state.apply_two_site(&self.unitary, a, b),
            _ => unreachable!("arity checked on construction"),
        }
    }
}

/// Embeds a `2^k × 2^k` logical unitary on `sites` (k = 1 or 2) as a
/// block-diagonal `3^k × 3^k` gate, identity on the complement.
pub fn embed_logical_unitary(logical: &ComplexMatrix, sites: &[usize]) -> Result<HolonomicGate> {
    let k = sites.len();
    if !(1..=2).contains(&k) {
        return Err(Error::Config(format!("logical gates act on 1 or 2 sites, got {k}")));
    }
    let ld = 1usize << k;
    if logical.rows() != ld || logical.cols() != ld {
        return Err(Error::DimensionMismatch { expected: ld, found: logical.rows() });
    }
    let defect = logical.unitarity_defect();
    if defect > GATE_UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let mut full = ComplexMatrix::identity(3usize.pow(k as u32));
    for r in 0..ld {
        for c in 0..ld {
            full[(logical_to_ternary(r, k), logical_to_ternary(c, k))] = logical[(r, c)];
        }
    }
    HolonomicGate::new(full, sites.to_vec())
}

/// Pulse envelope shape. Scaled so that its integral over `[0, τ]` equals the pulse area.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    #[default]
    SineSquared,
    Square,
}

impl Envelope {
    pub fn name(&self) -> &'static str {
        match self {
            Envelope::SineSquared => "sine_squared",
            Envelope::Square => "square",
        }
    }
}

/// Resonant Λ-pulse: couplings `|0⟩↔|2⟩` and `|1⟩↔|2⟩` only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub theta: f64,
    pub phi: f64,
    #[serde(default = "default_area")]
    pub area: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub envelope: Envelope,
}

fn default_area() -> f64 {
    PI
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_tau() -> f64 {
    1.0
}

impl PulseSchedule {
    /// Single-loop pulse (area π) with the default envelope and grid.
    pub fn single_loop(theta: f64, phi: f64) -> Self {
        Self { theta, phi, area: PI, steps: DEFAULT_STEPS, tau: 1.0, envelope: Envelope::SineSquared }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.theta, self.phi, self.area, self.tau].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidSchedule("non-finite parameter".into()));
        }
        if self.tau <= 0.0 {
            return Err(Error::InvalidSchedule(format!("duration must be positive, got {}", self.tau)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidSchedule("steps must be at least 1".into()));
        }
        Ok(())
    }

    /// `|∫Ω dt − π| ≤ 1e-6`.
    pub fn is_single_loop(&self) -> bool {
        (self.area - PI).abs() <= AREA_TOL
    }

    /// Envelope value `Ω(t)` in angular-frequency units.
    pub fn rabi(&self, t: f64) -> f64 {
        match self.envelope {
            Envelope::SineSquared => {
                let s = (PI * t / self.tau).sin();
                2.0 * self.area / self.tau * s * s
            }
            Envelope::Square => self.area / self.tau,
        }
    }

    /// `Ω` sampled on the uniform grid `t_k = kτ/steps`, `k = 0..=steps`.
    pub fn samples(&self) -> Vec<f64> {
        let h = self.tau / self.steps as f64;
        (0..=self.steps).map(|k| self.rabi(k as f64 * h)).collect()
    }

    /// Bright-state components `(⟨0|b⟩, ⟨1|b⟩)`.
    pub fn bright_state(&self) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [C64::from_polar(s, self.phi), C64::new(-c, 0.0)]
    }

    /// Hamiltonian at time `t`; there is no `|0⟩↔|1⟩` element.
    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let w = self.rabi(t);
        let [b0, b1] = self.bright_state();
        let mut h = ComplexMatrix::zeros(3, 3);
        h[(0, 2)] = b0 * w;
        h[(1, 2)] = b1 * w;
        h[(2, 0)] = b0.conj() * w;
        h[(2, 1)] = b1.conj() * w;
        h
    }

    fn with_steps(&self, steps: usize) -> Self {
        Self { steps, ..self.clone() }
    }
}

/// Outcome of checking a schedule against the holonomy conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolonomyReport {
    /// `‖P_{S(τ)} − P_{S(0)}‖_max` for `S = span{|φ_0⟩, |φ_1⟩}`.
    pub cyclicity_defect: f64,
    /// `max_t max_{μν} |⟨φ_μ(t)|H(t)|φ_ν(t)⟩|` over grid points.
    pub parallel_transport_residual: f64,
    /// `⟨μ|U(τ)|ν⟩` for μ, ν ∈ {0, 1}.
    pub projected_gate: ComplexMatrix,
    /// Full propagator `U(τ)`.
    pub propagator: ComplexMatrix,
    /// Max-norm change of `U(τ)` when the step is halved.
    pub step_halving_delta: f64,
    pub steps: usize,
    pub envelope: Envelope,
    pub pulse_area: f64,
}

impl HolonomyReport {
    pub fn is_holonomic(&self, tol: f64) -> bool {
        self.cyclicity_defect <= tol && self.parallel_transport_residual <= tol
    }
}

struct Trajectory {
    propagator: ComplexMatrix,
    transport_residual: f64,
}

fn rk4_derivative(h: &ComplexMatrix, u: &ComplexMatrix) -> ComplexMatrix {
    (h * u).scale(C64::new(0.0, -1.0))
}

fn axpy(u: &ComplexMatrix, k: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    u + &k.scale(C64::new(dt, 0.0))
}

fn frame_residual(h: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    // ⟨φ_μ|H|φ_ν⟩ = (U†HU)_{μν} for the logical columns μ, ν.
    let hu = h * u;
    let mut worst = 0.0f64;
    for mu in 0..2 {
        for nu in 0..2 {
            let elem: C64 = (0..3).map(|r| u[(r, mu)].conj() * hu[(r, nu)]).sum();
            worst = worst.max(elem.norm());
        }
    }
    worst
}

/// Classical fourth-order Runge-Kutta for `dU/dt = −iH(t)U`, `U(0) = I`.
fn integrate_propagator(schedule: &PulseSchedule) -> Trajectory {
    let h = schedule.tau / schedule.steps as f64;
    let mut u = ComplexMatrix::identity(3);
    let mut residual = frame_residual(&schedule.hamiltonian(0.0), &u);
    for step in 0..schedule.steps {
        let t = step as f64 * h;
        let h0 = schedule.hamiltonian(t);
        let hm = schedule.hamiltonian(t + 0.5 * h);
        let h1 = schedule.hamiltonian(t + h);
        let k1 = rk4_derivative(&h0, &u);
        let k2 = rk4_derivative(&hm, &axpy(&u, &k1, 0.5 * h));
        let k3 = rk4_derivative(&hm, &axpy(&u, &k2, 0.5 * h));
        let k4 = rk4_derivative(&h1, &axpy(&u, &k3, h));
        let incr = &(&k1 + &k2.scale(C64::new(2.0, 0.0))) + &(&k3.scale(C64::new(2.0, 0.0)) + &k4);
        u = axpy(&u, &incr, h / 6.0);
        residual = residual.max(frame_residual(&h1, &u));
    }
    Trajectory { propagator: u, transport_residual: residual }
}

fn subspace_projector(u: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(3, 3, |r, c| (0..2).map(|mu| u[(r, mu)] * u[(c, mu)].conj()).sum())
}

/// Integrates the schedule and measures the holonomy conditions on the
/// evolved logical frame. Fails if halving the step moves `U(τ)` by more than 1e-8.
pub fn integrate_schedule(schedule: &PulseSchedule) -> Result<HolonomyReport> {
    schedule.validate()?;
    let coarse = integrate_propagator(schedule);
    let fine = integrate_propagator(&schedule.with_steps(2 * schedule.steps));
    let delta = coarse.propagator.max_distance(&fine.propagator);
    if delta.is_nan() || delta > CONVERGENCE_TOL {
        return Err(Error::NumericalAccuracy(delta));
    }
    let initial = ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0), ZERO]);
    let u = coarse.propagator;
    Ok(HolonomyReport {
        cyclicity_defect: subspace_projector(&u).max_distance(&initial),
        parallel_transport_residual: coarse.transport_residual,
        projected_gate: ComplexMatrix::from_fn(2, 2, |r, c| u[(r, c)]),
        propagator: u,
        step_halving_delta: delta,
        steps: schedule.steps,
        envelope: schedule.envelope,
        pulse_area: schedule.area,
    })
}

/// Builds the single-qutrit gate `U(τ)` on `site`, provided both holonomy
/// defects are at most 1e-6.
pub fn gate_from_schedule(schedule: &PulseSchedule, site: usize) -> Result<HolonomicGate> {
    let report = integrate_schedule(schedule)?;
    if !report.is_holonomic(HOLONOMY_ACCEPT_TOL) {
        return Err(Error::NotHolonomic(Box::new(report)));
    }
    HolonomicGate::new(report.propagator, vec![site])
}

/// Common logical gates, in binary big-endian order.
pub mod logical {
    use std::f64::consts::FRAC_1_SQRT_2;

    use num_complex::Complex64 as C64;

    use crate::algebra::ComplexMatrix;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        ComplexMatrix::from_rows(&rows).expect("static gate table")
    }

    pub fn identity(k: usize) -> ComplexMatrix {
        ComplexMatrix::identity(1 << k)
    }

    pub fn x() -> ComplexMatrix {
        real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.0, -1.0);
        m[(1, 0)] = C64::new(0.0, 1.0);
        m
    }

    pub fn z() -> ComplexMatrix {
        real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    pub fn h() -> ComplexMatrix {
        real(&[&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]])
    }

    pub fn s() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)])
    }

    pub fn t() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)])
    }

    pub fn cnot() -> ComplexMatrix {
        real(&[&[1., 0., 0., 0.], &[0., 1., 0., 0.], &[0., 0., 0., 1.], &[0., 0., 1., 0.]])
    }

    pub fn cz() -> ComplexMatrix {
        real(&[&[1., 0., 0., 0.], &[0., 1., 0., 0.], &[0., 0., 1., 0.], &[0., 0., 0., -1.]])
    }

    pub fn swap() -> ComplexMatrix {
        real(&[&[1., 0., 0., 0.], &[0., 0., 1., 0.], &[0., 1., 0., 0.], &[0., 0., 0., 1.]])
    }

    pub fn by_name(name: &str) -> Option<(ComplexMatrix, usize)> {
        let g = match name.to_ascii_lowercase().as_str() {
            "i" | "id" | "identity" => (identity(1), 1),
            "x" => (x(), 1),
            "y" => (y(), 1),
            "z" => (z(), 1),
            "h" => (h(), 1),
            "s" => (s(), 1),
            "t" => (t(), 1),
            "ii" | "identity2" => (identity(2), 2),
            "cnot" | "cx" => (cnot(), 2),
            "cz" => (cz(), 2),
            "swap" => (swap(), 2),
            _ => return None,
        };
        Some(g)
    }
}
