//! Dense n-qutrit states and density matrices.
//!
//! Basis index convention: big-endian ternary, so site 0 is the most
//! significant trit and `|21⟩` sits at index `2·3 + 1 = 7`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::ComplexMatrix;
use crate::error::{Error, Result};

pub const MAX_KET_QUTRITS: usize = 8;
pub const MAX_DENSITY_QUTRITS: usize = 6;

/// Tolerance for norm and trace checks.
pub const NORM_TOL: f64 = 1e-10;

/// Below this retained probability the projected object is treated as empty.
pub const ALL_LEAKED_TOL: f64 = 1e-15;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn dim(n: usize) -> usize {
    3usize.pow(n as u32)
}

/// Trit of `index` at `site` in an `n`-qutrit register.
#[inline]
pub fn trit(index: usize, site: usize, n: usize) -> usize {
    (index / 3usize.pow((n - 1 - site) as u32)) % 3
}

/// True when no site of `index` is in the auxiliary level `|2⟩`.
#[inline]
pub fn is_logical_index(mut index: usize, n: usize) -> bool {
    for _ in 0..n {
        if index % 3 == 2 {
            return false;
        }
        index /= 3;
    }
    true
}

/// Maps a logical (binary, big-endian) index to the matching ternary index.
pub fn logical_to_ternary(logical: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, site| 3 * acc + ((logical >> (n - 1 - site)) & 1))
}

/// Ternary indices of the logical subspace, in logical-index order.
pub fn logical_indices(n: usize) -> Vec<usize> {
    (0..1usize << n).map(|l| logical_to_ternary(l, n)).collect()
}

fn check_site(site: usize, n: usize) -> Result<()> {
    if site >= n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    Ok(())
}

/// Pure state of `n` qutrits.
#[derive(Clone, Debug, PartialEq)]
pub struct QutritState {
    n: usize,
    amplitudes: Vec<C64>,
}

impl QutritState {
    pub fn new(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n == 0 || n > MAX_KET_QUTRITS {
            return Err(Error::TooManyQutrits { n, max: MAX_KET_QUTRITS });
        }
        if amplitudes.len() != dim(n) {
            return Err(Error::DimensionMismatch { expected: dim(n), found: amplitudes.len() });
        }
        Ok(Self { n, amplitudes })
    }

    /// Computational basis ket from a string over `{0, 1, 2}`, e.g. `"012"`.
    pub fn basis(ternary: &str) -> Result<Self> {
        let mut index = 0usize;
        for ch in ternary.chars() {
            let t = ch.to_digit(3).ok_or_else(|| Error::InvalidBasisString(ternary.to_owned()))?;
            index = 3 * index + t as usize;
        }
        let n = ternary.chars().count();
        if n == 0 {
            return Err(Error::InvalidBasisString(ternary.to_owned()));
        }
        if n > MAX_KET_QUTRITS {
            return Err(Error::TooManyQutrits { n, max: MAX_KET_QUTRITS });
        }
        let mut amplitudes = vec![ZERO; dim(n)];
        amplitudes[index] = ONE;
        Ok(Self { n, amplitudes })
    }

    /// Embeds `2^n` logical amplitudes (binary big-endian order) into the full space.
    pub fn from_logical(n: usize, logical: &[C64]) -> Result<Self> {
        if logical.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: logical.len() });
        }
        let mut amplitudes = vec![ZERO; dim(n)];
        for (l, &a) in logical.iter().enumerate() {
            amplitudes[logical_to_ternary(l, n)] = a;
        }
        Self::new(n, amplitudes)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm < ALL_LEAKED_TOL || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(self)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.n, other.n);
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies a 3×3 operator to `site`.
    pub fn apply_single_site(&self, op: &ComplexMatrix, site: usize) -> Result<Self> {
        check_site(site, self.n)?;
        if op.rows() != 3 || op.cols() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: op.rows() });
        }
        let stride = 3usize.pow((self.n - 1 - site) as u32);
        let mut out = self.amplitudes.clone();
        for base in (0..self.dim()).filter(|&i| trit(i, site, self.n) == 0) {
            let idx = [base, base + stride, base + 2 * stride];
            let v = idx.map(|i| self.amplitudes[i]);
            for (r, &i) in idx.iter().enumerate() {
                out[i] = op.row(r).iter().zip(&v).map(|(a, b)| a * b).sum();
            }
        }
        Ok(Self { n: self.n, amplitudes: out })
    }

    /// Applies a 9×9 operator to the ordered pair `(site_a, site_b)`; `site_a`
    /// is the more significant factor of `op`.
    pub fn apply_two_site(&self, op: &ComplexMatrix, site_a: usize, site_b: usize) -> Result<Self> {
        check_site(site_a, self.n)?;
        check_site(site_b, self.n)?;
        if site_a == site_b {
            return Err(Error::SiteCollision(site_a));
        }
        if op.rows() != 9 || op.cols() != 9 {
            return Err(Error::DimensionMismatch { expected: 9, found: op.rows() });
        }
        let n = self.n;
        let stride_a = 3usize.pow((n - 1 - site_a) as u32);
        let stride_b = 3usize.pow((n - 1 - site_b) as u32);
        let mut out = self.amplitudes.clone();
        let mut idx = [0usize; 9];
        let mut v = [ZERO; 9];
        for base in (0..self.dim()).filter(|&i| trit(i, site_a, n) == 0 && trit(i, site_b, n) == 0) {
            for ta in 0..3 {
                for tb in 0..3 {
                    let i = base + ta * stride_a + tb * stride_b;
                    idx[3 * ta + tb] = i;
                    v[3 * ta + tb] = self.amplitudes[i];
                }
            }
            for (r, &i) in idx.iter().enumerate() {
                out[i] = op.row(r).iter().zip(&v).map(|(a, b)| a * b).sum();
            }
        }
        Ok(Self { n, amplitudes: out })
    }

    /// `‖P̂|ψ⟩‖²`.
    pub fn retained_probability(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| is_logical_index(*i, self.n))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Probability of finding some site in `|2⟩`, computed directly over the
    /// leaked amplitudes.
    pub fn leak_probability(&self) -> f64 {
        let leaked: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| !is_logical_index(*i, self.n))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        leaked.clamp(0.0, 1.0)
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot { n: self.n, amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect() }
    }

    pub fn from_snapshot(snapshot: &StateSnapshot) -> Result<Self> {
        Self::new(snapshot.n, snapshot.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }
}

/// JSON form of a ket: `{"n": 2, "amplitudes": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

/// `(|0⟩⟨0| + |1⟩⟨1|)^{⊗n}`, diagonal in the ternary basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogicalProjector {
    pub n: usize,
}

impl LogicalProjector {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn rank(&self) -> usize {
        1 << self.n
    }

    pub fn contains(&self, index: usize) -> bool {
        is_logical_index(index, self.n)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..dim(self.n)).map(|i| if self.contains(i) { 1.0 } else { 0.0 }).collect()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let diag: Vec<C64> = self.diagonal().into_iter().map(|d| C64::new(d, 0.0)).collect();
        ComplexMatrix::diagonal(&diag)
    }
}

/// Mixed state of `n` qutrits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn from_matrix(n: usize, matrix: ComplexMatrix) -> Result<Self> {
        if n == 0 || n > MAX_DENSITY_QUTRITS {
            return Err(Error::TooManyQutrits { n, max: MAX_DENSITY_QUTRITS });
        }
        if matrix.rows() != dim(n) || matrix.cols() != dim(n) {
            return Err(Error::DimensionMismatch { expected: dim(n), found: matrix.rows() });
        }
        Ok(Self { n, matrix })
    }

    pub fn from_pure(state: &QutritState) -> Result<Self> {
        let a = state.amplitudes();
        let m = ComplexMatrix::from_fn(a.len(), a.len(), |r, c| a[r] * a[c].conj());
        Self::from_matrix(state.n(), m)
    }

    /// Convex combination `Σ w_i ρ_i`; weights must be nonnegative.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidDistribution("empty mixture".into()))?;
        let n = first.1.n;
        let mut acc = ComplexMatrix::zeros(dim(n), dim(n));
        for &(w, rho) in parts {
            if rho.n != n {
                return Err(Error::DimensionMismatch { expected: n, found: rho.n });
            }
            if w.is_nan() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!("negative weight {w}")));
            }
            acc = &acc + &rho.matrix.scale(C64::new(w, 0.0));
        }
        Self::from_matrix(n, acc)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr(P̂ρP̂)`: sum of the logical diagonal entries.
    pub fn retained_probability(&self) -> f64 {
        (0..self.matrix.rows()).filter(|&i| is_logical_index(i, self.n)).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn leak_probability(&self) -> f64 {
        let leaked: f64 =
            (0..self.matrix.rows()).filter(|&i| !is_logical_index(i, self.n)).map(|i| self.matrix[(i, i)].re).sum();
        leaked.clamp(0.0, 1.0)
    }

    /// `⟨v|ρ|v⟩`.
    pub fn expectation_projector(&self, v: &[C64]) -> f64 {
        let rv = self.matrix.mul_vec(v);
        v.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.matrix.rows();
        let m = DMatrix::from_row_slice(d, d, self.matrix.as_slice());
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Checks Hermiticity and unit trace to 1e-10 and eigenvalues ≥ −1e-9.
    pub fn validate(&self) -> Result<()> {
        let herm = self.matrix.hermiticity_defect();
        if herm > NORM_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(tr));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -1e-9 {
            return Err(Error::InvalidDistribution(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { n: self.n, matrix: self.matrix.scale(C64::new(factor, 0.0)) }
    }
}

/// Projection onto the logical subspace, shared by kets and density matrices.
pub trait LogicalProjection: Sized {
    /// Returns the unnormalized `P̂·ρ·P̂` (or `P̂|ψ⟩`) and the retained probability.
    /// Errors with [`Error::AllLeaked`] when the retained probability is below 1e-15.
    fn project_logical(&self) -> Result<(Self, f64)>;
}

impl LogicalProjection for QutritState {
    fn project_logical(&self) -> Result<(Self, f64)> {
        let n = self.n;
        let amplitudes: Vec<C64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| if is_logical_index(i, n) { a } else { ZERO })
            .collect();
        let retained: f64 = amplitudes.iter().map(C64::norm_sqr).sum();
        if retained < ALL_LEAKED_TOL {
            return Err(Error::AllLeaked { retained });
        }
        Ok((Self { n, amplitudes }, retained))
    }
}

impl LogicalProjection for DensityMatrix {
    fn project_logical(&self) -> Result<(Self, f64)> {
        let n = self.n;
        let d = dim(n);
        let matrix = ComplexMatrix::from_fn(d, d, |r, c| {
            if is_logical_index(r, n) && is_logical_index(c, n) { self.matrix[(r, c)] } else { ZERO }
        });
        let projected = Self { n, matrix };
        let retained = projected.trace();
        if retained < ALL_LEAKED_TOL {
            return Err(Error::AllLeaked { retained });
        }
        Ok((projected, retained))
    }
}

pub fn project_logical<T: LogicalProjection>(obj: &T) -> Result<(T, f64)> {
    obj.project_logical()
}
