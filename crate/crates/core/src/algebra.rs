//! Dense complex matrices and the two-qutrit generalized Pauli error set.
//!
//! The shift `X|s⟩ = |s+1 mod 3⟩` and clock `Z|s⟩ = ω^s|s⟩` (ω = e^{2πi/3})
//! generate 81 two-qutrit operators `X^{a1}Z^{a2} ⊗ X^{b1}Z^{b2}`. One is the
//! identity; the other 80 are split by which factors carry an `X`, since only
//! `X` moves population out of `span{|0⟩, |1⟩}`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute max-norm tolerance for exact-algebra checks.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Primitive cube root of unity, e^{2πi/3}.
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from row-major data; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch { expected: ncols, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(nrows, ncols, data)
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    /// Kronecker product `self ⊗ other`; `self` indexes the more significant factor.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    pub fn pow(&self, exp: u32) -> Self {
        assert!(self.is_square());
        (0..exp).fold(Self::identity(self.rows), |acc, _| &acc * self)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `‖U†U − I‖_max`, or infinity for non-square input.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_distance(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// `‖A − A†‖_max`, or infinity for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_distance(&self.adjoint())
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..self.rows).map(|r| self.row(r).iter().map(|z| [z.re, z.im]).collect()).collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        let rows: Vec<Vec<C64>> =
            rows.into_iter().map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect()).collect();
        ComplexMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Qutrit shift operator.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_fn(3, 3, |r, c| if r == (c + 1) % 3 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Qutrit clock operator `diag(1, ω, ω²)`.
pub fn pauli_z() -> ComplexMatrix {
    let w = omega();
    ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), w, w * w])
}

/// Single-qutrit factor `X^x · Z^z` (Z acts first on a ket).
pub fn single_qutrit_pauli(x: u8, z: u8) -> ComplexMatrix {
    &pauli_x().pow(x as u32) * &pauli_z().pow(z as u32)
}

/// Exponents `(a1, a2, b1, b2)` of `X^{a1}Z^{a2} ⊗ X^{b1}Z^{b2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[u8; 4]", into = "[u8; 4]")]
pub struct GeneralizedPauliLabel {
    a1: u8,
    a2: u8,
    b1: u8,
    b2: u8,
}

impl GeneralizedPauliLabel {
    pub const IDENTITY: Self = Self { a1: 0, a2: 0, b1: 0, b2: 0 };
    pub const COUNT: usize = 81;

    pub fn new(a1: u8, a2: u8, b1: u8, b2: u8) -> Result<Self> {
        for e in [a1, a2, b1, b2] {
            if e > 2 {
                return Err(Error::InvalidLabel(e));
            }
        }
        Ok(Self { a1, a2, b1, b2 })
    }

    /// All 81 labels in lexicographic `(a1, a2, b1, b2)` order.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..Self::COUNT).map(Self::from_index)
    }

    /// The 80 non-identity labels.
    pub fn errors() -> impl Iterator<Item = Self> {
        Self::all().filter(|l| !l.is_identity())
    }

    /// Inverse of [`index`](Self::index). Panics for `index >= 81`.
    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT);
        let t = |k: u32| ((index / 3usize.pow(k)) % 3) as u8;
        Self { a1: t(3), a2: t(2), b1: t(1), b2: t(0) }
    }

    pub fn index(&self) -> usize {
        27 * self.a1 as usize + 9 * self.a2 as usize + 3 * self.b1 as usize + self.b2 as usize
    }

    pub fn a1(&self) -> u8 {
        self.a1
    }

    pub fn a2(&self) -> u8 {
        self.a2
    }

    pub fn b1(&self) -> u8 {
        self.b1
    }

    pub fn b2(&self) -> u8 {
        self.b2
    }

    pub fn exponents(&self) -> [u8; 4] {
        [self.a1, self.a2, self.b1, self.b2]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// Number of tensor factors containing a nontrivial `X` power.
    pub fn x_factors(&self) -> u32 {
        u32::from(self.a1 != 0) + u32::from(self.b1 != 0)
    }

    /// Number of tensor factors containing a nontrivial `Z` power.
    pub fn z_factors(&self) -> u32 {
        u32::from(self.a2 != 0) + u32::from(self.b2 != 0)
    }
}

impl TryFrom<[u8; 4]> for GeneralizedPauliLabel {
    type Error = Error;

    fn try_from([a1, a2, b1, b2]: [u8; 4]) -> Result<Self> {
        Self::new(a1, a2, b1, b2)
    }
}

impl From<GeneralizedPauliLabel> for [u8; 4] {
    fn from(l: GeneralizedPauliLabel) -> Self {
        l.exponents()
    }
}

impl fmt::Display for GeneralizedPauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X^{}Z^{}⊗X^{}Z^{}", self.a1, self.a2, self.b1, self.b2)
    }
}

/// Classification of a two-qutrit generalized Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorClass {
    Identity,
    /// `X` on both sites.
    S1,
    /// `X` on site a only.
    S2,
    /// `X` on site b only.
    S3,
    /// `Z`-only, excluding the identity.
    S4,
}

impl ErrorClass {
    pub const SUBSETS: [ErrorClass; 4] = [ErrorClass::S1, ErrorClass::S2, ErrorClass::S3, ErrorClass::S4];

    pub fn name(&self) -> &'static str {
        match self {
            ErrorClass::Identity => "Identity",
            ErrorClass::S1 => "S1",
            ErrorClass::S2 => "S2",
            ErrorClass::S3 => "S3",
            ErrorClass::S4 => "S4",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn classify_label(label: GeneralizedPauliLabel) -> ErrorClass {
    match (label.a1 != 0, label.b1 != 0) {
        (true, true) => ErrorClass::S1,
        (true, false) => ErrorClass::S2,
        (false, true) => ErrorClass::S3,
        (false, false) if label.is_identity() => ErrorClass::Identity,
        (false, false) => ErrorClass::S4,
    }
}

/// One of the four error subsets with its member labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorSubset {
    pub tag: ErrorClass,
    pub members: Vec<GeneralizedPauliLabel>,
}

impl ErrorSubset {
    /// Collects the members of `tag`. `Identity` is not an error subset.
    pub fn new(tag: ErrorClass) -> Option<Self> {
        if tag == ErrorClass::Identity {
            return None;
        }
        let members = GeneralizedPauliLabel::all().filter(|&l| classify_label(l) == tag).collect();
        Some(Self { tag, members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `S1..S4` in order.
pub fn error_subsets() -> Vec<ErrorSubset> {
    ErrorClass::SUBSETS.iter().filter_map(|&t| ErrorSubset::new(t)).collect()
}

/// The 9×9 operator `X^{a1}Z^{a2} ⊗ X^{b1}Z^{b2}`; site a is the more significant factor.
pub fn build_error_operator(label: GeneralizedPauliLabel) -> ComplexMatrix {
    single_qutrit_pauli(label.a1, label.a2).kron(&single_qutrit_pauli(label.b1, label.b2))
}
