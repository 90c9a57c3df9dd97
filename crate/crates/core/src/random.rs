//! Random fixtures: Haar unitaries, logical states, Hermitian matrices and
//! density matrices.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::ComplexMatrix;
use crate::error::Result;
use crate::state::{dim, DensityMatrix, QutritState};

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<C64> {
    (0..len).map(|_| gaussian_complex(rng)).collect()
}

fn normalize(v: &mut [C64]) {
    let norm = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
}

/// Haar-distributed unitary via Gram-Schmidt on a complex Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v = gaussian_vector(d, rng);
        // Two passes of modified Gram-Schmidt keep the columns orthonormal to ~1e-15.
        for _ in 0..2 {
            for q in &cols {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= proj * qi);
            }
        }
        if v.iter().map(C64::norm_sqr).sum::<f64>() < 1e-12 {
            continue;
        }
        normalize(&mut v);
        cols.push(v);
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Uniformly random normalized state supported on the logical subspace.
pub fn logical_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QutritState> {
    let mut v = gaussian_vector(1 << n, rng);
    normalize(&mut v);
    QutritState::from_logical(n, &v)
}

/// Uniformly random normalized state on the full `3^n` space.
pub fn full_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QutritState> {
    let mut v = gaussian_vector(dim(n), rng);
    normalize(&mut v);
    QutritState::new(n, v)
}

/// Random Hermitian `(G + G†)/2` with Gaussian entries.
pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    (&g + &g.adjoint()).scale(C64::new(0.5, 0.0))
}

/// Random mixture of `rank` random pure states drawn by `draw`.
pub fn density_from<R, F>(rank: usize, rng: &mut R, mut draw: F) -> Result<DensityMatrix>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Result<QutritState>,
{
    let weights: Vec<f64> = (0..rank).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let pure: Vec<DensityMatrix> =
        (0..rank).map(|_| draw(rng).and_then(|s| DensityMatrix::from_pure(&s))).collect::<Result<_>>()?;
    let parts: Vec<(f64, &DensityMatrix)> = weights.iter().map(|w| w / total).zip(&pure).collect();
    DensityMatrix::mixture(&parts)
}
