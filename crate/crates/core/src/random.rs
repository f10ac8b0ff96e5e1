//! Seeded randomness.
//!
//! All sampling goes through [`Stream`], a ChaCha20 generator. A stream is
//! identified by `(seed, index)`: the seed is expanded with
//! `ChaCha20Rng::seed_from_u64` and the index selects the ChaCha stream
//! (`set_stream`). Parallel trials use one index each, so results do not
//! depend on scheduling. Normal variates use `rand_distr::StandardNormal`
//! (ziggurat).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CVector, ComplexMatrix};
use crate::spectral::{HermitianOperator, UnitaryOperator};

pub type Stream = ChaCha20Rng;

/// Generator for sub-stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed; used when a sub-computation takes a seed rather than a stream.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    stream(seed, index).random()
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Hermitian matrix `(G + G†)/2` rescaled to spectral norm `norm`.
pub fn hermitian<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> HermitianOperator {
    let g = ginibre(dim, dim, rng);
    let h = ComplexMatrix::new((&g + g.adjoint()) * Complex64::new(0.5, 0.0))
        .expect("finite square matrix");
    let s = h.spectral_norm();
    let h = if s > 0.0 {
        h.scale(Complex64::new(norm / s, 0.0))
    } else {
        h
    };
    HermitianOperator::new(symmetrize(h)).expect("hermitian by construction")
}

/// Positive semidefinite matrix `G G†`, scaled to trace `dim`.
pub fn psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = ComplexMatrix::from_raw(m * Complex64::new(dim as f64 / tr, 0.0));
    HermitianOperator::new(symmetrize(m)).expect("hermitian by construction")
}

/// Haar-random isometry with `rows ≥ cols` (QR of a Ginibre matrix with phase fix).
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryOperator {
    UnitaryOperator::new(ComplexMatrix::from_raw(haar_isometry(dim, dim, rng)))
        .expect("haar unitary")
}

/// Uniformly random unit vector.
pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| complex_normal(rng));
    let n = crate::linalg::vnorm(&v);
    v / Complex64::new(n, 0.0)
}

/// Replaces `M` by `(M + M†)/2`, removing roundoff asymmetry.
pub fn symmetrize(m: ComplexMatrix) -> ComplexMatrix {
    let inner = m.into_inner();
    ComplexMatrix::from_raw((&inner + inner.adjoint()) * Complex64::new(0.5, 0.0))
}
