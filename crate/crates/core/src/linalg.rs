//! Dense complex matrices and the JSON matrix file format.

use std::ops::{Add, Mul, Sub};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix with finite entries and `dim ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::validation("matrix must have dim >= 1"));
        }
        if m.nrows() != m.ncols() {
            return Err(Error::validation(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some((idx, _)) = m
            .iter()
            .enumerate()
            .find(|(_, z)| !z.re.is_finite() || !z.im.is_finite())
        {
            let n = m.nrows();
            // nalgebra storage is column-major
            return Err(Error::validation(format!(
                "non-finite entry at row {}, column {}",
                idx % n,
                idx / n
            )));
        }
        Ok(ComplexMatrix(m))
    }

    /// Wraps a matrix known to be square and finite.
    pub(crate) fn from_raw(m: DMatrix<Complex64>) -> Self {
        debug_assert!(m.is_square());
        ComplexMatrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        ComplexMatrix(DMatrix::from_diagonal(&CVector::from_row_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Builds from row-major real and imaginary parts.
    pub fn from_rows(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n {
            return Err(Error::validation(format!(
                "\"im\" has {} rows, \"re\" has {}",
                im.len(),
                n
            )));
        }
        for (r, row) in re.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(format!(
                    "\"re\" row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        for (r, row) in im.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(format!(
                    "\"im\" row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(re[i][j], im[i][j])
        }))
    }

    /// Outer product `v v†`.
    pub fn outer(v: &CVector) -> Self {
        ComplexMatrix(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix(&self.0 * s)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖_max`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖M − M†‖_max`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.0
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix(self.0.kronecker(&other.0))
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(ComplexMatrix)
    }

    pub fn to_file(&self) -> MatrixFile {
        let n = self.dim();
        MatrixFile {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].im).collect()).collect(),
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// On-disk matrix: `{"dim": n, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.re.len() != self.dim {
            return Err(Error::validation(format!(
                "field \"re\" has {} rows but \"dim\" is {}",
                self.re.len(),
                self.dim
            )));
        }
        ComplexMatrix::from_rows(&self.re, &self.im)
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;
    fn try_from(f: MatrixFile) -> Result<Self> {
        f.to_matrix()
    }
}

/// Parses a matrix from JSON text. Error messages carry line/column context.
pub fn matrix_from_json(text: &str, context: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })?;
    file.to_matrix().map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    matrix_from_json(&text, &path.display().to_string())
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&m.to_file()).expect("matrix serializes")
}

/// Euclidean norm of a complex vector.
pub fn vnorm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product `⟨a, b⟩ = a† b`.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_square_and_empty() {
        assert!(ComplexMatrix::new(DMatrix::zeros(2, 3)).is_err());
        assert!(ComplexMatrix::new(DMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn rejects_nan() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        m[(1, 0)] = Complex64::new(f64::NAN, 0.0);
        let err = ComplexMatrix::new(m).unwrap_err().to_string();
        assert!(err.contains("row 1, column 0"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let m = ComplexMatrix::from_rows(
            &[vec![1.0, 2.0], vec![3.0, 4.0]],
            &[vec![0.0, -1.0], vec![1.0, 0.5]],
        )
        .unwrap();
        let back = matrix_from_json(&matrix_to_json(&m), "mem").unwrap();
        assert_eq!(m, back);
        assert_eq!(back.get(0, 1), Complex64::new(2.0, -1.0));
    }

    #[test]
    fn json_errors_name_the_field() {
        let err = matrix_from_json(r#"{"dim": 2, "re": [[1,0],[0,1]]}"#, "h.json")
            .unwrap_err()
            .to_string();
        assert!(err.contains("im"), "{err}");
        assert!(err.contains("h.json"), "{err}");

        let err = matrix_from_json(
            r#"{"dim": 2, "re": [[1,0],[0]], "im": [[0,0],[0,0]]}"#,
            "h.json",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("\"re\" row 1"), "{err}");
    }

    #[test]
    fn kron_dims_and_values() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::from_real_diagonal(&[3.0, 5.0]);
        let k = a.kron(&b);
        assert_eq!(k.dim(), 4);
        assert_eq!(k.get(3, 3), Complex64::new(10.0, 0.0));
        assert_eq!(k.get(1, 1), Complex64::new(5.0, 0.0));
    }
}
