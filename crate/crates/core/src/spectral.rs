//! Hermitian and unitary operators, their spectral decompositions, the
//! Cayley transform between them, and projection-valued measures on arcs of
//! the unit circle.
//!
//! Only atomic spectral measures exist at finite dimension: the projector
//! attached to an arc is the sum of the eigenprojectors whose eigenphases
//! fall in it.

use std::f64::consts::TAU;

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CVector, ComplexMatrix, I, ONE, ZERO};
use crate::random::symmetrize;
use crate::tol;

const EIGEN_MAX_ITERS: usize = 10_000;

/// Self-adjoint matrix (`‖M − M†‖_max ≤ 1e-12`).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let deviation = m.hermitian_defect();
        if deviation > tol::HERMITIAN {
            return Err(Error::Structure {
                property: "self-adjoint",
                deviation,
                tolerance: tol::HERMITIAN,
            });
        }
        Ok(HermitianOperator(m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        HermitianOperator(ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

/// Unitary matrix (`‖U†U − I‖_max ≤ 1e-10`).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator(ComplexMatrix);

impl UnitaryOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let deviation = unitarity_defect(&m);
        if deviation > tol::UNITARY {
            return Err(Error::Structure {
                property: "unitary",
                deviation,
                tolerance: tol::UNITARY,
            });
        }
        Ok(UnitaryOperator(m))
    }

    /// Diagonal unitary `diag(e^{iθ_k})`.
    pub fn from_phases(phases: &[f64]) -> Self {
        let d: Vec<Complex64> = phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        UnitaryOperator(ComplexMatrix::from_diagonal(&d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

/// `‖U†U − I‖_max`.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    (&m.adjoint() * m).max_abs_diff(&ComplexMatrix::identity(m.dim()))
}

/// Orthogonal projector: idempotent to 1e-10 and self-adjoint to 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOperator(ComplexMatrix);

impl ProjectionOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let sa = m.hermitian_defect();
        if sa > tol::HERMITIAN {
            return Err(Error::Structure {
                property: "self-adjoint",
                deviation: sa,
                tolerance: tol::HERMITIAN,
            });
        }
        let idem = idempotence_defect(&m);
        if idem > tol::IDEMPOTENT {
            return Err(Error::Structure {
                property: "idempotent",
                deviation: idem,
                tolerance: tol::IDEMPOTENT,
            });
        }
        Ok(ProjectionOperator(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.0.trace().re.round().max(0.0) as usize
    }
}

/// `‖P² − P‖_max`.
pub fn idempotence_defect(m: &ComplexMatrix) -> f64 {
    (m * m).max_abs_diff(m)
}

/// Eigenvalues with an orthonormal eigenbasis (columns of `eigenvectors`).
///
/// For Hermitian input the eigenvalues are real and sorted ascending. For
/// unitary input they lie on the unit circle and are sorted by eigenphase in
/// `[0, 2π)`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<Complex64>,
    eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Real parts of the eigenvalues (the spectrum of a Hermitian operator).
    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// Arguments of the eigenvalues mapped into `[0, 2π)`.
    pub fn eigenphases(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| eigenphase(*z)).collect()
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.as_inner().column(k).into_owned()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(λ)) V†`. A non-finite value of `f` is a domain error.
    pub fn matrix_function<F>(&self, f: F) -> Result<ComplexMatrix>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let mut values = Vec::with_capacity(self.dim());
        for &lam in &self.eigenvalues {
            let v = f(lam);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Domain { value: lam.re });
            }
            values.push(v);
        }
        let v = self.eigenvectors.as_inner();
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, k| v[(r, k)] * values[k]);
        Ok(ComplexMatrix::from_raw(scaled * v.adjoint()))
    }

    /// Real-valued function of a Hermitian spectrum.
    pub fn matrix_function_real<F>(&self, f: F) -> Result<ComplexMatrix>
    where
        F: Fn(f64) -> f64,
    {
        self.matrix_function(|z| Complex64::new(f(z.re), 0.0))
    }

    /// `‖V†V − I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        unitarity_defect(&self.eigenvectors)
    }

    /// `‖V diag(λ) V† − M‖_max`.
    pub fn reconstruction_defect(&self, m: &ComplexMatrix) -> f64 {
        self.matrix_function(|z| z)
            .map(|r| r.max_abs_diff(m))
            .unwrap_or(f64::INFINITY)
    }
}

/// `arg z` mapped into `[0, 2π)`; phases within the snap tolerance of 2π become 0.
pub fn eigenphase(z: Complex64) -> f64 {
    let mut t = z.im.atan2(z.re);
    if t < 0.0 {
        t += TAU;
    }
    if TAU - t < tol::ARC_SNAP || t >= TAU {
        t = 0.0;
    }
    t
}

fn off_diagonal_norm(m: &DMatrix<Complex64>) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Modified Gram-Schmidt (two passes) over columns `cols` of `v`.
fn reorthogonalize(v: &mut DMatrix<Complex64>, cols: std::ops::Range<usize>) {
    for _pass in 0..2 {
        for k in cols.clone() {
            for j in cols.start..k {
                let proj: Complex64 = (0..v.nrows()).map(|r| v[(r, j)].conj() * v[(r, k)]).sum();
                for r in 0..v.nrows() {
                    let vj = v[(r, j)];
                    v[(r, k)] -= proj * vj;
                }
            }
            let n = v.column(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 0.0 {
                for r in 0..v.nrows() {
                    v[(r, k)] /= n;
                }
            }
        }
    }
}

/// Groups consecutive sorted keys closer than `gap` and re-orthogonalizes each group.
fn reorthogonalize_clusters(v: &mut DMatrix<Complex64>, keys: &[f64], gap: f64) {
    let mut start = 0;
    for k in 1..=keys.len() {
        if k == keys.len() || (keys[k] - keys[k - 1]).abs() > gap {
            if k - start > 1 {
                reorthogonalize(v, start..k);
            }
            start = k;
        }
    }
}

fn check_decomposition(dec: &SpectralDecomposition, m: &ComplexMatrix) -> Result<()> {
    let orth = dec.orthonormality_defect();
    let rec = dec.reconstruction_defect(m);
    let scale = m.max_abs().max(1.0);
    if orth > tol::ORTHONORMAL || rec > tol::RECONSTRUCTION * scale {
        return Err(Error::EigenNonConvergence {
            residual: orth.max(rec),
        });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let m = h.matrix().as_inner().clone();
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITERS).ok_or(
        Error::EigenNonConvergence {
            residual: off_diagonal_norm(&m),
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let gap = 1e-9 * values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    reorthogonalize_clusters(&mut vectors, &values, gap);
    let dec = SpectralDecomposition {
        eigenvalues: values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        eigenvectors: ComplexMatrix::from_raw(vectors),
    };
    check_decomposition(&dec, h.matrix())?;
    Ok(dec)
}

/// Eigendecomposition of a unitary operator via its complex Schur form
/// (diagonal for normal matrices), eigenphases ascending in `[0, 2π)`.
pub fn eig_unitary(u: &UnitaryOperator) -> Result<SpectralDecomposition> {
    let m = u.matrix().as_inner().clone();
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITERS).ok_or(
        Error::EigenNonConvergence {
            residual: off_diagonal_norm(&m),
        },
    )?;
    let (q, t) = schur.unpack();
    let residual = off_diagonal_norm(&t);
    if residual > tol::RECONSTRUCTION {
        return Err(Error::EigenNonConvergence { residual });
    }
    let raw: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let phases: Vec<f64> = raw.iter().map(|&z| eigenphase(z)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
    let sorted_phases: Vec<f64> = order.iter().map(|&k| phases[k]).collect();
    let mut vectors = DMatrix::from_fn(n, n, |r, c| q[(r, order[c])]);
    reorthogonalize_clusters(&mut vectors, &sorted_phases, 1e-9);
    let dec = SpectralDecomposition {
        eigenvalues: order.iter().map(|&k| raw[k]).collect(),
        eigenvectors: ComplexMatrix::from_raw(vectors),
    };
    check_decomposition(&dec, u.matrix())?;
    Ok(dec)
}

/// Cayley transform `U = (H − iI)(H + iI)⁻¹`.
///
/// The two factors commute, so `U` is obtained from one LU solve of
/// `(H + iI) U = (H − iI)`.
pub fn cayley_transform(h: &HermitianOperator) -> Result<UnitaryOperator> {
    let n = h.dim();
    let hm = h.matrix().as_inner();
    let shift = DMatrix::<Complex64>::identity(n, n) * I;
    let plus = hm + &shift;
    let minus = hm - &shift;
    let u = plus
        .lu()
        .solve(&minus)
        .ok_or_else(|| Error::Numerical("H + iI is numerically singular".into()))?;
    let u = ComplexMatrix::new(u)
        .map_err(|_| Error::Numerical("Cayley solve produced non-finite entries".into()))?;
    let deviation = unitarity_defect(&u);
    if deviation > tol::UNITARY {
        return Err(Error::Numerical(format!(
            "Cayley transform lost unitarity (defect {deviation:e}); H is too ill-conditioned"
        )));
    }
    Ok(UnitaryOperator(u))
}

/// Inverse Cayley transform `H = i(I + U)(I − U)⁻¹`.
pub fn inverse_cayley(u: &UnitaryOperator) -> Result<HermitianOperator> {
    let dec = eig_unitary(u)?;
    // −1 is the contractual singular point; +1 is where I − U is singular
    let distance = dec
        .eigenvalues()
        .iter()
        .map(|z| (z + ONE).norm().min((z - ONE).norm()))
        .fold(f64::INFINITY, f64::min);
    if distance < tol::CAYLEY_SINGULAR {
        return Err(Error::SingularPoint { distance });
    }
    let n = u.dim();
    let um = u.matrix().as_inner();
    let id = DMatrix::<Complex64>::identity(n, n);
    let h = (&id - um)
        .lu()
        .solve(&(&id + um))
        .ok_or_else(|| Error::Numerical("I − U is numerically singular".into()))?
        * I;
    let h = ComplexMatrix::new(h)
        .map_err(|_| Error::Numerical("inverse Cayley produced non-finite entries".into()))?;
    Ok(HermitianOperator(symmetrize(h)))
}

/// Half-open arc `[lo, hi)` of eigenphases, `0 ≤ lo < hi ≤ 2π`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BorelArc {
    lo: f64,
    hi: f64,
}

impl BorelArc {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= TAU) {
            return Err(Error::validation(format!(
                "arc [{lo}, {hi}) must satisfy 0 <= lo < hi <= 2pi"
            )));
        }
        Ok(BorelArc { lo, hi })
    }

    pub fn full() -> Self {
        BorelArc { lo: 0.0, hi: TAU }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Membership under the half-open convention, after snapping `theta`
    /// onto an endpoint closer than 1e-12.
    pub fn contains(&self, theta: f64) -> bool {
        let t = snap(theta, self.lo, self.hi);
        self.lo <= t && t < self.hi
    }

    /// `k` equal arcs covering `[0, 2π)`.
    pub fn equal_partition(k: usize) -> Vec<BorelArc> {
        assert!(k >= 1);
        (0..k)
            .map(|j| BorelArc {
                lo: TAU * j as f64 / k as f64,
                hi: if j + 1 == k { TAU } else { TAU * (j + 1) as f64 / k as f64 },
            })
            .collect()
    }

    /// Partition from sorted interior cut points in `(0, 2π)`.
    pub fn partition_from_cuts(cuts: &[f64]) -> Result<Vec<BorelArc>> {
        let mut bounds = Vec::with_capacity(cuts.len() + 2);
        bounds.push(0.0);
        bounds.extend_from_slice(cuts);
        bounds.push(TAU);
        bounds.windows(2).map(|w| BorelArc::new(w[0], w[1])).collect()
    }
}

fn snap(theta: f64, lo: f64, hi: f64) -> f64 {
    if (theta - lo).abs() < tol::ARC_SNAP {
        lo
    } else if (theta - hi).abs() < tol::ARC_SNAP {
        hi
    } else {
        theta
    }
}

/// Checks that `arcs` tile `[0, 2π)` and returns their indices sorted by `lo`.
pub fn validate_partition(arcs: &[BorelArc]) -> Result<Vec<usize>> {
    if arcs.is_empty() {
        return Err(Error::Partition("partition has no arcs".into()));
    }
    let mut order: Vec<usize> = (0..arcs.len()).collect();
    order.sort_by(|&a, &b| arcs[a].lo.total_cmp(&arcs[b].lo));
    let first = arcs[order[0]];
    if first.lo > tol::ARC_SNAP {
        return Err(Error::Partition(format!(
            "arc {} starts at {} so [0, {}) is not covered",
            order[0], first.lo, first.lo
        )));
    }
    for w in order.windows(2) {
        let (a, b) = (arcs[w[0]], arcs[w[1]]);
        let gap = b.lo - a.hi;
        if gap > tol::ARC_SNAP {
            return Err(Error::Partition(format!(
                "gap between arc {} (ends {}) and arc {} (starts {})",
                w[0], a.hi, w[1], b.lo
            )));
        }
        if gap < -tol::ARC_SNAP {
            return Err(Error::Partition(format!(
                "arcs {} and {} overlap on [{}, {})",
                w[0], w[1], b.lo, a.hi
            )));
        }
    }
    let last = arcs[*order.last().expect("non-empty")];
    if TAU - last.hi > tol::ARC_SNAP {
        return Err(Error::Partition(format!(
            "arc {} ends at {} so [{}, 2pi) is not covered",
            order.last().unwrap(),
            last.hi,
            last.hi
        )));
    }
    Ok(order)
}

/// Index (into `arcs`) of the cell holding `theta`; `order` comes from
/// [`validate_partition`]. Every phase in `[0, 2π)` lands in exactly one cell.
pub(crate) fn locate(theta: f64, arcs: &[BorelArc], order: &[usize]) -> usize {
    for (pos, &idx) in order.iter().enumerate().rev() {
        let lo = if pos == 0 { 0.0 } else { arcs[idx].lo };
        if snap(theta, lo, f64::INFINITY) >= lo {
            return idx;
        }
    }
    order[0]
}

fn projector_from_members(dec: &SpectralDecomposition, members: impl Iterator<Item = usize>) -> ProjectionOperator {
    let n = dec.dim();
    let v = dec.eigenvectors().as_inner();
    let mut p = DMatrix::<Complex64>::from_element(n, n, ZERO);
    for k in members {
        let col = v.column(k);
        p += &col * col.adjoint();
    }
    ProjectionOperator(symmetrize(ComplexMatrix::from_raw(p)))
}

/// Projector onto the eigenvectors of `dec` whose eigenphases lie in `arc`.
pub fn spectral_projector_of(dec: &SpectralDecomposition, arc: &BorelArc) -> ProjectionOperator {
    let phases = dec.eigenphases();
    projector_from_members(dec, (0..dec.dim()).filter(|&k| arc.contains(phases[k])))
}

/// Spectral projector `E(arc)` of `U`.
pub fn spectral_projector(u: &UnitaryOperator, arc: &BorelArc) -> Result<ProjectionOperator> {
    let dec = eig_unitary(u)?;
    Ok(spectral_projector_of(&dec, arc))
}

/// One projector per arc of a partition of `[0, 2π)`.
pub fn resolution_of_identity_of(
    dec: &SpectralDecomposition,
    partition: &[BorelArc],
) -> Result<Vec<ProjectionOperator>> {
    let order = validate_partition(partition)?;
    let phases = dec.eigenphases();
    let cell: Vec<usize> = phases.iter().map(|&t| locate(t, partition, &order)).collect();
    Ok((0..partition.len())
        .map(|j| projector_from_members(dec, (0..dec.dim()).filter(|&k| cell[k] == j)))
        .collect())
}

pub fn resolution_of_identity(
    u: &UnitaryOperator,
    partition: &[BorelArc],
) -> Result<Vec<ProjectionOperator>> {
    let dec = eig_unitary(u)?;
    resolution_of_identity_of(&dec, partition)
}

/// `f(M)` through a precomputed spectral decomposition.
pub fn matrix_function<F>(dec: &SpectralDecomposition, f: F) -> Result<ComplexMatrix>
where
    F: Fn(Complex64) -> Complex64,
{
    dec.matrix_function(f)
}
