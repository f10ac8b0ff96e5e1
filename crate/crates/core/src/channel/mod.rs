//! Finite-dimensional quantum channels in Kraus form, von Neumann entropy,
//! Holevo information, and the capacity / minimum-output-entropy optimizers.
//!
//! All information quantities are in bits.

mod additivity;
mod optimize;

pub use additivity::{additivity_experiment, AdditivityReport, Verdict};
pub use optimize::{holevo_capacity, min_output_entropy, CapacityResult, MinEntropyResult, OptimizerConfig};

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CVector, ComplexMatrix, ONE, ZERO};
use crate::random;
use crate::tol;

pub(crate) type CMat = DMatrix<Complex64>;

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let herm = m.hermitian_defect();
        if herm > tol::HERMITIAN {
            return Err(Error::Structure {
                property: "self-adjoint",
                deviation: herm,
                tolerance: tol::HERMITIAN,
            });
        }
        let tr = m.trace();
        if (tr - ONE).norm() > tol::TRACE {
            return Err(Error::Structure {
                property: "unit trace",
                deviation: (tr - ONE).norm(),
                tolerance: tol::TRACE,
            });
        }
        let min = spectrum(m.as_inner()).into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol::PSD_CLAMP {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: min });
        }
        Ok(DensityMatrix(m))
    }

    /// `|ψ⟩⟨ψ|` for a (normalized internally) non-zero vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = crate::linalg::vnorm(psi);
        if n == 0.0 {
            return Err(Error::validation("pure state from the zero vector"));
        }
        let v = psi / Complex64::new(n, 0.0);
        Ok(DensityMatrix(ComplexMatrix::outer(&v)))
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut d = vec![0.0; dim];
        d[k] = 1.0;
        DensityMatrix(ComplexMatrix::from_real_diagonal(&d))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(ComplexMatrix::from_real_diagonal(&vec![1.0 / dim as f64; dim]))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(probs))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(self.0.kron(&other.0))
    }

    /// Random mixed state from a Ginibre matrix (Hilbert-Schmidt measure).
    pub fn random<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = random::ginibre(dim, dim, rng);
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        let m = ComplexMatrix::from_raw(m * Complex64::new(1.0 / tr, 0.0));
        DensityMatrix(random::symmetrize(m))
    }
}

/// Eigenvalues of a Hermitian matrix.
pub(crate) fn spectrum(m: &CMat) -> Vec<f64> {
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// `−Σ λ log₂ λ` with `0 log 0 = 0`; eigenvalues in `[−1e-10, 0)` are clamped.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&l| if l > 0.0 { -l * l.log2() } else { 0.0 })
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&spectrum(rho.matrix().as_inner()))
}

/// Completely positive trace-preserving map `ρ ↦ Σ K_i ρ K_i†`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::validation("channel needs at least one Kraus operator"))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::validation("Kraus operators must be non-empty"));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::validation(format!(
                    "Kraus operator {i} is {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::validation(format!("Kraus operator {i} has non-finite entries")));
            }
        }
        let mut sum = CMat::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let deviation = (sum - CMat::identity(dim_in, dim_in))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation > tol::CPTP {
            return Err(Error::Structure {
                property: "trace preserving",
                deviation,
                tolerance: tol::CPTP,
            });
        }
        Ok(QuantumChannel { dim_in, dim_out, kraus })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn identity(dim: usize) -> Self {
        QuantumChannel {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![CMat::identity(dim, dim)],
        }
    }

    /// Qubit depolarizing channel `ρ ↦ (1 − p)ρ + p·I/2`, `p ∈ [0, 4/3]`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=4.0 / 3.0).contains(&p) {
            return Err(Error::validation(format!("depolarizing parameter {p} outside [0, 4/3]")));
        }
        let [x, y, z] = paulis();
        let id = CMat::identity(2, 2);
        let a = Complex64::new((1.0 - 3.0 * p / 4.0).sqrt(), 0.0);
        let b = Complex64::new((p / 4.0).sqrt(), 0.0);
        Self::new(vec![id * a, x * b, y * b, z * b])
    }

    /// Qubit channel with constant output `I/2`.
    pub fn completely_depolarizing() -> Self {
        Self::depolarizing(1.0).expect("valid parameter")
    }

    /// Qubit dephasing `{√(1−p) I, √p Z}`.
    pub fn dephasing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::validation(format!("dephasing parameter {p} outside [0, 1]")));
        }
        let [_, _, z] = paulis();
        Self::new(vec![
            CMat::identity(2, 2) * Complex64::new((1.0 - p).sqrt(), 0.0),
            z * Complex64::new(p.sqrt(), 0.0),
        ])
    }

    /// Qubit amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::validation(format!("damping parameter {gamma} outside [0, 1]")));
        }
        let k0 = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE * (1.0 - gamma).sqrt()]);
        let k1 = CMat::from_row_slice(2, 2, &[ZERO, ONE * gamma.sqrt(), ZERO, ZERO]);
        Self::new(vec![k0, k1])
    }

    /// `N†(X) = Σ K_i† X K_i`.
    pub(crate) fn adjoint_apply_raw(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * x * k;
        }
        out
    }

    pub(crate) fn apply_raw(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        hermitize(out)
    }

    /// Output on the pure input `ψψ†`.
    pub(crate) fn apply_pure_raw(&self, psi: &CVector) -> CMat {
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            let v = k * psi;
            out += &v * v.adjoint();
        }
        hermitize(out)
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.kraus.iter().map(KrausFile::from_matrix).collect(),
        }
    }
}

fn hermitize(m: CMat) -> CMat {
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn paulis() -> [CMat; 3] {
    let i = Complex64::new(0.0, 1.0);
    [
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMat::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// `Σ K_i ρ K_i†`.
pub fn apply_channel(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim_in {
        return Err(Error::DimensionMismatch {
            expected: ch.dim_in,
            actual: rho.dim(),
        });
    }
    Ok(DensityMatrix(ComplexMatrix::from_raw(
        ch.apply_raw(rho.matrix().as_inner()),
    )))
}

/// Kraus set `{A_i ⊗ B_j}` acting on the product space.
pub fn tensor_channel(a: &QuantumChannel, b: &QuantumChannel) -> Result<QuantumChannel> {
    let kraus = a
        .kraus
        .iter()
        .flat_map(|ka| b.kraus.iter().map(move |kb| ka.kronecker(kb)))
        .collect();
    QuantumChannel::new(kraus)
}

/// Haar-random channel: an isometry `dim → dim·kraus_count` cut into
/// `kraus_count` square blocks. Deterministic in `seed`.
pub fn random_channel(dim: usize, kraus_count: usize, seed: u64) -> Result<QuantumChannel> {
    if dim == 0 || kraus_count == 0 {
        return Err(Error::validation("dim and kraus_count must be positive"));
    }
    let mut rng = random::stream(seed, 0);
    let v = random::haar_isometry(dim * kraus_count, dim, &mut rng);
    let kraus = (0..kraus_count)
        .map(|j| v.rows(j * dim, dim).into_owned())
        .collect();
    QuantumChannel::new(kraus)
}

/// Probability-weighted list of states.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    probs: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.len() != states.len() || probs.is_empty() {
            return Err(Error::validation(format!(
                "ensemble has {} probabilities and {} states",
                probs.len(),
                states.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::validation("ensemble probabilities must be >= 0"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol::PROBABILITY {
            return Err(Error::validation(format!("ensemble probabilities sum to {total}")));
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: s.dim(),
            });
        }
        Ok(Ensemble { probs, states })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Uniform ensemble over the computational basis.
    pub fn computational_basis(dim: usize) -> Self {
        Ensemble {
            probs: vec![1.0 / dim as f64; dim],
            states: (0..dim).map(|k| DensityMatrix::basis(dim, k)).collect(),
        }
    }

    /// Product ensemble `{p_i q_j, ρ_i ⊗ τ_j}`.
    pub fn product(&self, other: &Ensemble) -> Ensemble {
        let mut probs = Vec::with_capacity(self.len() * other.len());
        let mut states = Vec::with_capacity(self.len() * other.len());
        for (p, r) in self.probs.iter().zip(&self.states) {
            for (q, t) in other.probs.iter().zip(&other.states) {
                probs.push(p * q);
                states.push(r.kron(t));
            }
        }
        Ensemble { probs, states }
    }
}

/// Holevo information `S(Σ pᵢ N(ρᵢ)) − Σ pᵢ S(N(ρᵢ))` in bits.
pub fn holevo_chi(ch: &QuantumChannel, ens: &Ensemble) -> Result<f64> {
    if ens.dim() != ch.dim_in {
        return Err(Error::DimensionMismatch {
            expected: ch.dim_in,
            actual: ens.dim(),
        });
    }
    let mut avg = CMat::zeros(ch.dim_out, ch.dim_out);
    let mut mean_entropy = 0.0;
    for (p, s) in ens.probs.iter().zip(&ens.states) {
        let out = ch.apply_raw(s.matrix().as_inner());
        mean_entropy += p * entropy_of_spectrum(&spectrum(&out));
        avg += out * Complex64::new(*p, 0.0);
    }
    Ok((entropy_of_spectrum(&spectrum(&avg)) - mean_entropy).max(0.0))
}

/// JSON channel: `{"dim_in": n, "dim_out": m, "kraus": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<KrausFile>,
}

/// One Kraus operator in the matrix file layout. `dim` may be given when the
/// operator is square; rectangular operators omit it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl KrausFile {
    fn from_matrix(m: &CMat) -> Self {
        let (r, c) = m.shape();
        KrausFile {
            dim: (r == c).then_some(r),
            re: (0..r).map(|i| (0..c).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..r).map(|i| (0..c).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }

    fn to_matrix(&self, index: usize, rows: usize, cols: usize) -> Result<CMat> {
        let bad = |what: String| Error::validation(format!("kraus[{index}]: {what}"));
        if self.re.len() != rows || self.im.len() != rows {
            return Err(bad(format!("expected {rows} rows in \"re\" and \"im\"")));
        }
        if let Some(d) = self.dim {
            if d != rows || d != cols {
                return Err(bad(format!("\"dim\" {d} does not match {rows}x{cols}")));
            }
        }
        for (r, (a, b)) in self.re.iter().zip(&self.im).enumerate() {
            if a.len() != cols || b.len() != cols {
                return Err(bad(format!("row {r} must have {cols} entries")));
            }
        }
        Ok(CMat::from_fn(rows, cols, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let kraus = self
            .kraus
            .iter()
            .enumerate()
            .map(|(i, k)| k.to_matrix(i, self.dim_out, self.dim_in))
            .collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(kraus)
    }
}

pub fn channel_from_json(text: &str, context: &str) -> Result<QuantumChannel> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })?;
    file.to_channel().map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })
}

pub fn read_channel(path: &Path) -> Result<QuantumChannel> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    channel_from_json(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&CVector::from_vec(vec![ONE * s, ONE * s])).unwrap()
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::diagonal(&[0.5, 0.6]).is_err());
        assert!(matches!(
            DensityMatrix::diagonal(&[1.1, -0.1]),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
        // roundoff-sized negatives are accepted
        assert!(DensityMatrix::diagonal(&[1.0 + 5e-11, -5e-11]).is_ok());
    }

    #[test]
    fn identity_channel_is_noop() {
        let rho = plus();
        let out = apply_channel(&QuantumChannel::identity(2), &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn completely_depolarizing_outputs_maximally_mixed() {
        let ch = QuantumChannel::completely_depolarizing();
        for rho in [plus(), DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)] {
            let out = apply_channel(&ch, &rho).unwrap();
            assert!(out.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
        }
    }

    #[test]
    fn dephasing_half_kills_coherence() {
        let out = apply_channel(&QuantumChannel::dephasing(0.5).unwrap(), &plus()).unwrap();
        assert!(out.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let err = apply_channel(&QuantumChannel::identity(2), &DensityMatrix::basis(3, 0));
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 2, actual: 3 })));
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&DensityMatrix::basis(2, 0)).abs() < 1e-15);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)) - 1.0).abs() < 1e-15);
        // h2(1/4) = -(3/4)log2(3/4) - (1/4)log2(1/4)
        let h = -(0.75f64 * 0.75f64.log2()) - 0.25 * 0.25f64.log2();
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-15);
        let s = von_neumann_entropy(&DensityMatrix::diagonal(&[0.75, 0.25]).unwrap());
        assert!((s - h).abs() < 1e-14);
    }

    #[test]
    fn chi_examples() {
        let id = QuantumChannel::identity(2);
        let ens = Ensemble::computational_basis(2);
        assert!((holevo_chi(&id, &ens).unwrap() - 1.0).abs() < 1e-14);

        let single = Ensemble::new(vec![1.0], vec![plus()]).unwrap();
        assert!(holevo_chi(&QuantumChannel::amplitude_damping(0.3).unwrap(), &single).unwrap() < 1e-14);

        let dep = QuantumChannel::completely_depolarizing();
        assert!(holevo_chi(&dep, &ens).unwrap() < 1e-14);
    }

    #[test]
    fn ensemble_validation() {
        assert!(Ensemble::new(vec![0.5, 0.4], vec![plus(), plus()]).is_err());
        assert!(Ensemble::new(vec![1.0], vec![plus(), plus()]).is_err());
        assert!(Ensemble::new(vec![1.5, -0.5], vec![plus(), plus()]).is_err());
    }

    #[test]
    fn kraus_count_one_is_unitary() {
        let ch = random_channel(3, 1, 17).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let k = &ch.kraus()[0];
        let dev = (k * k.adjoint() - CMat::identity(3, 3)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn random_channel_is_deterministic() {
        assert_eq!(random_channel(2, 3, 99).unwrap(), random_channel(2, 3, 99).unwrap());
        assert_ne!(random_channel(2, 3, 99).unwrap(), random_channel(2, 3, 100).unwrap());
    }

    #[test]
    fn tensor_of_identities() {
        let t = tensor_channel(&QuantumChannel::identity(2), &QuantumChannel::identity(2)).unwrap();
        assert_eq!((t.dim_in(), t.dim_out()), (4, 4));
        let rho = DensityMatrix::random(4, &mut random::stream(1, 0));
        assert!(apply_channel(&t, &rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn tensor_with_depolarizing_on_products() {
        let a = QuantumChannel::amplitude_damping(0.4).unwrap();
        let t = tensor_channel(&a, &QuantumChannel::completely_depolarizing()).unwrap();
        let r1 = DensityMatrix::random(2, &mut random::stream(2, 0));
        let r2 = DensityMatrix::random(2, &mut random::stream(3, 0));
        let out = apply_channel(&t, &r1.kron(&r2)).unwrap();
        let expect = apply_channel(&a, &r1).unwrap().kron(&DensityMatrix::maximally_mixed(2));
        assert!(out.matrix().max_abs_diff(expect.matrix()) < 1e-15);
    }

    #[test]
    fn channel_json_round_trip_and_errors() {
        let ch = random_channel(2, 2, 5).unwrap();
        let text = serde_json::to_string(&ch.to_file()).unwrap();
        let back = channel_from_json(&text, "mem").unwrap();
        assert_eq!(back, ch);

        let err = channel_from_json(
            r#"{"dim_in": 2, "dim_out": 2, "kraus": [{"re": [[1,0],[0,1]], "im": [[0,0]]}]}"#,
            "ch.json",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("kraus[0]"), "{err}");

        let not_tp = r#"{"dim_in": 1, "dim_out": 1, "kraus": [{"re": [[2]], "im": [[0]]}]}"#;
        assert!(channel_from_json(not_tp, "x").is_err());
    }

    #[test]
    fn rectangular_kraus_from_json() {
        // trace map from a qubit onto a one-dimensional output
        let text = r#"{"dim_in": 2, "dim_out": 1, "kraus": [
            {"re": [[1, 0]], "im": [[0, 0]]}, {"re": [[0, 1]], "im": [[0, 0]]}]}"#;
        let ch = channel_from_json(text, "trace.json").unwrap();
        let out = apply_channel(&ch, &plus()).unwrap();
        assert_eq!(out.dim(), 1);
        assert!((out.matrix().get(0, 0) - ONE).norm() < 1e-15);
    }
}
