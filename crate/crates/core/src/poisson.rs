//! Poisson sampling, the operator Poisson semigroup `exp(λt(U − I))`, the
//! spectral measure of a vector, and projection-valued Poisson paths.
//!
//! The semigroup is the compound-Poisson average of powers of `U`:
//!
//! ```text
//! Σ_{n≥0} e^{−λt} (λt)ⁿ/n! · Uⁿ = exp(λt(U − I))
//! ```
//!
//! [`poisson_semigroup`] evaluates the right-hand side through the
//! eigendecomposition of `U`; [`poisson_series`] sums the left-hand side with
//! matrix powers and serves as the independent cross-check.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Exp;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, vnorm, CVector, ComplexMatrix, ONE};
use crate::random;
use crate::spectral::{
    eig_unitary, resolution_of_identity_of, BorelArc, ProjectionOperator, SpectralDecomposition,
    UnitaryOperator,
};
use num_complex::Complex64;

/// Defect below which a trial of the additivity test counts as a pass.
pub const ADDITIVITY_PASS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonConfig {
    pub rate: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl PoissonConfig {
    pub fn new(rate: f64, horizon: f64, seed: u64) -> Result<Self> {
        let cfg = PoissonConfig { rate, horizon, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::validation(format!("rate must be > 0, got {}", self.rate)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::validation(format!(
                "horizon must be > 0, got {}",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Expected number of jumps, `rate × horizon`.
    pub fn mean_count(&self) -> f64 {
        self.rate * self.horizon
    }
}

/// Jump times of one sample path, strictly increasing in `(0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPath {
    pub jump_times: Vec<f64>,
    pub count: usize,
}

fn sample_jumps<R: Rng + ?Sized>(rate: f64, horizon: f64, rng: &mut R) -> Vec<f64> {
    let exp = Exp::new(rate).expect("rate validated");
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        let next = t + exp.sample(rng);
        if next > horizon {
            break;
        }
        // a zero inter-arrival would break strict monotonicity
        if next > t {
            times.push(next);
            t = next;
        }
    }
    times
}

/// Samples a homogeneous Poisson path by exponential inter-arrival times.
/// Uses sub-stream 0 of `cfg.seed`.
pub fn sample_poisson_path(cfg: &PoissonConfig) -> Result<JumpPath> {
    cfg.validate()?;
    let mut rng = random::stream(cfg.seed, 0);
    let jump_times = sample_jumps(cfg.rate, cfg.horizon, &mut rng);
    Ok(JumpPath {
        count: jump_times.len(),
        jump_times,
    })
}

/// `exp(rate·t·(U − I))` evaluated on the eigenbasis of `U`.
pub fn poisson_semigroup(u: &UnitaryOperator, rate: f64, t: f64) -> Result<ComplexMatrix> {
    let dec = eig_unitary(u)?;
    poisson_semigroup_of(&dec, rate, t)
}

pub fn poisson_semigroup_of(dec: &SpectralDecomposition, rate: f64, t: f64) -> Result<ComplexMatrix> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::validation(format!("rate must be > 0, got {rate}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::validation(format!("time must be >= 0, got {t}")));
    }
    let rt = rate * t;
    dec.matrix_function(|z| ((z - ONE) * rt).exp())
}

/// Truncated series `Σ_{n=0}^{terms} e^{−rt}(rt)ⁿ/n! · Uⁿ` using matrix powers.
pub fn poisson_series(u: &UnitaryOperator, rate: f64, t: f64, terms: usize) -> ComplexMatrix {
    let rt = rate * t;
    let n = u.dim();
    let mut power = ComplexMatrix::identity(n);
    let mut weight = (-rt).exp();
    let mut acc = power.scale(Complex64::new(weight, 0.0));
    for k in 1..=terms {
        power = &power * u.matrix();
        weight *= rt / k as f64;
        acc = &acc + &power.scale(Complex64::new(weight, 0.0));
    }
    acc
}

/// Atomic measure on the circle: `(θ, weight)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// `∫ f(e^{iθ}) dμ(θ)`.
    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Complex64 {
        self.atoms
            .iter()
            .map(|&(theta, w)| f(Complex64::from_polar(1.0, theta)) * w)
            .sum()
    }

    /// Mass carried by atoms inside `arc`.
    pub fn mass_of(&self, arc: &BorelArc) -> f64 {
        self.atoms
            .iter()
            .filter(|(theta, _)| arc.contains(*theta))
            .map(|(_, w)| w)
            .sum()
    }
}

/// Spectral measure `μ_h` of `U`: atoms `(θ_k, |⟨v_k, h⟩|²)`, so that
/// `⟨f(U)h, h⟩ = Σ_k f(e^{iθ_k}) · weight_k`.
pub fn spectral_measure(u: &UnitaryOperator, h: &CVector) -> Result<DiscreteMeasure> {
    if h.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: h.len(),
        });
    }
    if vnorm(h) == 0.0 {
        return Err(Error::validation("spectral measure of the zero vector"));
    }
    let dec = eig_unitary(u)?;
    let phases = dec.eigenphases();
    Ok(DiscreteMeasure {
        atoms: (0..dec.dim())
            .map(|k| (phases[k], inner(&dec.eigenvector(k), h).norm_sqr()))
            .collect(),
    })
}

/// Marks each jump of a Poisson path with a partition cell drawn with
/// probability `rank(P_j)/dim`, and emits that cell's projector.
///
/// Jump times use sub-stream 0 of `cfg.seed` (identical to
/// [`sample_poisson_path`]); marks use sub-stream 1.
pub fn projection_poisson_path(
    u: &UnitaryOperator,
    partition: &[BorelArc],
    cfg: &PoissonConfig,
) -> Result<Vec<(f64, ProjectionOperator)>> {
    let dec = eig_unitary(u)?;
    let projectors = resolution_of_identity_of(&dec, partition)?;
    let path = sample_poisson_path(cfg)?;
    if path.count == 0 {
        return Ok(Vec::new());
    }
    let weights: Vec<usize> = projectors.iter().map(|p| p.rank()).collect();
    let picker = WeightedIndex::new(&weights)
        .map_err(|e| Error::Numerical(format!("cell weights: {e}")))?;
    let mut rng = random::stream(cfg.seed, 1);
    Ok(path
        .jump_times
        .into_iter()
        .map(|t| (t, projectors[picker.sample(&mut rng)].clone()))
        .collect())
}

/// Result of [`sigma_additivity_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaAdditivityReport {
    pub trials: usize,
    pub max_defect: f64,
    pub pass_fraction: f64,
    pub defects: Vec<f64>,
}

/// Monte-Carlo certification that the projection-valued measure is additive.
///
/// Trial `i` runs a Poisson path on sub-stream `i + 2` of `cfg.seed` and marks
/// every jump with a partition cell drawn uniformly. The cells hit form the
/// sub-collection. The projector of their union is built directly from
/// eigenphase membership and compared in spectral norm with the sum of the
/// cells' projectors.
pub fn sigma_additivity_test(
    u: &UnitaryOperator,
    partition: &[BorelArc],
    trials: usize,
    cfg: &PoissonConfig,
) -> Result<SigmaAdditivityReport> {
    if trials == 0 {
        return Err(Error::validation("trials must be positive"));
    }
    cfg.validate()?;
    let dec = eig_unitary(u)?;
    let cells = resolution_of_identity_of(&dec, partition)?;
    let phases = dec.eigenphases();
    let dim = dec.dim();

    let defects: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = random::stream(cfg.seed, trial as u64 + 2);
            let jumps = sample_jumps(cfg.rate, cfg.horizon, &mut rng);
            let mut chosen = vec![false; partition.len()];
            for _ in &jumps {
                chosen[rng.random_range(0..partition.len())] = true;
            }
            let mut sum = ComplexMatrix::zeros(dim);
            for (j, p) in cells.iter().enumerate() {
                if chosen[j] {
                    sum = &sum + p.matrix();
                }
            }
            let v = dec.eigenvectors();
            let mut union = ComplexMatrix::zeros(dim);
            for (k, &theta) in phases.iter().enumerate() {
                let inside = partition
                    .iter()
                    .zip(&chosen)
                    .any(|(arc, &c)| c && arc.contains(theta));
                if inside {
                    let col = v.as_inner().column(k).into_owned();
                    union = &union + &ComplexMatrix::outer(&col);
                }
            }
            (&union - &sum).spectral_norm()
        })
        .collect();

    let max_defect = defects.iter().copied().fold(0.0, f64::max);
    let passed = defects.iter().filter(|&&d| d <= ADDITIVITY_PASS).count();
    Ok(SigmaAdditivityReport {
        trials,
        max_defect,
        pass_fraction: passed as f64 / trials as f64,
        defects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn config_validation() {
        assert!(PoissonConfig::new(0.0, 1.0, 1).is_err());
        assert!(PoissonConfig::new(1.0, -1.0, 1).is_err());
        assert!(PoissonConfig::new(1.0, 1.0, 1).is_ok());
    }

    #[test]
    fn path_is_strictly_increasing_within_horizon() {
        let cfg = PoissonConfig::new(50.0, 2.0, 9).unwrap();
        let p = sample_poisson_path(&cfg).unwrap();
        assert_eq!(p.count, p.jump_times.len());
        assert!(p.jump_times.windows(2).all(|w| w[0] < w[1]));
        assert!(p.jump_times.iter().all(|&t| t > 0.0 && t <= 2.0));
    }

    #[test]
    fn vanishing_window_has_no_jumps() {
        let cfg = PoissonConfig::new(1.0, 1e-9, 3).unwrap();
        assert_eq!(sample_poisson_path(&cfg).unwrap().count, 0);
    }

    #[test]
    fn semigroup_trivial_cases() {
        let mut rng = random::stream(2, 0);
        let u = random::haar_unitary(3, &mut rng);
        let p0 = poisson_semigroup(&u, 2.0, 0.0).unwrap();
        assert!(p0.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);

        let id = UnitaryOperator::new(ComplexMatrix::identity(3)).unwrap();
        let p = poisson_semigroup(&id, 4.0, 1.7).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn semigroup_scalar_phase() {
        let theta = 1.1;
        let (rate, t) = (1.5, 0.8);
        let u = UnitaryOperator::from_phases(&[theta]);
        let p = poisson_semigroup(&u, rate, t).unwrap();
        let expect = ((Complex64::from_polar(1.0, theta) - 1.0) * (rate * t)).exp();
        assert!((p.get(0, 0) - expect).norm() < 1e-14);
        let series = poisson_series(&u, rate, t, 40);
        assert!((series.get(0, 0) - expect).norm() < 1e-10);
    }

    #[test]
    fn semigroup_rejects_negative_time() {
        let u = UnitaryOperator::from_phases(&[0.3]);
        assert!(poisson_semigroup(&u, 1.0, -0.1).is_err());
    }

    #[test]
    fn measure_of_eigenvector_is_single_atom() {
        let u = UnitaryOperator::from_phases(&[0.4, 2.0, 5.0]);
        let h = CVector::from_vec(vec![ONE * 0.0, ONE * 2.0, ONE * 0.0]);
        let mu = spectral_measure(&u, &h).unwrap();
        let heavy: Vec<_> = mu.atoms.iter().filter(|(_, w)| *w > 1e-12).collect();
        assert_eq!(heavy.len(), 1);
        assert!((heavy[0].0 - 2.0).abs() < 1e-14);
        assert!((heavy[0].1 - 4.0).abs() < 1e-14);
    }

    #[test]
    fn measure_of_balanced_vector() {
        let u = UnitaryOperator::from_phases(&[3.0 * FRAC_PI_2, FRAC_PI_2]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CVector::from_vec(vec![ONE * s, ONE * s]);
        let mu = spectral_measure(&u, &h).unwrap();
        assert_eq!(mu.atoms.len(), 2);
        let mut atoms = mu.atoms.clone();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!((atoms[0].0 - FRAC_PI_2).abs() < 1e-14 && (atoms[0].1 - 0.5).abs() < 1e-14);
        assert!((atoms[1].0 - 3.0 * FRAC_PI_2).abs() < 1e-14 && (atoms[1].1 - 0.5).abs() < 1e-14);
        assert!((mu.total_mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn measure_rejects_zero_and_mismatch() {
        let u = UnitaryOperator::from_phases(&[0.4, 2.0]);
        assert!(spectral_measure(&u, &CVector::zeros(2)).is_err());
        assert!(matches!(
            spectral_measure(&u, &CVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_cell_path_emits_identity() {
        let mut rng = random::stream(4, 0);
        let u = random::haar_unitary(3, &mut rng);
        let cfg = PoissonConfig::new(20.0, 1.0, 5).unwrap();
        let path = projection_poisson_path(&u, &[BorelArc::full()], &cfg).unwrap();
        assert!(!path.is_empty());
        for (_, p) in &path {
            assert!(p.matrix().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        }
    }

    #[test]
    fn empty_path_when_no_jumps() {
        let u = UnitaryOperator::from_phases(&[0.1, 0.2]);
        let cfg = PoissonConfig::new(1.0, 1e-12, 5).unwrap();
        assert!(projection_poisson_path(&u, &[BorelArc::full()], &cfg).unwrap().is_empty());
    }

    #[test]
    fn single_cell_additivity_is_exact() {
        let mut rng = random::stream(8, 0);
        let u = random::haar_unitary(4, &mut rng);
        let cfg = PoissonConfig::new(3.0, 1.0, 1).unwrap();
        let rep = sigma_additivity_test(&u, &[BorelArc::full()], 50, &cfg).unwrap();
        assert_eq!(rep.max_defect, 0.0);
        assert_eq!(rep.pass_fraction, 1.0);
    }

    #[test]
    fn additivity_report_json_keys() {
        let u = UnitaryOperator::from_phases(&[0.1, PI, 4.0]);
        let cfg = PoissonConfig::new(2.0, 1.0, 3).unwrap();
        let rep = sigma_additivity_test(&u, &BorelArc::equal_partition(4), 5, &cfg).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        for key in ["trials", "max_defect", "pass_fraction", "defects"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["defects"].as_array().unwrap().len(), 5);
    }
}
