use serde::{Deserialize, Serialize};

use super::optimize::{holevo_capacity_from, OptimizerConfig};
use super::{tensor_channel, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::random;

/// Largest joint input dimension the experiment accepts.
pub const MAX_JOINT_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AdditiveWithinTolerance,
    SuperadditiveSignal,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::AdditiveWithinTolerance => "additive_within_tolerance",
            Verdict::SuperadditiveSignal => "superadditive_signal",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Capacities of two channels and of their tensor product, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub chi_1: f64,
    pub chi_2: f64,
    pub chi_joint: f64,
    /// `chi_joint − chi_1 − chi_2`.
    pub defect: f64,
    pub optimizer_tolerance: f64,
    pub verdict: Verdict,
    /// All three optimizations stalled before `max_iters`.
    pub converged: bool,
}

impl AdditivityReport {
    /// Product ensembles are feasible for the joint channel, so a defect
    /// below `−2·tolerance` means the optimizer is broken.
    pub fn floor_respected(&self) -> bool {
        self.defect >= -2.0 * self.optimizer_tolerance
    }
}

fn classify(defect: f64, tolerance: f64, converged: bool) -> Verdict {
    if !converged {
        Verdict::Inconclusive
    } else if defect.abs() <= 3.0 * tolerance {
        Verdict::AdditiveWithinTolerance
    } else if defect > 3.0 * tolerance {
        Verdict::SuperadditiveSignal
    } else {
        Verdict::Inconclusive
    }
}

/// Compares `C(a) + C(b)` with `C(a ⊗ b)`, where the joint optimization
/// ranges over entangled pure inputs of the product space.
///
/// The joint search uses `opt.restarts` random restarts on sub-seeds of
/// `opt.seed`, plus one extra restart seeded with the product of the two
/// single-channel optima.
pub fn additivity_experiment(
    a: &QuantumChannel,
    b: &QuantumChannel,
    opt: &OptimizerConfig,
) -> Result<AdditivityReport> {
    let joint_dim = a.dim_in() * b.dim_in();
    if joint_dim > MAX_JOINT_DIM {
        return Err(Error::validation(format!(
            "joint input dimension {joint_dim} exceeds {MAX_JOINT_DIM}"
        )));
    }
    let opt_for = |k: u64| OptimizerConfig {
        seed: random::derive_seed(opt.seed, k),
        ..*opt
    };
    let ra = holevo_capacity_from(a, &opt_for(0), None)?;
    let rb = holevo_capacity_from(b, &opt_for(1), None)?;

    let joint = tensor_channel(a, b)?;
    let mut warm_states: Vec<CVector> = Vec::with_capacity(ra.states.len() * rb.states.len());
    let mut warm_probs = Vec::with_capacity(warm_states.capacity());
    for (sa, pa) in ra.states.iter().zip(&ra.probs) {
        for (sb, pb) in rb.states.iter().zip(&rb.probs) {
            warm_states.push(sa.kronecker(sb));
            warm_probs.push(pa * pb);
        }
    }
    let joint_opt = OptimizerConfig {
        restarts: opt.restarts + 1,
        ensemble_size: Some(
            opt.ensemble_size
                .unwrap_or(joint_dim * joint_dim)
                .max(warm_states.len()),
        ),
        ..opt_for(2)
    };
    let rj = holevo_capacity_from(&joint, &joint_opt, Some((&warm_states, &warm_probs)))?;

    let defect = rj.value - ra.value - rb.value;
    let converged = ra.converged && rb.converged && rj.converged;
    Ok(AdditivityReport {
        chi_1: ra.value,
        chi_2: rb.value,
        chi_joint: rj.value,
        defect,
        optimizer_tolerance: opt.tolerance,
        verdict: classify(defect, opt.tolerance, converged),
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert_eq!(classify(1e-6, 1e-5, true), Verdict::AdditiveWithinTolerance);
        assert_eq!(classify(-2.9e-5, 1e-5, true), Verdict::AdditiveWithinTolerance);
        assert_eq!(classify(4e-5, 1e-5, true), Verdict::SuperadditiveSignal);
        assert_eq!(classify(-4e-5, 1e-5, true), Verdict::Inconclusive);
        assert_eq!(classify(0.0, 1e-5, false), Verdict::Inconclusive);
    }

    #[test]
    fn rejects_oversized_pairs() {
        let a = crate::channel::random_channel(3, 1, 1).unwrap();
        let b = crate::channel::random_channel(6, 1, 2).unwrap();
        assert!(additivity_experiment(&a, &b, &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn verdict_serializes_snake_case() {
        let s = serde_json::to_string(&Verdict::AdditiveWithinTolerance).unwrap();
        assert_eq!(s, "\"additive_within_tolerance\"");
    }
}
