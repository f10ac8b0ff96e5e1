//! Holevo capacity and minimum output entropy by multi-restart local search
//! over pure-state ensembles.
//!
//! Each capacity iteration alternates two monotone moves:
//!
//! * a Blahut-Arimoto update of the probabilities,
//!   `p_i ← p_i · 2^{D(N(ρ_i) ‖ σ)} / Z`, with `σ = Σ p_i N(ρ_i)`;
//! * a projected gradient step on every state vector along
//!   `G_i ψ_i − ⟨ψ_i, G_i ψ_i⟩ ψ_i` with `G_i = N†(log N(ρ_i) − log σ)`,
//!   accepted only if χ increases (backtracking line search).
//!
//! χ is therefore non-decreasing across iterations. Restarts run in parallel
//! on derived RNG streams and the best value wins, ties going to the lowest
//! restart index.

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{entropy_of_spectrum, spectrum, CMat, DensityMatrix, Ensemble, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{inner, vnorm, CVector};
use crate::random;

/// Eigenvalue floor used inside matrix logarithms of gradients.
const LOG_FLOOR: f64 = 1e-14;
const LINE_SEARCH_HALVINGS: usize = 30;
const STALL_LIMIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Number of pure states; `None` means `dim_in²`.
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    /// Target accuracy in bits.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            ensemble_size: None,
            restarts: 16,
            max_iters: 4000,
            tolerance: 1e-5,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::validation("restarts and max_iters must be positive"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::validation("optimizer tolerance must be > 0"));
        }
        if self.ensemble_size == Some(0) {
            return Err(Error::validation("ensemble_size must be positive"));
        }
        Ok(())
    }

    /// An iteration improving χ by less than this counts as stalled.
    fn stall_threshold(&self) -> f64 {
        self.tolerance * 1e-3
    }
}

/// Output of [`holevo_capacity`].
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub value: f64,
    pub ensemble: Ensemble,
    pub states: Vec<CVector>,
    pub probs: Vec<f64>,
    /// False when the best restart hit `max_iters` before stalling.
    pub converged: bool,
    pub iterations: usize,
    /// χ after each iteration of the best restart (non-decreasing).
    pub history: Vec<f64>,
}

/// Output of [`min_output_entropy`].
#[derive(Debug, Clone)]
pub struct MinEntropyResult {
    pub value: f64,
    pub argmin: CVector,
    pub converged: bool,
    pub iterations: usize,
}

fn log2_floor(m: &CMat) -> CMat {
    let eig = SymmetricEigen::new(m.clone());
    let logs: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(LOG_FLOOR).log2()).collect();
    let v = &eig.eigenvectors;
    let scaled = CMat::from_fn(v.nrows(), v.ncols(), |r, k| v[(r, k)] * logs[k]);
    scaled * v.adjoint()
}

fn normalize(v: CVector) -> CVector {
    let n = vnorm(&v);
    v / Complex64::new(n, 0.0)
}

/// Tangent direction `Gψ − ⟨ψ, Gψ⟩ψ`.
fn tangent(g: &CMat, psi: &CVector) -> CVector {
    let gp = g * psi;
    let along = inner(psi, &gp);
    gp - psi * along
}

struct Evaluation {
    chi: f64,
    outputs: Vec<CMat>,
    entropies: Vec<f64>,
    average: CMat,
}

fn evaluate(ch: &QuantumChannel, states: &[CVector], probs: &[f64]) -> Evaluation {
    let outputs: Vec<CMat> = states.iter().map(|s| ch.apply_pure_raw(s)).collect();
    let entropies: Vec<f64> = outputs.iter().map(|o| entropy_of_spectrum(&spectrum(o))).collect();
    let mut average = CMat::zeros(ch.dim_out(), ch.dim_out());
    for (o, &p) in outputs.iter().zip(probs) {
        average += o * Complex64::new(p, 0.0);
    }
    let mean: f64 = entropies.iter().zip(probs).map(|(s, p)| s * p).sum();
    let chi = entropy_of_spectrum(&spectrum(&average)) - mean;
    Evaluation {
        chi,
        outputs,
        entropies,
        average,
    }
}

struct RestartOutcome {
    chi: f64,
    states: Vec<CVector>,
    probs: Vec<f64>,
    converged: bool,
    iterations: usize,
    history: Vec<f64>,
}

fn blahut_arimoto_step(eval: &Evaluation, probs: &[f64]) -> Vec<f64> {
    let log_avg = log2_floor(&eval.average);
    let divergences: Vec<f64> = eval
        .outputs
        .iter()
        .zip(&eval.entropies)
        .map(|(o, s)| -s - (o * &log_avg).trace().re)
        .collect();
    let top = divergences.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut next: Vec<f64> = probs
        .iter()
        .zip(&divergences)
        .map(|(p, d)| p * (d - top).exp2())
        .collect();
    let z: f64 = next.iter().sum();
    for p in &mut next {
        *p /= z;
    }
    next
}

fn capacity_restart(
    ch: &QuantumChannel,
    mut states: Vec<CVector>,
    mut probs: Vec<f64>,
    cfg: &OptimizerConfig,
) -> RestartOutcome {
    let mut eval = evaluate(ch, &states, &probs);
    let mut step = 0.5;
    let mut stall = 0;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let before = eval.chi;

        let next_probs = blahut_arimoto_step(&eval, &probs);
        let trial = evaluate(ch, &states, &next_probs);
        if trial.chi >= eval.chi {
            probs = next_probs;
            eval = trial;
        }

        let log_avg = log2_floor(&eval.average);
        let directions: Vec<CVector> = states
            .iter()
            .zip(&eval.outputs)
            .map(|(psi, out)| {
                let g = ch.adjoint_apply_raw(&(log2_floor(out) - &log_avg));
                tangent(&g, psi)
            })
            .collect();
        let mut accepted = false;
        for _ in 0..LINE_SEARCH_HALVINGS {
            let candidate: Vec<CVector> = states
                .iter()
                .zip(&directions)
                .map(|(psi, d)| normalize(psi + d * Complex64::new(step, 0.0)))
                .collect();
            let trial = evaluate(ch, &candidate, &probs);
            if trial.chi > eval.chi {
                states = candidate;
                eval = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        step = if accepted { (step * 2.0).min(64.0) } else { 0.5 };

        history.push(eval.chi);
        if eval.chi - before < cfg.stall_threshold() {
            stall += 1;
            if stall >= STALL_LIMIT {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }

    RestartOutcome {
        chi: eval.chi.max(0.0),
        states,
        probs,
        converged,
        iterations,
        history,
    }
}

fn pure_ensemble(states: &[CVector], probs: &[f64]) -> Result<Ensemble> {
    let total: f64 = probs.iter().sum();
    let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
    let dms = states
        .iter()
        .map(DensityMatrix::pure)
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(probs, dms)
}

/// Maximizes Holevo χ over pure-state ensembles of `opt.ensemble_size`
/// states (default `dim_in²`). `warm_start`, when given, seeds restart 0.
pub fn holevo_capacity_from(
    ch: &QuantumChannel,
    opt: &OptimizerConfig,
    warm_start: Option<(&[CVector], &[f64])>,
) -> Result<CapacityResult> {
    opt.validate()?;
    let d = ch.dim_in();
    let size = opt.ensemble_size.unwrap_or(d * d);
    if let Some((s, p)) = warm_start {
        if s.len() != p.len() || s.iter().any(|v| v.len() != d) {
            return Err(Error::validation("warm start does not match the channel input"));
        }
    }

    let outcomes: Vec<RestartOutcome> = (0..opt.restarts)
        .into_par_iter()
        .map(|r| {
            let (states, probs) = match (r, warm_start) {
                (0, Some((s, p))) => (s.to_vec(), p.to_vec()),
                _ => {
                    let mut rng = random::stream(opt.seed, r as u64);
                    let states: Vec<CVector> =
                        (0..size).map(|_| random::unit_vector(d, &mut rng)).collect();
                    (states, vec![1.0 / size as f64; size])
                }
            };
            capacity_restart(ch, states, probs, opt)
        })
        .collect();

    let best = outcomes
        .into_iter()
        .reduce(|a, b| if b.chi > a.chi { b } else { a })
        .expect("at least one restart");
    Ok(CapacityResult {
        value: best.chi,
        ensemble: pure_ensemble(&best.states, &best.probs)?,
        states: best.states,
        probs: best.probs,
        converged: best.converged,
        iterations: best.iterations,
        history: best.history,
    })
}

pub fn holevo_capacity(ch: &QuantumChannel, opt: &OptimizerConfig) -> Result<CapacityResult> {
    holevo_capacity_from(ch, opt, None)
}

fn output_entropy(ch: &QuantumChannel, psi: &CVector) -> (f64, CMat) {
    let out = ch.apply_pure_raw(psi);
    (entropy_of_spectrum(&spectrum(&out)), out)
}

fn top_eigenvector(g: &CMat) -> CVector {
    let eig = SymmetricEigen::new(g.clone());
    let k = eig.eigenvalues.imax();
    eig.eigenvectors.column(k).into_owned()
}

/// Minimizes the output entropy over pure inputs.
///
/// Each iteration first tries the maximizer of the linearized objective
/// (top eigenvector of `N†(log N(ψψ†))`), then falls back to a backtracking
/// gradient step. Steps are accepted only if the entropy drops.
pub fn min_output_entropy(ch: &QuantumChannel, opt: &OptimizerConfig) -> Result<MinEntropyResult> {
    opt.validate()?;
    let d = ch.dim_in();
    let outcomes: Vec<MinEntropyResult> = (0..opt.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = random::stream(opt.seed, r as u64);
            let mut psi = random::unit_vector(d, &mut rng);
            let (mut value, mut out) = output_entropy(ch, &psi);
            let mut step = 0.5;
            let mut stall = 0;
            let mut converged = false;
            let mut iterations = 0;
            for it in 0..opt.max_iters {
                iterations = it + 1;
                let before = value;
                let g = ch.adjoint_apply_raw(&log2_floor(&out));

                let jump = top_eigenvector(&g);
                let (jv, jo) = output_entropy(ch, &jump);
                if jv < value {
                    psi = jump;
                    value = jv;
                    out = jo;
                } else {
                    let dir = tangent(&g, &psi);
                    let mut accepted = false;
                    for _ in 0..LINE_SEARCH_HALVINGS {
                        let cand = normalize(&psi + &dir * Complex64::new(step, 0.0));
                        let (cv, co) = output_entropy(ch, &cand);
                        if cv < value {
                            psi = cand;
                            value = cv;
                            out = co;
                            accepted = true;
                            break;
                        }
                        step *= 0.5;
                    }
                    step = if accepted { (step * 2.0).min(64.0) } else { 0.5 };
                }

                // near a pure output the entropy behaves like ε·log(1/ε), so
                // progress is judged relative to the current value there
                if before - value <= opt.stall_threshold() * value.clamp(0.0, 1.0) {
                    stall += 1;
                    if stall >= STALL_LIMIT {
                        converged = true;
                        break;
                    }
                } else {
                    stall = 0;
                }
            }
            MinEntropyResult {
                value: value.max(0.0),
                argmin: psi,
                converged,
                iterations,
            }
        })
        .collect();

    Ok(outcomes
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::holevo_chi;

    fn fast() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 4,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn identity_qubit_capacity_is_one_bit() {
        let r = holevo_capacity(&QuantumChannel::identity(2), &fast()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4, "{}", r.value);
        assert!(r.converged);
    }

    #[test]
    fn completely_depolarizing_capacity_is_zero() {
        let r = holevo_capacity(&QuantumChannel::completely_depolarizing(), &fast()).unwrap();
        assert!(r.value.abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn history_is_monotone() {
        let ch = crate::channel::random_channel(2, 2, 3).unwrap();
        let r = holevo_capacity(&ch, &fast()).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn reported_ensemble_attains_reported_value() {
        let ch = QuantumChannel::amplitude_damping(0.3).unwrap();
        let r = holevo_capacity(&ch, &fast()).unwrap();
        let chi = holevo_chi(&ch, &r.ensemble).unwrap();
        assert!((chi - r.value).abs() < 1e-10);
    }

    #[test]
    fn min_entropy_examples() {
        assert!(min_output_entropy(&QuantumChannel::identity(2), &fast()).unwrap().value < 1e-6);
        let dep = min_output_entropy(&QuantumChannel::completely_depolarizing(), &fast()).unwrap();
        assert!((dep.value - 1.0).abs() < 1e-9);
        let deph = min_output_entropy(&QuantumChannel::dephasing(0.5).unwrap(), &fast()).unwrap();
        assert!(deph.value < 1e-4, "{}", deph.value);
        // the witness is a computational basis state
        let w = &deph.argmin;
        assert!(w[0].norm().max(w[1].norm()) > 1.0 - 1e-4);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = OptimizerConfig {
            restarts: 0,
            ..OptimizerConfig::default()
        };
        assert!(holevo_capacity(&QuantumChannel::identity(2), &bad).is_err());
    }
}
