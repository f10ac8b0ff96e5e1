//! Euler-Maruyama for `dX = −a·X dt + √ω·X dB`, its geometric Brownian
//! motion closed form, convergence studies, and two operator constructions
//! (square root and the diffusion semigroup `exp(−√ω·t·H^{1/2})`).
//!
//! The closed form used as oracle is the Itô solution
//! `X(t) = x0·exp((−a − ω/2)t + √ω·B(t))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::random;
use crate::spectral::{eig_hermitian, HermitianOperator};
use crate::stats::{compensated_sum, mean_var, slope};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SDEConfig {
    pub x0: f64,
    /// Constant drift coefficient `a` (units 1/time).
    pub drift_coeff: f64,
    /// Diffusion coefficient `ω ≥ 0`.
    pub omega: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub seed: u64,
}

impl SDEConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.x0.is_finite() && self.x0 != 0.0) {
            return Err(Error::validation("x0 must be finite and non-zero"));
        }
        if !self.drift_coeff.is_finite() {
            return Err(Error::validation("drift_coeff must be finite"));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::validation("omega must be >= 0"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::validation("t_end must be > 0"));
        }
        if self.n_steps == 0 {
            return Err(Error::validation("n_steps must be >= 1"));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    fn times(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..=self.n_steps)
            .map(|k| if k == self.n_steps { self.t_end } else { k as f64 * dt })
            .collect()
    }
}

/// Uniform time grid, values, and the Brownian increments that drove them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub brownian_increments: Vec<f64>,
}

impl SamplePath {
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("non-empty path")
    }

    /// CSV with header `t,x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x\n");
        for (t, x) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t},{x}\n"));
        }
        out
    }
}

/// `n` increments `ΔB ~ Normal(0, dt)` from stream `(seed, index)`.
fn increments(seed: u64, index: u64, n: usize, dt: f64) -> Vec<f64> {
    let mut rng = random::stream(seed, index);
    let sd = dt.sqrt();
    (0..n).map(|_| sd * random::normal(&mut rng)).collect()
}

/// Brownian increments for `cfg` (stream 0 of `cfg.seed`).
pub fn brownian_increments(cfg: &SDEConfig) -> Vec<f64> {
    increments(cfg.seed, 0, cfg.n_steps, cfg.dt())
}

fn em_integrate<F: Fn(f64) -> f64>(cfg: &SDEConfig, inc: &[f64], drift: F) -> Vec<f64> {
    let dt = cfg.dt();
    let s = cfg.omega.sqrt();
    let mut values = Vec::with_capacity(inc.len() + 1);
    let mut x = cfg.x0;
    values.push(x);
    for (k, db) in inc.iter().enumerate() {
        let t = k as f64 * dt;
        x = x - drift(t) * x * dt + s * x * db;
        values.push(x);
    }
    values
}

/// Euler-Maruyama path with constant drift.
pub fn euler_maruyama(cfg: &SDEConfig) -> Result<SamplePath> {
    euler_maruyama_with(cfg, |_| cfg.drift_coeff)
}

/// Euler-Maruyama path with a time-dependent drift coefficient `a(t)`.
pub fn euler_maruyama_with<F: Fn(f64) -> f64>(cfg: &SDEConfig, drift: F) -> Result<SamplePath> {
    cfg.validate()?;
    let inc = brownian_increments(cfg);
    euler_maruyama_on(cfg, &inc, drift)
}

/// Euler-Maruyama on supplied increments.
pub fn euler_maruyama_on<F: Fn(f64) -> f64>(cfg: &SDEConfig, inc: &[f64], drift: F) -> Result<SamplePath> {
    cfg.validate()?;
    if inc.len() != cfg.n_steps {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_steps,
            actual: inc.len(),
        });
    }
    Ok(SamplePath {
        times: cfg.times(),
        values: em_integrate(cfg, inc, drift),
        brownian_increments: inc.to_vec(),
    })
}

/// Closed-form geometric Brownian motion on the given increments.
pub fn gbm_exact(cfg: &SDEConfig, inc: &[f64]) -> Result<SamplePath> {
    cfg.validate()?;
    if inc.len() != cfg.n_steps {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_steps,
            actual: inc.len(),
        });
    }
    let times = cfg.times();
    let rate = -cfg.drift_coeff - cfg.omega / 2.0;
    let s = cfg.omega.sqrt();
    let mut b = 0.0;
    let mut values = Vec::with_capacity(times.len());
    values.push(cfg.x0);
    for (k, db) in inc.iter().enumerate() {
        b += db;
        values.push(cfg.x0 * (rate * times[k + 1] + s * b).exp());
    }
    Ok(SamplePath {
        times,
        values,
        brownian_increments: inc.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_steps: usize,
    pub dt: f64,
    pub strong_err: f64,
    pub weak_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub strong_order: f64,
    pub weak_order: f64,
    pub paths: usize,
}

impl ConvergenceTable {
    /// CSV with header `dt,strong_err,weak_err`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dt,strong_err,weak_err\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.dt, r.strong_err, r.weak_err));
        }
        out
    }
}

/// Strong and weak errors of Euler-Maruyama against the closed form.
///
/// Path `p` draws increments on the finest grid from stream `p` of
/// `base.seed`; coarser grids sum consecutive blocks, so every grid sees the
/// same Brownian path. The drift is `base.drift_coeff`; `base.n_steps` is
/// ignored.
pub fn convergence_study(base: &SDEConfig, step_counts: &[usize], paths: usize) -> Result<ConvergenceTable> {
    let mut probe = *base;
    probe.n_steps = 1;
    probe.validate()?;
    if step_counts.len() < 2 {
        return Err(Error::validation("need at least two step counts"));
    }
    if step_counts.windows(2).any(|w| w[0] >= w[1]) || step_counts[0] == 0 {
        return Err(Error::validation("step counts must be positive and increasing"));
    }
    let finest = *step_counts.last().expect("non-empty");
    if let Some(bad) = step_counts.iter().find(|&&n| finest % n != 0) {
        return Err(Error::validation(format!("{bad} steps does not divide {finest}")));
    }
    if paths == 0 {
        return Err(Error::validation("paths must be positive"));
    }

    let fine_dt = base.t_end / finest as f64;
    // per path: (|diff|, diff) for each grid
    let per_path: Vec<Vec<(f64, f64)>> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let fine = increments(base.seed, p as u64, finest, fine_dt);
            let b_end: f64 = fine.iter().sum();
            let exact = base.x0
                * ((-base.drift_coeff - base.omega / 2.0) * base.t_end + base.omega.sqrt() * b_end).exp();
            step_counts
                .iter()
                .map(|&n| {
                    let block = finest / n;
                    let coarse: Vec<f64> = fine.chunks(block).map(|c| c.iter().sum()).collect();
                    let cfg = SDEConfig { n_steps: n, ..*base };
                    let em = *em_integrate(&cfg, &coarse, |_| base.drift_coeff).last().expect("path");
                    let d = em - exact;
                    (d.abs(), d)
                })
                .collect()
        })
        .collect();

    let rows: Vec<ConvergenceRow> = step_counts
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let strong = compensated_sum(per_path.iter().map(|r| r[j].0)) / paths as f64;
            let weak = (compensated_sum(per_path.iter().map(|r| r[j].1)) / paths as f64).abs();
            ConvergenceRow {
                n_steps: n,
                dt: base.t_end / n as f64,
                strong_err: strong,
                weak_err: weak,
            }
        })
        .collect();
    let log_dt: Vec<f64> = rows.iter().map(|r| r.dt.ln()).collect();
    let strong: Vec<f64> = rows.iter().map(|r| r.strong_err.ln()).collect();
    let weak: Vec<f64> = rows.iter().map(|r| r.weak_err.ln()).collect();
    Ok(ConvergenceTable {
        strong_order: slope(&log_dt, &strong),
        weak_order: slope(&log_dt, &weak),
        rows,
        paths,
    })
}

/// Ensemble statistics of the closed-form terminal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TerminalMoments {
    pub paths: usize,
    pub mean: f64,
    pub mean_stderr: f64,
    pub second_moment: f64,
    pub second_moment_stderr: f64,
}

/// Terminal value of `gbm_exact` over `paths` independent paths (path `p`
/// uses stream `p` of `cfg.seed`).
pub fn terminal_moments(cfg: &SDEConfig, paths: usize) -> Result<TerminalMoments> {
    cfg.validate()?;
    if paths < 2 {
        return Err(Error::validation("need at least two paths"));
    }
    let terminal: Vec<f64> = (0..paths)
        .into_par_iter()
        .map(|p| {
            let inc = increments(cfg.seed, p as u64, cfg.n_steps, cfg.dt());
            gbm_exact(cfg, &inc).expect("validated").terminal()
        })
        .collect();
    let squares: Vec<f64> = terminal.iter().map(|x| x * x).collect();
    let (m1, v1) = mean_var(&terminal);
    let (m2, v2) = mean_var(&squares);
    let n = paths as f64;
    Ok(TerminalMoments {
        paths,
        mean: m1,
        mean_stderr: (v1 / n).sqrt(),
        second_moment: m2,
        second_moment_stderr: (v2 / n).sqrt(),
    })
}

/// `H^{1/2}` for positive semidefinite `H`; eigenvalues in `[−1e-10, 0)` are clamped.
pub fn sqrt_operator(h: &HermitianOperator) -> Result<HermitianOperator> {
    let dec = eig_hermitian(h)?;
    check_psd(&dec.real_eigenvalues())?;
    let root = dec.matrix_function_real(|l| l.max(0.0).sqrt())?;
    HermitianOperator::new(random::symmetrize(root))
}

fn check_psd(values: &[f64]) -> Result<()> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol::PSD_CLAMP {
        return Err(Error::NotPositiveSemidefinite { eigenvalue: min });
    }
    Ok(())
}

/// `exp(−√ω·t·H^{1/2})` for positive semidefinite `H`.
pub fn diffusion_semigroup(h: &HermitianOperator, omega: f64, t: f64) -> Result<ComplexMatrix> {
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::validation("omega must be >= 0"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::validation("t must be >= 0"));
    }
    let dec = eig_hermitian(h)?;
    check_psd(&dec.real_eigenvalues())?;
    let rate = omega.sqrt() * t;
    dec.matrix_function_real(|l| (-rate * l.max(0.0).sqrt()).exp())
}
