//! Multi-round encode/decode runs and the four stopping conditions.
//!
//! Round `k` hits the square during the time window `[k, k + 1)`; hits
//! accumulate, and after each round the cumulative set is tessellated,
//! decoded and scored.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{decode, decode_resampled, fidelity, hit_window, tessellate, GeometricObject, HitSet, Tessellation};
use crate::error::{Error, Result};
use crate::random;
use crate::stats::{chi_squared_uniform, runs_test};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityProfile {
    Constant,
    /// Rate rising linearly from 0 to twice the nominal intensity over the
    /// whole run (same expected total).
    Ramp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Expected hits per round.
    pub intensity: f64,
    pub rounds: usize,
    pub seed: u64,
    /// Grid resolution for IoU.
    pub resolution: usize,
    pub profile: IntensityProfile,
    /// Decode on the mosaic of a fresh hit set instead of the encoding set.
    pub resample: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            intensity: 2000.0,
            rounds: 5,
            seed: 0,
            resolution: 2000,
            profile: IntensityProfile::Constant,
            resample: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub hits_added: usize,
    pub total_hits: usize,
    pub iou: f64,
    pub boundary_band_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct CodecRun {
    pub object: GeometricObject,
    pub config: RunConfig,
    pub rounds: Vec<RoundRecord>,
    /// Cumulative hits in arrival order.
    pub hits: HitSet,
    pub tessellation: Tessellation,
    pub reconstruction: GeometricObject,
}

const EDGE_SAMPLES: usize = 8;

/// Area fraction of cells that straddle the object boundary, detected by
/// evaluating the indicator at the site, the vertices, and points along
/// each edge.
pub fn boundary_band_fraction(tess: &Tessellation, obj: &GeometricObject) -> f64 {
    let band: Vec<f64> = tess
        .cells
        .par_iter()
        .map(|c| {
            let first = obj.indicator(c.site[0], c.site[1]);
            let n = c.polygon.len();
            let mixed = (0..n).any(|i| {
                let (a, b) = (c.polygon[i], c.polygon[(i + 1) % n]);
                (0..EDGE_SAMPLES).any(|s| {
                    let t = s as f64 / EDGE_SAMPLES as f64;
                    obj.indicator(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])) != first
                })
            });
            if mixed {
                c.area()
            } else {
                0.0
            }
        })
        .collect();
    crate::stats::compensated_sum(band)
}

/// Runs `config.rounds` encode/decode rounds against `obj`.
pub fn run_codec(obj: &GeometricObject, config: &RunConfig) -> Result<CodecRun> {
    if config.rounds == 0 {
        return Err(Error::validation("rounds must be >= 1"));
    }
    let total_time = config.rounds as f64;
    let mut hits = HitSet {
        points: Vec::new(),
        labels: Vec::new(),
        times: Vec::new(),
        intensity: 0.0,
        seed: config.seed,
    };
    let mut rounds = Vec::with_capacity(config.rounds);
    let mut last = None;
    for k in 0..config.rounds {
        let seed = random::derive_seed(config.seed, 2 * k as u64);
        let batch = match config.profile {
            IntensityProfile::Constant => hit_window(obj, config.intensity, seed, k as f64, |_| 1.0)?,
            IntensityProfile::Ramp => {
                // thinning from the window's peak rate 2λ(k+1)/R
                let peak = 2.0 * config.intensity * (k + 1) as f64 / total_time;
                hit_window(obj, peak, seed, k as f64, |t| t / (k + 1) as f64)?
            }
        };
        let added = batch.len();
        hits.points.extend(batch.points);
        hits.labels.extend(batch.labels);
        hits.times.extend(batch.times);
        hits.intensity = config.intensity * (k + 1) as f64;

        let tess = if config.resample {
            let fresh_seed = random::derive_seed(config.seed, 2 * k as u64 + 1);
            let fresh = hit_window(obj, hits.intensity, fresh_seed, 0.0, |_| 1.0)?;
            tessellate(&fresh)?
        } else {
            tessellate(&hits)?
        };
        let reconstruction = if config.resample {
            decode_resampled(&tess, &hits)?
        } else {
            decode(&tess, &hits)
        };
        rounds.push(RoundRecord {
            round: k,
            hits_added: added,
            total_hits: hits.len(),
            iou: fidelity(obj, &reconstruction, config.resolution)?,
            boundary_band_fraction: boundary_band_fraction(&tess, obj),
        });
        last = Some((tess, reconstruction));
    }
    let (tessellation, reconstruction) = last.expect("at least one round");
    Ok(CodecRun {
        object: obj.clone(),
        config: *config,
        rounds,
        hits,
        tessellation,
        reconstruction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoppingConfig {
    /// Number of equal time slices for the stationarity test.
    pub time_slices: usize,
    pub stationarity_level: f64,
    /// Largest IoU change between the last two rounds counted as settled.
    pub iou_epsilon: f64,
    /// Largest boundary-band area fraction counted as a clean boundary.
    pub band_threshold: f64,
    pub independence_level: f64,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        StoppingConfig {
            time_slices: 10,
            stationarity_level: 0.01,
            iou_epsilon: 0.01,
            band_threshold: 0.05,
            independence_level: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub name: &'static str,
    pub passed: bool,
    pub statistic: f64,
    /// Significance level or threshold the statistic is compared with.
    pub threshold: f64,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingReport {
    pub passed: bool,
    pub conditions: Vec<ConditionReport>,
}

impl StoppingReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Evaluates the four stopping conditions on a completed run:
/// stationarity (chi-squared on hit counts per time slice), settled
/// fidelity (IoU change between the last two rounds), a thin boundary band,
/// and label independence (runs test on labels in arrival order).
pub fn stopping_check(run: &CodecRun, cfg: &StoppingConfig) -> Result<StoppingReport> {
    if run.rounds.len() < 2 {
        return Err(Error::NotEnoughRounds(run.rounds.len()));
    }
    if cfg.time_slices < 2 {
        return Err(Error::validation("time_slices must be >= 2"));
    }
    let span = run.rounds.len() as f64;
    let mut counts = vec![0usize; cfg.time_slices];
    for t in &run.hits.times {
        let k = ((t / span) * cfg.time_slices as f64) as usize;
        counts[k.min(cfg.time_slices - 1)] += 1;
    }
    let stationarity = chi_squared_uniform(&counts, cfg.stationarity_level);

    let n = run.rounds.len();
    let gain = run.rounds[n - 1].iou - run.rounds[n - 2].iou;
    let band = run.rounds[n - 1].boundary_band_fraction;
    let independence = runs_test(&run.hits.labels, cfg.independence_level);

    let conditions = vec![
        ConditionReport {
            name: "stationary",
            passed: stationarity.passed,
            statistic: stationarity.p_value,
            threshold: cfg.stationarity_level,
            note: "chi-squared p-value of hit counts across time slices",
        },
        ConditionReport {
            name: "settled",
            passed: gain.abs() < cfg.iou_epsilon,
            statistic: gain,
            threshold: cfg.iou_epsilon,
            note: "IoU change between the last two rounds",
        },
        ConditionReport {
            name: "boundary_band",
            passed: band < cfg.band_threshold,
            statistic: band,
            threshold: cfg.band_threshold,
            note: "area fraction of cells whose sampled indicator is mixed",
        },
        ConditionReport {
            name: "independent",
            passed: independence.passed,
            statistic: independence.p_value,
            threshold: cfg.independence_level,
            note: "runs-test p-value of labels in arrival order",
        },
    ];
    Ok(StoppingReport {
        passed: conditions.iter().all(|c| c.passed),
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> GeometricObject {
        GeometricObject::disk(0.5, 0.5, 0.25).unwrap()
    }

    fn quick(profile: IntensityProfile, rounds: usize) -> RunConfig {
        RunConfig {
            intensity: 500.0,
            rounds,
            seed: 3,
            resolution: 200,
            profile,
            resample: false,
        }
    }

    #[test]
    fn rounds_accumulate() {
        let run = run_codec(&disk(), &quick(IntensityProfile::Constant, 3)).unwrap();
        assert_eq!(run.rounds.len(), 3);
        let total: usize = run.rounds.iter().map(|r| r.hits_added).sum();
        assert_eq!(total, run.hits.len());
        assert!(run.hits.times.windows(2).all(|w| w[0] <= w[1]));
        assert!(run.hits.times.iter().all(|&t| (0.0..3.0).contains(&t)));
    }

    #[test]
    fn single_round_is_not_enough() {
        let run = run_codec(&disk(), &quick(IntensityProfile::Constant, 1)).unwrap();
        assert!(matches!(
            stopping_check(&run, &StoppingConfig::default()),
            Err(Error::NotEnoughRounds(1))
        ));
    }

    #[test]
    fn ramp_fails_stationarity() {
        let run = run_codec(&disk(), &quick(IntensityProfile::Ramp, 4)).unwrap();
        let report = stopping_check(&run, &StoppingConfig::default()).unwrap();
        assert!(!report.condition("stationary").unwrap().passed);
        assert!(!report.passed);
    }

    #[test]
    fn band_of_square_is_empty() {
        let h = super::super::encode(&GeometricObject::square(), 300.0, 2).unwrap();
        let t = tessellate(&h).unwrap();
        assert_eq!(boundary_band_fraction(&t, &GeometricObject::square()), 0.0);
        let b = boundary_band_fraction(&t, &disk());
        assert!(b > 0.0 && b < 1.0);
    }
}
