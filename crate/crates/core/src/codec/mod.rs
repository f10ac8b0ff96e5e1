//! Encoding a planar object by Poisson hitting and decoding it from the
//! labeled Voronoi mosaic of the hit points, all on the unit square.

mod object;
mod run;
mod voronoi;
mod walk;

pub use object::{fidelity, Descriptor, GeometricObject};
pub use run::{
    boundary_band_fraction, run_codec, stopping_check, CodecRun, ConditionReport, IntensityProfile, RoundRecord,
    RunConfig, StoppingConfig, StoppingReport,
};
pub use voronoi::{polygon_area, tessellate, Cell, Tessellation};
pub use walk::{geodesic_walk, Walk};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random;

pub type Point = [f64; 2];

/// Hit points on the unit square with their labels and arrival times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitSet {
    pub points: Vec<Point>,
    pub labels: Vec<bool>,
    /// Arrival times, non-decreasing.
    pub times: Vec<f64>,
    pub intensity: f64,
    pub seed: u64,
}

impl HitSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn true_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l).count() as f64 / self.len() as f64
    }

    /// CSV with header `x,y,t,label`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,t,label\n");
        for ((p, t), l) in self.points.iter().zip(&self.times).zip(&self.labels) {
            out.push_str(&format!("{},{},{},{}\n", p[0], p[1], t, u8::from(*l)));
        }
        out
    }
}

fn check_intensity(intensity: f64) -> Result<()> {
    if !(intensity.is_finite() && intensity > 0.0) {
        return Err(Error::validation("intensity must be > 0"));
    }
    Ok(())
}

/// Homogeneous Poisson hitting of the unit square over the time window
/// `[t0, t0 + 1)`, thinned by `accept(t)`.
fn hit_window<F: Fn(f64) -> f64>(
    obj: &GeometricObject,
    intensity: f64,
    seed: u64,
    t0: f64,
    accept: F,
) -> Result<HitSet> {
    check_intensity(intensity)?;
    let mut rng = random::stream(seed, 0);
    let count = Poisson::new(intensity)
        .map_err(|e| Error::validation(format!("intensity: {e}")))?
        .sample(&mut rng) as usize;
    let mut hits: Vec<(f64, Point)> = Vec::with_capacity(count);
    for _ in 0..count {
        let x: f64 = rng.random();
        let y: f64 = rng.random();
        let t = t0 + rng.random::<f64>();
        let keep: f64 = rng.random();
        if keep < accept(t) {
            hits.push((t, [x, y]));
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let labels = hits.iter().map(|(_, p)| obj.indicator(p[0], p[1])).collect();
    Ok(HitSet {
        times: hits.iter().map(|h| h.0).collect(),
        points: hits.iter().map(|h| h.1).collect(),
        labels,
        intensity,
        seed,
    })
}

/// Homogeneous Poisson process of the given intensity on the unit square
/// (arrival times uniform in `[0, 1)`), labeled by `obj`.
pub fn encode(obj: &GeometricObject, intensity: f64, seed: u64) -> Result<HitSet> {
    hit_window(obj, intensity, seed, 0.0, |_| 1.0)
}

/// Labeled Voronoi mosaic of `hits` and its true-labeled union.
pub fn decode(tess: &Tessellation, hits: &HitSet) -> GeometricObject {
    let parts = tess
        .cells
        .iter()
        .filter(|c| hits.labels[c.source])
        .map(|c| c.polygon.clone())
        .collect();
    GeometricObject::disjoint_union(parts)
}

/// Decodes on the mosaic of `sites`, labeling each cell by the nearest hit
/// of the encoding set.
pub fn decode_resampled(sites: &Tessellation, hits: &HitSet) -> Result<GeometricObject> {
    let index = voronoi::PointIndex::new(&hits.points)?;
    let parts = sites
        .cells
        .iter()
        .filter(|c| hits.labels[index.nearest(c.site)])
        .map(|c| c.polygon.clone())
        .collect();
    Ok(GeometricObject::disjoint_union(parts))
}
