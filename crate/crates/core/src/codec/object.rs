use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::voronoi::polygon_area;
use super::Point;
use crate::error::{Error, Result};

/// JSON shape of an object: `{"disk": {"cx": .., "cy": .., "r": ..}}`,
/// `{"polygon": [[x, y], ..]}`, `{"union": [..]}`, `"square"` or `"empty"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Descriptor {
    Empty,
    Square,
    Disk { cx: f64, cy: f64, r: f64 },
    Polygon(Vec<Point>),
    Union(Vec<Descriptor>),
}

const AREA_GRID: usize = 2000;

/// A region of the unit square with a total membership predicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Descriptor", into = "Descriptor")]
pub struct GeometricObject {
    descriptor: Descriptor,
    reference_area: f64,
    index: Option<Arc<BoxIndex>>,
}

impl PartialEq for GeometricObject {
    fn eq(&self, other: &Self) -> bool {
        self.descriptor == other.descriptor && self.reference_area == other.reference_area
    }
}

impl From<GeometricObject> for Descriptor {
    fn from(o: GeometricObject) -> Self {
        o.descriptor
    }
}

impl TryFrom<Descriptor> for GeometricObject {
    type Error = Error;

    fn try_from(d: Descriptor) -> Result<Self> {
        GeometricObject::new(d)
    }
}

fn in_unit_square(p: &Point) -> bool {
    p.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v))
}

fn validate(d: &Descriptor) -> Result<()> {
    match d {
        Descriptor::Empty | Descriptor::Square => Ok(()),
        Descriptor::Disk { cx, cy, r } => {
            if !(r.is_finite() && *r > 0.0) {
                return Err(Error::validation("disk: r must be > 0"));
            }
            if !(in_unit_square(&[cx - r, cy - r]) && in_unit_square(&[cx + r, cy + r])) {
                return Err(Error::validation("disk: must lie inside the unit square"));
            }
            Ok(())
        }
        Descriptor::Polygon(v) => {
            if v.len() < 3 {
                return Err(Error::validation("polygon: needs at least 3 vertices"));
            }
            if let Some(k) = v.iter().position(|p| !in_unit_square(p)) {
                return Err(Error::validation(format!("polygon: vertex {k} outside the unit square")));
            }
            if polygon_area(v) <= 0.0 {
                return Err(Error::validation("polygon: zero area"));
            }
            Ok(())
        }
        Descriptor::Union(parts) => parts.iter().try_for_each(validate),
    }
}

fn bbox(d: &Descriptor) -> [f64; 4] {
    match d {
        Descriptor::Empty => [1.0, 1.0, 0.0, 0.0],
        Descriptor::Square => [0.0, 0.0, 1.0, 1.0],
        Descriptor::Disk { cx, cy, r } => [cx - r, cy - r, cx + r, cy + r],
        Descriptor::Polygon(v) => v.iter().fold([1.0, 1.0, 0.0, 0.0], |b, p| {
            [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])]
        }),
        Descriptor::Union(parts) => parts.iter().map(bbox).fold([1.0, 1.0, 0.0, 0.0], |b, c| {
            [b[0].min(c[0]), b[1].min(c[1]), b[2].max(c[2]), b[3].max(c[3])]
        }),
    }
}

/// Crossing-number test; works for any simple polygon.
fn in_polygon(v: &[Point], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = v.len() - 1;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[j]);
        if (a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn primitive_contains(d: &Descriptor, x: f64, y: f64) -> bool {
    match d {
        Descriptor::Empty => false,
        Descriptor::Square => (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y),
        Descriptor::Disk { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
        Descriptor::Polygon(v) => in_polygon(v, x, y),
        Descriptor::Union(parts) => parts.iter().any(|p| primitive_contains(p, x, y)),
    }
}

/// Bucket grid over part bounding boxes.
#[derive(Debug)]
struct BoxIndex {
    side: usize,
    buckets: Vec<Vec<u32>>,
}

impl BoxIndex {
    fn new(parts: &[Descriptor]) -> Self {
        let side = ((parts.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let mut buckets = vec![Vec::new(); side * side];
        let cell = |v: f64| ((v * side as f64).floor().max(0.0) as usize).min(side - 1);
        for (k, p) in parts.iter().enumerate() {
            let b = bbox(p);
            if b[0] > b[2] {
                continue;
            }
            for gy in cell(b[1])..=cell(b[3]) {
                for gx in cell(b[0])..=cell(b[2]) {
                    buckets[gy * side + gx].push(k as u32);
                }
            }
        }
        BoxIndex { side, buckets }
    }

    fn candidates(&self, x: f64, y: f64) -> &[u32] {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return &[];
        }
        let gx = ((x * self.side as f64) as usize).min(self.side - 1);
        let gy = ((y * self.side as f64) as usize).min(self.side - 1);
        &self.buckets[gy * self.side + gx]
    }
}

impl GeometricObject {
    /// Validates `d`; unions of overlapping parts get a grid-estimated area.
    pub fn new(d: Descriptor) -> Result<Self> {
        validate(&d)?;
        let reference_area = match &d {
            Descriptor::Empty => 0.0,
            Descriptor::Square => 1.0,
            Descriptor::Disk { r, .. } => PI * r * r,
            Descriptor::Polygon(v) => polygon_area(v),
            Descriptor::Union(_) => f64::NAN,
        };
        let mut obj = Self::indexed(d, reference_area);
        if obj.reference_area.is_nan() {
            obj.reference_area = grid_area(&obj, AREA_GRID);
        }
        Ok(obj)
    }

    fn indexed(d: Descriptor, reference_area: f64) -> Self {
        let index = match &d {
            Descriptor::Union(parts) => Some(Arc::new(BoxIndex::new(parts))),
            _ => None,
        };
        GeometricObject {
            descriptor: d,
            reference_area,
            index,
        }
    }

    pub fn empty() -> Self {
        Self::indexed(Descriptor::Empty, 0.0)
    }

    pub fn square() -> Self {
        Self::indexed(Descriptor::Square, 1.0)
    }

    pub fn disk(cx: f64, cy: f64, r: f64) -> Result<Self> {
        Self::new(Descriptor::Disk { cx, cy, r })
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Self::new(Descriptor::Polygon(vertices))
    }

    /// Union of interior-disjoint polygons; the area is the exact sum.
    pub fn disjoint_union(polygons: Vec<Vec<Point>>) -> Self {
        let area = polygons.iter().map(|p| polygon_area(p)).sum();
        let parts = polygons.into_iter().map(Descriptor::Polygon).collect();
        Self::indexed(Descriptor::Union(parts), area)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Descriptor = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: "object".into(),
            message: e.to_string(),
        })?;
        Self::new(d)
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn reference_area(&self) -> f64 {
        self.reference_area
    }

    pub fn indicator(&self, x: f64, y: f64) -> bool {
        match (&self.descriptor, &self.index) {
            (Descriptor::Union(parts), Some(index)) => index
                .candidates(x, y)
                .iter()
                .any(|&k| primitive_contains(&parts[k as usize], x, y)),
            (d, _) => primitive_contains(d, x, y),
        }
    }
}

fn grid_area(obj: &GeometricObject, resolution: usize) -> f64 {
    let h = 1.0 / resolution as f64;
    let count: usize = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let y = (i as f64 + 0.5) * h;
            (0..resolution)
                .filter(|&j| obj.indicator((j as f64 + 0.5) * h, y))
                .count()
        })
        .sum();
    count as f64 * h * h
}

/// Intersection over union on the cell centres of a `resolution²` grid.
/// Two empty objects have IoU 1.
pub fn fidelity(a: &GeometricObject, b: &GeometricObject, resolution: usize) -> Result<f64> {
    if resolution < 100 {
        return Err(Error::validation("resolution must be >= 100"));
    }
    let h = 1.0 / resolution as f64;
    let (inter, union) = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let y = (i as f64 + 0.5) * h;
            let mut inter = 0usize;
            let mut union = 0usize;
            for j in 0..resolution {
                let x = (j as f64 + 0.5) * h;
                let (ia, ib) = (a.indicator(x, y), b.indicator(x, y));
                inter += usize::from(ia && ib);
                union += usize::from(ia || ib);
            }
            (inter, union)
        })
        .reduce(|| (0, 0), |p, q| (p.0 + q.0, p.1 + q.1));
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area_is_closed_form() {
        let d = GeometricObject::disk(0.5, 0.5, 0.25).unwrap();
        assert!((d.reference_area() - 0.19634954084936207).abs() < 1e-12);
    }

    #[test]
    fn polygon_area_and_membership() {
        let p = GeometricObject::polygon(vec![[0.1, 0.1], [0.6, 0.1], [0.6, 0.5], [0.1, 0.5]]).unwrap();
        assert!((p.reference_area() - 0.2).abs() < 1e-12);
        assert!(p.indicator(0.3, 0.3));
        assert!(!p.indicator(0.7, 0.3));
    }

    #[test]
    fn json_descriptors() {
        let d = GeometricObject::from_json(r#"{"disk": {"cx": 0.5, "cy": 0.5, "r": 0.1}}"#).unwrap();
        assert!(d.indicator(0.55, 0.5));
        let p = GeometricObject::from_json(r#"{"polygon": [[0,0],[1,0],[0,1]]}"#).unwrap();
        assert!((p.reference_area() - 0.5).abs() < 1e-12);
        let back: GeometricObject = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(GeometricObject::from_json(r#"{"disk": {"cx": 0.9, "cy": 0.5, "r": 0.2}}"#).is_err());
        assert!(GeometricObject::from_json(r#"{"polygon": [[0,0],[1,0]]}"#).is_err());
        assert!(GeometricObject::from_json(r#"{"blob": 1}"#).is_err());
    }

    #[test]
    fn overlapping_union_area_is_estimated() {
        let u = GeometricObject::new(Descriptor::Union(vec![
            Descriptor::Polygon(vec![[0.0, 0.0], [0.5, 0.0], [0.5, 1.0], [0.0, 1.0]]),
            Descriptor::Polygon(vec![[0.25, 0.0], [0.75, 0.0], [0.75, 1.0], [0.25, 1.0]]),
        ]))
        .unwrap();
        assert!((u.reference_area() - 0.75).abs() < 1e-3);
    }

    #[test]
    fn fidelity_examples() {
        let a = GeometricObject::disk(0.5, 0.5, 0.2).unwrap();
        let b = GeometricObject::disk(0.5, 0.5, 0.1).unwrap();
        assert_eq!(fidelity(&a, &a, 200).unwrap(), 1.0);
        let far = GeometricObject::disk(0.15, 0.15, 0.1).unwrap();
        assert_eq!(fidelity(&b, &far, 200).unwrap(), 0.0);
        let res = 1000;
        assert!((fidelity(&a, &b, res).unwrap() - 0.25).abs() <= 2.0 / res as f64);
        assert!(fidelity(&a, &b, 99).is_err());
    }
}
