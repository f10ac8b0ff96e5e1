//! Voronoi cells clipped to the unit square, built per site by half-plane
//! clipping against nearby sites until the security radius is exceeded.

use serde::{Deserialize, Serialize};

use super::{HitSet, Point};
use crate::error::{Error, Result};

const DEDUP: f64 = 1e-12;
const DEGENERATE_EDGE: f64 = 1e-12;

/// Shoelace area (absolute value).
pub fn polygon_area(v: &[Point]) -> f64 {
    let n = v.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    twice.abs() / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub site: Point,
    /// Index of the generating point in the hit set.
    pub source: usize,
    /// Counter-clockwise vertices.
    pub polygon: Vec<Point>,
}

impl Cell {
    pub fn area(&self) -> f64 {
        polygon_area(&self.polygon)
    }

    /// Closed convex containment (tolerance `eps` on the edge lines).
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        let n = self.polygon.len();
        (0..n).all(|i| {
            let (a, b) = (self.polygon[i], self.polygon[(i + 1) % n]);
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -eps * len
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tessellation {
    pub sites: Vec<Point>,
    pub cells: Vec<Cell>,
    /// Site pairs `(i, j)`, `i < j`, whose cells share an edge.
    pub adjacency: Vec<(usize, usize)>,
}

impl Tessellation {
    pub fn total_area(&self) -> f64 {
        crate::stats::compensated_sum(self.cells.iter().map(Cell::area))
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.sites.len()];
        for &(i, j) in &self.adjacency {
            out[i].push(j);
            out[j].push(i);
        }
        out
    }

    /// Index of the site whose cell contains `p` (nearest site).
    pub fn locate(&self, p: Point) -> usize {
        PointIndex::new(&self.sites).expect("non-empty").nearest(p)
    }

    /// JSON array of `{"site": .., "polygon": ..}` for plotting.
    pub fn cells_json(&self) -> String {
        serde_json::to_string(&self.cells).expect("plain data")
    }
}

/// Bucket grid over points in the unit square.
pub(crate) struct PointIndex<'a> {
    points: &'a [Point],
    side: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> PointIndex<'a> {
    pub(crate) fn new(points: &'a [Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyHitSet);
        }
        let side = (((points.len() as f64) / 2.0).sqrt().ceil() as usize).clamp(1, 2048);
        let mut buckets = vec![Vec::new(); side * side];
        for (k, p) in points.iter().enumerate() {
            let (gx, gy) = Self::bucket_of(side, *p);
            buckets[gy * side + gx].push(k as u32);
        }
        Ok(PointIndex { points, side, buckets })
    }

    fn bucket_of(side: usize, p: Point) -> (usize, usize) {
        let f = |v: f64| ((v.clamp(0.0, 1.0) * side as f64) as usize).min(side - 1);
        (f(p[0]), f(p[1]))
    }

    fn cell_size(&self) -> f64 {
        1.0 / self.side as f64
    }

    /// Points in buckets at Chebyshev ring `r` around `(gx, gy)`; `false` once the
    /// ring lies entirely outside the grid.
    fn ring(&self, gx: usize, gy: usize, r: usize, out: &mut Vec<usize>) -> bool {
        out.clear();
        let s = self.side as isize;
        let (cx, cy, r) = (gx as isize, gy as isize, r as isize);
        if cx - r < 0 && cy - r < 0 && cx + r >= s && cy + r >= s {
            return false;
        }
        let mut visit = |x: isize, y: isize| {
            if (0..s).contains(&x) && (0..s).contains(&y) {
                out.extend(self.buckets[(y * s + x) as usize].iter().map(|&k| k as usize));
            }
        };
        if r == 0 {
            visit(cx, cy);
            return true;
        }
        for x in cx - r..=cx + r {
            visit(x, cy - r);
            visit(x, cy + r);
        }
        for y in cy - r + 1..cy + r {
            visit(cx - r, y);
            visit(cx + r, y);
        }
        true
    }

    pub(crate) fn nearest(&self, p: Point) -> usize {
        let (gx, gy) = Self::bucket_of(self.side, p);
        let mut best = (f64::INFINITY, usize::MAX);
        let mut buf = Vec::new();
        let mut r = 0;
        while self.ring(gx, gy, r, &mut buf) {
            for &k in &buf {
                let q = self.points[k];
                let d = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
                if d < best.0 || (d == best.0 && k < best.1) {
                    best = (d, k);
                }
            }
            // points beyond ring r are at least r·h away
            let reach = r as f64 * self.cell_size();
            if best.1 != usize::MAX && reach * reach > best.0 {
                break;
            }
            r += 1;
        }
        best.1
    }
}

/// Vertices with the tag of the edge that starts at each vertex:
/// `Some(j)` for a bisector with site `j`, `None` for the square boundary.
type TaggedPolygon = Vec<(Point, Option<usize>)>;

fn push_vertex(out: &mut TaggedPolygon, p: Point, tag: Option<usize>) {
    if let Some(last) = out.last_mut() {
        if (last.0[0] - p[0]).abs() <= DEGENERATE_EDGE && (last.0[1] - p[1]).abs() <= DEGENERATE_EDGE {
            // the edge from `last` would be degenerate
            last.1 = tag;
            return;
        }
    }
    out.push((p, tag));
}

/// Keeps the part of `poly` closer to `s` than to `q`.
fn clip(poly: &TaggedPolygon, s: Point, q: Point, tag: usize) -> TaggedPolygon {
    let m = [(s[0] + q[0]) / 2.0, (s[1] + q[1]) / 2.0];
    let n = [q[0] - s[0], q[1] - s[1]];
    let f = |p: Point| (p[0] - m[0]) * n[0] + (p[1] - m[1]) * n[1];
    let mut out: TaggedPolygon = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let (a, ta) = poly[k];
        let (b, _) = poly[(k + 1) % poly.len()];
        let (fa, fb) = (f(a), f(b));
        let cross = |fa: f64, fb: f64| {
            let t = fa / (fa - fb);
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        };
        match (fa <= 0.0, fb <= 0.0) {
            (true, true) => push_vertex(&mut out, a, ta),
            (true, false) => {
                push_vertex(&mut out, a, ta);
                push_vertex(&mut out, cross(fa, fb), Some(tag));
            }
            (false, true) => push_vertex(&mut out, cross(fa, fb), ta),
            (false, false) => {}
        }
    }
    if out.len() > 1 {
        let (first, last) = (out[0].0, out[out.len() - 1].0);
        if (first[0] - last[0]).abs() <= DEGENERATE_EDGE && (first[1] - last[1]).abs() <= DEGENERATE_EDGE {
            // the closing edge is degenerate; the first vertex keeps its outgoing tag
            out.pop();
        }
    }
    out
}

fn max_radius(poly: &TaggedPolygon, s: Point) -> f64 {
    poly.iter()
        .map(|(p, _)| ((p[0] - s[0]).powi(2) + (p[1] - s[1]).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

fn build_cell(index: &PointIndex, i: usize) -> TaggedPolygon {
    let s = index.points[i];
    let mut poly: TaggedPolygon = vec![([0.0, 0.0], None), ([1.0, 0.0], None), ([1.0, 1.0], None), ([0.0, 1.0], None)];
    let (gx, gy) = PointIndex::bucket_of(index.side, s);
    let mut buf = Vec::new();
    let mut r = 0;
    while index.ring(gx, gy, r, &mut buf) {
        let mut near: Vec<(f64, usize)> = buf
            .iter()
            .filter(|&&k| k != i)
            .map(|&k| {
                let q = index.points[k];
                ((q[0] - s[0]).powi(2) + (q[1] - s[1]).powi(2), k)
            })
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, k) in near {
            poly = clip(&poly, s, index.points[k], k);
        }
        // a site farther than twice the cell radius cannot cut the cell
        if r as f64 * index.cell_size() > 2.0 * max_radius(&poly, s) {
            break;
        }
        r += 1;
    }
    poly
}

/// Voronoi diagram of the hit points clipped to the unit square. Points
/// within 1e-12 of an earlier point are dropped first.
pub fn tessellate(hits: &HitSet) -> Result<Tessellation> {
    if hits.is_empty() {
        return Err(Error::EmptyHitSet);
    }
    let mut order: Vec<usize> = (0..hits.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (hits.points[a], hits.points[b]);
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])).then(a.cmp(&b))
    });
    let mut keep = vec![true; hits.len()];
    for (u, &a) in order.iter().enumerate() {
        if !keep[a] {
            continue;
        }
        for &b in &order[u + 1..] {
            let (p, q) = (hits.points[a], hits.points[b]);
            if q[0] - p[0] > DEDUP {
                break;
            }
            if (q[1] - p[1]).abs() <= DEDUP {
                if b < a {
                    keep[a] = false;
                    break;
                }
                keep[b] = false;
            }
        }
    }
    let sources: Vec<usize> = (0..hits.len()).filter(|&k| keep[k]).collect();
    let sites: Vec<Point> = sources.iter().map(|&k| hits.points[k]).collect();
    let index = PointIndex::new(&sites)?;

    let tagged: Vec<TaggedPolygon> = {
        use rayon::prelude::*;
        (0..sites.len()).into_par_iter().map(|i| build_cell(&index, i)).collect()
    };

    let mut adjacency: Vec<(usize, usize)> = Vec::new();
    for (i, poly) in tagged.iter().enumerate() {
        for &(_, tag) in poly {
            if let Some(j) = tag {
                adjacency.push((i.min(j), i.max(j)));
            }
        }
    }
    adjacency.sort_unstable();
    adjacency.dedup();

    let cells = tagged
        .into_iter()
        .enumerate()
        .map(|(i, poly)| Cell {
            site: sites[i],
            source: sources[i],
            polygon: poly.into_iter().map(|(p, _)| p).collect(),
        })
        .collect();
    Ok(Tessellation {
        sites,
        cells,
        adjacency,
    })
}
