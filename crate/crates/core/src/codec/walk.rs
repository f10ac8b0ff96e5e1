use rand::Rng;
use serde::Serialize;

use super::Tessellation;
use crate::error::{Error, Result};
use crate::random;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Walk {
    /// Visited sites, starting with the start site.
    pub path: Vec<usize>,
    /// The goal was not reached within `10 × site count` steps.
    pub truncated: bool,
}

impl Walk {
    pub fn steps(&self) -> usize {
        self.path.len() - 1
    }
}

/// Random walk on the adjacency graph choosing neighbor `j` with weight
/// `exp(−|site_j − goal| / temperature)`; temperature 0 is greedy, with ties
/// broken by the lower site index.
pub fn geodesic_walk(tess: &Tessellation, start: usize, goal: usize, seed: u64, temperature: f64) -> Result<Walk> {
    let n = tess.sites.len();
    if start >= n || goal >= n {
        return Err(Error::validation(format!("site index out of range (sites: {n})")));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::validation("temperature must be >= 0"));
    }
    let neighbors = tess.neighbors();
    let g = tess.sites[goal];
    let dist = |k: usize| {
        let p = tess.sites[k];
        ((p[0] - g[0]).powi(2) + (p[1] - g[1]).powi(2)).sqrt()
    };
    let mut rng = random::stream(seed, 0);
    let mut path = vec![start];
    let mut at = start;
    let cap = 10 * n;
    while at != goal && path.len() <= cap {
        let nb = &neighbors[at];
        if nb.is_empty() {
            break;
        }
        let d: Vec<f64> = nb.iter().map(|&k| dist(k)).collect();
        let best = (0..nb.len())
            .min_by(|&a, &b| d[a].total_cmp(&d[b]).then(nb[a].cmp(&nb[b])))
            .expect("non-empty");
        at = if temperature == 0.0 {
            nb[best]
        } else {
            let w: Vec<f64> = d.iter().map(|x| (-(x - d[best]) / temperature).exp()).collect();
            let total: f64 = w.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut pick = nb.len() - 1;
            for (k, wk) in w.iter().enumerate() {
                if u < *wk {
                    pick = k;
                    break;
                }
                u -= wk;
            }
            nb[pick]
        };
        path.push(at);
    }
    Ok(Walk {
        truncated: at != goal,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode, tessellate, GeometricObject, HitSet};

    fn two_sites() -> Tessellation {
        let h = HitSet {
            points: vec![[0.2, 0.5], [0.8, 0.5]],
            labels: vec![false; 2],
            times: vec![0.0; 2],
            intensity: 2.0,
            seed: 0,
        };
        tessellate(&h).unwrap()
    }

    #[test]
    fn start_is_goal() {
        let w = geodesic_walk(&two_sites(), 1, 1, 0, 0.0).unwrap();
        assert_eq!(w.path, vec![1]);
        assert!(!w.truncated);
    }

    #[test]
    fn two_sites_direct() {
        let w = geodesic_walk(&two_sites(), 0, 1, 0, 0.0).unwrap();
        assert_eq!(w.path, vec![0, 1]);
    }

    #[test]
    fn greedy_reaches_goal_within_site_count() {
        let h = encode(&GeometricObject::square(), 500.0, 3).unwrap();
        let t = tessellate(&h).unwrap();
        let n = t.sites.len();
        for k in 0..20 {
            let (s, g) = ((k * 37) % n, (k * 91 + 5) % n);
            let w = geodesic_walk(&t, s, g, 0, 0.0).unwrap();
            assert!(!w.truncated);
            assert!(w.steps() <= n);
        }
    }

    #[test]
    fn hot_walk_is_seeded_and_reported() {
        let h = encode(&GeometricObject::square(), 200.0, 4).unwrap();
        let t = tessellate(&h).unwrap();
        let a = geodesic_walk(&t, 0, 5, 11, 1.0).unwrap();
        assert_eq!(a, geodesic_walk(&t, 0, 5, 11, 1.0).unwrap());
        assert!(a.truncated || *a.path.last().unwrap() == 5);
        assert!(a.steps() <= 10 * t.sites.len());
    }

    #[test]
    fn bad_arguments() {
        let t = two_sites();
        assert!(geodesic_walk(&t, 0, 2, 0, 0.0).is_err());
        assert!(geodesic_walk(&t, 0, 1, 0, -1.0).is_err());
    }
}
