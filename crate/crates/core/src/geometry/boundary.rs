//! Extreme-point catalogues and quasi-uniform boundary samples.

use super::Domain;
use crate::sampling::{halton_points, sphere_points};
use crate::{Error, Result};

/// Largest simplex union handled by the facet-grid boundary sampler.
pub const SIMPLEX_CAP: usize = 4096;

const BISECTION_STEPS: usize = 80;

/// Boundary points: catalogue candidates (vertices, axis points, sharp
/// points) and a quasi-uniform sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub catalogue: Vec<Vec<f64>>,
    pub sample: Vec<Vec<f64>>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.catalogue.len() + self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.catalogue.iter().chain(&self.sample)
    }
}

impl Domain {
    /// Catalogue candidates plus `resolution` radially projected boundary
    /// points.
    pub fn boundary_candidates(&self, resolution: usize) -> Result<CandidateSet> {
        if resolution < 8 {
            return Err(Error::OutOfRange(format!(
                "resolution must be at least 8, got {resolution}"
            )));
        }
        if let Domain::SimplexUnion { simplices, .. } = self {
            if simplices.len() > SIMPLEX_CAP {
                return Err(Error::Unsupported(format!(
                    "boundary sampling of a union of {} simplices (cap {SIMPLEX_CAP})",
                    simplices.len()
                )));
            }
        }
        let catalogue = self.catalogue_points(resolution);
        let sample = match self {
            Domain::SimplexUnion { simplices, .. } => self.facet_grid(simplices, resolution),
            _ => {
                let c = self.center();
                sphere_points(self.dim(), resolution)
                    .iter()
                    .map(|u| self.radial_boundary(&c, u))
                    .collect()
            }
        };
        Ok(CandidateSet { catalogue, sample })
    }

    fn catalogue_points(&self, resolution: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let axis = |i: usize, s: f64| {
            let mut v = vec![0.0; d];
            v[i] = s;
            v
        };
        match self {
            Domain::Interval { a, b } => vec![vec![*a], vec![*b]],
            Domain::Cube { .. } => cube_vertices(d),
            Domain::BallP { p, .. } if p.is_infinite() => cube_vertices(d),
            Domain::BallP { .. } => (0..d).flat_map(|i| [axis(i, 1.0), axis(i, -1.0)]).collect(),
            Domain::Simplex { vertices } => vertices.clone(),
            Domain::SimplexUnion { simplices, .. } => {
                let mut out: Vec<Vec<f64>> = Vec::new();
                for v in simplices.iter().flatten() {
                    if !out.iter().any(|w| w == v) && self.is_boundary_point(v) {
                        out.push(v.clone());
                    }
                }
                out
            }
            Domain::HalfBall { .. } => {
                // (1,0,...,0) first: the sharp equator point
                let mut out = vec![axis(0, 1.0)];
                if d == 1 {
                    out.push(vec![0.0]);
                    return out;
                }
                out.push(axis(0, -1.0));
                for i in 1..d - 1 {
                    out.push(axis(i, 1.0));
                    out.push(axis(i, -1.0));
                }
                out.push(axis(d - 1, 1.0));
                out.push(vec![0.0; d]);
                out
            }
            Domain::ConeDisk => {
                let mut out = vec![vec![0.0, 0.0, 1.0]];
                for p in sphere_points(2, resolution) {
                    out.push(vec![p[0], p[1], 0.0]);
                }
                out
            }
            Domain::Product { factors } => {
                let mut acc: Vec<Vec<f64>> = vec![Vec::new()];
                for f in factors {
                    let pts = f.catalogue_points(resolution);
                    acc = acc
                        .iter()
                        .flat_map(|head| {
                            pts.iter().map(move |tail| {
                                let mut v = head.clone();
                                v.extend_from_slice(tail);
                                v
                            })
                        })
                        .collect();
                }
                acc
            }
            Domain::Affine { map, base } => base.catalogue_points(resolution).iter().map(|x| map.apply(x)).collect(),
        }
    }

    /// Boundary point on the ray from `origin` (an interior point) in
    /// direction `dir`. Closed form for centred lp-balls; radial bisection
    /// otherwise. Assumes the domain is star-shaped about `origin`.
    pub fn radial_boundary(&self, origin: &[f64], dir: &[f64]) -> Vec<f64> {
        match self {
            Domain::BallP { p, .. } if origin.iter().all(|v| *v == 0.0) => {
                let norm = if p.is_infinite() {
                    dir.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                } else {
                    dir.iter().map(|v| v.abs().powf(*p)).sum::<f64>().powf(1.0 / p)
                };
                dir.iter().map(|v| v / norm).collect()
            }
            Domain::Affine { map, base } => {
                let o = map.apply_inverse(origin);
                let img: Vec<f64> = map.apply_inverse(&origin.iter().zip(dir).map(|(a, b)| a + b).collect::<Vec<_>>());
                let bdir: Vec<f64> = img.iter().zip(&o).map(|(a, b)| a - b).collect();
                map.apply(&base.radial_boundary(&o, &bdir))
            }
            _ => {
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let u: Vec<f64> = dir.iter().map(|v| v / norm).collect();
                let at = |t: f64| -> Vec<f64> { origin.iter().zip(&u).map(|(o, v)| o + t * v).collect() };
                let mut hi = 2.0 * self.bounding_box().diameter() + 1.0;
                let mut lo = 0.0;
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if self.contains(&at(mid)) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 * hi {
                        break;
                    }
                }
                at(lo)
            }
        }
    }

    /// True when `x` is a member and some nearby point in one of a fixed
    /// set of directions is not.
    pub fn is_boundary_point(&self, x: &[f64]) -> bool {
        if !self.contains(x) {
            return false;
        }
        let step = 1e-7 * (1.0 + self.bounding_box().diameter());
        sphere_points(self.dim(), 96)
            .iter()
            .chain(axis_dirs(self.dim()).iter())
            .any(|u| {
                let y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + step * b).collect();
                !self.contains(&y)
            })
    }

    // Points on facets of the individual simplices that lie on the boundary
    // of the union.
    fn facet_grid(&self, simplices: &[Vec<Vec<f64>>], resolution: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let facets = simplices.len() * (d + 1);
        let target = resolution.div_ceil(facets).max(1);
        let mut g = 1usize;
        while grid_size(d - 1, g) < target {
            g += 1;
        }
        let weights = barycentric_grid(d, g);
        let scale = 1e-7 * (1.0 + self.bounding_box().diameter());
        let mut out: Vec<Vec<f64>> = Vec::new();
        for s in simplices {
            for omit in 0..=d {
                let facet: Vec<&Vec<f64>> = (0..=d).filter(|&i| i != omit).map(|i| &s[i]).collect();
                let normal = facet_normal(&facet, &s[omit]);
                for w in &weights {
                    let p: Vec<f64> = (0..d)
                        .map(|k| facet.iter().zip(w).map(|(v, wi)| wi * v[k]).sum())
                        .collect();
                    let probe: Vec<f64> = p.iter().zip(&normal).map(|(a, b)| a + scale * b).collect();
                    if !self.contains(&probe) && !out.iter().any(|q| dist2(q, &p) < 1e-24) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    /// Quasi-uniform interior points: Halton points of the bounding box that
    /// pass membership. At most `count`; gives up after 64 `count` draws.
    pub fn interior_samples(&self, count: usize, start: u64) -> Vec<Vec<f64>> {
        let bb = self.bounding_box();
        let d = self.dim();
        let mut out = Vec::with_capacity(count);
        let mut next = start;
        let chunk = count.max(16);
        while out.len() < count && next < start + 64 * chunk as u64 {
            for u in halton_points(d, chunk, next) {
                let x: Vec<f64> = (0..d)
                    .map(|i| bb.lower[i] + u[i] * (bb.upper[i] - bb.lower[i]))
                    .collect();
                if self.contains(&x) {
                    out.push(x);
                    if out.len() == count {
                        break;
                    }
                }
            }
            next += chunk as u64;
        }
        out
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn axis_dirs(d: usize) -> Vec<Vec<f64>> {
    (0..2 * d)
        .map(|k| {
            let mut v = vec![0.0; d];
            v[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
            v
        })
        .collect()
}

fn cube_vertices(d: usize) -> Vec<Vec<f64>> {
    (0..(1usize << d))
        .map(|mask| (0..d).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect()
}

// number of points of the barycentric grid of step 1/g on a k-simplex
fn grid_size(k: usize, g: usize) -> usize {
    crate::basis::binomial(g + k, k)
}

// weights (w_0..w_k) >= 0 summing to one with denominators g, k = d - 1
fn barycentric_grid(d: usize, g: usize) -> Vec<Vec<f64>> {
    let k = d - 1;
    let mut out = Vec::new();
    let mut current = vec![0usize; k + 1];
    fn rec(out: &mut Vec<Vec<f64>>, cur: &mut Vec<usize>, slot: usize, left: usize, g: usize) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.iter().map(|&c| c as f64 / g as f64).collect());
            return;
        }
        for e in 0..=left {
            cur[slot] = e;
            rec(out, cur, slot + 1, left - e, g);
        }
    }
    rec(&mut out, &mut current, 0, g, g);
    out
}

// unit normal of the facet spanned by `facet`, pointing away from `opposite`
fn facet_normal(facet: &[&Vec<f64>], opposite: &[f64]) -> Vec<f64> {
    let d = opposite.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in &facet[1..] {
        let mut e: Vec<f64> = (0..d).map(|i| v[i] - facet[0][i]).collect();
        for b in &basis {
            let dot: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
            e.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        basis.push(e.into_iter().map(|x| x / n).collect());
    }
    let mut w: Vec<f64> = (0..d).map(|i| facet[0][i] - opposite[i]).collect();
    for b in &basis {
        let dot: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
        w.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
    }
    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.into_iter().map(|x| x / n).collect()
}
