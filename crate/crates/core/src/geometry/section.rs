//! Parallel section function A(t) = Vol_{d-1}(D ∩ {x . xi = t + h}), h the
//! smallest level with a non-empty slice.

use serde::Serialize;

use super::{ball_p_volume, Domain};
use crate::sampling::shifted_halton_batches;
use crate::{Error, Result};

const MC_POINTS: usize = 4096;
const MC_SHIFTS: usize = 8;
const BISECTION: usize = 60;

/// Section volume; `std_error` is zero on the closed-form and exact
/// slicing paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionValue {
    pub value: f64,
    pub std_error: f64,
    pub exact: bool,
}

impl SectionValue {
    fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            exact: true,
        }
    }
}

impl Domain {
    /// Smallest h with a non-empty slice {x . xi = h}.
    pub fn section_offset(&self, xi: &[f64]) -> f64 {
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        -self.support(&neg)
    }

    /// Width of the domain along `xi`.
    pub fn width(&self, xi: &[f64]) -> f64 {
        self.support(xi) - self.section_offset(xi)
    }

    /// A(t) along the unit direction `xi`. `seed` drives the sampled path.
    pub fn parallel_section(&self, xi: &[f64], t: f64, seed: u64) -> Result<SectionValue> {
        let d = self.dim();
        if xi.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: xi.len(),
            });
        }
        let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange("section direction must be a unit vector".into()));
        }
        if !(t >= 0.0) {
            return Err(Error::OutOfRange(format!(
                "section parameter must be non-negative, got {t}"
            )));
        }
        let width = self.width(xi);
        if t > width {
            return Ok(SectionValue::exact(0.0));
        }
        let level = t + self.section_offset(xi);
        if d == 1 {
            let inside = self.contains(&[level * xi[0]]);
            return Ok(SectionValue::exact(if inside { 1.0 } else { 0.0 }));
        }
        if let Some(axis) = axis_of(xi) {
            match self {
                Domain::BallP { dim, p } => {
                    let a = (1.0 - t).abs();
                    let value = if p.is_infinite() {
                        if a < 1.0 {
                            2f64.powi(*dim as i32 - 1)
                        } else {
                            0.0
                        }
                    } else {
                        (1.0 - a.powf(*p)).max(0.0).powf((*dim as f64 - 1.0) / p) * ball_p_volume(dim - 1, *p)
                    };
                    return Ok(SectionValue::exact(value));
                }
                Domain::HalfBall { dim } if axis < dim - 1 => {
                    let a = (1.0 - t).abs();
                    let r2 = (1.0 - a * a).max(0.0);
                    let value = 0.5 * ball_p_volume(dim - 1, 2.0) * r2.powf((*dim as f64 - 1.0) / 2.0);
                    return Ok(SectionValue::exact(value));
                }
                _ => {}
            }
        }
        if d <= 3 {
            if let Some(value) = self.polytope_section(xi, level) {
                return Ok(SectionValue::exact(value));
            }
            if let Domain::SimplexUnion { simplices, .. } = self {
                let mut total = 0.0;
                for s in simplices {
                    let simplex = Domain::Simplex { vertices: s.clone() };
                    total += simplex.polytope_section(xi, level).unwrap_or(0.0);
                }
                return Ok(SectionValue::exact(total));
            }
        }
        if d == 2 && self.is_convex() {
            return Ok(SectionValue::exact(self.chord(xi, level)));
        }
        Ok(self.sampled_section(xi, level, seed))
    }

    // Length of D ∩ {x . xi = level} for planar convex D. A point of the
    // chord comes from the segment joining the centroid to a support point
    // (the gradient of the support function, by central differences); the
    // ends are then found by bisection.
    fn chord(&self, xi: &[f64], level: f64) -> f64 {
        let e = [-xi[1], xi[0]];
        let c = self.center();
        let cl = c[0] * xi[0] + c[1] * xi[1];
        let u = if level <= cl { [-xi[0], -xi[1]] } else { [xi[0], xi[1]] };
        let eps = 1e-7;
        let ue = [-u[1], u[0]];
        let h = |a: f64| {
            let v = [u[0] + a * ue[0], u[1] + a * ue[1]];
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            n * self.support(&[v[0] / n, v[1] / n])
        };
        let g = (h(eps) - h(-eps)) / (2.0 * eps);
        let hu = self.support(&u);
        let x0 = [hu * u[0] + g * ue[0], hu * u[1] + g * ue[1]];
        let x0l = x0[0] * xi[0] + x0[1] * xi[1];
        let s = if (cl - x0l).abs() > 0.0 {
            (level - x0l) / (cl - x0l)
        } else {
            0.0
        };
        let p = [x0[0] + s * (c[0] - x0[0]), x0[1] + s * (c[1] - x0[1])];
        let at = |a: f64| [p[0] + a * e[0], p[1] + a * e[1]];
        if !self.contains(&p) {
            return 0.0;
        }
        let far = 1.01 * self.bounding_box().diameter() + 1e-9;
        let edge = |dir: f64| {
            let (mut a, mut b) = (0.0, dir * far);
            for _ in 0..BISECTION {
                let m = 0.5 * (a + b);
                if self.contains(&at(m)) {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        edge(1.0) - edge(-1.0)
    }

    fn polytope_section(&self, xi: &[f64], level: f64) -> Option<f64> {
        let (verts, edges) = self.polytope()?;
        let d = xi.len();
        let h: Vec<f64> = verts
            .iter()
            .map(|v| v.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() - level)
            .collect();
        let scale = verts.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        let eps = 1e-13 * scale;
        let mut pts: Vec<Vec<f64>> = Vec::new();
        let mut push = |p: Vec<f64>| {
            if !pts
                .iter()
                .any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() <= 1e-12 * scale))
            {
                pts.push(p);
            }
        };
        for (i, v) in verts.iter().enumerate() {
            if h[i].abs() <= eps {
                push(v.clone());
            }
        }
        for &(i, j) in &edges {
            if (h[i] > eps && h[j] < -eps) || (h[i] < -eps && h[j] > eps) {
                let s = h[i] / (h[i] - h[j]);
                push((0..d).map(|k| verts[i][k] + s * (verts[j][k] - verts[i][k])).collect());
            }
        }
        if pts.len() < d {
            return Some(0.0);
        }
        let plane = plane_basis(xi);
        let coords: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| {
                plane
                    .iter()
                    .map(|e| e.iter().zip(p).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect();
        match d {
            2 => {
                let (lo, hi) = coords.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                    (lo.min(c[0]), hi.max(c[0]))
                });
                Some(hi - lo)
            }
            3 => Some(convex_polygon_area(&coords)),
            _ => None,
        }
    }

    fn sampled_section(&self, xi: &[f64], level: f64, seed: u64) -> SectionValue {
        let d = xi.len();
        let plane = plane_basis(xi);
        let bb = self.bounding_box();
        let mut lo = vec![f64::INFINITY; d - 1];
        let mut hi = vec![f64::NEG_INFINITY; d - 1];
        for mask in 0..(1usize << d) {
            let corner: Vec<f64> = (0..d)
                .map(|i| if mask >> i & 1 == 1 { bb.upper[i] } else { bb.lower[i] })
                .collect();
            for (k, e) in plane.iter().enumerate() {
                let c: f64 = e.iter().zip(&corner).map(|(a, b)| a * b).sum();
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        let area: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let batches = shifted_halton_batches(d - 1, MC_POINTS, MC_SHIFTS, seed);
        let estimates: Vec<f64> = batches
            .iter()
            .map(|batch| {
                let hits = batch
                    .iter()
                    .filter(|u| {
                        let x: Vec<f64> = (0..d)
                            .map(|i| {
                                level * xi[i]
                                    + plane
                                        .iter()
                                        .enumerate()
                                        .map(|(k, e)| e[i] * (lo[k] + u[k] * (hi[k] - lo[k])))
                                        .sum::<f64>()
                            })
                            .collect();
                        self.contains(&x)
                    })
                    .count();
                area * hits as f64 / MC_POINTS as f64
            })
            .collect();
        let m = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / m;
        let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
        SectionValue {
            value: mean,
            std_error: (var / m).sqrt(),
            exact: false,
        }
    }
}

fn axis_of(xi: &[f64]) -> Option<usize> {
    let mut found = None;
    for (i, v) in xi.iter().enumerate() {
        if (v.abs() - 1.0).abs() < 1e-14 {
            found = Some(i);
        } else if v.abs() > 1e-14 {
            return None;
        }
    }
    found
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `xi`.
pub(crate) fn plane_basis(xi: &[f64]) -> Vec<Vec<f64>> {
    let d = xi.len();
    let skip = (0..d)
        .max_by(|&a, &b| xi[a].abs().partial_cmp(&xi[b].abs()).unwrap())
        .unwrap();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for axis in (0..d).filter(|&i| i != skip) {
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        for b in std::iter::once(xi).chain(basis.iter().map(|v| v.as_slice())) {
            let dot: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
            e.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        basis.push(e.into_iter().map(|x| x / n).collect());
    }
    basis
}

fn convex_polygon_area(pts: &[Vec<f64>]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
    let mut sorted: Vec<&Vec<f64>> = pts.iter().collect();
    sorted.sort_by(|a, b| {
        let ta = (a[1] - cy).atan2(a[0] - cx);
        let tb = (b[1] - cy).atan2(b[0] - cx);
        ta.partial_cmp(&tb).unwrap()
    });
    let mut area = 0.0;
    for i in 0..sorted.len() {
        let (p, q) = (sorted[i], sorted[(i + 1) % sorted.len()]);
        area += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * area.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AffineMap;
    use crate::orthopoly::gauss_legendre;

    #[test]
    fn disk_chord() {
        let disk = Domain::ball_p(2, 2.0).unwrap();
        let a = disk.parallel_section(&[-1.0, 0.0], 0.5, 0).unwrap();
        // chord 2 sqrt(2t - t^2)
        assert!((a.value - 2.0 * (2.0 * 0.5 - 0.25f64).sqrt()).abs() < 1e-14);
        assert_eq!(disk.parallel_section(&[-1.0, 0.0], 2.5, 0).unwrap().value, 0.0);
        assert!(disk.parallel_section(&[-1.0, 0.1], 0.5, 0).is_err());
    }

    #[test]
    fn ball_section_power_bound() {
        let (d, p) = (3.0, 1.5);
        let b = Domain::ball_p(3, p).unwrap();
        let m = p.powf((d - 1.0) / p) * ball_p_volume(2, p);
        for t in [0.1, 0.01, 0.5, 1.0] {
            let a = b.parallel_section(&[-1.0, 0.0, 0.0], t, 0).unwrap().value;
            assert!(a <= m * t.powf((d - 1.0) / p) + 1e-14);
        }
    }

    #[test]
    fn sections_integrate_to_volume() {
        let rule = gauss_legendre(200);
        for (d, p) in [(2, 2.0), (3, 1.5), (2, 3.0), (3, 1.0)] {
            let b = Domain::ball_p(d, p).unwrap();
            let mut xi = vec![0.0; d];
            xi[0] = -1.0;
            // split at t = 1 where the integrand has a kink
            let mut total = 0.0;
            for (lo, hi) in [(0.0, 1.0), (1.0, 2.0)] {
                let r = rule.mapped(lo, hi);
                total += r.integrate(|t| b.parallel_section(&xi, t, 0).unwrap().value);
            }
            assert!((total - b.volume()).abs() < 1e-6, "d={d} p={p}: {total}");
        }
    }

    #[test]
    fn exact_polytope_slices() {
        let cube = Domain::cube(3).unwrap();
        let s = cube.parallel_section(&[0.0, 0.0, 1.0], 0.7, 0).unwrap();
        assert!(s.exact && (s.value - 4.0).abs() < 1e-12);
        // diagonal slice of the square through the centre has length 2 sqrt 2
        let r = 0.5f64.sqrt();
        let sq = Domain::cube(2).unwrap();
        let s = sq.parallel_section(&[r, r], sq.width(&[r, r]) / 2.0, 0).unwrap();
        assert!((s.value - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        // cross-polytope slice through the middle: square of diagonal 2
        let oct = Domain::ball_p(3, 1.0).unwrap();
        let u = [1.0 / 3f64.sqrt(); 3];
        let w = oct.width(&u);
        assert!((w - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        let tri = Domain::simplex(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = tri.parallel_section(&[0.0, 1.0], 0.25, 0).unwrap();
        assert!((s.value - 0.75).abs() < 1e-14);
    }

    #[test]
    fn planar_chords() {
        let xi = [0.6, -0.8];
        let disk = Domain::ball_p(2, 2.0).unwrap();
        for t in [0.0, 1e-4, 0.3, 1.0, 1.7, 2.0] {
            let a = disk.parallel_section(&xi, t, 0).unwrap();
            let want = 2.0 * (1.0 - (1.0 - t) * (1.0 - t)).max(0.0).sqrt();
            // membership slack widens the tangent slice to ~sqrt(tol)
            let tol = if t == 0.0 || t == 2.0 { 1e-5 } else { 1e-9 };
            assert!(a.exact && (a.value - want).abs() < tol, "{t} {a:?}");
        }
        // thin slices of a smooth convex body: A(t) ~ t^{1/p}
        let b = Domain::ball_p(2, 1.5).unwrap();
        let u = [0.8, 0.6];
        let a1 = b.parallel_section(&u, 1e-6, 0).unwrap().value;
        let a2 = b.parallel_section(&u, 4e-6, 0).unwrap().value;
        assert!(
            ((a2 / a1).log2() / 2.0 - 0.5).abs() < 0.05,
            "{}",
            (a2 / a1).log2() / 2.0
        );
    }

    #[test]
    fn sampled_section_matches_exact() {
        // a rotated square goes through the exact path; a cylinder through sampling
        let cyl = Domain::product(vec![
            Domain::ball_p(2, 2.0).unwrap(),
            Domain::interval(0.0, 1.0).unwrap(),
        ])
        .unwrap();
        let s = cyl.parallel_section(&[0.0, 0.0, 1.0], 0.5, 7).unwrap();
        assert!(!s.exact);
        assert!(
            (s.value - std::f64::consts::PI).abs() < 4.0 * s.std_error + 1e-3,
            "{s:?}"
        );
        let rot = AffineMap::from_rows(&[vec![0.8, -0.6], vec![0.6, 0.8]], &[0.0, 0.0]).unwrap();
        let sq = Domain::affine(rot, Domain::cube(2).unwrap()).unwrap();
        let s = sq.parallel_section(&[0.8, 0.6], 1.0, 0).unwrap();
        assert!(s.exact && (s.value - 2.0).abs() < 1e-12);
    }
}
