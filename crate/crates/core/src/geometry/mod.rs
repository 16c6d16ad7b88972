//! Domain catalogue, affine maps and geometric predicates.

mod boundary;
mod maps;
mod section;

pub use boundary::CandidateSet;
pub use maps::{
    cone_inscription_map, extension_point, half_ball_map, householder_rotation, lp_cone_constants, lp_outward_normal,
};
pub(crate) use section::plane_basis;
pub use section::SectionValue;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::basis::BoundingBox;
use crate::{Error, Result};

/// Slack used by membership tests so that computed boundary points count as
/// members.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Non-degenerate affine map x -> offset + matrix x.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
    inverse: DMatrix<f64>,
    det: f64,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if offset.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: offset.len(),
            });
        }
        let det = matrix.determinant();
        let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(matrix.nrows() as i32) {
            return Err(Error::SingularMap);
        }
        let inverse = matrix.clone().try_inverse().ok_or(Error::SingularMap)?;
        Ok(Self {
            matrix,
            offset,
            inverse,
            det,
        })
    }

    /// Builds from a row-major matrix and an offset vector.
    pub fn from_rows(rows: &[Vec<f64>], offset: &[f64]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidDomain("affine matrix must be square".into()));
        }
        let matrix = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Self::new(matrix, DVector::from_column_slice(offset))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim), DVector::zeros(dim)).expect("identity is regular")
    }

    pub fn scaling(dim: usize, factor: f64) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim) * factor, DVector::zeros(dim))
    }

    pub fn translation(offset: &[f64]) -> Self {
        let d = offset.len();
        Self::new(DMatrix::identity(d, d), DVector::from_column_slice(offset)).expect("identity is regular")
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn determinant(&self) -> f64 {
        self.det
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| self.offset[i] + (0..d).map(|j| self.matrix[(i, j)] * x[j]).sum::<f64>())
            .collect()
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let shifted: Vec<f64> = (0..d).map(|i| y[i] - self.offset[i]).collect();
        (0..d)
            .map(|i| (0..d).map(|j| self.inverse[(i, j)] * shifted[j]).sum())
            .collect()
    }

    /// Linear part only.
    pub fn apply_linear(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn inverse(&self) -> AffineMap {
        let offset = -(&self.inverse * &self.offset);
        AffineMap {
            matrix: self.inverse.clone(),
            offset,
            inverse: self.matrix.clone(),
            det: 1.0 / self.det,
        }
    }

    /// `self ∘ inner`: x -> self(inner(x)).
    pub fn compose(&self, inner: &AffineMap) -> Result<AffineMap> {
        if self.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: inner.dim(),
            });
        }
        AffineMap::new(
            &self.matrix * &inner.matrix,
            &self.matrix * &inner.offset + &self.offset,
        )
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.matrix[(i, j)]).collect())
            .collect()
    }
}

/// Compact domains with non-empty interior.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Interval `[a, b]`.
    Interval {
        a: f64,
        b: f64,
    },
    /// `[-1, 1]^dim`.
    Cube {
        dim: usize,
    },
    /// `{x : sum |x_i|^p <= 1}`; `p = inf` is the cube.
    BallP {
        dim: usize,
        p: f64,
    },
    Simplex {
        vertices: Vec<Vec<f64>>,
    },
    /// Interior-disjoint simplices; convexity is declared, not detected.
    SimplexUnion {
        simplices: Vec<Vec<Vec<f64>>>,
        convex: bool,
    },
    /// Euclidean unit ball intersected with `x_dim >= 0`.
    HalfBall {
        dim: usize,
    },
    /// Convex hull of (0,0,1) and the unit disk in the plane z = 0.
    ConeDisk,
    Product {
        factors: Vec<Domain>,
    },
    Affine {
        map: AffineMap,
        base: Box<Domain>,
    },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let d = Domain::Interval { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn cube(dim: usize) -> Result<Self> {
        let d = Domain::Cube { dim };
        d.validate()?;
        Ok(d)
    }

    pub fn ball_p(dim: usize, p: f64) -> Result<Self> {
        let d = Domain::BallP { dim, p };
        d.validate()?;
        Ok(d)
    }

    pub fn simplex(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let d = Domain::Simplex { vertices };
        d.validate()?;
        Ok(d)
    }

    pub fn simplex_union(simplices: Vec<Vec<Vec<f64>>>, convex: bool) -> Result<Self> {
        let d = Domain::SimplexUnion { simplices, convex };
        d.validate()?;
        Ok(d)
    }

    pub fn half_ball(dim: usize) -> Result<Self> {
        let d = Domain::HalfBall { dim };
        d.validate()?;
        Ok(d)
    }

    pub fn cone_disk() -> Self {
        Domain::ConeDisk
    }

    pub fn product(factors: Vec<Domain>) -> Result<Self> {
        let d = Domain::Product { factors };
        d.validate()?;
        Ok(d)
    }

    /// Affine image `map(base)`.
    pub fn affine(map: AffineMap, base: Domain) -> Result<Self> {
        let d = Domain::Affine {
            map,
            base: Box::new(base),
        };
        d.validate()?;
        Ok(d)
    }

    /// Checks the structural invariants (dimensions, positive volume).
    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return Err(Error::InvalidDomain(format!("interval [{a}, {b}] is empty")));
                }
            }
            Domain::Cube { dim } | Domain::HalfBall { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidDomain("dimension must be positive".into()));
                }
            }
            Domain::BallP { dim, p } => {
                if *dim == 0 {
                    return Err(Error::InvalidDomain("dimension must be positive".into()));
                }
                if !(*p > 0.0) {
                    return Err(Error::InvalidDomain(format!("p must be positive, got {p}")));
                }
            }
            Domain::Simplex { vertices } => {
                simplex_volume(vertices)?;
            }
            Domain::SimplexUnion { simplices, .. } => {
                if simplices.is_empty() {
                    return Err(Error::InvalidDomain("simplex union is empty".into()));
                }
                let d = simplices[0].len().saturating_sub(1);
                for s in simplices {
                    if s.len() != d + 1 {
                        return Err(Error::InvalidDomain("simplices of mixed dimension".into()));
                    }
                    simplex_volume(s)?;
                }
            }
            Domain::ConeDisk => {}
            Domain::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidDomain("product needs at least one factor".into()));
                }
                for f in factors {
                    f.validate()?;
                }
            }
            Domain::Affine { map, base } => {
                base.validate()?;
                if map.dim() != base.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: base.dim(),
                        found: map.dim(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Cube { dim } | Domain::BallP { dim, .. } | Domain::HalfBall { dim } => *dim,
            Domain::Simplex { vertices } => vertices[0].len(),
            Domain::SimplexUnion { simplices, .. } => simplices[0][0].len(),
            Domain::ConeDisk => 3,
            Domain::Product { factors } => factors.iter().map(|f| f.dim()).sum(),
            Domain::Affine { map, .. } => map.dim(),
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            Domain::Interval { a, b } => format!("interval[{a},{b}]"),
            Domain::Cube { dim } => format!("cube(d={dim})"),
            Domain::BallP { dim, p } => format!("ball_p(d={dim},p={p})"),
            Domain::Simplex { vertices } => format!("simplex(d={})", vertices[0].len()),
            Domain::SimplexUnion { simplices, .. } => format!("simplex_union({} simplices)", simplices.len()),
            Domain::HalfBall { dim } => format!("half_ball(d={dim})"),
            Domain::ConeDisk => "cone_disk".into(),
            Domain::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(|f| f.label()).collect();
                parts.join(" x ")
            }
            Domain::Affine { base, .. } => format!("affine({})", base.label()),
        }
    }

    /// Convexity as catalogue metadata.
    pub fn is_convex(&self) -> bool {
        match self {
            Domain::BallP { p, .. } => *p >= 1.0,
            Domain::SimplexUnion { convex, .. } => *convex,
            Domain::Product { factors } => factors.iter().all(|f| f.is_convex()),
            Domain::Affine { base, .. } => base.is_convex(),
            _ => true,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Closed-set membership with [`MEMBERSHIP_TOL`] slack.
    pub fn membership(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.contains(x))
    }

    /// Membership without the dimension check.
    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = MEMBERSHIP_TOL;
        match self {
            Domain::Interval { a, b } => x[0] >= a - tol && x[0] <= b + tol,
            Domain::Cube { .. } => x.iter().all(|v| v.abs() <= 1.0 + tol),
            Domain::BallP { p, .. } => {
                if p.is_infinite() {
                    x.iter().all(|v| v.abs() <= 1.0 + tol)
                } else {
                    x.iter().map(|v| v.abs().powf(*p)).sum::<f64>() <= 1.0 + tol
                }
            }
            Domain::Simplex { vertices } => simplex_contains(vertices, x, tol),
            Domain::SimplexUnion { simplices, .. } => simplices.iter().any(|s| simplex_contains(s, x, tol)),
            Domain::HalfBall { .. } => x.iter().map(|v| v * v).sum::<f64>() <= 1.0 + tol && x[x.len() - 1] >= -tol,
            Domain::ConeDisk => {
                let z = x[2];
                z >= -tol && z <= 1.0 + tol && (x[0] * x[0] + x[1] * x[1]).sqrt() <= 1.0 - z + tol
            }
            Domain::Product { factors } => {
                let mut off = 0;
                factors.iter().all(|f| {
                    let d = f.dim();
                    let inside = f.contains(&x[off..off + d]);
                    off += d;
                    inside
                })
            }
            Domain::Affine { map, base } => base.contains(&map.apply_inverse(x)),
        }
    }

    /// Support function h(u) = max over the (closed convex hull of the)
    /// domain of u . x.
    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            Domain::Interval { a, b } => (a * u[0]).max(b * u[0]),
            Domain::Cube { .. } => u.iter().map(|v| v.abs()).sum(),
            Domain::BallP { p, .. } => {
                if p.is_infinite() {
                    u.iter().map(|v| v.abs()).sum()
                } else if *p <= 1.0 {
                    u.iter().fold(0.0, |m, v| m.max(v.abs()))
                } else {
                    let q = p / (p - 1.0);
                    u.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
                }
            }
            Domain::Simplex { vertices } => max_dot(vertices.iter(), u),
            Domain::SimplexUnion { simplices, .. } => max_dot(simplices.iter().flatten(), u),
            Domain::HalfBall { .. } => {
                let last = u.len() - 1;
                let lateral: f64 = u[..last].iter().map(|v| v * v).sum();
                if u[last] >= 0.0 {
                    (lateral + u[last] * u[last]).sqrt()
                } else {
                    lateral.sqrt()
                }
            }
            Domain::ConeDisk => u[2].max(0.0f64.max((u[0] * u[0] + u[1] * u[1]).sqrt())),
            Domain::Product { factors } => {
                let mut off = 0;
                factors
                    .iter()
                    .map(|f| {
                        let d = f.dim();
                        let h = f.support(&u[off..off + d]);
                        off += d;
                        h
                    })
                    .sum()
            }
            Domain::Affine { map, base } => {
                let d = map.dim();
                let at: Vec<f64> = (0..d)
                    .map(|j| (0..d).map(|i| map.matrix()[(i, j)] * u[i]).sum())
                    .collect();
                let shift: f64 = (0..d).map(|i| map.offset()[i] * u[i]).sum();
                shift + base.support(&at)
            }
        }
    }

    /// Tight axis-aligned bounding box from the support function.
    pub fn bounding_box(&self) -> BoundingBox {
        let d = self.dim();
        let mut lower = vec![0.0; d];
        let mut upper = vec![0.0; d];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            upper[i] = self.support(&e);
            e[i] = -1.0;
            lower[i] = -self.support(&e);
        }
        BoundingBox { lower, upper }
    }

    /// Lebesgue measure.
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::Cube { dim } => 2f64.powi(*dim as i32),
            Domain::BallP { dim, p } => ball_p_volume(*dim, *p),
            Domain::Simplex { vertices } => simplex_volume(vertices).unwrap_or(0.0),
            Domain::SimplexUnion { simplices, .. } => simplices.iter().map(|s| simplex_volume(s).unwrap_or(0.0)).sum(),
            Domain::HalfBall { dim } => 0.5 * ball_p_volume(*dim, 2.0),
            Domain::ConeDisk => PI / 3.0,
            Domain::Product { factors } => factors.iter().map(|f| f.volume()).product(),
            Domain::Affine { map, base } => map.determinant().abs() * base.volume(),
        }
    }

    /// A point in the interior, used as the origin of radial searches.
    pub fn center(&self) -> Vec<f64> {
        match self {
            Domain::Interval { a, b } => vec![0.5 * (a + b)],
            Domain::Cube { dim } | Domain::BallP { dim, .. } => vec![0.0; *dim],
            Domain::Simplex { vertices } => centroid(vertices),
            Domain::SimplexUnion { simplices, .. } => centroid(&simplices[0]),
            Domain::HalfBall { dim } => {
                let mut c = vec![0.0; *dim];
                c[dim - 1] = 0.4;
                c
            }
            Domain::ConeDisk => vec![0.0, 0.0, 0.25],
            Domain::Product { factors } => factors.iter().flat_map(|f| f.center()).collect(),
            Domain::Affine { map, base } => map.apply(&base.center()),
        }
    }

    /// Vertices of the domain when it is a convex polytope (or an affine
    /// image of one), with its edges as index pairs.
    pub(crate) fn polytope(&self) -> Option<(Vec<Vec<f64>>, Vec<(usize, usize)>)> {
        match self {
            Domain::Interval { a, b } => Some((vec![vec![*a], vec![*b]], vec![(0, 1)])),
            Domain::Cube { dim } => Some(cube_polytope(*dim)),
            Domain::BallP { dim, p } if p.is_infinite() => Some(cube_polytope(*dim)),
            Domain::BallP { dim, p } if *p == 1.0 => {
                let mut verts = Vec::new();
                for i in 0..*dim {
                    for s in [1.0, -1.0] {
                        let mut v = vec![0.0; *dim];
                        v[i] = s;
                        verts.push(v);
                    }
                }
                let mut edges = Vec::new();
                for i in 0..verts.len() {
                    for j in (i + 1)..verts.len() {
                        // opposite vertices are not joined
                        if i / 2 != j / 2 {
                            edges.push((i, j));
                        }
                    }
                }
                Some((verts, edges))
            }
            Domain::Simplex { vertices } => {
                let k = vertices.len();
                let edges = (0..k).flat_map(|i| ((i + 1)..k).map(move |j| (i, j))).collect();
                Some((vertices.clone(), edges))
            }
            Domain::Affine { map, base } => base
                .polytope()
                .map(|(v, e)| (v.iter().map(|x| map.apply(x)).collect(), e)),
            _ => None,
        }
    }
}

/// Affine image of a domain (`apply_affine`).
pub fn apply_affine(map: &AffineMap, domain: &Domain) -> Result<Domain> {
    if map.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: map.dim(),
        });
    }
    Domain::affine(map.clone(), domain.clone())
}

pub fn ball_p_volume(dim: usize, p: f64) -> f64 {
    if p.is_infinite() {
        return 2f64.powi(dim as i32);
    }
    let d = dim as f64;
    (d * (2.0 * (1.0 + 1.0 / p).exp_ln_gamma()).ln() - ln_gamma(1.0 + d / p)).exp()
}

trait ExpLnGamma {
    fn exp_ln_gamma(self) -> f64;
}

impl ExpLnGamma for f64 {
    fn exp_ln_gamma(self) -> f64 {
        ln_gamma(self).exp()
    }
}

fn max_dot<'a>(points: impl Iterator<Item = &'a Vec<f64>>, u: &[f64]) -> f64 {
    points
        .map(|v| v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn centroid(vertices: &[Vec<f64>]) -> Vec<f64> {
    let d = vertices[0].len();
    let k = vertices.len() as f64;
    (0..d).map(|i| vertices.iter().map(|v| v[i]).sum::<f64>() / k).collect()
}

fn edge_matrix(vertices: &[Vec<f64>]) -> DMatrix<f64> {
    let d = vertices[0].len();
    DMatrix::from_fn(d, d, |i, j| vertices[j + 1][i] - vertices[0][i])
}

pub(crate) fn simplex_volume(vertices: &[Vec<f64>]) -> Result<f64> {
    let d = vertices.first().map(|v| v.len()).unwrap_or(0);
    if d == 0 || vertices.len() != d + 1 || vertices.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidDomain("a d-simplex needs d+1 vertices in R^d".into()));
    }
    let det = edge_matrix(vertices).determinant();
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    let vol = det.abs() / fact;
    if !(vol > 0.0) {
        return Err(Error::InvalidDomain("degenerate simplex".into()));
    }
    Ok(vol)
}

fn simplex_contains(vertices: &[Vec<f64>], x: &[f64], tol: f64) -> bool {
    let d = x.len();
    let m = edge_matrix(vertices);
    let rhs = DVector::from_fn(d, |i, _| x[i] - vertices[0][i]);
    match m.lu().solve(&rhs) {
        Some(lam) => {
            let s: f64 = lam.iter().sum();
            lam.iter().all(|l| *l >= -tol) && s <= 1.0 + tol
        }
        None => false,
    }
}

fn cube_polytope(dim: usize) -> (Vec<Vec<f64>>, Vec<(usize, usize)>) {
    let verts: Vec<Vec<f64>> = (0..(1usize << dim))
        .map(|mask| (0..dim).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect();
    let mut edges = Vec::new();
    for a in 0..verts.len() {
        for i in 0..dim {
            let b = a ^ (1 << i);
            if a < b {
                edges.push((a, b));
            }
        }
    }
    (verts, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn membership_examples() {
        let b = Domain::ball_p(2, 1.5).unwrap();
        assert!(b.membership(&[1.0, 0.0]).unwrap());
        let hb = Domain::half_ball(3).unwrap();
        assert!(!hb.membership(&[0.0, 0.0, -0.1]).unwrap());
        assert!(Domain::cone_disk().membership(&[0.3, 0.0, 0.5]).unwrap());
        assert!(!Domain::cone_disk().membership(&[0.6, 0.0, 0.5]).unwrap());
        assert!(matches!(
            b.membership(&[0.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn volume_examples() {
        assert!((Domain::cube(2).unwrap().volume() - 4.0).abs() < 1e-15);
        assert!((Domain::ball_p(2, 2.0).unwrap().volume() - PI).abs() < 1e-13);
        // cross-polytope volume 2^d / d!
        assert!((Domain::ball_p(3, 1.0).unwrap().volume() - 8.0 / 6.0).abs() < 1e-13);
        assert!((Domain::ball_p(3, f64::INFINITY).unwrap().volume() - 8.0).abs() < 1e-15);
        assert!((Domain::half_ball(3).unwrap().volume() - 2.0 * PI / 3.0).abs() < 1e-13);
        let tri = Domain::simplex(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((tri.volume() - 1.0).abs() < 1e-15);
        let cyl = Domain::product(vec![
            Domain::ball_p(2, 2.0).unwrap(),
            Domain::interval(0.0, 1.0).unwrap(),
        ])
        .unwrap();
        assert!((cyl.volume() - PI).abs() < 1e-13);
    }

    #[test]
    fn invalid_domains_are_rejected() {
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::ball_p(2, 0.0).is_err());
        assert!(Domain::simplex(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
        assert!(AffineMap::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn bounding_boxes() {
        let hb = Domain::half_ball(3).unwrap().bounding_box();
        assert_eq!(hb.lower, vec![-1.0, -1.0, 0.0]);
        assert_eq!(hb.upper, vec![1.0, 1.0, 1.0]);
        let m = AffineMap::scaling(2, 2.0).unwrap();
        let img = apply_affine(&m, &Domain::cube(2).unwrap()).unwrap().bounding_box();
        assert_eq!(img.lower, vec![-2.0, -2.0]);
        assert_eq!(img.upper, vec![2.0, 2.0]);
        let id = apply_affine(&AffineMap::identity(3), &Domain::cone_disk()).unwrap();
        assert_eq!(id.bounding_box(), Domain::cone_disk().bounding_box());
        assert!(id.contains(&[0.3, 0.0, 0.5]));
    }

    fn random_map(rng: &mut ChaCha8Rng, d: usize) -> AffineMap {
        loop {
            let rows: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..d).map(|_| rng.random_range(-1.5..1.5)).collect())
                .collect();
            let off: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            if let Ok(m) = AffineMap::from_rows(&rows, &off) {
                let det = m.determinant().abs();
                if (0.1..=10.0).contains(&det) {
                    return m;
                }
            }
        }
    }

    #[test]
    fn affine_membership_and_volume() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bases = [
            Domain::cube(2).unwrap(),
            Domain::ball_p(3, 1.5).unwrap(),
            Domain::half_ball(3).unwrap(),
            Domain::simplex(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        ];
        for base in &bases {
            let d = base.dim();
            let t = random_map(&mut rng, d);
            let img = apply_affine(&t, base).unwrap();
            let rel = (img.volume() - t.determinant().abs() * base.volume()).abs() / img.volume();
            assert!(rel < 1e-12);
            let bb = base.bounding_box();
            for _ in 0..2500 {
                let x: Vec<f64> = (0..d)
                    .map(|i| rng.random_range(bb.lower[i] - 0.2..bb.upper[i] + 0.2))
                    .collect();
                assert_eq!(base.contains(&x), img.contains(&t.apply(&x)));
            }
        }
    }

    #[test]
    fn affine_algebra() {
        let a = AffineMap::from_rows(&[vec![2.0, 1.0], vec![0.5, 3.0]], &[1.0, -1.0]).unwrap();
        let b = AffineMap::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.2]], &[0.3, 0.4]).unwrap();
        let ab = a.compose(&b).unwrap();
        let x = [0.7, -0.2];
        let lhs = ab.apply(&x);
        let rhs = a.apply(&b.apply(&x));
        assert!((lhs[0] - rhs[0]).abs() < 1e-14 && (lhs[1] - rhs[1]).abs() < 1e-14);
        let back = a.inverse().apply(&a.apply(&x));
        assert!((back[0] - x[0]).abs() < 1e-14 && (back[1] - x[1]).abs() < 1e-14);
        assert!((ab.determinant() - a.determinant() * b.determinant()).abs() < 1e-12);
    }
}
