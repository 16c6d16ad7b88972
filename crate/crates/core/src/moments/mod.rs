//! Monomial moments over catalogue domains and Gram assembly.

mod gram;
mod quadrature;

pub use gram::{assemble_gram, assemble_gram_with, degree_cap, GramOptions, GramSystem, NormValue};
pub use quadrature::{domain_rule, sampled_rule, QuadRule};

use std::collections::HashMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::geometry::Domain;
use crate::sampling::shifted_halton_batches;
use crate::{Error, Result};

/// Largest total degree accepted by the multinomial expansion of moments
/// of affine images.
pub const AFFINE_DEGREE_CAP: usize = 64;

/// How moments and Gram entries are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MomentMode {
    /// Closed-form moments; positive quadrature rules exact (or converged)
    /// on the domain for the Gram matrix.
    Exact,
    /// Tensor Gauss rule on the domain itself; only for boxes.
    GaussBox,
    /// Exact mode for affine images, reached through the base domain.
    MappedExact,
    /// Randomly shifted Halton points of the bounding box with membership;
    /// carries error bars.
    Sampled { samples: usize, seed: u64 },
}

impl Default for MomentMode {
    fn default() -> Self {
        MomentMode::Exact
    }
}

impl MomentMode {
    /// Rejects modes that do not apply to `domain`.
    pub fn check(&self, domain: &Domain) -> Result<()> {
        match self {
            MomentMode::GaussBox if !is_box(domain) => Err(Error::Unsupported(format!(
                "gauss-box mode needs a box, got {}",
                domain.label()
            ))),
            MomentMode::MappedExact if !matches!(domain, Domain::Affine { .. }) => {
                Err(Error::Unsupported("mapped-exact mode needs an affine image".into()))
            }
            MomentMode::Sampled { samples, .. } if *samples < 64 => {
                Err(Error::OutOfRange("sampled mode needs at least 64 samples".into()))
            }
            _ => Ok(()),
        }
    }
}

pub(crate) fn is_box(domain: &Domain) -> bool {
    match domain {
        Domain::Interval { .. } | Domain::Cube { .. } => true,
        Domain::BallP { p, .. } => p.is_infinite(),
        Domain::Product { factors } => factors.iter().all(is_box),
        _ => false,
    }
}

/// Moment value with an error bound (zero for closed forms up to rounding).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    pub value: f64,
    pub error: f64,
}

/// Moment oracle for one domain with a per-index cache.
#[derive(Debug)]
pub struct MomentEngine {
    domain: Domain,
    mode: MomentMode,
    cache: RwLock<HashMap<Vec<u32>, MomentValue>>,
}

impl MomentEngine {
    pub fn new(domain: Domain, mode: MomentMode) -> Result<Self> {
        domain.validate()?;
        mode.check(&domain)?;
        Ok(Self {
            domain,
            mode,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mode(&self) -> MomentMode {
        self.mode
    }

    /// ∫_D x^alpha dx.
    pub fn moment(&self, alpha: &[u32]) -> Result<MomentValue> {
        if alpha.len() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                found: alpha.len(),
            });
        }
        if let Some(v) = self.cache.read().unwrap().get(alpha) {
            return Ok(*v);
        }
        let value = match self.mode {
            MomentMode::Sampled { samples, seed } => sampled_moment(&self.domain, alpha, samples, seed),
            _ => {
                let v = exact_moment(&self.domain, alpha)?;
                MomentValue {
                    value: v,
                    error: 1e-15 * v.abs().max(f64::MIN_POSITIVE) * (alpha.iter().sum::<u32>() as f64 + 1.0),
                }
            }
        };
        self.cache.write().unwrap().entry(alpha.to_vec()).or_insert(value);
        Ok(value)
    }

    /// Integral of a polynomial given as (exponent, coefficient) pairs.
    pub fn integrate(&self, terms: &[(Vec<u32>, f64)]) -> Result<f64> {
        let mut s = 0.0;
        for (alpha, c) in terms {
            s += c * self.moment(alpha)?.value;
        }
        Ok(s)
    }
}

/// Closed-form moment ∫_D x^alpha dx.
pub fn exact_moment(domain: &Domain, alpha: &[u32]) -> Result<f64> {
    if alpha.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: alpha.len(),
        });
    }
    Ok(match domain {
        Domain::Interval { a, b } => {
            let k = alpha[0] as i32;
            (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64
        }
        Domain::Cube { .. } => cube_moment(alpha),
        Domain::BallP { p, .. } if p.is_infinite() => cube_moment(alpha),
        Domain::BallP { p, .. } => {
            if alpha.iter().any(|a| a % 2 == 1) {
                0.0
            } else {
                dirichlet_abs_moment(alpha, *p)
            }
        }
        Domain::HalfBall { .. } => {
            let last = alpha.len() - 1;
            if alpha[..last].iter().any(|a| a % 2 == 1) {
                0.0
            } else {
                0.5 * dirichlet_abs_moment(alpha, 2.0)
            }
        }
        Domain::Simplex { vertices } => simplex_moment(vertices, alpha)?,
        Domain::SimplexUnion { simplices, .. } => {
            let mut s = 0.0;
            for v in simplices {
                s += simplex_moment(v, alpha)?;
            }
            s
        }
        Domain::ConeDisk => {
            let (a, b, c) = (alpha[0], alpha[1], alpha[2]);
            if a % 2 == 1 || b % 2 == 1 {
                0.0
            } else {
                let disk = dirichlet_abs_moment(&[a, b], 2.0);
                let beta = (ln_gamma(c as f64 + 1.0) + ln_gamma((a + b) as f64 + 3.0)
                    - ln_gamma((a + b + c) as f64 + 4.0))
                .exp();
                disk * beta
            }
        }
        Domain::Product { factors } => {
            let mut off = 0;
            let mut v = 1.0;
            for f in factors {
                let d = f.dim();
                v *= exact_moment(f, &alpha[off..off + d])?;
                off += d;
            }
            v
        }
        Domain::Affine { map, base } => {
            let total: u32 = alpha.iter().sum();
            if total as usize > AFFINE_DEGREE_CAP {
                return Err(Error::Capacity {
                    what: "affine moment degree",
                    requested: total as usize,
                    cap: AFFINE_DEGREE_CAP,
                });
            }
            let d = map.dim();
            // ∏_k (x0_k + Σ_j A_kj y_j)^{alpha_k} as a polynomial in y
            let mut poly = SparsePoly::constant(d, 1.0);
            for (k, &e) in alpha.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut lin = SparsePoly::constant(d, map.offset()[k]);
                for j in 0..d {
                    lin.add_term(unit(d, j), map.matrix()[(k, j)]);
                }
                for _ in 0..e {
                    poly = poly.mul(&lin);
                }
            }
            let mut s = 0.0;
            for (beta, c) in poly.terms.iter() {
                if *c != 0.0 {
                    s += c * exact_moment(base, beta)?;
                }
            }
            map.determinant().abs() * s
        }
    })
}

fn cube_moment(alpha: &[u32]) -> f64 {
    alpha
        .iter()
        .map(|&a| if a % 2 == 1 { 0.0 } else { 2.0 / (a as f64 + 1.0) })
        .product()
}

/// ∫_{B_p^d} ∏|x_i|^{alpha_i} = 2^d ∏Γ((alpha_i+1)/p) / (p^d Γ(1 + (|alpha|+d)/p)).
pub(crate) fn dirichlet_abs_moment(alpha: &[u32], p: f64) -> f64 {
    let d = alpha.len() as f64;
    let total: f64 = alpha.iter().map(|&a| a as f64).sum();
    let log = d * (2.0f64.ln() - p.ln()) + alpha.iter().map(|&a| ln_gamma((a as f64 + 1.0) / p)).sum::<f64>()
        - ln_gamma(1.0 + (total + d) / p);
    log.exp()
}

fn unit(d: usize, j: usize) -> Vec<u32> {
    let mut e = vec![0; d];
    e[j] = 1;
    e
}

fn ln_factorial(k: u32) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// ∫_S x^alpha via barycentric expansion: with x = Σ_j λ_j v_j,
/// ∫_S λ^beta = d! |S| ∏ beta_j! / (|beta| + d)!.
fn simplex_moment(vertices: &[Vec<f64>], alpha: &[u32]) -> Result<f64> {
    let d = alpha.len();
    let vol = crate::geometry::simplex_volume(vertices)?;
    let mut poly = SparsePoly::constant(d + 1, 1.0);
    for (k, &e) in alpha.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let mut lin = SparsePoly::zero(d + 1);
        for (j, v) in vertices.iter().enumerate() {
            lin.add_term(unit(d + 1, j), v[k]);
        }
        for _ in 0..e {
            poly = poly.mul(&lin);
        }
    }
    let ln_dfact = ln_factorial(d as u32);
    let mut s = 0.0;
    for (beta, c) in poly.terms.iter() {
        if *c == 0.0 {
            continue;
        }
        let total: u32 = beta.iter().sum();
        let log = ln_dfact + beta.iter().map(|&b| ln_factorial(b)).sum::<f64>() - ln_factorial(total + d as u32);
        s += c * log.exp();
    }
    Ok(vol * s)
}

/// Randomized QMC estimate of a moment with the batch standard error.
pub fn sampled_moment(domain: &Domain, alpha: &[u32], samples: usize, seed: u64) -> MomentValue {
    let shifts = 16;
    let per = (samples / shifts).max(1);
    let bb = domain.bounding_box();
    let vol = bb.volume();
    let d = domain.dim();
    let estimates: Vec<f64> = shifted_halton_batches(d, per, shifts, seed)
        .iter()
        .map(|batch| {
            let mut s = 0.0;
            for u in batch {
                let x: Vec<f64> = (0..d)
                    .map(|i| bb.lower[i] + u[i] * (bb.upper[i] - bb.lower[i]))
                    .collect();
                if domain.contains(&x) {
                    s += x.iter().zip(alpha).map(|(v, &a)| v.powi(a as i32)).product::<f64>();
                }
            }
            vol * s / per as f64
        })
        .collect();
    let m = shifts as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
    MomentValue {
        value: mean,
        error: (var / m).sqrt(),
    }
}

/// Sparse multivariate polynomial keyed by exponent vectors.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SparsePoly {
    dim: usize,
    terms: HashMap<Vec<u32>, f64>,
}

impl SparsePoly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: HashMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        if c != 0.0 {
            p.terms.insert(vec![0; dim], c);
        }
        p
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: f64) {
        if c != 0.0 {
            *self.terms.entry(exp).or_insert(0.0) += c;
        }
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AffineMap;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_examples() {
        let i = Domain::interval(-1.0, 1.0).unwrap();
        assert!((exact_moment(&i, &[2]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let disk = Domain::ball_p(2, 2.0).unwrap();
        assert!((exact_moment(&disk, &[2, 0]).unwrap() - PI / 4.0).abs() < 1e-14);
        assert_eq!(exact_moment(&disk, &[1, 0]).unwrap(), 0.0);
        assert!((exact_moment(&disk, &[0, 0]).unwrap() - PI).abs() < 1e-14);
        let cone = Domain::cone_disk();
        assert!((exact_moment(&cone, &[0, 0, 0]).unwrap() - PI / 3.0).abs() < 1e-14);
        // centroid height of a cone is 1/4
        assert!((exact_moment(&cone, &[0, 0, 1]).unwrap() / (PI / 3.0) - 0.25).abs() < 1e-14);
        let hb = Domain::half_ball(3).unwrap();
        assert!((exact_moment(&hb, &[0, 0, 1]).unwrap() - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn disk_moment_against_polar_oracle() {
        // ∫_0^1 ∫_0^{2π} r^{a+b+1} cos^a sin^b dθ dr by Riemann sum in θ (exact
        // for trigonometric polynomials) and the radial closed form
        let disk = Domain::ball_p(2, 2.0).unwrap();
        for (a, b) in [(2u32, 0u32), (4, 2), (0, 6), (2, 2)] {
            let m = 64;
            let ang: f64 = (0..m)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / m as f64;
                    t.cos().powi(a as i32) * t.sin().powi(b as i32)
                })
                .sum::<f64>()
                * 2.0
                * PI
                / m as f64;
            let oracle = ang / (a + b + 2) as f64;
            assert!((exact_moment(&disk, &[a, b]).unwrap() - oracle).abs() < 1e-13);
        }
    }

    #[test]
    fn simplex_moments() {
        let tri = Domain::simplex(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        // ∫ x^a y^b over the unit triangle = a! b! / (a+b+2)!
        assert!((exact_moment(&tri, &[0, 0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((exact_moment(&tri, &[1, 0]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((exact_moment(&tri, &[2, 1]).unwrap() - 2.0 / 120.0).abs() < 1e-15);
        // cross-polytope through p = 1 equals the union of its orthant simplices
        let oct = Domain::ball_p(2, 1.0).unwrap();
        let quads: Vec<Vec<Vec<f64>>> = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
            .iter()
            .map(|&(sx, sy)| vec![vec![0.0, 0.0], vec![sx, 0.0], vec![0.0, sy]])
            .collect();
        let union = Domain::simplex_union(quads, true).unwrap();
        for alpha in [[0u32, 0u32], [2, 0], [2, 4], [6, 2], [1, 2]] {
            let a = exact_moment(&oct, &alpha).unwrap();
            let b = exact_moment(&union, &alpha).unwrap();
            assert!((a - b).abs() < 1e-14, "{alpha:?}");
        }
    }

    #[test]
    fn affine_moments_by_expansion() {
        let t = AffineMap::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]], &[1.0, -1.0]).unwrap();
        let img = Domain::affine(t, Domain::cube(2).unwrap()).unwrap();
        // image is [-1,3] x [-4,2]
        let rect = Domain::product(vec![
            Domain::interval(-1.0, 3.0).unwrap(),
            Domain::interval(-4.0, 2.0).unwrap(),
        ])
        .unwrap();
        for alpha in [[0u32, 0u32], [1, 0], [3, 2], [4, 5]] {
            let a = exact_moment(&img, &alpha).unwrap();
            let b = exact_moment(&rect, &alpha).unwrap();
            assert!((a - b).abs() < 1e-11 * b.abs().max(1.0), "{alpha:?} {a} {b}");
        }
        assert!(matches!(exact_moment(&img, &[40, 30]), Err(Error::Capacity { .. })));
    }

    #[test]
    fn engine_caches_and_checks_modes() {
        let e = MomentEngine::new(Domain::cube(2).unwrap(), MomentMode::GaussBox).unwrap();
        assert!((e.moment(&[0, 0]).unwrap().value - 4.0).abs() < 1e-15);
        assert!(e.moment(&[0]).is_err());
        assert!(MomentEngine::new(Domain::ball_p(2, 2.0).unwrap(), MomentMode::GaussBox).is_err());
        assert!(MomentEngine::new(Domain::cube(2).unwrap(), MomentMode::MappedExact).is_err());
        let s = MomentEngine::new(
            Domain::ball_p(2, 2.0).unwrap(),
            MomentMode::Sampled {
                samples: 1 << 16,
                seed: 5,
            },
        )
        .unwrap();
        let v = s.moment(&[2, 0]).unwrap();
        assert!((v.value - PI / 4.0).abs() < 5.0 * v.error + 1e-4, "{v:?}");
    }
}
