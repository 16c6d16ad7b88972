//! Positive-weight cubature rules on catalogue domains.
//!
//! Every rule below integrates polynomials of the requested total degree
//! exactly, except for lp-balls with p outside {1, 2, inf} (nested tanh-sinh,
//! converged to rounding level rather than exact) and the randomized QMC rule.

use crate::geometry::Domain;
use crate::orthopoly::{gauss_jacobi, gauss_jacobi_unit, gauss_legendre, tanh_sinh_unit, JacobiParams};
use crate::sampling::shifted_halton_batches;
use crate::{Error, Result};

/// Nodes and weights of a cubature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Exact for the requested degree (or converged to rounding level).
    pub exact: bool,
    /// For randomized rules: number of equally sized, contiguous batches.
    pub batches: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    /// Integral with a standard error from batch spread (zero for
    /// deterministic rules).
    pub fn integrate_with_error(&self, f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
        if self.batches <= 1 {
            return (self.integrate(f), 0.0);
        }
        let per = self.len() / self.batches;
        let m = self.batches as f64;
        let est: Vec<f64> = (0..self.batches)
            .map(|b| {
                (b * per..(b + 1) * per)
                    .map(|i| self.weights[i] * f(&self.points[i]))
                    .sum::<f64>()
                    * m
            })
            .collect();
        let mean = est.iter().sum::<f64>() / m;
        let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (mean, (var / m).sqrt())
    }

    fn from_parts(parts: Vec<(Vec<f64>, f64)>, exact: bool) -> Self {
        let (points, weights) = parts.into_iter().unzip();
        Self {
            points,
            weights,
            exact,
            batches: 1,
        }
    }
}

type Parts = Vec<(Vec<f64>, f64)>;

/// Rule on `domain` integrating polynomials of total degree `degree`.
pub fn domain_rule(domain: &Domain, degree: usize) -> Result<QuadRule> {
    let (parts, exact) = rule_parts(domain, degree)?;
    Ok(QuadRule::from_parts(parts, exact))
}

fn rule_parts(domain: &Domain, degree: usize) -> Result<(Parts, bool)> {
    let q = degree / 2 + 1;
    Ok(match domain {
        Domain::Interval { a, b } => (line(*a, *b, q), true),
        Domain::Cube { dim } => (tensor_power(&line(-1.0, 1.0, q), *dim), true),
        Domain::BallP { dim, p } => {
            if p.is_infinite() {
                (tensor_power(&line(-1.0, 1.0, q), *dim), true)
            } else if *p == 2.0 {
                (euclidean_ball(*dim, q), true)
            } else if *p == 1.0 {
                let mut parts = Vec::new();
                for mask in 0..(1usize << dim) {
                    let mut verts = vec![vec![0.0; *dim]];
                    for i in 0..*dim {
                        let mut v = vec![0.0; *dim];
                        v[i] = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                        verts.push(v);
                    }
                    parts.extend(simplex_rule(&verts, q));
                }
                (parts, true)
            } else {
                (lp_ball(*dim, *p, q, degree), false)
            }
        }
        Domain::Simplex { vertices } => (simplex_rule(vertices, q), true),
        Domain::SimplexUnion { simplices, .. } => (simplices.iter().flat_map(|s| simplex_rule(s, q)).collect(), true),
        Domain::HalfBall { dim } => (half_ball(*dim, degree), true),
        Domain::ConeDisk => {
            let z = gauss_jacobi_unit(q, JacobiParams::new(2.0, 0.0)?);
            let disk = euclidean_ball(2, q);
            let mut parts = Vec::with_capacity(z.len() * disk.len());
            for (zi, wz) in z.nodes.iter().zip(&z.weights) {
                let s = 1.0 - zi;
                for (y, wy) in &disk {
                    parts.push((vec![s * y[0], s * y[1], *zi], wz * wy));
                }
            }
            (parts, true)
        }
        Domain::Product { factors } => {
            let mut acc: Parts = vec![(Vec::new(), 1.0)];
            let mut exact = true;
            for f in factors {
                let (parts, e) = rule_parts(f, degree)?;
                exact &= e;
                acc = product(&acc, &parts);
            }
            (acc, exact)
        }
        Domain::Affine { map, base } => {
            let (parts, exact) = rule_parts(base, degree)?;
            let det = map.determinant().abs();
            (
                parts.into_iter().map(|(x, w)| (map.apply(&x), w * det)).collect(),
                exact,
            )
        }
    })
}

/// Randomized QMC rule: `samples` shifted Halton points of the bounding box
/// (16 shifts), restricted to the domain. Weights make each batch an
/// unbiased estimator of the integral.
pub fn sampled_rule(domain: &Domain, samples: usize, seed: u64) -> Result<QuadRule> {
    if samples < 64 {
        return Err(Error::OutOfRange("sampled rule needs at least 64 samples".into()));
    }
    let shifts = 16;
    let per = samples / shifts;
    let bb = domain.bounding_box();
    let vol = bb.volume();
    let d = domain.dim();
    let w = vol / (per * shifts) as f64;
    let mut points = Vec::with_capacity(per * shifts);
    let mut weights = Vec::with_capacity(per * shifts);
    for batch in shifted_halton_batches(d, per, shifts, seed) {
        for u in batch {
            let x: Vec<f64> = (0..d)
                .map(|i| bb.lower[i] + u[i] * (bb.upper[i] - bb.lower[i]))
                .collect();
            // points outside keep a zero weight so batches stay aligned
            let inside = domain.contains(&x);
            points.push(x);
            weights.push(if inside { w } else { 0.0 });
        }
    }
    Ok(QuadRule {
        points,
        weights,
        exact: false,
        batches: shifts,
    })
}

fn line(a: f64, b: f64, q: usize) -> Parts {
    let r = gauss_legendre(q).mapped(a, b);
    r.nodes.iter().zip(&r.weights).map(|(x, w)| (vec![*x], *w)).collect()
}

fn product(a: &Parts, b: &Parts) -> Parts {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (x, wx) in a {
        for (y, wy) in b {
            let mut p = x.clone();
            p.extend_from_slice(y);
            out.push((p, wx * wy));
        }
    }
    out
}

fn tensor_power(rule: &Parts, d: usize) -> Parts {
    let mut acc: Parts = vec![(Vec::new(), 1.0)];
    for _ in 0..d {
        acc = product(&acc, rule);
    }
    acc
}

// B_2^d by peeling x_1: weight (1 - x_1^2)^{(d-1)/2}, inner ball scaled by
// sqrt(1 - x_1^2). Only even powers of the scale survive, so each level is
// polynomial in x_1.
fn euclidean_ball(d: usize, q: usize) -> Parts {
    if d == 1 {
        return line(-1.0, 1.0, q);
    }
    let h = (d as f64 - 1.0) / 2.0;
    let outer = gauss_jacobi(q, JacobiParams::new(h, h).expect("valid parameters"));
    let inner = euclidean_ball(d - 1, q);
    let mut out = Vec::with_capacity(outer.len() * inner.len());
    for (x, wx) in outer.nodes.iter().zip(&outer.weights) {
        let s = (1.0 - x * x).max(0.0).sqrt();
        for (y, wy) in &inner {
            let mut p = Vec::with_capacity(d);
            p.push(*x);
            p.extend(y.iter().map(|v| s * v));
            out.push((p, wx * wy));
        }
    }
    out
}

// Collapsed (Duffy) coordinates t_1 = u_1, t_k = u_k ∏_{i<k}(1 - u_i) with
// Gauss-Jacobi weights (1 - u_k)^{d-k}.
fn simplex_rule(vertices: &[Vec<f64>], q: usize) -> Parts {
    let d = vertices.len() - 1;
    let rules: Vec<_> = (1..=d)
        .map(|k| gauss_jacobi_unit(q, JacobiParams::new((d - k) as f64, 0.0).expect("valid parameters")))
        .collect();
    let det = crate::geometry::simplex_volume(vertices).expect("validated simplex")
        * (1..=d).map(|k| k as f64).product::<f64>();
    let mut out = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let mut t = vec![0.0; d];
        let mut rest = 1.0;
        let mut w = det;
        for k in 0..d {
            let u = rules[k].nodes[idx[k]];
            t[k] = rest * u;
            rest *= 1.0 - u;
            w *= rules[k].weights[idx[k]];
        }
        let x: Vec<f64> = (0..d)
            .map(|i| {
                vertices[0][i]
                    + (0..d)
                        .map(|k| t[k] * (vertices[k + 1][i] - vertices[0][i]))
                        .sum::<f64>()
            })
            .collect();
        out.push((x, w));
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            idx[k] += 1;
            if idx[k] < q {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

// Half-ball {|x| <= 1, x_d >= 0}: last coordinate on [0, 1] with weight
// (1 - x_d^2)^{(d-1)/2}. For odd d the weight is a polynomial; for even d
// the (1 - t)^{(d-1)/2} factor goes into a Jacobi rule and the smooth
// (1 + t)^{(d-1)/2} factor is resolved with extra nodes.
fn half_ball(d: usize, degree: usize) -> Parts {
    let q = degree / 2 + 1;
    if d == 1 {
        return line(0.0, 1.0, q);
    }
    let h = (d as f64 - 1.0) / 2.0;
    let outer: Vec<(f64, f64)> = if d % 2 == 1 {
        let r = gauss_legendre((degree + d - 1) / 2 + 1).mapped(0.0, 1.0);
        r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(t, w)| (*t, w * (1.0 - t * t).powf(h)))
            .collect()
    } else {
        let r = gauss_jacobi_unit(q + 20, JacobiParams::new(h, 0.0).expect("valid parameters"));
        r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(t, w)| (*t, w * (1.0 + t).powf(h)))
            .collect()
    };
    let inner = euclidean_ball(d - 1, q);
    let mut out = Vec::with_capacity(outer.len() * inner.len());
    for (t, wt) in outer {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (y, wy) in &inner {
            let mut p: Vec<f64> = y.iter().map(|v| s * v).collect();
            p.push(t);
            out.push((p, wt * wy));
        }
    }
    out
}

/// Step of the tanh-sinh rule used for lp-balls at a given degree.
fn lp_step(degree: usize) -> f64 {
    1.0 / (12.0 + degree as f64 / 2.0)
}

// General lp-ball by peeling x_1 over [-1, 1] split at 0, weight
// (1 - |x_1|^p)^{(d-1)/p}, inner ball scaled by (1 - |x_1|^p)^{1/p}.
fn lp_ball(d: usize, p: f64, q: usize, degree: usize) -> Parts {
    if d == 1 {
        return line(-1.0, 1.0, q);
    }
    let ts = tanh_sinh_unit(lp_step(degree));
    let inner = lp_ball(d - 1, p, q, degree);
    let mut out = Vec::with_capacity(2 * ts.nodes.len() * inner.len());
    for ((t, tc), w) in ts.nodes.iter().zip(&ts.complements).zip(&ts.weights) {
        // 1 - t^p without cancellation near t = 1
        let rem = if *t > 0.5 {
            -(p * (-tc).ln_1p()).exp_m1()
        } else {
            1.0 - t.powf(p)
        };
        let s = rem.max(0.0).powf(1.0 / p);
        let wt = w * s.powi(d as i32 - 1);
        for sign in [1.0, -1.0] {
            for (y, wy) in &inner {
                let mut pt = Vec::with_capacity(d);
                pt.push(sign * t);
                pt.extend(y.iter().map(|v| s * v));
                out.push((pt, wt * wy));
            }
        }
    }
    out
}
