//! Lower and upper bound certificates for C(P_n, D, x).
//!
//! Lower certificates carry a rigorous numeric bound |Q(x)|^2 / ||Q||_2^2
//! for an explicit polynomial Q (rigorous up to cubature rounding). Upper
//! certificates carry a growth rate and the verified geometric premise;
//! their constants are not known explicitly.

use serde::Serialize;

use crate::christoffel::{maximize, SearchConfig};
use crate::geometry::{cone_inscription_map, extension_point, lp_cone_constants, lp_outward_normal, AffineMap, Domain};
use crate::moments::domain_rule;
use crate::orthopoly::{gauss_legendre, rho, KernelPolynomial};
use crate::sampling::ball_points;
use crate::{Error, Result};

/// Quasi-uniform points used to check T(B) inside D: sphere and interior.
const BALL_SPHERE_SAMPLES: usize = 2_000;
const BALL_INTERIOR_SAMPLES: usize = 8_000;
/// Window for the log-log slope of the section function near its start.
pub const LAMBDA_WINDOW: (f64, f64) = (1e-4, 1e-2);
pub const LAMBDA_MIN_R2: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    LowerTensor,
    LowerParallelSection,
    UpperInscribedEllipsoid,
    UpperCone,
}

/// c * scale * n^exponent with c unknown; `value` is scale * n^exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rate {
    pub exponent: f64,
    pub scale: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PremiseCheck {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaFit {
    pub lambda: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    /// R^2 cleared the threshold.
    pub detected: bool,
    /// lambda < m - 1, so the power-law rate applies for this m.
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// Q(x) = prod_i P_{n~,1,y_i}((T^{-1} x)_i).
    Tensor {
        rows: Vec<Vec<f64>>,
        offset: Vec<f64>,
        anchors: Vec<f64>,
        factor_degree: usize,
    },
    /// Q(x) = P_{n,m,1}(1 - (x . xi - h) / b).
    Ridge {
        xi: Vec<f64>,
        h: f64,
        b: f64,
        n: usize,
        m: usize,
    },
    /// The inscribed ellipsoid T(B_2^d).
    Map {
        rows: Vec<Vec<f64>>,
        offset: Vec<f64>,
        det: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub point: Vec<f64>,
    pub degree: usize,
    /// Numeric lower bound on C(P_n, D, point) (lower kinds).
    pub bound: Option<f64>,
    pub rate: Option<Rate>,
    /// (int_0^{n^-2} A + n^{-2m} int_{n^-2} A t^{-m})^{-1}, parallel sections only.
    pub section_rate: Option<f64>,
    pub lambda: Option<LambdaFit>,
    pub witness: Witness,
    pub checks: Vec<PremiseCheck>,
    pub verified: bool,
}

fn finish(mut c: Certificate) -> Certificate {
    c.verified = c.checks.iter().all(|k| k.passed);
    c
}

fn map_witness(map: &AffineMap) -> Witness {
    Witness::Map {
        rows: map.rows(),
        offset: map.offset().iter().copied().collect(),
        det: map.determinant(),
    }
}

/// Checks T(B_2^d) inside D on 10^4 quasi-uniform points of the ball.
pub fn ellipsoid_containment(domain: &Domain, map: &AffineMap) -> Result<PremiseCheck> {
    let d = domain.dim();
    if map.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: map.dim(),
        });
    }
    let pts = ball_points(d, BALL_SPHERE_SAMPLES, BALL_INTERIOR_SAMPLES);
    let failures = pts.iter().filter(|z| !domain.contains(&map.apply(z))).count();
    Ok(PremiseCheck {
        name: "ellipsoid inside domain".into(),
        passed: failures == 0,
        samples: pts.len(),
        failures,
    })
}

/// Checks D inside T([-1,1]^d) on boundary candidates and interior samples.
pub fn box_containment(domain: &Domain, map: &AffineMap) -> Result<PremiseCheck> {
    let d = domain.dim();
    if map.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: map.dim(),
        });
    }
    let mut pts: Vec<Vec<f64>> = domain.boundary_candidates(1024)?.all().cloned().collect();
    pts.extend(domain.interior_samples(4096, 7));
    let failures = pts
        .iter()
        .filter(|x| map.apply_inverse(x).iter().any(|v| v.abs() > 1.0 + 1e-9))
        .count();
    Ok(PremiseCheck {
        name: "domain inside mapped cube".into(),
        passed: failures == 0,
        samples: pts.len(),
        failures,
    })
}

fn point_check(domain: &Domain, x: &[f64]) -> PremiseCheck {
    let ok = domain.contains(x);
    PremiseCheck {
        name: "point in domain".into(),
        passed: ok,
        samples: 1,
        failures: usize::from(!ok),
    }
}

/// Tensor product of kernel polynomials of degree floor(n/d) anchored at y,
/// pulled back through T. D must lie in T([-1,1]^d) and T y in D for the
/// rate; the numeric bound at T y holds regardless.
pub fn tensor_lower_certificate(domain: &Domain, map: &AffineMap, y: &[f64], n: usize) -> Result<Certificate> {
    let d = domain.dim();
    if y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: y.len(),
        });
    }
    if y.iter().any(|v| !(v.abs() <= 1.0)) {
        return Err(Error::OutOfRange("anchor must lie in [-1, 1]^d".into()));
    }
    let point = map.apply(y);
    let nt = n / d;
    let factors: Vec<KernelPolynomial> = if nt == 0 {
        Vec::new()
    } else {
        y.iter()
            .map(|&yi| KernelPolynomial::new(nt, 1, yi))
            .collect::<Result<_>>()?
    };
    let q = |x: &[f64]| -> f64 {
        let z = map.apply_inverse(x);
        factors.iter().zip(&z).map(|(p, zi)| p.eval(*zi)).product()
    };
    let rule = domain_rule(domain, 2 * d * nt)?;
    let norm2 = rule.integrate(|x| q(x).powi(2));
    let at = q(&point);
    let checks = vec![box_containment(domain, map)?, point_check(domain, &point)];
    let det = map.determinant().abs();
    // |det T|^{-1} prod rho_n(y_i)^{-1}
    let value: f64 = y.iter().map(|&v| 1.0 / rho(n.max(1), v).unwrap()).product::<f64>() / det;
    let exponent = anchor_exponent(y);
    Ok(finish(Certificate {
        kind: CertificateKind::LowerTensor,
        point,
        degree: n,
        bound: Some(at * at / norm2),
        rate: Some(Rate {
            exponent,
            scale: value / (n.max(1) as f64).powf(exponent),
            value,
        }),
        section_rate: None,
        lambda: None,
        witness: Witness::Tensor {
            rows: map.rows(),
            offset: map.offset().iter().copied().collect(),
            anchors: y.to_vec(),
            factor_degree: nt,
        },
        checks,
        verified: false,
    }))
}

// rho_n(y)^{-1} grows like n^2 at y = +-1 and like n inside.
fn anchor_exponent(y: &[f64]) -> f64 {
    y.iter().map(|v| if v.abs() == 1.0 { 2.0 } else { 1.0 }).sum()
}

/// Ridge polynomial Q(x) = P_{n,m,1}(1 - (x . xi - h)/b) touching D where
/// x . xi is smallest, plus the section-function rate and a power-law
/// estimate of A(t) near t = 0.
pub fn parallel_section_lower(domain: &Domain, xi: &[f64], n: usize, m: usize) -> Result<Certificate> {
    let d = domain.dim();
    if xi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: xi.len(),
        });
    }
    let len = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (len - 1.0).abs() > 1e-12 {
        return Err(Error::OutOfRange("direction must be a unit vector".into()));
    }
    if n == 0 || m == 0 {
        return Err(Error::OutOfRange("need n, m >= 1".into()));
    }
    let h = domain.section_offset(xi);
    let width = domain.width(xi);
    let b = 0.5 * width;
    let p = KernelPolynomial::new(n, m, 1.0)?;
    let dot = |x: &[f64]| -> f64 { x.iter().zip(xi).map(|(a, c)| a * c).sum() };
    let q = |x: &[f64]| -> f64 { p.eval(1.0 - (dot(x) - h) / b) };
    let neg = |x: &[f64]| -> f64 { -dot(x) };
    let point = maximize(domain, &neg, &SearchConfig::default())?.argmax;
    let rule = domain_rule(domain, 2 * p.degree())?;
    let norm2 = rule.integrate(|x| q(x).powi(2));
    let at = q(&point);

    let area = |t: f64| domain.parallel_section(xi, t, 11).map(|s| s.value);
    let nf = n as f64;
    let split = (nf * nf).recip().min(width);
    // int_0^split A(t) dt with t = split v^2
    let gl = gauss_legendre(48);
    let mut i1 = 0.0;
    for (v, w) in gl.nodes.iter().zip(&gl.weights) {
        let v = 0.5 * (v + 1.0);
        i1 += 0.5 * w * area(split * v * v)? * 2.0 * split * v;
    }
    let i2 = if split < width {
        nf.powi(-2 * m as i32) * tail_integral(&area, split, width, m)?
    } else {
        0.0
    };
    let lambda = fit_lambda(&area, m)?;
    let rate = lambda.detected.then(|| {
        let e = 2.0 * (1.0 + lambda.lambda);
        Rate {
            exponent: e,
            scale: 1.0,
            value: nf.powf(e),
        }
    });
    let checks = vec![PremiseCheck {
        name: "touching point on supporting hyperplane".into(),
        passed: (dot(&point) - h).abs() <= 1e-6 * (1.0 + width),
        samples: 1,
        failures: usize::from((dot(&point) - h).abs() > 1e-6 * (1.0 + width)),
    }];
    Ok(finish(Certificate {
        kind: CertificateKind::LowerParallelSection,
        point,
        degree: n,
        bound: Some(at * at / norm2),
        rate,
        section_rate: Some(1.0 / (i1 + i2)),
        lambda: Some(lambda),
        witness: Witness::Ridge {
            xi: xi.to_vec(),
            h,
            b,
            n,
            m,
        },
        checks,
        verified: false,
    }))
}

// int_a^b A(t) t^{-m} dt in u = ln t on doubling panel counts until two
// successive sums agree to 1e-10 relative.
fn tail_integral(area: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, m: usize) -> Result<f64> {
    let (ua, ub) = (a.ln(), b.ln());
    let gl = gauss_legendre(16);
    let sum = |panels: usize| -> Result<f64> {
        let h = (ub - ua) / panels as f64;
        let mut s = 0.0;
        for k in 0..panels {
            let lo = ua + k as f64 * h;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let u = lo + 0.5 * h * (x + 1.0);
                let t = u.exp();
                s += 0.5 * h * w * area(t)? * t.powf(1.0 - m as f64);
            }
        }
        Ok(s)
    };
    let mut panels = 4;
    let mut prev = sum(panels)?;
    while panels < 512 {
        panels *= 2;
        let next = sum(panels)?;
        if (next - prev).abs() <= 1e-10 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// Least-squares slope of log A(t) against log t over [1e-4, 1e-2].
pub fn fit_lambda(area: &dyn Fn(f64) -> Result<f64>, m: usize) -> Result<LambdaFit> {
    let k = 25;
    let (a, b) = LAMBDA_WINDOW;
    let mut xs = Vec::with_capacity(k);
    let mut ys = Vec::with_capacity(k);
    for i in 0..k {
        let t = (a.ln() + (b.ln() - a.ln()) * i as f64 / (k - 1) as f64).exp();
        let v = area(t)?;
        if v > 0.0 {
            xs.push(t.ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 3 {
        return Ok(LambdaFit {
            lambda: f64::NAN,
            r_squared: 0.0,
            window: LAMBDA_WINDOW,
            detected: false,
            applicable: false,
        });
    }
    let c = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / c;
    let my = ys.iter().sum::<f64>() / c;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let lambda = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    let detected = r_squared > LAMBDA_MIN_R2;
    Ok(LambdaFit {
        lambda,
        r_squared,
        window: LAMBDA_WINDOW,
        detected,
        applicable: detected && lambda < m as f64 - 1.0,
    })
}

/// Upper rate from an inscribed ellipsoid T(B_2^d) inside D:
/// C(P_n, D, T v_n) <= c |det T|^{-1} n^{d+1}.
pub fn inscribed_upper_certificate(domain: &Domain, map: &AffineMap, n: usize) -> Result<Certificate> {
    let d = domain.dim();
    let check = ellipsoid_containment(domain, map)?;
    let point = map.apply(&extension_point(n.max(1), d)?);
    let scale = 1.0 / map.determinant().abs();
    let exponent = (d + 1) as f64;
    Ok(finish(Certificate {
        kind: CertificateKind::UpperInscribedEllipsoid,
        point,
        degree: n,
        bound: None,
        rate: Some(Rate {
            exponent,
            scale,
            value: scale * (n as f64).powf(exponent),
        }),
        section_rate: None,
        lambda: None,
        witness: map_witness(map),
        checks: vec![check],
        verified: false,
    }))
}

/// Upper rate at a boundary point x of B_p^d (d >= 2, 1 < p <= 2) from the
/// cone inscription with s = 1/p: C(P_n, B_p^d, x) <= c n^{2 + 2(d-1)/p}.
pub fn lp_cone_certificate(d: usize, p: f64, x: &[f64], n: usize) -> Result<Certificate> {
    let domain = Domain::ball_p(d, p)?;
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    let (alpha, beta) = lp_cone_constants(d, p)?;
    let s = 1.0 / p;
    // the map sends (-1, 0, ..., 0) to the inward normal
    let inward: Vec<f64> = lp_outward_normal(x, p)?.iter().map(|v| -v).collect();
    // T(B) reaches depth delta = (alpha/3)(t + n^-2/3) along the normal with
    // lateral extent mu sqrt(2t), so the cone opening must absorb (alpha/3)^s
    let lateral = beta * (alpha / 3.0).powf(s);
    let map = cone_inscription_map(x, &inward, alpha, lateral, s, n.max(1))?;
    let mut checks = vec![ellipsoid_containment(&domain, &map)?];
    let lp: f64 = x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
    checks.push(PremiseCheck {
        name: "point on the sphere".into(),
        passed: (lp - 1.0).abs() < 1e-12,
        samples: 1,
        failures: usize::from((lp - 1.0).abs() >= 1e-12),
    });
    let nf = n.max(1) as f64;
    let value = nf.powi(d as i32 + 1) / map.determinant().abs();
    let exponent = 2.0 + 2.0 * s * (d as f64 - 1.0);
    Ok(finish(Certificate {
        kind: CertificateKind::UpperCone,
        point: x.to_vec(),
        degree: n,
        bound: None,
        rate: Some(Rate {
            exponent,
            scale: value / nf.powf(exponent),
            value,
        }),
        section_rate: None,
        lambda: None,
        witness: map_witness(&map),
        checks,
        verified: false,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisKind;
    use crate::christoffel::ChristoffelEvaluator;
    use crate::geometry::half_ball_map;
    use crate::moments::MomentMode;

    fn christoffel(domain: &Domain, n: usize, x: &[f64]) -> f64 {
        ChristoffelEvaluator::build(domain, n, BasisKind::TensorLegendre, MomentMode::Exact)
            .unwrap()
            .christoffel_at(x)
            .unwrap()
    }

    #[test]
    fn tensor_bound_below_christoffel() {
        let disk = Domain::ball_p(2, 2.0).unwrap();
        for n in [2, 5, 9] {
            let c = tensor_lower_certificate(&disk, &AffineMap::identity(2), &[1.0, 0.0], n).unwrap();
            assert!(c.verified);
            let v = christoffel(&disk, n, &[1.0, 0.0]);
            assert!(c.bound.unwrap() <= v * (1.0 + 1e-9), "{n}: {:?} {v}", c.bound);
        }
        let hb = Domain::half_ball(3).unwrap();
        let t = AffineMap::translation(&[0.0, 0.0, 1.0]);
        let c = tensor_lower_certificate(&hb, &t, &[1.0, 0.0, -1.0], 6).unwrap();
        assert!(c.verified);
        assert_eq!(c.point, vec![1.0, 0.0, 0.0]);
        assert!(c.bound.unwrap() <= christoffel(&hb, 6, &[1.0, 0.0, 0.0]) * (1.0 + 1e-9));
        assert_eq!(c.rate.unwrap().exponent, 5.0);
    }

    #[test]
    fn tensor_premise_fails_for_small_box() {
        let disk = Domain::ball_p(2, 2.0).unwrap();
        let c = tensor_lower_certificate(&disk, &AffineMap::scaling(2, 0.9).unwrap(), &[1.0, 0.0], 4).unwrap();
        assert!(!c.verified);
    }

    #[test]
    fn parallel_section_lambda() {
        for (p, lambda) in [(1.5, 2.0 / 3.0), (2.0, 0.5)] {
            let d = Domain::ball_p(2, p).unwrap();
            let c = parallel_section_lower(&d, &[-1.0, 0.0], 8, 2).unwrap();
            let l = c.lambda.as_ref().unwrap();
            assert!(l.detected && (l.lambda - lambda).abs() < 0.02, "{l:?}");
            assert!((c.rate.unwrap().exponent - 2.0 * (1.0 + lambda)).abs() < 0.04);
            assert!((c.point[0] - 1.0).abs() < 1e-9);
            assert!(c.bound.unwrap() <= christoffel(&d, 8, &c.point) * (1.0 + 1e-9));
            assert!(c.section_rate.unwrap() > 0.0);
        }
    }

    #[test]
    fn half_ball_ellipsoid_rate() {
        let hb = Domain::half_ball(3).unwrap();
        for n in [1, 2, 5, 10, 50] {
            let c = inscribed_upper_certificate(&hb, &half_ball_map(n).unwrap(), n).unwrap();
            assert!(c.verified, "n = {n}");
            let r = c.rate.unwrap();
            let want = 160.0 * (n as f64).powi(5);
            assert!((r.value - want).abs() < 1e-9 * want);
        }
        let big = half_ball_map(5).unwrap();
        let scaled = AffineMap::new(big.matrix() * 1.01, big.offset().clone()).unwrap();
        assert!(!inscribed_upper_certificate(&hb, &scaled, 5).unwrap().verified);
    }

    #[test]
    fn cone_rate_exponent() {
        let c = lp_cone_certificate(2, 1.5, &[1.0, 0.0], 10).unwrap();
        assert!(c.verified, "{:?}", c.checks);
        assert!((c.rate.unwrap().exponent - 10.0 / 3.0).abs() < 1e-12);
        let r5 = lp_cone_certificate(2, 1.5, &[1.0, 0.0], 5).unwrap().rate.unwrap();
        let r10 = c.rate.unwrap();
        assert!((r5.scale - r10.scale).abs() < 1e-9 * r10.scale);
    }
}
