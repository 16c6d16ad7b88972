//! Special points and maps: the extension point, cone inscriptions into
//! lp-balls and the half-ball map.

use nalgebra::{DMatrix, DVector};

use super::AffineMap;
use crate::{Error, Result};

/// v = (1 + n^-2 / 3, 0, ..., 0), just outside the unit ball.
pub fn extension_point(n: usize, d: usize) -> Result<Vec<f64>> {
    if n == 0 || d == 0 {
        return Err(Error::OutOfRange("extension point needs n, d >= 1".into()));
    }
    let mut v = vec![0.0; d];
    v[0] = 1.0 + 1.0 / (3.0 * (n * n) as f64);
    Ok(v)
}

/// Rotation (det +1) taking (-1, 0, ..., 0) to the unit vector `u`, as a
/// product of two Householder reflections.
pub fn householder_rotation(u: &[f64]) -> Result<DMatrix<f64>> {
    let d = u.len();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if d == 0 || (norm - 1.0).abs() > 1e-10 {
        return Err(Error::OutOfRange("rotation target must be a unit vector".into()));
    }
    let u = DVector::from_column_slice(u);
    let mut from = DVector::zeros(d);
    from[0] = -1.0;
    let v = &from - &u;
    if v.norm() < 1e-14 {
        return Ok(DMatrix::identity(d, d));
    }
    if d == 1 {
        return Err(Error::OutOfRange("no rotation of the line maps -1 to 1".into()));
    }
    let v = v.normalize();
    let h1 = DMatrix::identity(d, d) - 2.0 * &v * v.transpose();
    // second mirror contains u, so it restores orientation and keeps u fixed
    let k = (0..d)
        .min_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap())
        .unwrap();
    let mut w = DVector::zeros(d);
    w[k] = 1.0;
    w -= &u * u[k];
    let w = w.normalize();
    let h2 = DMatrix::identity(d, d) - 2.0 * &w * w.transpose();
    Ok(h2 * h1)
}

/// T(z) = x + A2 A1 (z - v_n) with A1 = diag(alpha/3, mu, ..., mu),
/// mu = beta / sqrt(6) n^(1 - 2s), and A2 a rotation sending (-1,0,...,0) to `u`.
pub fn cone_inscription_map(x: &[f64], u: &[f64], alpha: f64, beta: f64, s: f64, n: usize) -> Result<AffineMap> {
    let d = x.len();
    if u.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.len(),
        });
    }
    if !(0.5..=1.0).contains(&s) {
        return Err(Error::OutOfRange(format!("s must lie in [1/2, 1], got {s}")));
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::OutOfRange("alpha and beta must be positive".into()));
    }
    let v = extension_point(n, d)?;
    let mu = beta / 6f64.sqrt() * (n as f64).powf(1.0 - 2.0 * s);
    let mut a1 = DMatrix::identity(d, d) * mu;
    a1[(0, 0)] = alpha / 3.0;
    let a = householder_rotation(u)? * a1;
    let xv = DVector::from_column_slice(x);
    let offset = xv - &a * DVector::from_column_slice(&v);
    AffineMap::new(a, offset)
}

/// Cone constants for the lp-ball, 1 < p <= 2: gamma1 = d^(p-1),
/// beta = 2 (13 d gamma1)^(-1/2), alpha = (beta / (2 gamma1))^(p/(p-1)).
pub fn lp_cone_constants(d: usize, p: f64) -> Result<(f64, f64)> {
    if d < 2 {
        return Err(Error::OutOfRange("cone constants need d >= 2".into()));
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::OutOfRange(format!("cone constants need 1 < p <= 2, got {p}")));
    }
    let df = d as f64;
    let gamma1 = df.powf(p - 1.0);
    let beta = 2.0 / (13.0 * df * gamma1).sqrt();
    let alpha = (beta / gamma1 / 2.0).powf(p / (p - 1.0));
    Ok((alpha, beta))
}

/// Unit outward normal of the lp-sphere at a boundary point `x`.
pub fn lp_outward_normal(x: &[f64], p: f64) -> Result<Vec<f64>> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::OutOfRange(format!("normal needs 1 < p < inf, got {p}")));
    }
    let g: Vec<f64> = x.iter().map(|v| v.signum() * v.abs().powf(p - 1.0)).collect();
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::OutOfRange("normal undefined at the origin".into()));
    }
    Ok(g.into_iter().map(|v| v / norm).collect())
}

/// The map of the three-dimensional half-ball construction:
/// T(x) = (1 - (c - x1)/2, x2/8, x3/(10 n) + (c - x1)/8), c = 1 + n^-2/3.
pub fn half_ball_map(n: usize) -> Result<AffineMap> {
    if n == 0 {
        return Err(Error::OutOfRange("half-ball map needs n >= 1".into()));
    }
    let nf = n as f64;
    let c = 1.0 + 1.0 / (3.0 * nf * nf);
    let rows = [vec![0.5, 0.0, 0.0], vec![0.0, 0.125, 0.0], vec![-0.125, 0.0, 0.1 / nf]];
    AffineMap::from_rows(&rows, &[1.0 - 0.5 * c, 0.0, 0.125 * c])
}
