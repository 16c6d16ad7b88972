//! Univariate special functions: Legendre and Jacobi polynomials, Gauss
//! rules, the width function rho_n, localized kernel polynomials and the
//! lacunary trigonometric fixture.

mod gauss;
mod kernel;

pub use gauss::{gauss_jacobi, gauss_jacobi_unit, gauss_legendre, tanh_sinh_unit, GaussRule, TanhSinhRule};
pub use kernel::{chebyshev_partition, chebyshev_zeros, KernelPolynomial};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Returns `(P_k(x), P_{k-1}(x))` for the classical Legendre polynomials.
pub(crate) fn legendre_pair(k: usize, x: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let (mut prev, mut cur) = (1.0, x);
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Classical Legendre polynomial P_k(x), P_k(1) = 1.
pub fn legendre(k: usize, x: f64) -> f64 {
    legendre_pair(k, x).0
}

/// L2[-1,1]-orthonormal Legendre polynomial of degree k.
pub fn legendre_normalized(k: usize, x: f64) -> f64 {
    legendre(k, x) * ((2.0 * k as f64 + 1.0) / 2.0).sqrt()
}

/// Orthonormal Legendre values of degrees `0..=n` at `x` written into `out`.
pub fn legendre_normalized_all(n: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() > n);
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..=n {
        out[k] = cur * ((2.0 * k as f64 + 1.0) / 2.0).sqrt();
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
}

/// Jacobi parameters, both strictly greater than -1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::OutOfRange(format!(
                "Jacobi parameters must exceed -1, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Classical (non-normalized) Jacobi polynomial P_m^{(alpha,beta)}(x) by the
/// three-term recurrence. Valid for any real x.
pub fn jacobi_at(params: JacobiParams, m: usize, x: f64) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    if m == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    for k in 2..=m {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let c0 = 2.0 * kf * (kf + a + b) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c2 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * s;
        let next = (c1 * cur - c2 * prev) / c0;
        prev = cur;
        cur = next;
    }
    cur
}

/// Weighted L2 norm of P_m^{(alpha,beta)} for the weight (1-x)^alpha (1+x)^beta.
pub fn jacobi_norm(params: JacobiParams, m: usize) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    let mf = m as f64;
    let log_h = if m == 0 {
        (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)
    } else {
        (a + b + 1.0) * std::f64::consts::LN_2 - (2.0 * mf + a + b + 1.0).ln()
            + ln_gamma(mf + a + 1.0)
            + ln_gamma(mf + b + 1.0)
            - ln_gamma(mf + a + b + 1.0)
            - ln_gamma(mf + 1.0)
    };
    (0.5 * log_h).exp()
}

/// Closed-form value at x = -1: (-1)^m Γ(m+1+beta) / (Γ(m+1) Γ(1+beta)).
pub fn jacobi_at_minus_one(params: JacobiParams, m: usize) -> f64 {
    let mf = m as f64;
    let b = params.beta;
    let mag = (ln_gamma(mf + 1.0 + b) - ln_gamma(mf + 1.0) - ln_gamma(1.0 + b)).exp();
    if m % 2 == 0 {
        mag
    } else {
        -mag
    }
}

/// rho_n(x) = 1/n^2 + sqrt(1 - x^2)/n.
pub fn rho(n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::OutOfRange("rho needs n >= 1".into()));
    }
    if !(x.abs() <= 1.0) {
        return Err(Error::OutOfRange(format!("rho needs |x| <= 1, got {x}")));
    }
    let nf = n as f64;
    Ok(1.0 / (nf * nf) + (1.0 - x * x).max(0.0).sqrt() / nf)
}

/// Largest n accepted by [`lacunary_l4`].
pub const LACUNARY_MAX_TERMS: usize = 16;

/// Fourth power of the normalized L4 norm of sum_{k=1}^n exp(i 2^k x) on the
/// circle, by the trapezoid rule on 2^{n+3} points (exact for this
/// trigonometric polynomial).
pub fn lacunary_l4(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::OutOfRange("lacunary fixture needs n >= 1".into()));
    }
    if n > LACUNARY_MAX_TERMS {
        return Err(Error::Capacity {
            what: "lacunary terms",
            requested: n,
            cap: LACUNARY_MAX_TERMS,
        });
    }
    let grid: u64 = 1 << (n + 3);
    let step = 2.0 * PI / grid as f64;
    let mut acc = 0.0;
    for i in 0..grid {
        let (mut re, mut im) = (0.0, 0.0);
        for k in 1..=n {
            // phase index reduced exactly before taking the angle
            let phase = (i << k) % grid;
            let angle = step * phase as f64;
            re += angle.cos();
            im += angle.sin();
        }
        let m2 = re * re + im * im;
        acc += m2 * m2;
    }
    Ok(acc / grid as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_legendre_values() {
        assert!((legendre_normalized(0, 0.3) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((legendre_normalized(1, 1.0) - 1.5f64.sqrt()).abs() < 1e-15);
        for k in 0..=50 {
            let expect = ((2 * k + 1) as f64 / 2.0).sqrt();
            assert!((legendre_normalized(k, 1.0) - expect).abs() < 1e-13 * expect);
        }
        let mut all = [0.0; 9];
        legendre_normalized_all(8, -0.37, &mut all);
        for (k, v) in all.iter().enumerate() {
            assert!((v - legendre_normalized(k, -0.37)).abs() < 1e-14);
        }
    }

    #[test]
    fn legendre_orthonormality() {
        let rule = gauss_legendre(41);
        for i in 0..=40 {
            for j in 0..=40 {
                let v = rule.integrate(|x| legendre_normalized(i, x) * legendre_normalized(j, x));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12, "{i} {j} {v}");
            }
        }
    }

    #[test]
    fn jacobi_examples() {
        let p = JacobiParams::new(0.0, 1.0).unwrap();
        assert!((jacobi_at(p, 4, -1.0).abs() - 5.0).abs() < 1e-12);
        let p = JacobiParams::new(0.0, 0.5).unwrap();
        // Γ(3.5)/(Γ(3)Γ(1.5)) = (15/8 √π)/(2 · √π/2)
        assert!((jacobi_at(p, 2, -1.0).abs() - 15.0 / 8.0).abs() < 1e-13);
        let p = JacobiParams::new(0.7, -0.3).unwrap();
        assert_eq!(jacobi_at(p, 0, 0.4), 1.0);
        assert!(JacobiParams::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn jacobi_endpoint_identity() {
        for beta in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let p = JacobiParams::new(0.0, beta).unwrap();
            for m in 0..=30 {
                let rec = jacobi_at(p, m, -1.0);
                let closed = jacobi_at_minus_one(p, m);
                assert!((rec - closed).abs() <= 1e-10 * closed.abs(), "beta={beta} m={m}");
            }
        }
    }

    #[test]
    fn jacobi_norm_matches_quadrature() {
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.5, 0.5), (-0.5, -0.5)] {
            let p = JacobiParams::new(a, b).unwrap();
            let rule = gauss_jacobi(30, p);
            for m in [0, 1, 5, 12] {
                let quad = rule.integrate(|x| jacobi_at(p, m, x).powi(2)).sqrt();
                assert!((quad - jacobi_norm(p, m)).abs() < 1e-12 * quad, "{a} {b} {m}");
            }
        }
    }

    #[test]
    fn rho_values() {
        assert!((rho(7, 1.0).unwrap() - 1.0 / 49.0).abs() < 1e-16);
        assert!((rho(7, 0.0).unwrap() - (1.0 / 49.0 + 1.0 / 7.0)).abs() < 1e-16);
        assert!((rho(3, 0.6).unwrap() - (1.0 / 9.0 + 0.8 / 3.0)).abs() < 1e-15);
        assert!(rho(3, 1.2).is_err());
        assert!(rho(0, 0.0).is_err());
    }

    #[test]
    fn lacunary_identity() {
        assert!((lacunary_l4(1).unwrap() - 1.0).abs() < 1e-12);
        assert!((lacunary_l4(2).unwrap() - 6.0).abs() < 1e-12);
        assert!((lacunary_l4(5).unwrap() - 45.0).abs() < 1e-10);
        for n in 1..=10 {
            let expect = (2 * n * n - n) as f64;
            assert!((lacunary_l4(n).unwrap() - expect).abs() < 1e-8);
        }
        assert!(matches!(lacunary_l4(17), Err(Error::Capacity { .. })));
    }
}
