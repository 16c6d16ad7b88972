//! Gram matrices G_kl = ∫_D b_k b_l with a pivoted triangular factor.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::quadrature::{domain_rule, sampled_rule, QuadRule};
use super::{MomentEngine, MomentMode};
use crate::basis::{enumerate_indices_capped, BasisKind, BasisSpec, DEFAULT_MAX_BASIS};
use crate::geometry::Domain;
use crate::linalg::{pivoted_cholesky, pivoted_qr, TriangularFactor};
use crate::{Error, Result};

/// Condition of the working factorization above which a system is
/// degraded: cond(G) on the Cholesky path, cond(R) = cond(G)^{1/2} on the
/// QR path, where rounding scales with the factor and not with G.
pub const DEGRADED_CONDITION: f64 = 1e13;

/// Default degree cap by dimension.
pub fn degree_cap(dim: usize) -> usize {
    match dim {
        1 => 32,
        2 => 24,
        3 => 14,
        4 => 8,
        _ => 6,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramOptions {
    pub max_basis: usize,
    /// Overrides [`degree_cap`].
    pub max_degree: Option<usize>,
    pub degraded_condition: f64,
}

impl Default for GramOptions {
    fn default() -> Self {
        Self {
            max_basis: DEFAULT_MAX_BASIS,
            max_degree: None,
            degraded_condition: DEGRADED_CONDITION,
        }
    }
}

/// A norm estimate. `lower_estimate` marks sup-norms found by search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    pub error: f64,
    pub lower_estimate: bool,
}

#[derive(Debug, Clone)]
pub struct GramSystem {
    basis: BasisSpec,
    gram: DMatrix<f64>,
    factor: TriangularFactor,
    condition: f64,
    degraded: bool,
    domain: Domain,
    mode: MomentMode,
    rule: QuadRule,
}

pub fn assemble_gram(domain: &Domain, n: usize, kind: BasisKind, mode: MomentMode) -> Result<GramSystem> {
    assemble_gram_with(domain, n, kind, mode, &GramOptions::default())
}

pub fn assemble_gram_with(
    domain: &Domain,
    n: usize,
    kind: BasisKind,
    mode: MomentMode,
    opts: &GramOptions,
) -> Result<GramSystem> {
    domain.validate()?;
    mode.check(domain)?;
    let d = domain.dim();
    let cap = opts.max_degree.unwrap_or_else(|| degree_cap(d));
    if n > cap {
        return Err(Error::Capacity {
            what: "degree",
            requested: n,
            cap,
        });
    }
    let indices = enumerate_indices_capped(d, n, opts.max_basis)?;
    let basis = BasisSpec::new(kind, domain.bounding_box(), indices)?;
    let rule = match mode {
        MomentMode::Sampled { samples, seed } => sampled_rule(domain, samples, seed)?,
        _ => domain_rule(domain, 2 * n)?,
    };

    let (gram, factor, qr) = if kind == BasisKind::Monomial && !matches!(mode, MomentMode::Sampled { .. }) {
        let engine = MomentEngine::new(domain.clone(), mode)?;
        let len = basis.len();
        let mut g = DMatrix::zeros(len, len);
        for k in 0..len {
            for l in k..len {
                let alpha: Vec<u32> = basis
                    .indices
                    .get(k)
                    .iter()
                    .zip(basis.indices.get(l))
                    .map(|(a, b)| a + b)
                    .collect();
                let v = engine.moment(&alpha)?.value;
                g[(k, l)] = v;
                g[(l, k)] = v;
            }
        }
        let f = pivoted_cholesky(&g);
        (g, f, false)
    } else {
        let cols = weighted_columns(&basis, &rule);
        let len = cols.len();
        let entries: Vec<Vec<f64>> = (0..len)
            .into_par_iter()
            .map(|k| {
                (0..len)
                    .map(|l| cols[k].iter().zip(&cols[l]).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect();
        let g = DMatrix::from_fn(len, len, |i, j| if i <= j { entries[i][j] } else { entries[j][i] });
        (g, pivoted_qr(cols), true)
    };
    let condition = factor.condition_estimate();
    let working = if qr { condition.sqrt() } else { condition };
    let degraded = factor.clamped > 0 || !(working <= opts.degraded_condition);
    Ok(GramSystem {
        basis,
        gram,
        factor,
        condition,
        degraded,
        domain: domain.clone(),
        mode,
        rule,
    })
}

// Columns sqrt(w_i) b_k(x_i), padded with zero rows to at least N rows.
fn weighted_columns(basis: &BasisSpec, rule: &QuadRule) -> Vec<Vec<f64>> {
    let len = basis.len();
    let rows: Vec<Vec<f64>> = rule
        .points
        .par_iter()
        .zip(rule.weights.par_iter())
        .filter(|(_, w)| **w > 0.0)
        .map(|(x, w)| {
            let s = w.sqrt();
            let mut b = basis.eval(x);
            b.iter_mut().for_each(|v| *v *= s);
            b
        })
        .collect();
    let m = rows.len().max(len);
    let mut cols = vec![vec![0.0; m]; len];
    for (i, row) in rows.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            cols[k][i] = *v;
        }
    }
    cols
}

impl GramSystem {
    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mode(&self) -> MomentMode {
        self.mode
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn is_degraded(&self) -> bool {
        self.degraded
    }

    /// The cubature rule the system was built with (also used for norms).
    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    /// Lower-triangular L with G[perm, perm] = L L^T.
    pub fn factor_lower(&self) -> DMatrix<f64> {
        self.factor.lower()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.factor.perm
    }

    /// Relative Frobenius error of the factor against G.
    pub fn reconstruction_error(&self) -> f64 {
        (self.factor.reconstruct() - &self.gram).norm() / self.gram.norm()
    }

    /// b^T G^{-1} b through one triangular solve.
    pub fn inverse_quadratic_form(&self, b: &[f64]) -> f64 {
        self.factor.solve_transposed(b).iter().map(|v| v * v).sum()
    }

    /// b_1^T G^{-1} b_2.
    pub fn inverse_bilinear_form(&self, b1: &[f64], b2: &[f64]) -> f64 {
        let y1 = self.factor.solve_transposed(b1);
        let y2 = self.factor.solve_transposed(b2);
        y1.iter().zip(&y2).map(|(a, b)| a * b).sum()
    }

    /// G^{-1} b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.factor.solve(b)
    }

    /// Value of the polynomial with coefficients `coeffs` at `x`.
    pub fn eval_poly(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        self.basis.eval(x).iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    /// a^T G a, evaluated through the factor as |R P^T a|^2.
    pub fn norm2_squared(&self, coeffs: &[f64]) -> f64 {
        self.factor.apply(coeffs).iter().map(|v| v * v).sum()
    }

    /// L_q(D) norm of a polynomial in this basis: q = 2 from the Gram form,
    /// other finite q by cubature, q = inf by boundary and interior search
    /// (a lower estimate).
    pub fn l_norm(&self, coeffs: &[f64], q: f64) -> Result<NormValue> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        if !(q > 0.0) {
            return Err(Error::OutOfRange(format!("norm exponent must be positive, got {q}")));
        }
        if q == 2.0 {
            return Ok(NormValue {
                value: self.norm2_squared(coeffs).max(0.0).sqrt(),
                error: 0.0,
                lower_estimate: false,
            });
        }
        if q.is_infinite() {
            let cfg = crate::christoffel::SearchConfig::default();
            let f = |x: &[f64]| self.eval_poly(coeffs, x).abs();
            let report = crate::christoffel::maximize(&self.domain, &f, &cfg)?;
            return Ok(NormValue {
                value: report.value,
                error: 0.0,
                lower_estimate: true,
            });
        }
        let rule = match self.mode {
            MomentMode::Sampled { samples, seed } => sampled_rule(&self.domain, samples, seed)?,
            _ => {
                let deg = ((q * self.degree() as f64).ceil() as usize).max(2 * self.degree()) + 16;
                domain_rule(&self.domain, deg)?
            }
        };
        let (integral, err) = rule.integrate_with_error(|x| self.eval_poly(coeffs, x).abs().powf(q));
        let value = integral.max(0.0).powf(1.0 / q);
        // first-order propagation of the integral's standard error
        let error = if integral > 0.0 {
            value * err / (q * integral)
        } else {
            0.0
        };
        Ok(NormValue {
            value,
            error,
            lower_estimate: false,
        })
    }

    /// Row-major CSV of G, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.gram.nrows() {
            let row: Vec<String> = (0..self.gram.ncols())
                .map(|j| format!("{:.16e}", self.gram[(i, j)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
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
    fn interval_legendre_gram_is_identity() {
        let g = assemble_gram(
            &Domain::interval(-1.0, 1.0).unwrap(),
            1,
            BasisKind::TensorLegendre,
            MomentMode::Exact,
        )
        .unwrap();
        let err = (g.gram() - DMatrix::<f64>::identity(2, 2)).abs().max();
        assert!(err < 1e-15);
        assert!(!g.is_degraded());
    }

    #[test]
    fn disk_monomial_gram() {
        let g = assemble_gram(
            &Domain::ball_p(2, 2.0).unwrap(),
            1,
            BasisKind::Monomial,
            MomentMode::Exact,
        )
        .unwrap();
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![PI, PI / 4.0, PI / 4.0]));
        assert!((g.gram() - expect).abs().max() < 1e-14);
    }

    #[test]
    fn affine_scaling_of_gram() {
        // pulling the base basis back through T^{-1} scales G by |det T|
        let t = AffineMap::from_rows(&[vec![1.5, 0.3], vec![-0.2, 0.5]], &[0.4, -1.0]).unwrap();
        let base = Domain::cube(2).unwrap();
        let img = Domain::affine(t.clone(), base.clone()).unwrap();
        let gb = assemble_gram(&base, 3, BasisKind::TensorLegendre, MomentMode::Exact).unwrap();
        let rule = domain_rule(&img, 6).unwrap();
        let len = gb.len();
        let mut g = DMatrix::<f64>::zeros(len, len);
        for (y, w) in rule.points.iter().zip(&rule.weights) {
            let b = gb.basis().eval(&t.apply_inverse(y));
            for k in 0..len {
                for l in 0..len {
                    g[(k, l)] += w * b[k] * b[l];
                }
            }
        }
        let scaled = gb.gram() * t.determinant().abs();
        assert!((g - scaled).abs().max() < 1e-13);
    }

    #[test]
    fn factor_reproduces_gram() {
        for dom in [
            Domain::ball_p(2, 2.0).unwrap(),
            Domain::cone_disk(),
            Domain::half_ball(3).unwrap(),
        ] {
            let g = assemble_gram(&dom, 6, BasisKind::TensorLegendre, MomentMode::Exact).unwrap();
            let n = g.len() as f64;
            assert!(g.reconstruction_error() < n * 1e-12);
            let asym = (g.gram() - g.gram().transpose()).abs().max() / g.gram().abs().max();
            assert!(asym < 1e-14);
        }
    }

    #[test]
    fn norms() {
        let dom = Domain::ball_p(2, 2.0).unwrap();
        let g = assemble_gram(&dom, 4, BasisKind::TensorLegendre, MomentMode::Exact).unwrap();
        // constant polynomial c: coefficient of b_0 = c / b_0
        let b0 = g.basis().eval(&[0.0, 0.0])[0];
        let mut coeffs = vec![0.0; g.len()];
        coeffs[0] = 3.0 / b0;
        let v = g.l_norm(&coeffs, 2.0).unwrap();
        assert!((v.value - 3.0 * PI.sqrt()).abs() < 1e-12);
        let v1 = g.l_norm(&coeffs, 1.0).unwrap();
        assert!((v1.value - 3.0 * PI).abs() < 1e-10);
        let vi = g.l_norm(&coeffs, f64::INFINITY).unwrap();
        assert!(vi.lower_estimate && (vi.value - 3.0).abs() < 1e-12);
        assert!(g.l_norm(&coeffs[1..], 2.0).is_err());
    }

    #[test]
    fn degree_cap_and_csv() {
        let err = assemble_gram(
            &Domain::cube(2).unwrap(),
            25,
            BasisKind::TensorLegendre,
            MomentMode::Exact,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        let g = assemble_gram(
            &Domain::interval(0.0, 1.0).unwrap(),
            1,
            BasisKind::Monomial,
            MomentMode::Exact,
        )
        .unwrap();
        let csv = g.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("1.0000000000000000e0,5.0000000000000000e-1"));
    }
}
