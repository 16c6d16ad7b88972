//! Graded multi-index sets and evaluation of the monomial and tensor-Legendre
//! bases of the total-degree space P_n in d variables.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::orthopoly::legendre_normalized_all;
use crate::{Error, Result};

/// Hard cap on the number of basis functions (dense N x N factorizations).
pub const DEFAULT_MAX_BASIS: usize = 20_000;

/// Exact binomial coefficient, saturating at `usize::MAX`.
pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Exponent vectors of total degree at most `degree`, graded and then
/// lexicographically ordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    degree: usize,
    indices: Vec<Vec<u32>>,
}

impl MultiIndexSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn get(&self, k: usize) -> &[u32] {
        &self.indices[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.indices.iter().map(|v| v.as_slice())
    }

    /// Position lookup table; built on demand.
    pub fn position_map(&self) -> HashMap<Vec<u32>, usize> {
        self.indices.iter().enumerate().map(|(k, a)| (a.clone(), k)).collect()
    }
}

/// Graded-lex enumeration with the default cap.
pub fn enumerate_indices(dim: usize, degree: usize) -> Result<MultiIndexSet> {
    enumerate_indices_capped(dim, degree, DEFAULT_MAX_BASIS)
}

pub fn enumerate_indices_capped(dim: usize, degree: usize, cap: usize) -> Result<MultiIndexSet> {
    if dim == 0 {
        return Err(Error::OutOfRange("dimension must be at least 1".into()));
    }
    let count = binomial(degree + dim, dim);
    if count > cap {
        return Err(Error::Capacity {
            what: "basis size",
            requested: count,
            cap,
        });
    }
    let mut indices = Vec::with_capacity(count);
    for grade in 0..=degree {
        let mut current = vec![0u32; dim];
        push_grade(&mut indices, &mut current, 0, grade as u32);
    }
    debug_assert_eq!(indices.len(), count);
    Ok(MultiIndexSet { dim, degree, indices })
}

// Fills exponents slot by slot; ascending choice in each slot yields
// lexicographic order within the grade.
fn push_grade(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, slot: usize, remaining: u32) {
    let last = current.len() - 1;
    if slot == last {
        current[slot] = remaining;
        out.push(current.clone());
        return;
    }
    for e in 0..=remaining {
        current[slot] = e;
        push_grade(out, current, slot + 1, remaining - e);
    }
    current[slot] = 0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Monomial,
    #[default]
    TensorLegendre,
}

/// Axis-aligned box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(a, b)| !(b - a > 0.0) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::OutOfRange("bounding box needs positive finite sides".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn symmetric(dim: usize) -> Self {
        Self {
            lower: vec![-1.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| *v >= a - tol && *v <= b + tol)
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a.min(*b)).collect(),
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

/// Basis of P_n: kind, box used by the tensor-Legendre kind, and index set.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub bbox: BoundingBox,
    pub indices: MultiIndexSet,
}

impl BasisSpec {
    pub fn new(kind: BasisKind, bbox: BoundingBox, indices: MultiIndexSet) -> Result<Self> {
        if bbox.dim() != indices.dim() {
            return Err(Error::DimensionMismatch {
                expected: indices.dim(),
                found: bbox.dim(),
            });
        }
        Ok(Self { kind, bbox, indices })
    }

    pub fn dim(&self) -> usize {
        self.indices.dim()
    }

    pub fn degree(&self) -> usize {
        self.indices.degree()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Evaluates every basis function at `x` into `out` (length N).
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let n = self.degree();
        debug_assert_eq!(x.len(), d);
        debug_assert_eq!(out.len(), self.len());
        // per-axis univariate tables, row-major d x (n+1)
        let mut table = vec![0.0; d * (n + 1)];
        for i in 0..d {
            let row = &mut table[i * (n + 1)..(i + 1) * (n + 1)];
            match self.kind {
                BasisKind::Monomial => {
                    let mut p = 1.0;
                    for v in row.iter_mut() {
                        *v = p;
                        p *= x[i];
                    }
                }
                BasisKind::TensorLegendre => {
                    let (a, b) = (self.bbox.lower[i], self.bbox.upper[i]);
                    let t = (2.0 * x[i] - a - b) / (b - a);
                    legendre_normalized_all(n, t, row);
                    let scale = (2.0 / (b - a)).sqrt();
                    row.iter_mut().for_each(|v| *v *= scale);
                }
            }
        }
        for (k, alpha) in self.indices.iter().enumerate() {
            let mut v = 1.0;
            for (i, &e) in alpha.iter().enumerate() {
                v *= table[i * (n + 1) + e as usize];
            }
            out[k] = v;
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }
}

/// Batch evaluation: row i holds the basis at `points[i]`.
pub fn eval_basis(spec: &BasisSpec, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = spec.len();
    let mut m = DMatrix::zeros(points.len(), n);
    let mut row = vec![0.0; n];
    for (i, p) in points.iter().enumerate() {
        if p.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: p.len(),
            });
        }
        spec.eval_into(p, &mut row);
        for (k, v) in row.iter().enumerate() {
            m[(i, k)] = *v;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::gauss_legendre;

    #[test]
    fn graded_lex_order_in_two_variables() {
        let set = enumerate_indices(2, 2).unwrap();
        let expected: Vec<Vec<u32>> = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]];
        assert_eq!(set.indices(), expected.as_slice());
    }

    #[test]
    fn counts_match_brute_force() {
        assert_eq!(enumerate_indices(1, 5).unwrap().len(), 6);
        let mut brute = 0;
        for a in 0..=10 {
            for b in 0..=10 {
                for c in 0..=10 {
                    if a + b + c <= 10 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(brute, 286);
        assert_eq!(enumerate_indices(3, 10).unwrap().len(), brute);
        for d in 1..=4 {
            for n in 0..=12 {
                let set = enumerate_indices(d, n).unwrap();
                assert_eq!(set.len(), binomial(n + d, d));
                let mut seen = std::collections::HashSet::new();
                let mut prev: Option<&[u32]> = None;
                for a in set.iter() {
                    assert!(seen.insert(a.to_vec()));
                    if let Some(p) = prev {
                        let (gp, ga): (u32, u32) = (p.iter().sum(), a.iter().sum());
                        assert!(gp < ga || (gp == ga && p < a));
                    }
                    prev = Some(a);
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_indices(4, 40).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        assert!(enumerate_indices(0, 3).is_err());
    }

    #[test]
    fn monomial_and_legendre_values() {
        let mono = BasisSpec::new(
            BasisKind::Monomial,
            BoundingBox::symmetric(1),
            enumerate_indices(1, 2).unwrap(),
        )
        .unwrap();
        assert_eq!(mono.eval(&[2.0]), vec![1.0, 2.0, 4.0]);

        let leg = BasisSpec::new(
            BasisKind::TensorLegendre,
            BoundingBox::symmetric(1),
            enumerate_indices(1, 1).unwrap(),
        )
        .unwrap();
        let v = leg.eval(&[1.0]);
        assert!((v[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((v[1] - 1.5f64.sqrt()).abs() < 1e-15);

        let bbox = BoundingBox::new(vec![0.0, -2.0, 1.0], vec![3.0, 2.0, 1.5]).unwrap();
        let spec = BasisSpec::new(BasisKind::TensorLegendre, bbox, enumerate_indices(3, 3).unwrap()).unwrap();
        let c = spec.eval(&[0.3, 7.0, -4.0])[0];
        let expect = (3.0f64 * 4.0 * 0.5).powf(-0.5);
        assert!((c - expect).abs() < 1e-15);
    }

    #[test]
    fn legendre_gram_on_own_box_is_identity() {
        let n = 7;
        let bbox = BoundingBox::new(vec![-0.5, 1.0], vec![2.0, 4.0]).unwrap();
        let spec = BasisSpec::new(
            BasisKind::TensorLegendre,
            bbox.clone(),
            enumerate_indices(2, n).unwrap(),
        )
        .unwrap();
        let rule = gauss_legendre(n + 1);
        let len = spec.len();
        let mut g = DMatrix::<f64>::zeros(len, len);
        for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
            for (yj, wj) in rule.nodes.iter().zip(&rule.weights) {
                let x = [
                    0.5 * (bbox.lower[0] + bbox.upper[0]) + 0.5 * (bbox.upper[0] - bbox.lower[0]) * xi,
                    0.5 * (bbox.lower[1] + bbox.upper[1]) + 0.5 * (bbox.upper[1] - bbox.lower[1]) * yj,
                ];
                let w = wi * wj * bbox.volume() / 4.0;
                let b = spec.eval(&x);
                for k in 0..len {
                    for l in 0..len {
                        g[(k, l)] += w * b[k] * b[l];
                    }
                }
            }
        }
        let err = (g - DMatrix::<f64>::identity(len, len)).abs().max();
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn change_of_basis_is_fixed_matrix() {
        // Fit the monomial -> Legendre map on N generic points, check on fresh points.
        let n = 4;
        let bbox = BoundingBox::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let idx = enumerate_indices(2, n).unwrap();
        let mono = BasisSpec::new(BasisKind::Monomial, bbox.clone(), idx.clone()).unwrap();
        let leg = BasisSpec::new(BasisKind::TensorLegendre, bbox, idx).unwrap();
        let len = mono.len();
        let pts: Vec<Vec<f64>> = crate::sampling::halton_points(2, len, 7)
            .into_iter()
            .map(|u| vec![2.0 * u[0] - 1.0, 2.0 * u[1]])
            .collect();
        let m = eval_basis(&mono, &pts).unwrap();
        let l = eval_basis(&leg, &pts).unwrap();
        let map = m.clone().lu().solve(&l).unwrap();
        let fresh: Vec<Vec<f64>> = crate::sampling::halton_points(2, 20, 1000)
            .into_iter()
            .map(|u| vec![2.0 * u[0] - 1.0, 2.0 * u[1]])
            .collect();
        let mf = eval_basis(&mono, &fresh).unwrap();
        let lf = eval_basis(&leg, &fresh).unwrap();
        let pred = mf * map;
        let rel = (&pred - &lf).norm() / lf.norm();
        assert!(rel < 1e-9, "{rel}");
    }
}
