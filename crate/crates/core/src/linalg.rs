//! Dense factorizations used by the Gram machinery: Householder QR with
//! column-norm pivoting, diagonally pivoted Cholesky and triangular solves.
//!
//! Both factorizations produce an upper-triangular R and a permutation with
//! G[perm, perm] = R^T R.

use nalgebra::DMatrix;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub(crate) struct TriangularFactor {
    /// Upper-triangular, column-major: `cols[j][i]` is R_{ij} for i <= j.
    pub cols: Vec<Vec<f64>>,
    pub perm: Vec<usize>,
    /// Diagonal entries replaced because they fell below the rank threshold.
    pub clamped: usize,
}

impl TriangularFactor {
    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.cols[j][j]).collect()
    }

    /// (max |r_jj| / min |r_jj|)^2, the pivot-ratio estimate of cond(G).
    pub fn condition_estimate(&self) -> f64 {
        let d = self.diag();
        let max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min == 0.0 {
            f64::INFINITY
        } else {
            (max / min).powi(2)
        }
    }

    /// Solves R^T y = P^T b (b in the original ordering).
    pub fn solve_transposed(&self, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let col = &self.cols[i];
            let mut s = b[self.perm[i]];
            for k in 0..i {
                s -= col[k] * y[k];
            }
            y[i] = s / col[i];
        }
        y
    }

    /// Solves R z = y and scatters back: returns x with G x = b when
    /// y = R^{-T} P^T b.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut z = y.to_vec();
        for i in (0..n).rev() {
            z[i] /= self.cols[i][i];
            let zi = z[i];
            let col = &self.cols[i];
            for k in 0..i {
                z[k] -= col[k] * zi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    /// G^{-1} b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_transposed(b))
    }

    /// R P^T a, so that a^T G a = |R P^T a|^2.
    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut z = vec![0.0; n];
        for j in 0..n {
            let aj = a[self.perm[j]];
            for (zi, r) in z.iter_mut().zip(&self.cols[j]) {
                *zi += r * aj;
            }
        }
        z
    }

    /// Lower factor L = R^T with G[perm, perm] = L L^T.
    pub fn lower(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| if j <= i { self.cols[i][j] } else { 0.0 })
    }

    /// Reassembles G from the factor (original ordering).
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let s: f64 = (0..=a).map(|k| self.cols[a][k] * self.cols[b][k]).sum();
                g[(self.perm[a], self.perm[b])] = s;
                g[(self.perm[b], self.perm[a])] = s;
            }
        }
        g
    }
}

/// Householder QR of the m x n matrix given by its columns (m >= n) with
/// column pivoting on the largest remaining norm. Returns the R factor.
pub(crate) fn pivoted_qr(mut cols: Vec<Vec<f64>>) -> TriangularFactor {
    let n = cols.len();
    let m = cols.first().map(|c| c.len()).unwrap_or(0);
    assert!(m >= n, "QR needs at least as many rows as columns");
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let reference = norms.clone();
    let top = reference.iter().fold(0.0f64, |a, b| a.max(*b));
    let mut clamped = 0;
    for j in 0..n {
        // refresh downdated norms that lost accuracy
        for c in j..n {
            if norms[c] <= 1e-8 * reference[c].max(f64::MIN_POSITIVE) {
                norms[c] = cols[c][j..].iter().map(|v| v * v).sum();
            }
        }
        let p = (j..n)
            .max_by(|&a, &b| norms[a].partial_cmp(&norms[b]).unwrap().then(b.cmp(&a)))
            .unwrap();
        if p != j {
            cols.swap(p, j);
            perm.swap(p, j);
            norms.swap(p, j);
        }
        let x = &cols[j][j..];
        let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if xnorm <= f64::EPSILON * top.sqrt() * n as f64 {
            clamped += 1;
            let floor = f64::EPSILON * top.sqrt().max(f64::MIN_POSITIVE);
            cols[j][j] = floor;
            for v in cols[j][j + 1..].iter_mut() {
                *v = 0.0;
            }
            continue;
        }
        let alpha = if x[0] > 0.0 { -xnorm } else { xnorm };
        let mut v: Vec<f64> = x.to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|a| a * a).sum();
        if vv > 0.0 {
            let scale = 2.0 / vv;
            cols[j + 1..].par_iter_mut().for_each(|col| {
                let seg = &mut col[j..];
                let s: f64 = seg.iter().zip(&v).map(|(a, b)| a * b).sum();
                let f = s * scale;
                seg.iter_mut().zip(&v).for_each(|(a, b)| *a -= f * b);
            });
        }
        cols[j][j] = alpha;
        for val in cols[j][j + 1..].iter_mut() {
            *val = 0.0;
        }
        for c in (j + 1)..n {
            norms[c] = (norms[c] - cols[c][j] * cols[c][j]).max(0.0);
        }
    }
    for (j, col) in cols.iter_mut().enumerate() {
        col.truncate(j + 1);
    }
    TriangularFactor { cols, perm, clamped }
}

/// Cholesky with diagonal pivoting of a symmetric matrix. Pivots below
/// `n * eps * max pivot` are clamped to that threshold and counted.
pub(crate) fn pivoted_cholesky(g: &DMatrix<f64>) -> TriangularFactor {
    let n = g.nrows();
    let mut a = g.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(g[(i, i)]));
    let threshold = n as f64 * f64::EPSILON * max_diag.max(f64::MIN_POSITIVE);
    let mut clamped = 0;
    // rows of R in the working (permuted) ordering
    let mut r = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let p = (j..n)
            .max_by(|&x, &y| a[(x, x)].partial_cmp(&a[(y, y)]).unwrap().then(y.cmp(&x)))
            .unwrap();
        if p != j {
            a.swap_rows(p, j);
            a.swap_columns(p, j);
            perm.swap(p, j);
            r.swap_columns(p, j);
        }
        let mut pivot = a[(j, j)];
        if !(pivot > threshold) {
            clamped += 1;
            pivot = threshold;
        }
        let rjj = pivot.sqrt();
        r[(j, j)] = rjj;
        for c in (j + 1)..n {
            r[(j, c)] = a[(j, c)] / rjj;
        }
        for c in (j + 1)..n {
            for k in c..n {
                let v = a[(c, k)] - r[(j, c)] * r[(j, k)];
                a[(c, k)] = v;
                a[(k, c)] = v;
            }
        }
    }
    let cols = (0..n).map(|j| (0..=j).map(|i| r[(i, j)]).collect()).collect();
    TriangularFactor { cols, perm, clamped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cols(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    fn gram_of(cols: &[Vec<f64>]) -> DMatrix<f64> {
        let n = cols.len();
        DMatrix::from_fn(n, n, |i, j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum())
    }

    #[test]
    fn qr_reproduces_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cols = random_cols(&mut rng, 40, 12);
        let g = gram_of(&cols);
        let f = pivoted_qr(cols);
        assert_eq!(f.clamped, 0);
        let err = (f.reconstruct() - &g).norm() / g.norm();
        assert!(err < 1e-14, "{err}");
        let d = f.diag();
        assert!(d.windows(2).all(|w| w[0].abs() >= w[1].abs() * (1.0 - 1e-12)));
    }

    #[test]
    fn solves_match_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cols = random_cols(&mut rng, 30, 9);
        let g = gram_of(&cols);
        let b: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dense = g.clone().try_inverse().unwrap() * nalgebra::DVector::from_column_slice(&b);
        for f in [pivoted_qr(cols), pivoted_cholesky(&g)] {
            let x = f.solve(&b);
            for i in 0..9 {
                assert!((x[i] - dense[i]).abs() < 1e-10 * dense.amax());
            }
            let y = f.solve_transposed(&b);
            let back = f.apply(&x);
            assert!(back
                .iter()
                .zip(&y)
                .all(|(u, v)| (u - v).abs() < 1e-10 * (1.0 + v.abs())));
            let quad: f64 = y.iter().map(|v| v * v).sum();
            let direct: f64 = b.iter().zip(&x).map(|(a, c)| a * c).sum();
            assert!((quad - direct).abs() < 1e-12 * direct.abs());
        }
    }

    #[test]
    fn cholesky_flags_singular_input() {
        let v = [1.0, 2.0, 3.0];
        let g = DMatrix::from_fn(3, 3, |i, j| v[i] * v[j]);
        let f = pivoted_cholesky(&g);
        assert_eq!(f.clamped, 2);
        assert!(f.condition_estimate() > 1e13);
        let lower = f.lower();
        assert!(lower[(0, 1)] == 0.0);
    }
}
