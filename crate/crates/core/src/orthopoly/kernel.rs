use std::f64::consts::PI;

use serde::Serialize;

use super::rho;
use crate::{Error, Result};

/// Chebyshev partition x_j = cos(j pi / k), j = 0..=k (decreasing).
pub fn chebyshev_partition(k: usize) -> Vec<f64> {
    (0..=k).map(|j| (j as f64 * PI / k as f64).cos()).collect()
}

/// Zeros of T_k, x~_j = cos((j - 1/2) pi / k) for j = 1..=k; entry j-1 lies
/// in the cell [x_j, x_{j-1}].
pub fn chebyshev_zeros(k: usize) -> Vec<f64> {
    (1..=k).map(|j| ((j as f64 - 0.5) * PI / k as f64).cos()).collect()
}

/// Polynomial of degree at most n that equals 1 at `y` and decays like
/// (rho_n(y) / (rho_n(y) + |x - y|))^m away from it:
/// P(x) = (t_j(x) / t_j(y))^m with t_j(x) = T_k(x) / (x - x~_j) (x_{j-1} - x_j).
#[derive(Debug, Clone, Serialize)]
pub struct KernelPolynomial {
    n: usize,
    m: usize,
    y: f64,
    k: usize,
    j: usize,
    cell: (f64, f64),
    zeros: Vec<f64>,
    anchor: f64,
}

impl KernelPolynomial {
    pub fn new(n: usize, m: usize, y: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::OutOfRange("kernel polynomial needs n, m >= 1".into()));
        }
        if !(y.abs() <= 1.0) {
            return Err(Error::OutOfRange(format!("anchor must lie in [-1, 1], got {y}")));
        }
        let k = n / m + 1;
        let partition = chebyshev_partition(k);
        // smallest j with y in [x_j, x_{j-1}]; shared endpoints go to the smaller j
        let j = (1..=k).find(|&j| y >= partition[j]).unwrap_or(k);
        let zeros = chebyshev_zeros(k);
        let mut poly = Self {
            n,
            m,
            y,
            k,
            j,
            cell: (partition[j], partition[j - 1]),
            zeros,
            anchor: 1.0,
        };
        poly.anchor = poly.t(y);
        Ok(poly)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Internal Chebyshev degree floor(n/m) + 1.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Cell index j with y in [x_j, x_{j-1}].
    pub fn cell_index(&self) -> usize {
        self.j
    }

    /// The cell [x_j, x_{j-1}] as `(left, right)`.
    pub fn cell(&self) -> (f64, f64) {
        self.cell
    }

    /// Algebraic degree (k - 1) m.
    pub fn degree(&self) -> usize {
        (self.k - 1) * self.m
    }

    /// t_j(x), evaluated in product form 2^{k-1} prod_{i != j} (x - x~_i) to
    /// avoid the removable singularity at x~_j.
    pub fn t(&self, x: f64) -> f64 {
        let width = self.cell.1 - self.cell.0;
        let mut v = width;
        if self.k > 1 {
            for (i, z) in self.zeros.iter().enumerate() {
                if i + 1 != self.j {
                    v *= 2.0 * (x - z);
                }
            }
        }
        v
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.t(x) / self.anchor).powi(self.m as i32)
    }

    /// Empirical constant in |P(x)| <= c (rho_n(y) / (rho_n(y) + |x - y|))^m,
    /// maximized over `samples` equispaced points of [-1, 1].
    pub fn decay_constant(&self, samples: usize) -> f64 {
        let r = rho(self.n, self.y).expect("anchor validated at construction");
        let samples = samples.max(2);
        (0..samples)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
                let ratio = (r + (x - self.y).abs()) / r;
                self.eval(x).abs() * ratio.powi(self.m as i32)
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::gauss_legendre;

    #[test]
    fn unit_value_at_anchor() {
        for n in [1, 2, 7, 30, 100] {
            for m in [1, 2, 3, 5] {
                for y in [-1.0, -0.93, -0.2, 0.0, 0.5, 0.999, 1.0] {
                    let p = KernelPolynomial::new(n, m, y).unwrap();
                    assert!((p.eval(y) - 1.0).abs() < 1e-13);
                    assert!(p.degree() <= n);
                }
            }
        }
    }

    #[test]
    fn product_form_matches_trig_form() {
        let p = KernelPolynomial::new(20, 2, 0.31).unwrap();
        let k = p.k() as f64;
        let z = p.zeros[p.cell_index() - 1];
        let width = p.cell().1 - p.cell().0;
        for x in [-0.9, -0.1, 0.2, 0.77] {
            let tk = (k * f64::acos(x)).cos();
            let direct = tk / (x - z) * width;
            assert!((direct - p.t(x)).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn ties_go_to_smaller_cell() {
        let k = 5;
        let part = chebyshev_partition(k);
        // n = 4, m = 1 gives k = 5
        let p = KernelPolynomial::new(4, 1, part[2]).unwrap();
        assert_eq!(p.k(), k);
        assert_eq!(p.cell_index(), 2);
    }

    #[test]
    fn degree_probe_by_interpolation() {
        // Interpolate at many Chebyshev points; leading Legendre coefficients
        // above the stated degree must vanish.
        for (n, m, y) in [(9, 2, 0.3), (12, 3, -0.8), (15, 1, 1.0)] {
            let p = KernelPolynomial::new(n, m, y).unwrap();
            let rule = gauss_legendre(n + 10);
            for deg in (n + 1)..(n + 8) {
                let c = rule.integrate(|x| p.eval(x) * crate::orthopoly::legendre_normalized(deg, x));
                assert!(c.abs() < 1e-10, "n={n} m={m} deg={deg} c={c}");
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(KernelPolynomial::new(0, 1, 0.0).is_err());
        assert!(KernelPolynomial::new(3, 0, 0.0).is_err());
        assert!(KernelPolynomial::new(3, 1, 1.5).is_err());
    }
}
