//! Gaussian and double-exponential quadrature rules on [-1, 1] and [0, 1].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::{gamma, ln_gamma};

use super::{jacobi_at, legendre_pair, JacobiParams};

/// Nodes (ascending) and positive weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    /// Affine transplant from [-1, 1] onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> GaussRule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        GaussRule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }
}

const MAX_NEWTON: usize = 100;

fn legendre_cache() -> &'static RwLock<HashMap<usize, Arc<GaussRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// q-point Gauss-Legendre rule on [-1, 1], exact through degree 2q-1.
///
/// Rules are cached after first construction.
pub fn gauss_legendre(q: usize) -> Arc<GaussRule> {
    assert!(q >= 1, "rule size must be positive");
    if let Some(rule) = legendre_cache().read().unwrap().get(&q) {
        return rule.clone();
    }
    let rule = Arc::new(build_gauss_legendre(q));
    legendre_cache().write().unwrap().entry(q).or_insert(rule).clone()
}

fn build_gauss_legendre(q: usize) -> GaussRule {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let half = q.div_ceil(2);
    for i in 0..half {
        // Tricomi-type initial guess, roots numbered from the right end
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..MAX_NEWTON {
            let (p, pm1) = legendre_pair(q, x);
            dp = q as f64 * (pm1 - x * p) / (1.0 - x * x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (p, pm1) = legendre_pair(q, x);
                dp = q as f64 * (pm1 - x * p) / (1.0 - x * x);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[q - 1 - i] = x;
        nodes[i] = -x;
        weights[q - 1 - i] = w;
        weights[i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// q-point Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1].
///
/// Golub-Welsch eigenvalues seed a Newton polish on the classical Jacobi
/// polynomial; weights use the closed-form Christoffel numbers.
pub fn gauss_jacobi(q: usize, params: JacobiParams) -> GaussRule {
    assert!(q >= 1, "rule size must be positive");
    let (a, b) = (params.alpha(), params.beta());
    if a == 0.0 && b == 0.0 {
        return (*gauss_legendre(q)).clone();
    }
    let mut jm = DMatrix::<f64>::zeros(q, q);
    for k in 0..q {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        jm[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < q {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + a + b;
            let beta2 = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b) / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0))
            };
            let off = beta2.sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let mut guesses: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().copied().collect();
    guesses.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let shifted = JacobiParams::new(a + 1.0, b + 1.0).expect("shifted parameters stay valid");
    let qf = q as f64;
    let deriv = |x: f64| 0.5 * (qf + a + b + 1.0) * jacobi_at(shifted, q - 1, x);
    let log_const = ln_gamma(qf + a + 1.0) + ln_gamma(qf + b + 1.0) - ln_gamma(qf + a + b + 1.0) - ln_gamma(qf + 1.0)
        + (a + b + 1.0) * std::f64::consts::LN_2;
    let c = log_const.exp();

    let mut nodes = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    for x0 in guesses {
        let mut x = x0;
        for _ in 0..MAX_NEWTON {
            let dx = jacobi_at(params, q, x) / deriv(x);
            let next = (x - dx).clamp(-1.0, 1.0);
            let step = (next - x).abs();
            x = next;
            if step <= 4e-16 {
                break;
            }
        }
        let dp = deriv(x);
        nodes.push(x);
        weights.push(c / ((1.0 - x) * (1.0 + x) * dp * dp));
    }
    // the log-gamma constant loses ~1e-13; rescale to the exact total mass
    let mass = 2f64.powf(a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(a + b + 2.0);
    if mass.is_finite() {
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w *= mass / total);
    }
    GaussRule { nodes, weights }
}

/// Gauss-Jacobi rule transplanted onto [0, 1] for the weight (1-t)^alpha t^beta.
pub fn gauss_jacobi_unit(q: usize, params: JacobiParams) -> GaussRule {
    let rule = gauss_jacobi(q, params);
    let scale = 0.5f64.powf(params.alpha() + params.beta() + 1.0);
    GaussRule {
        nodes: rule.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect(),
        weights: rule.weights.iter().map(|w| w * scale).collect(),
    }
}

/// Tanh-sinh rule on [0, 1]. Also returns `1 - t` for every node, computed
/// without cancellation, for integrands singular at the right end.
#[derive(Debug, Clone)]
pub struct TanhSinhRule {
    pub nodes: Vec<f64>,
    pub complements: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn tanh_sinh_unit(step: f64) -> TanhSinhRule {
    let logistic = |z: f64| 1.0 / (1.0 + (-z).exp());
    let mut nodes = Vec::new();
    let mut complements = Vec::new();
    let mut weights = Vec::new();
    let kmax = (4.5 / step).ceil() as i64;
    for k in -kmax..=kmax {
        let u = k as f64 * step;
        let z = PI * u.sinh();
        let t = logistic(z);
        let tc = logistic(-z);
        let w = step * PI * u.cosh() * t * tc;
        if w < 1e-300 || t <= 0.0 || tc <= 0.0 {
            continue;
        }
        nodes.push(t);
        complements.push(tc);
        weights.push(w);
    }
    TanhSinhRule {
        nodes,
        complements,
        weights,
    }
}
