//! Christoffel function C(P_n, D, x) = b(x)^T G^{-1} b(x), the reproducing
//! kernel, extremal polynomials and maximization over D.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisKind;
use crate::geometry::{plane_basis, Domain};
use crate::moments::{assemble_gram, GramSystem, MomentMode};
use crate::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Number of radially projected boundary samples.
    pub resolution: usize,
    /// How many of the best boundary candidates get local refinement.
    pub refine_top: usize,
    /// Evaluations allowed per refined candidate.
    pub budget: usize,
    /// Interior points, used only for domains not flagged convex
    /// (0 picks a default).
    pub interior: usize,
    /// Relative width at which line searches stop.
    pub tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            resolution: 256,
            refine_top: 8,
            budget: 200,
            interior: 0,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxReport {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub candidates_examined: usize,
    /// Improvements found by local refinement, in order.
    pub trace: Vec<TracePoint>,
    pub degraded: bool,
    /// Whether the best catalogue point (vertex, pole, ...) attains the
    /// maximum to relative 1e-9.
    pub at_catalogue_point: bool,
    pub catalogue_value: f64,
}

// NaN never wins.
fn better(a: f64, pa: &[f64], b: f64, pb: &[f64]) -> bool {
    if a.is_nan() {
        return false;
    }
    if b.is_nan() || a > b {
        return true;
    }
    a == b && lex_less(pa, pb)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn best_of(points: &[Vec<f64>], values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in 0..points.len() {
        best = match best {
            Some(j) if !better(values[i], &points[i], values[j], &points[j]) => Some(j),
            _ if values[i].is_nan() => best,
            _ => Some(i),
        };
    }
    best
}

/// Maximizes `f` over `domain`: boundary candidates (and interior samples
/// for domains not flagged convex), then derivative-free refinement of the
/// best boundary candidates along the radial boundary parametrization.
/// The result is a lower estimate of the supremum.
pub fn maximize(domain: &Domain, f: &(dyn Fn(&[f64]) -> f64 + Sync), cfg: &SearchConfig) -> Result<MaxReport> {
    let cands = domain.boundary_candidates(cfg.resolution)?;
    let n_cat = cands.catalogue.len();
    let mut points: Vec<Vec<f64>> = cands.all().cloned().collect();
    let n_boundary = points.len();
    if !domain.is_convex() {
        let count = if cfg.interior == 0 {
            8 * cfg.resolution
        } else {
            cfg.interior
        };
        points.extend(domain.interior_samples(count, 1));
    }
    let values: Vec<f64> = points.par_iter().map(|x| f(x)).collect();
    let catalogue_best = best_of(&points[..n_cat], &values[..n_cat]);
    let best = best_of(&points, &values).ok_or_else(|| Error::Convergence("no finite candidate values".into()))?;
    let mut value = values[best];
    let mut argmax = points[best].clone();
    let mut examined = points.len();

    // refine the top boundary candidates
    let mut order: Vec<usize> = (0..n_boundary).filter(|&i| !values[i].is_nan()).collect();
    order.sort_by(|&a, &b| {
        values[b].partial_cmp(&values[a]).unwrap().then_with(|| {
            if lex_less(&points[a], &points[b]) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        })
    });
    order.truncate(cfg.refine_top);
    let mut trace = Vec::new();
    if domain.dim() > 1 && cfg.budget > 0 {
        let center = domain.center();
        let results: Vec<Refined> = order
            .par_iter()
            .map(|&i| refine(domain, f, &center, &points[i], values[i], cfg))
            .collect();
        for r in results {
            examined += r.evaluations;
            trace.extend(r.trace);
            if better(r.value, &r.point, value, &argmax) {
                value = r.value;
                argmax = r.point;
            }
        }
    }
    let catalogue_value = catalogue_best.map(|i| values[i]).unwrap_or(f64::NAN);
    Ok(MaxReport {
        value,
        argmax,
        candidates_examined: examined,
        trace,
        degraded: false,
        at_catalogue_point: catalogue_value >= value * (1.0 - 1e-9),
        catalogue_value,
    })
}

struct Refined {
    point: Vec<f64>,
    value: f64,
    trace: Vec<TracePoint>,
    evaluations: usize,
}

// Coordinate-wise golden-section search in the tangent coordinates of the
// ray direction: one curve parameter in d = 2, alternating over d - 1
// coordinates otherwise.
fn refine(
    domain: &Domain,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    center: &[f64],
    start: &[f64],
    start_value: f64,
    cfg: &SearchConfig,
) -> Refined {
    let d = domain.dim();
    let mut out = Refined {
        point: start.to_vec(),
        value: start_value,
        trace: Vec::new(),
        evaluations: 0,
    };
    let dir: Vec<f64> = start.iter().zip(center).map(|(a, b)| a - b).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-14 {
        return out;
    }
    let u0: Vec<f64> = dir.iter().map(|v| v / norm).collect();
    let frame = plane_basis(&u0);
    let at = |t: &[f64]| -> Option<Vec<f64>> {
        let mut u = u0.clone();
        for (e, ti) in frame.iter().zip(t) {
            u.iter_mut().zip(e).for_each(|(a, b)| *a += ti * b);
        }
        let x = domain.radial_boundary(center, &u);
        domain.contains(&x).then_some(x)
    };
    // angular spacing of the sample
    let area = 2.0 * PI.powf(d as f64 / 2.0) / statrs::function::gamma::gamma(d as f64 / 2.0);
    let mut width = 2.0 * (area / cfg.resolution as f64).powf(1.0 / (d - 1) as f64);
    let mut t = vec![0.0; d - 1];
    let mut remaining = cfg.budget;
    let eval = |t: &[f64], out: &mut Refined, remaining: &mut usize| -> f64 {
        *remaining = remaining.saturating_sub(1);
        out.evaluations += 1;
        match at(t) {
            Some(x) => {
                let v = f(&x);
                if better(v, &x, out.value, &out.point) {
                    out.value = v;
                    out.point = x.clone();
                    out.trace.push(TracePoint { point: x, value: v });
                }
                v
            }
            None => f64::NEG_INFINITY,
        }
    };
    while remaining > 2 && width > cfg.tolerance {
        for k in 0..d - 1 {
            if remaining <= 2 {
                break;
            }
            // golden section on t_k in [t_k - width, t_k + width]
            let mut lo = t[k] - width;
            let mut hi = t[k] + width;
            let mut probe = t.clone();
            let mut x1 = hi - GOLDEN * (hi - lo);
            let mut x2 = lo + GOLDEN * (hi - lo);
            probe[k] = x1;
            let mut f1 = eval(&probe, &mut out, &mut remaining);
            probe[k] = x2;
            let mut f2 = eval(&probe, &mut out, &mut remaining);
            let per_line = if d == 2 {
                remaining
            } else {
                (cfg.budget / (4 * (d - 1))).max(8)
            };
            let mut used = 0;
            while hi - lo > cfg.tolerance * (1.0 + t[k].abs()) && remaining > 0 && used < per_line {
                used += 1;
                if f1 >= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - GOLDEN * (hi - lo);
                    probe[k] = x1;
                    f1 = eval(&probe, &mut out, &mut remaining);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + GOLDEN * (hi - lo);
                    probe[k] = x2;
                    f2 = eval(&probe, &mut out, &mut remaining);
                }
            }
            t[k] = if f1 >= f2 { x1 } else { x2 };
        }
        if d == 2 {
            break;
        }
        width *= 0.5;
    }
    out
}

/// Read-only evaluator of C(P_n, D, .) over an assembled Gram system.
#[derive(Debug, Clone)]
pub struct ChristoffelEvaluator {
    system: GramSystem,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapReport {
    pub q: f64,
    pub r: f64,
    pub s: usize,
    /// ||phi||_r / ||phi||_q.
    pub ratio: f64,
    /// Propagated quadrature error of the ratio.
    pub ratio_error: f64,
    /// C_max(P_{ns})^{1/q - 1/r}.
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
    /// Set when a sup-norm entered the ratio (search gives lower estimates).
    pub lower_estimate: bool,
}

impl ChristoffelEvaluator {
    pub fn new(system: GramSystem) -> Self {
        Self { system }
    }

    pub fn build(domain: &Domain, n: usize, kind: BasisKind, mode: MomentMode) -> Result<Self> {
        Ok(Self::new(assemble_gram(domain, n, kind, mode)?))
    }

    pub fn system(&self) -> &GramSystem {
        &self.system
    }

    pub fn domain(&self) -> &Domain {
        self.system.domain()
    }

    pub fn dim(&self) -> usize {
        self.system.domain().dim()
    }

    pub fn degree(&self) -> usize {
        self.system.degree()
    }

    pub fn is_degraded(&self) -> bool {
        self.system.is_degraded()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange("point has non-finite coordinates".into()));
        }
        Ok(())
    }

    /// C(P_n, D, x). Defined for every x in R^d, not only in D.
    pub fn christoffel_at(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.value(x))
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.system.inverse_quadratic_form(&self.system.basis().eval(x))
    }

    /// K_n(x, y) = b(x)^T G^{-1} b(y).
    pub fn kernel_at(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let basis = self.system.basis();
        Ok(self.system.inverse_bilinear_form(&basis.eval(x), &basis.eval(y)))
    }

    /// Coefficients (in the system's basis) of K(x, .)/K(x, x), the
    /// minimizer of ||f||_2 subject to f(x) = 1.
    pub fn extremal_polynomial(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let b = self.system.basis().eval(x);
        let mut a = self.system.solve(&b);
        let c: f64 = a.iter().zip(&b).map(|(u, v)| u * v).sum();
        if !(c > 0.0) {
            return Err(Error::Convergence(format!("kernel diagonal {c} is not positive")));
        }
        a.iter_mut().for_each(|v| *v /= c);
        Ok(a)
    }

    pub fn christoffel_max(&self, cfg: &SearchConfig) -> Result<MaxReport> {
        let f = |x: &[f64]| self.value(x);
        let mut report = maximize(self.domain(), &f, cfg)?;
        report.degraded = self.is_degraded();
        Ok(report)
    }

    /// sqrt of the maximal Christoffel value: sup ||phi||_inf / ||phi||_2
    /// over P_n, as a lower estimate.
    pub fn nikolskii_ratio(&self, cfg: &SearchConfig) -> Result<f64> {
        Ok(self.christoffel_max(cfg)?.value.sqrt())
    }

    /// Checks ||phi||_r <= C_max(P_{ns})^{1/q - 1/r} ||phi||_q, which holds
    /// for every phi in P_n whenever q <= 2s (apply the (2, inf) bound to
    /// phi^s in P_{ns}).
    pub fn bootstrap_check(
        &self,
        phi: &[f64],
        q: f64,
        r: f64,
        s: usize,
        cfg: &SearchConfig,
    ) -> Result<BootstrapReport> {
        if !(q > 0.0) || !(r >= q) {
            return Err(Error::OutOfRange(format!("need 0 < q <= r, got q = {q}, r = {r}")));
        }
        if s == 0 {
            return Err(Error::OutOfRange("power s must be at least 1".into()));
        }
        if q > 2.0 * s as f64 {
            return Err(Error::Premise(format!("q = {q} exceeds 2s = {}", 2 * s)));
        }
        let nq = self.system.l_norm(phi, q)?;
        let nr = self.system.l_norm(phi, r)?;
        let ratio = nr.value / nq.value;
        let ratio_error = ratio * (nr.error / nr.value + nq.error / nq.value);
        let exponent = 1.0 / q - if r.is_infinite() { 0.0 } else { 1.0 / r };
        let bound = if exponent == 0.0 {
            1.0
        } else {
            let cmax = if s == 1 {
                self.christoffel_max(cfg)?.value
            } else {
                let lifted = ChristoffelEvaluator::build(
                    self.domain(),
                    self.degree() * s,
                    self.system.basis().kind,
                    self.system.mode(),
                )?;
                lifted.christoffel_max(cfg)?.value
            };
            cmax.powf(exponent)
        };
        let slack = bound - ratio;
        Ok(BootstrapReport {
            q,
            r,
            s,
            ratio,
            ratio_error,
            bound,
            slack,
            holds: ratio <= bound * (1.0 + 1e-9) + ratio_error,
            lower_estimate: nq.lower_estimate || nr.lower_estimate,
        })
    }
}
