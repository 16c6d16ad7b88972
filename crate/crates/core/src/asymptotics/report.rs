use serde::Serialize;

use super::certificates::{parallel_section_lower, tensor_lower_certificate, Certificate};
use super::{fit_sweep, sigma_reference, sweep, sweep_csv, SigmaEstimate, SweepConfig, SweepPoint};
use crate::geometry::{AffineMap, Domain};
use crate::{Error, Result};

/// Added to the fit half-width when comparing exponents.
pub const SIGMA_SLACK: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub domain: serde_json::Value,
    pub degrees: Vec<usize>,
    pub values: Vec<f64>,
    pub sweep: Vec<SweepPoint>,
    pub sigma_fit: SigmaEstimate,
    pub sigma_reference: Option<f64>,
    pub certificates: Vec<Certificate>,
    pub checks: Vec<SigmaCheck>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        sweep_csv(&self.sweep, self.degrees_dim())
    }

    fn degrees_dim(&self) -> usize {
        self.sweep.first().map(|p| p.argmax.len()).unwrap_or(0)
    }
}

// T(z) = center + diag(half widths) z, mapping [-1,1]^d onto the bounding box.
fn box_map(domain: &Domain) -> Result<AffineMap> {
    let bb = domain.bounding_box();
    let d = bb.dim();
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut r = vec![0.0; d];
            r[i] = 0.5 * (bb.upper[i] - bb.lower[i]);
            r
        })
        .collect();
    AffineMap::from_rows(&rows, &bb.center())
}

/// Sweeps the degrees, fits the exponent and checks it against the general
/// convex-body sandwich [d + 1, 2d] and the closed-form table; bundles a
/// tensor lower certificate at every degree's argmax and a parallel-section
/// certificate at the largest degree when sections are exact.
pub fn consistency_report(domain: &Domain, degrees: &[usize], cfg: &SweepConfig) -> Result<ConsistencyReport> {
    let points = sweep(domain, degrees, cfg)?;
    let fit = fit_sweep(&points, &cfg.fit)?;
    let d = domain.dim() as f64;
    let tol = fit.half_width + SIGMA_SLACK;
    let mut checks = Vec::new();
    if domain.is_convex() {
        let ok = fit.slope >= d + 1.0 - tol && fit.slope <= 2.0 * d + tol;
        checks.push(SigmaCheck {
            name: "convex sandwich".into(),
            passed: ok,
            detail: format!("{:.4} in [{:.4}, {:.4}]", fit.slope, d + 1.0 - tol, 2.0 * d + tol),
        });
    }
    let reference = sigma_reference(domain);
    if let Some(r) = reference {
        checks.push(SigmaCheck {
            name: "reference exponent".into(),
            passed: (fit.slope - r).abs() <= tol,
            detail: format!("|{:.4} - {r:.4}| <= {tol:.4}", fit.slope),
        });
    }

    let tmap = box_map(domain)?;
    let mut certificates = Vec::new();
    for p in &points {
        let y: Vec<f64> = tmap
            .apply_inverse(&p.argmax)
            .iter()
            .map(|v| v.clamp(-1.0, 1.0))
            .collect();
        let cert = tensor_lower_certificate(domain, &tmap, &y, p.n)?;
        let bound = cert.bound.unwrap_or(0.0);
        checks.push(SigmaCheck {
            name: format!("tensor bound below maximum, n = {}", p.n),
            passed: bound <= p.value * (1.0 + 1e-9),
            detail: format!("{bound:.6e} <= {:.6e}", p.value),
        });
        certificates.push(cert);
    }
    if let Some(last) = points.last() {
        let c = domain.center();
        let dir: Vec<f64> = c.iter().zip(&last.argmax).map(|(a, b)| a - b).collect();
        let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len > 1e-12 && domain.dim() > 1 {
            let xi: Vec<f64> = dir.iter().map(|v| v / len).collect();
            if domain.parallel_section(&xi, 0.5 * domain.width(&xi), 0)?.exact {
                let cert = parallel_section_lower(domain, &xi, last.n, domain.dim() + 1)?;
                let bound = cert.bound.unwrap_or(0.0);
                checks.push(SigmaCheck {
                    name: format!("section bound below maximum, n = {}", last.n),
                    passed: bound <= last.value * (1.0 + 1e-9),
                    detail: format!("{bound:.6e} <= {:.6e}", last.value),
                });
                certificates.push(cert);
            }
        }
    }
    Ok(ConsistencyReport {
        domain: crate::io::domain_to_json(domain),
        degrees: points.iter().map(|p| p.n).collect(),
        values: points.iter().map(|p| p.value).collect(),
        sweep: points,
        sigma_fit: fit,
        sigma_reference: reference,
        certificates,
        checks,
    })
}
