//! Growth exponents of C(P_n, D): least-squares fits, the closed-form
//! reference table and bound certificates.

mod certificates;
mod report;

pub use certificates::{
    inscribed_upper_certificate, lp_cone_certificate, parallel_section_lower, tensor_lower_certificate, Certificate,
    CertificateKind, LambdaFit, PremiseCheck, Rate, Witness,
};
pub use report::{consistency_report, ConsistencyReport, SigmaCheck};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::basis::BasisKind;
use crate::christoffel::{ChristoffelEvaluator, SearchConfig};
use crate::geometry::Domain;
use crate::moments::MomentMode;
use crate::{Error, Result};

/// Minimum number of degrees a fit needs.
pub const MIN_FIT_DEGREES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Degrees below this are dropped.
    pub n_min: usize,
    /// The regressor is log(n + degree_shift). Sweeps fill `None` with
    /// (d + 1)/2, the mean offset of the factors (n+1)...(n+d) of
    /// dim P_n; [`fit_power_law`] reads `None` as 0.
    pub degree_shift: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_min: 4,
            degree_shift: None,
        }
    }
}

impl FitOptions {
    pub fn resolved(&self, dim: usize) -> FitOptions {
        FitOptions {
            n_min: self.n_min,
            degree_shift: Some(self.degree_shift.unwrap_or((dim as f64 + 1.0) / 2.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaEstimate {
    pub degrees: Vec<usize>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// 95% Student-t half-width of the slope.
    pub half_width: f64,
    pub r_squared: f64,
    pub excluded: Vec<usize>,
    pub degree_shift: f64,
}

/// Ordinary least squares of log value against log(n + shift).
pub fn fit_power_law(degrees: &[usize], values: &[f64], degraded: &[bool], opts: &FitOptions) -> Result<SigmaEstimate> {
    if degrees.len() != values.len() || degrees.len() != degraded.len() {
        return Err(Error::DimensionMismatch {
            expected: degrees.len(),
            found: values.len().min(degraded.len()),
        });
    }
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OutOfRange("degrees must be strictly increasing".into()));
    }
    let mut used = Vec::new();
    let mut vals = Vec::new();
    let mut excluded = Vec::new();
    for i in 0..degrees.len() {
        let n = degrees[i];
        if n < opts.n_min || degraded[i] || !(values[i] > 0.0) || !values[i].is_finite() {
            excluded.push(n);
        } else {
            used.push(n);
            vals.push(values[i]);
        }
    }
    if used.len() < MIN_FIT_DEGREES {
        return Err(Error::InsufficientDegrees {
            found: used.len(),
            required: MIN_FIT_DEGREES,
        });
    }
    let shift = opts.degree_shift.unwrap_or(0.0);
    if !(shift > -(used[0] as f64)) {
        return Err(Error::OutOfRange(format!("degree shift {shift} too negative")));
    }
    let xs: Vec<f64> = used.iter().map(|&n| (n as f64 + shift).ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Convergence("degrees do not span a range".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let dof = k - 2.0;
    let se = (rss / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Convergence(e.to_string()))?
        .inverse_cdf(0.975);
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok(SigmaEstimate {
        degrees: used,
        values: vals,
        slope,
        intercept,
        half_width: t * se,
        r_squared,
        excluded,
        degree_shift: shift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub search: SearchConfig,
    pub kind: BasisKind,
    pub mode: MomentMode,
    pub fit: FitOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            kind: BasisKind::TensorLegendre,
            mode: MomentMode::Exact,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n: usize,
    pub value: f64,
    pub argmax: Vec<f64>,
    pub degraded: bool,
    pub condition: f64,
    pub at_catalogue_point: bool,
}

/// max C(P_n, D) for each degree, computed in parallel and returned in the
/// order given.
pub fn sweep(domain: &Domain, degrees: &[usize], cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    degrees
        .par_iter()
        .map(|&n| {
            let e = ChristoffelEvaluator::build(domain, n, cfg.kind, cfg.mode)?;
            let r = e.christoffel_max(&cfg.search)?;
            Ok(SweepPoint {
                n,
                value: r.value,
                argmax: r.argmax,
                degraded: r.degraded,
                condition: e.system().condition_estimate(),
                at_catalogue_point: r.at_catalogue_point,
            })
        })
        .collect()
}

pub fn fit_sweep(points: &[SweepPoint], opts: &FitOptions) -> Result<SigmaEstimate> {
    let degrees: Vec<usize> = points.iter().map(|p| p.n).collect();
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    let degraded: Vec<bool> = points.iter().map(|p| p.degraded).collect();
    let dim = points.first().map(|p| p.argmax.len()).unwrap_or(1);
    fit_power_law(&degrees, &values, &degraded, &opts.resolved(dim))
}

/// Fitted growth exponent of max C(P_n, D) over the given degrees.
pub fn fit_sigma(domain: &Domain, degrees: &[usize], cfg: &SweepConfig) -> Result<SigmaEstimate> {
    fit_sweep(&sweep(domain, degrees, cfg)?, &cfg.fit)
}

/// CSV rows `n,C_max,argmax_1..argmax_d,degraded`, 17 significant digits.
pub fn sweep_csv(points: &[SweepPoint], dim: usize) -> String {
    let mut out = String::from("n,C_max");
    for i in 1..=dim {
        out.push_str(&format!(",argmax_{i}"));
    }
    out.push_str(",degraded\n");
    for p in points {
        out.push_str(&format!("{},{:.16e}", p.n, p.value));
        for v in &p.argmax {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push_str(&format!(",{}\n", p.degraded));
    }
    out
}

/// Closed-form growth exponent for the domain, when known.
pub fn sigma_reference(domain: &Domain) -> Option<f64> {
    match domain {
        Domain::Interval { .. } => Some(2.0),
        Domain::Cube { dim } => Some(2.0 * *dim as f64),
        Domain::BallP { dim, p } => lp_sigma(*dim, *p),
        Domain::Simplex { vertices } => Some(2.0 * (vertices.len() - 1) as f64),
        Domain::SimplexUnion { simplices, convex } => convex.then(|| 2.0 * (simplices[0].len() - 1) as f64),
        Domain::HalfBall { dim } => match dim {
            1 => Some(2.0),
            2 => Some(4.0),
            3 => Some(5.0),
            _ => None,
        },
        Domain::ConeDisk => Some(6.0),
        Domain::Product { factors } => factors.iter().map(sigma_reference).sum(),
        Domain::Affine { base, .. } => sigma_reference(base),
    }
}

fn lp_sigma(d: usize, p: f64) -> Option<f64> {
    let d = d as f64;
    if p.is_infinite() {
        Some(2.0 * d)
    } else if p >= 2.0 {
        Some(d + 1.0)
    } else if p >= 1.0 {
        Some(2.0 + 2.0 * (d - 1.0) / p)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub family: String,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    pub sigma: f64,
    /// The (2, inf) Nikol'skii ratio grows like n^{sigma/2}.
    pub ratio_exponent: f64,
}

fn row(family: &str, dim: usize, p: Option<String>, sigma: f64) -> TableRow {
    TableRow {
        family: family.to_string(),
        dim,
        p,
        sigma,
        ratio_exponent: sigma / 2.0,
    }
}

/// Every closed-form entry: lp-balls over a grid of p, cubes, simplices,
/// the half-ball cases, the cone over a disk, the quarter ball, smooth
/// convex bodies and the disk-interval product.
pub fn reference_table() -> Vec<TableRow> {
    let mut rows = Vec::new();
    let ps: [(f64, &str); 7] = [
        (1.0, "1"),
        (1.5, "1.5"),
        (2.0, "2"),
        (3.0, "3"),
        (4.0, "4"),
        (8.0, "8"),
        (f64::INFINITY, "inf"),
    ];
    for d in 1..=4 {
        for (p, label) in ps {
            rows.push(row("ball_p", d, Some(label.to_string()), lp_sigma(d, p).unwrap()));
        }
    }
    for d in 1..=4 {
        rows.push(row("cube", d, None, 2.0 * d as f64));
        rows.push(row("simplex", d, None, 2.0 * d as f64));
    }
    rows.push(row("half_ball", 2, None, 4.0));
    rows.push(row("half_ball", 3, None, 5.0));
    rows.push(row("quarter_ball", 3, None, 6.0));
    rows.push(row("cone_disk", 3, None, 6.0));
    for d in 2..=4 {
        rows.push(row("smooth_convex", d, None, d as f64 + 1.0));
    }
    rows.push(row("product(ball_p(2,2),interval)", 3, None, 5.0));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let degrees: Vec<usize> = (4..=20).collect();
        let values: Vec<f64> = degrees.iter().map(|&n| (n as f64).powi(3)).collect();
        let flags = vec![false; degrees.len()];
        let fit = fit_power_law(
            &degrees,
            &values,
            &flags,
            &FitOptions {
                n_min: 4,
                degree_shift: None,
            },
        )
        .unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-10);
        assert!(fit.half_width < 1e-8);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exclusions_and_minimum() {
        let degrees: Vec<usize> = (1..=9).collect();
        let values: Vec<f64> = degrees.iter().map(|&n| (n as f64 + 1.0).powi(2)).collect();
        let mut flags = vec![false; 9];
        flags[6] = true;
        let opts = FitOptions::default().resolved(1);
        let fit = fit_power_law(&degrees, &values, &flags, &opts).unwrap();
        assert_eq!(fit.excluded, vec![1, 2, 3, 7]);
        assert_eq!(fit.degrees, vec![4, 5, 6, 8, 9]);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        flags[7] = true;
        assert!(matches!(
            fit_power_law(&degrees, &values, &flags, &opts),
            Err(Error::InsufficientDegrees { found: 4, required: 5 })
        ));
        assert!(fit_power_law(&[5, 4, 6, 7, 8], &[1.0; 5], &[false; 5], &FitOptions::default()).is_err());
    }

    #[test]
    fn interval_sweep_slope() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        let degrees: Vec<usize> = (4..=28).collect();
        let fit = fit_sigma(&d, &degrees, &SweepConfig::default()).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-8, "{}", fit.slope);
    }

    #[test]
    fn reference_values() {
        assert_eq!(sigma_reference(&Domain::ball_p(2, 1.0).unwrap()), Some(4.0));
        assert!((sigma_reference(&Domain::ball_p(2, 1.5).unwrap()).unwrap() - 10.0 / 3.0).abs() < 1e-15);
        assert_eq!(sigma_reference(&Domain::half_ball(3).unwrap()), Some(5.0));
        assert_eq!(sigma_reference(&Domain::ball_p(3, 0.5).unwrap()), None);
        let prod = Domain::product(vec![
            Domain::ball_p(2, 2.0).unwrap(),
            Domain::interval(0.0, 1.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(sigma_reference(&prod), Some(5.0));
        assert_eq!(sigma_reference(&Domain::cone_disk()), Some(6.0));
    }

    #[test]
    fn table_rows() {
        let t = reference_table();
        let find = |fam: &str, d: usize, p: Option<&str>| {
            t.iter()
                .find(|r| r.family == fam && r.dim == d && r.p.as_deref() == p)
                .map(|r| r.sigma)
        };
        assert_eq!(find("ball_p", 2, Some("1")), Some(4.0));
        assert_eq!(find("cone_disk", 3, None), Some(6.0));
        assert_eq!(find("product(ball_p(2,2),interval)", 3, None), Some(5.0));
        assert_eq!(find("quarter_ball", 3, None), Some(6.0));
    }

    #[test]
    fn csv_layout() {
        let pts = vec![SweepPoint {
            n: 4,
            value: 12.5,
            argmax: vec![1.0, 0.0],
            degraded: false,
            condition: 1.0,
            at_catalogue_point: true,
        }];
        let csv = sweep_csv(&pts, 2);
        assert_eq!(
            csv,
            "n,C_max,argmax_1,argmax_2,degraded\n4,1.2500000000000000e1,1.0000000000000000e0,0.0000000000000000e0,false\n"
        );
    }
}
