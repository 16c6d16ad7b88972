//! `christoffel` command-line tool.
//!
//! Exit codes: 0 ok, 1 other errors, 2 malformed input JSON, 3 dimension
//! mismatch, 4 degraded Gram (output still written), 5 premise check failed.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use christoffel::asymptotics::{
    fit_power_law, fit_sweep, inscribed_upper_certificate, lp_cone_certificate, parallel_section_lower,
    reference_table, sweep, sweep_csv, tensor_lower_certificate, SigmaEstimate, SweepConfig,
};
use christoffel::geometry::half_ball_map;
use christoffel::io::{domain_to_json, parse_domain, parse_vector};
use christoffel::sampling::sphere_points;
use christoffel::{AffineMap, BasisKind, Certificate, ChristoffelEvaluator, Domain, Error, MomentMode, SearchConfig};

#[derive(Parser, Debug)]
#[command(
    name = "christoffel",
    version,
    about = "Christoffel functions and Nikol'skii exponents on domains in R^d"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// C(P_n, D, x) and the (2, inf) ratio sqrt(C) at a point.
    Eval(EvalArgs),
    /// Maximum of C(P_n, D, .) over the domain.
    Max(MaxArgs),
    /// Fit the growth exponent of max C over a range of degrees.
    Sigma(SigmaArgs),
    /// Lower or upper bound certificate.
    Certify(CertifyArgs),
    /// Nikol'skii ratio and a (q, r) check on a random polynomial.
    Norms(NormsArgs),
    /// The closed-form exponent table.
    Table(OutputArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct DomainArgs {
    /// Domain JSON file, or inline JSON starting with '{'.
    #[arg(long)]
    domain: String,
    /// Use sampled moments with this many points instead of exact ones.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Radially projected boundary samples for the max search.
    #[arg(long, default_value_t = 256)]
    resolution: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long)]
    degree: usize,
    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct MaxArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long)]
    degree: usize,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SigmaArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// a:b:s (inclusive, stride s), a:b or a single degree.
    #[arg(long, default_value = "4:24:2")]
    degrees: String,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Kind {
    LowerTensor,
    LowerParallel,
    UpperEllipsoid,
    UpperCone,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[command(flatten)]
    domain: DomainArgs,
    /// Single degree; `--degrees` gives one certificate per degree.
    #[arg(long, conflicts_with = "degrees")]
    degree: Option<usize>,
    #[arg(long)]
    degrees: Option<String>,
    /// Point of the domain (lower-tensor, upper-cone). Defaults to the argmax
    /// of C, or (1, 0, ..., 0) for upper-cone.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Unit direction xi for lower-parallel. Defaults to the direction from
    /// the argmax of C toward the centroid.
    #[arg(long, allow_hyphen_values = true)]
    direction: Option<String>,
    /// Decay order for lower-parallel (default d + 1).
    #[arg(long)]
    m: Option<usize>,
    /// JSON {"A": ..., "b": ...} for upper-ellipsoid. Defaults to the
    /// half-ball map on half_ball(3) and to a ball around the centroid
    /// elsewhere.
    #[arg(long)]
    map: Option<String>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct NormsArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long)]
    degree: usize,
    #[arg(long, default_value = "1")]
    q: String,
    #[arg(long, default_value = "inf")]
    r: String,
    /// Power used to lift phi to degree n s.
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutputArgs,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => 2,
            Error::DimensionMismatch { .. } => 3,
            Error::Premise(_) => 5,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

/// Text to write plus the exit code to report after writing it.
struct Output {
    text: String,
    code: u8,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| fail(e.to_string()))
}

fn load_domain(a: &DomainArgs) -> Result<Domain, Failure> {
    let text = if a.domain.trim_start().starts_with('{') {
        a.domain.clone()
    } else {
        std::fs::read_to_string(&a.domain).map_err(|e| fail(format!("{}: {e}", a.domain)))?
    };
    Ok(parse_domain(&text)?)
}

fn mode(a: &DomainArgs) -> MomentMode {
    match a.samples {
        Some(samples) => MomentMode::Sampled { samples, seed: a.seed },
        None => MomentMode::Exact,
    }
}

fn parse_point(text: &str, dim: usize) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| fail(format!("bad coordinate {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        }
        .into());
    }
    Ok(v)
}

fn parse_real(text: &str) -> Result<f64, Failure> {
    match text.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| fail(format!("bad number {t:?}"))),
    }
}

fn parse_degrees(text: &str) -> Result<Vec<usize>, Failure> {
    let parts: Vec<usize> = text
        .split(':')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| fail(format!("bad degree range {text:?}")))
        })
        .collect::<Result<_, _>>()?;
    let (a, b, s) = match parts[..] {
        [a] => (a, a, 1),
        [a, b] => (a, b, 1),
        [a, b, s] => (a, b, s),
        _ => return Err(fail(format!("bad degree range {text:?}"))),
    };
    if s == 0 || b < a {
        return Err(fail(format!("degree range {text:?} is empty")));
    }
    Ok((a..=b).step_by(s).collect())
}

fn search(a: &SearchArgs) -> SearchConfig {
    SearchConfig {
        resolution: a.resolution,
        ..SearchConfig::default()
    }
}

fn evaluator(d: &Domain, n: usize, a: &DomainArgs) -> Result<ChristoffelEvaluator, Failure> {
    Ok(ChristoffelEvaluator::build(d, n, BasisKind::TensorLegendre, mode(a))?)
}

fn degraded_code(degraded: bool) -> u8 {
    if degraded {
        4
    } else {
        0
    }
}

fn cmd_eval(a: &EvalArgs) -> Result<Output, Failure> {
    let d = load_domain(&a.domain)?;
    let x = parse_point(&a.point, d.dim())?;
    let e = evaluator(&d, a.degree, &a.domain)?;
    let c = e.christoffel_at(&x)?;
    let text = match a.out.format {
        Format::Json => to_json(&json!({
            "x": x,
            "n": a.degree,
            "C": c,
            "ratio": c.sqrt(),
            "inside": d.contains(&x),
            "degraded": e.is_degraded(),
        }))?,
        Format::Csv => {
            let mut s = String::new();
            for i in 1..=x.len() {
                let _ = write!(s, "x_{i},");
            }
            s.push_str("n,C,ratio,degraded\n");
            for v in &x {
                let _ = write!(s, "{},", num(*v));
            }
            let _ = writeln!(s, "{},{},{},{}", a.degree, num(c), num(c.sqrt()), e.is_degraded());
            s
        }
    };
    Ok(Output {
        text,
        code: degraded_code(e.is_degraded()),
    })
}

fn cmd_max(a: &MaxArgs) -> Result<Output, Failure> {
    let d = load_domain(&a.domain)?;
    let e = evaluator(&d, a.degree, &a.domain)?;
    let r = e.christoffel_max(&search(&a.search))?;
    let text = match a.out.format {
        Format::Json => to_json(&json!({"n": a.degree, "report": r}))?,
        Format::Csv => {
            let mut s = String::from("n,C_max");
            for i in 1..=r.argmax.len() {
                let _ = write!(s, ",argmax_{i}");
            }
            s.push_str(",degraded,candidates,at_catalogue_point\n");
            let _ = write!(s, "{},{}", a.degree, num(r.value));
            for v in &r.argmax {
                let _ = write!(s, ",{}", num(*v));
            }
            let _ = writeln!(s, ",{},{},{}", r.degraded, r.candidates_examined, r.at_catalogue_point);
            s
        }
    };
    Ok(Output {
        text,
        code: degraded_code(r.degraded),
    })
}

fn cmd_sigma(a: &SigmaArgs) -> Result<Output, Failure> {
    let d = load_domain(&a.domain)?;
    let degrees = parse_degrees(&a.degrees)?;
    let cfg = SweepConfig {
        search: search(&a.search),
        mode: mode(&a.domain),
        ..SweepConfig::default()
    };
    let points = sweep(&d, &degrees, &cfg)?;
    let text = match a.out.format {
        Format::Csv => sweep_csv(&points, d.dim()),
        Format::Json => {
            let fit: SigmaEstimate = fit_sweep(&points, &cfg.fit)?;
            to_json(&json!({
                "domain": domain_to_json(&d),
                "sigma_fit": fit,
                "sigma_reference": christoffel::sigma_reference(&d),
                "sweep": points,
            }))?
        }
    };
    Ok(Output { text, code: 0 })
}

// The ball of radius 0.999 * min_u (h(u) - c . u) about the centroid.
fn inscribed_ball_map(d: &Domain) -> Result<AffineMap, Failure> {
    if !d.is_convex() {
        return Err(fail("default inscribed ball needs a convex domain; pass --map"));
    }
    let c = d.center();
    let r = sphere_points(d.dim(), 4096)
        .iter()
        .map(|u| d.support(u) - u.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let r = 0.999 * r;
    let rows: Vec<Vec<f64>> = (0..d.dim())
        .map(|i| (0..d.dim()).map(|j| if i == j { r } else { 0.0 }).collect())
        .collect();
    Ok(AffineMap::from_rows(&rows, &c)?)
}

fn parse_map(text: &str, dim: usize) -> Result<AffineMap, Failure> {
    let raw = if text.trim_start().starts_with('{') {
        text.to_string()
    } else {
        std::fs::read_to_string(text).map_err(|e| fail(format!("{text}: {e}")))?
    };
    let v: serde_json::Value = serde_json::from_str(&raw).map_err(|e| Failure::from(Error::Parse(e.to_string())))?;
    let b = parse_vector(
        v.get("b")
            .ok_or_else(|| Failure::from(Error::Parse("map needs \"b\"".into())))?,
    )?;
    let a = v
        .get("A")
        .ok_or_else(|| Failure::from(Error::Parse("map needs \"A\"".into())))?;
    let rows: Vec<Vec<f64>> = match a.as_array() {
        Some(arr) if arr.iter().all(|r| r.is_array()) => arr.iter().map(parse_vector).collect::<Result<_, _>>()?,
        _ => parse_vector(a)?.chunks(b.len().max(1)).map(|c| c.to_vec()).collect(),
    };
    if b.len() != dim || rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: b.len(),
        }
        .into());
    }
    Ok(AffineMap::from_rows(&rows, &b)?)
}

fn box_map(d: &Domain) -> Result<AffineMap, Failure> {
    let bb = d.bounding_box();
    let rows: Vec<Vec<f64>> = (0..bb.dim())
        .map(|i| {
            (0..bb.dim())
                .map(|j| if i == j { 0.5 * (bb.upper[i] - bb.lower[i]) } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(AffineMap::from_rows(&rows, &bb.center())?)
}

fn certify_one(a: &CertifyArgs, d: &Domain, n: usize) -> Result<Certificate, Failure> {
    let dim = d.dim();
    let argmax = || -> Result<Vec<f64>, Failure> {
        let e = evaluator(d, n, &a.domain)?;
        Ok(e.christoffel_max(&search(&a.search))?.argmax)
    };
    let cert = match a.kind {
        Kind::LowerTensor => {
            let x = match &a.point {
                Some(p) => parse_point(p, dim)?,
                None => argmax()?,
            };
            let t = box_map(d)?;
            let y: Vec<f64> = t.apply_inverse(&x).iter().map(|v| v.clamp(-1.0, 1.0)).collect();
            tensor_lower_certificate(d, &t, &y, n)?
        }
        Kind::LowerParallel => {
            let xi = match &a.direction {
                Some(s) => parse_point(s, dim)?,
                None => {
                    let x = argmax()?;
                    d.center().iter().zip(&x).map(|(c, v)| c - v).collect()
                }
            };
            let len = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(len > 0.0) {
                return Err(fail("direction must be non-zero"));
            }
            // snap search noise so axis directions stay exact
            let xi: Vec<f64> = xi.iter().map(|v| if v.abs() < 1e-8 * len { 0.0 } else { *v }).collect();
            let len = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let xi: Vec<f64> = xi.iter().map(|v| v / len).collect();
            parallel_section_lower(d, &xi, n, a.m.unwrap_or(dim + 1))?
        }
        Kind::UpperEllipsoid => {
            let t = match &a.map {
                Some(m) => parse_map(m, dim)?,
                None if matches!(d, Domain::HalfBall { dim: 3 }) => half_ball_map(n.max(1))?,
                None => inscribed_ball_map(d)?,
            };
            inscribed_upper_certificate(d, &t, n)?
        }
        Kind::UpperCone => {
            let Domain::BallP { dim, p } = d else {
                return Err(fail("upper-cone needs a ball_p domain"));
            };
            let x = match &a.point {
                Some(s) => parse_point(s, *dim)?,
                None => (0..*dim).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
            };
            lp_cone_certificate(*dim, *p, &x, n)?
        }
    };
    Ok(cert)
}

fn cmd_certify(a: &CertifyArgs) -> Result<Output, Failure> {
    let d = load_domain(&a.domain)?;
    let degrees = match (&a.degree, &a.degrees) {
        (Some(n), _) => vec![*n],
        (None, Some(s)) => parse_degrees(s)?,
        (None, None) => return Err(fail("certify needs --degree or --degrees")),
    };
    let certs: Vec<Certificate> = degrees
        .iter()
        .map(|&n| certify_one(a, &d, n))
        .collect::<Result<_, _>>()?;
    let verified = certs.iter().all(|c| c.verified);
    // growth of the certified lower bounds, when there are enough of them
    let bounds: Vec<f64> = certs.iter().filter_map(|c| c.bound).collect();
    let slope = if bounds.len() == certs.len() {
        fit_power_law(
            &degrees,
            &bounds,
            &vec![false; bounds.len()],
            &SweepConfig::default().fit.resolved(d.dim()),
        )
        .ok()
    } else {
        None
    };
    let text = match a.out.format {
        Format::Json => {
            if certs.len() == 1 && slope.is_none() {
                to_json(&certs[0])?
            } else {
                to_json(&json!({"certificates": certs, "bound_fit": slope, "verified": verified}))?
            }
        }
        Format::Csv => {
            let mut s = String::from("n,bound,rate_exponent,rate_value,verified\n");
            for c in &certs {
                let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    c.degree,
                    opt(c.bound),
                    opt(c.rate.map(|r| r.exponent)),
                    opt(c.rate.map(|r| r.value)),
                    c.verified
                );
            }
            s
        }
    };
    Ok(Output {
        text,
        code: if verified { 0 } else { 5 },
    })
}

// SplitMix64, enough for reproducible test polynomials.
fn coefficients(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed;
    (0..len)
        .map(|_| {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            2.0 * (z >> 11) as f64 / (1u64 << 53) as f64 - 1.0
        })
        .collect()
}

fn cmd_norms(a: &NormsArgs) -> Result<Output, Failure> {
    let d = load_domain(&a.domain)?;
    let e = evaluator(&d, a.degree, &a.domain)?;
    let cfg = search(&a.search);
    let ratio = e.nikolskii_ratio(&cfg)?;
    let phi = coefficients(e.system().len(), a.domain.seed);
    let report = e.bootstrap_check(&phi, parse_real(&a.q)?, parse_real(&a.r)?, a.s, &cfg)?;
    let text = match a.out.format {
        Format::Json => to_json(&json!({
            "n": a.degree,
            "ratio_2_inf": ratio,
            "phi": phi,
            "check": report,
            "degraded": e.is_degraded(),
        }))?,
        Format::Csv => {
            let mut s = String::from("n,ratio_2_inf,q,r,s,ratio,bound,holds\n");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                a.degree,
                num(ratio),
                num(report.q),
                num(report.r),
                report.s,
                num(report.ratio),
                num(report.bound),
                report.holds
            );
            s
        }
    };
    let code = if !report.holds {
        5
    } else {
        degraded_code(e.is_degraded())
    };
    Ok(Output { text, code })
}

fn cmd_table(a: &OutputArgs) -> Result<Output, Failure> {
    let rows = reference_table();
    let text = match a.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("family,dim,p,sigma,ratio_exponent\n");
            for r in &rows {
                let family = if r.family.contains(',') {
                    format!("\"{}\"", r.family)
                } else {
                    r.family.clone()
                };
                let _ = writeln!(
                    s,
                    "{family},{},{},{},{}",
                    r.dim,
                    r.p.clone().unwrap_or_default(),
                    num(r.sigma),
                    num(r.ratio_exponent)
                );
            }
            s
        }
    };
    Ok(Output { text, code: 0 })
}

fn configure_threads() {
    if let Some(n) = std::env::var("CHRISTOFFEL_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let (result, out) = match &cli.command {
        Command::Eval(a) => (cmd_eval(a), &a.out),
        Command::Max(a) => (cmd_max(a), &a.out),
        Command::Sigma(a) => (cmd_sigma(a), &a.out),
        Command::Certify(a) => (cmd_certify(a), &a.out),
        Command::Norms(a) => (cmd_norms(a), &a.out),
        Command::Table(a) => (cmd_table(a), a),
    };
    match result {
        Ok(o) => {
            let written = match &out.output {
                Some(path) => std::fs::write(path, &o.text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{}", o.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if o.code == 4 {
                eprintln!("warning: Gram system is degraded");
            } else if o.code == 5 {
                eprintln!("error: premise check failed");
            }
            ExitCode::from(o.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
