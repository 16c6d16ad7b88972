//! Domain JSON.
//!
//! ```json
//! {"type": "affine",
//!  "map": {"A": [[2, 0], [0, "0.5"]], "b": [0, 1]},
//!  "base": {"type": "ball_p", "dim": 2, "p": "inf"}}
//! ```
//!
//! Types: interval (a, b), cube (dim), ball_p (dim, p), simplex (vertices),
//! simplex_union (simplices, convex), half_ball (dim), cone_disk,
//! product (factors), affine (map {A, b}, base). Reals may be numbers or
//! decimal strings; "A" is row-major, either nested rows or flat.

use serde_json::{json, Map, Value};

use crate::geometry::{AffineMap, Domain};
use crate::{Error, Result};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn parse_real(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| perr(format!("bad number {n}"))),
        Value::String(s) => {
            let t = s.trim();
            match t {
                "inf" | "+inf" | "infinity" | "Infinity" => Ok(f64::INFINITY),
                _ => t.parse::<f64>().map_err(|_| perr(format!("not a real: {s:?}"))),
            }
        }
        _ => Err(perr(format!("expected a real, found {v}"))),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| perr(format!("missing field {key:?}")))
}

fn parse_usize(v: &Value) -> Result<usize> {
    let x = parse_real(v)?;
    if x >= 0.0 && x.fract() == 0.0 && x < 1e9 {
        Ok(x as usize)
    } else {
        Err(perr(format!("expected a non-negative integer, found {v}")))
    }
}

pub fn parse_vector(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| perr(format!("expected an array, found {v}")))?
        .iter()
        .map(parse_real)
        .collect()
}

fn parse_rows(v: &Value) -> Result<Vec<Vec<f64>>> {
    v.as_array()
        .ok_or_else(|| perr("expected an array of rows"))?
        .iter()
        .map(parse_vector)
        .collect()
}

fn parse_matrix(v: &Value, dim: usize) -> Result<Vec<Vec<f64>>> {
    let arr = v.as_array().ok_or_else(|| perr("\"A\" must be an array"))?;
    if arr.iter().all(|r| r.is_array()) {
        return parse_rows(v);
    }
    let flat = parse_vector(v)?;
    if flat.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: flat.len(),
        });
    }
    Ok(flat.chunks(dim).map(|c| c.to_vec()).collect())
}

pub fn domain_from_value(v: &Value) -> Result<Domain> {
    let obj = v.as_object().ok_or_else(|| perr("domain must be a JSON object"))?;
    let ty = field(obj, "type")?
        .as_str()
        .ok_or_else(|| perr("\"type\" must be a string"))?;
    match ty {
        "interval" => Domain::interval(parse_real(field(obj, "a")?)?, parse_real(field(obj, "b")?)?),
        "cube" => Domain::cube(parse_usize(field(obj, "dim")?)?),
        "ball_p" => Domain::ball_p(parse_usize(field(obj, "dim")?)?, parse_real(field(obj, "p")?)?),
        "simplex" => Domain::simplex(parse_rows(field(obj, "vertices")?)?),
        "simplex_union" => {
            let simplices = field(obj, "simplices")?
                .as_array()
                .ok_or_else(|| perr("\"simplices\" must be an array"))?
                .iter()
                .map(parse_rows)
                .collect::<Result<Vec<_>>>()?;
            let convex = match obj.get("convex") {
                None => false,
                Some(b) => b.as_bool().ok_or_else(|| perr("\"convex\" must be a boolean"))?,
            };
            Domain::simplex_union(simplices, convex)
        }
        "half_ball" => Domain::half_ball(parse_usize(field(obj, "dim")?)?),
        "cone_disk" => Ok(Domain::cone_disk()),
        "product" => {
            let factors = field(obj, "factors")?
                .as_array()
                .ok_or_else(|| perr("\"factors\" must be an array"))?
                .iter()
                .map(domain_from_value)
                .collect::<Result<Vec<_>>>()?;
            Domain::product(factors)
        }
        "affine" => {
            let base = domain_from_value(field(obj, "base")?)?;
            let m = field(obj, "map")?
                .as_object()
                .ok_or_else(|| perr("\"map\" must be an object"))?;
            let b = parse_vector(field(m, "b")?)?;
            let rows = parse_matrix(field(m, "A")?, b.len())?;
            if rows.len() != b.len() || rows.iter().any(|r| r.len() != b.len()) {
                return Err(Error::DimensionMismatch {
                    expected: b.len(),
                    found: rows.len(),
                });
            }
            Domain::affine(AffineMap::from_rows(&rows, &b)?, base)
        }
        other => Err(perr(format!("unknown domain type {other:?}"))),
    }
}

/// Parses a domain from JSON text. Syntax and schema problems are
/// [`Error::Parse`]; geometric ones keep their own variants.
pub fn parse_domain(text: &str) -> Result<Domain> {
    let v: Value = serde_json::from_str(text).map_err(|e| perr(e.to_string()))?;
    domain_from_value(&v)
}

fn real(x: f64) -> Value {
    if x.is_infinite() {
        Value::String(if x > 0.0 { "inf".into() } else { "-inf".into() })
    } else {
        json!(x)
    }
}

pub fn domain_to_json(domain: &Domain) -> Value {
    match domain {
        Domain::Interval { a, b } => json!({"type": "interval", "a": real(*a), "b": real(*b)}),
        Domain::Cube { dim } => json!({"type": "cube", "dim": dim}),
        Domain::BallP { dim, p } => json!({"type": "ball_p", "dim": dim, "p": real(*p)}),
        Domain::Simplex { vertices } => json!({"type": "simplex", "vertices": vertices}),
        Domain::SimplexUnion { simplices, convex } => {
            json!({"type": "simplex_union", "simplices": simplices, "convex": convex})
        }
        Domain::HalfBall { dim } => json!({"type": "half_ball", "dim": dim}),
        Domain::ConeDisk => json!({"type": "cone_disk"}),
        Domain::Product { factors } => {
            json!({"type": "product", "factors": factors.iter().map(domain_to_json).collect::<Vec<_>>()})
        }
        Domain::Affine { map, base } => json!({
            "type": "affine",
            "map": {"A": map.rows(), "b": map.offset().iter().copied().collect::<Vec<f64>>()},
            "base": domain_to_json(base),
        }),
    }
}

pub fn domain_to_string(domain: &Domain) -> String {
    serde_json::to_string_pretty(&domain_to_json(domain)).expect("domain JSON is always serializable")
}
