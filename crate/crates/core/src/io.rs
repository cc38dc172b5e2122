//! JSON interchange. Element ids and coordinates in files are 1-based;
//! everything in memory is 0-based.
//!
//! Poset: `{"d", "m", "points": [[c1, ..., cd], ...]}` with an optional
//! `"base"` (0 or 1, default 1).
//!
//! Spanner: `{"originals": n, "steiners": [[coords] | null, ...],
//! "edges": [[tail, head], ...]}`. Writers add `"d"`, the original
//! coordinates as `"points"`, and `"meta"`. Without `"points"` the originals
//! are taken from the poset supplied by the caller.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::dual::{CertifyMode, DualCertificate};
use crate::error::{Error, Result};
use crate::graph::{SpannerGraph, VertexId};
use crate::integral::IntegralReport;
use crate::jumps::MappingReport;
use crate::oracle::OracleResult;
use crate::poset::{GridPoint, Poset};
use crate::verify::VerificationReport;

fn format_err(e: serde_json::Error) -> Error {
    Error::Format(e.to_string())
}

fn one() -> i64 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PosetFile {
    d: usize,
    m: i64,
    points: Vec<Vec<i64>>,
    #[serde(default = "one")]
    base: i64,
    #[serde(default)]
    #[allow(dead_code)]
    meta: Option<Value>,
}

fn shift_point(c: &[i64], base: i64, what: &str) -> Result<GridPoint> {
    c.iter()
        .map(|&x| {
            u32::try_from(x - base).map_err(|_| {
                Error::Format(format!("{what} coordinate {x} is below the base {base}"))
            })
        })
        .collect::<Result<Vec<u32>>>()
        .map(GridPoint::new)
}

pub fn parse_poset(text: &str) -> Result<Poset> {
    let f: PosetFile = serde_json::from_str(text).map_err(format_err)?;
    if f.base != 0 && f.base != 1 {
        return Err(Error::Format(format!(
            "base must be 0 or 1, got {}",
            f.base
        )));
    }
    let side = u32::try_from(f.m)
        .ok()
        .filter(|&m| m > 0)
        .ok_or_else(|| Error::Format(format!("m must be a positive integer, got {}", f.m)))?;
    let points = f
        .points
        .iter()
        .map(|c| shift_point(c, f.base, "point"))
        .collect::<Result<Vec<_>>>()?;
    Poset::new(f.d, side, points)
}

fn one_based(p: &GridPoint) -> Vec<u64> {
    p.coords().iter().map(|&c| c as u64 + 1).collect()
}

fn with_meta(mut v: Value, meta: Option<&Value>) -> Value {
    if let (Some(meta), Value::Object(map)) = (meta, &mut v) {
        map.insert("meta".into(), meta.clone());
    }
    v
}

pub fn poset_to_json(p: &Poset, meta: Option<&Value>) -> Value {
    let points: Vec<Vec<u64>> = p.points().iter().map(one_based).collect();
    with_meta(json!({"d": p.dim(), "m": p.side(), "points": points}), meta)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpannerFile {
    originals: usize,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default)]
    points: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    steiners: Vec<Option<Vec<i64>>>,
    edges: Vec<(i64, i64)>,
    #[serde(default)]
    #[allow(dead_code)]
    meta: Option<Value>,
}

/// Reads a spanner. `poset` supplies the originals when the file has no
/// `"points"`.
pub fn parse_spanner(text: &str, poset: Option<&Poset>) -> Result<SpannerGraph> {
    let f: SpannerFile = serde_json::from_str(text).map_err(format_err)?;
    let originals = match (&f.points, poset) {
        (Some(points), _) => points
            .iter()
            .map(|c| shift_point(c, 1, "original"))
            .collect::<Result<Vec<_>>>()?,
        (None, Some(p)) => p.points().to_vec(),
        (None, None) => {
            return Err(Error::Format(
                "spanner file has no \"points\"; supply the poset".into(),
            ))
        }
    };
    if originals.len() != f.originals {
        return Err(Error::Format(format!(
            "\"originals\" is {} but {} original points are known",
            f.originals,
            originals.len()
        )));
    }
    let d =
        f.d.or_else(|| originals.first().map(GridPoint::dim))
            .or(poset.map(Poset::dim))
            .ok_or_else(|| Error::Format("cannot tell the dimension".into()))?;
    let steiners = f
        .steiners
        .iter()
        .map(|s| s.as_ref().map(|c| shift_point(c, 1, "Steiner")).transpose())
        .collect::<Result<Vec<_>>>()?;
    let total = (originals.len() + steiners.len()) as i64;
    let id = |x: i64| -> Result<VertexId> {
        if x < 1 || x > total {
            Err(Error::Format(format!("vertex id {x} outside 1..={total}")))
        } else {
            Ok((x - 1) as usize)
        }
    };
    let edges = f
        .edges
        .iter()
        .map(|&(t, h)| Ok((id(t)?, id(h)?)))
        .collect::<Result<Vec<_>>>()?;
    SpannerGraph::new(d, originals, steiners, edges)
}

pub fn spanner_to_json(s: &SpannerGraph, meta: Option<&Value>) -> Value {
    let points: Vec<Vec<u64>> = s.originals().iter().map(one_based).collect();
    let steiners: Vec<Option<Vec<u64>>> = s
        .steiners()
        .iter()
        .map(|c| c.as_ref().map(one_based))
        .collect();
    let edges: Vec<[usize; 2]> = s
        .edges_in_coordinate_order()
        .into_iter()
        .map(|(u, v)| [u + 1, v + 1])
        .collect();
    with_meta(
        json!({
            "d": s.dim(),
            "originals": s.original_count(),
            "points": points,
            "steiners": steiners,
            "edges": edges,
        }),
        meta,
    )
}

pub fn report_to_json(r: &VerificationReport, meta: Option<&Value>) -> Value {
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| {
            json!({
                "kind": v.kind,
                "pair": [v.pair.0 + 1, v.pair.1 + 1],
                "distance": v.distance,
            })
        })
        .collect();
    with_meta(
        json!({
            "k": r.k,
            "valid": r.is_valid(),
            "total_violations": r.total_violations,
            "violations": violations,
        }),
        meta,
    )
}

pub fn oracle_to_json(r: &OracleResult, k: u32, meta: Option<&Value>) -> Value {
    let witness: Vec<[usize; 2]> = r.witness.iter().map(|&(u, v)| [u + 1, v + 1]).collect();
    with_meta(
        json!({
            "k": k,
            "opt_size": r.opt_size,
            "explored": r.explored,
            "witness": witness,
        }),
        meta,
    )
}

/// Exact decimal expansion of `r`, truncated toward zero after `digits`
/// fractional digits.
pub fn decimal_string(r: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (r.numer().abs() * &scale) / r.denom();
    let (int, frac) = scaled.div_rem(&scale);
    let sign = if r.is_negative() && !scaled.is_zero() {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
}

pub fn rational_to_json(r: &BigRational) -> Value {
    json!({
        "decimal": decimal_string(r, 12),
        "num": r.numer().to_string(),
        "den": r.denom().to_string(),
    })
}

pub fn certificate_to_json(c: &DualCertificate, meta: Option<&Value>) -> Value {
    let mode = match c.mode {
        CertifyMode::Exact { max_elements } => {
            json!({"kind": "exact", "max_elements": max_elements})
        }
        CertifyMode::Sampled { samples, seed } => {
            json!({"kind": "sampled", "samples": samples, "seed": seed})
        }
    };
    with_meta(
        json!({
            "m": c.m,
            "d": c.d,
            "mode": mode,
            "status": c.status.as_str(),
            "objective_raw": rational_to_json(&c.objective_raw),
            "objective_closed_form": rational_to_json(&c.objective_closed_form),
            "objective_enumerated": c.objective_enumerated,
            "max_constraint_lhs": rational_to_json(&c.max_constraint_lhs),
            "max_lhs_pair": [one_based_dual(&c.max_lhs_pair.0), one_based_dual(&c.max_lhs_pair.1)],
            "scale": c.scale,
            "certified_bound": c.certified_bound,
            "checks": {
                "lhs_within_scale": c.lhs_within_scale,
                "objective_matches_closed_form": c.objective_matches_closed_form,
                "exceeds_log_bound": c.exceeds_log_bound,
                "exceeds_harmonic_bound": c.exceeds_harmonic_bound,
                "step2_tight": c.step2_tight,
            },
        }),
        meta,
    )
}

/// Dual certificates already use 1-based points.
fn one_based_dual(p: &GridPoint) -> Vec<u32> {
    p.coords().to_vec()
}

pub fn integral_to_json(r: &IntegralReport, meta: Option<&Value>) -> Value {
    with_meta(
        json!({
            "d": r.d,
            "samples": r.samples,
            "seed": r.seed,
            "j": {"value": r.j.value, "error": r.j.error, "ok": r.j_ok},
            "i_d": {
                "method": r.method,
                "value": r.i_d.value,
                "stderr": r.i_d.stderr,
                "bound": r.bound,
                "ok": r.i_ok,
            },
            "status": r.status.as_str(),
        }),
        meta,
    )
}

pub fn mapping_to_json(r: &MappingReport, meta: Option<&Value>) -> Value {
    let assignments: Vec<Value> = r
        .assignments
        .iter()
        .map(|(j, (u, v))| {
            json!({
                "a": j.a + 1,
                "b": j.b + 1,
                "ivec": j.ivec,
                "jvec": j.jvec,
                "edge": [u + 1, v + 1],
            })
        })
        .collect();
    with_meta(
        json!({
            "d": r.d,
            "k": r.k,
            "jumps": r.jump_count,
            "edges": r.edge_count,
            "injective": r.injective,
            "max_multiplicity": r.max_multiplicity,
            "min_parity_distance": r.min_parity_distance,
            "required_distance": r.required_distance,
            "multiplicity_bound": r.multiplicity_bound,
            "holds": r.holds(),
            "assignments": assignments,
        }),
        meta,
    )
}

fn pretty_into(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Array(items) if items.iter().any(|x| x.is_array() || x.is_object()) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                pretty_into(x, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                pretty_into(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Indented JSON with a trailing newline; arrays of scalars stay on one
/// line. Object keys come out sorted, so equal values give identical bytes.
pub fn to_pretty(v: &Value) -> String {
    let mut s = String::new();
    pretty_into(v, 0, &mut s);
    s.push('\n');
    s
}
