//! Representation files: parsing, gallery references, and the canonical
//! resolved form whose digest identifies the input in every report.
//!
//! A rep file is a JSON object with exactly one identity among
//! `abelian_generators` (matrices mode), `weights` (+ optional `basis`),
//! or `gallery`. Optional extras: `p_generators` (noncompact generators
//! beyond the abelian ones, row-major), `k_action`, `arithmetic`.
//! In exact mode all weight entries are `"p/q"` strings.

use gradmap::linalg::{Mat, SymMatrix};
use gradmap::repmodel::gallery::{self, KAction};
use gradmap::repmodel::{build_representation, from_weights, Representation};
use gradmap::{Exact, Scalar};
use num_bigint::BigInt;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::str::FromStr;

pub struct LoadedRep {
    pub rep: Representation,
    /// Arithmetic declared by the input (before any environment override).
    pub declared_exact: bool,
    /// Hex SHA-256 of the canonical resolved form; equal inputs get equal
    /// digests regardless of how they were written.
    pub digest: String,
}

/// Loads a representation from `gallery:<name>[:params...]` or a file path.
pub fn load(arg: &str) -> Result<LoadedRep, String> {
    let rep = if let Some(spec) = arg.strip_prefix("gallery:") {
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or_default();
        let params: Vec<i64> = parts
            .map(|p| p.parse::<i64>().map_err(|_| format!("bad gallery parameter {p:?}")))
            .collect::<Result<_, _>>()?;
        gallery::build(name, &params).map_err(|e| format!("{e} [{e:?}]"))?
    } else {
        let text = std::fs::read_to_string(arg).map_err(|e| format!("cannot read {arg}: {e}"))?;
        let doc: Value =
            serde_json::from_str(&text).map_err(|e| format!("malformed JSON in {arg}: {e}"))?;
        parse_repfile(&doc)?
    };
    let declared_exact = rep.exact_weights().is_some();
    let digest = hex_digest(&canonical_form(&rep, declared_exact));
    Ok(LoadedRep { rep, declared_exact, digest })
}

fn hex_digest(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

// ── parsing ──────────────────────────────────────────────────────────────

const KNOWN_KEYS: [&str; 9] = [
    "dimension",
    "mode",
    "abelian_generators",
    "p_generators",
    "weights",
    "basis",
    "arithmetic",
    "k_action",
    "gallery",
];

fn parse_repfile(doc: &Value) -> Result<Representation, String> {
    let obj = doc.as_object().ok_or("rep file must be a JSON object")?;
    for key in obj.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(format!("unknown rep file field {key:?}"));
        }
    }
    let identities = [
        obj.contains_key("abelian_generators"),
        obj.contains_key("weights"),
        obj.contains_key("gallery"),
    ];
    if identities.iter().filter(|&&b| b).count() != 1 {
        return Err(
            "exactly one of abelian_generators, weights, gallery must be present".to_string()
        );
    }

    if let Some(g) = obj.get("gallery") {
        let name = g
            .get("name")
            .and_then(Value::as_str)
            .ok_or("gallery reference needs a name")?;
        let params: Vec<i64> = match g.get("params") {
            None => Vec::new(),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_i64().ok_or("gallery params must be integers".to_string()))
                .collect::<Result<_, _>>()?,
            Some(_) => return Err("gallery params must be an array".to_string()),
        };
        return gallery::build(name, &params).map_err(|e| format!("{e} [{e:?}]"));
    }

    let n = obj
        .get("dimension")
        .and_then(Value::as_u64)
        .ok_or("dimension must be a positive integer")? as usize;
    let exact_mode = match obj.get("arithmetic").and_then(Value::as_str) {
        None | Some("float") => false,
        Some("exact") => true,
        Some(other) => return Err(format!("unknown arithmetic {other:?}")),
    };

    let mut rep = if let Some(gens) = obj.get("abelian_generators") {
        if obj.get("mode").and_then(Value::as_str).unwrap_or("matrices") != "matrices" {
            return Err("abelian_generators requires mode \"matrices\"".to_string());
        }
        if exact_mode {
            return Err("exact arithmetic requires weights mode".to_string());
        }
        let mats = parse_matrices(gens, n, "abelian_generators")?;
        build_representation(mats).map_err(|e| format!("{e} [{e:?}]"))?
    } else {
        if obj.get("mode").and_then(Value::as_str).unwrap_or("weights") != "weights" {
            return Err("weights requires mode \"weights\"".to_string());
        }
        let rows = obj.get("weights").unwrap();
        let rows = rows.as_array().ok_or("weights must be an array of rows")?;
        if rows.len() != n {
            return Err(format!("dimension {n} does not match {} weight rows", rows.len()));
        }
        let mut float_rows = Vec::with_capacity(rows.len());
        let mut exact_rows = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array().ok_or("each weight row must be an array")?;
            let mut fr = Vec::with_capacity(row.len());
            let mut er = Vec::with_capacity(row.len());
            for entry in row {
                let rational = parse_entry(entry, exact_mode)?;
                fr.push(rational.to_f64());
                er.push(rational);
            }
            float_rows.push(fr);
            exact_rows.push(er);
        }
        let basis = match obj.get("basis") {
            None => None,
            Some(b) => Some(parse_basis(b, n)?),
        };
        from_weights(float_rows, basis, exact_mode.then_some(exact_rows))
            .map_err(|e| format!("{e} [{e:?}]"))?
    };

    if let Some(p) = obj.get("p_generators") {
        let extra = parse_matrices(p, n, "p_generators")?;
        rep = rep.with_p_gens(extra).map_err(|e| format!("{e} [{e:?}]"))?;
    }
    if let Some(k) = obj.get("k_action") {
        rep = rep.with_k_action(parse_k_action(k)?);
    }
    Ok(rep)
}

/// One numeric entry: a JSON number, or a `"p/q"` string. Exact mode
/// requires the string form so every input is certifiably rational.
fn parse_entry(v: &Value, exact_required: bool) -> Result<Exact, String> {
    match v {
        Value::String(s) => {
            let (num, den) = match s.split_once('/') {
                Some((a, b)) => (a, b),
                None => (s.as_str(), "1"),
            };
            let num = BigInt::from_str(num.trim()).map_err(|_| format!("bad rational {s:?}"))?;
            let den = BigInt::from_str(den.trim()).map_err(|_| format!("bad rational {s:?}"))?;
            if den == BigInt::from(0) {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(Exact::new(num, den))
        }
        Value::Number(_) if exact_required => {
            Err("exact mode requires weight entries as \"p/q\" strings".to_string())
        }
        Value::Number(n) => {
            let f = n.as_f64().ok_or("entry out of range")?;
            Exact::from_float(f).ok_or_else(|| format!("entry {f} is not finite"))
        }
        _ => Err("numeric entries must be numbers or \"p/q\" strings".to_string()),
    }
}

fn parse_basis(v: &Value, n: usize) -> Result<Mat, String> {
    let rows = v.as_array().ok_or("basis must be an array of rows")?;
    if rows.len() != n {
        return Err(format!("basis needs {n} rows, got {}", rows.len()));
    }
    let mut parsed = Vec::with_capacity(n);
    for row in rows {
        let row = row.as_array().ok_or("each basis row must be an array")?;
        if row.len() != n {
            return Err(format!("basis rows need {n} entries, got {}", row.len()));
        }
        let fr: Vec<f64> = row
            .iter()
            .map(|e| parse_entry(e, false).map(|r| r.to_f64()))
            .collect::<Result<_, _>>()?;
        parsed.push(fr);
    }
    Ok(Mat::from_rows(&parsed))
}

fn parse_matrices(v: &Value, n: usize, what: &str) -> Result<Vec<SymMatrix>, String> {
    let list = v.as_array().ok_or_else(|| format!("{what} must be an array"))?;
    let mut out = Vec::with_capacity(list.len());
    for entry in list {
        let flat = entry.as_array().ok_or_else(|| format!("{what} entries must be arrays"))?;
        if flat.len() != n * n {
            return Err(format!("{what} entries need {} values (row-major), got {}", n * n, flat.len()));
        }
        let data: Vec<f64> = flat
            .iter()
            .map(|e| parse_entry(e, false).map(|r| r.to_f64()))
            .collect::<Result<_, _>>()?;
        out.push(SymMatrix::new(n, data).map_err(|e| format!("{e} [{e:?}]"))?);
    }
    Ok(out)
}

fn parse_k_action(v: &Value) -> Result<KAction, String> {
    match v.get("kind").and_then(Value::as_str) {
        Some("plane_rotation") => Ok(KAction::PlaneRotation),
        Some("binary_rotation") => {
            let d = v
                .get("degree")
                .and_then(Value::as_u64)
                .ok_or("binary_rotation needs a degree")? as usize;
            Ok(KAction::BinaryRotation { degree: d })
        }
        _ => Err("k_action kind must be plane_rotation or binary_rotation".to_string()),
    }
}

// ── canonical form ───────────────────────────────────────────────────────

/// Serializes the resolved representation in weights mode with a fixed
/// field order, so a gallery reference and its emitted expansion hash to
/// the same digest and reports stay byte-identical across sources.
pub fn canonical_form(rep: &Representation, exact: bool) -> String {
    let mut out = String::from("{\n");
    let n = rep.dim();
    out.push_str(&format!("  \"dimension\": {n},\n"));
    out.push_str("  \"mode\": \"weights\",\n");

    out.push_str("  \"weights\": [\n");
    if exact {
        let rows = rep.exact_weights().unwrap();
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|r| format!("{:?}", rational_str(r))).collect();
            push_row(&mut out, &cells, i + 1 == rows.len());
        }
    } else {
        for (i, row) in rep.weights().iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|&x| float_str(x)).collect();
            push_row(&mut out, &cells, i + 1 == rep.weights().len());
        }
    }
    out.push_str("  ],\n");

    out.push_str("  \"basis\": [\n");
    for i in 0..n {
        let cells: Vec<String> = rep.basis().row(i).iter().map(|&x| entry_str(x, exact)).collect();
        push_row(&mut out, &cells, i + 1 == n);
    }
    out.push_str("  ],\n");

    if let Some(p) = rep.p_basis() {
        let m = rep.abelian_dim();
        if p.len() > m {
            out.push_str("  \"p_generators\": [\n");
            for (k, gen) in p[m..].iter().enumerate() {
                let mut cells = Vec::with_capacity(n * n);
                for r in 0..n {
                    cells.extend(gen.mat().row(r).iter().map(|&x| entry_str(x, exact)));
                }
                push_row(&mut out, &cells, k + 1 == p.len() - m);
            }
            out.push_str("  ],\n");
        }
    }
    if let Some(k) = rep.k_action() {
        match *k {
            KAction::PlaneRotation => {
                out.push_str("  \"k_action\": {\"kind\": \"plane_rotation\"},\n");
            }
            KAction::BinaryRotation { degree } => {
                out.push_str(&format!(
                    "  \"k_action\": {{\"kind\": \"binary_rotation\", \"degree\": {degree}}},\n"
                ));
            }
        }
    }
    out.push_str(&format!(
        "  \"arithmetic\": \"{}\"\n",
        if exact { "exact" } else { "float" }
    ));
    out.push_str("}\n");
    out
}

fn push_row(out: &mut String, cells: &[String], last: bool) {
    out.push_str("    [");
    out.push_str(&cells.join(", "));
    out.push(']');
    if !last {
        out.push(',');
    }
    out.push('\n');
}

fn rational_str(r: &Exact) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn entry_str(x: f64, exact: bool) -> String {
    if exact {
        // f64 values are dyadic, hence exactly rational.
        format!("{:?}", rational_str(&Exact::from_float(x).unwrap()))
    } else {
        float_str(x)
    }
}

/// 17 significant digits: lossless and byte-stable for every f64.
pub fn float_str(x: f64) -> String {
    format!("{x:.16e}")
}
