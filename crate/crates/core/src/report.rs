//! Text tables and JSON documents for integration reports. Rationals in JSON
//! are `"p/q"` strings so that reports round-trip exactly.

use num_bigint::BigInt;
use num_traits::Signed;
use serde_json::{json, Map, Value};

use crate::integration::ConvergenceReport;
use crate::scalar::{self, Scalar};

/// Exact `"p/q"` form.
pub fn fraction(q: &Scalar) -> String {
    scalar::render_fraction(q)
}

/// `q` rounded half away from zero to `digits` decimal places.
pub fn decimal(q: &Scalar, digits: usize) -> String {
    let scale = Scalar::from_integer(num_traits::pow(BigInt::from(10), digits));
    let scaled = (q.abs() * scale).round().to_integer();
    let s = format!("{:0>width$}", scaled.to_string(), width = digits + 1);
    let (whole, frac) = s.split_at(s.len() - digits);
    let sign = if q.is_negative() && scaled.bits() > 0 { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac}")
    }
}

/// Scientific notation with three significant digits, for error columns.
pub fn short(q: &Scalar) -> String {
    format!("{:.3e}", scalar::to_f64(q))
}

/// Left-aligned first column, right-aligned others, two spaces apart.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = vec![line(headers.to_vec())];
    out.extend(rows.iter().map(|r| line(r.iter().map(String::as_str).collect())));
    out.join("\n") + "\n"
}

pub fn params_json(params: &[(String, String)]) -> Value {
    Value::Object(params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect::<Map<_, _>>())
}

pub fn convergence_json(r: &ConvergenceReport) -> Value {
    json!({
        "operation": r.operation,
        "label": r.label,
        "params": params_json(&r.params),
        "rows": r.rows.iter().map(|row| json!({
            "mesh": fraction(&row.mesh),
            "value": fraction(&row.value),
            "error": fraction(&row.error),
        })).collect::<Vec<_>>(),
        "estimate": fraction(&r.estimate),
        "oracle": fraction(&r.oracle),
        "oracle_kind": r.oracle_kind,
        "error": fraction(&r.error),
        "notes": r.notes,
    })
}

pub fn convergence_text(r: &ConvergenceReport) -> String {
    let mut out = format!("{} ({})\n", r.operation, r.label);
    for (k, v) in &r.params {
        out += &format!("  {k}: {v}\n");
    }
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| vec![scalar::render(&row.mesh), decimal(&row.value, 12), short(&row.error)])
        .collect();
    out += &table(&["mesh", "value", "error"], &rows);
    out += &format!("estimate  {}\n", decimal(&r.estimate, 12));
    out += &format!("oracle    {} ({})\n", decimal(&r.oracle, 12), r.oracle_kind);
    out += &format!("error     {}\n", short(&r.error));
    for n in &r.notes {
        out += &format!("note: {n}\n");
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::{converge_study, Oracle};
    use crate::scalar::{int, ratio};

    #[test]
    fn decimals() {
        assert_eq!(decimal(&ratio(1, 3), 4), "0.3333");
        assert_eq!(decimal(&ratio(-2, 3), 2), "-0.67");
        assert_eq!(decimal(&ratio(-1, 1000), 2), "0.00");
        assert_eq!(decimal(&int(12), 0), "12");
        assert_eq!(decimal(&ratio(5, 2), 0), "3");
    }

    #[test]
    fn tables_align() {
        let t = table(&["a", "value"], &[vec!["1/2".into(), "1".into()], vec!["1/16".into(), "0.25".into()]]);
        assert_eq!(t, "a     value\n1/2       1\n1/16   0.25\n");
    }

    #[test]
    fn json_round_trips() {
        let r = converge_study("c", vec![("f".into(), "3".into())], &[ratio(1, 2), ratio(1, 4)], &|h| Ok(h + int(3)), &Oracle::Closed(int(3)))
            .unwrap();
        let v = convergence_json(&r);
        assert_eq!(v["rows"][1]["value"], "13/4");
        assert_eq!(v["label"], "finite-scale emulation");
        assert_eq!(v["params"]["f"], "3");
        assert_eq!(to_json_string(&v), to_json_string(&convergence_json(&r)));
        assert!(convergence_text(&r).contains("estimate"));
    }
}
