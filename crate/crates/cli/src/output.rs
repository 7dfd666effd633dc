//! Failures, number formatting and mesh sweeps.

use std::cell::RefCell;

use hrw_core::error::ParseError;
use hrw_core::integration::{converge_study, extrapolate, Oracle, PartitionSpec, Rect, LABEL};
use hrw_core::report::{self, fraction};
use hrw_core::scalar::{self, Scalar};
use hrw_core::{Error, ExtendedReal};
use serde_json::{json, Map, Value};

use crate::args::Ctx;

/// A failed invocation: the error case name and a one-line message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub name: String,
    pub message: String,
    /// Malformed input (exit 2) rather than a mathematical failure (exit 1).
    pub usage: bool,
}

impl Failure {
    pub fn usage(name: &str, message: impl Into<String>) -> Self {
        Failure {
            name: name.to_string(),
            message: message.into(),
            usage: true,
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Failure::usage("InvalidArgument", message)
    }

    pub fn parse(what: &str, input: &str, e: ParseError) -> Self {
        Failure::usage("ParseError", format!("{what} `{input}`: {e}"))
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn line(&self) -> String {
        let msg: Vec<&str> = self.message.split_whitespace().collect();
        format!("error[{}]: {}", self.name, msg.join(" "))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            name: e.name().to_string(),
            message: e.to_string(),
            usage: e.is_usage(),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Result of a subcommand in both output formats.
pub struct Output {
    pub text: String,
    pub json: Value,
}

/// Exact form when short, otherwise a decimal rounded to `digits` places
/// with trailing zeros removed.
pub fn num(q: &Scalar, digits: u32) -> String {
    let exact = scalar::render(q);
    if exact.len() <= 24 {
        return exact;
    }
    let d = report::decimal(q, digits as usize);
    let d = if d.contains('.') { d.trim_end_matches('0').trim_end_matches('.').to_string() } else { d };
    if d == "-0" {
        "0".to_string()
    } else {
        d
    }
}

pub fn vector(v: &[Scalar], digits: u32) -> String {
    format!("({})", v.iter().map(|q| num(q, digits)).collect::<Vec<_>>().join(", "))
}

pub fn vector_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(|q| Value::String(fraction(q))).collect())
}

pub fn extended(x: &ExtendedReal, digits: u32) -> String {
    match x {
        ExtendedReal::Finite(q) => num(q, digits),
        other => other.to_string(),
    }
}

pub fn extended_json(x: &ExtendedReal) -> Value {
    match x {
        ExtendedReal::Finite(q) => Value::String(fraction(q)),
        other => Value::String(other.to_string()),
    }
}

pub fn params_json(params: &[(String, String)]) -> Value {
    report::params_json(params)
}

/// An extra per-row column.
#[derive(Clone, Debug)]
pub enum Cell {
    Q(Scalar),
    N(usize),
}

impl Cell {
    fn json(&self) -> Value {
        match self {
            Cell::Q(q) => Value::String(fraction(q)),
            Cell::N(n) => json!(n),
        }
    }

    fn text(&self, digits: u32) -> String {
        match self {
            Cell::Q(q) => num(q, digits),
            Cell::N(n) => n.to_string(),
        }
    }

    fn column(&self) -> String {
        match self {
            Cell::Q(q) => column_number(q),
            Cell::N(n) => n.to_string(),
        }
    }
}

pub fn column_number(q: &Scalar) -> String {
    let exact = scalar::render(q);
    if exact.len() <= 14 {
        exact
    } else {
        report::decimal(q, 12)
    }
}

/// One partition's result: the primary value and named extras.
#[derive(Clone, Debug)]
pub struct Row {
    pub value: Scalar,
    pub extra: Vec<(String, Cell)>,
}

impl Row {
    pub fn new(value: Scalar) -> Self {
        Row { value, extra: Vec::new() }
    }

    pub fn with(mut self, name: &str, cell: Cell) -> Self {
        self.extra.push((name.to_string(), cell));
        self
    }
}

/// A sum evaluated over every requested partition of `rect`.
pub struct Sweep<'a> {
    pub operation: String,
    pub params: Vec<(String, String)>,
    pub rect: Rect,
    /// A one-variable integrand whose integral over `rect` is the limit,
    /// for the quadrature oracle.
    pub quadrature: Option<hrw_core::integration::Integrand>,
    pub target: &'a dyn Fn(&PartitionSpec) -> hrw_core::Result<Row>,
}

impl Sweep<'_> {
    /// Runs the sweep; a convergence study when an oracle is given or
    /// `require_oracle` is set.
    pub fn run(self, ctx: &Ctx, require_oracle: bool) -> CliResult<Output> {
        let d = ctx.precision();
        let parts = ctx.partitions(&self.rect)?;
        let mut params = self.params.clone();
        params.push(("rect".into(), ctx.rect_param(&self.rect)));
        params.push(("tags".into(), ctx.rule.name().into()));
        if let hrw_core::integration::TagRule::SeededRandom(seed) = ctx.rule {
            params.push(("seed".into(), seed.to_string()));
        }
        let oracle = self.oracle(ctx, require_oracle)?;
        let (rows, study) = match &oracle {
            None => {
                let rows = parts
                    .iter()
                    .map(|(h, spec)| Ok((h.clone(), (self.target)(spec)?)))
                    .collect::<hrw_core::Result<Vec<_>>>()?;
                (rows, None)
            }
            Some(o) => {
                let seen = RefCell::new(Vec::new());
                let meshes: Vec<Scalar> = parts.iter().map(|(h, _)| h.clone()).collect();
                let target = |h: &Scalar| {
                    let spec = &parts.iter().find(|(m, _)| m == h).expect("known mesh").1;
                    let row = (self.target)(spec)?;
                    let v = row.value.clone();
                    seen.borrow_mut().push((h.clone(), row));
                    Ok(v)
                };
                let study = converge_study(&self.operation, params.clone(), &meshes, &target, o)?;
                (seen.into_inner(), Some(study))
            }
        };
        let tail: Vec<(Scalar, Scalar)> =
            rows.iter().skip(rows.len().saturating_sub(3)).map(|(h, r)| (h.clone(), r.value.clone())).collect();
        let estimate = match &study {
            Some(s) => s.estimate.clone(),
            None => extrapolate(&tail),
        };

        let mut json_rows = Vec::new();
        for (i, (h, r)) in rows.iter().enumerate() {
            let mut m = Map::new();
            m.insert("mesh".into(), Value::String(fraction(h)));
            m.insert("value".into(), Value::String(fraction(&r.value)));
            for (k, c) in &r.extra {
                m.insert(k.clone(), c.json());
            }
            if let Some(s) = &study {
                m.insert("error".into(), Value::String(fraction(&s.rows[i].error)));
            }
            json_rows.push(Value::Object(m));
        }
        let opt = |v: Option<Value>| v.unwrap_or(Value::Null);
        let json = json!({
            "operation": self.operation,
            "label": LABEL,
            "params": params_json(&params),
            "rows": json_rows,
            "estimate": fraction(&estimate),
            "oracle": opt(study.as_ref().map(|s| Value::String(fraction(&s.oracle)))),
            "oracle_kind": opt(study.as_ref().map(|s| Value::String(s.oracle_kind.clone()))),
            "error": opt(study.as_ref().map(|s| Value::String(fraction(&s.error)))),
            "notes": study.as_ref().map(|s| s.notes.clone()).unwrap_or_default(),
        });

        let text = if rows.len() == 1 && study.is_none() {
            let (h, r) = &rows[0];
            let mut t = format!("{}\n", num(&r.value, d));
            for (k, c) in &r.extra {
                t += &format!("{k}: {}\n", c.text(d));
            }
            t += &format!("mesh: {} ({LABEL})\n", num(h, d));
            t
        } else {
            let mut t = format!("{} ({LABEL})\n", self.operation);
            for (k, v) in &params {
                t += &format!("  {k}: {v}\n");
            }
            let mut headers = vec!["mesh".to_string(), "value".to_string()];
            headers.extend(rows[0].1.extra.iter().map(|(k, _)| k.clone()));
            if study.is_some() {
                headers.push("error".into());
            }
            let table_rows: Vec<Vec<String>> = rows
                .iter()
                .enumerate()
                .map(|(i, (h, r))| {
                    let mut cells = vec![column_number(h), column_number(&r.value)];
                    cells.extend(r.extra.iter().map(|(_, c)| c.column()));
                    if let Some(s) = &study {
                        cells.push(report::short(&s.rows[i].error));
                    }
                    cells
                })
                .collect();
            let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
            t += &report::table(&header_refs, &table_rows);
            t += &format!("estimate  {}\n", report::decimal(&estimate, 12));
            if let Some(s) = &study {
                t += &format!("oracle    {} ({})\n", report::decimal(&s.oracle, 12), s.oracle_kind);
                t += &format!("error     {}\n", report::short(&s.error));
                for n in &s.notes {
                    t += &format!("note: {n}\n");
                }
            }
            t
        };
        Ok(Output { text, json })
    }

    fn oracle(&self, ctx: &Ctx, required: bool) -> CliResult<Option<Oracle>> {
        let quadrature = || match &self.quadrature {
            Some(integrand) => Ok(Oracle::Quadrature {
                integrand: integrand.clone(),
                a: self.rect.lo()[0].clone(),
                b: self.rect.hi()[0].clone(),
            }),
            None => Err(Failure::invalid(format!(
                "no quadrature oracle for {}; pass --oracle VALUE",
                self.operation
            ))),
        };
        match ctx.oracle.as_deref() {
            Some("simpson") | Some("adaptive-simpson") => Ok(Some(quadrature()?)),
            Some(v) => Ok(Some(Oracle::Closed(ctx.number("--oracle", v)?))),
            None if required => Ok(Some(quadrature()?)),
            None => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hrw_core::scalar::{int, ratio};

    #[test]
    fn numbers_render_short_or_decimal() {
        assert_eq!(num(&int(12), 40), "12");
        assert_eq!(num(&ratio(-1, 3), 40), "-1/3");
        let near_one = int(1) - scalar::pow2(-160);
        assert_eq!(num(&near_one, 40), "1");
        let third = ratio(1, 3) + scalar::pow2(-170);
        assert_eq!(num(&third, 10), "0.3333333333");
    }

    #[test]
    fn failure_lines_are_single_line() {
        let f = Failure::invalid("two\nlines");
        assert_eq!(f.line(), "error[InvalidArgument]: two lines");
        let f: Failure = Error::ZeroVelocity.into();
        assert!(!f.usage);
        assert_eq!(f.name, "ZeroVelocity");
    }
}
