use std::collections::HashMap;

use hrw_core::calculus::{
    continuity_check, curvature, default_variables, fn_limit, jacobian, kinematics, nth_increment, seq_limit, sole_variable,
    tangent_certificate, taylor_jet_in, unit_tangent, CurveDef, LimitResult, LimitValue,
};
use hrw_core::expr::{eval_hyper, eval_real, BinOp};
use hrw_core::integration::{
    axis_names, cousin_partition, darboux_bounds, impulse, line_integral_work, measure_area_between, measure_curve_length,
    measure_mass_moment_com, measure_surface_revolution, measure_volume_revolution, moment_of_inertia, morley_strip_sum,
    riemann_stieltjes_sum, riemann_sum, supernearness_probe, Functional, Gauge, GaugeMode, InnerSum, Integrand,
    MorleyEdge, PartitionSpec, Rect, Region, LABEL,
};
use hrw_core::report::{self, fraction};
use hrw_core::scalar::{self, Scalar};
use hrw_core::{Exponent, Expr, HyperReal};
use serde_json::{json, Value};

use crate::args::Ctx;
use crate::cli::{Cli, Command, CurveAt, Edge, IntegrateArgs, MeasureKind, Method, Probe, RegionArgs, Side, Target};
use crate::output::{column_number, extended, extended_json, num, params_json, vector, vector_json, Cell, CliResult, Failure, Output, Row, Sweep};

pub fn dispatch(cli: &Cli) -> CliResult<Output> {
    let ctx = Ctx::new(&cli.global)?;
    match &cli.command {
        Command::Eval { expr, at } => eval(&ctx, expr, at),
        Command::St(p) => probe(&ctx, p, false),
        Command::Classify(p) => probe(&ctx, p, true),
        Command::LimitSeq { expr } => limit_seq(&ctx, expr),
        Command::LimitFn { expr, at, continuity } => limit_fn(&ctx, expr, at, *continuity),
        Command::Diff { expr, at, order } => diff(&ctx, expr, at, *order),
        Command::Jet { expr, at, order } => jet(&ctx, expr, at, *order),
        Command::Increment { expr, at, order } => increment(&ctx, expr, at, *order),
        Command::Tangent(c) => tangent(&ctx, c),
        Command::Curvature(c) => curvature_cmd(&ctx, c),
        Command::Jacobian { map, at, vars } => jacobian_cmd(&ctx, map, at, vars),
        Command::Kinematics { expr, at } => kinematics_cmd(&ctx, expr, at),
        Command::Integrate(a) => integrate(&ctx, a, false),
        Command::Measure { kind } => measure(&ctx, kind, false),
        Command::Converge { target } => match target {
            Target::Integrate(a) => integrate(&ctx, a, true),
            Target::Measure { kind } => measure(&ctx, kind, true),
        },
        Command::ProbeSupernear { f, functional } => probe_supernear(&ctx, f, functional),
    }
}

fn bindings(at: &[String]) -> CliResult<Vec<(String, String)>> {
    at.iter()
        .map(|b| {
            let (v, x) = b
                .split_once('=')
                .ok_or_else(|| Failure::invalid(format!("binding `{b}` is not of the form VAR=VALUE")))?;
            Ok((v.trim().to_string(), x.trim().to_string()))
        })
        .collect()
}

fn eval(ctx: &Ctx, src: &str, at: &[String]) -> CliResult<Output> {
    let e = ctx.expr("expression", src)?;
    let mut env = HashMap::new();
    for (v, x) in bindings(at)? {
        env.insert(v.clone(), ctx.number(&format!("--at {v}"), &x)?);
    }
    let value = eval_real(&e, &env, ctx.precision())?;
    Ok(Output {
        text: format!("{}\n", num(&value, ctx.precision())),
        json: json!({
            "operation": "eval",
            "expression": src,
            "at": env.iter().map(|(k, v)| (k.clone(), Value::String(fraction(v)))).collect::<serde_json::Map<_, _>>(),
            "value": fraction(&value),
        }),
    })
}

/// Evaluates on the monad: each bound variable is its value plus or
/// minus ε, or `±1/ε` for `±inf`.
fn probe(ctx: &Ctx, p: &Probe, classify: bool) -> CliResult<Output> {
    let e = ctx.expr("expression", &p.expr)?;
    let cfg = &ctx.cfg;
    let eps = cfg.epsilon(Exponent::int(1));
    let step = match p.side {
        Side::Right => eps.clone(),
        Side::Left => -&eps,
    };
    let mut env: HashMap<String, HyperReal> = HashMap::new();
    let mut shown = serde_json::Map::new();
    for (v, x) in bindings(&p.at)? {
        let value = match x.as_str() {
            "inf" | "+inf" => eps.inv()?,
            "-inf" => -&eps.inv()?,
            _ => &cfg.constant(ctx.number(&format!("--at {v}"), &x)?) + &step,
        };
        shown.insert(v.clone(), Value::String(value.to_string()));
        env.insert(v, value);
    }
    let value = eval_hyper(&e, &env, cfg)?;
    let st = value.st();
    let class = value.classify();
    let text = if classify {
        format!("{class}\n")
    } else {
        format!("{}\n", extended(&st, ctx.precision()))
    };
    Ok(Output {
        text,
        json: json!({
            "operation": if classify { "classify" } else { "st" },
            "expression": p.expr,
            "at": shown,
            "value": value.to_string(),
            "saturated": value.is_saturated(),
            "st": extended_json(&st),
            "classification": class.as_str(),
        }),
    })
}

fn limit_text(r: &LimitResult, d: u32) -> String {
    let side = |s: &Option<hrw_core::ExtendedReal>| s.as_ref().map(|v| extended(v, d)).unwrap_or_else(|| "undefined".into());
    let body = match &r.value {
        LimitValue::Value(v) => extended(v, d),
        LimitValue::NoLimit { left: None, right: None } => "no limit".into(),
        LimitValue::NoLimit { left, right } => format!("no limit (left: {}, right: {})", side(left), side(right)),
    };
    let mut t = format!("{body} (method: {})\n", r.method.as_str());
    if let Some(diag) = &r.diagnostic {
        t += &format!("note: {diag}\n");
    }
    t
}

fn limit_json(op: &str, src: &str, r: &LimitResult) -> Value {
    let opt = |s: &Option<hrw_core::ExtendedReal>| s.as_ref().map(extended_json).unwrap_or(Value::Null);
    let (limit, left, right) = match &r.value {
        LimitValue::Value(v) => (extended_json(v), Value::Null, Value::Null),
        LimitValue::NoLimit { left, right } => (Value::Null, opt(left), opt(right)),
    };
    json!({
        "operation": op,
        "expression": src,
        "limit": limit,
        "left": left,
        "right": right,
        "method": r.method.as_str(),
        "diagnostic": r.diagnostic,
    })
}

fn limit_seq(ctx: &Ctx, src: &str) -> CliResult<Output> {
    let e = ctx.expr("expression", src)?;
    if e.free_vars().len() > 1 {
        return Err(Failure::invalid("a sequence depends on one variable"));
    }
    let r = seq_limit(&e, &ctx.cfg);
    Ok(Output {
        text: limit_text(&r, ctx.precision()),
        json: limit_json("limit-seq", src, &r),
    })
}

/// The expression's variable, checked against an optional `VAR=` prefix.
fn variable(e: &Expr, named: Option<String>, default: &str) -> CliResult<String> {
    let sole = sole_variable(e, default)?;
    match named {
        Some(v) if v != sole && !e.free_vars().is_empty() => {
            Err(Failure::invalid(format!("the expression's variable is `{sole}`, not `{v}`")))
        }
        Some(v) => Ok(v),
        None => Ok(sole),
    }
}

fn limit_fn(ctx: &Ctx, src: &str, at: &str, continuity: bool) -> CliResult<Output> {
    let e = ctx.expr("expression", src)?;
    let (named, p) = ctx.point("--at", at)?;
    variable(&e, named, "x")?;
    let r = fn_limit(&e, &p, &ctx.cfg);
    let mut text = limit_text(&r, ctx.precision());
    let mut json = limit_json("limit-fn", src, &r);
    json["at"] = Value::String(fraction(&p));
    if continuity {
        let c = continuity_check(&e, &p, &ctx.cfg)?;
        text += &format!("continuous: {c}\n");
        json["continuous"] = Value::Bool(c);
    }
    Ok(Output { text, json })
}

fn diff(ctx: &Ctx, src: &str, at: &str, order: usize) -> CliResult<Output> {
    if order == 0 {
        return Err(Failure::invalid("--order must be at least 1"));
    }
    let e = ctx.expr("expression", src)?;
    let (named, x0) = ctx.point("--at", at)?;
    let var = variable(&e, named, "x")?;
    let jet = taylor_jet_in(&e, &var, &x0, order, &ctx.cfg)?;
    let value = jet.derivative(order).expect("jet of the requested order");
    Ok(Output {
        text: format!("{}\n", num(&value, ctx.precision())),
        json: json!({
            "operation": "diff",
            "expression": src,
            "variable": var,
            "at": fraction(&x0),
            "order": order,
            "value": fraction(&value),
        }),
    })
}

fn jet(ctx: &Ctx, src: &str, at: &str, order: usize) -> CliResult<Output> {
    let e = ctx.expr("expression", src)?;
    let (named, x0) = ctx.point("--at", at)?;
    let var = variable(&e, named, "x")?;
    let jet = taylor_jet_in(&e, &var, &x0, order, &ctx.cfg)?;
    let d = ctx.precision();
    let derivs: Vec<Scalar> = (0..=order).map(|k| jet.derivative(k).expect("in range")).collect();
    let rows: Vec<Vec<String>> = jet
        .coefficients
        .iter()
        .zip(&derivs)
        .enumerate()
        .map(|(k, (a, f))| vec![k.to_string(), num(a, d), num(f, d)])
        .collect();
    Ok(Output {
        text: report::table(&["k", "coefficient", "derivative"], &rows),
        json: json!({
            "operation": "jet",
            "expression": src,
            "variable": var,
            "at": fraction(&x0),
            "coefficients": vector_json(&jet.coefficients),
            "derivatives": vector_json(&derivs),
        }),
    })
}

fn increment(ctx: &Ctx, src: &str, at: &str, order: usize) -> CliResult<Output> {
    if order == 0 {
        return Err(Failure::invalid("--order must be at least 1"));
    }
    let e = ctx.expr("expression", src)?;
    let (named, c) = ctx.point("--at", at)?;
    variable(&e, named, "x")?;
    let cfg = &ctx.cfg;
    let h = cfg.epsilon(Exponent::int(1));
    let delta = nth_increment(&e, &c, &h, order, cfg)?;
    let ratio = &delta * &h.powi(order as i64)?.inv()?;
    let st = ratio.st();
    Ok(Output {
        text: format!("increment: {delta}\nst(increment/eps^{order}): {}\n", extended(&st, ctx.precision())),
        json: json!({
            "operation": "increment",
            "expression": src,
            "at": fraction(&c),
            "order": order,
            "step": h.to_string(),
            "increment": delta.to_string(),
            "saturated": delta.is_saturated(),
            "st_ratio": extended_json(&st),
        }),
    })
}

fn curve(ctx: &Ctx, c: &CurveAt) -> CliResult<(CurveDef, Scalar)> {
    let def = CurveDef::new(ctx.list("curve", &c.curve)?)?;
    Ok((def, ctx.number("--at", &c.at)?))
}

fn tangent(ctx: &Ctx, c: &CurveAt) -> CliResult<Output> {
    let (def, t0) = curve(ctx, c)?;
    let t = unit_tangent(&def, &t0, &ctx.cfg)?;
    let cert = tangent_certificate(&def, &t0, &ctx.cfg)?;
    let d = ctx.precision();
    Ok(Output {
        text: format!("tangent: {}\ncertificate: {}\n", vector(&t, d), num(&cert, d)),
        json: json!({
            "operation": "tangent",
            "curve": c.curve,
            "at": fraction(&t0),
            "tangent": vector_json(&t),
            "certificate": fraction(&cert),
        }),
    })
}

fn curvature_cmd(ctx: &Ctx, c: &CurveAt) -> CliResult<Output> {
    let (def, t0) = curve(ctx, c)?;
    let r = curvature(&def, &t0, &ctx.cfg)?;
    let d = ctx.precision();
    let mut text = format!("point: {}\nkappa: {}\n", vector(&r.point, d), num(&r.kappa, d));
    match (&r.radius, &r.unit_normal, &r.center) {
        (Some(radius), Some(n), Some(center)) => {
            text += &format!("radius: {}\nnormal: {}\ncenter: {}\n", num(radius, d), vector(n, d), vector(center, d));
            text += &format!("osculation: {}\n", if r.osculation_ok { "ok" } else { "failed" });
        }
        _ => text += "straight line: no osculating circle\n",
    }
    let opt_vec = |v: &Option<Vec<Scalar>>| v.as_deref().map(vector_json).unwrap_or(Value::Null);
    Ok(Output {
        text,
        json: json!({
            "operation": "curvature",
            "curve": c.curve,
            "at": fraction(&t0),
            "point": vector_json(&r.point),
            "kappa": fraction(&r.kappa),
            "radius": r.radius.as_ref().map(|q| Value::String(fraction(q))).unwrap_or(Value::Null),
            "unit_normal": opt_vec(&r.unit_normal),
            "center": opt_vec(&r.center),
            "straight_line": r.is_straight(),
            "osculation_ok": r.osculation_ok,
        }),
    })
}

fn jacobian_cmd(ctx: &Ctx, map: &str, at: &str, vars: &[String]) -> CliResult<Output> {
    let fs = ctx.list("map", map)?;
    let vars = if vars.is_empty() { default_variables(&fs) } else { vars.to_vec() };
    let c = ctx.numbers("--at", at)?;
    if c.len() != vars.len() {
        return Err(Failure::invalid(format!(
            "--at has {} coordinates for the variables ({})",
            c.len(),
            vars.join(", ")
        )));
    }
    let r = jacobian(&fs, &vars, &c, &ctx.cfg)?;
    let d = ctx.precision();
    let rows: Vec<Vec<String>> = r
        .matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut cells = vec![format!("f{}", i + 1)];
            cells.extend(row.iter().map(|q| num(q, d)));
            cells
        })
        .collect();
    let mut headers = vec![""];
    headers.extend(r.vars.iter().map(String::as_str));
    let mut text = report::table(&headers, &rows);
    text += &format!("residual order: {}\n", if r.residual_order_ok { "ok" } else { "failed" });
    Ok(Output {
        text,
        json: json!({
            "operation": "jacobian",
            "map": map,
            "variables": r.vars,
            "at": vector_json(&c),
            "matrix": r.matrix.iter().map(|row| vector_json(row)).collect::<Vec<_>>(),
            "residual_order_ok": r.residual_order_ok,
        }),
    })
}

fn kinematics_cmd(ctx: &Ctx, src: &str, at: &str) -> CliResult<Output> {
    let e = ctx.expr("expression", src)?;
    let (named, t0) = ctx.point("--at", at)?;
    variable(&e, named, "t")?;
    let k = kinematics(&e, &t0, &ctx.cfg)?;
    let d = ctx.precision();
    Ok(Output {
        text: format!("velocity: {}\nacceleration: {}\n", num(&k.velocity, d), num(&k.acceleration, d)),
        json: json!({
            "operation": "kinematics",
            "expression": src,
            "at": fraction(&t0),
            "velocity": fraction(&k.velocity),
            "acceleration": fraction(&k.acceleration),
        }),
    })
}

/// Dimension implied by an integrand's variables: the highest axis name
/// used, or one for a single free variable.
fn implied_dimension(e: &Expr) -> usize {
    let vars = e.free_vars();
    let names = axis_names(8);
    let top = vars.iter().filter_map(|v| names.iter().position(|n| n == v)).max();
    match top {
        Some(i) if vars.iter().all(|v| names.contains(v)) => i + 1,
        _ => 1,
    }
}

fn unit_box(n: usize) -> CliResult<Rect> {
    Ok(Rect::cube(scalar::int(0), scalar::int(1), n)?)
}

fn integrate(ctx: &Ctx, a: &IntegrateArgs, converge: bool) -> CliResult<Output> {
    let e = ctx.expr("integrand", &a.expr)?;
    let d = ctx.precision();
    match a.method {
        Method::Gauge | Method::Mcshane => {
            if converge {
                return Err(Failure::invalid("gauge sums have no mesh to converge over"));
            }
            return gauge(ctx, a, &e);
        }
        Method::Stieltjes | Method::Riemann | Method::Darboux => {}
    }
    let rect = ctx.rect(unit_box(implied_dimension(&e))?)?;
    let f = Integrand::new(e.clone(), rect.dimension())?;
    let quadrature = (rect.dimension() == 1 && a.method != Method::Stieltjes).then(|| f.clone());
    let mut params = vec![("integrand".to_string(), a.expr.clone()), ("method".to_string(), method_name(a.method).to_string())];
    let stieltjes = match a.method {
        Method::Stieltjes => {
            let src = a.phi.as_deref().ok_or_else(|| Failure::invalid("--method stieltjes needs --phi"))?;
            params.push(("phi".into(), src.to_string()));
            if rect.dimension() != 1 {
                return Err(Failure::invalid("Stieltjes sums need a one-dimensional --rect"));
            }
            let phi = ctx.expr("--phi", src)?;
            let v = shared_variable(&[&e, &phi])?;
            Some((Integrand::with_vars(e.clone(), vec![v.clone()])?, Integrand::with_vars(phi, vec![v])?))
        }
        Method::Darboux => {
            params.push(("samples".into(), a.samples.to_string()));
            None
        }
        _ => None,
    };
    let rule = ctx.rule;
    let target = |spec: &PartitionSpec| -> hrw_core::Result<Row> {
        match (a.method, &stieltjes) {
            (Method::Darboux, _) => {
                let b = darboux_bounds(&f, &rect, spec, a.samples, d)?;
                let mid = (&b.lower + &b.upper) / scalar::int(2);
                Ok(Row::new(mid)
                    .with("lower", Cell::Q(b.lower))
                    .with("upper", Cell::Q(b.upper))
                    .with("nonmonotone_cells", Cell::N(b.nonmonotone_cells)))
            }
            (_, Some((fi, phi))) => Ok(Row::new(riemann_stieltjes_sum(fi, phi, &rect, spec, rule, d)?)),
            _ => Ok(Row::new(riemann_sum(&f, &rect, spec, rule, d)?)),
        }
    };
    Sweep {
        operation: "integrate".into(),
        params,
        rect: rect.clone(),
        quadrature,
        target: &target,
    }
    .run(ctx, converge)
}

/// The one variable shared by several expressions, `x` when there is none.
fn shared_variable(es: &[&Expr]) -> CliResult<String> {
    let mut all = std::collections::BTreeSet::new();
    for e in es {
        all.extend(e.free_vars());
    }
    let v = match all.len() {
        0 => "x".to_string(),
        1 => all.into_iter().next().expect("one variable"),
        _ => return Err(Failure::invalid("the integrand and integrator must share one variable")),
    };
    Ok(v)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Riemann => "riemann",
        Method::Darboux => "darboux",
        Method::Stieltjes => "stieltjes",
        Method::Gauge => "gauge",
        Method::Mcshane => "mcshane",
    }
}

fn gauge(ctx: &Ctx, a: &IntegrateArgs, e: &Expr) -> CliResult<Output> {
    ctx.no_mesh("a gauge sum")?;
    let src = a.gauge.as_deref().ok_or_else(|| Failure::invalid("gauge sums need --gauge"))?;
    let g = Gauge::new(ctx.expr("--gauge", src)?)?;
    let (lo, hi) = ctx.interval()?;
    let mode = if a.method == Method::Mcshane { GaugeMode::McShane } else { GaugeMode::TagInCell };
    let d = ctx.precision();
    let f = Integrand::new(e.clone(), 1)?;
    let p = cousin_partition(&g, &lo, &hi, mode, d)?;
    let value = p.riemann_sum(&f, d)?;
    let distinct: std::collections::BTreeSet<&Scalar> = p.tags.iter().map(|t| &t[0]).collect();
    let mesh = p.cells.iter().map(|c| &c.hi()[0] - &c.lo()[0]).max().expect("at least one cell");
    let params = vec![
        ("integrand".to_string(), a.expr.clone()),
        ("method".to_string(), method_name(a.method).to_string()),
        ("gauge".to_string(), src.to_string()),
        ("rect".to_string(), ctx.rect_param(&Rect::interval(lo, hi)?)),
    ];
    Ok(Output {
        text: format!(
            "{}\ncells: {}\ndistinct tags: {}\nmesh: {} ({LABEL})\n",
            num(&value, d),
            p.cells.len(),
            distinct.len(),
            num(&mesh, d)
        ),
        json: json!({
            "operation": "integrate",
            "label": LABEL,
            "params": params_json(&params),
            "rule": p.rule,
            "value": fraction(&value),
            "cells": p.cells.len(),
            "distinct_tags": distinct.len(),
            "mesh": fraction(&mesh),
            "tags_outside_allowed": p.tags_outside_allowed,
        }),
    })
}

fn interval_rect(ctx: &Ctx) -> CliResult<Rect> {
    let (a, b) = ctx.interval()?;
    Ok(Rect::interval(a, b)?)
}

fn region(ctx: &Ctx, r: &RegionArgs) -> CliResult<(Expr, Region)> {
    let bounds = ctx.rect(Rect::cube(scalar::int(-1), scalar::int(1), 2)?)?;
    let rho = ctx.expr("--rho", &r.rho)?;
    let region = Region::new(bounds, ctx.expr("--region", &r.region)?)?;
    Ok((rho, region))
}

fn counts(row: Row, c: &InnerSum) -> Row {
    row.with("inner", Cell::N(c.inner)).with("boundary", Cell::N(c.boundary)).with("exterior", Cell::N(c.exterior))
}

fn measure(ctx: &Ctx, kind: &MeasureKind, converge: bool) -> CliResult<Output> {
    let d = ctx.precision();
    let rule = ctx.rule;
    let op = |name: &str| format!("measure {name}");
    let p = |k: &str, v: &str| (k.to_string(), v.to_string());
    match kind {
        MeasureKind::Area { lower, upper } => {
            let (f, g) = (ctx.expr("--lower", lower)?, ctx.expr("--upper", upper)?);
            let rect = interval_rect(ctx)?;
            let diff = Expr::binary(BinOp::Sub, g.clone(), f.clone());
            let quadrature = Some(Integrand::new(diff, 1)?);
            let (a, b) = (rect.lo()[0].clone(), rect.hi()[0].clone());
            let target = |spec: &_| Ok(Row::new(measure_area_between(&f, &g, &a, &b, spec, rule, d)?));
            Sweep {
                operation: op("area"),
                params: vec![p("lower", lower), p("upper", upper)],
                rect,
                quadrature,
                target: &target,
            }
            .run(ctx, converge)
        }
        MeasureKind::VolumeRev { profile } | MeasureKind::SurfaceRev { profile } => {
            let volume = matches!(kind, MeasureKind::VolumeRev { .. });
            let f = ctx.expr("profile", profile)?;
            let rect = interval_rect(ctx)?;
            let quadrature = if volume {
                let sq = Expr::binary(BinOp::Pow, f.clone(), Expr::int(2));
                Some(Integrand::new(Expr::binary(BinOp::Mul, Expr::var("pi"), sq), 1)?)
            } else {
                None
            };
            let (a, b) = (rect.lo()[0].clone(), rect.hi()[0].clone());
            let target = |spec: &_| {
                Ok(Row::new(if volume {
                    measure_volume_revolution(&f, &a, &b, spec, rule, d)?
                } else {
                    measure_surface_revolution(&f, &a, &b, spec, rule, d)?
                }))
            };
            Sweep {
                operation: op(if volume { "volume-rev" } else { "surface-rev" }),
                params: vec![p("profile", profile)],
                rect,
                quadrature,
                target: &target,
            }
            .run(ctx, converge)
        }
        MeasureKind::Length { curve } => {
            let c = CurveDef::new(ctx.list("curve", curve)?)?;
            let rect = interval_rect(ctx)?;
            let (a, b) = (rect.lo()[0].clone(), rect.hi()[0].clone());
            let target = |spec: &_| {
                let l = measure_curve_length(&c, &a, &b, spec, rule, d)?;
                Ok(Row::new(l.polygonal).with("integral", Cell::Q(l.integral)))
            };
            Sweep {
                operation: op("length"),
                params: vec![p("curve", curve)],
                rect,
                quadrature: None,
                target: &target,
            }
            .run(ctx, converge)
        }
        MeasureKind::Mass(r) | MeasureKind::Com(r) => {
            let com = matches!(kind, MeasureKind::Com(_));
            let (rho, region) = region(ctx, r)?;
            let names = axis_names(region.bounds.dimension());
            let target = |spec: &_| {
                let m = measure_mass_moment_com(&rho, &region, spec, d)?;
                let mut row = Row::new(m.mass.clone());
                for (n, q) in names.iter().zip(&m.moments) {
                    row = row.with(&format!("moment_{n}"), Cell::Q(q.clone()));
                }
                match m.centroid() {
                    Ok(c) => {
                        for (n, q) in names.iter().zip(c) {
                            row = row.with(&format!("centroid_{n}"), Cell::Q(q));
                        }
                    }
                    Err(e) if com => return Err(e),
                    Err(_) => {}
                }
                Ok(counts(row, &m.cells))
            };
            Sweep {
                operation: op(if com { "com" } else { "mass" }),
                params: vec![p("rho", &r.rho), p("region", &r.region)],
                rect: region.bounds.clone(),
                quadrature: None,
                target: &target,
            }
            .run(ctx, converge)
        }
        MeasureKind::Moment { region: r, integrand } => {
            let (rho, region) = region(ctx, r)?;
            let w = ctx.expr("--integrand", integrand)?;
            let target = |spec: &_| {
                let s = moment_of_inertia(&rho, &w, &region, spec, d)?;
                Ok(counts(Row::new(s.value.clone()), &s))
            };
            Sweep {
                operation: op("moment"),
                params: vec![p("rho", &r.rho), p("region", &r.region), p("integrand", integrand)],
                rect: region.bounds.clone(),
                quadrature: None,
                target: &target,
            }
            .run(ctx, converge)
        }
        MeasureKind::Work { field, curve } => {
            let fs = ctx.list("field", field)?;
            let c = CurveDef::new(ctx.list("--curve", curve)?)?;
            let rect = interval_rect(ctx)?;
            let (a, b) = (rect.lo()[0].clone(), rect.hi()[0].clone());
            let target = |spec: &_| {
                let w = line_integral_work(&fs, &c, &a, &b, spec, rule, d)?;
                Ok(Row::new(w.chord).with("integrand", Cell::Q(w.integrand)))
            };
            Sweep {
                operation: op("work"),
                params: vec![p("field", field), p("curve", curve)],
                rect,
                quadrature: None,
                target: &target,
            }
            .run(ctx, converge)
        }
        MeasureKind::Impulse { force } => {
            let f = ctx.expr("force", force)?;
            let rect = interval_rect(ctx)?;
            let quadrature = Some(Integrand::new(f.clone(), 1)?);
            let (a, b) = (rect.lo()[0].clone(), rect.hi()[0].clone());
            let target = |spec: &_| Ok(Row::new(impulse(&f, &a, &b, spec, rule, d)?));
            Sweep {
                operation: op("impulse"),
                params: vec![p("force", force)],
                rect,
                quadrature,
                target: &target,
            }
            .run(ctx, converge)
        }
        MeasureKind::Morley { a, n, edge } => {
            if converge {
                return Err(Failure::invalid("Morley sums are indexed by --n, not by a mesh"));
            }
            ctx.no_mesh("measure morley")?;
            morley(ctx, a, *n, *edge)
        }
    }
}

fn morley(ctx: &Ctx, a_src: &str, n: u64, edge: Edge) -> CliResult<Output> {
    let d = ctx.precision();
    let a = ctx.number("--a", a_src)?;
    let (e, name) = match edge {
        Edge::Outer => (MorleyEdge::Outer, "outer"),
        Edge::Inner => (MorleyEdge::Inner, "inner"),
    };
    let value = morley_strip_sum(&a, n, e, d)?;
    let pi = eval_real(&Expr::var("pi"), &HashMap::new(), d)?;
    let limit = &pi * &a * &a * &a * &a / scalar::int(2);
    Ok(Output {
        text: format!("{}\nlimit: {}\n", num(&value, d), num(&limit, d)),
        json: json!({
            "operation": "measure morley",
            "label": LABEL,
            "params": params_json(&[
                ("a".to_string(), scalar::render(&a)),
                ("n".to_string(), n.to_string()),
                ("edge".to_string(), name.to_string()),
            ]),
            "value": fraction(&value),
            "limit": fraction(&limit),
        }),
    })
}

/// `name(arg, …)` on the command line.
fn functional(ctx: &Ctx, s: &str) -> CliResult<Functional> {
    let bad = || Failure::invalid(format!("--functional `{s}` is not of the form NAME(ARGS)"));
    let (name, rest) = s.split_once('(').ok_or_else(bad)?;
    let inner = rest.trim_end().strip_suffix(')').ok_or_else(bad)?;
    let args = ctx.list("--functional", inner)?;
    Ok(Functional::parse(name.trim(), &args)?)
}

fn probe_supernear(ctx: &Ctx, src: &str, functional_src: &str) -> CliResult<Output> {
    let f = ctx.expr("expression", src)?;
    let b = functional(ctx, functional_src)?;
    let rect = interval_rect(ctx)?;
    let meshes: Vec<Scalar> = ctx.partitions(&rect)?.into_iter().map(|(h, _)| h).collect();
    let (lo, hi) = (rect.lo()[0].clone(), rect.hi()[0].clone());
    let rows = supernearness_probe(&b, &f, &lo, &hi, &meshes, ctx.precision())?;
    let decreasing = rows.windows(2).all(|w| w[1].max_deviation < w[0].max_deviation);
    let note = if decreasing { "deviation strictly decreasing" } else { "deviation not strictly decreasing" };
    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![column_number(&r.mesh), r.cells.to_string(), report::decimal(&r.max_deviation, 12)])
        .collect();
    let params = vec![
        ("f".to_string(), src.to_string()),
        ("functional".to_string(), functional_src.to_string()),
        ("rect".to_string(), ctx.rect_param(&rect)),
    ];
    let mut text = format!("probe-supernear ({LABEL})\n");
    text += &report::table(&["mesh", "cells", "max_deviation"], &table_rows);
    text += &format!("note: {note}\n");
    Ok(Output {
        text,
        json: json!({
            "operation": "probe-supernear",
            "label": LABEL,
            "params": params_json(&params),
            "functional": b.name(),
            "rows": rows.iter().map(|r| json!({
                "mesh": fraction(&r.mesh),
                "cells": r.cells,
                "max_deviation": fraction(&r.max_deviation),
            })).collect::<Vec<_>>(),
            "notes": [note],
        }),
    })
}
