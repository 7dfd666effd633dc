//! Limits, derivatives, jets, increments, tangents, curvature and Jacobians,
//! each computed by evaluating in the hyperreal field and taking standard
//! parts.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::expr::{eval_hyper, eval_hyper_smooth, eval_real, Expr};
use crate::hyperreal::{binomial, Exponent, ExtendedReal, FieldConfig, HyperReal};
use crate::scalar::{self, Scalar};

/// Sequence limits: exponents `k` with `n = 2^k` probed by the fallback.
pub const FALLBACK_RANGE: std::ops::RangeInclusive<u32> = 10..=40;
/// Successive fallback values closer than this form a Cauchy tail.
pub const CAUCHY_TOLERANCE: f64 = 1e-8;
/// Fallback values beyond this magnitude count as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;
/// Number of trailing differences that must pass the Cauchy test.
const CAUCHY_TAIL: usize = 3;
/// Number of trailing values that must be monotone for divergence.
const MONOTONE_TAIL: usize = 5;

/// Parametrized curve `t ↦ (c₁(t), …, cₙ(t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveDef {
    pub param: String,
    pub components: Vec<Expr>,
}

impl CurveDef {
    /// All components must share one parameter; `t` when none appears.
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::invalid("a curve needs at least two components"));
        }
        let mut vars = std::collections::BTreeSet::new();
        for c in &components {
            vars.extend(c.free_vars());
        }
        let param = match vars.len() {
            0 => "t".to_string(),
            1 => vars.into_iter().next().expect("one variable"),
            _ => {
                return Err(Error::invalid(format!(
                    "curve components use several parameters: {}",
                    vars.into_iter().collect::<Vec<_>>().join(", ")
                )))
            }
        };
        Ok(CurveDef { param, components })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }
}

/// Taylor coefficients `a_k = f⁽ᵏ⁾(x₀)/k!` for `k = 0..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub x0: Scalar,
    pub coefficients: Vec<Scalar>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `f⁽ⁿ⁾(x₀) = n!·aₙ`.
    pub fn derivative(&self, n: usize) -> Option<Scalar> {
        self.coefficients.get(n).map(|a| a * factorial(n))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitMethod {
    FieldEvaluation,
    NumericFallback,
}

impl LimitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LimitMethod::FieldEvaluation => "field-evaluation",
            LimitMethod::NumericFallback => "numeric-fallback",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LimitValue {
    Value(ExtendedReal),
    /// Sided standard parts; `None` where a side could not be evaluated.
    NoLimit {
        left: Option<ExtendedReal>,
        right: Option<ExtendedReal>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitResult {
    pub value: LimitValue,
    pub method: LimitMethod,
    /// Why no limit was declared, when that is known.
    pub diagnostic: Option<String>,
}

impl LimitResult {
    fn value(v: ExtendedReal, method: LimitMethod) -> Self {
        LimitResult {
            value: LimitValue::Value(v),
            method,
            diagnostic: None,
        }
    }

    fn none(method: LimitMethod, diagnostic: impl Into<String>) -> Self {
        LimitResult {
            value: LimitValue::NoLimit {
                left: None,
                right: None,
            },
            method,
            diagnostic: Some(diagnostic.into()),
        }
    }

    pub fn limit(&self) -> Option<&ExtendedReal> {
        match &self.value {
            LimitValue::Value(v) => Some(v),
            LimitValue::NoLimit { .. } => None,
        }
    }
}

impl fmt::Display for LimitResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &Option<ExtendedReal>| match s {
            Some(v) => v.to_string(),
            None => "undefined".to_string(),
        };
        match &self.value {
            LimitValue::Value(v) => write!(f, "{v}")?,
            LimitValue::NoLimit { left, right } if left.is_none() && right.is_none() => {
                f.write_str("no limit")?
            }
            LimitValue::NoLimit { left, right } => {
                write!(f, "no limit (left: {}, right: {})", side(left), side(right))?
            }
        }
        write!(f, " (method: {})", self.method.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureResult {
    pub point: Vec<Scalar>,
    pub kappa: Scalar,
    /// Unset on a straight line.
    pub unit_normal: Option<Vec<Scalar>>,
    pub center: Option<Vec<Scalar>>,
    pub radius: Option<Scalar>,
    /// The osculating circle matches the curve through second order.
    pub osculation_ok: bool,
}

impl CurvatureResult {
    pub fn is_straight(&self) -> bool {
        self.kappa.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobianResult {
    pub vars: Vec<String>,
    /// Row `i` holds the partials of component `i`.
    pub matrix: Vec<Vec<Scalar>>,
    pub residual_order_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kinematics {
    pub velocity: Scalar,
    pub acceleration: Scalar,
}

fn factorial(n: usize) -> Scalar {
    Scalar::from_integer((1..=n as u64).map(BigInt::from).product())
}

/// The one free variable of `f`, or `default` for a constant.
pub fn sole_variable(f: &Expr, default: &str) -> Result<String> {
    let vars = f.free_vars();
    match vars.len() {
        0 => Ok(default.to_string()),
        1 => Ok(vars.into_iter().next().expect("one variable")),
        _ => Err(Error::invalid(format!(
            "expected one variable, found {}",
            vars.into_iter().collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn bind(var: &str, v: HyperReal) -> HashMap<String, HyperReal> {
    HashMap::from([(var.to_string(), v)])
}

fn widened(cfg: &FieldConfig, at_least: i64) -> FieldConfig {
    FieldConfig {
        window: cfg.window.clone().max(Exponent::int(at_least)),
        precision: cfg.precision,
    }
}

/// `f(x₀ + ε)` read off as a jet of order `k` in variable `var`.
pub fn taylor_jet_in(f: &Expr, var: &str, x0: &Scalar, k: usize, cfg: &FieldConfig) -> Result<Jet> {
    let kk = k as i64;
    let mut cfg = widened(cfg, kk + 1);
    // cancellation can eat into the window; retry wider a few times
    for _ in 0..4 {
        let x = &cfg.constant(x0.clone()) + &cfg.epsilon(Exponent::int(1));
        let v = eval_hyper_smooth(f, &bind(var, x), &cfg)?;
        let limit = Exponent::int(kk + 1);
        if let Some((q, _)) = v.terms().iter().find(|(q, _)| *q < limit && q.as_integer().is_none_or(|n| n < 0)) {
            return Err(Error::NonSmoothAtPoint(format!(
                "term eps^{q} at {} = {}",
                var,
                scalar::render(x0)
            )));
        }
        if v.known_below().is_some_and(|h| h <= limit) {
            cfg.window = Exponent(&cfg.window.0 * scalar::int(2));
            continue;
        }
        let coefficients = (0..=kk).map(|n| v.coefficient(&Exponent::int(n))).collect();
        return Ok(Jet {
            x0: x0.clone(),
            coefficients,
        });
    }
    Err(Error::Overflow(format!(
        "jet of order {k} lost to cancellation; widen the window"
    )))
}

pub fn taylor_jet(f: &Expr, x0: &Scalar, k: usize, cfg: &FieldConfig) -> Result<Jet> {
    taylor_jet_in(f, &sole_variable(f, "x")?, x0, k, cfg)
}

pub fn derivative(f: &Expr, x0: &Scalar, n: usize, cfg: &FieldConfig) -> Result<Scalar> {
    if n == 0 {
        return Err(Error::invalid("derivative order must be at least 1"));
    }
    Ok(taylor_jet(f, x0, n, cfg)?.derivative(n).expect("order n"))
}

/// `Δⁿf(c, h) = Σ (-1)ᵏ C(n,k) f(c + (n-k)h)`.
pub fn nth_increment(f: &Expr, c: &Scalar, h: &HyperReal, n: usize, cfg: &FieldConfig) -> Result<HyperReal> {
    if n == 0 {
        return Err(Error::invalid("increment order must be at least 1"));
    }
    let var = sole_variable(f, "x")?;
    // room for the ε^n term plus one more after the leading cancellation
    let lam = h.leading_exponent().map(|l| l.0.clone()).unwrap_or_else(Scalar::one);
    let need = (lam.abs() * scalar::int(n as i64 + 2)).ceil().to_integer().to_i64().unwrap_or(i64::MAX);
    let cfg = widened(cfg, need);
    let h = h.with_window(cfg.window.clone());
    let base = cfg.constant(c.clone());
    let nn = scalar::int(n as i64);
    let mut sum = cfg.zero();
    for k in 0..=n {
        let shift = h.scale(&scalar::int((n - k) as i64));
        let v = eval_hyper(f, &bind(&var, &base + &shift), &cfg)?;
        let mut w = binomial(&nn, k);
        if k % 2 == 1 {
            w = -w;
        }
        sum = &sum + &v.scale(&w);
    }
    Ok(sum)
}

/// Limit of a sequence `S(n)`: evaluate at `n = 1/ε`, falling back to
/// sampling `n = 2^k` when a transcendental map meets an unlimited value.
pub fn seq_limit(s: &Expr, cfg: &FieldConfig) -> LimitResult {
    let var = match sole_variable(s, "n") {
        Ok(v) => v,
        Err(e) => return LimitResult::none(LimitMethod::FieldEvaluation, e.to_string()),
    };
    let gamma = cfg.epsilon(Exponent::int(-1));
    match eval_hyper(s, &bind(&var, gamma), cfg) {
        Ok(v) => LimitResult::value(v.st(), LimitMethod::FieldEvaluation),
        Err(e) if *e.kind() == Error::TranscendentalOnUnlimited => seq_fallback(s, &var, cfg.precision),
        Err(e) => LimitResult::none(LimitMethod::FieldEvaluation, e.to_string()),
    }
}

fn seq_fallback(s: &Expr, var: &str, precision: u32) -> LimitResult {
    let method = LimitMethod::NumericFallback;
    let mut exact = Vec::new();
    let mut approx = Vec::new();
    for k in FALLBACK_RANGE {
        let n = scalar::pow2(k as i64);
        let env = HashMap::from([(var.to_string(), n)]);
        match eval_real(s, &env, precision) {
            Ok(v) => {
                let f = scalar::to_f64(&v);
                approx.push(f);
                exact.push(v);
                if !f.is_finite() {
                    break;
                }
            }
            Err(e) if matches!(e.kind(), Error::Overflow(_)) => {
                let sign = approx.last().map_or(1.0, |v: &f64| v.signum());
                approx.push(sign * f64::INFINITY);
                break;
            }
            Err(e) => return LimitResult::none(method, format!("S(2^{k}): {e}")),
        }
    }
    let m = approx.len();
    if m > CAUCHY_TAIL && approx.iter().all(|v| v.is_finite()) {
        let tail = &approx[m - CAUCHY_TAIL - 1..];
        if tail.windows(2).all(|w| (w[1] - w[0]).abs() < CAUCHY_TOLERANCE) {
            let last = exact.last().expect("nonempty");
            // powers of two alias parity-dependent sequences such as (-1)^n
            let odd = scalar::pow2(*FALLBACK_RANGE.end() as i64) + Scalar::one();
            let odd_env = HashMap::from([(var.to_string(), odd)]);
            let aliased = match eval_real(s, &odd_env, precision) {
                Ok(v) => scalar::to_f64(&(v - last)).abs() >= CAUCHY_TOLERANCE,
                Err(_) => true,
            };
            if aliased {
                return LimitResult::none(method, "samples at n = 2^k and 2^k + 1 disagree");
            }
            // the last sample is only meaningful to the Cauchy tolerance
            let grid = Scalar::from_integer(BigInt::from(100_000_000u64));
            let rounded = (last * &grid).round() / grid;
            return LimitResult::value(ExtendedReal::Finite(rounded), method);
        }
    }
    if let Some(last) = approx.last().copied() {
        if last.abs() > DIVERGENCE_THRESHOLD {
            let tail = &approx[m.saturating_sub(MONOTONE_TAIL)..];
            let up = tail.windows(2).all(|w| w[1] > w[0]);
            let down = tail.windows(2).all(|w| w[1] < w[0]);
            if up && last > 0.0 {
                return LimitResult::value(ExtendedReal::PosInfinity, method);
            }
            if down && last < 0.0 {
                return LimitResult::value(ExtendedReal::NegInfinity, method);
            }
        }
    }
    LimitResult::none(method, "samples at n = 2^k neither settle nor diverge monotonically")
}

/// Two-sided limit at `p` from the standard parts of `f(p ± ε)`.
pub fn fn_limit(f: &Expr, p: &Scalar, cfg: &FieldConfig) -> LimitResult {
    let method = LimitMethod::FieldEvaluation;
    let var = match sole_variable(f, "x") {
        Ok(v) => v,
        Err(e) => return LimitResult::none(method, e.to_string()),
    };
    let (left, right) = sides(f, &var, p, cfg);
    let left_st = left.as_ref().ok().map(HyperReal::st);
    let right_st = right.as_ref().ok().map(HyperReal::st);
    match (&left_st, &right_st) {
        (Some(l), Some(r)) if l == r => LimitResult::value(l.clone(), method),
        _ => {
            let diagnostic = [("left", &left), ("right", &right)]
                .iter()
                .filter_map(|(s, r)| r.as_ref().err().map(|e| format!("{s}: {e}")))
                .collect::<Vec<_>>();
            LimitResult {
                value: LimitValue::NoLimit {
                    left: left_st,
                    right: right_st,
                },
                method,
                diagnostic: (!diagnostic.is_empty()).then(|| diagnostic.join("; ")),
            }
        }
    }
}

fn sides(f: &Expr, var: &str, p: &Scalar, cfg: &FieldConfig) -> (Result<HyperReal>, Result<HyperReal>) {
    let base = cfg.constant(p.clone());
    let e = cfg.epsilon(Exponent::int(1));
    let at = |x: HyperReal| eval_hyper(f, &bind(var, x), cfg);
    (at(&base - &e), at(&base + &e))
}

/// `st f(p ± ε) = f(p)` on both sides. The monad is probed by `±ε` only;
/// agreement is up to `10^-(d-2)` so that independently rounded
/// transcendental values still match.
pub fn continuity_check(f: &Expr, p: &Scalar, cfg: &FieldConfig) -> Result<bool> {
    let var = sole_variable(f, "x")?;
    let env = HashMap::from([(var.clone(), p.clone())]);
    let fp = eval_real(f, &env, cfg.precision).map_err(|e| match e.kind() {
        Error::DivisionByZero | Error::Domain(_) => Error::domain(format!(
            "f undefined at {} = {}: {e}",
            var,
            scalar::render(p)
        )),
        _ => e,
    })?;
    let tol = analytic::tolerance(cfg.precision.saturating_sub(2));
    let (left, right) = sides(f, &var, p, cfg);
    let close = |side: Result<HyperReal>| match side.map(|v| v.st()) {
        Ok(ExtendedReal::Finite(s)) => (s - &fp).abs() <= tol,
        _ => false,
    };
    Ok(close(left) && close(right))
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn curve_jets(c: &CurveDef, t0: &Scalar, k: usize, cfg: &FieldConfig) -> Result<Vec<Jet>> {
    c.components
        .iter()
        .map(|f| taylor_jet_in(f, &c.param, t0, k, cfg))
        .collect()
}

fn velocity(jets: &[Jet]) -> Result<Vec<Scalar>> {
    let v: Vec<Scalar> = jets.iter().map(|j| j.coefficients[1].clone()).collect();
    if v.iter().all(Zero::is_zero) {
        return Err(Error::ZeroVelocity);
    }
    Ok(v)
}

/// `T = c′(t₀)/‖c′(t₀)‖`.
pub fn unit_tangent(c: &CurveDef, t0: &Scalar, cfg: &FieldConfig) -> Result<Vec<Scalar>> {
    let v = velocity(&curve_jets(c, t0, 1, cfg)?)?;
    let norm = analytic::sqrt(&dot(&v, &v), cfg.precision)?;
    Ok(v.iter().map(|x| x / &norm).collect())
}

/// `st(T·Δc / ‖Δc‖)` with `Δc = c(t₀+ε) − c(t₀)`, entirely in the field.
pub fn tangent_certificate(c: &CurveDef, t0: &Scalar, cfg: &FieldConfig) -> Result<Scalar> {
    let t = unit_tangent(c, t0, cfg)?;
    certificate_for(c, t0, &t, cfg)
}

/// The certificate for an arbitrary candidate direction.
pub fn certificate_for(c: &CurveDef, t0: &Scalar, dir: &[Scalar], cfg: &FieldConfig) -> Result<Scalar> {
    if dir.len() != c.dimension() {
        return Err(Error::invalid("direction and curve dimensions differ"));
    }
    let x = &cfg.constant(t0.clone()) + &cfg.epsilon(Exponent::int(1));
    let mut num = cfg.zero();
    let mut sq = cfg.zero();
    for (f, d) in c.components.iter().zip(dir) {
        let delta = eval_hyper_smooth(f, &bind(&c.param, x.clone()), cfg)?.infinitesimal_part();
        num = &num + &delta.scale(d);
        sq = &sq + &(&delta * &delta);
    }
    if sq.is_zero() {
        return Err(Error::ZeroVelocity);
    }
    let norm = sq.nth_root(2, cfg.precision)?;
    num.div(&norm)?.st_finite()
}

/// Curvature, unit normal and osculating circle of a plane or space curve.
pub fn curvature(c: &CurveDef, t0: &Scalar, cfg: &FieldConfig) -> Result<CurvatureResult> {
    let n = c.dimension();
    if !(2..=3).contains(&n) {
        return Err(Error::invalid(format!("curvature needs dimension 2 or 3, got {n}")));
    }
    let d = cfg.precision;
    let jets = curve_jets(c, t0, 2, cfg)?;
    let point: Vec<Scalar> = jets.iter().map(|j| j.coefficients[0].clone()).collect();
    let v = velocity(&jets)?;
    let acc: Vec<Scalar> = jets.iter().map(|j| &j.coefficients[2] * scalar::int(2)).collect();
    let speed2 = dot(&v, &v);
    let cross2 = if n == 2 {
        let z = &v[0] * &acc[1] - &v[1] * &acc[0];
        &z * &z
    } else {
        let cx = &v[1] * &acc[2] - &v[2] * &acc[1];
        let cy = &v[2] * &acc[0] - &v[0] * &acc[2];
        let cz = &v[0] * &acc[1] - &v[1] * &acc[0];
        &cx * &cx + &cy * &cy + &cz * &cz
    };
    // a single square root keeps rational curvatures exact
    let kappa = analytic::sqrt(&(cross2 / (&speed2 * &speed2 * &speed2)), d)?;
    let proj = dot(&acc, &v) / &speed2;
    let w: Vec<Scalar> = acc.iter().zip(&v).map(|(a, x)| a - &proj * x).collect();
    if kappa.is_zero() || w.iter().all(Zero::is_zero) {
        return Ok(CurvatureResult {
            point,
            kappa: Scalar::zero(),
            unit_normal: None,
            center: None,
            radius: None,
            osculation_ok: true,
        });
    }
    let wn = analytic::sqrt(&dot(&w, &w), d)?;
    let normal: Vec<Scalar> = w.iter().map(|x| x / &wn).collect();
    let radius = kappa.recip();
    let center: Vec<Scalar> = point.iter().zip(&normal).map(|(p, m)| p + &radius * m).collect();
    let osculation_ok = osculates(c, t0, &center, &radius, cfg)?;
    Ok(CurvatureResult {
        point,
        kappa,
        unit_normal: Some(normal),
        center: Some(center),
        radius: Some(radius),
        osculation_ok,
    })
}

/// `‖c(t₀+ε) − center‖² − R²` vanishes through `ε²`.
fn osculates(c: &CurveDef, t0: &Scalar, center: &[Scalar], radius: &Scalar, cfg: &FieldConfig) -> Result<bool> {
    let x = &cfg.constant(t0.clone()) + &cfg.epsilon(Exponent::int(1));
    let mut sq = cfg.constant(-(radius * radius));
    for (f, m) in c.components.iter().zip(center) {
        let r = &eval_hyper_smooth(f, &bind(&c.param, x.clone()), cfg)? - &cfg.constant(m.clone());
        sq = &sq + &(&r * &r);
    }
    let tol = analytic::tolerance(cfg.precision.saturating_sub(8));
    let ok = sq.terms().iter().all(|(q, a)| *q > Exponent::int(2) || a.abs() < tol);
    Ok(ok)
}

/// `x, y, z` first when present, then the rest alphabetically.
pub fn default_variables(fs: &[Expr]) -> Vec<String> {
    let mut all = std::collections::BTreeSet::new();
    for f in fs {
        all.extend(f.free_vars());
    }
    let mut out: Vec<String> = ["x", "y", "z"]
        .iter()
        .filter(|v| all.contains(**v))
        .map(|v| v.to_string())
        .collect();
    out.extend(all.into_iter().filter(|v| !["x", "y", "z"].contains(&v.as_str())));
    out
}

/// Partials `A(i,j) = st((Fᵢ(c + ε eⱼ) − Fᵢ(c))/ε)` and the residual test
/// `‖ΔF(b) − A b‖ ∈ o(‖b‖)` on the probes `ε(1,…,1)`, `ε(1,−1,…)`, `ε²e₁`.
pub fn jacobian(fs: &[Expr], vars: &[String], c: &[Scalar], cfg: &FieldConfig) -> Result<JacobianResult> {
    if fs.is_empty() {
        return Err(Error::invalid("empty map"));
    }
    if vars.len() != c.len() {
        return Err(Error::invalid(format!(
            "point has {} coordinates for {} variables",
            c.len(),
            vars.len()
        )));
    }
    let cfg = widened(cfg, 4);
    let eval_at = |f: &Expr, offsets: &[HyperReal]| {
        let env: HashMap<String, HyperReal> = vars
            .iter()
            .zip(c)
            .zip(offsets)
            .map(|((v, x), h)| (v.clone(), &cfg.constant(x.clone()) + h))
            .collect();
        eval_hyper_smooth(f, &env, &cfg)
    };
    let zero_offsets = vec![cfg.zero(); vars.len()];
    let base: Vec<HyperReal> = fs.iter().map(|f| eval_at(f, &zero_offsets)).collect::<Result<_>>()?;
    let eps = cfg.epsilon(Exponent::int(1));
    let mut matrix = vec![vec![Scalar::zero(); vars.len()]; fs.len()];
    for j in 0..vars.len() {
        let mut offsets = zero_offsets.clone();
        offsets[j] = eps.clone();
        for (i, f) in fs.iter().enumerate() {
            let delta = &eval_at(f, &offsets)? - &base[i];
            if let Some((q, _)) = delta.terms().iter().find(|(q, _)| *q < Exponent::int(1)) {
                return Err(Error::NonSmoothAtPoint(format!(
                    "component {} has a term eps^{q} along {}",
                    i + 1,
                    vars[j]
                )));
            }
            matrix[i][j] = delta.coefficient(&Exponent::int(1));
        }
    }
    let n = vars.len();
    let probes: Vec<Vec<HyperReal>> = vec![
        vec![eps.clone(); n],
        (0..n).map(|j| if j % 2 == 0 { eps.clone() } else { -&eps }).collect(),
        (0..n)
            .map(|j| if j == 0 { cfg.epsilon(Exponent::int(2)) } else { cfg.zero() })
            .collect(),
    ];
    let mut residual_order_ok = true;
    for b in &probes {
        let mut r2 = cfg.zero();
        for (i, f) in fs.iter().enumerate() {
            let mut r = &eval_at(f, b)? - &base[i];
            for (a, bj) in matrix[i].iter().zip(b) {
                r = &r - &bj.scale(a);
            }
            r2 = &r2 + &(&r * &r);
        }
        let b2 = b.iter().fold(cfg.zero(), |acc, x| &acc + &(x * x));
        residual_order_ok &= r2.in_order_ideal(&b2)?;
    }
    Ok(JacobianResult {
        vars: vars.to_vec(),
        matrix,
        residual_order_ok,
    })
}

/// Velocity and acceleration of a position `d(t)`.
pub fn kinematics(d: &Expr, t0: &Scalar, cfg: &FieldConfig) -> Result<Kinematics> {
    let jet = taylor_jet_in(d, &sole_variable(d, "t")?, t0, 2, cfg)?;
    Ok(Kinematics {
        velocity: jet.derivative(1).expect("order 2"),
        acceleration: jet.derivative(2).expect("order 2"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, parse_list, symbolic_derivative};
    use crate::scalar::{int, ratio};

    fn cfg() -> FieldConfig {
        FieldConfig::default()
    }

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn near(a: &Scalar, b: &Scalar, digits: u32) -> bool {
        (a - b).abs() < analytic::tolerance(digits)
    }

    fn curve(s: &str) -> CurveDef {
        CurveDef::new(parse_list(s).unwrap()).unwrap()
    }

    #[test]
    fn jets() {
        let j = taylor_jet(&p("exp(x)"), &int(0), 3, &cfg()).unwrap();
        let want = [int(1), int(1), ratio(1, 2), ratio(1, 6)];
        for (a, b) in j.coefficients.iter().zip(&want) {
            assert!(near(a, b, 40));
        }
        let j = taylor_jet(&p("x^3"), &int(2), 2, &cfg()).unwrap();
        assert_eq!(j.coefficients, vec![int(8), int(12), int(6)]);
        let j = taylor_jet(&p("1/x"), &int(1), 2, &cfg()).unwrap();
        assert_eq!(j.coefficients, vec![int(1), int(-1), int(1)]);
        let oracle = symbolic_derivative(&p("1/x"), "x").unwrap();
        assert_eq!(oracle.eval_at("x", &int(1), 10).unwrap(), j.derivative(1).unwrap());
    }

    #[test]
    fn jet_refusals() {
        let kind = |f: &str| taylor_jet(&p(f), &int(0), 1, &cfg()).unwrap_err().kind().clone();
        assert!(matches!(kind("abs(x)"), Error::NonSmoothAtPoint(_)));
        assert!(matches!(kind("sqrt(x)"), Error::NonSmoothAtPoint(_)));
        assert!(taylor_jet(&p("abs(x)"), &int(-2), 2, &cfg()).is_ok());
        assert!(taylor_jet(&p("x*y"), &int(0), 1, &cfg()).is_err());
        // high order beyond the configured window still works
        let j = taylor_jet(&p("1/(1-x)"), &int(0), 20, &cfg()).unwrap();
        assert!(j.coefficients.iter().all(One::is_one));
    }

    #[test]
    fn derivatives() {
        assert_eq!(derivative(&p("x^3"), &int(2), 1, &cfg()).unwrap(), int(12));
        assert!(near(&derivative(&p("sin(x)"), &int(0), 1, &cfg()).unwrap(), &int(1), 40));
        assert_eq!(derivative(&p("x^5"), &int(0), 5, &cfg()).unwrap(), int(120));
    }

    #[test]
    fn increments() {
        let e = cfg().epsilon(Exponent::int(1));
        let d = nth_increment(&p("x^3"), &int(1), &e, 2, &cfg()).unwrap();
        assert_eq!(d.to_string(), "6*eps^2 + 6*eps^3");
        assert_eq!(d.div(&e.powi(2).unwrap()).unwrap().st_finite().unwrap(), int(6));
        let d = nth_increment(&p("x^2"), &int(0), &e, 1, &cfg()).unwrap();
        assert_eq!(d.to_string(), "1*eps^2");
        let d = nth_increment(&p("x^4"), &int(1), &e, 3, &cfg()).unwrap();
        assert_eq!(d.div(&e.powi(3).unwrap()).unwrap().st_finite().unwrap(), int(24));
        // negative h
        let d = nth_increment(&p("x^4"), &int(1), &-&e, 3, &cfg()).unwrap();
        assert_eq!(d.div(&(-&e).powi(3).unwrap()).unwrap().st_finite().unwrap(), int(24));
    }

    #[test]
    fn sequence_limits() {
        let c = cfg();
        let r = seq_limit(&p("(1/n)^3"), &c);
        assert_eq!(r.value, LimitValue::Value(ExtendedReal::Finite(int(0))));
        assert_eq!(r.method, LimitMethod::FieldEvaluation);
        assert_eq!(r.to_string(), "0 (method: field-evaluation)");
        let r = seq_limit(&p("2^(1/n)"), &c);
        assert_eq!(r.limit(), Some(&ExtendedReal::Finite(int(1))));
        assert_eq!(r.method, LimitMethod::FieldEvaluation);
        let r = seq_limit(&p("root(n,n)"), &c);
        assert_eq!(r.method, LimitMethod::NumericFallback);
        assert_eq!(r.limit(), Some(&ExtendedReal::Finite(int(1))));
        let r = seq_limit(&p("n^2"), &c);
        assert_eq!(r.limit(), Some(&ExtendedReal::PosInfinity));
        assert_eq!(r.method, LimitMethod::FieldEvaluation);
        for (s, want) in [("(1/2)^n", 0), ("(-1/2)^n", 0), ("(1/n)^10*root(n,n)", 0)] {
            let r = seq_limit(&p(s), &c);
            assert_eq!(r.method, LimitMethod::NumericFallback, "{s}");
            assert_eq!(r.limit(), Some(&ExtendedReal::Finite(int(want))), "{s}");
        }
        assert_eq!(seq_limit(&p("2^n"), &c).limit(), Some(&ExtendedReal::PosInfinity));
        assert_eq!(seq_limit(&p("-(3^n)"), &c).limit(), Some(&ExtendedReal::NegInfinity));
        assert_eq!(seq_limit(&p("sin(n)"), &c).limit(), None);
        assert_eq!(seq_limit(&p("(-1)^n"), &c).limit(), None);
    }

    #[test]
    fn function_limits() {
        let c = cfg();
        let r = fn_limit(&p("(x^2-1)/(x-1)"), &int(1), &c);
        assert_eq!(r.limit(), Some(&ExtendedReal::Finite(int(2))));
        let r = fn_limit(&p("1/x"), &int(0), &c);
        assert_eq!(
            r.value,
            LimitValue::NoLimit {
                left: Some(ExtendedReal::NegInfinity),
                right: Some(ExtendedReal::PosInfinity)
            }
        );
        assert_eq!(r.to_string(), "no limit (left: -inf, right: +inf) (method: field-evaluation)");
        let r = fn_limit(&p("sin(x)/x"), &int(0), &c);
        assert_eq!(r.limit(), Some(&ExtendedReal::Finite(int(1))));
        let r = fn_limit(&p("sqrt(x)"), &int(0), &c);
        assert!(r.limit().is_none());
        assert!(r.diagnostic.is_some());
        let r = fn_limit(&p("abs(x)/x"), &int(0), &c);
        assert_eq!(
            r.value,
            LimitValue::NoLimit {
                left: Some(ExtendedReal::Finite(int(-1))),
                right: Some(ExtendedReal::Finite(int(1)))
            }
        );
    }

    #[test]
    fn continuity() {
        let c = cfg();
        assert!(continuity_check(&p("abs(x)"), &int(0), &c).unwrap());
        assert!(continuity_check(&p("x^2"), &int(3), &c).unwrap());
        assert!(matches!(continuity_check(&p("1/x"), &int(0), &c), Err(Error::Domain(_))));
        assert!(continuity_check(&p("sin(x)*exp(x)"), &ratio(1, 3), &c).unwrap());
        assert!(!continuity_check(&p("abs(x)/x + x/x"), &int(1), &c).is_err());
    }

    #[test]
    fn tangents() {
        let c = cfg();
        let circ = curve("cos(t), sin(t)");
        assert_eq!(unit_tangent(&circ, &int(0), &c).unwrap(), vec![int(0), int(1)]);
        assert!(near(&tangent_certificate(&circ, &int(0), &c).unwrap(), &int(1), 38));
        let par = curve("t, t^2");
        let t = unit_tangent(&par, &int(1), &c).unwrap();
        let s5 = analytic::sqrt(&int(5), 40).unwrap();
        assert!(near(&t[0], &(int(1) / &s5), 39));
        assert!(near(&t[1], &(int(2) / &s5), 39));
        assert!(near(&tangent_certificate(&par, &int(1), &c).unwrap(), &int(1), 38));
        let minus: Vec<Scalar> = t.iter().map(|x| -x).collect();
        assert!(near(&certificate_for(&par, &int(1), &minus, &c).unwrap(), &int(-1), 38));
        assert_eq!(unit_tangent(&curve("t^2, t^2"), &int(0), &c), Err(Error::ZeroVelocity));
    }

    #[test]
    fn curvatures() {
        let c = cfg();
        let circ = curve("2*cos(t), 2*sin(t)");
        let r = curvature(&circ, &ratio(1, 3), &c).unwrap();
        assert!(near(&r.kappa, &ratio(1, 2), 36));
        for x in r.center.as_ref().unwrap() {
            assert!(near(x, &int(0), 36));
        }
        assert!(r.osculation_ok);
        let r = curvature(&curve("t, t^2"), &int(0), &c).unwrap();
        assert_eq!(r.kappa, int(2));
        assert_eq!(r.center, Some(vec![int(0), ratio(1, 2)]));
        assert_eq!(r.unit_normal, Some(vec![int(0), int(1)]));
        assert!(r.osculation_ok);
        let r = curvature(&curve("t, 3*t+1"), &int(0), &c).unwrap();
        assert!(r.is_straight() && r.center.is_none());
        let helix = curve("cos(t), sin(t), t");
        let r = curvature(&helix, &int(0), &c).unwrap();
        assert!(near(&r.kappa, &ratio(1, 2), 36));
        assert!(r.osculation_ok);
        assert!(curvature(&curve("t, t, t, t"), &int(0), &c).is_err());
    }

    #[test]
    fn jacobians() {
        let c = cfg();
        let fs = parse_list("x^2*y, x+y").unwrap();
        let vars = default_variables(&fs);
        assert_eq!(vars, vec!["x", "y"]);
        let r = jacobian(&fs, &vars, &[int(1), int(2)], &c).unwrap();
        assert_eq!(r.matrix, vec![vec![int(4), int(1)], vec![int(1), int(1)]]);
        assert!(r.residual_order_ok);
        let r = jacobian(&parse_list("x").unwrap(), &["x".into()], &[int(5)], &c).unwrap();
        assert_eq!(r.matrix, vec![vec![int(1)]]);
        let fs = parse_list("x*y").unwrap();
        let r = jacobian(&fs, &default_variables(&fs), &[int(0), int(0)], &c).unwrap();
        assert_eq!(r.matrix, vec![vec![int(0), int(0)]]);
        assert!(r.residual_order_ok);
        let fs = parse_list("sin(x*y), exp(x)*z").unwrap();
        let vars = default_variables(&fs);
        let r = jacobian(&fs, &vars, &[int(1), ratio(1, 2), int(3)], &c).unwrap();
        assert!(r.residual_order_ok);
        let err = jacobian(&parse_list("abs(x)").unwrap(), &["x".into()], &[int(0)], &c).unwrap_err();
        assert!(matches!(err.kind(), Error::NonSmoothAtPoint(_)));
        let fs = parse_list("b + a, x").unwrap();
        assert_eq!(default_variables(&fs), vec!["x", "a", "b"]);
    }

    #[test]
    fn motion() {
        let c = cfg();
        let k = kinematics(&p("16*t^2"), &int(1), &c).unwrap();
        assert_eq!((k.velocity, k.acceleration), (int(32), int(32)));
        let k = kinematics(&p("5*t"), &int(3), &c).unwrap();
        assert_eq!((k.velocity, k.acceleration), (int(5), int(0)));
        let k = kinematics(&p("sin(t)"), &int(0), &c).unwrap();
        assert!(near(&k.velocity, &int(1), 40) && near(&k.acceleration, &int(0), 40));
    }

    #[test]
    fn newton_implicit_worked_example() {
        // x³ − abx + a³ − dy² = 0 with y = sqrt((x³ − abx + a³)/d) > 0
        let c = cfg();
        for (a, b, d, x0) in [(1, 1, 1, 1), (2, 1, 3, 1), (1, 2, 2, 2)] {
            let src = format!("sqrt((x^3 - {a}*{b}*x + {a}^3)/{d})");
            let y = p(&src);
            let x0 = int(x0);
            let y0 = y.eval_at("x", &x0, 40).unwrap();
            let slope = derivative(&y, &x0, 1, &c).unwrap();
            let want = (int(3) * &x0 * &x0 - int(a * b)) / (int(2 * d) * &y0);
            assert!(near(&slope, &want, 38), "{src}");
        }
    }
}
