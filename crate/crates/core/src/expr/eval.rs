//! One tree walker, three number systems: exact rationals, hyperreals and
//! `f64` (the last is used only by independent oracles).

use std::collections::HashMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{BinOp, Expr, Func, Node};
use crate::analytic;
use crate::error::{Error, Result};
use crate::hyperreal::{apply_analytic, Analytic, Exponent, FieldConfig, HyperReal};
use crate::scalar::{self, Scalar};

/// Arithmetic over some value type.
pub trait Arith {
    type Value: Clone;

    fn constant(&self, q: &Scalar) -> Self::Value;
    fn named_constant(&self, name: &str) -> Option<Self::Value>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn div(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn neg(&self, a: &Self::Value) -> Result<Self::Value>;
    /// `a^b`; implementations pick integer powers, roots or `exp(b ln a)`.
    fn pow(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    /// `root(n, a)`; `n` is checked by the implementation.
    fn root(&self, n: &Self::Value, a: &Self::Value) -> Result<Self::Value>;
    fn call(&self, f: Func, a: &Self::Value) -> Result<Self::Value>;
}

pub fn eval_with<A: Arith>(
    e: &Expr,
    env: &dyn Fn(&str) -> Option<A::Value>,
    a: &A,
) -> Result<A::Value> {
    let at = |r: Result<A::Value>| r.map_err(|err| err.at(e.pos));
    match &e.node {
        Node::Const(q) => Ok(a.constant(q)),
        Node::Var(v) => env(v)
            .or_else(|| a.named_constant(v))
            .ok_or_else(|| Error::UnboundVariable(v.clone()).at(e.pos)),
        Node::Neg(x) => {
            let x = eval_with(x, env, a)?;
            at(a.neg(&x))
        }
        Node::Binary(op, l, r) => {
            let l = eval_with(l, env, a)?;
            let r = eval_with(r, env, a)?;
            at(match op {
                BinOp::Add => a.add(&l, &r),
                BinOp::Sub => a.sub(&l, &r),
                BinOp::Mul => a.mul(&l, &r),
                BinOp::Div => a.div(&l, &r),
                BinOp::Pow => a.pow(&l, &r),
            })
        }
        Node::Call(f, args) => {
            if *f == Func::Root {
                let n = eval_with(&args[0], env, a)?;
                let x = eval_with(&args[1], env, a)?;
                return at(a.root(&n, &x));
            }
            let x = eval_with(&args[0], env, a)?;
            at(a.call(*f, &x))
        }
    }
}

/// Exact rational evaluation; transcendental calls within `10^-d`.
#[derive(Clone, Copy, Debug)]
pub struct RealArith {
    pub precision: u32,
}

fn real_index(n: &Scalar) -> Result<u64> {
    if !n.is_integer() || *n < scalar::int(2) {
        return Err(Error::domain(format!(
            "root index must be an integer >= 2, got {}",
            scalar::render(n)
        )));
    }
    n.to_integer()
        .to_u64()
        .ok_or_else(|| Error::Overflow("root index".into()))
}

impl Arith for RealArith {
    type Value = Scalar;

    fn constant(&self, q: &Scalar) -> Scalar {
        q.clone()
    }
    fn named_constant(&self, name: &str) -> Option<Scalar> {
        match name {
            "pi" => Some(analytic::pi(self.precision)),
            "e" => Some(analytic::e(self.precision)),
            _ => None,
        }
    }
    fn add(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(a + b)
    }
    fn sub(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(a - b)
    }
    fn mul(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(a * b)
    }
    fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(a / b)
    }
    fn neg(&self, a: &Scalar) -> Result<Scalar> {
        Ok(-a)
    }
    fn pow(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        if b.is_integer() {
            if let Some(n) = b.to_integer().to_i64() {
                return analytic::powi_approx(a, n, self.precision);
            }
        }
        if a.is_negative() {
            return Err(Error::domain("non-integer power of a negative number"));
        }
        analytic::powr(a, b, self.precision)
    }
    fn root(&self, n: &Scalar, a: &Scalar) -> Result<Scalar> {
        let n = real_index(n)?;
        analytic::nth_root(a, n, self.precision)
    }
    fn call(&self, f: Func, a: &Scalar) -> Result<Scalar> {
        let d = self.precision;
        match f {
            Func::Sin => analytic::sin(a, d),
            Func::Cos => analytic::cos(a, d),
            Func::Tan => analytic::tan(a, d),
            Func::Exp => analytic::exp(a, d),
            Func::Ln => analytic::ln(a, d),
            Func::Sqrt => analytic::sqrt(a, d),
            Func::Abs => Ok(a.abs()),
            Func::Root => unreachable!("root is dispatched separately"),
        }
    }
}

/// Hyperreal evaluation. With `smooth` set, `abs` at an argument whose
/// standard part is zero is refused, since no Taylor jet exists there.
#[derive(Clone, Debug)]
pub struct HyperArith {
    pub cfg: FieldConfig,
    pub smooth: bool,
}

/// Largest integer power computed by repeated multiplication.
const MAX_EXACT_POWER: i64 = 4096;

impl HyperArith {
    fn standard(v: &HyperReal) -> Option<Scalar> {
        match v.terms() {
            [] => Some(Scalar::zero()),
            [(e, c)] if e.is_zero() => Some(c.clone()),
            _ => None,
        }
    }

    fn exp_ln(&self, a: &HyperReal, b: &Scalar) -> Result<HyperReal> {
        let l = apply_analytic(&Analytic::Ln, a, &self.cfg)?;
        apply_analytic(&Analytic::Exp, &l.scale(b), &self.cfg)
    }

    fn pow_standard(&self, a: &HyperReal, c: &Scalar) -> Result<HyperReal> {
        if c.is_integer() {
            if let Some(n) = c.to_integer().to_i64() {
                if n.abs() <= MAX_EXACT_POWER {
                    return a.powi(n);
                }
            }
            return self.exp_ln(a, c);
        }
        let small = c.numer().to_i64().filter(|p| p.abs() <= 64);
        let den = c.denom().to_u32().filter(|q| *q <= 64);
        if let (Some(p), Some(q)) = (small, den) {
            return a.powi(p)?.nth_root(q, self.cfg.precision);
        }
        apply_analytic(&Analytic::PowReal(c.clone()), a, &self.cfg)
    }
}

impl Arith for HyperArith {
    type Value = HyperReal;

    fn constant(&self, q: &Scalar) -> HyperReal {
        self.cfg.constant(q.clone())
    }
    fn named_constant(&self, name: &str) -> Option<HyperReal> {
        RealArith {
            precision: self.cfg.precision,
        }
        .named_constant(name)
        .map(|q| self.cfg.constant(q))
    }
    fn add(&self, a: &HyperReal, b: &HyperReal) -> Result<HyperReal> {
        Ok(a + b)
    }
    fn sub(&self, a: &HyperReal, b: &HyperReal) -> Result<HyperReal> {
        Ok(a - b)
    }
    fn mul(&self, a: &HyperReal, b: &HyperReal) -> Result<HyperReal> {
        Ok(a * b)
    }
    fn div(&self, a: &HyperReal, b: &HyperReal) -> Result<HyperReal> {
        a.div(b)
    }
    fn neg(&self, a: &HyperReal) -> Result<HyperReal> {
        Ok(-a)
    }
    /// `a^b = a^st(b) · exp((b − st b)·ln a)`, so the standard factor is
    /// computed exactly as it would be at a standard exponent.
    fn pow(&self, a: &HyperReal, b: &HyperReal) -> Result<HyperReal> {
        if !b.is_limited() {
            return Err(Error::TranscendentalOnUnlimited);
        }
        let c = b.st_finite()?;
        let h = b.infinitesimal_part();
        let base = self.pow_standard(a, &c)?;
        if h.is_zero() {
            return Ok(base);
        }
        let l = apply_analytic(&Analytic::Ln, a, &self.cfg)?;
        Ok(&base * &apply_analytic(&Analytic::Exp, &(&h * &l), &self.cfg)?)
    }
    fn root(&self, n: &HyperReal, a: &HyperReal) -> Result<HyperReal> {
        if !n.is_limited() {
            return Err(Error::TranscendentalOnUnlimited);
        }
        let Some(c) = Self::standard(n) else {
            return Err(Error::domain("root index must be a standard integer"));
        };
        let k = real_index(&c)?;
        let k = u32::try_from(k).map_err(|_| Error::Overflow("root index".into()))?;
        a.nth_root(k, self.cfg.precision)
    }
    fn call(&self, f: Func, a: &HyperReal) -> Result<HyperReal> {
        let cfg = &self.cfg;
        match f {
            Func::Sin => apply_analytic(&Analytic::Sin, a, cfg),
            Func::Cos => apply_analytic(&Analytic::Cos, a, cfg),
            Func::Tan => apply_analytic(&Analytic::Tan, a, cfg),
            Func::Exp => apply_analytic(&Analytic::Exp, a, cfg),
            Func::Ln => apply_analytic(&Analytic::Ln, a, cfg),
            Func::Sqrt => a.nth_root(2, cfg.precision),
            Func::Abs => {
                if self.smooth && a.is_limited() && a.coefficient(&Exponent::zero()).is_zero() {
                    return Err(Error::NonSmoothAtPoint(
                        "abs of an argument with standard part 0".into(),
                    ));
                }
                Ok(a.abs())
            }
            Func::Root => unreachable!("root is dispatched separately"),
        }
    }
}

/// Plain floating point, for quadrature oracles.
#[derive(Clone, Copy, Debug, Default)]
pub struct F64Arith;

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("{what} is not finite")))
    }
}

impl Arith for F64Arith {
    type Value = f64;

    fn constant(&self, q: &Scalar) -> f64 {
        scalar::to_f64(q)
    }
    fn named_constant(&self, name: &str) -> Option<f64> {
        match name {
            "pi" => Some(std::f64::consts::PI),
            "e" => Some(std::f64::consts::E),
            _ => None,
        }
    }
    fn add(&self, a: &f64, b: &f64) -> Result<f64> {
        Ok(a + b)
    }
    fn sub(&self, a: &f64, b: &f64) -> Result<f64> {
        Ok(a - b)
    }
    fn mul(&self, a: &f64, b: &f64) -> Result<f64> {
        Ok(a * b)
    }
    fn div(&self, a: &f64, b: &f64) -> Result<f64> {
        if *b == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(a / b)
    }
    fn neg(&self, a: &f64) -> Result<f64> {
        Ok(-a)
    }
    fn pow(&self, a: &f64, b: &f64) -> Result<f64> {
        if b.fract() == 0.0 && b.abs() < 2f64.powi(31) {
            return finite(a.powi(*b as i32), "power");
        }
        if *a < 0.0 {
            return Err(Error::domain("non-integer power of a negative number"));
        }
        finite(a.powf(*b), "power")
    }
    fn root(&self, n: &f64, a: &f64) -> Result<f64> {
        if n.fract() != 0.0 || *n < 2.0 {
            return Err(Error::domain("root index must be an integer >= 2"));
        }
        if *a < 0.0 {
            return Err(Error::domain("root of a negative number"));
        }
        Ok(a.powf(1.0 / n))
    }
    fn call(&self, f: Func, a: &f64) -> Result<f64> {
        let v = match f {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Tan => a.tan(),
            Func::Exp => a.exp(),
            Func::Ln => {
                if *a <= 0.0 {
                    return Err(Error::domain("ln of non-positive value"));
                }
                a.ln()
            }
            Func::Sqrt => {
                if *a < 0.0 {
                    return Err(Error::domain("sqrt of negative value"));
                }
                a.sqrt()
            }
            Func::Abs => a.abs(),
            Func::Root => unreachable!("root is dispatched separately"),
        };
        finite(v, f.name())
    }
}

pub fn eval_real(e: &Expr, env: &HashMap<String, Scalar>, precision: u32) -> Result<Scalar> {
    eval_with(e, &|v| env.get(v).cloned(), &RealArith { precision })
}

pub fn eval_hyper(e: &Expr, env: &HashMap<String, HyperReal>, cfg: &FieldConfig) -> Result<HyperReal> {
    let a = HyperArith {
        cfg: cfg.clone(),
        smooth: false,
    };
    eval_with(e, &|v| env.get(v).cloned(), &a)
}

/// As [`eval_hyper`], refusing non-smooth `abs` points.
pub fn eval_hyper_smooth(
    e: &Expr,
    env: &HashMap<String, HyperReal>,
    cfg: &FieldConfig,
) -> Result<HyperReal> {
    let a = HyperArith {
        cfg: cfg.clone(),
        smooth: true,
    };
    eval_with(e, &|v| env.get(v).cloned(), &a)
}

pub fn eval_f64(e: &Expr, env: &HashMap<String, f64>) -> Result<f64> {
    eval_with(e, &|v| env.get(v).copied(), &F64Arith)
}

impl Expr {
    /// Exact evaluation at a single variable binding.
    pub fn eval_at(&self, var: &str, x: &Scalar, precision: u32) -> Result<Scalar> {
        eval_with(
            self,
            &|v| (v == var).then(|| x.clone()),
            &RealArith { precision },
        )
    }

    pub fn eval_f64_at(&self, var: &str, x: f64) -> Result<f64> {
        eval_with(self, &|v| (v == var).then_some(x), &F64Arith)
    }

    /// Exact evaluation of an expression with no free variables.
    pub fn eval_constant(&self, precision: u32) -> Result<Scalar> {
        eval_with(self, &|_| None, &RealArith { precision })
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::hyperreal::ExtendedReal;
    use crate::scalar::{int, ratio};

    fn cfg() -> FieldConfig {
        FieldConfig::default()
    }

    fn hyper_at(src: &str, var: &str, x: HyperReal) -> Result<HyperReal> {
        let mut env = HashMap::new();
        env.insert(var.to_string(), x);
        eval_hyper(&parse(src).unwrap(), &env, &cfg())
    }

    #[test]
    fn hyper_examples() {
        let e = cfg().epsilon(Exponent::int(1));
        let x = &cfg().constant(int(3)) + &e;
        let v = hyper_at("x^2", "x", x).unwrap();
        assert_eq!(v.to_string(), "9 + 6*eps^1 + 1*eps^2");
        let gamma = cfg().epsilon(Exponent::int(-1));
        assert_eq!(hyper_at("1/n", "n", gamma.clone()).unwrap(), e);
        let err = hyper_at("ln(n)", "n", gamma).unwrap_err();
        assert_eq!(err.kind(), &Error::TranscendentalOnUnlimited);
        assert_eq!(err.position(), Some(0));
    }

    #[test]
    fn real_examples() {
        let x2 = parse("x^2+1").unwrap();
        assert_eq!(x2.eval_at("x", &int(2), 40).unwrap(), int(5));
        assert_eq!(parse("sin(0)").unwrap().eval_constant(40).unwrap(), int(0));
        let s = parse("sqrt(2)").unwrap().eval_constant(40).unwrap();
        assert!((&s * &s - int(2)).abs() < analytic::tolerance(39));
        assert_eq!(parse("root(3, 8)").unwrap().eval_constant(40).unwrap(), int(2));
        assert_eq!(parse("4^0.5").unwrap().eval_constant(40).unwrap(), int(2));
        assert_eq!(parse("2^-2").unwrap().eval_constant(40).unwrap(), ratio(1, 4));
    }

    #[test]
    fn real_errors_with_positions() {
        let e = parse("1 + 1/(x - 2)").unwrap();
        let err = e.eval_at("x", &int(2), 40).unwrap_err();
        assert_eq!(err.kind(), &Error::DivisionByZero);
        assert_eq!(err.position(), Some(5));
        let e = parse("y + 1").unwrap();
        assert!(matches!(e.eval_at("x", &int(1), 40).unwrap_err().kind(), Error::UnboundVariable(_)));
        assert!(parse("ln(0)").unwrap().eval_constant(40).is_err());
        assert!(parse("root(n, 2)").unwrap().eval_at("n", &ratio(5, 2), 40).is_err());
    }

    #[test]
    fn non_constant_exponent_goes_through_exp_ln() {
        let gamma = cfg().epsilon(Exponent::int(-1));
        let v = hyper_at("2^(1/n)", "n", gamma.clone()).unwrap();
        assert_eq!(v.st(), ExtendedReal::Finite(int(1)));
        let err = hyper_at("root(n, n)", "n", gamma.clone()).unwrap_err();
        assert_eq!(err.kind(), &Error::TranscendentalOnUnlimited);
        let err = hyper_at("0.5^n", "n", gamma).unwrap_err();
        assert_eq!(err.kind(), &Error::TranscendentalOnUnlimited);
    }

    #[test]
    fn abs_refused_only_in_smooth_mode() {
        let e = cfg().epsilon(Exponent::int(1));
        let mut env = HashMap::new();
        env.insert("x".to_string(), e);
        let ex = parse("abs(x)").unwrap();
        assert!(eval_hyper(&ex, &env, &cfg()).is_ok());
        let err = eval_hyper_smooth(&ex, &env, &cfg()).unwrap_err();
        assert!(matches!(err.kind(), Error::NonSmoothAtPoint(_)));
    }

    #[test]
    fn f64_path() {
        let e = parse("x^2 + sin(x)").unwrap();
        let v = e.eval_f64_at("x", 0.5).unwrap();
        assert!((v - (0.25 + 0.5f64.sin())).abs() < 1e-15);
        assert!(parse("ln(x)").unwrap().eval_f64_at("x", -1.0).is_err());
    }
}
