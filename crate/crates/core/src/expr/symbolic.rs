//! Rule-based differentiation of rational expressions. Serves as an
//! oracle for the infinitesimal derivative, never as the main path.

use num_traits::{One, ToPrimitive, Zero};

use super::{BinOp, Expr, Node};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn symbolic_derivative(e: &Expr, var: &str) -> Result<Expr> {
    Ok(match &e.node {
        Node::Const(_) => Expr::int(0),
        Node::Var(v) => Expr::int(if v == var { 1 } else { 0 }),
        Node::Neg(a) => neg(symbolic_derivative(a, var)?),
        Node::Binary(op, a, b) => {
            let da = || symbolic_derivative(a, var);
            let db = || symbolic_derivative(b, var);
            let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
            match op {
                BinOp::Add => add(da()?, db()?),
                BinOp::Sub => sub(da()?, db()?),
                BinOp::Mul => add(mul(da()?, b.clone()), mul(a, db()?)),
                BinOp::Div => div(
                    sub(mul(da()?, b.clone()), mul(a, db()?)),
                    pow(b, Expr::int(2)),
                ),
                BinOp::Pow => {
                    let n = integer_exponent(&b).ok_or_else(|| {
                        Error::UnsupportedNode(format!("non-integer exponent in {e}"))
                    })?;
                    mul(
                        mul(num(Scalar::from_integer(n.into())), pow(a, num(Scalar::from_integer((n - 1).into())))),
                        da()?,
                    )
                }
            }
        }
        Node::Call(f, _) => {
            return Err(Error::UnsupportedNode(format!("{}(...)", f.name())));
        }
    })
}

fn integer_exponent(e: &Expr) -> Option<i64> {
    if !e.free_vars().is_empty() || e.has_call() {
        return None;
    }
    let v = e.eval_constant(1).ok()?;
    if v.is_integer() {
        v.to_integer().to_i64()
    } else {
        None
    }
}

impl Expr {
    fn has_call(&self) -> bool {
        let mut found = false;
        self.walk(&mut |n| found |= matches!(n.node, Node::Call(..)));
        found
    }
}

fn konst(e: &Expr) -> Option<Scalar> {
    match &e.node {
        Node::Const(q) => Some(q.clone()),
        Node::Neg(inner) => inner.as_const().map(|q| -q),
        _ => None,
    }
}

/// Negative constants are written as negations, the form the parser yields.
fn num(q: Scalar) -> Expr {
    if q < Scalar::zero() {
        Expr::neg(Expr::constant(-q))
    } else {
        Expr::constant(q)
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => num(x + y),
        (Some(x), _) if x.is_zero() => b,
        (_, Some(y)) if y.is_zero() => a,
        _ => Expr::binary(BinOp::Add, a, b),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => num(x - y),
        (Some(x), _) if x.is_zero() => neg(b),
        (_, Some(y)) if y.is_zero() => a,
        _ => Expr::binary(BinOp::Sub, a, b),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => num(x * y),
        (Some(x), _) if x.is_zero() => Expr::int(0),
        (_, Some(y)) if y.is_zero() => Expr::int(0),
        (Some(x), _) if x.is_one() => b,
        (_, Some(y)) if y.is_one() => a,
        _ => Expr::binary(BinOp::Mul, a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), _) if x.is_zero() => Expr::int(0),
        (_, Some(y)) if y.is_one() => a,
        _ => Expr::binary(BinOp::Div, a, b),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match konst(&b) {
        Some(y) if y.is_zero() => Expr::int(1),
        Some(y) if y.is_one() => a,
        _ => Expr::binary(BinOp::Pow, a, b),
    }
}

fn neg(a: Expr) -> Expr {
    match konst(&a) {
        Some(x) => num(-x),
        None => match a.node {
            Node::Neg(inner) => *inner,
            _ => Expr::neg(a),
        },
    }
}
