use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::{Grid, Integrand, PartitionSpec, Rect};
use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, Node};
use crate::scalar::{self, Scalar};

/// A set function with an exact closed form on every subinterval.
#[derive(Clone, Debug, PartialEq)]
pub enum Functional {
    /// `B(S) = ∫_S p` for a polynomial `p`.
    Integral(Expr),
    /// `B(S) = ∫_S (g − f)` for polynomials `f ≤ g`.
    AreaBetween { lower: Expr, upper: Expr },
}

impl Functional {
    /// `integral` takes one expression, `area-between` two (lower, upper).
    pub fn parse(name: &str, args: &[Expr]) -> Result<Self> {
        match (name, args) {
            ("integral", [p]) => Ok(Functional::Integral(p.clone())),
            ("area-between", [f, g]) => Ok(Functional::AreaBetween {
                lower: f.clone(),
                upper: g.clone(),
            }),
            _ => Err(Error::UnknownFunctional(format!("{name} with {} argument(s)", args.len()))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::Integral(_) => "integral",
            Functional::AreaBetween { .. } => "area-between",
        }
    }

    fn exprs(&self) -> Vec<&Expr> {
        match self {
            Functional::Integral(p) => vec![p],
            Functional::AreaBetween { lower, upper } => vec![lower, upper],
        }
    }

    /// Coefficients of the density in `var`.
    fn density(&self, var: &str) -> Result<Vec<Scalar>> {
        let poly = |e: &Expr| {
            polynomial(e, var).ok_or_else(|| Error::UnknownFunctional(format!("`{e}` is not a polynomial in {var}")))
        };
        match self {
            Functional::Integral(p) => poly(p),
            Functional::AreaBetween { lower, upper } => Ok(sub(&poly(upper)?, &poly(lower)?)),
        }
    }
}

fn add(p: &[Scalar], q: &[Scalar]) -> Vec<Scalar> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| p.get(i).cloned().unwrap_or_else(Scalar::zero) + q.get(i).cloned().unwrap_or_else(Scalar::zero))
        .collect()
}

fn sub(p: &[Scalar], q: &[Scalar]) -> Vec<Scalar> {
    add(p, &q.iter().map(|c| -c).collect::<Vec<_>>())
}

fn mul(p: &[Scalar], q: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Coefficients `[c₀, c₁, …]` when `e` is a polynomial in `var`.
fn polynomial(e: &Expr, var: &str) -> Option<Vec<Scalar>> {
    Some(match &e.node {
        Node::Const(q) => vec![q.clone()],
        Node::Var(v) if v == var => vec![Scalar::zero(), scalar::int(1)],
        Node::Var(_) | Node::Call(..) => return None,
        Node::Neg(a) => polynomial(a, var)?.iter().map(|c| -c).collect(),
        Node::Binary(op, l, r) => {
            let p = polynomial(l, var)?;
            match op {
                BinOp::Add => add(&p, &polynomial(r, var)?),
                BinOp::Sub => sub(&p, &polynomial(r, var)?),
                BinOp::Mul => mul(&p, &polynomial(r, var)?),
                BinOp::Div => {
                    let q = r.as_const().filter(|q| !q.is_zero())?;
                    p.iter().map(|c| c / q).collect()
                }
                BinOp::Pow => {
                    let k = r.as_const().filter(|k| k.is_integer() && !k.is_negative())?.to_integer().to_u32()?;
                    (0..k).fold(vec![scalar::int(1)], |acc, _| mul(&acc, &p))
                }
            }
        }
    })
}

/// `∫_u^v p`.
fn integral(p: &[Scalar], u: &Scalar, v: &Scalar) -> Scalar {
    let mut total = Scalar::zero();
    let (mut up, mut vp) = (u.clone(), v.clone());
    for (k, c) in p.iter().enumerate() {
        total += c * (&vp - &up) / scalar::int(k as i64 + 1);
        up *= u;
        vp *= v;
    }
    total
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub mesh: Scalar,
    pub cells: usize,
    /// `max |B(S)/v(S) − f(p)|` over cells `S` and `p ∈ {vertices, center}`.
    pub max_deviation: Scalar,
}

/// Measures how far `B` is from being supernear to `f` on `[a, b]` at each
/// mesh width.
pub fn supernearness_probe(
    b_fn: &Functional,
    f: &Expr,
    a: &Scalar,
    b: &Scalar,
    meshes: &[Scalar],
    precision: u32,
) -> Result<Vec<ProbeRow>> {
    let mut vars = f.free_vars();
    for e in b_fn.exprs() {
        vars.extend(e.free_vars());
    }
    if vars.len() > 1 {
        return Err(Error::invalid("the functional and f must share one variable"));
    }
    let var = vars.into_iter().next().unwrap_or_else(|| "x".to_string());
    let density = b_fn.density(&var)?;
    let fi = Integrand {
        expr: f.clone(),
        vars: vec![var],
    };
    let rect = Rect::interval(a.clone(), b.clone())?;
    meshes
        .iter()
        .map(|h| {
            let grid = Grid::new(&rect, &PartitionSpec::with_mesh(&rect, h)?)?;
            let pts = &grid.axes[0];
            let values = pts
                .par_iter()
                .map(|t| fi.eval(std::slice::from_ref(t), precision))
                .collect::<Result<Vec<_>>>()?;
            let two = scalar::int(2);
            let worst = (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let (u, v) = (&pts[i], &pts[i + 1]);
                    let mean = integral(&density, u, v) / (v - u);
                    let centre = fi.eval(&[(u + v) / &two], precision)?;
                    Ok([&values[i], &values[i + 1], &centre]
                        .into_iter()
                        .map(|fp| (&mean - fp).abs())
                        .max()
                        .expect("three probes"))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .expect("at least one cell");
            Ok(ProbeRow {
                mesh: h.clone(),
                cells: grid.len(),
                max_deviation: worst,
            })
        })
        .collect()
}
