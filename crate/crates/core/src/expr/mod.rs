//! A small expression language over the reals and the hyperreals.
//!
//! Grammar (precedence high to low): `^` (right associative), unary `-`,
//! `*` `/`, `+` `-`. Calls: `sin cos tan exp ln sqrt abs` take one argument,
//! `root(n, x)` two. Decimal literals are exact rationals. The names `pi`
//! and `e` are constants unless bound by the caller.

mod defs;
mod eval;
mod lexer;
mod parser;
mod symbolic;

use std::collections::BTreeSet;
use std::fmt;

use crate::scalar::{self, Scalar};

pub use defs::{parse_definitions, Definitions, FunctionDef};
pub use eval::{
    eval_f64, eval_hyper, eval_hyper_smooth, eval_real, eval_with, Arith, F64Arith, HyperArith,
    RealArith,
};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_list};
pub use symbolic::symbolic_derivative;

pub const NAMED_CONSTANTS: [&str; 2] = ["pi", "e"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Root,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "root" => Func::Root,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Root => "root",
            Func::Abs => "abs",
        }
    }

    pub fn arity(self) -> usize {
        if self == Func::Root {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(Scalar),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// An expression node with the character offset it was parsed from.
/// Equality is structural and ignores offsets.
#[derive(Clone, Debug)]
pub struct Expr {
    pub node: Node,
    pub pos: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl Expr {
    pub fn new(node: Node, pos: usize) -> Self {
        Expr { node, pos }
    }

    pub fn constant(q: Scalar) -> Self {
        Expr::new(Node::Const(q), 0)
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(scalar::int(n))
    }

    pub fn var(name: &str) -> Self {
        Expr::new(Node::Var(name.to_string()), 0)
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::new(Node::Binary(op, Box::new(l), Box::new(r)), 0)
    }

    pub fn neg(e: Expr) -> Self {
        Expr::new(Node::Neg(Box::new(e)), 0)
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Self {
        Expr::new(Node::Call(f, args), 0)
    }

    pub fn as_const(&self) -> Option<&Scalar> {
        match &self.node {
            Node::Const(q) => Some(q),
            _ => None,
        }
    }

    /// Free variable names, excluding the named constants.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Free variables in order of first appearance.
    pub fn vars_in_order(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Node::Var(v) = &e.node {
                if !NAMED_CONSTANTS.contains(&v.as_str()) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        self.walk(&mut |e| {
            if let Node::Var(v) = &e.node {
                if !NAMED_CONSTANTS.contains(&v.as_str()) {
                    out.insert(v.clone());
                }
            }
        });
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match &self.node {
            Node::Const(_) | Node::Var(_) => {}
            Node::Neg(a) => a.walk(f),
            Node::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Node::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
        }
    }

    /// True when some `abs` call appears.
    pub fn has_abs(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let Node::Call(Func::Abs, _) = e.node {
                found = true;
            }
        });
        found
    }

    /// Replaces variables by expressions.
    pub fn substitute(&self, bind: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        let node = match &self.node {
            Node::Var(v) => {
                if let Some(e) = bind(v) {
                    return e;
                }
                Node::Var(v.clone())
            }
            Node::Const(q) => Node::Const(q.clone()),
            Node::Neg(a) => Node::Neg(Box::new(a.substitute(bind))),
            Node::Binary(op, a, b) => {
                Node::Binary(*op, Box::new(a.substitute(bind)), Box::new(b.substitute(bind)))
            }
            Node::Call(f, args) => Node::Call(*f, args.iter().map(|a| a.substitute(bind)).collect()),
        };
        Expr::new(node, self.pos)
    }

    fn precedence(&self) -> u8 {
        match &self.node {
            Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Node::Neg(_) => 3,
            Node::Binary(BinOp::Pow, ..) => 4,
            Node::Const(q) if q < &Scalar::from_integer(0.into()) => 3,
            _ => 5,
        }
    }

    fn render(&self, min: u8, out: &mut String) {
        let p = self.precedence();
        let wrap = p < min;
        if wrap {
            out.push('(');
        }
        match &self.node {
            Node::Const(q) => match scalar::render_decimal(q) {
                Some(s) if !s.starts_with('-') => out.push_str(&s),
                _ => {
                    out.push('(');
                    out.push_str(&scalar::render(q));
                    out.push(')');
                }
            },
            Node::Var(v) => out.push_str(v),
            Node::Neg(a) => {
                out.push('-');
                a.render(3, out);
            }
            Node::Binary(op, a, b) => {
                let (lmin, rmin) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (5, 3),
                };
                a.render(lmin, out);
                match op {
                    BinOp::Add | BinOp::Sub => {
                        out.push(' ');
                        out.push_str(op.symbol());
                        out.push(' ');
                    }
                    _ => out.push_str(op.symbol()),
                }
                b.render(rmin, out);
            }
            Node::Call(f, args) => {
                out.push_str(f.name());
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    a.render(0, out);
                }
                out.push(')');
            }
        }
        if wrap {
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(0, &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_respects_precedence() {
        for (src, want) in [
            ("x^3 - 2*x + 1", "x^3 - 2*x + 1"),
            ("-x^2", "-x^2"),
            ("(-x)^2", "(-x)^2"),
            ("a - (b + c)", "a - (b + c)"),
            ("a/(b*c)", "a/(b*c)"),
            ("2^3^2", "2^3^2"),
            ("(2^3)^2", "(2^3)^2"),
            ("x^-2", "x^-2"),
            ("root(3, x+1)", "root(3, x + 1)"),
            ("0.25*x", "0.25*x"),
        ] {
            assert_eq!(parse(src).unwrap().to_string(), want, "{src}");
        }
    }

    #[test]
    fn free_variables_skip_named_constants() {
        let e = parse("pi*x + e^y").unwrap();
        let vars: Vec<_> = e.free_vars().into_iter().collect();
        assert_eq!(vars, vec!["x", "y"]);
        assert_eq!(parse("y + x*y").unwrap().vars_in_order(), vec!["y", "x"]);
    }

    #[test]
    fn non_decimal_constants_render_parenthesized() {
        let e = Expr::binary(BinOp::Mul, Expr::constant(scalar::ratio(1, 3)), Expr::var("x"));
        assert_eq!(e.to_string(), "(1/3)*x");
        let n = Expr::binary(BinOp::Pow, Expr::var("x"), Expr::int(-3));
        assert_eq!(n.to_string(), "x^(-3)");
    }
}
