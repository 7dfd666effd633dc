use super::defs::Definitions;
use super::lexer::{tokenize, Token, TokenKind};
use super::{BinOp, Expr, Func, Node};
use crate::error::ParseError;
use crate::scalar;

pub fn parse(input: &str) -> Result<Expr, ParseError> {
    Parser::new(input, None)?.parse_all()
}

/// Parses a comma-separated list of expressions, e.g. curve components.
pub fn parse_list(input: &str) -> Result<Vec<Expr>, ParseError> {
    Parser::new(input, None)?.parse_all_list()
}

pub(super) struct Parser<'a> {
    tokens: Vec<Token>,
    idx: usize,
    end: usize,
    defs: Option<&'a Definitions>,
}

impl<'a> Parser<'a> {
    pub(super) fn new(input: &str, defs: Option<&'a Definitions>) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(input)?,
            idx: 0,
            end: input.chars().count(),
            defs,
        })
    }

    pub(super) fn parse_all(mut self) -> Result<Expr, ParseError> {
        let e = self.expr()?;
        self.expect_end()?;
        Ok(e)
    }

    pub(super) fn parse_all_list(mut self) -> Result<Vec<Expr>, ParseError> {
        let mut out = vec![self.expr()?];
        while self.eat(TokenKind::Comma, ",") {
            out.push(self.expr()?);
        }
        self.expect_end()?;
        Ok(out)
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.error_at(t, "operator or end of input")),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx)
    }

    fn pos(&self) -> usize {
        self.peek().map(|t| t.position).unwrap_or(self.end)
    }

    fn eat(&mut self, kind: TokenKind, text: &str) -> bool {
        match self.peek() {
            Some(t) if t.kind == kind && t.text == text => {
                self.idx += 1;
                true
            }
            _ => false,
        }
    }

    fn error_at(&self, t: &Token, expected: &str) -> ParseError {
        ParseError {
            position: t.position,
            expected: expected.into(),
            found: format!("'{}'", t.text),
        }
    }

    fn error_here(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error_at(t, expected),
            None => ParseError {
                position: self.end,
                expected: expected.into(),
                found: "end of input".into(),
            },
        }
    }

    fn expect(&mut self, kind: TokenKind, text: &str) -> Result<(), ParseError> {
        if self.eat(kind, text) {
            Ok(())
        } else {
            Err(self.error_here(&format!("'{text}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let pos = self.pos();
            let op = if self.eat(TokenKind::Operator, "+") {
                BinOp::Add
            } else if self.eat(TokenKind::Operator, "-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let pos = self.pos();
            let op = if self.eat(TokenKind::Operator, "*") {
                BinOp::Mul
            } else if self.eat(TokenKind::Operator, "/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        if self.eat(TokenKind::Operator, "-") {
            let inner = self.unary()?;
            return Ok(Expr::new(Node::Neg(Box::new(inner)), pos));
        }
        if self.eat(TokenKind::Operator, "+") {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        let pos = self.pos();
        if self.eat(TokenKind::Operator, "^") {
            let exp = self.unary()?;
            return Ok(Expr::new(
                Node::Binary(BinOp::Pow, Box::new(base), Box::new(exp)),
                pos,
            ));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.error_here("number, variable, call or '('")),
        };
        match tok.kind {
            TokenKind::Number => {
                self.idx += 1;
                let q = scalar::parse_rational(&tok.text).map_err(|_| self.error_at(&tok, "number"))?;
                Ok(Expr::new(Node::Const(q), tok.position))
            }
            TokenKind::Identifier => {
                self.idx += 1;
                if self.eat(TokenKind::Paren, "(") {
                    let args = self.arguments()?;
                    self.call(&tok, args)
                } else {
                    Ok(Expr::new(Node::Var(tok.text.clone()), tok.position))
                }
            }
            TokenKind::Paren if tok.text == "(" => {
                self.idx += 1;
                let e = self.expr()?;
                self.expect(TokenKind::Paren, ")")?;
                Ok(e)
            }
            _ => Err(self.error_at(&tok, "number, variable, call or '('")),
        }
    }

    fn arguments(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if self.eat(TokenKind::Paren, ")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(TokenKind::Comma, ",") {
                continue;
            }
            self.expect(TokenKind::Paren, ")")?;
            return Ok(args);
        }
    }

    fn call(&self, name: &Token, args: Vec<Expr>) -> Result<Expr, ParseError> {
        if let Some(f) = Func::from_name(&name.text) {
            if args.len() != f.arity() {
                return Err(ParseError {
                    position: name.position,
                    expected: format!("{} argument(s) to {}", f.arity(), f.name()),
                    found: format!("{} argument(s)", args.len()),
                });
            }
            if f == Func::Root {
                if let Some(n) = args[0].as_const() {
                    let ok = n.is_integer() && *n >= scalar::int(2);
                    if !ok {
                        return Err(ParseError {
                            position: args[0].pos,
                            expected: "integer root index >= 2".into(),
                            found: scalar::render(n),
                        });
                    }
                }
            }
            return Ok(Expr::new(Node::Call(f, args), name.position));
        }
        if let Some(def) = self.defs.and_then(|d| d.get(&name.text)) {
            if def.params.len() != args.len() {
                return Err(ParseError {
                    position: name.position,
                    expected: format!("{} argument(s) to {}", def.params.len(), def.name),
                    found: format!("{} argument(s)", args.len()),
                });
            }
            return Ok(def.apply(&args));
        }
        Err(ParseError {
            position: name.position,
            expected: "known function".into(),
            found: format!("'{}'", name.text),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_shape() {
        let e = parse("x^3 - 2*x + 1").unwrap();
        // ((x^3 - (2*x)) + 1)
        let Node::Binary(BinOp::Add, l, r) = &e.node else { panic!() };
        assert_eq!(r.as_const(), Some(&scalar::int(1)));
        let Node::Binary(BinOp::Sub, ll, lr) = &l.node else { panic!() };
        assert!(matches!(ll.node, Node::Binary(BinOp::Pow, ..)));
        assert!(matches!(lr.node, Node::Binary(BinOp::Mul, ..)));
    }

    #[test]
    fn power_is_right_associative_and_binds_over_negation() {
        let e = parse("2^3^2").unwrap();
        let Node::Binary(BinOp::Pow, _, r) = &e.node else { panic!() };
        assert!(matches!(r.node, Node::Binary(BinOp::Pow, ..)));
        let n = parse("-x^2").unwrap();
        let Node::Neg(inner) = &n.node else { panic!() };
        assert!(matches!(inner.node, Node::Binary(BinOp::Pow, ..)));
    }

    #[test]
    fn root_call() {
        let e = parse("root(3, x+1)").unwrap();
        let Node::Call(Func::Root, args) = &e.node else { panic!() };
        assert_eq!(args[0].as_const(), Some(&scalar::int(3)));
        assert_eq!(args[1], parse("x + 1").unwrap());
        assert!(parse("root(n, n)").is_ok());
        assert_eq!(parse("root(1, x)").unwrap_err().position, 5);
        assert!(parse("root(2.5, x)").is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.25").unwrap().as_const(), Some(&scalar::ratio(1, 4)));
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse("2*").unwrap_err().position, 2);
        assert_eq!(parse("(x + 1").unwrap_err().position, 6);
        assert_eq!(parse("x y").unwrap_err().position, 2);
        assert_eq!(parse("foo(x)").unwrap_err().position, 0);
        assert_eq!(parse("sin(x, y)").unwrap_err().position, 0);
        assert_eq!(parse("").unwrap_err().position, 0);
        assert_eq!(parse("3 + )").unwrap_err().position, 4);
    }

    #[test]
    fn lists() {
        let v = parse_list("cos(t), sin(t)").unwrap();
        assert_eq!(v.len(), 2);
        let v = parse_list("root(2, x), x*y").unwrap();
        assert_eq!(v.len(), 2);
    }
}
