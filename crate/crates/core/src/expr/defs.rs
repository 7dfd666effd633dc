//! Function definition files: one `name(params) = body` per line, `#`
//! starts a comment. A definition may call the ones above it; calls are
//! inlined at parse time, so evaluation only ever sees the fixed grammar.

use super::parser::Parser;
use super::{Expr, Func, NAMED_CONSTANTS};
use crate::error::{Error, ParseError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Expr,
}

impl FunctionDef {
    pub(super) fn apply(&self, args: &[Expr]) -> Expr {
        self.body.substitute(&|v| {
            self.params
                .iter()
                .position(|p| p == v)
                .map(|i| args[i].clone())
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Definitions {
    defs: Vec<FunctionDef>,
}

impl Definitions {
    pub fn get(&self, name: &str) -> Option<&FunctionDef> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FunctionDef> {
        self.defs.iter()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Parses an expression that may call the defined functions.
    pub fn parse(&self, input: &str) -> Result<Expr, ParseError> {
        Parser::new(input, Some(self))?.parse_all()
    }

    pub fn parse_list(&self, input: &str) -> Result<Vec<Expr>, ParseError> {
        Parser::new(input, Some(self))?.parse_all_list()
    }
}

pub fn parse_definitions(text: &str) -> Result<Definitions> {
    let mut defs = Definitions::default();
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        let base = offset;
        offset += line.chars().count();
        let content = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        if content.trim().is_empty() {
            continue;
        }
        let bad = |pos: usize, expected: &str, found: &str| {
            Error::Parse(ParseError {
                position: base + pos,
                expected: expected.into(),
                found: found.into(),
            })
        };
        let (head, body) = content
            .split_once('=')
            .ok_or_else(|| bad(0, "`name(params) = body`", content.trim()))?;
        let head_t = head.trim();
        let open = head_t
            .find('(')
            .ok_or_else(|| bad(0, "parameter list", head_t))?;
        if !head_t.ends_with(')') {
            return Err(bad(head.len(), "')'", head_t));
        }
        let name = head_t[..open].trim().to_string();
        let valid_ident = |s: &str| {
            !s.is_empty()
                && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        };
        if !valid_ident(&name) || Func::from_name(&name).is_some() || NAMED_CONSTANTS.contains(&name.as_str()) {
            return Err(bad(0, "new function name", &name));
        }
        let params: Vec<String> = head_t[open + 1..head_t.len() - 1]
            .split(',')
            .map(|p| p.trim().to_string())
            .filter(|p| !p.is_empty())
            .collect();
        if let Some(p) = params.iter().find(|p| !valid_ident(p)) {
            return Err(bad(open + 1, "parameter name", p));
        }
        let body_pos = head.chars().count() + 1;
        let expr = defs.parse(body).map_err(|mut e| {
            e.position += base + body_pos;
            Error::Parse(e)
        })?;
        if let Some(v) = expr.free_vars().into_iter().find(|v| !params.contains(v)) {
            return Err(bad(body_pos, "only parameters or pi/e in the body", &v));
        }
        defs.defs.retain(|d| d.name != name);
        defs.defs.push(FunctionDef {
            name,
            params,
            body: expr,
        });
    }
    Ok(defs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn definitions_inline() {
        let src = "# demo\nsq(u) = u*u\nf(x, y) = sq(x) + y   # trailing\n\n";
        let defs = parse_definitions(src).unwrap();
        assert_eq!(defs.len(), 2);
        let e = defs.parse("f(t+1, 2)").unwrap();
        assert_eq!(e, parse("(t + 1)*(t + 1) + 2").unwrap());
    }

    #[test]
    fn rejects_free_variables_and_bad_heads() {
        assert!(parse_definitions("f(x) = x + z").is_err());
        assert!(parse_definitions("f(x) = x + pi").is_ok());
        assert!(parse_definitions("sin(x) = x").is_err());
        assert!(parse_definitions("f x = x").is_err());
        assert!(parse_definitions("f(x) x").is_err());
        let err = parse_definitions("g(x) = x\nf(x) = x +").unwrap_err();
        assert_eq!(err.position(), Some(19));
    }
}
