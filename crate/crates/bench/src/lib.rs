//! Shared fixtures for the benchmarks.

use hrw_core::expr::parse;
use hrw_core::integration::{Integrand, Rect, Region};
use hrw_core::scalar::{int, ratio};
use hrw_core::{Exponent, Expr, FieldConfig, HyperReal, Scalar};

pub const PRECISION: u32 = 40;

pub fn config(window: i64) -> FieldConfig {
    FieldConfig::new(Exponent(int(window)), PRECISION).expect("valid config")
}

/// `1 + a₁ε + … + a_{n}εⁿ` with small rational coefficients.
pub fn dense(n: i64, window: i64) -> HyperReal {
    let terms = (0..=n).map(|k| (Exponent(int(k)), ratio(2 * k + 1, k + 3)));
    HyperReal::from_terms(terms, Exponent(int(window)))
}

pub fn expr(src: &str) -> Expr {
    parse(src).expect("fixture parses")
}

pub fn point(p: i64, q: i64) -> Scalar {
    ratio(p, q)
}

pub fn unit_square() -> Rect {
    Rect::cube(int(0), int(1), 2).expect("valid box")
}

pub fn integrand(src: &str, dimension: usize) -> Integrand {
    Integrand::new(expr(src), dimension).expect("fixture integrand")
}

pub fn unit_disc() -> Region {
    Region::new(Rect::cube(int(-1), int(1), 2).expect("valid box"), expr("x^2+y^2-1")).expect("valid region")
}
