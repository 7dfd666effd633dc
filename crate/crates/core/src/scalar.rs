//! Exact rational scalars and their textual forms.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{ParseError, Result};

/// Exact real coefficient: a reduced fraction with positive denominator.
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

pub fn pow2(k: i64) -> Scalar {
    if k >= 0 {
        Scalar::from_integer(BigInt::one() << k as usize)
    } else {
        Scalar::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// Renders as `p/q`, or a bare integer when the denominator is one.
pub fn render(q: &Scalar) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Always `p/q`, the form used in machine-readable reports.
pub fn render_fraction(q: &Scalar) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Finite decimal expansion of `q`, or `None` when it does not terminate.
pub fn render_decimal(q: &Scalar) -> Option<String> {
    let mut den = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return Some(q.numer().to_string());
    }
    let scaled = (q.abs() * Scalar::from_integer(num_traits::pow(BigInt::from(10), digits)))
        .to_integer()
        .to_string();
    let padded = format!("{:0>width$}", scaled, width = digits + 1);
    let (whole, frac) = padded.split_at(padded.len() - digits);
    let sign = if q.is_negative() { "-" } else { "" };
    Some(format!("{sign}{whole}.{frac}"))
}

pub fn to_f64(q: &Scalar) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // very large numerator and denominator: scale both down first
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = (nb.min(db) - 60).max(0) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Exact rational value of a finite binary float.
pub fn from_f64(v: f64) -> Option<Scalar> {
    Scalar::from_float(v)
}

/// Parses `p/q`, an integer, or a finite decimal (`-0.25`, `3.`, `.5`),
/// always exactly.
pub fn parse_rational(s: &str) -> Result<Scalar, ParseError> {
    let t = s.trim();
    let err = |pos: usize, found: &str| ParseError {
        position: pos,
        expected: "rational literal (integer, p/q, or decimal)".into(),
        found: found.into(),
    };
    if t.is_empty() {
        return Err(err(0, "end of input"));
    }
    if let Some((p, q)) = t.split_once('/') {
        let num = parse_decimal(p.trim()).ok_or_else(|| err(0, p))?;
        let den = parse_decimal(q.trim()).ok_or_else(|| err(p.len() + 1, q))?;
        if den.is_zero() {
            return Err(ParseError {
                position: p.len() + 1,
                expected: "nonzero denominator".into(),
                found: q.trim().into(),
            });
        }
        return Ok(num / den);
    }
    parse_decimal(t).ok_or_else(|| err(0, t))
}

fn parse_decimal(t: &str) -> Option<Scalar> {
    let (neg, body) = match t.as_bytes().first()? {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let n = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    let v = Scalar::new(n, num_traits::pow(BigInt::from(10), frac.len()));
    Some(if neg { -v } else { v })
}

pub fn sign(q: &Scalar) -> Sign {
    q.numer().sign()
}
