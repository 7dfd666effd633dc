//! Rational approximations of transcendental values.
//!
//! Every function here takes a decimal precision `d` and returns an exact
//! rational within `10^-d` of the true value, rounded to nearest on a binary
//! grid fine enough for that bound. Internally the work is done in binary
//! fixed point on big integers with guard bits.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

const LOG2_10: f64 = 3.321_928_094_887_362_4;
const GUARD: u64 = 24;

/// Bits of the output grid for `d` decimal digits: `2^-B <= 10^-(d+1) / 2`.
pub fn output_bits(d: u32) -> u64 {
    ((d as f64 + 1.0) * LOG2_10).ceil() as u64 + 1
}

fn fixed(q: &Scalar, g: u64) -> BigInt {
    let shifted: BigInt = q.numer() << g as usize;
    num_integer::Integer::div_floor(&shifted, q.denom())
}

fn round_shift(v: &BigInt, shift: u64) -> BigInt {
    if shift == 0 {
        return v.clone();
    }
    let half = BigInt::one() << (shift - 1) as usize;
    (v + half) >> shift as usize
}

/// Rounds a fixed-point value at scale `g` onto the `2^-b` grid.
fn to_scalar(v: &BigInt, g: u64, b: u64) -> Scalar {
    let r = round_shift(v, g - b);
    Scalar::new(r, BigInt::one() << b as usize)
}

fn bit_len(k: i64) -> u64 {
    64 - k.unsigned_abs().leading_zeros() as u64
}

static LN2_CACHE: Lazy<Mutex<HashMap<u64, BigInt>>> = Lazy::new(|| Mutex::new(HashMap::new()));
static PI_CACHE: Lazy<Mutex<HashMap<u64, BigInt>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn cached(cache: &Lazy<Mutex<HashMap<u64, BigInt>>>, g: u64, compute: fn(u64) -> BigInt) -> BigInt {
    let slot = g.div_ceil(64) * 64;
    let mut map = cache.lock().unwrap_or_else(|p| p.into_inner());
    let v = map.entry(slot).or_insert_with(|| compute(slot + 16));
    // stored at scale slot + 16
    v.clone() >> (slot + 16 - g) as usize
}

/// atanh(1/k) at scale g.
fn atanh_inv(k: u64, g: u64) -> BigInt {
    let gg = g + 16;
    let k2 = BigInt::from(k * k);
    let mut p = (BigInt::one() << gg as usize) / BigInt::from(k);
    let mut sum = BigInt::zero();
    let mut i = 0u64;
    while !p.is_zero() {
        sum += &p / BigInt::from(2 * i + 1);
        p /= &k2;
        i += 1;
    }
    sum >> 16usize
}

/// atan(1/k) at scale g.
fn atan_inv(k: u64, g: u64) -> BigInt {
    let gg = g + 16;
    let k2 = BigInt::from(k * k);
    let mut p = (BigInt::one() << gg as usize) / BigInt::from(k);
    let mut sum = BigInt::zero();
    let mut i = 0u64;
    while !p.is_zero() {
        let t = &p / BigInt::from(2 * i + 1);
        if i % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        p /= &k2;
        i += 1;
    }
    sum >> 16usize
}

fn ln2_fixed(g: u64) -> BigInt {
    cached(&LN2_CACHE, g, |g| atanh_inv(3, g) << 1usize)
}

fn pi_fixed(g: u64) -> BigInt {
    cached(&PI_CACHE, g, |g| {
        let a = atan_inv(5, g + 8) * 16;
        let b = atan_inv(239, g + 8) * 4;
        (a - b) >> 8usize
    })
}

/// Rational approximation of π.
pub fn pi(d: u32) -> Scalar {
    let b = output_bits(d);
    to_scalar(&pi_fixed(b + GUARD), b + GUARD, b)
}

/// Rational approximation of Euler's number.
pub fn e(d: u32) -> Scalar {
    exp(&Scalar::one(), d).expect("exp(1) is representable")
}

/// Taylor sum of exp at a small fixed-point argument.
fn exp_small(r: &BigInt, g: u64) -> BigInt {
    let one = BigInt::one() << g as usize;
    let mut sum = one.clone();
    let mut term = one;
    let mut n = 1u64;
    loop {
        term = (&term * r) >> g as usize;
        term /= BigInt::from(n);
        if term.is_zero() {
            break;
        }
        sum += &term;
        n += 1;
    }
    sum
}

pub fn exp(x: &Scalar, d: u32) -> Result<Scalar> {
    if x.is_zero() {
        return Ok(Scalar::one());
    }
    let b = output_bits(d);
    let xf = scalar::to_f64(x);
    if xf > 1.0e5 {
        return Err(Error::Overflow(format!("exp({xf:e})")));
    }
    if xf < -((b + 2) as f64) * std::f64::consts::LN_2 {
        // below half a grid step
        return Ok(Scalar::zero());
    }
    let k = (xf / std::f64::consts::LN_2).round() as i64;
    let g = b + GUARD + k.max(0) as u64 + bit_len(k);
    let r = fixed(x, g) - ln2_fixed(g) * BigInt::from(k);
    let s = exp_small(&r, g);
    let v = if k >= 0 {
        s << k as usize
    } else {
        s >> (-k) as usize
    };
    Ok(to_scalar(&v, g, b))
}

/// Natural logarithm of a positive rational.
pub fn ln(x: &Scalar, d: u32) -> Result<Scalar> {
    if !x.is_positive() {
        return Err(Error::domain(format!("ln of non-positive {}", scalar::render(x))));
    }
    if x.is_one() {
        return Ok(Scalar::zero());
    }
    let b = output_bits(d);
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut m = x * scalar::pow2(-k);
    let two = scalar::int(2);
    if m < Scalar::one() {
        k -= 1;
        m *= &two;
    } else if m >= two {
        k += 1;
        m /= &two;
    }
    let z = (&m - Scalar::one()) / (&m + Scalar::one());
    let g = b + GUARD + bit_len(k);
    let zf = fixed(&z, g);
    let z2 = (&zf * &zf) >> g as usize;
    let mut term = zf;
    let mut sum = BigInt::zero();
    let mut i = 0u64;
    while !term.is_zero() {
        sum += &term / BigInt::from(2 * i + 1);
        term = (&term * &z2) >> g as usize;
        i += 1;
    }
    let v = (sum << 1usize) + ln2_fixed(g) * BigInt::from(k);
    Ok(to_scalar(&v, g, b))
}

/// (sin x, cos x) at scale `g` where `g` already includes reduction guard.
fn sin_cos_fixed(x: &Scalar, b: u64) -> Result<(BigInt, BigInt, u64)> {
    let xf = scalar::to_f64(x);
    if !xf.is_finite() || xf.abs() > 1.0e15 {
        return Err(Error::Overflow(format!("trigonometric argument {xf:e}")));
    }
    let j = (xf / std::f64::consts::FRAC_PI_2).round() as i64;
    let g = b + GUARD + bit_len(j) + 2;
    let half_pi = pi_fixed(g) >> 1usize;
    let r = fixed(x, g) - half_pi * BigInt::from(j);
    let r2 = (&r * &r) >> g as usize;
    let one = BigInt::one() << g as usize;

    let mut s = r.clone();
    let mut term = r;
    let mut n = 1u64;
    loop {
        term = -((&term * &r2) >> g as usize) / BigInt::from((2 * n) * (2 * n + 1));
        if term.is_zero() {
            break;
        }
        s += &term;
        n += 1;
    }
    let mut c = one.clone();
    let mut term = one;
    let mut n = 1u64;
    loop {
        term = -((&term * &r2) >> g as usize) / BigInt::from((2 * n - 1) * (2 * n));
        if term.is_zero() {
            break;
        }
        c += &term;
        n += 1;
    }
    let (sin, cos) = match j.rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    };
    Ok((sin, cos, g))
}

pub fn sin(x: &Scalar, d: u32) -> Result<Scalar> {
    if x.is_zero() {
        return Ok(Scalar::zero());
    }
    let b = output_bits(d);
    let (s, _, g) = sin_cos_fixed(x, b)?;
    Ok(to_scalar(&s, g, b))
}

pub fn cos(x: &Scalar, d: u32) -> Result<Scalar> {
    if x.is_zero() {
        return Ok(Scalar::one());
    }
    let b = output_bits(d);
    let (_, c, g) = sin_cos_fixed(x, b)?;
    Ok(to_scalar(&c, g, b))
}

/// Tangent; rejects arguments whose cosine is below `10^-d` in magnitude.
pub fn tan(x: &Scalar, d: u32) -> Result<Scalar> {
    if x.is_zero() {
        return Ok(Scalar::zero());
    }
    let c = cos(x, d + 10)?;
    let floor = Scalar::new(BigInt::one(), num_traits::pow(BigInt::from(10), d as usize));
    if c.abs() < floor {
        return Err(Error::domain("tan at a pole of cos"));
    }
    let c_digits = (-scalar::to_f64(&c.abs()).log10()).ceil().max(0.0) as u32;
    let b = output_bits(d + 2 * c_digits + 4);
    let (s, c, g) = sin_cos_fixed(x, b)?;
    let q = fixed_div(&s, &c, g);
    let out = output_bits(d);
    Ok(to_scalar(&q, g, out))
}

fn fixed_div(a: &BigInt, b: &BigInt, g: u64) -> BigInt {
    num_integer::Integer::div_floor(&(a << g as usize), b)
}

fn exact_root(x: &BigInt, n: u32) -> Option<BigInt> {
    let r = x.nth_root(n);
    if num_traits::pow(r.clone(), n as usize) == *x {
        Some(r)
    } else {
        None
    }
}

/// Exact n-th root of a non-negative rational, when it is rational.
pub fn exact_nth_root(x: &Scalar, n: u32) -> Option<Scalar> {
    if x.is_negative() {
        return None;
    }
    let p = exact_root(x.numer(), n)?;
    let q = exact_root(x.denom(), n)?;
    Some(Scalar::new(p, q))
}

pub fn sqrt(x: &Scalar, d: u32) -> Result<Scalar> {
    nth_root(x, 2, d)
}

/// Principal n-th root of a non-negative rational; exact when the root is
/// rational.
pub fn nth_root(x: &Scalar, n: u64, d: u32) -> Result<Scalar> {
    if n == 0 {
        return Err(Error::domain("zeroth root"));
    }
    if x.is_negative() {
        return Err(Error::domain(format!("root of negative {}", scalar::render(x))));
    }
    if n == 1 || x.is_zero() {
        return Ok(x.clone());
    }
    if x.is_one() {
        return Ok(x.clone());
    }
    if n <= 64 {
        let n = n as u32;
        if let Some(r) = exact_nth_root(x, n) {
            return Ok(r);
        }
        let b = output_bits(d);
        let g = b + GUARD;
        let scaled = num_integer::Integer::div_floor(
            &(x.numer() << (g * n as u64) as usize),
            x.denom(),
        );
        let r = scaled.nth_root(n);
        return Ok(to_scalar(&r, g, b));
    }
    let l = ln(x, d + 10)? / Scalar::from_integer(BigInt::from(n));
    exp(&l, d)
}

/// Integer power; exact unless the result would exceed `POWI_EXACT_BITS`,
/// in which case it is approximated to `10^-d` (or reported as overflow).
pub fn powi_approx(x: &Scalar, n: i64, d: u32) -> Result<Scalar> {
    let size = x.numer().bits().max(x.denom().bits());
    if size.saturating_mul(n.unsigned_abs()) <= POWI_EXACT_BITS {
        return powi(x, n);
    }
    if x.is_zero() {
        return powi(x, n);
    }
    let mag = exp(&(ln(&x.abs(), d + 10)? * scalar::int(n)), d)?;
    Ok(if x.is_negative() && n % 2 != 0 { -mag } else { mag })
}

const POWI_EXACT_BITS: u64 = 1 << 16;

/// Integer power with exact rational arithmetic.
pub fn powi(x: &Scalar, n: i64) -> Result<Scalar> {
    if n < 0 && x.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let p = num_traits::pow(x.clone(), n.unsigned_abs() as usize);
    Ok(if n < 0 { p.recip() } else { p })
}

/// `x^y` for rational `y`: exact for integers, roots for small denominators,
/// `exp(y ln x)` otherwise.
pub fn powr(x: &Scalar, y: &Scalar, d: u32) -> Result<Scalar> {
    if y.denom().is_one() {
        if let Some(n) = y.numer().to_i64() {
            return powi(x, n);
        }
    }
    if x.is_zero() && y.is_positive() {
        return Ok(Scalar::zero());
    }
    if let (Some(p), Some(q)) = (y.numer().to_i64(), y.denom().to_u32()) {
        if q <= 64 && p.abs() <= 64 {
            if x.is_negative() {
                return Err(Error::domain("fractional power of a negative number"));
            }
            // more digits for the root when the power magnifies it
            let r = nth_root(x, q as u64, d + 4 + p.unsigned_abs().ilog10())?;
            return powi(&r, p).map(|v| round_to(&v, d));
        }
    }
    let l = ln(x, d + 10)?;
    exp(&(l * y), d)
}

/// Rounds onto the output grid of precision `d`.
pub fn round_to(x: &Scalar, d: u32) -> Scalar {
    let b = output_bits(d);
    if x.denom().bits() <= b {
        return x.clone();
    }
    let v = fixed(x, b + 1);
    to_scalar(&v, b + 1, b)
}

/// `10^-d` as a rational.
pub fn tolerance(d: u32) -> Scalar {
    Scalar::new(BigInt::one(), num_traits::pow(BigInt::from(10), d as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_rational;

    const D: u32 = 40;

    fn close(a: &Scalar, expected: &str, digits: u32) -> bool {
        let e = parse_rational(expected).unwrap();
        (a - e).abs() < tolerance(digits)
    }

    // fifty-digit reference values
    const PI: &str = "3.14159265358979323846264338327950288419716939937510";
    const E: &str = "2.71828182845904523536028747135266249775724709369995";
    const LN2: &str = "0.69314718055994530941723212145817656807550013436025";
    const LN10: &str = "2.30258509299404568401799145468436420760110148862877";
    const SIN1: &str = "0.84147098480789650665250232163029899962256306079837";
    const COS1: &str = "0.54030230586813971740093660744297660373231042061792";
    const TAN1: &str = "1.55740772465490223050697480745836017308725077238152";
    const SQRT2: &str = "1.41421356237309504880168872420969807856967187537694";
    const EXPM1: &str = "0.36787944117144232159552377016146086744581113103176";

    #[test]
    fn constants_to_forty_digits() {
        assert!(close(&pi(D), PI, D));
        assert!(close(&e(D), E, D));
        assert!(close(&ln(&scalar::int(2), D).unwrap(), LN2, D));
        assert!(close(&ln(&scalar::int(10), D).unwrap(), LN10, D));
        assert!(close(&sin(&Scalar::one(), D).unwrap(), SIN1, D));
        assert!(close(&cos(&Scalar::one(), D).unwrap(), COS1, D));
        assert!(close(&tan(&Scalar::one(), D).unwrap(), TAN1, D));
        assert!(close(&sqrt(&scalar::int(2), D).unwrap(), SQRT2, D));
        assert!(close(&exp(&scalar::int(-1), D).unwrap(), EXPM1, D));
    }

    #[test]
    fn exact_special_values() {
        assert_eq!(sin(&Scalar::zero(), D).unwrap(), Scalar::zero());
        assert_eq!(cos(&Scalar::zero(), D).unwrap(), Scalar::one());
        assert_eq!(exp(&Scalar::zero(), D).unwrap(), Scalar::one());
        assert_eq!(ln(&Scalar::one(), D).unwrap(), Scalar::zero());
        assert_eq!(nth_root(&scalar::int(8), 3, D).unwrap(), scalar::int(2));
        assert_eq!(sqrt(&scalar::ratio(9, 4), D).unwrap(), scalar::ratio(3, 2));
        assert_eq!(powr(&scalar::int(4), &scalar::ratio(3, 2), D).unwrap(), scalar::int(8));
    }

    #[test]
    fn agrees_with_f64_over_a_range() {
        for i in -40..=40 {
            let x = scalar::ratio(i * 7, 10);
            let xf = scalar::to_f64(&x);
            let s = scalar::to_f64(&sin(&x, 30).unwrap());
            let c = scalar::to_f64(&cos(&x, 30).unwrap());
            let ex = scalar::to_f64(&exp(&x, 30).unwrap());
            assert!((s - xf.sin()).abs() < 1e-14, "sin {xf}");
            assert!((c - xf.cos()).abs() < 1e-14, "cos {xf}");
            assert!(((ex - xf.exp()) / xf.exp()).abs() < 1e-14, "exp {xf}");
            if i > 0 {
                let l = scalar::to_f64(&ln(&x, 30).unwrap());
                assert!((l - xf.ln()).abs() < 1e-14, "ln {xf}");
            }
        }
    }

    #[test]
    fn inverse_pairs_round_trip() {
        let x = scalar::ratio(37, 11);
        let back = exp(&ln(&x, 50).unwrap(), 50).unwrap();
        assert!((back - &x).abs() < tolerance(45));
        let r = nth_root(&scalar::int(5), 7, 50).unwrap();
        assert!((powi(&r, 7).unwrap() - scalar::int(5)).abs() < tolerance(45));
    }

    #[test]
    fn large_arguments() {
        assert_eq!(exp(&scalar::int(-100_000), D).unwrap(), Scalar::zero());
        assert!(matches!(exp(&scalar::int(1_000_000), D), Err(Error::Overflow(_))));
        let big = exp(&scalar::int(200), 10).unwrap();
        assert!((scalar::to_f64(&big) / 200f64.exp() - 1.0).abs() < 1e-14);
        let s = sin(&scalar::int(1000), D).unwrap();
        assert!((scalar::to_f64(&s) - 1000f64.sin()).abs() < 1e-12);
        let root = nth_root(&scalar::int(1 << 40), 1 << 20, 30).unwrap();
        assert_eq!(powi_approx(&scalar::ratio(1, 2), 1 << 40, 30).unwrap(), Scalar::zero());
        assert!((scalar::to_f64(&root) - 2f64.powf(40.0 / (1u64 << 20) as f64)).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(ln(&Scalar::zero(), D).is_err());
        assert!(sqrt(&scalar::int(-1), D).is_err());
        assert!(powi(&Scalar::zero(), -1).is_err());
    }
}
