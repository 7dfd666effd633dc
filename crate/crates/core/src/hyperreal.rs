//! The truncated non-Archimedean field.
//!
//! A [`HyperReal`] is a finite series `Σ a_q ε^q` with rational exponents in
//! strictly increasing order and nonzero rational coefficients. Only terms
//! with exponent below `λ + W` are kept, where `λ` is the leading exponent
//! and `W` the window. A value whose computation dropped terms records the
//! absolute exponent (its horizon) from which on its coefficients are no
//! longer known, so cancellation can never expose a dropped term as an exact
//! zero. Equality and ordering look at the stored terms only.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, ParseError, Result};
use crate::scalar::{self, Scalar};

/// Order of an infinitesimal term: the `q` in `ε^q`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(pub Scalar);

impl Exponent {
    pub fn int(n: i64) -> Self {
        Exponent(scalar::int(n))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Exponent(scalar::ratio(p, q))
    }

    pub fn zero() -> Self {
        Exponent(Scalar::zero())
    }

    pub fn value(&self) -> &Scalar {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// The exponent as an integer, if it is one.
    pub fn as_integer(&self) -> Option<i64> {
        if self.0.denom().is_one() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }
}

impl Add<&Exponent> for &Exponent {
    type Output = Exponent;
    fn add(self, rhs: &Exponent) -> Exponent {
        Exponent(&self.0 + &rhs.0)
    }
}

impl Sub<&Exponent> for &Exponent {
    type Output = Exponent;
    fn sub(self, rhs: &Exponent) -> Exponent {
        Exponent(&self.0 - &rhs.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&scalar::render(&self.0))
    }
}

/// Window and analytic precision shared by a computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldConfig {
    pub window: Exponent,
    /// Decimal digits `d`; transcendental constants are within `10^-d`.
    pub precision: u32,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            window: Exponent::int(16),
            precision: 40,
        }
    }
}

impl FieldConfig {
    pub fn new(window: Exponent, precision: u32) -> Result<Self> {
        if !window.is_positive() {
            return Err(Error::invalid("window must be positive"));
        }
        if precision == 0 {
            return Err(Error::invalid("precision must be at least 1"));
        }
        Ok(FieldConfig { window, precision })
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = precision.max(1);
        self
    }

    pub fn epsilon(&self, q: Exponent) -> HyperReal {
        epsilon(q, &self.window)
    }

    pub fn constant(&self, c: Scalar) -> HyperReal {
        HyperReal::from_scalar(c, self.window.clone())
    }

    pub fn zero(&self) -> HyperReal {
        HyperReal::zero(self.window.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Zero,
    InfinitesimalNonzero,
    Appreciable,
    InfinitePositive,
    InfiniteNegative,
}

impl Classification {
    pub fn is_infinitesimal(self) -> bool {
        matches!(self, Classification::Zero | Classification::InfinitesimalNonzero)
    }

    pub fn is_limited(self) -> bool {
        !self.is_infinite()
    }

    pub fn is_infinite(self) -> bool {
        matches!(
            self,
            Classification::InfinitePositive | Classification::InfiniteNegative
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Zero => "zero",
            Classification::InfinitesimalNonzero => "infinitesimal-nonzero",
            Classification::Appreciable => "appreciable",
            Classification::InfinitePositive => "infinite-positive",
            Classification::InfiniteNegative => "infinite-negative",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A real number or one of the two infinities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtendedReal {
    Finite(Scalar),
    PosInfinity,
    NegInfinity,
}

impl ExtendedReal {
    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            ExtendedReal::Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedReal::Finite(q) => scalar::to_f64(q),
            ExtendedReal::PosInfinity => f64::INFINITY,
            ExtendedReal::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(q) => f.write_str(&scalar::render(q)),
            ExtendedReal::PosInfinity => f.write_str("+inf"),
            ExtendedReal::NegInfinity => f.write_str("-inf"),
        }
    }
}

/// Result of [`compare`]: `<`, `=` or `>`.
pub type Ordering3 = Ordering;

#[derive(Clone, Debug)]
pub struct HyperReal {
    terms: Vec<(Exponent, Scalar)>,
    window: Exponent,
    horizon: Option<Exponent>,
}

impl PartialEq for HyperReal {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for HyperReal {}

impl PartialOrd for HyperReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HyperReal {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

/// The monomial `1·ε^q`.
pub fn epsilon(q: Exponent, window: &Exponent) -> HyperReal {
    HyperReal {
        terms: vec![(q, Scalar::one())],
        window: window.clone(),
        horizon: None,
    }
}

impl HyperReal {
    pub fn zero(window: Exponent) -> Self {
        HyperReal {
            terms: Vec::new(),
            window,
            horizon: None,
        }
    }

    pub fn one(window: Exponent) -> Self {
        Self::from_scalar(Scalar::one(), window)
    }

    pub fn from_scalar(c: Scalar, window: Exponent) -> Self {
        let terms = if c.is_zero() {
            Vec::new()
        } else {
            vec![(Exponent::zero(), c)]
        };
        HyperReal {
            terms,
            window,
            horizon: None,
        }
    }

    /// Builds a value from arbitrary `(exponent, coefficient)` pairs: merges
    /// duplicates, drops zeros, sorts and truncates to the window.
    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, Scalar)>, window: Exponent) -> Self {
        let mut map: BTreeMap<Exponent, Scalar> = BTreeMap::new();
        for (e, c) in terms {
            *map.entry(e).or_insert_with(Scalar::zero) += c;
        }
        Self::from_map(map, window, None, None)
    }

    /// Truncates relative to the leading exponent, or to `limit` when given,
    /// and never keeps terms at or beyond the horizon.
    fn from_map(
        map: BTreeMap<Exponent, Scalar>,
        window: Exponent,
        limit: Option<Exponent>,
        horizon: Option<Exponent>,
    ) -> Self {
        let terms: Vec<(Exponent, Scalar)> =
            map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Self::truncated(terms, window, limit, horizon)
    }

    fn truncated(
        mut terms: Vec<(Exponent, Scalar)>,
        window: Exponent,
        limit: Option<Exponent>,
        mut horizon: Option<Exponent>,
    ) -> Self {
        if let Some((lead, _)) = terms.first() {
            let cut = min_bound(min_bound(Some(lead + &window), limit), horizon.clone())
                .expect("bounded");
            let keep = terms.iter().take_while(|(e, _)| *e < cut).count();
            if keep < terms.len() {
                horizon = min_bound(horizon, Some(cut));
                terms.truncate(keep);
            }
        }
        HyperReal {
            terms,
            window,
            horizon,
        }
    }

    /// Leading exponent, or the horizon of an inexact zero.
    fn floor(&self) -> Option<Exponent> {
        self.leading_exponent().cloned().or_else(|| self.horizon.clone())
    }

    pub fn terms(&self) -> &[(Exponent, Scalar)] {
        &self.terms
    }

    pub fn window(&self) -> &Exponent {
        &self.window
    }

    /// True when some computation leading to this value discarded terms.
    pub fn is_saturated(&self) -> bool {
        self.horizon.is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// λ: the least stored exponent; `None` for zero.
    pub fn leading_exponent(&self) -> Option<&Exponent> {
        self.terms.first().map(|(e, _)| e)
    }

    pub fn leading_coefficient(&self) -> Option<&Scalar> {
        self.terms.first().map(|(_, c)| c)
    }

    pub fn coefficient(&self, e: &Exponent) -> Scalar {
        self.terms
            .iter()
            .find(|(x, _)| x == e)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Scalar::zero)
    }

    /// Exponent bound below which stored coefficients are exact; `None`
    /// when no term was ever dropped.
    pub fn known_below(&self) -> Option<Exponent> {
        self.horizon.clone()
    }

    fn shared_window(&self, other: &HyperReal) -> Exponent {
        self.window.clone().min(other.window.clone())
    }

    pub fn with_window(&self, window: Exponent) -> HyperReal {
        let map: BTreeMap<_, _> = self.terms.iter().cloned().collect();
        Self::from_map(map, window, None, self.horizon.clone())
    }

    pub fn signum(&self) -> i32 {
        match self.leading_coefficient() {
            None => 0,
            Some(c) if c.is_positive() => 1,
            Some(_) => -1,
        }
    }

    pub fn abs(&self) -> HyperReal {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn scale(&self, c: &Scalar) -> HyperReal {
        if c.is_zero() {
            return HyperReal::zero(self.window.clone());
        }
        HyperReal {
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
            window: self.window.clone(),
            horizon: self.horizon.clone(),
        }
    }

    /// Multiplies by `ε^q`.
    pub fn shift(&self, q: &Exponent) -> HyperReal {
        HyperReal {
            terms: self.terms.iter().map(|(e, a)| (e + q, a.clone())).collect(),
            window: self.window.clone(),
            horizon: self.horizon.as_ref().map(|h| h + q),
        }
    }

    pub fn inv(&self) -> Result<HyperReal> {
        let (lead, a) = match self.terms.first() {
            None => return Err(Error::DivisionByZero),
            Some(t) => t.clone(),
        };
        let a_inv = a.recip();
        let u = self.unit_tail(&lead, &a);
        let series = unit_power(&u, &-Scalar::one(), &self.window)?;
        let neg_lead = Exponent(-lead.0);
        Ok(series.scale(&a_inv).shift(&neg_lead))
    }

    /// `x / (a ε^λ) - 1`, an infinitesimal.
    fn unit_tail(&self, lead: &Exponent, a: &Scalar) -> HyperReal {
        let a_inv = a.recip();
        let terms: Vec<_> = self
            .terms
            .iter()
            .skip(1)
            .map(|(e, c)| (e - lead, c * &a_inv))
            .collect();
        HyperReal {
            terms,
            window: self.window.clone(),
            horizon: self.horizon.as_ref().map(|h| h - lead),
        }
    }

    pub fn powi(&self, n: i64) -> Result<HyperReal> {
        if n < 0 {
            return self.powi(-n)?.inv();
        }
        let mut acc = HyperReal::one(self.window.clone());
        let mut base = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Principal n-th root. The leading coefficient's root is exact when
    /// rational and otherwise within `10^-d`; the tail is the binomial series.
    pub fn nth_root(&self, n: u32, precision: u32) -> Result<HyperReal> {
        if n == 0 {
            return Err(Error::domain("zeroth root"));
        }
        let (lead, a) = match self.terms.first() {
            None => return Ok(self.clone()),
            Some(t) => t.clone(),
        };
        if !a.is_positive() {
            return Err(Error::NonPositiveLeading);
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let root_a = analytic::nth_root(&a, n as u64, precision)?;
        let u = self.unit_tail(&lead, &a);
        let r = scalar::ratio(1, n as i64);
        let series = unit_power(&u, &r, &self.window)?;
        let exp = Exponent(lead.0 / Scalar::from_integer(BigInt::from(n)));
        Ok(series.scale(&root_a).shift(&exp))
    }

    pub fn classify(&self) -> Classification {
        match self.terms.first() {
            None => Classification::Zero,
            Some((e, c)) => {
                if e.is_positive() {
                    Classification::InfinitesimalNonzero
                } else if e.is_zero() {
                    Classification::Appreciable
                } else if c.is_positive() {
                    Classification::InfinitePositive
                } else {
                    Classification::InfiniteNegative
                }
            }
        }
    }

    pub fn is_infinitesimal(&self) -> bool {
        self.classify().is_infinitesimal()
    }

    pub fn is_limited(&self) -> bool {
        self.classify().is_limited()
    }

    /// Standard part: the ε⁰ coefficient of a limited value, ±∞ otherwise.
    pub fn st(&self) -> ExtendedReal {
        match self.classify() {
            Classification::InfinitePositive => ExtendedReal::PosInfinity,
            Classification::InfiniteNegative => ExtendedReal::NegInfinity,
            _ => ExtendedReal::Finite(self.coefficient(&Exponent::zero())),
        }
    }

    /// Standard part of a value known to be limited.
    pub fn st_finite(&self) -> Result<Scalar> {
        match self.st() {
            ExtendedReal::Finite(q) => Ok(q),
            _ => Err(Error::domain("standard part of an infinite value")),
        }
    }

    /// `self - st(self)` for limited values.
    pub fn infinitesimal_part(&self) -> HyperReal {
        HyperReal {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.is_positive())
                .cloned()
                .collect(),
            window: self.window.clone(),
            horizon: self.horizon.clone(),
        }
    }

    pub fn infinitely_close(&self, other: &HyperReal) -> bool {
        (self - other).is_infinitesimal()
    }

    /// Membership in the monad of the standard number `r`.
    pub fn in_monad(&self, r: &Scalar) -> bool {
        let rr = HyperReal::from_scalar(r.clone(), self.window.clone());
        self.infinitely_close(&rr)
    }

    /// Membership in the order ideal `o(e)`: `x = 0` or `x / e` infinitesimal.
    pub fn in_order_ideal(&self, e: &HyperReal) -> Result<bool> {
        if e.classify() != Classification::InfinitesimalNonzero {
            return Err(Error::NotInfinitesimal);
        }
        let le = e.leading_exponent().expect("nonzero");
        Ok(match self.leading_exponent() {
            None => true,
            Some(lx) => lx > le,
        })
    }
}

/// `a ≈ b (mod o(e^n))`.
pub fn close_of_order(a: &HyperReal, b: &HyperReal, e: &HyperReal, n: u32) -> Result<bool> {
    let en = e.powi(n as i64)?;
    (a - b).in_order_ideal(&en)
}

/// Generalized binomial coefficient `C(r, k)`.
pub fn binomial(r: &Scalar, k: usize) -> Scalar {
    let mut c = Scalar::one();
    for i in 0..k {
        let num = r - scalar::int(i as i64);
        c = c * num / scalar::int(i as i64 + 1);
    }
    c
}

/// `Σ_k c_k u^k` for an infinitesimal `u`, summing while `k·λ(u)` stays
/// inside the window (one extra term, so a result that starts at `λ(u)`
/// is still complete). `coeff` returning `None` marks a zero coefficient.
pub(crate) fn power_series(
    u: &HyperReal,
    window: &Exponent,
    coeff: impl Fn(usize) -> Option<Scalar>,
) -> Result<HyperReal> {
    let mut sum = match coeff(0) {
        Some(c) => HyperReal::from_scalar(c, window.clone()),
        None => HyperReal::zero(window.clone()),
    };
    let lam = match u.leading_exponent() {
        None => return Ok(sum),
        Some(l) => l.clone(),
    };
    if !lam.is_positive() {
        return Err(Error::domain("power series in a non-infinitesimal"));
    }
    let k_max = (&window.0 / &lam.0).ceil().to_integer().to_usize().unwrap_or(usize::MAX) + 1;
    let mut power = HyperReal::one(window.clone());
    // powers are kept on an absolute scale so that the sum's window,
    // anchored at exponent 0 or λ(u), is filled exactly
    let cap = Exponent(&lam.0 + &window.0);
    for k in 1..=k_max {
        power = truncate_at(&(&power * u), &cap);
        if power.is_zero() {
            break;
        }
        if let Some(c) = coeff(k) {
            sum = &sum + &power.scale(&c);
        }
    }
    // the remainder starts at or beyond the cap
    sum.horizon = min_bound(sum.horizon, Some(cap));
    Ok(sum)
}

/// `(1 + u)^r` for an infinitesimal `u`, with the same truncation as
/// [`power_series`]. Coefficients come from `θy·(1 + u) = r·θu·y` with
/// `θ = ε d/dε`, which gives `e·y_e = Σ_j (r·j − (e − j))·u_j·y_{e−j}`
/// over the exponents reachable as sums of those of `u`.
pub(crate) fn unit_power(u: &HyperReal, r: &Scalar, window: &Exponent) -> Result<HyperReal> {
    let lam = match u.leading_exponent() {
        None => {
            return Ok(HyperReal::from_map(
                BTreeMap::from([(Exponent::zero(), Scalar::one())]),
                window.clone(),
                None,
                u.horizon.clone(),
            ))
        }
        Some(l) => l.clone(),
    };
    if !lam.is_positive() {
        return Err(Error::domain("power series in a non-infinitesimal"));
    }
    let cap = Exponent(&lam.0 + &window.0);
    let limit = min_bound(Some(cap.clone()), u.horizon.clone()).expect("bounded");
    let mut exps = std::collections::BTreeSet::from([Exponent::zero()]);
    let mut frontier = vec![Exponent::zero()];
    while let Some(s) = frontier.pop() {
        for (j, _) in &u.terms {
            let e = &s + j;
            if e >= limit {
                break;
            }
            if exps.insert(e.clone()) {
                frontier.push(e);
            }
        }
    }
    let mut y: BTreeMap<Exponent, Scalar> = BTreeMap::new();
    y.insert(Exponent::zero(), Scalar::one());
    for e in exps.iter().skip(1) {
        let mut acc = Scalar::zero();
        for (j, uj) in &u.terms {
            if j > e {
                break;
            }
            let rest = e - j;
            if let Some(yr) = y.get(&rest) {
                acc += (r * &j.0 - &rest.0) * uj * yr;
            }
        }
        y.insert(e.clone(), acc / &e.0);
    }
    Ok(HyperReal::from_map(y, window.clone(), None, min_bound(u.horizon.clone(), Some(cap))))
}

fn truncate_at(x: &HyperReal, cap: &Exponent) -> HyperReal {
    let keep = x.terms.iter().take_while(|(e, _)| e < cap).count();
    HyperReal {
        terms: x.terms[..keep].to_vec(),
        window: x.window.clone(),
        horizon: if keep < x.terms.len() {
            min_bound(x.horizon.clone(), Some(cap.clone()))
        } else {
            x.horizon.clone()
        },
    }
}

/// Total order: `x < y` iff the leading coefficient of `y - x` is positive.
pub fn compare(x: &HyperReal, y: &HyperReal) -> Ordering {
    match (y - x).signum() {
        0 => Ordering::Equal,
        s if s > 0 => Ordering::Less,
        _ => Ordering::Greater,
    }
}

fn merge(x: &HyperReal, y: &HyperReal, negate_y: bool) -> HyperReal {
    let window = x.shared_window(y);
    let mut out: Vec<(Exponent, Scalar)> = Vec::with_capacity(x.terms.len() + y.terms.len());
    let (mut i, mut j) = (0, 0);
    let yc = |c: &Scalar| if negate_y { -c } else { c.clone() };
    while i < x.terms.len() || j < y.terms.len() {
        let ord = match (x.terms.get(i), y.terms.get(j)) {
            (Some((ex, _)), Some((ey, _))) => ex.cmp(ey),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                out.push(x.terms[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push((y.terms[j].0.clone(), yc(&y.terms[j].1)));
                j += 1;
            }
            Ordering::Equal => {
                let c = &x.terms[i].1 + yc(&y.terms[j].1);
                if !c.is_zero() {
                    out.push((x.terms[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    HyperReal::truncated(out, window, None, min_bound(x.horizon.clone(), y.horizon.clone()))
}

fn min_bound(a: Option<Exponent>, b: Option<Exponent>) -> Option<Exponent> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

fn multiply(x: &HyperReal, y: &HyperReal) -> HyperReal {
    let window = x.shared_window(y);
    // (X + O(ε^hx))(Y + O(ε^hy)) is known below min(hx + λy, hy + λx)
    let err = |h: &Option<Exponent>, other: &HyperReal| match (h, other.floor()) {
        (Some(h), Some(f)) => Some(h + &f),
        _ => None,
    };
    let horizon = min_bound(err(&x.horizon, y), err(&y.horizon, x));
    let (lx, ly) = match (x.leading_exponent(), y.leading_exponent()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            let mut z = HyperReal::zero(window);
            z.horizon = horizon;
            return z;
        }
    };
    let cut = &(lx + ly) + &window;
    let mut map: BTreeMap<Exponent, Scalar> = BTreeMap::new();
    let mut dropped = false;
    for (ex, cx) in &x.terms {
        for (ey, cy) in &y.terms {
            let e = ex + ey;
            if e >= cut {
                dropped = true;
                break;
            }
            *map.entry(e).or_insert_with(Scalar::zero) += cx * cy;
        }
    }
    let mut r = HyperReal::from_map(map, window, Some(cut.clone()), horizon);
    if dropped {
        r.horizon = min_bound(r.horizon, Some(cut));
    }
    r
}

impl Add for &HyperReal {
    type Output = HyperReal;
    fn add(self, rhs: &HyperReal) -> HyperReal {
        merge(self, rhs, false)
    }
}

impl Sub for &HyperReal {
    type Output = HyperReal;
    fn sub(self, rhs: &HyperReal) -> HyperReal {
        merge(self, rhs, true)
    }
}

impl Mul for &HyperReal {
    type Output = HyperReal;
    fn mul(self, rhs: &HyperReal) -> HyperReal {
        multiply(self, rhs)
    }
}

impl Neg for &HyperReal {
    type Output = HyperReal;
    fn neg(self) -> HyperReal {
        HyperReal {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            window: self.window.clone(),
            horizon: self.horizon.clone(),
        }
    }
}

impl Neg for HyperReal {
    type Output = HyperReal;
    fn neg(self) -> HyperReal {
        -&self
    }
}

/// Division; fails on a zero divisor, so it is not an operator impl.
impl HyperReal {
    pub fn div(&self, rhs: &HyperReal) -> Result<HyperReal> {
        Ok(self * &rhs.inv()?)
    }
}

impl Div<&Scalar> for &HyperReal {
    type Output = HyperReal;
    fn div(self, rhs: &Scalar) -> HyperReal {
        self.scale(&rhs.recip())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for HyperReal {
            type Output = HyperReal;
            fn $m(self, rhs: HyperReal) -> HyperReal { (&self).$m(&rhs) }
        }
        impl $tr<&HyperReal> for HyperReal {
            type Output = HyperReal;
            fn $m(self, rhs: &HyperReal) -> HyperReal { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

/// Analytic maps available at limited arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Analytic {
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    /// `x^r` for a rational `r`, via `st(x)^r` and the binomial series.
    PowReal(Scalar),
}

impl Analytic {
    pub fn name(&self) -> String {
        match self {
            Analytic::Exp => "exp".into(),
            Analytic::Ln => "ln".into(),
            Analytic::Sin => "sin".into(),
            Analytic::Cos => "cos".into(),
            Analytic::Tan => "tan".into(),
            Analytic::PowReal(r) => format!("pow_real({})", scalar::render(r)),
        }
    }
}

/// Applies an analytic function: `x = s + h` with `s = st(x)`, and the
/// result is the Taylor expansion at `s` in powers of `h` with each
/// derivative value approximated to `10^-d`.
pub fn apply_analytic(f: &Analytic, x: &HyperReal, cfg: &FieldConfig) -> Result<HyperReal> {
    if !x.is_limited() {
        return Err(Error::TranscendentalOnUnlimited);
    }
    let d = cfg.precision;
    let w = x.window().clone();
    let s = x.coefficient(&Exponent::zero());
    let h = x.infinitesimal_part();
    let konst = |c: Scalar| HyperReal::from_scalar(c, w.clone());
    let fact = |k: usize| -> Scalar { Scalar::from_integer((1..=k as u64).map(BigInt::from).product()) };
    let sin_h = || power_series(&h, &w, |k| (k % 2 == 1).then(|| sign_alt(k / 2) / fact(k)));
    let cos_h = || power_series(&h, &w, |k| (k % 2 == 0).then(|| sign_alt(k / 2) / fact(k)));
    match f {
        Analytic::Exp => {
            let es = analytic::exp(&s, d)?;
            Ok(power_series(&h, &w, |k| Some(Scalar::one() / fact(k)))?.scale(&es))
        }
        Analytic::Ln => {
            if !s.is_positive() {
                return Err(Error::domain("ln at a point with non-positive standard part"));
            }
            let ls = analytic::ln(&s, d)?;
            let u = &h / &s;
            // ln(1+u) = Σ (-1)^{k+1} u^k / k
            let tail = power_series(&u, &w, |k| {
                (k > 0).then(|| sign_alt(k + 1) / scalar::int(k as i64))
            })?;
            Ok(&konst(ls) + &tail)
        }
        Analytic::Sin => {
            let (ss, cs) = (analytic::sin(&s, d)?, analytic::cos(&s, d)?);
            Ok(&cos_h()?.scale(&ss) + &sin_h()?.scale(&cs))
        }
        Analytic::Cos => {
            let (ss, cs) = (analytic::sin(&s, d)?, analytic::cos(&s, d)?);
            Ok(&cos_h()?.scale(&cs) - &sin_h()?.scale(&ss))
        }
        Analytic::Tan => {
            let c = apply_analytic(&Analytic::Cos, x, cfg)?;
            let cs = c.coefficient(&Exponent::zero());
            if cs.abs() < analytic::tolerance(d) {
                return Err(Error::domain("tan where cos of the standard part vanishes"));
            }
            // st(tan) from the dedicated routine keeps it within 10^-d
            let sn = apply_analytic(&Analytic::Sin, x, cfg)?;
            let q = sn.div(&c)?;
            let ts = analytic::tan(&s, d)?;
            let adj = &ts - &q.coefficient(&Exponent::zero());
            Ok(&q + &konst(adj))
        }
        Analytic::PowReal(r) => {
            if r.denom().is_one() {
                if let Some(n) = r.numer().to_i64() {
                    return x.powi(n);
                }
            }
            if !s.is_positive() {
                return Err(Error::domain("real power at a point with non-positive standard part"));
            }
            let sr = analytic::powr(&s, r, d)?;
            let u = &h / &s;
            Ok(unit_power(&u, r, &w)?.scale(&sr))
        }
    }
}

fn sign_alt(k: usize) -> Scalar {
    if k % 2 == 0 {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

impl fmt::Display for HyperReal {
    /// Canonical form: `3 + 1*eps^1 + -1/4*eps^2`; exponent-0 terms bare.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                if e.is_zero() {
                    scalar::render(c)
                } else {
                    format!("{}*eps^{}", scalar::render(c), e)
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl HyperReal {
    /// Parses the canonical rendering, with the given window.
    pub fn parse_with_window(s: &str, window: Exponent) -> Result<HyperReal, ParseError> {
        let t = s.trim();
        if t == "0" {
            return Ok(HyperReal::zero(window));
        }
        let mut terms = Vec::new();
        let mut offset = s.len() - s.trim_start().len();
        for part in t.split(" + ") {
            let (coef, exp) = match part.split_once("*eps^") {
                Some((c, e)) => (c, Some(e)),
                None => (part, None),
            };
            let c = scalar::parse_rational(coef).map_err(|mut e| {
                e.position += offset;
                e
            })?;
            let e = match exp {
                Some(e) => scalar::parse_rational(e).map_err(|mut err| {
                    err.position += offset + coef.len() + 5;
                    err
                })?,
                None => Scalar::zero(),
            };
            if c.is_zero() {
                return Err(ParseError {
                    position: offset,
                    expected: "nonzero coefficient".into(),
                    found: part.into(),
                });
            }
            terms.push((Exponent(e), c));
            offset += part.len() + 3;
        }
        for pair in terms.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(ParseError {
                    position: 0,
                    expected: "strictly increasing exponents".into(),
                    found: s.into(),
                });
            }
        }
        Ok(HyperReal::from_terms(terms, window))
    }
}

impl FromStr for HyperReal {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        HyperReal::parse_with_window(s, FieldConfig::default().window)
    }
}
