use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use super::{Integrand, Rect, TaggedPartition};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::{self, Scalar};

pub const MAX_DEPTH: u32 = 64;

/// A positive radius function `δ(x)` on an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Gauge {
    radius: Integrand,
}

impl Gauge {
    pub fn new(radius: Expr) -> Result<Self> {
        let vars = radius.free_vars();
        if vars.len() > 1 {
            return Err(Error::invalid("a gauge depends on one variable"));
        }
        let var = vars.into_iter().next().unwrap_or_else(|| "x".to_string());
        Ok(Gauge {
            radius: Integrand { expr: radius, vars: vec![var] },
        })
    }

    pub fn expr(&self) -> &Expr {
        &self.radius.expr
    }

    /// `δ(x)`, refusing non-positive values.
    pub fn radius(&self, x: &Scalar, precision: u32) -> Result<Scalar> {
        let r = self.radius.eval(std::slice::from_ref(x), precision)?;
        if !r.is_positive() {
            return Err(Error::domain(format!("gauge is not positive at x = {}", scalar::render(x))));
        }
        Ok(r)
    }

    /// `(u, v) ⊆ (x − δ(x), x + δ(x))`.
    fn covers(&self, x: &Scalar, u: &Scalar, v: &Scalar, precision: u32) -> Result<bool> {
        let r = self.radius(x, precision)?;
        Ok(x - &r <= *u && *v <= x + r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeMode {
    /// Tags lie in their cells.
    TagInCell,
    /// Tags may lie anywhere in the interval.
    McShane,
}

impl GaugeMode {
    pub fn name(self) -> &'static str {
        match self {
            GaugeMode::TagInCell => "tag-in-cell",
            GaugeMode::McShane => "mcshane",
        }
    }
}

fn two() -> Scalar {
    scalar::int(2)
}

/// The accepted anchor closest to the midpoint of `[u, v]`.
fn nearest_anchor(anchors: &BTreeSet<Scalar>, u: &Scalar, v: &Scalar) -> Option<Scalar> {
    let mid = (u + v) / two();
    let below = anchors.range(..=mid.clone()).next_back();
    let above = anchors.range(mid.clone()..).next();
    match (below, above) {
        (Some(b), Some(a)) => Some(if &mid - b <= a - &mid { b.clone() } else { a.clone() }),
        (b, a) => b.or(a).cloned(),
    }
}

/// δ-fine tagged partition of `[a, b]` by bisection. Each interval is
/// accepted as soon as some candidate tag's gauge ball contains it: the left
/// endpoint, then the midpoint; in McShane mode the nearest tag already in
/// use is tried first.
pub fn cousin_partition(gauge: &Gauge, a: &Scalar, b: &Scalar, mode: GaugeMode, precision: u32) -> Result<TaggedPartition> {
    Rect::interval(a.clone(), b.clone())?;
    let mut cells = Vec::new();
    let mut tags = Vec::new();
    let mut anchors = BTreeSet::new();
    let mut stack = vec![(a.clone(), b.clone(), 0u32)];
    while let Some((u, v, depth)) = stack.pop() {
        let mut tag = None;
        if mode == GaugeMode::McShane {
            if let Some(x) = nearest_anchor(&anchors, &u, &v) {
                if gauge.covers(&x, &u, &v, precision)? {
                    tag = Some(x);
                }
            }
        }
        if tag.is_none() {
            let mid = (&u + &v) / two();
            for x in [u.clone(), mid] {
                if gauge.covers(&x, &u, &v, precision)? {
                    tag = Some(x);
                    break;
                }
            }
        }
        match tag {
            Some(x) => {
                anchors.insert(x.clone());
                tags.push(vec![x]);
                cells.push(Rect::interval(u, v)?);
            }
            None if depth >= MAX_DEPTH => {
                return Err(Error::DepthExceeded {
                    depth,
                    left: scalar::render_decimal(&u).unwrap_or_else(|| scalar::render(&u)),
                    right: scalar::render_decimal(&v).unwrap_or_else(|| scalar::render(&v)),
                });
            }
            None => {
                let mid = (&u + &v) / two();
                stack.push((mid.clone(), v, depth + 1));
                stack.push((u, mid, depth + 1));
            }
        }
    }
    let out = TaggedPartition {
        cells,
        tags,
        rule: format!("cousin-{}", mode.name()),
        tags_outside_allowed: mode == GaugeMode::McShane,
    };
    check_fine(&out, gauge, a, b, precision)?;
    Ok(out)
}

/// Post-condition: the cells tile `[a, b]` in order and each lies inside its
/// tag's gauge ball; outside McShane mode each tag lies in its cell.
fn check_fine(p: &TaggedPartition, gauge: &Gauge, a: &Scalar, b: &Scalar, precision: u32) -> Result<()> {
    let mut at = a.clone();
    for (cell, tag) in p.cells.iter().zip(&p.tags) {
        let (u, v) = (&cell.lo()[0], &cell.hi()[0]);
        let x = &tag[0];
        let ok = *u == at
            && gauge.covers(x, u, v, precision)?
            && (p.tags_outside_allowed || cell.contains(tag))
            && (a <= x && x <= b);
        if !ok {
            return Err(Error::invalid(format!(
                "gauge partition check failed on [{}, {}]",
                scalar::render(u),
                scalar::render(v)
            )));
        }
        at = v.clone();
    }
    if at != *b {
        return Err(Error::invalid("gauge partition does not reach the right endpoint"));
    }
    Ok(())
}

/// Riemann sum of `f` over the Cousin partition of `[a, b]`.
pub fn gauge_sum(f: &Expr, a: &Scalar, b: &Scalar, gauge: &Gauge, mode: GaugeMode, precision: u32) -> Result<Scalar> {
    let f = Integrand::new(f.clone(), 1)?;
    let p = cousin_partition(gauge, a, b, mode, precision)?;
    let sum = p.riemann_sum(&f, precision)?;
    debug_assert!(!p.cells.is_empty() || sum.is_zero());
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::scalar::{int, ratio};

    fn g(s: &str) -> Gauge {
        Gauge::new(parse(s).unwrap()).unwrap()
    }

    #[test]
    fn cousin_examples() {
        let p = cousin_partition(&g("1"), &int(0), &int(1), GaugeMode::TagInCell, 40).unwrap();
        assert_eq!(p.cells.len(), 1);
        let p = cousin_partition(&g("x/2+1/100"), &int(0), &int(1), GaugeMode::TagInCell, 40).unwrap();
        assert!(p.cells.len() > 1);
        let err = cousin_partition(&g("10^(-30)"), &int(0), &int(1), GaugeMode::TagInCell, 40).unwrap_err();
        assert!(matches!(err, Error::DepthExceeded { depth: 64, .. }));
        let err = cousin_partition(&g("x"), &int(0), &int(1), GaugeMode::TagInCell, 40).unwrap_err();
        assert!(matches!(err.kind(), Error::Domain(_)));
    }

    #[test]
    fn mcshane_reuses_tags() {
        let p = cousin_partition(&g("1/(2+100*(x-1/4)^2)"), &int(0), &int(1), GaugeMode::McShane, 40).unwrap();
        assert!(p.tags_outside_allowed);
        let distinct: BTreeSet<_> = p.tags.iter().map(|t| t[0].clone()).collect();
        assert!(distinct.len() < p.cells.len());
        assert!(p.cells.iter().zip(&p.tags).any(|(c, t)| !c.contains(t)));
    }

    #[test]
    fn gauge_sums() {
        let s = gauge_sum(&parse("x").unwrap(), &int(0), &int(1), &g("1/100"), GaugeMode::TagInCell, 40).unwrap();
        assert!((s - ratio(1, 2)).abs() <= ratio(1, 100));
        for mode in [GaugeMode::TagInCell, GaugeMode::McShane] {
            let s = gauge_sum(&parse("1").unwrap(), &int(-2), &ratio(7, 3), &g("x^2+1/10"), mode, 40).unwrap();
            assert_eq!(s, ratio(13, 3));
        }
        let s = gauge_sum(&parse("x^2").unwrap(), &int(0), &int(1), &g("1/1000"), GaugeMode::McShane, 40).unwrap();
        assert!((s - ratio(1, 3)).abs() < ratio(1, 100));
    }
}
