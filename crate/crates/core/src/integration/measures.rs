use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::{axis_names, riemann_sum, Grid, Integrand, PartitionSpec, Rect, TagRule};
use crate::analytic;
use crate::calculus::{taylor_jet_in, CurveDef};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::hyperreal::{Exponent, FieldConfig};
use crate::scalar::{self, Scalar};

/// The shared variable of several one-variable expressions.
fn common_variable(es: &[&Expr], default: &str) -> Result<String> {
    let mut vars = std::collections::BTreeSet::new();
    for e in es {
        vars.extend(e.free_vars());
    }
    match vars.len() {
        0 => Ok(default.to_string()),
        1 => Ok(vars.into_iter().next().expect("one variable")),
        _ => Err(Error::invalid(format!(
            "expected one variable, found {}",
            vars.into_iter().collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn one_var(e: &Expr, var: &str) -> Integrand {
    Integrand {
        expr: e.clone(),
        vars: vec![var.to_string()],
    }
}

/// Per-cell data of a 1-D partition: `(t_{j-1}, t_j, tag)`.
fn cells_1d(a: &Scalar, b: &Scalar, spec: &PartitionSpec, rule: TagRule) -> Result<Vec<(Scalar, Scalar, Scalar)>> {
    let grid = Grid::new(&Rect::interval(a.clone(), b.clone())?, spec)?;
    let pts = &grid.axes[0];
    Ok((0..pts.len() - 1)
        .map(|i| {
            let tag = rule.tag(&pts[i..=i], &pts[i + 1..=i + 1], i as u64).remove(0);
            (pts[i].clone(), pts[i + 1].clone(), tag)
        })
        .collect())
}

/// First derivatives need only a window of 2.
fn jet_config(precision: u32) -> FieldConfig {
    FieldConfig {
        window: Exponent::int(2),
        precision,
    }
}

fn slope(f: &Expr, var: &str, t: &Scalar, precision: u32) -> Result<Scalar> {
    Ok(taylor_jet_in(f, var, t, 1, &jet_config(precision))?.coefficients[1].clone())
}

fn par_sum(terms: Vec<Result<Scalar>>) -> Result<Scalar> {
    terms.into_iter().sum()
}

/// Riemann sum of `g − f`, refusing when `f > g` at a breakpoint or tag.
pub fn measure_area_between(
    f: &Expr,
    g: &Expr,
    a: &Scalar,
    b: &Scalar,
    spec: &PartitionSpec,
    rule: TagRule,
    precision: u32,
) -> Result<Scalar> {
    let var = common_variable(&[f, g], "x")?;
    let (fi, gi) = (one_var(f, &var), one_var(g, &var));
    let cells = cells_1d(a, b, spec, rule)?;
    let check = |t: &Scalar| -> Result<Scalar> {
        let p = std::slice::from_ref(t);
        let gap = gi.eval(p, precision)? - fi.eval(p, precision)?;
        if gap.is_negative() {
            return Err(Error::OrderViolation(scalar::render_decimal(t).unwrap_or_else(|| scalar::render(t))));
        }
        Ok(gap)
    };
    check(a)?;
    let terms = cells
        .par_iter()
        .map(|(lo, hi, tag)| {
            check(hi)?;
            Ok(check(tag)? * (hi - lo))
        })
        .collect();
    par_sum(terms)
}

fn check_radius(r: &Scalar, t: &Scalar) -> Result<()> {
    if r.is_negative() {
        return Err(Error::NegativeRadius(scalar::render_decimal(t).unwrap_or_else(|| scalar::render(t))));
    }
    Ok(())
}

/// `Σ π̃ f(t)² Δt`.
pub fn measure_volume_revolution(f: &Expr, a: &Scalar, b: &Scalar, spec: &PartitionSpec, rule: TagRule, precision: u32) -> Result<Scalar> {
    let var = common_variable(&[f], "x")?;
    let fi = one_var(f, &var);
    let terms = cells_1d(a, b, spec, rule)?
        .par_iter()
        .map(|(lo, hi, tag)| {
            let r = fi.eval(std::slice::from_ref(tag), precision)?;
            check_radius(&r, tag)?;
            Ok(&r * &r * (hi - lo))
        })
        .collect();
    Ok(par_sum(terms)? * analytic::pi(precision))
}

/// `Σ 2π̃ f(t) √(1 + f′(t)²) Δt`, with `f′` from the jet at each tag.
pub fn measure_surface_revolution(f: &Expr, a: &Scalar, b: &Scalar, spec: &PartitionSpec, rule: TagRule, precision: u32) -> Result<Scalar> {
    let var = common_variable(&[f], "x")?;
    let fi = one_var(f, &var);
    let terms = cells_1d(a, b, spec, rule)?
        .par_iter()
        .map(|(lo, hi, tag)| {
            let r = fi.eval(std::slice::from_ref(tag), precision)?;
            check_radius(&r, tag)?;
            let d = slope(f, &var, tag, precision)?;
            let s = analytic::sqrt(&(Scalar::from_integer(1.into()) + &d * &d), precision)?;
            Ok(r * s * (hi - lo))
        })
        .collect();
    Ok(par_sum(terms)? * analytic::pi(precision) * scalar::int(2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveLength {
    /// `Σ ‖c(tᵢ₊₁) − c(tᵢ)‖`.
    pub polygonal: Scalar,
    /// Riemann sum of `‖c′(t)‖`.
    pub integral: Scalar,
}

fn curve_point(c: &CurveDef, t: &Scalar, precision: u32) -> Result<Vec<Scalar>> {
    c.components
        .iter()
        .map(|f| one_var(f, &c.param).eval(std::slice::from_ref(t), precision))
        .collect()
}

/// Both length paths; each chord and speed norm is a square root within
/// `10^-d`, so the sums carry at most `m·10^-d` rounding.
pub fn measure_curve_length(c: &CurveDef, a: &Scalar, b: &Scalar, spec: &PartitionSpec, rule: TagRule, precision: u32) -> Result<CurveLength> {
    let cells = cells_1d(a, b, spec, rule)?;
    let mut knots: Vec<Scalar> = cells.iter().map(|(lo, _, _)| lo.clone()).collect();
    knots.push(b.clone());
    let points = knots
        .par_iter()
        .map(|t| curve_point(c, t, precision))
        .collect::<Result<Vec<_>>>()?;
    let chords = points
        .par_windows(2)
        .map(|w| {
            let sq: Scalar = w[0].iter().zip(&w[1]).map(|(p, q)| (q - p) * (q - p)).sum();
            analytic::sqrt(&sq, precision)
        })
        .collect();
    let polygonal = par_sum(chords)?;
    let speeds = cells
        .par_iter()
        .map(|(lo, hi, tag)| {
            let sq: Scalar = c
                .components
                .iter()
                .map(|f| slope(f, &c.param, tag, precision).map(|d| &d * &d))
                .sum::<Result<Scalar>>()?;
            Ok(analytic::sqrt(&sq, precision)? * (hi - lo))
        })
        .collect();
    Ok(CurveLength {
        polygonal,
        integral: par_sum(speeds)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorleyEdge {
    /// Strip `p` measured at its outer radius `pa/n`.
    Outer,
    /// Strip `p` measured at its inner radius `(p−1)a/n`.
    Inner,
}

/// `Σ_{p=1}^{n} 2π̃ a⁴ r_p³ / n⁴` with `r_p = p` (outer) or `p − 1` (inner):
/// the polar moment of a disc of radius `a` cut into `n` rings.
pub fn morley_strip_sum(a: &Scalar, n: u64, edge: MorleyEdge, precision: u32) -> Result<Scalar> {
    if n == 0 {
        return Err(Error::invalid("at least one strip is needed"));
    }
    let mut cubes = BigInt::zero();
    for p in 1..=n {
        let r = BigInt::from(match edge {
            MorleyEdge::Outer => p,
            MorleyEdge::Inner => p - 1,
        });
        cubes += &r * &r * &r;
    }
    let a4 = a * a * a * a;
    let n4 = Scalar::from_integer(BigInt::from(n).pow(4));
    Ok(scalar::int(2) * analytic::pi(precision) * a4 * Scalar::from_integer(cubes) / n4)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkSums {
    /// `Σ F(c(tⱼ′)) • (c(tⱼ) − c(tⱼ₋₁))`.
    pub chord: Scalar,
    /// Riemann sum of `Σ Fᵢ(c(t)) cᵢ′(t)`.
    pub integrand: Scalar,
}

/// Work of the field `F` (in `x, y, z, …`) along `c` over `[a, b]`.
pub fn line_integral_work(
    field: &[Expr],
    c: &CurveDef,
    a: &Scalar,
    b: &Scalar,
    spec: &PartitionSpec,
    rule: TagRule,
    precision: u32,
) -> Result<WorkSums> {
    let n = c.dimension();
    if field.len() != n {
        return Err(Error::invalid(format!("field has {} components for a curve in dimension {n}", field.len())));
    }
    let names = axis_names(n);
    let fs = field
        .iter()
        .map(|f| Integrand::with_vars(f.clone(), names.clone()))
        .collect::<Result<Vec<_>>>()?;
    let cells = cells_1d(a, b, spec, rule)?;
    let terms = cells
        .par_iter()
        .map(|(lo, hi, tag)| {
            let at = curve_point(c, tag, precision)?;
            let forces = fs.iter().map(|f| f.eval(&at, precision)).collect::<Result<Vec<_>>>()?;
            let (p, q) = (curve_point(c, lo, precision)?, curve_point(c, hi, precision)?);
            let chord: Scalar = forces.iter().zip(p.iter().zip(&q)).map(|(f, (p, q))| f * (q - p)).sum();
            let mut power = Scalar::zero();
            for (f, comp) in forces.iter().zip(&c.components) {
                power += f * slope(comp, &c.param, tag, precision)?;
            }
            Ok((chord, power * (hi - lo)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (chord, integrand) = terms.into_iter().fold((Scalar::zero(), Scalar::zero()), |(x, y), (c, i)| (x + c, y + i));
    Ok(WorkSums { chord, integrand })
}

/// `∫ F(t) dt` as a Riemann sum.
pub fn impulse(force: &Expr, a: &Scalar, b: &Scalar, spec: &PartitionSpec, rule: TagRule, precision: u32) -> Result<Scalar> {
    let var = common_variable(&[force], "t")?;
    riemann_sum(&one_var(force, &var), &Rect::interval(a.clone(), b.clone())?, spec, rule, precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, parse_list};
    use crate::scalar::{int, ratio};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn close(a: &Scalar, b: f64, tol: f64) -> bool {
        (scalar::to_f64(a) - b).abs() < tol
    }

    fn m(k: usize) -> PartitionSpec {
        PartitionSpec::uniform(k, 1)
    }

    #[test]
    fn areas() {
        let s = measure_area_between(&p("0"), &p("x^2"), &int(0), &int(1), &m(512), TagRule::Center, 40).unwrap();
        assert!(close(&s, 1.0 / 3.0, 1e-5));
        let s = measure_area_between(&p("x^2"), &p("x^2"), &int(0), &int(1), &m(7), TagRule::Center, 40).unwrap();
        assert_eq!(s, int(0));
        let pi = analytic::pi(40);
        let s = measure_area_between(&p("0"), &p("sin(x)"), &int(0), &pi, &m(256), TagRule::Center, 40).unwrap();
        assert!(close(&s, 2.0, 1e-4));
        let err = measure_area_between(&p("x"), &p("0"), &int(0), &int(1), &m(4), TagRule::Center, 40);
        assert!(matches!(err, Err(Error::OrderViolation(_))));
    }

    #[test]
    fn solids_of_revolution() {
        let pi = std::f64::consts::PI;
        let v = measure_volume_revolution(&p("2"), &int(0), &int(3), &m(5), TagRule::Center, 40).unwrap();
        assert_eq!(v, analytic::pi(40) * int(12));
        let s = measure_surface_revolution(&p("2"), &int(0), &int(3), &m(5), TagRule::Center, 40).unwrap();
        assert_eq!(s, analytic::pi(40) * int(12));
        let v = measure_volume_revolution(&p("x"), &int(0), &int(1), &m(512), TagRule::Center, 40).unwrap();
        assert!(close(&v, pi / 3.0, 1e-5));
        let s = measure_surface_revolution(&p("x"), &int(0), &int(1), &m(512), TagRule::Center, 40).unwrap();
        assert!(close(&s, 2f64.sqrt() * pi, 1e-9));
        let err = measure_volume_revolution(&p("x"), &int(-1), &int(1), &m(4), TagRule::MinVertex, 40);
        assert!(matches!(err, Err(Error::NegativeRadius(_))));
    }

    #[test]
    fn curve_lengths() {
        let seg = CurveDef::new(parse_list("t, 2*t").unwrap()).unwrap();
        let root5 = analytic::sqrt(&int(5), 40).unwrap();
        for k in [1, 3, 10] {
            let l = measure_curve_length(&seg, &int(0), &int(1), &m(k), TagRule::Center, 40).unwrap();
            assert!((&l.polygonal - &root5).abs() < analytic::tolerance(38));
            assert!((&l.integral - &root5).abs() < analytic::tolerance(38));
        }
        let par = CurveDef::new(parse_list("t, t^2").unwrap()).unwrap();
        let l = measure_curve_length(&par, &int(0), &int(1), &m(256), TagRule::Center, 40).unwrap();
        let exact = (2.0 * 5f64.sqrt() + 2f64.asinh()) / 4.0;
        assert!(close(&l.polygonal, exact, 1e-5));
        assert!(close(&l.integral, exact, 1e-5));
    }

    #[test]
    fn morley_closed_forms() {
        let pi = analytic::pi(40);
        let n = 10;
        let outer = morley_strip_sum(&int(1), n, MorleyEdge::Outer, 40).unwrap();
        assert_eq!(outer, &pi / int(2) * ratio(121, 100));
        let inner = morley_strip_sum(&int(1), n, MorleyEdge::Inner, 40).unwrap();
        assert_eq!(inner, &pi / int(2) * ratio(81, 100));
        let a = ratio(3, 2);
        let o = morley_strip_sum(&a, 7, MorleyEdge::Outer, 40).unwrap();
        let want = &pi * &a * &a * &a * &a / int(2) * (int(1) + ratio(2, 7) + ratio(1, 49));
        assert_eq!(o, want);
    }

    #[test]
    fn work() {
        let c = CurveDef::new(parse_list("t, t^2").unwrap()).unwrap();
        let w = line_integral_work(&parse_list("y, x").unwrap(), &c, &int(0), &int(1), &m(256), TagRule::Center, 40).unwrap();
        assert!(close(&w.chord, 1.0, 1e-4) && close(&w.integrand, 1.0, 1e-4));
        let w = line_integral_work(&parse_list("0, 0").unwrap(), &c, &int(0), &int(1), &m(4), TagRule::Center, 40).unwrap();
        assert_eq!((w.chord, w.integrand), (int(0), int(0)));
        let flat = CurveDef::new(parse_list("t, 0").unwrap()).unwrap();
        let w = line_integral_work(&parse_list("1, 0").unwrap(), &flat, &int(0), &int(1), &m(3), TagRule::MinVertex, 40).unwrap();
        assert_eq!((w.chord, w.integrand), (int(1), int(1)));
    }

    #[test]
    fn impulses() {
        let i = impulse(&p("3"), &int(1), &int(4), &m(5), TagRule::MinVertex, 40).unwrap();
        assert_eq!(i, int(9));
        let i = impulse(&p("t"), &int(0), &int(2), &m(8), TagRule::Center, 40).unwrap();
        assert_eq!(i, int(2));
        let i = impulse(&p("sin(t)"), &int(0), &analytic::pi(40), &m(256), TagRule::Center, 40).unwrap();
        assert!(close(&i, 2.0, 1e-4));
    }
}
