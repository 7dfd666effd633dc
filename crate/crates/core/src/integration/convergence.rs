use num_traits::{Signed, Zero};

use super::Integrand;
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const ORACLE_INTERVAL_CAP: usize = 1_000_000;
pub const LABEL: &str = "finite-scale emulation";

/// `∫ₐᵇ f` by adaptive Simpson. Fails rather than returning a value once
/// more than [`ORACLE_INTERVAL_CAP`] subintervals are needed.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    let simpson = |fa: f64, fm: f64, fb: f64, h: f64| h / 6.0 * (fa + 4.0 * fm + fb);
    let (fa, fm, fb) = (f(a)?, f((a + b) / 2.0)?, f(b)?);
    let mut stack = vec![(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol)];
    let mut total = 0.0;
    let mut intervals = 0usize;
    while let Some((a, b, fa, fm, fb, whole, tol)) = stack.pop() {
        intervals += 1;
        if intervals > ORACLE_INTERVAL_CAP {
            return Err(Error::domain("quadrature oracle exceeded its interval cap"));
        }
        let m = (a + b) / 2.0;
        let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
        let (flm, frm) = (f(lm)?, f(rm)?);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if !delta.is_finite() {
            return Err(Error::domain("quadrature oracle met a non-finite value"));
        }
        if delta.abs() <= 15.0 * tol || m - a <= f64::EPSILON * a.abs().max(1.0) {
            total += left + right + delta / 15.0;
        } else {
            stack.push((m, b, fm, frm, fb, right, tol / 2.0));
            stack.push((a, m, fa, flm, fm, left, tol / 2.0));
        }
    }
    Ok(total)
}

/// Reference value for a study.
#[derive(Clone, Debug, PartialEq)]
pub enum Oracle {
    Closed(Scalar),
    /// Adaptive Simpson of a one-variable integrand on `[a, b]`.
    Quadrature { integrand: Integrand, a: Scalar, b: Scalar },
}

impl Oracle {
    pub fn value(&self) -> Result<Scalar> {
        match self {
            Oracle::Closed(v) => Ok(v.clone()),
            Oracle::Quadrature { integrand, a, b } => {
                let f = |x: f64| integrand.eval_f64(&[x]);
                let v = adaptive_simpson(&f, scalar::to_f64(a), scalar::to_f64(b), ORACLE_TOLERANCE)?;
                scalar::from_f64(v).ok_or_else(|| Error::domain("quadrature oracle is not finite"))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Oracle::Closed(_) => "closed-form",
            Oracle::Quadrature { .. } => "adaptive-simpson",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub mesh: Scalar,
    pub value: Scalar,
    /// `|value − oracle|`.
    pub error: Scalar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub operation: String,
    pub params: Vec<(String, String)>,
    pub rows: Vec<ConvergenceRow>,
    /// Polynomial extrapolation to mesh 0 through the last three rows.
    pub estimate: Scalar,
    pub oracle: Scalar,
    pub oracle_kind: String,
    /// Error of the finest row.
    pub error: Scalar,
    pub notes: Vec<String>,
    pub label: String,
}

impl ConvergenceReport {
    pub fn error_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    pub fn error_nonincreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error <= w[0].error)
    }

    /// `error / |oracle|`, or the absolute error for a zero oracle.
    pub fn relative_error(&self) -> Scalar {
        if self.oracle.is_zero() {
            self.error.clone()
        } else {
            &self.error / self.oracle.abs()
        }
    }
}

/// Neville's scheme through `(h, value)` points, evaluated at `h = 0`.
pub fn extrapolate(points: &[(Scalar, Scalar)]) -> Scalar {
    let mut p: Vec<Scalar> = points.iter().map(|(_, v)| v.clone()).collect();
    let h: Vec<&Scalar> = points.iter().map(|(h, _)| h).collect();
    for k in 1..p.len() {
        for i in (k..p.len()).rev() {
            p[i] = (h[i - k] * &p[i] - h[i] * &p[i - 1]) / (h[i - k] - h[i]);
        }
    }
    p.pop().expect("at least one row")
}

/// Runs `target` at each mesh and compares with `oracle`.
pub fn converge_study(
    operation: &str,
    params: Vec<(String, String)>,
    meshes: &[Scalar],
    target: &dyn Fn(&Scalar) -> Result<Scalar>,
    oracle: &Oracle,
) -> Result<ConvergenceReport> {
    if meshes.is_empty() {
        return Err(Error::invalid("at least one mesh is needed"));
    }
    if meshes.iter().any(|h| !h.is_positive()) || meshes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("meshes must be positive and strictly decreasing"));
    }
    let reference = oracle.value()?;
    let rows = meshes
        .iter()
        .map(|h| {
            let value = target(h)?;
            Ok(ConvergenceRow {
                mesh: h.clone(),
                error: (&value - &reference).abs(),
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail: Vec<(Scalar, Scalar)> = rows
        .iter()
        .skip(rows.len().saturating_sub(3))
        .map(|r| (r.mesh.clone(), r.value.clone()))
        .collect();
    let estimate = extrapolate(&tail);
    let mut report = ConvergenceReport {
        operation: operation.to_string(),
        params,
        error: rows.last().expect("rows").error.clone(),
        rows,
        estimate,
        oracle: reference,
        oracle_kind: oracle.name().to_string(),
        notes: Vec::new(),
        label: LABEL.to_string(),
    };
    let bad: Vec<String> = report
        .rows
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].error >= w[0].error)
        .map(|(i, _)| (i + 2).to_string())
        .collect();
    report.notes.push(if report.error_strictly_decreasing() {
        "error strictly decreasing".to_string()
    } else {
        format!("error not strictly decreasing at row(s) {}", bad.join(", "))
    });
    Ok(report)
}
