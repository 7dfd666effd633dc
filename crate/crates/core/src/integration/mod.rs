//! Finite-scale integration lab: partition sums over rectangles, Jordan
//! regions and gauge partitions, compared against independent oracles.
//! Every sum is an exact rational; only transcendental integrands carry the
//! `10^-d` rounding of their evaluation.

mod convergence;
mod gauge;
mod measures;
mod probe;
mod region;

pub use convergence::{adaptive_simpson, converge_study, extrapolate, ConvergenceReport, ConvergenceRow, Oracle, LABEL};
pub use gauge::{cousin_partition, gauge_sum, Gauge, GaugeMode};
pub use measures::{
    impulse, line_integral_work, measure_area_between, measure_curve_length,
    measure_surface_revolution, measure_volume_revolution, morley_strip_sum, CurveLength,
    MorleyEdge, WorkSums,
};
pub use probe::{supernearness_probe, Functional, ProbeRow};
pub use region::{inner_sum, measure_mass_moment_com, moment_of_inertia, InnerSum, MassReport, Region};

use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{eval_with, Expr, F64Arith, RealArith};
use crate::scalar::{self, Scalar};

/// Closed box `Π [loᵢ, hiᵢ]` with rational corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect {
    lo: Vec<Scalar>,
    hi: Vec<Scalar>,
}

impl Rect {
    pub fn new(lo: Vec<Scalar>, hi: Vec<Scalar>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid("rectangle corners must have the same positive dimension"));
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] >= hi[i]) {
            return Err(Error::invalid(format!(
                "empty interval on axis {}: [{}, {}]",
                i + 1,
                scalar::render(&lo[i]),
                scalar::render(&hi[i])
            )));
        }
        Ok(Rect { lo, hi })
    }

    pub fn interval(a: Scalar, b: Scalar) -> Result<Self> {
        Rect::new(vec![a], vec![b])
    }

    /// `[lo, hi]ⁿ`.
    pub fn cube(lo: Scalar, hi: Scalar, n: usize) -> Result<Self> {
        Rect::new(vec![lo; n], vec![hi; n])
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[Scalar] {
        &self.lo
    }

    pub fn hi(&self) -> &[Scalar] {
        &self.hi
    }

    pub fn volume(&self) -> Scalar {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn center(&self) -> Vec<Scalar> {
        let two = scalar::int(2);
        self.lo.iter().zip(&self.hi).map(|(a, b)| (a + b) / &two).collect()
    }

    pub fn contains(&self, p: &[Scalar]) -> bool {
        p.len() == self.dimension()
            && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| a <= x && x <= b)
    }

    /// All `2ⁿ` corners.
    pub fn vertices(&self) -> Vec<Vec<Scalar>> {
        let n = self.dimension();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.hi[i].clone() } else { self.lo[i].clone() })
                    .collect()
            })
            .collect()
    }
}

/// How each axis is cut.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionSpec {
    /// `mᵢ` equal cells on axis `i`.
    Simple(Vec<usize>),
    /// Sorted breakpoints per axis, endpoints included.
    Explicit(Vec<Vec<Scalar>>),
}

impl PartitionSpec {
    /// `m` equal cells on every one of `n` axes.
    pub fn uniform(m: usize, n: usize) -> Self {
        PartitionSpec::Simple(vec![m; n])
    }

    /// Equal cells no wider than `width` on each axis of `rect`.
    pub fn with_mesh(rect: &Rect, width: &Scalar) -> Result<Self> {
        if !width.is_positive() {
            return Err(Error::invalid("mesh width must be positive"));
        }
        let counts = rect
            .lo
            .iter()
            .zip(&rect.hi)
            .map(|(a, b)| {
                ((b - a) / width)
                    .ceil()
                    .to_integer()
                    .to_usize()
                    .filter(|m| *m <= 1 << 24)
                    .ok_or_else(|| Error::invalid("mesh too fine"))
            })
            .collect::<Result<_>>()?;
        Ok(PartitionSpec::Simple(counts))
    }

    /// Per-axis breakpoints, validated against `rect`.
    pub fn breakpoints(&self, rect: &Rect) -> Result<Vec<Vec<Scalar>>> {
        let n = rect.dimension();
        match self {
            PartitionSpec::Simple(ms) => {
                if ms.len() != n {
                    return Err(Error::invalid(format!("{} cell counts for dimension {n}", ms.len())));
                }
                ms.iter()
                    .enumerate()
                    .map(|(i, &m)| {
                        if m == 0 {
                            return Err(Error::invalid("cell count must be at least 1"));
                        }
                        let h = (&rect.hi[i] - &rect.lo[i]) / scalar::int(m as i64);
                        Ok((0..=m).map(|k| &rect.lo[i] + &h * scalar::int(k as i64)).collect())
                    })
                    .collect()
            }
            PartitionSpec::Explicit(axes) => {
                if axes.len() != n {
                    return Err(Error::invalid(format!("{} breakpoint lists for dimension {n}", axes.len())));
                }
                for (i, pts) in axes.iter().enumerate() {
                    let ok = pts.len() >= 2
                        && pts[0] == rect.lo[i]
                        && pts[pts.len() - 1] == rect.hi[i]
                        && pts.windows(2).all(|w| w[0] < w[1]);
                    if !ok {
                        return Err(Error::invalid(format!(
                            "breakpoints on axis {} must increase strictly from the lower to the upper endpoint",
                            i + 1
                        )));
                    }
                }
                Ok(axes.clone())
            }
        }
    }

    /// Mesh: the widest cell edge.
    pub fn mesh(&self, rect: &Rect) -> Result<Scalar> {
        let bps = self.breakpoints(rect)?;
        Ok(bps
            .iter()
            .flat_map(|pts| pts.windows(2).map(|w| &w[1] - &w[0]))
            .max()
            .expect("nonempty"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TagRule {
    CornerNearestOrigin,
    Center,
    MinVertex,
    SeededRandom(u64),
}

impl TagRule {
    pub fn name(self) -> &'static str {
        match self {
            TagRule::CornerNearestOrigin => "corner-nearest-origin",
            TagRule::Center => "center",
            TagRule::MinVertex => "min-vertex",
            TagRule::SeededRandom(_) => "seeded-random",
        }
    }

    /// Parses a rule name; `seed` is used by `seeded-random`.
    pub fn parse(name: &str, seed: u64) -> Result<Self> {
        Ok(match name {
            "corner-nearest-origin" | "corner" => TagRule::CornerNearestOrigin,
            "center" | "centre" | "midpoint" => TagRule::Center,
            "min-vertex" | "left" => TagRule::MinVertex,
            "seeded-random" | "random" => TagRule::SeededRandom(seed),
            other => return Err(Error::invalid(format!("unknown tag rule '{other}'"))),
        })
    }

    /// The tag of a cell; `index` keys the random stream.
    pub fn tag(self, lo: &[Scalar], hi: &[Scalar], index: u64) -> Vec<Scalar> {
        match self {
            TagRule::MinVertex => lo.to_vec(),
            TagRule::Center => {
                let two = scalar::int(2);
                lo.iter().zip(hi).map(|(a, b)| (a + b) / &two).collect()
            }
            TagRule::CornerNearestOrigin => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| if b.abs() < a.abs() { b.clone() } else { a.clone() })
                .collect(),
            TagRule::SeededRandom(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index);
                let den = scalar::pow2(32);
                lo.iter()
                    .zip(hi)
                    .map(|(a, b)| {
                        let k: u64 = rng.gen_range(0..=1u64 << 32);
                        a + (b - a) * scalar::int(k as i64) / &den
                    })
                    .collect()
            }
        }
    }
}

/// Explicit cells with one tag each. In McShane mode a tag may lie outside
/// its cell.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedPartition {
    pub cells: Vec<Rect>,
    pub tags: Vec<Vec<Scalar>>,
    pub rule: String,
    pub tags_outside_allowed: bool,
}

impl TaggedPartition {
    pub fn build(rect: &Rect, spec: &PartitionSpec, rule: TagRule) -> Result<Self> {
        let grid = Grid::new(rect, spec)?;
        let (cells, tags) = (0..grid.len())
            .map(|i| {
                let (lo, hi) = grid.cell(i);
                let tag = rule.tag(&lo, &hi, i as u64);
                (Rect { lo, hi }, tag)
            })
            .unzip();
        Ok(TaggedPartition {
            cells,
            tags,
            rule: rule.name().into(),
            tags_outside_allowed: false,
        })
    }

    pub fn riemann_sum(&self, f: &Integrand, precision: u32) -> Result<Scalar> {
        self.cells
            .iter()
            .zip(&self.tags)
            .map(|(c, t)| Ok(f.eval(t, precision)? * c.volume()))
            .sum()
    }
}

/// Product grid of breakpoints; cells are indexed row-major with the last
/// axis fastest.
#[derive(Clone, Debug)]
pub(crate) struct Grid {
    pub(crate) axes: Vec<Vec<Scalar>>,
}

impl Grid {
    pub(crate) fn new(rect: &Rect, spec: &PartitionSpec) -> Result<Self> {
        Ok(Grid {
            axes: spec.breakpoints(rect)?,
        })
    }

    pub(crate) fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len() - 1).collect()
    }

    pub(crate) fn len(&self) -> usize {
        self.counts().iter().product()
    }

    pub(crate) fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let counts = self.counts();
        let mut idx = vec![0; counts.len()];
        for (k, m) in counts.iter().enumerate().rev() {
            idx[k] = i % m;
            i /= m;
        }
        idx
    }

    pub(crate) fn cell(&self, i: usize) -> (Vec<Scalar>, Vec<Scalar>) {
        let idx = self.multi_index(i);
        let lo = idx.iter().zip(&self.axes).map(|(&k, a)| a[k].clone()).collect();
        let hi = idx.iter().zip(&self.axes).map(|(&k, a)| a[k + 1].clone()).collect();
        (lo, hi)
    }

    pub(crate) fn cell_volume(&self, i: usize) -> Scalar {
        let idx = self.multi_index(i);
        idx.iter().zip(&self.axes).map(|(&k, a)| &a[k + 1] - &a[k]).product()
    }
}

/// An expression with a fixed assignment of variables to coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrand {
    pub expr: Expr,
    pub vars: Vec<String>,
}

/// Coordinate names: `x`, `y`, `z`, then `x4`, `x5`, ….
pub fn axis_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match i {
            0 => "x".to_string(),
            1 => "y".to_string(),
            2 => "z".to_string(),
            _ => format!("x{}", i + 1),
        })
        .collect()
}

impl Integrand {
    pub fn with_vars(expr: Expr, vars: Vec<String>) -> Result<Self> {
        if let Some(v) = expr.free_vars().into_iter().find(|v| !vars.contains(v)) {
            return Err(Error::UnboundVariable(v));
        }
        Ok(Integrand { expr, vars })
    }

    /// Coordinates named `x, y, z, …`; in one dimension any single
    /// variable name is accepted.
    pub fn new(expr: Expr, n: usize) -> Result<Self> {
        let free = expr.free_vars();
        if n == 1 && free.len() == 1 {
            let v = free.into_iter().next().expect("one variable");
            return Ok(Integrand { expr, vars: vec![v] });
        }
        Integrand::with_vars(expr, axis_names(n))
    }

    pub fn eval(&self, p: &[Scalar], precision: u32) -> Result<Scalar> {
        let env = |v: &str| self.vars.iter().position(|n| n == v).map(|i| p[i].clone());
        eval_with(&self.expr, &env, &RealArith { precision })
    }

    pub fn eval_f64(&self, p: &[f64]) -> Result<f64> {
        let env = |v: &str| self.vars.iter().position(|n| n == v).map(|i| p[i]);
        eval_with(&self.expr, &env, &F64Arith)
    }
}

/// `Σ f(tag)·v(cell)` over a simple or explicit partition.
pub fn riemann_sum(f: &Integrand, rect: &Rect, spec: &PartitionSpec, rule: TagRule, precision: u32) -> Result<Scalar> {
    let grid = Grid::new(rect, spec)?;
    if f.vars.len() != rect.dimension() {
        return Err(Error::invalid("integrand and rectangle dimensions differ"));
    }
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = grid.cell(i);
            let tag = rule.tag(&lo, &hi, i as u64);
            Ok(f.eval(&tag, precision)? * grid.cell_volume(i))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DarbouxBounds {
    pub lower: Scalar,
    pub upper: Scalar,
    /// Cells whose sampled extrema are not at vertices; there the bounds
    /// are estimates from the sample grid.
    pub nonmonotone_cells: usize,
}

/// Lower and upper sums with per-cell extrema taken over an `s × … × s`
/// grid that includes the vertices.
pub fn darboux_bounds(f: &Integrand, rect: &Rect, spec: &PartitionSpec, s: usize, precision: u32) -> Result<DarbouxBounds> {
    if s < 2 {
        return Err(Error::invalid("at least two samples per axis are needed"));
    }
    let grid = Grid::new(rect, spec)?;
    let n = rect.dimension();
    let per_cell = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = grid.cell(i);
            let steps: Vec<Scalar> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / scalar::int(s as i64 - 1)).collect();
            let mut lowest: Option<(Scalar, bool)> = None;
            let mut highest: Option<(Scalar, bool)> = None;
            for k in 0..s.pow(n as u32) {
                let mut rest = k;
                let mut p = Vec::with_capacity(n);
                let mut vertex = true;
                for ax in 0..n {
                    let j = rest % s;
                    rest /= s;
                    vertex &= j == 0 || j == s - 1;
                    p.push(&lo[ax] + &steps[ax] * scalar::int(j as i64));
                }
                let v = f.eval(&p, precision)?;
                // ties prefer vertices, so only strict interior extrema flag a cell
                let better = |cur: &Option<(Scalar, bool)>, lt: bool| match cur {
                    None => true,
                    Some((c, cv)) => {
                        if lt {
                            v < *c || (v == *c && vertex && !cv)
                        } else {
                            v > *c || (v == *c && vertex && !cv)
                        }
                    }
                };
                if better(&lowest, true) {
                    lowest = Some((v.clone(), vertex));
                }
                if better(&highest, false) {
                    highest = Some((v, vertex));
                }
            }
            let (lo_v, lo_at_vertex) = lowest.expect("samples");
            let (hi_v, hi_at_vertex) = highest.expect("samples");
            let vol = grid.cell_volume(i);
            Ok((lo_v * &vol, hi_v * vol, !(lo_at_vertex && hi_at_vertex)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = DarbouxBounds {
        lower: Scalar::zero(),
        upper: Scalar::zero(),
        nonmonotone_cells: 0,
    };
    for (l, u, flag) in per_cell {
        out.lower += l;
        out.upper += u;
        out.nonmonotone_cells += flag as usize;
    }
    Ok(out)
}

/// `Σ f(tᵢ′)(φ(tᵢ) − φ(tᵢ₋₁))` on an interval.
pub fn riemann_stieltjes_sum(
    f: &Integrand,
    phi: &Integrand,
    rect: &Rect,
    spec: &PartitionSpec,
    rule: TagRule,
    precision: u32,
) -> Result<Scalar> {
    if rect.dimension() != 1 {
        return Err(Error::invalid("Stieltjes sums are one-dimensional"));
    }
    let grid = Grid::new(rect, spec)?;
    let pts = &grid.axes[0];
    let phis = pts
        .par_iter()
        .map(|t| phi.eval(std::slice::from_ref(t), precision))
        .collect::<Result<Vec<_>>>()?;
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let tag = rule.tag(&pts[i..=i], &pts[i + 1..=i + 1], i as u64);
            Ok(f.eval(&tag, precision)? * (&phis[i + 1] - &phis[i]))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::scalar::{int, ratio};

    fn unit(n: usize) -> Rect {
        Rect::cube(int(0), int(1), n).unwrap()
    }

    fn f(src: &str, n: usize) -> Integrand {
        Integrand::new(parse(src).unwrap(), n).unwrap()
    }

    #[test]
    fn riemann_examples() {
        let s = riemann_sum(&f("x", 1), &unit(1), &PartitionSpec::uniform(4, 1), TagRule::MinVertex, 40);
        assert_eq!(s.unwrap(), ratio(3, 8));
        let r = Rect::new(vec![int(-1), int(2)], vec![ratio(1, 2), int(5)]).unwrap();
        for rule in [TagRule::Center, TagRule::SeededRandom(7), TagRule::CornerNearestOrigin] {
            let s = riemann_sum(&f("1", 2), &r, &PartitionSpec::Simple(vec![3, 5]), rule, 40);
            assert_eq!(s.unwrap(), r.volume());
        }
        let s = riemann_sum(&f("x*y", 2), &unit(2), &PartitionSpec::uniform(2, 2), TagRule::Center, 40);
        assert_eq!(s.unwrap(), ratio(1, 4));
    }

    #[test]
    fn tags() {
        let (lo, hi) = (vec![int(-2), int(1)], vec![int(-1), int(3)]);
        assert_eq!(TagRule::CornerNearestOrigin.tag(&lo, &hi, 0), vec![int(-1), int(1)]);
        assert_eq!(TagRule::Center.tag(&lo, &hi, 0), vec![ratio(-3, 2), int(2)]);
        let a = TagRule::SeededRandom(42).tag(&lo, &hi, 5);
        assert_eq!(a, TagRule::SeededRandom(42).tag(&lo, &hi, 5));
        assert_ne!(a, TagRule::SeededRandom(42).tag(&lo, &hi, 6));
        assert!(Rect::new(lo, hi).unwrap().contains(&a));
        assert!(TagRule::parse("bogus", 0).is_err());
    }

    #[test]
    fn partitions() {
        let r = unit(1);
        assert_eq!(PartitionSpec::with_mesh(&r, &ratio(1, 8)).unwrap(), PartitionSpec::Simple(vec![8]));
        assert_eq!(PartitionSpec::with_mesh(&r, &ratio(3, 8)).unwrap(), PartitionSpec::Simple(vec![3]));
        let e = PartitionSpec::Explicit(vec![vec![int(0), ratio(1, 3), int(1)]]);
        assert_eq!(e.mesh(&r).unwrap(), ratio(2, 3));
        let bad = PartitionSpec::Explicit(vec![vec![int(0), ratio(1, 3)]]);
        assert!(bad.breakpoints(&r).is_err());
        assert!(Rect::interval(int(1), int(1)).is_err());
        let tp = TaggedPartition::build(&unit(2), &PartitionSpec::Simple(vec![2, 3]), TagRule::Center).unwrap();
        assert_eq!(tp.cells.len(), 6);
        let total: Scalar = tp.cells.iter().map(Rect::volume).sum();
        assert_eq!(total, int(1));
        assert_eq!(tp.riemann_sum(&f("x*y", 2), 40).unwrap(), ratio(1, 4));
    }

    #[test]
    fn darboux_examples() {
        let b = darboux_bounds(&f("x", 1), &unit(1), &PartitionSpec::uniform(4, 1), 5, 40).unwrap();
        assert_eq!((b.lower, b.upper), (ratio(3, 8), ratio(5, 8)));
        let b = darboux_bounds(&f("3", 2), &unit(2), &PartitionSpec::uniform(3, 2), 5, 40).unwrap();
        assert_eq!((b.lower, b.upper), (int(3), int(3)));
        let r = Rect::interval(int(-1), int(1)).unwrap();
        let b = darboux_bounds(&f("x^2", 1), &r, &PartitionSpec::uniform(2, 1), 3, 40).unwrap();
        assert_eq!((b.lower, b.upper, b.nonmonotone_cells), (int(0), int(2), 0));
        let b = darboux_bounds(&f("x^2", 1), &r, &PartitionSpec::uniform(1, 1), 3, 40).unwrap();
        assert_eq!(b.nonmonotone_cells, 1);
    }

    #[test]
    fn stieltjes_examples() {
        let r = unit(1);
        for m in [1, 3, 8] {
            let p = PartitionSpec::uniform(m, 1);
            let s = riemann_stieltjes_sum(&f("1", 1), &f("x^2", 1), &r, &p, TagRule::Center, 40).unwrap();
            assert_eq!(s, int(1));
            let s = riemann_stieltjes_sum(&f("x", 1), &f("5", 1), &r, &p, TagRule::Center, 40).unwrap();
            assert_eq!(s, int(0));
        }
        let p = PartitionSpec::uniform(512, 1);
        let s = riemann_stieltjes_sum(&f("x", 1), &f("x^2", 1), &r, &p, TagRule::Center, 40).unwrap();
        assert!((s - ratio(2, 3)).abs() < ratio(1, 10_000));
    }
}
