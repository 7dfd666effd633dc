use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::{axis_names, Grid, Integrand, PartitionSpec, Rect};
use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr};
use crate::scalar::{self, Scalar};

/// Jordan region `{p ∈ box : g(p) ≤ 0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub bounds: Rect,
    pub membership: Integrand,
    pub exact_content: Option<Scalar>,
}

impl Region {
    /// Coordinates are `x, y, z, …` as for [`Integrand::new`].
    pub fn new(bounds: Rect, predicate: Expr) -> Result<Self> {
        let membership = Integrand::with_vars(predicate, axis_names(bounds.dimension()))?;
        Ok(Region {
            bounds,
            membership,
            exact_content: None,
        })
    }

    pub fn with_content(mut self, content: Scalar) -> Self {
        self.exact_content = Some(content);
        self
    }

    pub fn contains(&self, p: &[Scalar], precision: u32) -> Result<bool> {
        Ok(!self.membership.eval(p, precision)?.is_positive())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerSum {
    pub value: Scalar,
    pub inner: usize,
    pub boundary: usize,
    pub exterior: usize,
    /// Total volume of the boundary cells.
    pub boundary_volume: Scalar,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CellClass {
    Inner,
    Boundary,
    Exterior,
}

/// Classifies every cell by its vertices and center, then sums each
/// integrand at the min-vertex of the inner cells. Vertex membership is
/// evaluated once on the shared breakpoint grid.
fn inner_sums(fs: &[Integrand], region: &Region, spec: &PartitionSpec, precision: u32) -> Result<(Vec<Scalar>, InnerSum)> {
    let n = region.bounds.dimension();
    if let Some(f) = fs.iter().find(|f| f.vars.len() != n) {
        return Err(Error::invalid(format!("integrand `{}` has the wrong dimension", f.expr)));
    }
    let grid = Grid::new(&region.bounds, spec)?;
    let counts = grid.counts();
    let vcounts: Vec<usize> = counts.iter().map(|m| m + 1).collect();
    let vtotal: usize = vcounts.iter().product();
    let vertex_inside = (0..vtotal)
        .into_par_iter()
        .map(|k| {
            let mut rest = k;
            let mut p = vec![Scalar::zero(); n];
            for ax in (0..n).rev() {
                p[ax] = grid.axes[ax][rest % vcounts[ax]].clone();
                rest /= vcounts[ax];
            }
            region.contains(&p, precision)
        })
        .collect::<Result<Vec<bool>>>()?;
    let vertex_index = |idx: &[usize], mask: usize| {
        idx.iter()
            .enumerate()
            .fold(0, |acc, (ax, &i)| acc * vcounts[ax] + i + (mask >> ax & 1))
    };
    let per_cell = (0..grid.len())
        .into_par_iter()
        .map(|c| {
            let idx = grid.multi_index(c);
            let inside = (0..1usize << n).filter(|&mask| vertex_inside[vertex_index(&idx, mask)]).count();
            let (lo, hi) = grid.cell(c);
            let two = scalar::int(2);
            let center: Vec<Scalar> = lo.iter().zip(&hi).map(|(a, b)| (a + b) / &two).collect();
            let center_in = region.contains(&center, precision)?;
            let all = 1usize << n;
            let class = match (inside, center_in) {
                (k, true) if k == all => CellClass::Inner,
                (0, false) => CellClass::Exterior,
                _ => CellClass::Boundary,
            };
            let vol = grid.cell_volume(c);
            let values = if class == CellClass::Inner {
                fs.iter()
                    .map(|f| Ok(f.eval(&lo, precision)? * &vol))
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            Ok((class, vol, values))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sums = vec![Scalar::zero(); fs.len()];
    let mut out = InnerSum {
        value: Scalar::zero(),
        inner: 0,
        boundary: 0,
        exterior: 0,
        boundary_volume: Scalar::zero(),
    };
    for (class, vol, values) in per_cell {
        match class {
            CellClass::Inner => {
                out.inner += 1;
                for (s, v) in sums.iter_mut().zip(values) {
                    *s += v;
                }
            }
            CellClass::Boundary => {
                out.boundary += 1;
                out.boundary_volume += vol;
            }
            CellClass::Exterior => out.exterior += 1,
        }
    }
    out.value = sums.first().cloned().unwrap_or_else(Scalar::zero);
    Ok((sums, out))
}

/// Inner-cell sum `Σ f(min-vertex)·v(S)` over cells lying inside `J`.
pub fn inner_sum(f: &Integrand, region: &Region, spec: &PartitionSpec, precision: u32) -> Result<InnerSum> {
    Ok(inner_sums(std::slice::from_ref(f), region, spec, precision)?.1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassReport {
    pub mass: Scalar,
    /// `∫ xᵢ ρ` for each coordinate.
    pub moments: Vec<Scalar>,
    pub cells: InnerSum,
}

impl MassReport {
    /// Center of mass, `moments / mass`.
    pub fn centroid(&self) -> Result<Vec<Scalar>> {
        if self.mass.is_zero() {
            return Err(Error::ZeroMass);
        }
        Ok(self.moments.iter().map(|m| m / &self.mass).collect())
    }
}

/// Mass `∫_J ρ` and first moments `∫_J xᵢ ρ`.
pub fn measure_mass_moment_com(rho: &Expr, region: &Region, spec: &PartitionSpec, precision: u32) -> Result<MassReport> {
    let names = axis_names(region.bounds.dimension());
    let mut fs = vec![Integrand::with_vars(rho.clone(), names.clone())?];
    for v in &names {
        let e = Expr::binary(BinOp::Mul, Expr::var(v), rho.clone());
        fs.push(Integrand::with_vars(e, names.clone())?);
    }
    let (sums, cells) = inner_sums(&fs, region, spec, precision)?;
    if sums[0].is_negative() {
        return Err(Error::domain("negative density"));
    }
    Ok(MassReport {
        mass: sums[0].clone(),
        moments: sums[1..].to_vec(),
        cells,
    })
}

/// `∫_J ρ·w`, with `w` the squared distance weight such as `x^2 + y^2`.
pub fn moment_of_inertia(rho: &Expr, weight: &Expr, region: &Region, spec: &PartitionSpec, precision: u32) -> Result<InnerSum> {
    let e = Expr::binary(BinOp::Mul, rho.clone(), weight.clone());
    let f = Integrand::with_vars(e, axis_names(region.bounds.dimension()))?;
    inner_sum(&f, region, spec, precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::integration::{riemann_sum, TagRule};
    use crate::scalar::{int, ratio};

    fn disc() -> Region {
        Region::new(Rect::cube(int(-1), int(1), 2).unwrap(), parse("x^2+y^2-1").unwrap()).unwrap()
    }

    fn one(n: usize) -> Integrand {
        Integrand::new(parse("1").unwrap(), n).unwrap()
    }

    #[test]
    fn disc_cells() {
        let s = inner_sum(&one(2), &disc(), &PartitionSpec::uniform(4, 2), 40).unwrap();
        assert_eq!((s.inner, s.value.clone()), (4, int(1)));
        assert_eq!(s.inner + s.boundary + s.exterior, 16);
        // boundary volume shrinks with the mesh
        let fine = inner_sum(&one(2), &disc(), &PartitionSpec::uniform(32, 2), 40).unwrap();
        assert!(fine.boundary_volume < s.boundary_volume);
    }

    #[test]
    fn full_and_empty_regions() {
        let r = Rect::cube(int(0), int(1), 2).unwrap();
        let f = Integrand::new(parse("x*y + 1").unwrap(), 2).unwrap();
        let p = PartitionSpec::uniform(5, 2);
        let full = Region::new(r.clone(), parse("-1").unwrap()).unwrap();
        let s = inner_sum(&f, &full, &p, 40).unwrap();
        assert_eq!(s.value, riemann_sum(&f, &r, &p, TagRule::MinVertex, 40).unwrap());
        assert_eq!(s.inner, 25);
        let empty = Region::new(r, parse("1").unwrap()).unwrap();
        let s = inner_sum(&f, &empty, &p, 40).unwrap();
        assert_eq!((s.value, s.exterior), (int(0), 25));
    }

    #[test]
    fn mass_and_centroid() {
        let sq = Region::new(Rect::cube(int(0), int(1), 2).unwrap(), parse("-1").unwrap()).unwrap();
        let m = measure_mass_moment_com(&parse("1").unwrap(), &sq, &PartitionSpec::uniform(4, 2), 40).unwrap();
        assert_eq!(m.mass, int(1));
        assert_eq!(m.centroid().unwrap(), vec![ratio(3, 8), ratio(3, 8)]);
        let m = measure_mass_moment_com(&parse("x").unwrap(), &sq, &PartitionSpec::uniform(256, 2), 40).unwrap();
        assert!((&m.mass - ratio(1, 2)).abs() < ratio(1, 100));
        assert!((&m.centroid().unwrap()[0] - ratio(2, 3)).abs() < ratio(1, 100));
        let m = measure_mass_moment_com(&parse("0").unwrap(), &sq, &PartitionSpec::uniform(2, 2), 40).unwrap();
        assert_eq!(m.centroid(), Err(Error::ZeroMass));
    }

    #[test]
    fn disc_inertia_improves() {
        let target = std::f64::consts::FRAC_PI_2;
        let mut last = f64::INFINITY;
        for m in [8, 16, 32, 64] {
            let s = moment_of_inertia(&parse("1").unwrap(), &parse("x^2+y^2").unwrap(), &disc(), &PartitionSpec::uniform(m, 2), 40)
                .unwrap();
            let err = (scalar::to_f64(&s.value) - target).abs();
            assert!(err < last);
            last = err;
        }
    }
}
