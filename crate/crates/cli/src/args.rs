//! Values given on the command line: numbers, points, boxes, meshes.

use std::collections::HashMap;

use hrw_core::expr::{eval_real, parse_definitions, Definitions};
use hrw_core::integration::{PartitionSpec, Rect, TagRule};
use hrw_core::scalar::{self, Scalar};
use hrw_core::{Exponent, Expr, FieldConfig};

use crate::cli::Global;
use crate::output::Failure;

/// How the partitions of a sweep are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshChoice {
    Width(Scalar),
    Cells(usize),
}

pub const DEFAULT_CELLS: usize = 64;

/// Settings shared by every subcommand.
pub struct Ctx {
    pub defs: Definitions,
    pub cfg: FieldConfig,
    pub rule: TagRule,
    pub meshes: Vec<MeshChoice>,
    /// True when a mesh flag was given explicitly.
    pub mesh_given: bool,
    pub rect: Option<String>,
    pub oracle: Option<String>,
}

impl Ctx {
    pub fn new(g: &Global) -> Result<Self, Failure> {
        let defs = match &g.defs {
            None => Definitions::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
                parse_definitions(&text).map_err(|e| Failure::from(e).context(&format!("in {}", path.display())))?
            }
        };
        let window = scalar::parse_rational(&g.window).map_err(|e| Failure::parse("--window", &g.window, e))?;
        let cfg = FieldConfig::new(Exponent(window), g.precision)?;
        let rule = TagRule::parse(&g.tags, g.seed)?;
        let given = [g.mesh.is_some(), !g.meshes.is_empty(), !g.cells.is_empty()];
        if given.iter().filter(|b| **b).count() > 1 {
            return Err(Failure::invalid("use only one of --mesh, --meshes and --cells"));
        }
        let mut ctx = Ctx {
            defs,
            cfg,
            rule,
            meshes: Vec::new(),
            mesh_given: given.contains(&true),
            rect: g.rect.clone(),
            oracle: g.oracle.clone(),
        };
        ctx.meshes = if let Some(m) = &g.mesh {
            vec![MeshChoice::Width(ctx.number("--mesh", m)?)]
        } else if !g.meshes.is_empty() {
            g.meshes.iter().map(|m| ctx.number("--meshes", m).map(MeshChoice::Width)).collect::<Result<_, _>>()?
        } else if !g.cells.is_empty() {
            g.cells.iter().map(|&n| MeshChoice::Cells(n)).collect()
        } else {
            vec![MeshChoice::Cells(DEFAULT_CELLS)]
        };
        Ok(ctx)
    }

    pub fn precision(&self) -> u32 {
        self.cfg.precision
    }

    pub fn expr(&self, what: &str, s: &str) -> Result<Expr, Failure> {
        self.defs.parse(s).map_err(|e| Failure::parse(what, s, e))
    }

    pub fn list(&self, what: &str, s: &str) -> Result<Vec<Expr>, Failure> {
        self.defs.parse_list(s).map_err(|e| Failure::parse(what, s, e))
    }

    /// A rational literal, or a constant expression evaluated to the
    /// working precision.
    pub fn number(&self, what: &str, s: &str) -> Result<Scalar, Failure> {
        if let Ok(q) = scalar::parse_rational(s) {
            return Ok(q);
        }
        let e = self.expr(what, s)?;
        if let Some(v) = e.free_vars().into_iter().next() {
            return Err(Failure::invalid(format!("{what} must be a constant, found variable `{v}`")));
        }
        Ok(eval_real(&e, &HashMap::new(), self.precision())?)
    }

    pub fn numbers(&self, what: &str, s: &str) -> Result<Vec<Scalar>, Failure> {
        s.split(',').map(|p| self.number(what, p)).collect()
    }

    /// `VAR=VALUE` or a bare `VALUE`.
    pub fn point(&self, what: &str, s: &str) -> Result<(Option<String>, Scalar), Failure> {
        match s.split_once('=') {
            Some((v, x)) => Ok((Some(v.trim().to_string()), self.number(what, x)?)),
            None => Ok((None, self.number(what, s)?)),
        }
    }

    /// The `--rect` box, or `default` when absent.
    pub fn rect(&self, default: Rect) -> Result<Rect, Failure> {
        let Some(s) = &self.rect else { return Ok(default) };
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for axis in s.split(';') {
            let ends = self.numbers("--rect", axis)?;
            let [a, b] = <[Scalar; 2]>::try_from(ends)
                .map_err(|_| Failure::invalid(format!("--rect axis `{axis}` needs two endpoints")))?;
            lo.push(a);
            hi.push(b);
        }
        Ok(Rect::new(lo, hi)?)
    }

    /// The `--rect` interval, `[0, 1]` by default.
    pub fn interval(&self) -> Result<(Scalar, Scalar), Failure> {
        let r = self.rect(Rect::interval(scalar::int(0), scalar::int(1))?)?;
        if r.dimension() != 1 {
            return Err(Failure::invalid("this operation needs a one-dimensional --rect"));
        }
        Ok((r.lo()[0].clone(), r.hi()[0].clone()))
    }

    /// One partition per mesh choice, paired with its actual mesh.
    pub fn partitions(&self, rect: &Rect) -> Result<Vec<(Scalar, PartitionSpec)>, Failure> {
        self.meshes
            .iter()
            .map(|m| {
                let spec = match m {
                    MeshChoice::Width(w) => PartitionSpec::with_mesh(rect, w)?,
                    MeshChoice::Cells(n) => PartitionSpec::uniform(*n, rect.dimension()),
                };
                Ok((spec.mesh(rect)?, spec))
            })
            .collect()
    }

    /// The box as given on the command line, or the default in use.
    pub fn rect_param(&self, used: &Rect) -> String {
        self.rect.clone().unwrap_or_else(|| render_rect(used))
    }

    pub fn no_mesh(&self, what: &str) -> Result<(), Failure> {
        if self.mesh_given {
            return Err(Failure::invalid(format!("{what} takes no mesh")));
        }
        Ok(())
    }
}

/// `-1,1;-1,1` style rendering of a box.
pub fn render_rect(r: &Rect) -> String {
    r.lo()
        .iter()
        .zip(r.hi())
        .map(|(a, b)| format!("{},{}", scalar::render(a), scalar::render(b)))
        .collect::<Vec<_>>()
        .join(";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Cli;
    use clap::Parser;
    use hrw_core::scalar::{int, ratio};

    fn ctx(flags: &[&str]) -> Result<Ctx, Failure> {
        let argv = ["hrw", "eval", "1"].iter().chain(flags);
        Ctx::new(&Cli::try_parse_from(argv).unwrap().global)
    }

    #[test]
    fn numbers_are_exact_or_constant_expressions() {
        let c = ctx(&[]).unwrap();
        assert_eq!(c.number("n", "-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(c.number("n", "2^10").unwrap(), int(1024));
        let pi = c.number("n", "pi").unwrap();
        assert!(pi > ratio(314159, 100000) && pi < ratio(314160, 100000));
        assert_eq!(c.number("n", "x+1").unwrap_err().name, "InvalidArgument");
        assert_eq!(c.number("n", "1/").unwrap_err().name, "ParseError");
    }

    #[test]
    fn boxes_parse_per_axis() {
        let c = ctx(&["--rect", "-1,1;0,1/2"]).unwrap();
        let r = c.rect(Rect::interval(int(0), int(1)).unwrap()).unwrap();
        assert_eq!(r.lo(), &[int(-1), int(0)]);
        assert_eq!(r.hi(), &[int(1), ratio(1, 2)]);
        assert_eq!(c.rect_param(&r), "-1,1;0,1/2");
        assert!(c.interval().is_err());
        let c = ctx(&["--rect", "0,1,2"]).unwrap();
        assert!(c.rect(Rect::interval(int(0), int(1)).unwrap()).is_err());
    }

    #[test]
    fn mesh_flags_are_exclusive_and_default_to_cells() {
        assert!(ctx(&["--mesh", "1/4", "--cells", "8"]).is_err());
        let c = ctx(&[]).unwrap();
        assert_eq!(c.meshes, vec![MeshChoice::Cells(DEFAULT_CELLS)]);
        assert!(!c.mesh_given);
        let c = ctx(&["--meshes", "1/4,1/8"]).unwrap();
        let rect = Rect::interval(int(0), int(1)).unwrap();
        let meshes: Vec<Scalar> = c.partitions(&rect).unwrap().into_iter().map(|(h, _)| h).collect();
        assert_eq!(meshes, vec![ratio(1, 4), ratio(1, 8)]);
        assert!(c.no_mesh("gauge").is_err());
    }
}
