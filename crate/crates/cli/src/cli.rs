use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Infinitesimal calculus on a computable hyperreal field, and a
/// finite-scale integration lab.
///
/// Numbers are exact: integers, `p/q` and finite decimals. Where a number
/// is expected a constant expression such as `pi/2` is also accepted and
/// evaluated to the working precision. Infinitesimal probes are internal;
/// `--window` and `--precision` control them.
#[derive(Parser, Debug)]
#[command(name = "hrw", version, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Truncation window W of the series arithmetic (positive rational)
    #[arg(long, global = true, value_name = "Q", default_value = "16")]
    pub window: String,
    /// Decimal digits d of every transcendental approximation
    #[arg(long, global = true, value_name = "D", env = "HRW_PRECISION", default_value_t = 40)]
    pub precision: u32,
    /// Largest cell width of the partition
    #[arg(long, global = true, value_name = "M")]
    pub mesh: Option<String>,
    /// Decreasing cell widths for a convergence table
    #[arg(long, global = true, value_name = "M1,M2,...", value_delimiter = ',')]
    pub meshes: Vec<String>,
    /// Cells per axis, instead of a width [default: 64]
    #[arg(long, global = true, value_name = "N1,N2,...", value_delimiter = ',')]
    pub cells: Vec<usize>,
    /// Tag rule: corner-nearest-origin, center, min-vertex, seeded-random
    #[arg(long, global = true, value_name = "RULE", default_value = "min-vertex")]
    pub tags: String,
    /// Seed of the seeded-random tag rule
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    /// Box of integration, axes separated by `;`, e.g. `-1,1;-1,1`
    #[arg(long, global = true, value_name = "A,B[;C,D...]", allow_hyphen_values = true)]
    pub rect: Option<String>,
    /// Reference value (constant expression) or `simpson` for quadrature
    #[arg(long, global = true, value_name = "VALUE|simpson", allow_hyphen_values = true)]
    pub oracle: Option<String>,
    /// File of `name(params) = body` definitions usable in expressions
    #[arg(long, global = true, value_name = "FILE")]
    pub defs: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact value at a rational point
    Eval {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        /// Bindings `VAR=VALUE`
        #[arg(long, value_name = "VAR=VALUE", value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Standard part of an expression on the monad of a point
    St(Probe),
    /// Classify an expression's value on the monad of a point
    Classify(Probe),
    /// Limit of a sequence in `n`
    LimitSeq {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Limit of a function at a point, from both sides
    LimitFn {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, value_name = "P", allow_hyphen_values = true)]
        at: String,
        /// Also decide continuity at the point
        #[arg(long)]
        continuity: bool,
    },
    /// n-th derivative at a point
    Diff {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, value_name = "[VAR=]X0", allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 1)]
        order: usize,
    },
    /// Taylor coefficients up to an order
    Jet {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, value_name = "[VAR=]X0", allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// n-th order increment with an infinitesimal step
    Increment {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, value_name = "[VAR=]C", allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 1)]
        order: usize,
    },
    /// Unit tangent of a curve with its chord certificate
    Tangent(CurveAt),
    /// Curvature, normal and osculating circle of a curve
    Curvature(CurveAt),
    /// Jacobian matrix with the residual-order check
    Jacobian {
        /// Components, comma separated
        #[arg(allow_hyphen_values = true)]
        map: String,
        #[arg(long, value_name = "C1,C2,...", allow_hyphen_values = true)]
        at: String,
        /// Variable order [default: x, y, z, then the rest alphabetically]
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// Velocity and acceleration of a position law in `t`
    Kinematics {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, value_name = "[VAR=]T0", allow_hyphen_values = true)]
        at: String,
    },
    /// Partition sums of an integrand
    Integrate(IntegrateArgs),
    /// Geometric and physical measures as partition sums
    Measure {
        #[command(subcommand)]
        kind: MeasureKind,
    },
    /// Convergence study of a sum against an oracle
    Converge {
        #[command(subcommand)]
        target: Target,
    },
    /// Deviation of a set function from an integrand, per mesh
    ProbeSupernear {
        #[arg(allow_hyphen_values = true)]
        f: String,
        /// `integral(P)` or `area-between(F, G)` with polynomials
        #[arg(long, value_name = "NAME(ARGS)")]
        functional: String,
    },
}

#[derive(Args, Debug)]
pub struct Probe {
    #[arg(allow_hyphen_values = true)]
    pub expr: String,
    /// Bindings `VAR=VALUE`; the variable is probed at VALUE plus an
    /// infinitesimal, or at an infinite value for `inf` and `-inf`
    #[arg(long, value_name = "VAR=VALUE", value_delimiter = ',', allow_hyphen_values = true)]
    pub at: Vec<String>,
    /// Side of the point the probe lies on
    #[arg(long, value_enum, default_value_t = Side::Right)]
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Left,
    Right,
}

#[derive(Args, Debug)]
pub struct CurveAt {
    /// Components, comma separated, in one parameter
    #[arg(allow_hyphen_values = true)]
    pub curve: String,
    #[arg(long, value_name = "T0", allow_hyphen_values = true)]
    pub at: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Riemann,
    Darboux,
    Stieltjes,
    Gauge,
    Mcshane,
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    #[arg(allow_hyphen_values = true)]
    pub expr: String,
    #[arg(long, value_enum, default_value_t = Method::Riemann)]
    pub method: Method,
    /// Integrator of a Stieltjes sum
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Positive radius function of a gauge sum
    #[arg(long, allow_hyphen_values = true)]
    pub gauge: Option<String>,
    /// Samples per axis and cell for Darboux extrema
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Edge {
    Outer,
    Inner,
}

#[derive(Subcommand, Debug)]
pub enum MeasureKind {
    /// Area between a lower and an upper curve
    Area {
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lower: String,
        #[arg(long, allow_hyphen_values = true)]
        upper: String,
    },
    /// Volume of revolution of a profile about the axis
    VolumeRev {
        #[arg(allow_hyphen_values = true)]
        profile: String,
    },
    /// Lateral surface of revolution of a profile
    SurfaceRev {
        #[arg(allow_hyphen_values = true)]
        profile: String,
    },
    /// Polygonal and integral length of a curve
    Length {
        #[arg(allow_hyphen_values = true)]
        curve: String,
    },
    /// Mass and first moments of a density over a region
    Mass(RegionArgs),
    /// Center of mass of a density over a region
    Com(RegionArgs),
    /// Integral of density times a weight over a region
    Moment {
        #[command(flatten)]
        region: RegionArgs,
        /// Weight, e.g. `x^2+y^2`
        #[arg(long, allow_hyphen_values = true)]
        integrand: String,
    },
    /// Work of a force field along a curve
    Work {
        /// Field components in x, y, z, comma separated
        #[arg(allow_hyphen_values = true)]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
    },
    /// Impulse of a force in `t`
    Impulse {
        #[arg(allow_hyphen_values = true)]
        force: String,
    },
    /// Ring-strip sums for the polar moment of a disc
    Morley {
        /// Disc radius
        #[arg(long, default_value = "1")]
        a: String,
        /// Number of rings
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = Edge::Outer)]
        edge: Edge,
    },
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    /// Density
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub rho: String,
    /// Predicate `g`; the region is `g <= 0` inside `--rect` [default box: -1,1;-1,1]
    #[arg(long, allow_hyphen_values = true)]
    pub region: String,
}

#[derive(Subcommand, Debug)]
pub enum Target {
    Integrate(IntegrateArgs),
    Measure {
        #[command(subcommand)]
        kind: MeasureKind,
    },
}
