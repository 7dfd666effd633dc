//! Computable hyperreals and the calculus built on them.
//!
//! The field implemented here is the fragment of a non-Archimedean ordered
//! field made of finite formal series `Σ a_q ε^q` with rational exponents and
//! exact rational coefficients, truncated to a window above the leading
//! exponent. On top of it sit a small expression language, nonstandard
//! derivatives/limits/tangents/curvature/Jacobians, and a finite-scale
//! integration lab that compares partition sums with independent oracles.

pub mod analytic;
pub mod calculus;
pub mod error;
pub mod expr;
pub mod hyperreal;
pub mod integration;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use expr::{parse, Expr, FunctionDef};
pub use hyperreal::{
    Classification, Exponent, ExtendedReal, FieldConfig, HyperReal, Ordering3,
};
pub use scalar::Scalar;
