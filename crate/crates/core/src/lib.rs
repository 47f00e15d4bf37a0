//! Contraction mappings on fuzzy metric spaces.
//!
//! The crate provides continuous t-norms ([`tnorm`]), moduli of class Φ
//! ([`phi`]), the standard fuzzy metric `M(x,y,t) = t/(t + d(x,y))` and its
//! transforms ([`fmspace`]), checkers for `(g,φ)`-contraction conditions
//! ([`contraction`]), and constructive solvers for coincidence points of
//! single-valued maps ([`solver`]) and fixed points of set-valued maps
//! ([`multivalued`]). The [`cli`] module implements the `fmfix` batch tool.

// `!(m > 1.0 - t)` reads as "not strictly above the level" and treats NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contraction;
pub mod error;
pub mod fmspace;
pub mod maps;
pub mod multivalued;
pub mod phi;
pub mod report;
pub mod solver;
pub mod tnorm;

pub use error::{Error, Result};
pub use fmspace::{FuzzyMetric, Point, Space};
pub use maps::{Bijection, MapSpec, PointMap};
pub use phi::PhiFunction;
pub use report::{Check, Report};
pub use tnorm::{Grade, TNorm};
