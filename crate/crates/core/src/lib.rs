//! Numerical checks of Brunn-Minkowski type concavity for measures with a
//! density: `μ((1-λ)A + λB) >= M_s(μ(A), μ(B); λ)` and its relatives, on
//! interval unions, coordinate boxes and convex polygons.
//!
//! Module layout, bottom up: [`measures`] (densities and their concavity
//! classes), [`sets`] (exact Minkowski combinations), [`quadrature`]
//! (measures of sets and of sections), [`concavity`] (the checkers),
//! [`counterexamples`] and [`parallel`].

pub mod concavity;
pub mod counterexamples;
pub mod error;
pub mod measures;
pub mod parallel;
pub mod quadrature;
pub mod report;
pub mod sets;

pub use error::{Error, Result};
pub use report::{ConcavityReport, DeficitSample, Tolerance, Verdict, Witness};
