//! Noncentral chi-square difference distribution and sums of products of
//! correlated normal random variables.
//!
//! The crate is organised around two parameterisations:
//!
//! * [`ProductNormalParams`] describes `S_n = Z_1 + ... + Z_n` where each
//!   `Z_i = X_i Y_i` is the product of a bivariate normal pair.
//! * [`ChiSqDiffParams`] describes `T = V_1 - V_2` with independent
//!   noncentral chi-square variables sharing `r` degrees of freedom.
//!
//! [`repr`] maps the first onto the second (scales, noncentralities and a
//! shift for `|rho| = 1`), and every other module is written against one of
//! the two. Closed forms are paired with independent numerical routes
//! (characteristic-function inversion, Monte Carlo) so that each can be
//! checked against the other; [`selftest`] runs those comparisons.

// Coefficient tables keep every published digit; `!(x > 0.0)` rejects NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod density;
pub mod error;
pub mod export;
pub mod moments;
pub mod probability;
pub mod quadrature;
pub mod repr;
pub mod sampling;
pub mod selftest;
pub mod specfun;
pub mod stein;

mod numeric;

pub use control::SeriesControl;
pub use error::{Error, Result};
pub use repr::{ChiSqDiffParams, ChiSqDiffRepr, ProductNormalParams};
