//! Special-function kernel.
//!
//! Every transcendental the distribution formulas need: log-gamma, modified
//! Bessel functions `I_nu` and `K_nu` (with log-scaled variants), the
//! confluent hypergeometric functions `M(a, b, x)` and `U(a, b, x)`, and the
//! regularized incomplete beta and gamma functions.
//!
//! Evaluation strategies and crossovers:
//!
//! | function | method |
//! |----------|--------|
//! | `ln Γ` | Stirling series for `x >= 10`, Taylor series of `1/Γ(1+x)` after shifting into `[0.5, 1.5]` below |
//! | `I_nu` | power series with running rescale (all terms positive), Hankel expansion for `x > max(500, 2 nu^2)` |
//! | `K_nu` | Temme series for `x <= 2`, Steed's continued fraction above, forward recurrence in order |
//! | `M` | power series, Kummer transformation for `x < 0` |
//! | `U` | terminating series for polynomial cases, reflection to `b >= 1`, double-exponential quadrature of the Laplace integral for `a > 0`, backward recurrence in `a` otherwise |
//! | `I_x(a,b)` | Lentz continued fraction with the usual symmetry swap |
//! | `P(a,x)` | series for `x < a + 1`, continued fraction above |

mod bessel;
mod beta;
mod gamma;
mod hypergeometric;
mod incgamma;

pub use bessel::{bessel_i, bessel_k, log_bessel_i, log_bessel_k, BesselKLadder};
pub use beta::{ln_beta, reg_inc_beta};
pub use gamma::{gamma, ln_gamma};
pub(crate) use gamma::ln_factorial;
pub use hypergeometric::{
    kummer_m, kummer_m_scaled, kummer_m_with, log_kummer_m, log_tricomi_u, tricomi_u,
    SeriesOutcome, Signed,
};
pub(crate) use hypergeometric::{log_reflected_u, ReflectedULadder};
pub use incgamma::{reg_lower_gamma, reg_upper_gamma};
