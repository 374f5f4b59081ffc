//! The two parameterisations and the map between them.
//!
//! `S_n = Z_1 + ... + Z_n` with `Z_i = X_i Y_i` has the same law as
//! `scale_plus * V1 - scale_minus * V2 + shift`, where `V1 ~ χ'²_n(λ+)` and
//! `V2 ~ χ'²_n(λ-)` are independent. For `|ρ| < 1`,
//!
//! ```text
//! scale_± = s (1 ± ρ) / 2,   λ± = n / (2 (1 ± ρ)) · (μX/σX ± μY/σY)²,   shift = 0,
//! ```
//!
//! with `s = σX σY`. At `ρ = ±1` one component collapses into the constant
//! `shift`; the absent component is stored with scale 0 and noncentrality 0.
//!
//! In the other direction, `T = V1 - V2` with `V1 ~ χ'²_r(λ1)`,
//! `V2 ~ χ'²_r(λ2)` is `2 S_r` for uncorrelated unit-variance factors with
//! `(μX + μY)² = 2 λ1 / r` and `(μX - μY)² = 2 λ2 / r`. Only the squares are
//! determined, so [`from_chisq_diff`] takes `μX + μY ≥ 0` and `μX - μY ≥ 0`;
//! every other sign choice gives the same distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the sum of `n` independent products of bivariate normal pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProductNormalParams")]
pub struct ProductNormalParams {
    mu_x: f64,
    mu_y: f64,
    sigma_x: f64,
    sigma_y: f64,
    rho: f64,
    n: u32,
}

#[derive(Deserialize)]
struct RawProductNormalParams {
    mu_x: f64,
    mu_y: f64,
    sigma_x: f64,
    sigma_y: f64,
    rho: f64,
    n: u32,
}

impl TryFrom<RawProductNormalParams> for ProductNormalParams {
    type Error = Error;

    fn try_from(p: RawProductNormalParams) -> Result<Self> {
        ProductNormalParams::new(p.mu_x, p.mu_y, p.sigma_x, p.sigma_y, p.rho, p.n)
    }
}

impl ProductNormalParams {
    pub fn new(mu_x: f64, mu_y: f64, sigma_x: f64, sigma_y: f64, rho: f64, n: u32) -> Result<Self> {
        if !(mu_x.is_finite() && mu_y.is_finite()) {
            return Err(Error::InvalidParams(format!("means must be finite, got ({mu_x}, {mu_y})")));
        }
        if !(sigma_x > 0.0 && sigma_x.is_finite() && sigma_y > 0.0 && sigma_y.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "standard deviations must be positive, got ({sigma_x}, {sigma_y})"
            )));
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParams(format!("rho must lie in [-1, 1], got {rho}")));
        }
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        Ok(ProductNormalParams {
            mu_x,
            mu_y,
            sigma_x,
            sigma_y,
            rho,
            n,
        })
    }

    pub fn mu_x(&self) -> f64 {
        self.mu_x
    }
    pub fn mu_y(&self) -> f64 {
        self.mu_y
    }
    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }
    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `s = σX σY`.
    pub fn s(&self) -> f64 {
        self.sigma_x * self.sigma_y
    }

    /// Standardised means `(μX/σX, μY/σY)`.
    pub fn standardized_means(&self) -> (f64, f64) {
        (self.mu_x / self.sigma_x, self.mu_y / self.sigma_y)
    }

    pub fn to_chisq_diff(&self) -> ChiSqDiffRepr {
        to_chisq_diff(self)
    }
}

/// Parameters of `T = V1 - V2`, `V1 ~ χ'²_r(λ1)`, `V2 ~ χ'²_r(λ2)` independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChiSqDiffParams")]
pub struct ChiSqDiffParams {
    r: f64,
    lambda1: f64,
    lambda2: f64,
}

#[derive(Deserialize)]
struct RawChiSqDiffParams {
    r: f64,
    lambda1: f64,
    lambda2: f64,
}

impl TryFrom<RawChiSqDiffParams> for ChiSqDiffParams {
    type Error = Error;

    fn try_from(p: RawChiSqDiffParams) -> Result<Self> {
        ChiSqDiffParams::new(p.r, p.lambda1, p.lambda2)
    }
}

impl ChiSqDiffParams {
    pub fn new(r: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParams(format!("r must be positive, got {r}")));
        }
        if !(lambda1 >= 0.0 && lambda1.is_finite() && lambda2 >= 0.0 && lambda2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "noncentralities must be nonnegative, got ({lambda1}, {lambda2})"
            )));
        }
        Ok(ChiSqDiffParams { r, lambda1, lambda2 })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// The same law with `V1` and `V2` exchanged, i.e. `-T`.
    pub fn negated(&self) -> Self {
        ChiSqDiffParams {
            r: self.r,
            lambda1: self.lambda2,
            lambda2: self.lambda1,
        }
    }
}

/// `S_n =_d scale_plus · V1 − scale_minus · V2 + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSqDiffRepr {
    pub scale_plus: f64,
    pub scale_minus: f64,
    pub r: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub shift: f64,
}

impl ChiSqDiffRepr {
    /// True when one component has collapsed (`ρ = ±1`).
    pub fn is_degenerate(&self) -> bool {
        self.scale_plus == 0.0 || self.scale_minus == 0.0
    }

    /// `(r, λ+, λ-)` as the parameters of the unscaled difference `V1 - V2`.
    pub fn chisq_diff_params(&self) -> ChiSqDiffParams {
        ChiSqDiffParams {
            r: self.r,
            lambda1: self.lambda_plus,
            lambda2: self.lambda_minus,
        }
    }

    pub fn mean(&self) -> f64 {
        self.scale_plus * (self.r + self.lambda_plus) - self.scale_minus * (self.r + self.lambda_minus) + self.shift
    }
}

/// Maps the product-normal parameters onto the chi-square difference form.
pub fn to_chisq_diff(p: &ProductNormalParams) -> ChiSqDiffRepr {
    let s = p.s();
    let n = p.n as f64;
    let rho = p.rho;
    let (a, b) = p.standardized_means();
    let plus2 = (a + b) * (a + b);
    let minus2 = (a - b) * (a - b);
    if rho == 1.0 {
        ChiSqDiffRepr {
            scale_plus: s,
            scale_minus: 0.0,
            r: n,
            lambda_plus: n * plus2 / 4.0,
            lambda_minus: 0.0,
            shift: -n * s / 4.0 * minus2,
        }
    } else if rho == -1.0 {
        ChiSqDiffRepr {
            scale_plus: 0.0,
            scale_minus: s,
            r: n,
            lambda_plus: 0.0,
            lambda_minus: n * minus2 / 4.0,
            shift: n * s / 4.0 * plus2,
        }
    } else {
        ChiSqDiffRepr {
            scale_plus: 0.5 * s * (1.0 + rho),
            scale_minus: 0.5 * s * (1.0 - rho),
            r: n,
            lambda_plus: n / (2.0 * (1.0 + rho)) * plus2,
            lambda_minus: n / (2.0 * (1.0 - rho)) * minus2,
            shift: 0.0,
        }
    }
}

/// Product-normal parameters with `σX = σY = 1`, `ρ = 0`, `n = r` such that
/// `2 S_r` has the law of `V1 - V2`.
pub fn from_chisq_diff(q: &ChiSqDiffParams) -> Result<ProductNormalParams> {
    let r = q.r;
    if r.fract() != 0.0 || r > u32::MAX as f64 {
        return Err(Error::Unsupported(format!(
            "exact product-normal form needs integer degrees of freedom, got r = {r}"
        )));
    }
    let sum = (2.0 * q.lambda1 / r).sqrt();
    let diff = (2.0 * q.lambda2 / r).sqrt();
    ProductNormalParams::new(0.5 * (sum + diff), 0.5 * (sum - diff), 1.0, 1.0, 0.0, r as u32)
}
