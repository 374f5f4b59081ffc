//! Densities and characteristic functions.
//!
//! The difference `T = V1 - V2` has three series representations here:
//!
//! * [`ncx2diff_pdf`], the general double series in confluent hypergeometric
//!   `U` functions. Each `U(1 - r/2 - a, 2 - r - k, |x|)` is rewritten as
//!   `|x|^{r+k-1} U(r/2 + m, r + k, |x|)`, which has a positive first
//!   parameter, and the values along each `m` are generated by a forward
//!   recurrence in the second parameter.
//! * [`ncx2diff_pdf_equal`], a single Bessel-K series for `λ1 = λ2`.
//! * [`ncx2diff_pdf_one_sided`], a single series for `λ2 = 0`, evaluated
//!   term by term through the public [`tricomi_u`](crate::specfun::tricomi_u).
//!
//! [`cf_inversion_pdf`] is the independent oracle: Fourier inversion of any
//! [`CharacteristicFunction`], with truncation controlled by a provable
//! envelope of `|φ|` and Wynn acceleration when the envelope decays slowly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::SeriesControl;
use crate::error::{domain, Error, Result};
use crate::numeric::LogSum;
use crate::quadrature::{adaptive, exp_sinh, wynn_epsilon};
use crate::repr::{ChiSqDiffParams, ChiSqDiffRepr, ProductNormalParams};
use crate::specfun::{
    ln_factorial, ln_gamma, log_bessel_i, log_bessel_k, log_reflected_u, log_tricomi_u, BesselKLadder,
    ReflectedULadder,
};

const LN_2: f64 = std::f64::consts::LN_2;

/// Outer terms that must stay below tolerance before a series is cut.
const HYSTERESIS: usize = 3;

// ---------------------------------------------------------------------------
// Noncentral chi-square

/// `ln` of the noncentral chi-square density.
pub fn ln_ncx2_pdf(x: f64, r: f64, lambda: f64) -> Result<f64> {
    check_ncx2(r, lambda)?;
    if !(x >= 0.0) {
        return domain(format!("ncx2_pdf requires x >= 0, got {x}"));
    }
    let nu = 0.5 * r - 1.0;
    if x == 0.0 {
        return if r < 2.0 {
            Err(Error::Singular { x })
        } else if r == 2.0 {
            Ok(-LN_2 - 0.5 * lambda)
        } else {
            Ok(f64::NEG_INFINITY)
        };
    }
    if lambda == 0.0 {
        return Ok(nu * x.ln() - 0.5 * x - 0.5 * r * LN_2 - ln_gamma(0.5 * r)?);
    }
    let z = (lambda * x).sqrt();
    Ok(-LN_2 - 0.5 * (x + lambda) + 0.5 * nu * (x / lambda).ln() + log_bessel_i(nu, z)?)
}

/// Noncentral chi-square density with `r` degrees of freedom and
/// noncentrality `lambda`. At `x = 0` with `r < 2` the density is unbounded
/// and [`Error::Singular`] is returned.
pub fn ncx2_pdf(x: f64, r: f64, lambda: f64) -> Result<f64> {
    ln_ncx2_pdf(x, r, lambda).map(f64::exp)
}

fn check_ncx2(r: f64, lambda: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) || !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need r > 0 and lambda >= 0, got r = {r}, lambda = {lambda}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Difference of noncentral chi-squares

/// Running outer sum with the hysteresis stopping rule.
struct OuterSum {
    total: LogSum,
    quiet: usize,
    last_ratio: f64,
}

impl OuterSum {
    fn new() -> Self {
        OuterSum {
            total: LogSum::new(),
            quiet: 0,
            last_ratio: f64::INFINITY,
        }
    }

    /// Adds the `k`-th outer contribution and reports whether to stop.
    fn push(&mut self, ln_term: f64, k: usize, min_k: f64, ctrl: &SeriesControl) -> Result<bool> {
        self.total.add(ln_term);
        let ratio = (ln_term - self.total.ln()).exp();
        self.last_ratio = ratio;
        if ratio <= ctrl.rel_tol {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        if self.quiet >= HYSTERESIS && k as f64 >= min_k {
            return Ok(true);
        }
        if k + 1 >= ctrl.max_terms {
            return Err(Error::NonConvergence {
                terms: k + 1,
                tail_bound: ratio,
            });
        }
        Ok(false)
    }
}

/// Natural log of the smallest positive subnormal `f64`, minus a margin.
const LN_UNDERFLOW: f64 = -746.0;

/// Density of `T = V1 - V2` from the double confluent-hypergeometric series.
///
/// The outer sum over total order `k` stops once `HYSTERESIS` consecutive
/// contributions fall below `ctrl.rel_tol` times the running sum, and not
/// before `k` passes the Poisson mean `(λ1 + λ2)/2`. Far tails where a
/// single noncentral chi-square density already underflows return 0. At
/// `x = 0` the value is the finite limit for `r > 1` and
/// [`Error::Singular`] for `r <= 1`.
pub fn ncx2diff_pdf(x: f64, q: &ChiSqDiffParams, ctrl: &SeriesControl) -> Result<f64> {
    ctrl.validate()?;
    if !x.is_finite() {
        return domain(format!("density argument must be finite, got {x}"));
    }
    let r = q.r();
    if x == 0.0 && r <= 1.0 {
        return Err(Error::Singular { x });
    }
    // p(x; λ1, λ2) = p(-x; λ2, λ1): work with x >= 0.
    let (l1, l2) = if x >= 0.0 {
        (q.lambda1(), q.lambda2())
    } else {
        (q.lambda2(), q.lambda1())
    };
    let z = x.abs();
    // Past the mode of V1, p(z) = ∫ f1(z + v) f2(v) dv <= f1(z); once that
    // bound underflows the density is 0 in double precision.
    if z > r + l1 + 2.0 && ln_ncx2_pdf(z, r, l1)? < LN_UNDERFLOW {
        return Ok(0.0);
    }
    let ln_alpha = (0.25 * l1).ln();
    let ln_beta = (0.25 * l2).ln();
    let power = |n: usize, ln_base: f64| if n == 0 { 0.0 } else { n as f64 * ln_base };
    let half_r = 0.5 * r;

    let mut ladders: Vec<ReflectedULadder> = Vec::new();
    let mut outer = OuterSum::new();
    let min_k = 0.5 * (l1 + l2);
    let mut k = 0usize;
    loop {
        let mut inner = LogSum::new();
        if l1 == 0.0 {
            // Only m = k survives; no recurrence to maintain.
            if l2 > 0.0 || k == 0 {
                let ln_v = log_reflected_u(half_r + k as f64, r + k as f64, z)?;
                inner.add(power(k, ln_beta) - ln_factorial(k) - ln_gamma(half_r)? + ln_v);
            }
        } else {
            for ladder in ladders.iter_mut() {
                ladder.advance();
            }
            if l2 > 0.0 || k == 0 {
                ladders.push(ReflectedULadder::new(half_r + k as f64, r + k as f64, z)?);
            }
            for (m, ladder) in ladders.iter().enumerate() {
                let ln_w = power(k - m, ln_alpha) - ln_factorial(k - m) + power(m, ln_beta) - ln_factorial(m)
                    - ln_gamma(half_r + (k - m) as f64)?;
                inner.add(ln_w + ladder.current());
            }
        }
        if outer.push(inner.ln(), k, min_k, ctrl)? {
            break;
        }
        k += 1;
    }
    let ln_pref = -r * LN_2 - 0.5 * (z + l1 + l2);
    Ok((ln_pref + outer.total.ln()).exp())
}

/// Density of `T` when `λ1 = λ2 = λ`, as a single series in `K`.
pub fn ncx2diff_pdf_equal(x: f64, r: f64, lambda: f64, ctrl: &SeriesControl) -> Result<f64> {
    ctrl.validate()?;
    check_ncx2(r, lambda)?;
    if !x.is_finite() {
        return domain(format!("density argument must be finite, got {x}"));
    }
    let z = x.abs();
    let nu0 = 0.5 * (r - 1.0);
    if z == 0.0 && nu0 <= 0.0 {
        return Err(Error::Singular { x });
    }
    // |x|^nu K_nu(|x|/2), including its limit Γ(nu) 4^nu / 2 at x = 0.
    let mut ladder = if z > 0.0 { Some(BesselKLadder::new(nu0, 0.5 * z)?) } else { None };
    let ln_quarter = (0.25 * lambda).ln();
    let mut outer = OuterSum::new();
    let mut k = 0usize;
    loop {
        let nu = nu0 + k as f64;
        let ln_kx = match &ladder {
            Some(l) => nu * z.ln() + l.current(),
            None => ln_gamma(nu)? + nu * 4f64.ln() - LN_2,
        };
        let ln_pow = if k == 0 { 0.0 } else { k as f64 * ln_quarter };
        let ln_term = ln_pow - ln_factorial(k) - ln_gamma(0.5 * r + k as f64)? + ln_kx;
        if outer.push(ln_term, k, 0.5 * lambda, ctrl)? {
            break;
        }
        if let Some(l) = ladder.as_mut() {
            l.advance();
        }
        k += 1;
    }
    let ln_pref = -r * LN_2 - 0.5 * PI.ln() - lambda;
    Ok((ln_pref + outer.total.ln()).exp())
}

/// Density of `T` when `λ2 = 0`, as a single series of `U` functions, each
/// evaluated independently.
pub fn ncx2diff_pdf_one_sided(x: f64, r: f64, lambda1: f64, ctrl: &SeriesControl) -> Result<f64> {
    ctrl.validate()?;
    check_ncx2(r, lambda1)?;
    if !x.is_finite() {
        return domain(format!("density argument must be finite, got {x}"));
    }
    let z = x.abs();
    if z == 0.0 && r <= 1.0 {
        return Err(Error::Singular { x });
    }
    let half_r = 0.5 * r;
    let ln_alpha = (0.25 * lambda1).ln();
    let mut outer = OuterSum::new();
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let a_k = if x >= 0.0 { kf } else { 0.0 };
        let ln_u = if z > 0.0 {
            let u = log_tricomi_u(1.0 - half_r - a_k, 2.0 - r - kf, z)?;
            if u.sign <= 0.0 {
                return Err(Error::NonConvergence {
                    terms: k,
                    tail_bound: f64::NAN,
                });
            }
            u.ln_abs
        } else {
            // z^{r+k-1} U(r/2 + k - a, r + k, z) -> Γ(r + k - 1) / Γ(r/2 + k - a)
            ln_gamma(r + kf - 1.0)? - ln_gamma(half_r + kf - a_k)?
        };
        let ln_pow = if k == 0 { 0.0 } else { kf * ln_alpha };
        let ln_term = ln_pow - ln_factorial(k) - ln_gamma(half_r + a_k)? + ln_u;
        if lambda1 == 0.0 {
            outer.total.add(ln_term);
            break;
        }
        if outer.push(ln_term, k, 0.5 * lambda1, ctrl)? {
            break;
        }
        k += 1;
    }
    let ln_pref = -r * LN_2 - 0.5 * (z + lambda1);
    Ok((ln_pref + outer.total.ln()).exp())
}

/// Density of `V1 - V2` for central chi-squares (a symmetric variance-gamma
/// law), from the Bessel-K form.
pub fn vgdiff_pdf(x: f64, r: f64) -> Result<f64> {
    check_ncx2(r, 0.0)?;
    if !x.is_finite() {
        return domain(format!("density argument must be finite, got {x}"));
    }
    let z = x.abs();
    let nu = 0.5 * (r - 1.0);
    let ln_pref = -r * LN_2 - 0.5 * PI.ln() - ln_gamma(0.5 * r)?;
    if z == 0.0 {
        if nu <= 0.0 {
            return Err(Error::Singular { x });
        }
        return Ok((ln_pref + ln_gamma(nu)? + nu * 4f64.ln() - LN_2).exp());
    }
    Ok((ln_pref + nu * z.ln() + log_bessel_k(nu, 0.5 * z)?).exp())
}

/// The same density from its confluent-hypergeometric form
/// `e^{-|x|/2} U(1 - r/2, 2 - r, |x|) / (2^r Γ(r/2))`.
pub fn vgdiff_pdf_confluent(x: f64, r: f64) -> Result<f64> {
    check_ncx2(r, 0.0)?;
    if !x.is_finite() {
        return domain(format!("density argument must be finite, got {x}"));
    }
    let z = x.abs();
    if z == 0.0 {
        if r <= 1.0 {
            return Err(Error::Singular { x });
        }
        // U(1 - r/2, 2 - r, z) -> Γ(r - 1) / Γ(r/2)
        return Ok((-r * LN_2 + ln_gamma(r - 1.0)? - 2.0 * ln_gamma(0.5 * r)?).exp());
    }
    let u = log_tricomi_u(1.0 - 0.5 * r, 2.0 - r, z)?;
    Ok(u.sign * (-r * LN_2 - ln_gamma(0.5 * r)? - 0.5 * z + u.ln_abs).exp())
}

/// `e^{-(λ1+λ2)/2} / (2π)`, the coefficient of `-ln|x|` in the density near
/// zero when `r = 1`.
pub fn singularity_constant(lambda1: f64, lambda2: f64) -> f64 {
    (-0.5 * (lambda1 + lambda2)).exp() / (2.0 * PI)
}

/// One row of [`singularity_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityPoint {
    pub x: f64,
    pub density: f64,
    /// `density / (-ln x)` divided by [`singularity_constant`].
    pub ratio: f64,
}

/// Compares `p(x) / (-ln x)` with the logarithmic rate at
/// `x = 1e-6, 1e-5, 1e-4, 1e-3` for `r = 1`.
pub fn singularity_diagnostic(lambda1: f64, lambda2: f64, ctrl: &SeriesControl) -> Result<Vec<SingularityPoint>> {
    let q = ChiSqDiffParams::new(1.0, lambda1, lambda2)?;
    let c = singularity_constant(lambda1, lambda2);
    [1e-6, 1e-5, 1e-4, 1e-3]
        .iter()
        .map(|&x| {
            let density = ncx2diff_pdf(x, &q, ctrl)?;
            Ok(SingularityPoint {
                x,
                density,
                ratio: density / (-x.ln()) / c,
            })
        })
        .collect()
}

/// `∫ p_T` over the real line, split at 0 and integrated on each half by the
/// exp-sinh rule, which absorbs the integrable singularity at 0 for `r <= 1`.
pub fn total_mass(q: &ChiSqDiffParams, ctrl: &SeriesControl) -> Result<f64> {
    let scale = 1.0 + q.r() + q.lambda1().max(q.lambda2());
    let tol = ctrl.rel_tol.max(1e-10);
    let mut failure = None;
    let mut side = |sign: f64| {
        exp_sinh(
            |t| match ncx2diff_pdf(sign * t, q, ctrl) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            scale,
            tol,
        )
    };
    let right = side(1.0)?.value;
    let left = side(-1.0)?.value;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(left + right)
}

// ---------------------------------------------------------------------------
// Sums of products

/// Density of `S_n` at `y`.
///
/// `ρ = 0` rescales the difference density, `ρ = ±1` shifts and scales a
/// single noncentral chi-square, and the general case convolves the two
/// scaled noncentral chi-square densities numerically.
pub fn sum_pdf(y: f64, p: &ProductNormalParams, ctrl: &SeriesControl) -> Result<f64> {
    ctrl.validate()?;
    if !y.is_finite() {
        return domain(format!("density argument must be finite, got {y}"));
    }
    let rep = p.to_chisq_diff();
    repr_pdf(y, &rep, ctrl)
}

/// Density of `scale_plus V1 - scale_minus V2 + shift`.
pub fn repr_pdf(y: f64, rep: &ChiSqDiffRepr, ctrl: &SeriesControl) -> Result<f64> {
    let (a, b, r) = (rep.scale_plus, rep.scale_minus, rep.r);
    let y = y - rep.shift;
    if b == 0.0 {
        if y < 0.0 {
            return Ok(0.0);
        }
        return ncx2_pdf(y / a, r, rep.lambda_plus).map(|v| v / a);
    }
    if a == 0.0 {
        if y > 0.0 {
            return Ok(0.0);
        }
        return ncx2_pdf(-y / b, r, rep.lambda_minus).map(|v| v / b);
    }
    if a == b {
        let q = rep.chisq_diff_params();
        return ncx2diff_pdf(y / a, &q, ctrl).map(|v| v / a);
    }
    if y == 0.0 && r <= 1.0 {
        return Err(Error::Singular { x: y + rep.shift });
    }
    // p(y) = ∫_{u >= max(0, y)} f1(u/a) f2((u - y)/b) du / (a b)
    let lo = y.max(0.0);
    let ln_ab = (a * b).ln();
    let scale = (a.max(b) * (1.0 + r)).max(f64::MIN_POSITIVE);
    let tol = ctrl.rel_tol.max(1e-11);
    let est = exp_sinh(
        |w| {
            // lo - y is exactly 0 or -y, so tiny w survives next to the singular endpoint.
            let l1 = ln_ncx2_pdf((lo + w) / a, r, rep.lambda_plus);
            let l2 = ln_ncx2_pdf(((lo - y) + w) / b, r, rep.lambda_minus);
            match (l1, l2) {
                (Ok(l1), Ok(l2)) => (l1 + l2 - ln_ab).exp(),
                _ => 0.0,
            }
        },
        0.0,
        scale,
        tol,
    )?;
    Ok(est.value)
}

// ---------------------------------------------------------------------------
// Characteristic functions

/// A characteristic-function value at frequency `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfPoint {
    pub t: f64,
    pub re: f64,
    pub im: f64,
}

impl CfPoint {
    pub fn new(t: f64, value: Complex64) -> Self {
        CfPoint {
            t,
            re: value.re,
            im: value.im,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `ln φ` of `χ'²_r(λ)`: `-(r/2) Log(1 - 2it) + iλt / (1 - 2it)`.
pub fn log_char_fn_ncx2(t: f64, r: f64, lambda: f64) -> Complex64 {
    let d = Complex64::new(1.0, -2.0 * t);
    -0.5 * r * d.ln() + Complex64::new(0.0, lambda * t) / d
}

pub fn char_fn_ncx2(t: f64, r: f64, lambda: f64) -> Complex64 {
    log_char_fn_ncx2(t, r, lambda).exp()
}

/// Characteristic function of `T = V1 - V2`.
pub fn char_fn_diff(t: f64, q: &ChiSqDiffParams) -> Complex64 {
    (log_char_fn_ncx2(t, q.r(), q.lambda1()) + log_char_fn_ncx2(-t, q.r(), q.lambda2())).exp()
}

/// `ln φ_Z` for a single product, continuous in `t`: the denominator
/// `D = 1 + (1 - ρ²) u² - 2iρu` has positive real part, so the principal
/// logarithm never crosses its branch cut.
fn log_char_fn_product(t: f64, p: &ProductNormalParams) -> Complex64 {
    let (a, b) = p.standardized_means();
    let rho = p.rho();
    let u = p.s() * t;
    let d = Complex64::new(1.0 + (1.0 - rho * rho) * u * u, -2.0 * rho * u);
    let num = Complex64::new(-(a * a + b * b - 2.0 * rho * a * b) * u * u, 2.0 * a * b * u);
    -0.5 * d.ln() + num / (2.0 * d)
}

/// Characteristic function of one product `Z = XY` (`n` is ignored).
pub fn char_fn_product(t: f64, p: &ProductNormalParams) -> Complex64 {
    log_char_fn_product(t, p).exp()
}

/// `ln φ_{S_n}(t)` on the continuous branch.
pub fn log_char_fn_sum(t: f64, p: &ProductNormalParams) -> Complex64 {
    p.n() as f64 * log_char_fn_product(t, p)
}

/// Characteristic function of `S_n` from the `n`-th power of `φ_Z`.
pub fn char_fn_sum(t: f64, p: &ProductNormalParams) -> Complex64 {
    log_char_fn_sum(t, p).exp()
}

/// Characteristic function of `S_n` built from the two scaled noncentral
/// chi-square factors and the shift.
pub fn char_fn_sum_factored(t: f64, p: &ProductNormalParams) -> Complex64 {
    char_fn_repr(t, &p.to_chisq_diff())
}

/// Characteristic function of `scale_plus V1 - scale_minus V2 + shift`.
pub fn char_fn_repr(t: f64, rep: &ChiSqDiffRepr) -> Complex64 {
    let mut l = Complex64::new(0.0, rep.shift * t);
    if rep.scale_plus > 0.0 {
        l += log_char_fn_ncx2(rep.scale_plus * t, rep.r, rep.lambda_plus);
    }
    if rep.scale_minus > 0.0 {
        l += log_char_fn_ncx2(-rep.scale_minus * t, rep.r, rep.lambda_minus);
    }
    l.exp()
}

/// One factor `(1 + 4a²t²)^{-r/4} exp(-2λa²t² / (1 + 4a²t²))` of an envelope:
/// the exact modulus of the characteristic function of `a V`, `V ~ χ'²_r(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFactor {
    pub scale: f64,
    pub r: f64,
    pub lambda: f64,
}

/// A nonincreasing majorant of `|φ(t)|` on `t >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    ChiSquare(Vec<EnvelopeFactor>),
    Gaussian { sigma: f64 },
    Unknown,
}

impl Envelope {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Envelope::ChiSquare(fs) => fs
                .iter()
                .map(|f| {
                    let w = 4.0 * f.scale * f.scale * t * t;
                    (1.0 + w).powf(-0.25 * f.r) * (-0.5 * f.lambda * w / (1.0 + w)).exp()
                })
                .product(),
            Envelope::Gaussian { sigma } => (-0.5 * sigma * sigma * t * t).exp(),
            Envelope::Unknown => 1.0,
        }
    }

    /// `|φ(t)| = O(t^{-α})`; infinite for Gaussian decay.
    pub fn decay_exponent(&self) -> f64 {
        match self {
            Envelope::ChiSquare(fs) => fs.iter().map(|f| 0.5 * f.r).sum(),
            Envelope::Gaussian { .. } => f64::INFINITY,
            Envelope::Unknown => 0.0,
        }
    }

    /// Upper bound on `∫_t^∞ |φ(u)| du` for `t > 0`.
    pub fn tail_integral(&self, t: f64) -> f64 {
        match self {
            Envelope::ChiSquare(fs) => {
                let alpha = self.decay_exponent();
                if alpha <= 1.0 {
                    return f64::INFINITY;
                }
                // (1 + 4a²u²)^{-r/4} <= (2au)^{-r/2}; the exponential factor
                // decreases in u, so its value at t bounds it on [t, ∞).
                let mut ln_c = (1.0 - alpha) * t.ln() - (alpha - 1.0).ln();
                for f in fs {
                    let w = 4.0 * f.scale * f.scale * t * t;
                    ln_c += -0.5 * f.r * (2.0 * f.scale).ln() - 0.5 * f.lambda * w / (1.0 + w);
                }
                ln_c.exp()
            }
            Envelope::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                (-0.5 * s2 * t * t).exp() / (s2 * t)
            }
            Envelope::Unknown => f64::INFINITY,
        }
    }

    /// Natural frequency unit.
    fn unit(&self) -> f64 {
        match self {
            Envelope::ChiSquare(fs) => {
                let a = fs.iter().map(|f| f.scale).fold(0.0, f64::max);
                if a > 0.0 {
                    0.5 / a
                } else {
                    1.0
                }
            }
            Envelope::Gaussian { sigma } => 1.0 / sigma,
            Envelope::Unknown => 1.0,
        }
    }
}

/// A characteristic function that can be numerically inverted.
pub trait CharacteristicFunction {
    fn eval(&self, t: f64) -> Complex64;

    fn envelope(&self) -> Envelope;

    /// Linear phase rate `c` such that `e^{-ict} φ(t)` varies slowly for
    /// large `t` (a location shift).
    fn drift(&self) -> f64 {
        0.0
    }
}

/// `χ'²_r(λ)`.
#[derive(Debug, Clone, Copy)]
pub struct Ncx2Cf {
    pub r: f64,
    pub lambda: f64,
}

impl CharacteristicFunction for Ncx2Cf {
    fn eval(&self, t: f64) -> Complex64 {
        char_fn_ncx2(t, self.r, self.lambda)
    }

    fn envelope(&self) -> Envelope {
        Envelope::ChiSquare(vec![EnvelopeFactor {
            scale: 1.0,
            r: self.r,
            lambda: self.lambda,
        }])
    }
}

/// `T = V1 - V2`.
#[derive(Debug, Clone, Copy)]
pub struct DiffCf(pub ChiSqDiffParams);

impl CharacteristicFunction for DiffCf {
    fn eval(&self, t: f64) -> Complex64 {
        char_fn_diff(t, &self.0)
    }

    fn envelope(&self) -> Envelope {
        let q = &self.0;
        Envelope::ChiSquare(vec![
            EnvelopeFactor {
                scale: 1.0,
                r: q.r(),
                lambda: q.lambda1(),
            },
            EnvelopeFactor {
                scale: 1.0,
                r: q.r(),
                lambda: q.lambda2(),
            },
        ])
    }
}

/// `S_n`, evaluated by the direct power formula.
#[derive(Debug, Clone, Copy)]
pub struct SumCf(pub ProductNormalParams);

impl CharacteristicFunction for SumCf {
    fn eval(&self, t: f64) -> Complex64 {
        char_fn_sum(t, &self.0)
    }

    fn envelope(&self) -> Envelope {
        let rep = self.0.to_chisq_diff();
        let mut fs = Vec::with_capacity(2);
        if rep.scale_plus > 0.0 {
            fs.push(EnvelopeFactor {
                scale: rep.scale_plus,
                r: rep.r,
                lambda: rep.lambda_plus,
            });
        }
        if rep.scale_minus > 0.0 {
            fs.push(EnvelopeFactor {
                scale: rep.scale_minus,
                r: rep.r,
                lambda: rep.lambda_minus,
            });
        }
        Envelope::ChiSquare(fs)
    }

    fn drift(&self) -> f64 {
        self.0.to_chisq_diff().shift
    }
}

/// Characteristic-function values on a grid.
pub fn cf_grid(cf: &dyn CharacteristicFunction, ts: &[f64]) -> Vec<CfPoint> {
    ts.iter().map(|&t| CfPoint::new(t, cf.eval(t))).collect()
}

const INVERSION_MAX_HALF_PERIODS: usize = 400;
const INVERSION_MAX_PIECES: usize = 20_000;

/// Density at `x` by Fourier inversion, `p(x) = (1/π) ∫_0^∞ Re(e^{-itx} φ(t)) dt`.
///
/// The target is an absolute error of `ctrl.abs_tol`. If the envelope tail
/// `(1/π) ∫_T^∞ |φ|` falls below half of it at a moderate `T`, the integral
/// is truncated there. Otherwise the range beyond a knee `T0` is split into
/// half periods of `e^{-i(x - c)t}` (`c` the drift) and the partial sums are
/// accelerated with Wynn's epsilon algorithm. At `x = c` with a
/// non-integrable envelope the density is infinite and [`Error::Singular`]
/// is returned.
pub fn cf_inversion_pdf(x: f64, cf: &dyn CharacteristicFunction, ctrl: &SeriesControl) -> Result<f64> {
    ctrl.validate()?;
    if !x.is_finite() {
        return domain(format!("density argument must be finite, got {x}"));
    }
    let tol = ctrl.abs_tol;
    let env = cf.envelope();
    let unit = env.unit();
    let omega = (x - cf.drift()).abs();
    let f = |t: f64| (Complex64::from_polar(1.0, -x * t) * cf.eval(t)).re / PI;

    // Direct truncation when the tail bound is reachable.
    let cap = 2000.0 * unit;
    let mut t_cut = unit;
    while t_cut <= cap && env.tail_integral(t_cut) / PI > 0.5 * tol {
        t_cut *= 2.0;
    }
    if t_cut <= cap {
        let pieces = pieces_for(t_cut, omega, unit);
        let est = adaptive(f, 0.0, t_cut, 0.25 * tol, 0.0, pieces, pieces + 4000)?;
        return Ok(est.value);
    }

    // Knee: where the envelope has dropped to a percent, within 50 units.
    let mut knee = unit;
    while knee < 50.0 * unit && env.at(knee) > 1e-2 {
        knee *= 2.0;
    }

    if omega * unit < 1e-12 {
        if env.decay_exponent() <= 1.0 {
            return Err(Error::Singular { x });
        }
        let head = adaptive(f, 0.0, knee, 0.25 * tol, 0.0, pieces_for(knee, 0.0, unit), 4000)?;
        let tail = exp_sinh(f, knee, knee, 1e-10)?;
        let err = head.error + tail.error;
        if err > tol {
            return Err(Error::InversionAccuracy {
                achieved: err,
                requested: tol,
            });
        }
        return Ok(head.value + tail.value);
    }

    let half = PI / omega;
    let t0 = (knee / half).ceil().max(1.0) * half;
    let head = adaptive(f, 0.0, t0, 0.1 * tol, 0.0, pieces_for(t0, omega, unit), INVERSION_MAX_PIECES + 4000)?;
    let mut partial = vec![head.value];
    let mut sum = head.value;
    let mut quad_err = head.error;
    let mut best_err = f64::INFINITY;
    for k in 0..INVERSION_MAX_HALF_PERIODS {
        let lo = t0 + k as f64 * half;
        let piece = adaptive(f, lo, lo + half, 1e-3 * tol, 0.0, 1, 200)?;
        sum += piece.value;
        quad_err += piece.error;
        partial.push(sum);
        if env.tail_integral(lo + half) / PI <= 0.5 * tol {
            return Ok(sum);
        }
        if partial.len() >= 8 {
            let (value, err) = wynn_epsilon(&partial);
            best_err = best_err.min(err + quad_err);
            if err + quad_err <= 0.5 * tol {
                return Ok(value);
            }
        }
    }
    Err(Error::InversionAccuracy {
        achieved: best_err,
        requested: tol,
    })
}

fn pieces_for(length: f64, omega: f64, unit: f64) -> usize {
    let by_phase = (length * omega / PI).ceil();
    let by_scale = (length / unit).ceil();
    (by_phase.max(by_scale).max(4.0) as usize).min(INVERSION_MAX_PIECES)
}
