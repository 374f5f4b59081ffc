//! Moments and cumulants of `χ'²_r(λ)`, of `T = V1 - V2` and of `S_n`.
//!
//! Raw moments come from the closed hypergeometric sums. Central moments are
//! rebuilt from the exact cumulants with the mean removed, which avoids the
//! cancellation of the raw-to-central binomial transform.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numeric::KahanSum;
use crate::repr::{ChiSqDiffParams, ChiSqDiffRepr, ProductNormalParams};
use crate::specfun::{kummer_m_scaled, ln_factorial, ln_gamma};

/// Highest moment order accepted by the moment-set builders.
pub const MAX_ORDER: usize = 20;

/// Magnitude ratio below which a signed sum is reported as cancelled.
pub const CANCELLATION_RATIO: f64 = 1e-8;

/// Moments, cumulants and shape summaries up to order `K`.
///
/// `raw[i]` and `cumulants[i]` hold order `i + 1`; `central[i]` holds order
/// `i + 2` (the first central moment is always zero and is omitted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub raw: Vec<f64>,
    pub central: Vec<f64>,
    pub cumulants: Vec<f64>,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl MomentSet {
    /// Assembles a set from raw moments and cumulants of equal length
    /// `K >= 2`; the shape summaries use `κ3` and `κ4` whatever `K` is.
    fn from_parts(raw: Vec<f64>, cumulants: Vec<f64>, kappa3: f64, kappa4: f64) -> Self {
        let mut centred = cumulants.clone();
        centred[0] = 0.0;
        let central = moments_from_cumulants(&centred)[1..].to_vec();
        let variance = cumulants[1];
        MomentSet {
            skewness: kappa3 / variance.powf(1.5),
            excess_kurtosis: kappa4 / (variance * variance),
            raw,
            central,
            cumulants,
            variance,
        }
    }

    pub fn order(&self) -> usize {
        self.raw.len()
    }
}

/// A signed finite sum together with its largest term, for cancellation
/// diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub value: f64,
    pub largest_term: f64,
}

impl MomentValue {
    /// True when `|value|` is below [`CANCELLATION_RATIO`] times the largest
    /// term, so that few significant digits survive.
    pub fn cancellation_warning(&self) -> bool {
        self.value.abs() < CANCELLATION_RATIO * self.largest_term
    }
}

fn check_order(k: usize, min: usize) -> Result<()> {
    if k < min || k > MAX_ORDER {
        return domain(format!("moment order must lie in [{min}, {MAX_ORDER}], got {k}"));
    }
    Ok(())
}

fn check_ncx2(r: f64, lambda: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("degrees of freedom must be positive, got {r}"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return domain(format!("noncentrality must be nonnegative, got {lambda}"));
    }
    Ok(())
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln(Γ(m + r/2)/Γ(r/2) · e^{-λ/2} M(m + r/2, r/2, λ/2))`.
fn ln_ncx2_factor(m: usize, r: f64, lambda: f64) -> Result<f64> {
    let h = 0.5 * r;
    let a = m as f64 + h;
    Ok(ln_gamma(a)? - ln_gamma(h)? + kummer_m_scaled(a, h, 0.5 * lambda)?.ln())
}

/// `E[V^m]` for `V ~ χ'²_r(λ)`: `2^m e^{-λ/2} Γ(m + r/2)/Γ(r/2) M(m + r/2, r/2, λ/2)`.
pub fn ncx2_moment(m: usize, r: f64, lambda: f64) -> Result<f64> {
    check_ncx2(r, lambda)?;
    Ok((m as f64 * std::f64::consts::LN_2 + ln_ncx2_factor(m, r, lambda)?).exp())
}

/// `κ_k = 2^{k-1} (k-1)! (r + kλ)` for `V ~ χ'²_r(λ)`.
pub fn ncx2_cumulant(k: usize, r: f64, lambda: f64) -> f64 {
    assert!(k >= 1, "cumulant order starts at 1");
    let kf = k as f64;
    ((kf - 1.0) * std::f64::consts::LN_2 + ln_factorial(k - 1)).exp() * (r + kf * lambda)
}

/// Raw moments `μ'_1..μ'_K` from cumulants `κ_1..κ_K` by
/// `μ'_n = Σ_{i=1}^{n} C(n-1, i-1) κ_i μ'_{n-i}`.
pub fn moments_from_cumulants(cumulants: &[f64]) -> Vec<f64> {
    let k = cumulants.len();
    let mut mu = vec![1.0; k + 1];
    for n in 1..=k {
        let mut acc = KahanSum::default();
        let mut c = 1.0;
        for i in 1..=n {
            acc.add(c * cumulants[i - 1] * mu[n - i]);
            c = c * (n - i) as f64 / i as f64;
        }
        mu[n] = acc.value();
    }
    mu.remove(0);
    mu
}

/// Cumulants `κ_1..κ_K` from raw moments `μ'_1..μ'_K`, the inverse of
/// [`moments_from_cumulants`].
pub fn cumulants_from_moments(moments: &[f64]) -> Vec<f64> {
    let k = moments.len();
    let mut kappa = vec![0.0; k];
    for n in 1..=k {
        let mut acc = KahanSum::default();
        acc.add(moments[n - 1]);
        let mut c = 1.0;
        for i in 1..n {
            acc.add(-c * kappa[i - 1] * moments[n - i - 1]);
            c = c * (n - i) as f64 / i as f64;
        }
        kappa[n - 1] = acc.value();
    }
    kappa
}

/// All `K` raw moments of `χ'²_r(λ)` through the cumulant recursion.
///
/// Every term is positive, so this is an accurate route independent of the
/// hypergeometric closed form.
pub fn ncx2_moments_recursive(order: usize, r: f64, lambda: f64) -> Result<Vec<f64>> {
    check_ncx2(r, lambda)?;
    let kappa: Vec<f64> = (1..=order).map(|k| ncx2_cumulant(k, r, lambda)).collect();
    Ok(moments_from_cumulants(&kappa))
}

/// Sum of signed terms given as `(sign, ln|term|)`.
fn signed_sum(terms: impl Iterator<Item = (f64, f64)>) -> MomentValue {
    let mut acc = KahanSum::default();
    let mut largest: f64 = 0.0;
    for (sign, ln_abs) in terms {
        let v = ln_abs.exp();
        largest = largest.max(v);
        acc.add(sign * v);
    }
    MomentValue {
        value: acc.value(),
        largest_term: largest,
    }
}

/// `E[T^k]` from the closed binomial sum of hypergeometric products, with
/// the signs `(-1)^{k-j}` carried by the powers of `V2`.
pub fn diff_moment(k: usize, q: &ChiSqDiffParams) -> Result<f64> {
    Ok(diff_moment_value(k, q)?.value)
}

/// [`diff_moment`] with the largest term of the sum.
pub fn diff_moment_value(k: usize, q: &ChiSqDiffParams) -> Result<MomentValue> {
    let (r, l1, l2) = (q.r(), q.lambda1(), q.lambda2());
    let mut terms = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let ln_abs = k as f64 * std::f64::consts::LN_2
            + ln_binomial(k, j)
            + ln_ncx2_factor(j, r, l1)?
            + ln_ncx2_factor(k - j, r, l2)?;
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        terms.push((sign, ln_abs));
    }
    Ok(signed_sum(terms.into_iter()))
}

/// `κ_k(T) = 2^{k-1}(k-1)!((r + kλ1) + (-1)^k (r + kλ2))`.
pub fn diff_cumulant(k: usize, q: &ChiSqDiffParams) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    ncx2_cumulant(k, q.r(), q.lambda1()) + sign * ncx2_cumulant(k, q.r(), q.lambda2())
}

/// Raw, central, cumulant and shape summaries of `T` up to order `K >= 2`.
pub fn diff_moment_set(order: usize, q: &ChiSqDiffParams) -> Result<MomentSet> {
    check_order(order, 2)?;
    let raw = (1..=order).map(|k| diff_moment(k, q)).collect::<Result<Vec<_>>>()?;
    let cumulants = (1..=order).map(|k| diff_cumulant(k, q)).collect();
    Ok(MomentSet::from_parts(raw, cumulants, diff_cumulant(3, q), diff_cumulant(4, q)))
}

/// All `K` raw moments of `χ'²_r(λ)` with cumulants and shape summaries.
pub fn ncx2_moment_set(order: usize, r: f64, lambda: f64) -> Result<MomentSet> {
    check_order(order, 2)?;
    let raw = (1..=order).map(|m| ncx2_moment(m, r, lambda)).collect::<Result<Vec<_>>>()?;
    let cumulants = (1..=order).map(|k| ncx2_cumulant(k, r, lambda)).collect();
    Ok(MomentSet::from_parts(raw, cumulants, ncx2_cumulant(3, r, lambda), ncx2_cumulant(4, r, lambda)))
}

/// `E[S_n^k]`.
///
/// For `|ρ| < 1` this is the binomial sum over `(1+ρ)^j (ρ-1)^{k-j}` times the
/// hypergeometric moment factors of `V1` and `V2`, accumulated term by term
/// from log-magnitudes. For `ρ = ±1` it expands the shifted and scaled single
/// noncentral chi-square binomially.
pub fn sum_moment(k: usize, p: &ProductNormalParams) -> Result<MomentValue> {
    if k == 0 {
        return domain("moment order must be at least 1");
    }
    let rep = p.to_chisq_diff();
    if rep.is_degenerate() {
        return degenerate_moment(k, &rep);
    }
    let (n, rho, s) = (p.n() as f64, p.rho(), p.s());
    let (ln_up, ln_down) = ((1.0 + rho).ln(), (1.0 - rho).ln());
    let mut terms = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let ln_abs = k as f64 * s.ln()
            + ln_binomial(k, j)
            + j as f64 * ln_up
            + (k - j) as f64 * ln_down
            + ln_ncx2_factor(j, n, rep.lambda_plus)?
            + ln_ncx2_factor(k - j, n, rep.lambda_minus)?;
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        terms.push((sign, ln_abs));
    }
    Ok(signed_sum(terms.into_iter()))
}

fn degenerate_moment(k: usize, rep: &ChiSqDiffRepr) -> Result<MomentValue> {
    let (scale, lambda) = if rep.scale_minus == 0.0 {
        (rep.scale_plus, rep.lambda_plus)
    } else {
        (-rep.scale_minus, rep.lambda_minus)
    };
    let mut acc = KahanSum::default();
    let mut largest: f64 = 0.0;
    for j in 0..=k {
        let c = ln_binomial(k, j).exp();
        let t = c * scale.powi(j as i32) * ncx2_moment(j, rep.r, lambda)? * rep.shift.powi((k - j) as i32);
        largest = largest.max(t.abs());
        acc.add(t);
    }
    Ok(MomentValue {
        value: acc.value(),
        largest_term: largest,
    })
}

/// `κ_k(S_n) = (s^k/2)(k-1)!((1+ρ)^k(n + kλ+) + (-1)^k(1-ρ)^k(n + kλ-))`.
///
/// At `ρ = ±1` the collapsed component contributes nothing beyond the shift,
/// which enters `κ_1` only.
pub fn sum_cumulant(k: usize, p: &ProductNormalParams) -> Result<f64> {
    if k == 0 {
        return domain("cumulant order must be at least 1");
    }
    let rep = p.to_chisq_diff();
    let n = p.n() as f64;
    if rep.is_degenerate() {
        let (scale, lambda) = if rep.scale_minus == 0.0 {
            (rep.scale_plus, rep.lambda_plus)
        } else {
            (-rep.scale_minus, rep.lambda_minus)
        };
        let shift = if k == 1 { rep.shift } else { 0.0 };
        return Ok(scale.powi(k as i32) * ncx2_cumulant(k, n, lambda) + shift);
    }
    let (rho, s, kf) = (p.rho(), p.s(), k as f64);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let bracket = (1.0 + rho).powi(k as i32) * (n + kf * rep.lambda_plus)
        + sign * (1.0 - rho).powi(k as i32) * (n + kf * rep.lambda_minus);
    Ok(0.5 * s.powi(k as i32) * ln_factorial(k - 1).exp() * bracket)
}

/// Raw, central, cumulant and shape summaries of `S_n` up to order `K >= 2`.
pub fn sum_moment_set(order: usize, p: &ProductNormalParams) -> Result<MomentSet> {
    check_order(order, 2)?;
    let raw = (1..=order)
        .map(|k| sum_moment(k, p).map(|m| m.value))
        .collect::<Result<Vec<_>>>()?;
    let cumulants = (1..=order).map(|k| sum_cumulant(k, p)).collect::<Result<Vec<_>>>()?;
    Ok(MomentSet::from_parts(raw, cumulants, sum_cumulant(3, p)?, sum_cumulant(4, p)?))
}

/// `E[(a V1 - b V2 + c)^k]` expanded over the moments of `V1` and `V2`
/// obtained from the cumulant recursion. Independent of the hypergeometric
/// closed forms.
pub fn repr_moment_by_expansion(k: usize, rep: &ChiSqDiffRepr) -> Result<f64> {
    let m1 = ncx2_moments_recursive(k, rep.r, rep.lambda_plus)?;
    let m2 = ncx2_moments_recursive(k, rep.r, rep.lambda_minus)?;
    let moment = |m: &[f64], i: usize| if i == 0 { 1.0 } else { m[i - 1] };
    let mut acc = KahanSum::default();
    for i in 0..=k {
        for j in 0..=(k - i) {
            let l = k - i - j;
            let c = (ln_factorial(k) - ln_factorial(i) - ln_factorial(j) - ln_factorial(l)).exp();
            acc.add(
                c * rep.scale_plus.powi(i as i32)
                    * (-rep.scale_minus).powi(j as i32)
                    * rep.shift.powi(l as i32)
                    * moment(&m1, i)
                    * moment(&m2, j),
            );
        }
    }
    Ok(acc.value())
}

/// Cumulants `κ_1..κ_K` (`K <= 4`) as derivatives of `log φ(t) / i^k` at
/// `t = 0`, by Richardson-extrapolated central differences with base step `h`.
pub fn cumulants_from_log_cf(log_cf: impl Fn(f64) -> Complex64, order: usize, h: f64) -> Result<Vec<f64>> {
    if !(1..=4).contains(&order) {
        return domain(format!("finite-difference cumulants support orders 1..=4, got {order}"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return domain(format!("step must be positive, got {h}"));
    }
    let g = |t: f64| if t == 0.0 { Complex64::new(0.0, 0.0) } else { log_cf(t) };
    // Second-order central stencils for derivatives 1..4.
    let stencil = |k: usize, h: f64| -> Complex64 {
        match k {
            1 => (g(h) - g(-h)) / (2.0 * h),
            2 => (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h),
            3 => (g(2.0 * h) - 2.0 * g(h) + 2.0 * g(-h) - g(-2.0 * h)) / (2.0 * h.powi(3)),
            _ => (g(2.0 * h) - 4.0 * g(h) + 6.0 * g(0.0) - 4.0 * g(-h) + g(-2.0 * h)) / h.powi(4),
        }
    };
    let i_pow = [
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(1.0, 0.0),
    ];
    let mut out = Vec::with_capacity(order);
    for k in 1..=order {
        // Three levels remove the h^2 and h^4 error terms.
        let d0 = stencil(k, h);
        let d1 = stencil(k, 0.5 * h);
        let d2 = stencil(k, 0.25 * h);
        let r1 = (4.0 * d1 - d0) / 3.0;
        let r2 = (4.0 * d2 - d1) / 3.0;
        let d = (16.0 * r2 - r1) / 15.0;
        out.push((d / i_pow[k - 1]).re);
    }
    Ok(out)
}
