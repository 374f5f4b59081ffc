use std::f64::consts::FRAC_PI_2;

use super::gamma::ln_gamma_unchecked;
use crate::control::SeriesControl;
use crate::error::{domain, Error, Result};
use crate::numeric::is_nonpositive_integer;

const RESCALE: f64 = 1e250;
const LN_RESCALE: f64 = 575.646_273_248_511_4;

/// A real number held as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signed {
    pub ln_abs: f64,
    /// -1, 0 or 1.
    pub sign: f64,
}

impl Signed {
    pub fn positive(ln_abs: f64) -> Self {
        Signed { ln_abs, sign: 1.0 }
    }

    pub fn zero() -> Self {
        Signed {
            ln_abs: f64::NEG_INFINITY,
            sign: 0.0,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Signed::zero()
        } else {
            Signed {
                ln_abs: v.abs().ln(),
                sign: v.signum(),
            }
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    fn scale_ln(self, ln_factor: f64) -> Self {
        Signed {
            ln_abs: self.ln_abs + ln_factor,
            ..self
        }
    }
}

/// Series value with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOutcome {
    pub value: Signed,
    pub terms: usize,
    /// Bound on the neglected tail relative to the magnitude of the sum.
    pub tail_bound: f64,
}

/// Power series `sum (a)_k x^k / ((b)_k k!)`, sign-tracked and rescaled.
fn kummer_series(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<SeriesOutcome> {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut largest = 1.0f64;
    let mut log_scale = 0.0;
    let mut k = 0usize;
    // Cancellation between alternating terms is reported, not hidden.
    let finish = |sum: f64, largest: f64, log_scale: f64, k: usize, tail: f64| {
        let rounding = f64::EPSILON * largest * (k as f64).sqrt() / sum.abs();
        let rel = tail + rounding;
        if rounding > ctrl.rel_tol {
            return Err(Error::NonConvergence { terms: k, tail_bound: rel });
        }
        Ok(SeriesOutcome {
            value: Signed::from_value(sum).scale_ln(log_scale),
            terms: k,
            tail_bound: rel,
        })
    };
    loop {
        let kf = k as f64;
        let ratio = (a + kf) * x / ((b + kf) * (kf + 1.0));
        term *= ratio;
        k += 1;
        if term == 0.0 {
            // a is a nonpositive integer: the series terminates exactly.
            return finish(sum, largest, log_scale, k, 0.0);
        }
        sum += term;
        largest = largest.max(term.abs());
        if sum.abs() > RESCALE || largest > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            largest /= RESCALE;
            log_scale += LN_RESCALE;
        }
        // Tail bound once all later ratios share a sign and stay below q < 1.
        let next = k as f64;
        if a + next > 0.0 && b + next > 0.0 {
            let q = if a <= b {
                x.abs() / (next + 1.0)
            } else {
                ((a + next) * x / ((b + next) * (next + 1.0))).abs()
            };
            if q < 1.0 {
                let next_term = (term * (a + next) * x / ((b + next) * (next + 1.0))).abs();
                let tail = next_term / (1.0 - q);
                let rel = if sum == 0.0 { f64::INFINITY } else { tail / sum.abs() };
                if rel <= 1e-17 {
                    return finish(sum, largest, log_scale, k, rel);
                }
                if k >= ctrl.max_terms {
                    let abs_tail = tail * log_scale.exp();
                    if rel <= ctrl.rel_tol || abs_tail <= ctrl.abs_tol {
                        return finish(sum, largest, log_scale, k, rel);
                    }
                    return Err(Error::NonConvergence {
                        terms: k,
                        tail_bound: rel,
                    });
                }
                continue;
            }
        }
        if k >= ctrl.max_terms {
            return Err(Error::NonConvergence {
                terms: k,
                tail_bound: f64::INFINITY,
            });
        }
    }
}

/// Kummer's function `M(a, b, x)` with explicit series control and
/// diagnostics. Negative `x` goes through `M(a,b,x) = e^x M(b-a,b,-x)`.
pub fn kummer_m_with(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<SeriesOutcome> {
    ctrl.validate()?;
    if !(a.is_finite() && b.is_finite() && x.is_finite()) {
        return domain(format!("kummer_m requires finite arguments, got ({a}, {b}, {x})"));
    }
    if is_nonpositive_integer(b) {
        return domain(format!("kummer_m undefined for nonpositive integer b = {b}"));
    }
    if x == 0.0 {
        return Ok(SeriesOutcome {
            value: Signed::positive(0.0),
            terms: 0,
            tail_bound: 0.0,
        });
    }
    if x < 0.0 && !is_nonpositive_integer(a) {
        let mut out = kummer_series(b - a, b, -x, ctrl)?;
        out.value = out.value.scale_ln(x);
        return Ok(out);
    }
    kummer_series(a, b, x, ctrl)
}

/// `ln |M(a, b, x)|` with sign, safe for large `x`.
pub fn log_kummer_m(a: f64, b: f64, x: f64) -> Result<Signed> {
    kummer_m_with(a, b, x, &SeriesControl::default()).map(|o| o.value)
}

/// Confluent hypergeometric function of the first kind, `M(a, b, x)`.
pub fn kummer_m(a: f64, b: f64, x: f64) -> Result<f64> {
    log_kummer_m(a, b, x).map(|s| s.value())
}

/// `e^{-x} M(a, b, x)` for `x >= 0`, by Kummer's transformation
/// `M(b - a, b, -x)`. When `b - a` is a nonpositive integer this is a finite
/// sum of positive terms.
pub fn kummer_m_scaled(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("kummer_m_scaled requires x >= 0, got {x}"));
    }
    if is_nonpositive_integer(b) {
        return domain(format!("kummer_m undefined for nonpositive integer b = {b}"));
    }
    let c = b - a;
    if is_nonpositive_integer(c) {
        let n = (-c) as usize;
        let mut term = 1.0;
        let mut sum = 1.0;
        for i in 0..n {
            let fi = i as f64;
            term *= (c + fi) * (-x) / ((b + fi) * (fi + 1.0));
            sum += term;
        }
        return Ok(sum);
    }
    let s = log_kummer_m(a, b, x)?;
    Ok(s.sign * (s.ln_abs - x).exp())
}

/// Terminating form of `U(-n, b, x) = x^n sum_s (-n)_s (-n-b+1)_s / s! (-1/x)^s`.
fn polynomial_u(a: f64, b: f64, x: f64) -> Signed {
    let n = (-a).round() as usize;
    let c = a - b + 1.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for s in 0..n {
        let sf = s as f64;
        term *= (a + sf) * (c + sf) / (sf + 1.0) * (-1.0 / x);
        sum += term;
    }
    Signed::from_value(sum).scale_ln(n as f64 * x.ln())
}

/// `ln` of `int_0^inf e^{-xt} t^{a-1} (1+t)^{b-a-1} dt / Γ(a)` for `a > 0`.
///
/// Exp-sinh substitution `t = t0 exp(pi/2 sinh s)` centred at the mode `t0` of
/// the integrand in `ln t`, trapezoid rule with step halving.
fn log_u_laplace(a: f64, b: f64, x: f64) -> Result<f64> {
    let c = x - b + 1.0;
    let disc = (c * c + 4.0 * a * x).sqrt();
    let t0 = if c > 0.0 {
        2.0 * a / (c + disc)
    } else {
        (disc - c) / (2.0 * x)
    };
    let ln_t0 = t0.ln();
    let e = b - a - 1.0;
    let h = |s: f64| -> f64 {
        let u = FRAC_PI_2 * s.sinh();
        let ln_t = ln_t0 + u;
        let t = ln_t.exp();
        let v = -x * t + a * ln_t + e * t.ln_1p() + (FRAC_PI_2 * s.cosh()).ln();
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let h0 = h(0.0);
    // The exponent is a sum of terms of this size, which sets the noise floor.
    let magnitude = (x * t0).abs() + (a * ln_t0).abs() + (e * t0.ln_1p()).abs() + 1.0;
    let tol = (8.0 * f64::EPSILON * magnitude).max(1e-15);
    let cutoff = -46.0; // e^-46 ~ 1e-20 relative to the peak
    let mut step = 0.5;
    let extent = |dir: f64| -> f64 {
        let mut k = 1;
        loop {
            let s = dir * k as f64 * 0.5;
            if h(s) - h0 < cutoff || k >= 14 {
                return s.abs() + 0.5;
            }
            k += 1;
        }
    };
    let s_lo = -extent(-1.0);
    let s_hi = extent(1.0);
    let mut sum = 0.0;
    let mut k = (s_lo / step).ceil() as i64;
    while k as f64 * step <= s_hi {
        sum += (h(k as f64 * step) - h0).exp();
        k += 1;
    }
    let mut estimate = sum * step;
    for _ in 0..10 {
        step *= 0.5;
        let mut k = (s_lo / step).ceil() as i64;
        if k % 2 == 0 {
            k += 1;
        }
        while k as f64 * step <= s_hi {
            sum += (h(k as f64 * step) - h0).exp();
            k += 2;
        }
        let next = sum * step;
        let converged = (next - estimate).abs() <= tol * next;
        estimate = next;
        if converged {
            return Ok(h0 + estimate.ln() - ln_gamma_unchecked(a));
        }
    }
    Err(Error::NonConvergence {
        terms: 11,
        tail_bound: f64::NAN,
    })
}

/// `ln |U(a, b, x)|` with sign, for real `a`, `b` and `x > 0`.
pub fn log_tricomi_u(a: f64, b: f64, x: f64) -> Result<Signed> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("tricomi_u requires finite x > 0, got {x}"));
    }
    if !(a.is_finite() && b.is_finite()) {
        return domain(format!("tricomi_u requires finite a, b, got ({a}, {b})"));
    }
    if is_nonpositive_integer(a) {
        return Ok(polynomial_u(a, b, x));
    }
    let c = a - b + 1.0;
    if is_nonpositive_integer(c) {
        return Ok(polynomial_u(c, 2.0 - b, x).scale_ln((1.0 - b) * x.ln()));
    }
    if b < 1.0 {
        // U(a, b, x) = x^{1-b} U(a-b+1, 2-b, x) lands in b >= 1.
        return Ok(log_tricomi_u(c, 2.0 - b, x)?.scale_ln((1.0 - b) * x.ln()));
    }
    if a > 0.0 {
        return Ok(Signed::positive(log_u_laplace(a, b, x)?));
    }
    // a < 0, not an integer: recur downward in a from two positive values,
    // U(c-1) = (2c - b + x) U(c) - c (c - b + 1) U(c+1).
    let steps = (-a).ceil() as usize;
    let top = a + steps as f64;
    let l1 = log_u_laplace(top + 1.0, b, x)?;
    let l0 = log_u_laplace(top, b, x)?;
    let mut log_scale = l0.max(l1);
    let mut upper = (l1 - log_scale).exp();
    let mut cur = (l0 - log_scale).exp();
    // Running absolute error bounds on `upper` and `cur`.
    let mut e_upper = 1e-14 * upper;
    let mut e_cur = 1e-14 * cur;
    let mut cpar = top;
    for _ in 0..steps {
        let p = 2.0 * cpar - b + x;
        let q = cpar * (cpar - b + 1.0);
        let next = p * cur - q * upper;
        let e_next = p.abs() * e_cur + q.abs() * e_upper + f64::EPSILON * next.abs();
        upper = cur;
        e_upper = e_cur;
        cur = next;
        e_cur = e_next;
        cpar -= 1.0;
        let m = cur.abs().max(upper.abs());
        if m > RESCALE || (m < 1.0 / RESCALE && m > 0.0) {
            cur /= m;
            upper /= m;
            e_cur /= m;
            e_upper /= m;
            log_scale += m.ln();
        }
    }
    let rel = e_cur / cur.abs();
    if !(rel <= 1e-10) {
        return Err(Error::NonConvergence {
            terms: steps,
            tail_bound: rel,
        });
    }
    Ok(Signed::from_value(cur).scale_ln(log_scale))
}

/// Confluent hypergeometric function of the second kind, `U(a, b, x)`.
pub fn tricomi_u(a: f64, b: f64, x: f64) -> Result<f64> {
    log_tricomi_u(a, b, x).map(|s| s.value())
}

/// `ln [x^{b-1} U(a, b, x)]` for `a > 0`, including the `x = 0` limit
/// `Γ(b-1)/Γ(a)` when `b > 1`.
///
/// `x^{b-1} U(a, b, x) = U(a-b+1, 2-b, x)`, the form in which `U` enters the
/// difference density.
pub(crate) fn log_reflected_u(a: f64, b: f64, x: f64) -> Result<f64> {
    debug_assert!(a > 0.0);
    if x == 0.0 {
        if b > 1.0 {
            return Ok(ln_gamma_unchecked(b - 1.0) - ln_gamma_unchecked(a));
        }
        return Err(Error::Singular { x });
    }
    Ok((b - 1.0) * x.ln() + log_u_laplace(a, b, x)?)
}

/// Ladder over `V_b = x^{b-1} U(a, b, x)` for `b = b0, b0 + 1, ...` at fixed
/// `a > 0`, by `V_{b+1} = (b - 1 + x) V_b - (b - a - 1) x V_{b-1}`. `U` is the
/// dominant solution of this recurrence as `b` grows, so the forward
/// direction is stable.
#[derive(Debug, Clone)]
pub(crate) struct ReflectedULadder {
    a: f64,
    x: f64,
    b: f64,
    cur: f64,
    next: f64,
    log_scale: f64,
}

impl ReflectedULadder {
    pub fn new(a: f64, b0: f64, x: f64) -> Result<Self> {
        let l0 = log_reflected_u(a, b0, x)?;
        let l1 = log_reflected_u(a, b0 + 1.0, x)?;
        let log_scale = l0.max(l1);
        Ok(ReflectedULadder {
            a,
            x,
            b: b0,
            cur: (l0 - log_scale).exp(),
            next: (l1 - log_scale).exp(),
            log_scale,
        })
    }

    /// `ln V_b` at the current `b`.
    pub fn current(&self) -> f64 {
        self.cur.ln() + self.log_scale
    }

    pub fn advance(&mut self) {
        // cur = V_b, next = V_{b+1}; produce V_{b+2}.
        let b1 = self.b + 1.0;
        let after = (b1 - 1.0 + self.x) * self.next - (b1 - self.a - 1.0) * self.x * self.cur;
        self.cur = self.next;
        self.next = after;
        self.b = b1;
        if self.next > RESCALE {
            self.cur /= RESCALE;
            self.next /= RESCALE;
            self.log_scale += LN_RESCALE;
        }
    }
}
