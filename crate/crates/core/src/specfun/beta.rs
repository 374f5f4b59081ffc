use super::gamma::ln_gamma_unchecked;
use crate::error::{domain, Error, Result};

const MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

/// `ln B(a, b)` for `a, b > 0`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("ln_beta requires a, b > 0, got ({a}, {b})"));
    }
    Ok(ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b))
}

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Evaluated by the modified Lentz continued fraction on whichever of
/// `I_x(a, b)` and `1 - I_{1-x}(b, a)` converges faster.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("reg_inc_beta requires a, b > 0, got ({a}, {b})"));
    }
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("reg_inc_beta requires 0 <= x <= 1, got {x}"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b)?;
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok((ln_front.exp() * continued_fraction(x, a, b)? / a).clamp(0.0, 1.0))
    } else {
        let upper = ln_front.exp() * continued_fraction(1.0 - x, b, a)? / b;
        Ok((1.0 - upper).clamp(0.0, 1.0))
    }
}

fn continued_fraction(x: f64, a: f64, b: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        terms: MAX_ITER,
        tail_bound: f64::NAN,
    })
}
