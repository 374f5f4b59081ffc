use std::f64::consts::PI;

use super::gamma::{ln_gamma_unchecked, recip_gamma_1p};
use crate::error::{domain, Error, Result};

const RESCALE: f64 = 1e250;
const LN_RESCALE: f64 = 575.646_273_248_511_4; // ln(1e250)
const MAX_ITER: usize = 100_000;

/// `ln I_nu(x)` for `nu > -1`, `x >= 0`.
///
/// Power series `sum (x/2)^{2k+nu} / (k! Γ(nu+k+1))`. All terms are positive
/// for `nu > -1`, so the only hazard is overflow, handled by rescaling.
/// For `x > 500` and `x > 2 nu²` the large-argument expansion is used instead.
pub fn log_bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("bessel_i requires x >= 0, got {x}"));
    }
    if !(nu > -1.0) {
        return domain(format!("bessel_i requires nu > -1, got {nu}"));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            0.0
        } else if nu > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
    }
    if x > ASYMPTOTIC_MIN && x > 2.0 * nu * nu {
        if let Some(v) = log_bessel_i_large(nu, x) {
            return Ok(v);
        }
    }
    let y = 0.25 * x * x;
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut log_scale = 0.0;
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = k as f64;
        let ratio = y / (kf * (nu + kf));
        term *= ratio;
        sum += term;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            log_scale += LN_RESCALE;
        }
        if ratio < 0.5 && term <= 1e-17 * sum {
            break;
        }
        if k > MAX_ITER {
            return Err(Error::NonConvergence {
                terms: k,
                tail_bound: term / sum,
            });
        }
    }
    Ok(nu * (0.5 * x).ln() - ln_gamma_unchecked(nu + 1.0) + sum.ln() + log_scale)
}

const ASYMPTOTIC_MIN: f64 = 500.0;

/// `ln I_nu(x) ≈ x - ln(2πx)/2 + ln Σ (-1)^k a_k(nu) / x^k` with
/// `a_k = Π_{j<=k} (4nu² - (2j-1)²) / (k! 8^k)`. The companion `e^{-x}` term
/// is below double precision here. `None` if the terms stop shrinking first.
fn log_bessel_i_large(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0;
    for k in 1..200 {
        let j = (2 * k - 1) as f64;
        let next = -term * (mu - j * j) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() && next != 0.0 {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return Some(x - 0.5 * (2.0 * PI * x).ln() + sum.ln());
        }
    }
    None
}

/// Modified Bessel function of the first kind, `I_nu(x)`.
///
/// Accepts `nu > -1`; the series is valid there although the usual
/// contract is `nu >= 0`.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    log_bessel_i(nu, x).map(f64::exp)
}

/// Temme's series for `K_mu(x)`, `K_{mu+1}(x)` with `|mu| <= 1/2`, `x <= 2`.
fn temme_small_x(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < 1e-15 {
        1.0
    } else {
        pimu / pimu.sin()
    };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < 1e-15 { 1.0 } else { e.sinh() / e };
    let gampl = recip_gamma_1p(mu); // 1/Γ(1+mu)
    let gammi = recip_gamma_1p(-mu); // 1/Γ(1-mu)
    let (gam1, gam2) = temme_gammas(mu, gampl, gammi);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu * mu);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// `gam1 = (1/Γ(1-mu) - 1/Γ(1+mu)) / (2 mu)`, `gam2 = (1/Γ(1-mu) + 1/Γ(1+mu)) / 2`.
fn temme_gammas(mu: f64, gampl: f64, gammi: f64) -> (f64, f64) {
    // gam1 from the odd Taylor coefficients directly, avoiding the 0/0 at mu = 0.
    let mut gam1 = 0.0;
    let mut pow = 1.0;
    let m2 = mu * mu;
    let coeffs = super::gamma::recip_gamma_1p_coefficients();
    let mut k = 1;
    while k < coeffs.len() {
        gam1 -= coeffs[k] * pow;
        pow *= m2;
        k += 2;
    }
    (gam1, 0.5 * (gammi + gampl))
}

/// Steed's continued fraction for `K_mu(x) e^x`, `K_{mu+1}(x) e^x`, `x > 2`.
fn steed_large_x(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut c = a1;
    let mut q = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0 ;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let kmu = (PI / (2.0 * x)).sqrt() / s;
    let kmu1 = kmu * (mu + x + 0.5 - h) / x;
    (kmu, kmu1)
}

/// Ladder over `ln K_{nu0 + k}(x)`, `k = 0, 1, 2, ...`, built by forward
/// recurrence `K_{v+1} = K_{v-1} + (2v/x) K_v`, which is stable upward.
#[derive(Debug, Clone)]
pub struct BesselKLadder {
    x: f64,
    order: f64,
    lo: f64,
    hi: f64,
    log_scale: f64,
}

impl BesselKLadder {
    pub fn new(nu0: f64, x: f64) -> Result<Self> {
        if !(x > 0.0) {
            return domain(format!("bessel_k requires x > 0, got {x}"));
        }
        if !nu0.is_finite() {
            return domain(format!("bessel_k requires finite order, got {nu0}"));
        }
        // K_{nu0} and K_{nu0+1} from the base pair at |mu| <= 1/2.
        let l0 = log_bessel_k(nu0, x)?;
        let l1 = log_bessel_k(nu0 + 1.0, x)?;
        let log_scale = l0.max(l1);
        Ok(BesselKLadder {
            x,
            order: nu0,
            lo: (l0 - log_scale).exp(),
            hi: (l1 - log_scale).exp(),
            log_scale,
        })
    }

    /// Current order.
    pub fn order(&self) -> f64 {
        self.order
    }

    /// `ln K_order(x)` at the current rung.
    pub fn current(&self) -> f64 {
        self.lo.ln() + self.log_scale
    }

    /// Step one order up.
    pub fn advance(&mut self) {
        let v = self.order + 1.0;
        let next = self.lo + 2.0 * v / self.x * self.hi;
        self.lo = self.hi;
        self.hi = next;
        self.order = v;
        if self.hi > RESCALE {
            self.lo /= RESCALE;
            self.hi /= RESCALE;
            self.log_scale += LN_RESCALE;
        }
    }
}

/// `ln K_nu(x)` for real `nu` and `x > 0`. Symmetric in `nu`.
pub fn log_bessel_k(nu: f64, x: f64) -> Result<f64> {
    let (m, log_scale) = bessel_k_scaled(nu, x)?;
    Ok(m.ln() + log_scale)
}

/// `K_nu(x)` as mantissa and log-scale.
fn bessel_k_scaled(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return domain(format!("bessel_k requires x > 0, got {x}"));
    }
    if !nu.is_finite() {
        return domain(format!("bessel_k requires finite order, got {nu}"));
    }
    let nu = nu.abs();
    let steps = (nu + 0.5).floor();
    let mu = nu - steps;
    let (mut lo, mut hi, mut log_scale) = if x <= 2.0 {
        let (a, b) = temme_small_x(mu, x);
        (a, b, 0.0)
    } else {
        let (a, b) = steed_large_x(mu, x);
        (a, b, -x)
    };
    let n = steps as usize;
    for i in 1..=n {
        let next = lo + 2.0 * (mu + i as f64) / x * hi;
        lo = hi;
        hi = next;
        if hi > RESCALE {
            lo /= RESCALE;
            hi /= RESCALE;
            log_scale += LN_RESCALE;
        }
    }
    Ok((lo, log_scale))
}

/// Modified Bessel function of the second kind, `K_nu(x)`, `x > 0`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let (m, log_scale) = bessel_k_scaled(nu, x)?;
    Ok(m * log_scale.exp())
}
