use crate::error::{domain, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Taylor coefficients of `1/Γ(1+z)` about `z = 0`.
const RECIP_GAMMA_1P: [f64; 27] = [
    1.0,
    0.577_215_664_901_532_860_6,
    -0.655_878_071_520_253_881_1,
    -0.042_002_635_034_095_235_53,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_75,
    -0.009_621_971_527_876_973_562,
    0.007_218_943_246_663_099_542,
    -0.001_165_167_591_859_065_112,
    -0.000_215_241_674_114_950_972_8,
    0.000_128_050_282_388_116_186_2,
    -0.000_020_134_854_780_788_238_66,
    -1.250_493_482_142_670_657e-6,
    1.133_027_231_981_695_882e-6,
    -2.056_338_416_977_607_104e-7,
    6.116_095_104_481_415_818e-9,
    5.002_007_644_469_222_930e-9,
    -1.181_274_570_487_020_145e-9,
    1.043_426_711_691_100_511e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783e-14,
    -5.348_122_539_423_017_982e-15,
    1.226_778_628_238_260_790e-15,
    -1.181_259_301_697_458_770e-16,
    1.186_692_254_751_600_333e-18,
];

pub(crate) fn recip_gamma_1p_coefficients() -> &'static [f64] {
    &RECIP_GAMMA_1P
}

/// `1/Γ(1+z)` for `|z| <= 1/2`, summed from its Taylor series.
pub(crate) fn recip_gamma_1p(z: f64) -> f64 {
    RECIP_GAMMA_1P.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}

fn stirling(x: f64) -> f64 {
    // Bernoulli-number corrections B_{2k} / (2k (2k-1) x^{2k-1}).
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = C.iter().rev().fold(0.0, |acc, &c| acc * inv2 + c) * inv;
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("ln_gamma requires x > 0, got {x}"));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x >= 10.0 {
        return stirling(x);
    }
    if x < 0.5 {
        // Γ(x) = Γ(1+x)/x, and 1/Γ(1+x) has a convergent Taylor series on
        // |x| <= 1/2 that keeps full relative accuracy near x = 0.
        return -recip_gamma_1p(x).ln() - x.ln();
    }
    if x <= 1.5 {
        return -recip_gamma_1p(x - 1.0).ln();
    }
    // Shift down into [0.5, 1.5]: Γ(x) = (x-1)(x-2)...(y) Γ(y).
    let mut prod = 1.0;
    let mut y = x;
    while y > 1.5 {
        y -= 1.0;
        prod *= y;
    }
    prod.ln() - recip_gamma_1p(y - 1.0).ln()
}

/// Gamma function for `x > 0`. Overflows to infinity above ~171.6.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("gamma requires x > 0, got {x}"));
    }
    if (0.5..=1.5).contains(&x) {
        return Ok(1.0 / recip_gamma_1p(x - 1.0));
    }
    Ok(ln_gamma_unchecked(x).exp())
}

/// `ln(n!)`.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    const TABLE_LEN: usize = 32;
    static TABLE: std::sync::OnceLock<[f64; TABLE_LEN]> = std::sync::OnceLock::new();
    if n < TABLE_LEN {
        let t = TABLE.get_or_init(|| {
            let mut t = [0.0; TABLE_LEN];
            let mut f = 1.0f64;
            for (i, slot) in t.iter_mut().enumerate().skip(1) {
                f *= i as f64;
                *slot = f.ln();
            }
            t
        });
        t[n]
    } else {
        ln_gamma_unchecked(n as f64 + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_points() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert_eq!(ln_gamma(2.0).unwrap(), 0.0);
        let half = ln_gamma(0.5).unwrap();
        assert!((half - 0.572_364_942_924_700_1).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn factorials() {
        let mut f = 1.0f64;
        for n in 1..30usize {
            f *= n as f64;
            let g = ln_gamma(n as f64 + 1.0).unwrap();
            assert!((g - f.ln()).abs() <= 1e-13 * f.ln().max(1.0), "n={n}");
            assert!((ln_factorial(n) - f.ln()).abs() <= 1e-13 * f.ln().max(1.0));
        }
    }

    #[test]
    fn recurrence_holds_across_crossovers() {
        for &x in &[0.3, 0.5, 0.75, 1.4999, 1.5, 1.5001, 3.3, 9.5, 9.9999, 10.0, 25.0] {
            let lhs = ln_gamma(x + 1.0).unwrap();
            let rhs = ln_gamma(x).unwrap() + f64::ln(x);
            assert!((lhs - rhs).abs() < 2e-15 * lhs.abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn gamma_small_values() {
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-12);
    }
}
