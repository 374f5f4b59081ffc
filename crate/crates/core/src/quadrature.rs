//! Numerical integration used by the oracles and the density code.
//!
//! * [`adaptive`]: globally adaptive 21-point Gauss–Kronrod on a finite
//!   interval (QUADPACK QAG strategy).
//! * [`adaptive_semi_infinite`]: the same rule after `x = a + t/(1-t)`.
//! * [`exp_sinh`]: double-exponential trapezoid rule on `[a, inf)`, robust to
//!   integrable endpoint singularities at `a`.
//! * [`wynn_epsilon`]: sequence acceleration for oscillatory tails.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1], descending. Odd indices are Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_7,
    0.973_906_528_517_171_720_1,
    0.930_157_491_355_708_226_0,
    0.865_063_366_688_984_510_7,
    0.780_817_726_586_416_897_1,
    0.679_409_568_299_024_406_2,
    0.562_757_134_668_604_683_3,
    0.433_395_394_129_247_190_8,
    0.294_392_862_701_460_198_1,
    0.148_874_338_981_631_210_9,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_28,
    0.032_558_162_307_964_727_48,
    0.054_755_896_574_351_996_03,
    0.075_039_674_810_919_952_77,
    0.093_125_454_583_697_605_54,
    0.109_387_158_802_297_641_9,
    0.123_491_976_262_065_851_1,
    0.134_709_217_311_473_325_9,
    0.142_775_938_577_060_080_8,
    0.147_739_104_901_338_491_4,
    0.149_445_554_002_916_905_7,
];

/// 10-point Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_59,
    0.149_451_349_150_580_593_1,
    0.219_086_362_515_982_044_0,
    0.269_266_719_309_996_355_1,
    0.295_524_224_714_752_870_2,
];

/// Integral estimate with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// One application of the 21-point Gauss–Kronrod rule.
pub fn gauss_kronrod_21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// `initial_pieces` pre-splits the interval, which helps oscillatory
/// integrands. Returns [`Error::Quadrature`] if `max_segments` bisections do
/// not bring the error estimate under `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    initial_pieces: usize,
    max_segments: usize,
) -> Result<Estimate> {
    let pieces = initial_pieces.max(1);
    let mut heap = BinaryHeap::with_capacity(pieces + 64);
    let width = (b - a) / pieces as f64;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        let (v, e) = gauss_kronrod_21(&mut f, lo, hi);
        total += v;
        total_err += e;
        heap.push(Segment {
            a: lo,
            b: hi,
            value: v,
            error: e,
        });
    }
    let mut evaluations = 21 * pieces;
    let mut segments = pieces;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if segments >= max_segments {
            return Err(Error::Quadrature {
                achieved: total_err,
                requested: abs_tol.max(rel_tol * total.abs()),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gauss_kronrod_21(&mut f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_21(&mut f, mid, worst.b);
        evaluations += 42;
        segments += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of the running updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Adaptive integration over `[a, inf)` via `x = a + t / (1 - t)`.
pub fn adaptive_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<Estimate> {
    adaptive(
        |t| {
            let u = 1.0 - t;
            let x = a + t / u;
            let y = f(x) / (u * u);
            if y.is_finite() {
                y
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
        4,
        max_segments,
    )
}

/// Double-exponential (exp-sinh) rule for `int_a^inf f(x) dx`.
///
/// Uses `x = a + scale * exp(pi/2 sinh s)`; `scale` should be of the order of
/// the integrand's width. The step is halved until successive estimates agree
/// to `rel_tol`. Endpoint singularities at `a` of the form `(x-a)^p`, `p > -1`,
/// and logarithms are handled without special treatment.
pub fn exp_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, scale: f64, rel_tol: f64) -> Result<Estimate> {
    const S_MAX: f64 = 4.5;
    const MAX_LEVEL: usize = 9;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut node = |s: f64| -> f64 {
        let e = (half_pi * s.sinh()).exp();
        let offset = scale * e;
        if offset == 0.0 || !offset.is_finite() {
            return 0.0;
        }
        let w = offset * half_pi * s.cosh();
        let y = f(a + offset) * w;
        if y.is_finite() {
            y
        } else {
            0.0
        }
    };

    let mut h = 0.5;
    let mut sum = node(0.0);
    let mut evaluations = 1;
    let n0 = (S_MAX / h) as i64;
    for k in 1..=n0 {
        let s = k as f64 * h;
        sum += node(s) + node(-s);
        evaluations += 2;
    }
    let mut estimate = sum * h;
    for _ in 0..MAX_LEVEL {
        // New nodes sit at odd multiples of h/2.
        h *= 0.5;
        let n = (S_MAX / h) as i64;
        let mut k = 1;
        while k <= n {
            let s = k as f64 * h;
            sum += node(s) + node(-s);
            evaluations += 2;
            k += 2;
        }
        let next = sum * h;
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= rel_tol * next.abs() || next == 0.0 {
            return Ok(Estimate {
                value: next,
                error: diff,
                evaluations,
            });
        }
    }
    let err = (sum * h - estimate).abs().max(rel_tol * estimate.abs() * 10.0);
    Err(Error::Quadrature {
        achieved: err,
        requested: rel_tol * estimate.abs(),
    })
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Returns the last even-column entry of the epsilon table together with the
/// difference from the previous one as an error estimate.
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n < 3 {
        let last = partial_sums[n - 1];
        let prev = if n == 2 { partial_sums[0] } else { f64::INFINITY };
        return (last, (last - prev).abs());
    }
    // e[k] holds column k of the table for the current diagonal.
    let mut prev_col: Vec<f64> = partial_sums.to_vec();
    let mut prev_prev: Vec<f64> = vec![0.0; n + 1];
    let mut best = partial_sums[n - 1];
    let mut best_err = (partial_sums[n - 1] - partial_sums[n - 2]).abs();
    let mut col = 1;
    while prev_col.len() > 1 {
        let m = prev_col.len() - 1;
        let mut next = Vec::with_capacity(m);
        for i in 0..m {
            let diff = prev_col[i + 1] - prev_col[i];
            let base = if col == 1 { 0.0 } else { prev_prev[i + 1] };
            if diff == 0.0 {
                // Converged exactly; propagate the limit.
                return (prev_col[i + 1], 0.0);
            }
            next.push(base + 1.0 / diff);
        }
        if col % 2 == 0 && next.len() >= 2 {
            let l = next.len();
            let err = (next[l - 1] - next[l - 2]).abs();
            if err <= best_err {
                best = next[l - 1];
                best_err = err;
            }
        } else if col % 2 == 0 && next.len() == 1 {
            let err = (next[0] - best).abs();
            if err <= best_err {
                best = next[0];
                best_err = err.max(f64::EPSILON * next[0].abs());
            }
        }
        prev_prev = prev_col;
        prev_col = next;
        col += 1;
    }
    (best, best_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_one() {
        let s: f64 = WGK[..10].iter().sum::<f64>() * 2.0 + WGK[10];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = WG.iter().sum::<f64>() * 2.0;
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exact() {
        let (v, _) = gauss_kronrod_21(&mut |x: f64| x.powi(20), -1.0, 1.0);
        assert!((v - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let est = adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12, 1, 500).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((est.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn semi_infinite_exponential() {
        let est = adaptive_semi_infinite(|x: f64| (-x).exp(), 0.0, 1e-13, 1e-13, 200).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_sinh_endpoint_singularity() {
        // int_0^inf x^{-1/2} e^{-x} dx = sqrt(pi)
        let est = exp_sinh(|x: f64| x.powf(-0.5) * (-x).exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((est.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        // int_0^inf -ln(x) e^{-x} dx = Euler gamma
        let est = exp_sinh(|x: f64| -x.ln() * (-x).exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((est.value - 0.577_215_664_901_532_9).abs() < 1e-12);
    }

    #[test]
    fn epsilon_accelerates_alternating_series() {
        // 1 - 1/2 + 1/3 - ... = ln 2
        let mut sums = Vec::new();
        let mut s = 0.0;
        for k in 1..=20 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            sums.push(s);
        }
        let (v, e) = wynn_epsilon(&sums);
        assert!((v - 2f64.ln()).abs() < 1e-12, "{v} {e}");
        assert!(e < 1e-9);
    }
}
