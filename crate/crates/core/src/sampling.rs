//! Reproducible samplers and Monte Carlo statistics.
//!
//! Two routes produce `S_n` (or `T`):
//!
//! * **definitional**: bivariate normal pairs `X = μX + σX G1`,
//!   `Y = μY + σY(ρ G1 + √(1-ρ²) G2)`, multiplied and summed over `n`;
//! * **representation**: `scale_plus V1 - scale_minus V2 + shift` with
//!   `V ~ χ'²_r(λ)` drawn as a gamma variate of shape `r/2 + J`, scale 2,
//!   where `J ~ Poisson(λ/2)`.
//!
//! # Streams
//!
//! Draws are generated in chunks of [`CHUNK`] values. Chunk `i` of a run
//! with seed `s` uses ChaCha8 keyed by `s` (little-endian in the first eight
//! key bytes, remaining bytes zero) on stream `i`, so the values do not depend
//! on how chunks are spread over threads. [`derive_seed`] uses the same
//! cipher with key byte 8 set to 1, keeping derived seeds disjoint from chunk
//! streams. Normals come from the ziggurat sampler of `rand_distr`, gammas
//! from its Marsaglia-Tsang sampler and Poisson counts from its PTRS sampler;
//! the versions are pinned by `Cargo.lock`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repr::{from_chisq_diff, ChiSqDiffParams, ChiSqDiffRepr, ProductNormalParams};

/// Draws per independent stream.
pub const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Definitional,
    Representation,
}

/// The law being sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleParams {
    Product(ProductNormalParams),
    Diff(ChiSqDiffParams),
    Ncx2 { r: f64, lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub route: Route,
    pub params: SampleParams,
}

/// Metadata written next to an exported batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub seed: u64,
    pub route: Route,
    pub params: SampleParams,
    pub count: usize,
}

impl SampleBatch {
    pub fn sidecar(&self) -> SampleSidecar {
        SampleSidecar {
            seed: self.seed,
            route: self.route,
            params: self.params,
            count: self.values.len(),
        }
    }

    /// Single-column CSV with header `value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * (self.values.len() + 1));
        out.push_str("value\n");
        for v in &self.values {
            out.push_str(&crate::export::fmt_sig17(*v));
            out.push('\n');
        }
        out
    }
}

fn keyed_rng(seed: u64, domain: u8, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8] = domain;
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Generator for chunk `chunk` of a run with seed `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    keyed_rng(seed, 0, chunk)
}

/// A seed for sub-experiment `index`, independent of the chunk streams of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    keyed_rng(seed, 1, index).next_u64()
}

/// `χ'²_r(λ)` draws.
#[derive(Debug, Clone, Copy)]
pub struct Ncx2Sampler {
    half_r: f64,
    poisson: Option<Poisson<f64>>,
}

impl Ncx2Sampler {
    pub fn new(r: f64, lambda: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) || !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParams(format!("ncx2 sampler needs r > 0, λ >= 0, got ({r}, {lambda})")));
        }
        let poisson = if lambda > 0.0 {
            Some(Poisson::new(0.5 * lambda).map_err(|e| Error::InvalidParams(e.to_string()))?)
        } else {
            None
        };
        Ok(Ncx2Sampler { half_r: 0.5 * r, poisson })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let j = self.poisson.map_or(0.0, |p| p.sample(rng));
        Gamma::new(self.half_r + j, 2.0)
            .expect("gamma shape is positive")
            .sample(rng)
    }
}

/// Single-draw sampler for any supported (route, law) pair.
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Product {
        p: ProductNormalParams,
        scale: f64,
    },
    Repr {
        rep: ChiSqDiffRepr,
        v1: Option<Ncx2Sampler>,
        v2: Option<Ncx2Sampler>,
    },
}

impl Sampler {
    pub fn new(route: Route, params: SampleParams) -> Result<Self> {
        match (route, params) {
            (Route::Definitional, SampleParams::Product(p)) => Ok(Sampler::Product { p, scale: 1.0 }),
            (Route::Definitional, SampleParams::Diff(q)) => {
                // T has the law of 2 S_r for the product parameters of from_chisq_diff.
                Ok(Sampler::Product {
                    p: from_chisq_diff(&q)?,
                    scale: 2.0,
                })
            }
            (Route::Representation, SampleParams::Product(p)) => Sampler::from_repr(p.to_chisq_diff()),
            (Route::Representation, SampleParams::Diff(q)) => Sampler::from_repr(ChiSqDiffRepr {
                scale_plus: 1.0,
                scale_minus: 1.0,
                r: q.r(),
                lambda_plus: q.lambda1(),
                lambda_minus: q.lambda2(),
                shift: 0.0,
            }),
            (Route::Representation, SampleParams::Ncx2 { r, lambda }) => Sampler::from_repr(ChiSqDiffRepr {
                scale_plus: 1.0,
                scale_minus: 0.0,
                r,
                lambda_plus: lambda,
                lambda_minus: 0.0,
                shift: 0.0,
            }),
            (Route::Definitional, SampleParams::Ncx2 { r, lambda }) => {
                if r.fract() != 0.0 || r < 1.0 {
                    return Err(Error::Unsupported(format!(
                        "definitional chi-square sampling needs integer r, got {r}"
                    )));
                }
                // X = Y at ρ = 1, so S_r is a sum of r squared normals with
                // noncentrality r μ² = λ.
                let mu = (lambda / r).sqrt();
                let p = ProductNormalParams::new(mu, mu, 1.0, 1.0, 1.0, r as u32)?;
                Ok(Sampler::Product { p, scale: 1.0 })
            }
        }
    }

    fn from_repr(rep: ChiSqDiffRepr) -> Result<Self> {
        let v1 = if rep.scale_plus > 0.0 { Some(Ncx2Sampler::new(rep.r, rep.lambda_plus)?) } else { None };
        let v2 = if rep.scale_minus > 0.0 { Some(Ncx2Sampler::new(rep.r, rep.lambda_minus)?) } else { None };
        Ok(Sampler::Repr { rep, v1, v2 })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Product { p, scale } => {
                let mut total = 0.0;
                for _ in 0..p.n() {
                    let (x, y) = normal_pair(p, rng);
                    total += x * y;
                }
                scale * total
            }
            Sampler::Repr { rep, v1, v2 } => {
                let a = v1.map_or(0.0, |s| rep.scale_plus * s.draw(rng));
                let b = v2.map_or(0.0, |s| rep.scale_minus * s.draw(rng));
                a - b + rep.shift
            }
        }
    }

    /// Applies `f` to each chunk of `count` draws and returns the results in
    /// chunk order. Chunks run in parallel; the output does not depend on the
    /// number of threads.
    pub fn map_chunks<A, F>(&self, count: usize, seed: u64, f: F) -> Vec<A>
    where
        A: Send,
        F: Fn(&[f64]) -> A + Sync,
    {
        let chunks = count.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let len = CHUNK.min(count - i * CHUNK);
                let mut rng = chunk_rng(seed, i as u64);
                let buf: Vec<f64> = (0..len).map(|_| self.draw(&mut rng)).collect();
                f(&buf)
            })
            .collect()
    }

    /// `count` draws in canonical order.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut values = vec![0.0; count];
        values.par_chunks_mut(CHUNK).enumerate().for_each(|(i, out)| {
            let mut rng = chunk_rng(seed, i as u64);
            for v in out.iter_mut() {
                *v = self.draw(&mut rng);
            }
        });
        values
    }
}

/// One bivariate normal pair `(X, Y)` with the parameters of `p`.
pub fn normal_pair<R: Rng + ?Sized>(p: &ProductNormalParams, rng: &mut R) -> (f64, f64) {
    let c = (1.0 - p.rho() * p.rho()).max(0.0).sqrt();
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    let x = p.mu_x() + p.sigma_x() * g1;
    let y = p.mu_y() + p.sigma_y() * (p.rho() * g1 + c * g2);
    (x, y)
}

fn batch(route: Route, params: SampleParams, count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let values = Sampler::new(route, params)?.sample(count, seed);
    Ok(SampleBatch {
        values,
        seed,
        route,
        params,
    })
}

/// `S_n` from bivariate normal pairs.
pub fn sample_product_definitional(p: &ProductNormalParams, count: usize, seed: u64) -> Result<SampleBatch> {
    batch(Route::Definitional, SampleParams::Product(*p), count, seed)
}

/// `S_n` as `scale_plus V1 - scale_minus V2 + shift`.
pub fn sample_sum_via_representation(p: &ProductNormalParams, count: usize, seed: u64) -> Result<SampleBatch> {
    batch(Route::Representation, SampleParams::Product(*p), count, seed)
}

/// `χ'²_r(λ)` by the Poisson-gamma mixture.
pub fn sample_ncx2(r: f64, lambda: f64, count: usize, seed: u64) -> Result<SampleBatch> {
    batch(Route::Representation, SampleParams::Ncx2 { r, lambda }, count, seed)
}

/// `T = V1 - V2` by the Poisson-gamma mixture.
pub fn sample_diff(q: &ChiSqDiffParams, count: usize, seed: u64) -> Result<SampleBatch> {
    batch(Route::Representation, SampleParams::Diff(*q), count, seed)
}

/// Two-sample Kolmogorov-Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value
/// `Q_KS(√(nm/(n+m)) D)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("KS test needs two nonempty samples".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] == v {
            i += 1;
        }
        while j < m && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(en * d),
    })
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_q(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 1.0 {
        // Theta-function form, fast for small t.
        let c = -std::f64::consts::PI * std::f64::consts::PI / (8.0 * t * t);
        let s: f64 = (1..=6).map(|k| (c * ((2 * k - 1) * (2 * k - 1)) as f64).exp()).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / t * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * t * t).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Mean and standard error of `f` over `count` draws, reduced chunk by chunk
/// in a fixed order.
pub fn monte_carlo_mean<F>(sampler: &Sampler, count: usize, seed: u64, f: F) -> MeanEstimate
where
    F: Fn(f64) -> f64 + Sync,
{
    monte_carlo_means(sampler, count, seed, 1, |x, out| out[0] = f(x))[0]
}

/// Means and standard errors of `k` statistics of the same draws; `f`
/// writes the `k` values for one draw.
pub fn monte_carlo_means<F>(sampler: &Sampler, count: usize, seed: u64, k: usize, f: F) -> Vec<MeanEstimate>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    // Per-chunk (mean, M2) merged with Chan's update keeps the variance stable.
    let parts = sampler.map_chunks(count, seed, |xs| {
        let mut mean = vec![0.0; k];
        let mut m2 = vec![0.0; k];
        let mut v = vec![0.0; k];
        for (i, x) in xs.iter().enumerate() {
            f(*x, &mut v);
            for c in 0..k {
                let delta = v[c] - mean[c];
                mean[c] += delta / (i + 1) as f64;
                m2[c] += delta * (v[c] - mean[c]);
            }
        }
        (xs.len() as f64, mean, m2)
    });
    let mut n = 0.0;
    let mut mean = vec![0.0; k];
    let mut m2 = vec![0.0; k];
    for (nb, mb, m2b) in parts {
        let total = n + nb;
        for c in 0..k {
            let delta = mb[c] - mean[c];
            mean[c] += delta * nb / total;
            m2[c] += m2b[c] + delta * delta * n * nb / total;
        }
        n = total;
    }
    (0..k)
        .map(|c| {
            let var = if n > 1.0 { m2[c] / (n - 1.0) } else { 0.0 };
            MeanEstimate {
                mean: mean[c],
                std_error: (var / n).sqrt(),
                count,
            }
        })
        .collect()
}

/// Unbiased k-statistics `k1..k4`.
pub fn k_statistics(values: &[f64]) -> Result<[f64; 4]> {
    let n = values.len();
    if n < 4 {
        return Err(Error::Domain(format!("k-statistics need at least 4 values, got {n}")));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    let (m2, m3, m4) = (s2 / nf, s3 / nf, s4 / nf);
    let k2 = nf / (nf - 1.0) * m2;
    let k3 = nf * nf / ((nf - 1.0) * (nf - 2.0)) * m3;
    let k4 = nf * nf * ((nf + 1.0) * m4 - 3.0 * (nf - 1.0) * m2 * m2) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    Ok([mean, k2, k3, k4])
}

/// k-statistics `k1..k4` of `count` draws from power sums about `center`,
/// accumulated per chunk in a fixed order so that no sample is stored.
/// `center` should be close to the mean (for example the exact `κ1`).
pub fn k_statistics_streaming(sampler: &Sampler, count: usize, seed: u64, center: f64) -> Result<[f64; 4]> {
    if count < 4 {
        return Err(Error::Domain(format!("k-statistics need at least 4 values, got {count}")));
    }
    let parts = sampler.map_chunks(count, seed, |xs| {
        let mut s = [0.0f64; 4];
        for x in xs {
            let d = x - center;
            let d2 = d * d;
            s[0] += d;
            s[1] += d2;
            s[2] += d2 * d;
            s[3] += d2 * d2;
        }
        s
    });
    let mut s = [0.0f64; 4];
    for p in parts {
        for k in 0..4 {
            s[k] += p[k];
        }
    }
    let nf = count as f64;
    let a = [s[0] / nf, s[1] / nf, s[2] / nf, s[3] / nf];
    let m2 = a[1] - a[0] * a[0];
    let m3 = a[2] - 3.0 * a[0] * a[1] + 2.0 * a[0].powi(3);
    let m4 = a[3] - 4.0 * a[0] * a[2] + 6.0 * a[0] * a[0] * a[1] - 3.0 * a[0].powi(4);
    let k2 = nf / (nf - 1.0) * m2;
    let k3 = nf * nf / ((nf - 1.0) * (nf - 2.0)) * m3;
    let k4 = nf * nf * ((nf + 1.0) * m4 - 3.0 * (nf - 1.0) * m2 * m2) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    Ok([center + a[0], k2, k3, k4])
}

/// Sampling variances of `k1..k4` for a sample of size `n`, given the
/// population cumulants `κ1..κ8`.
pub fn k_statistic_variances(kappa: &[f64; 8], n: usize) -> [f64; 4] {
    let nf = n as f64;
    let (k2, k3, k4, k5, k6, k8) = (kappa[1], kappa[2], kappa[3], kappa[4], kappa[5], kappa[7]);
    let n1 = nf - 1.0;
    let n2 = nf - 2.0;
    let n3 = nf - 3.0;
    [
        k2 / nf,
        k4 / nf + 2.0 * k2 * k2 / n1,
        k6 / nf + 9.0 * k2 * k4 / n1 + 9.0 * k3 * k3 / n1 + 6.0 * nf * k2.powi(3) / (n1 * n2),
        k8 / nf
            + 16.0 * k2 * k6 / n1
            + 48.0 * k3 * k5 / n1
            + 34.0 * k4 * k4 / n1
            + 72.0 * nf * k2 * k2 * k4 / (n1 * n2)
            + 144.0 * nf * k2 * k3 * k3 / (n1 * n2)
            + 24.0 * nf * (nf + 1.0) * k2.powi(4) / (n1 * n2 * n3),
    ]
}
