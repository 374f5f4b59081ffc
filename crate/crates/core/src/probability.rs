//! Negativity probabilities `P(S_n <= 0)` and `P(T <= 0)`.
//!
//! Both reduce to the CDF of a doubly noncentral F ratio: a Poisson-weighted
//! double series of regularized incomplete beta functions. Every beta factor
//! lies in `[0, 1]`, so the omitted mass is bounded by the two Poisson tail
//! probabilities, which are evaluated exactly through the incomplete gamma
//! function.
//!
//! `ρ = ±1` is handled separately: `S_n` is then a shifted multiple of one
//! noncentral chi-square and the probability is its CDF at a threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::SeriesControl;
use crate::error::{Error, Result};
use crate::export::fmt_sig17;
use crate::repr::{ChiSqDiffParams, ProductNormalParams};
use crate::specfun::{ln_factorial, reg_inc_beta, reg_lower_gamma, reg_upper_gamma};

/// Result of a truncated series probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityResult {
    pub probability: f64,
    /// Number of series terms evaluated.
    pub terms_used: usize,
    /// Upper bound on the omitted mass.
    pub tail_bound: f64,
}

/// `ln` of the Poisson probability `e^{-μ} μ^j / j!`.
fn ln_poisson(j: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return if j == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mu + j as f64 * mu.ln() - ln_factorial(j)
}

/// `P(J > j)` for `J ~ Poisson(μ)`.
fn poisson_tail(j: usize, mu: f64) -> Result<f64> {
    if mu == 0.0 {
        return Ok(0.0);
    }
    reg_lower_gamma(j as f64 + 1.0, mu)
}

/// Smallest `j` with `P(J > j) <= level`, capped by `max_terms`.
fn poisson_cut(mu: f64, level: f64, max_terms: usize) -> Result<(usize, f64)> {
    let mut j = mu.floor() as usize;
    loop {
        let tail = poisson_tail(j, mu)?;
        if tail <= level {
            return Ok((j, tail));
        }
        if j + 1 >= max_terms {
            return Err(Error::NonConvergence {
                terms: j + 1,
                tail_bound: tail,
            });
        }
        j += 1 + j / 8;
        j = j.min(max_terms - 1);
    }
}

/// `Σ_j Σ_k Pois(j; μ1) Pois(k; μ2) I_x(h + j, h + k)`.
fn beta_mixture(x: f64, h: f64, mu1: f64, mu2: f64, ctrl: &SeriesControl) -> Result<NegativityResult> {
    ctrl.validate()?;
    let level = 0.25 * ctrl.abs_tol;
    let (j_max, tail1) = poisson_cut(mu1, level, ctrl.max_terms)?;
    let (k_max, tail2) = poisson_cut(mu2, level, ctrl.max_terms)?;
    let mut total = 0.0;
    let mut comp = 0.0;
    let mut terms = 0;
    for j in 0..=j_max {
        let wj = ln_poisson(j, mu1);
        for k in 0..=k_max {
            let w = (wj + ln_poisson(k, mu2)).exp();
            if w == 0.0 {
                continue;
            }
            let t = w * reg_inc_beta(x, h + j as f64, h + k as f64)?;
            // Neumaier summation inline; there are up to max_terms^2 terms.
            let s = total + t;
            comp += if total.abs() >= t.abs() { (total - s) + t } else { (t - s) + total };
            total = s;
            terms += 1;
        }
    }
    Ok(NegativityResult {
        probability: (total + comp).clamp(0.0, 1.0),
        terms_used: terms,
        tail_bound: tail1 + tail2,
    })
}

/// `P(V <= c)` for `V ~ χ'²_r(λ)`, as a Poisson mixture of regularized
/// incomplete gamma functions.
pub fn ncx2_cdf(c: f64, r: f64, lambda: f64, ctrl: &SeriesControl) -> Result<NegativityResult> {
    ncx2_tail(c, r, lambda, ctrl, false)
}

/// `P(V > c)` for `V ~ χ'²_r(λ)`, without the cancellation of `1 - cdf`.
pub fn ncx2_sf(c: f64, r: f64, lambda: f64, ctrl: &SeriesControl) -> Result<NegativityResult> {
    ncx2_tail(c, r, lambda, ctrl, true)
}

fn ncx2_tail(c: f64, r: f64, lambda: f64, ctrl: &SeriesControl, upper: bool) -> Result<NegativityResult> {
    ctrl.validate()?;
    if !(r > 0.0) || !(lambda >= 0.0) || c.is_nan() {
        return Err(Error::Domain(format!("ncx2 cdf needs r > 0, λ >= 0, got r = {r}, λ = {lambda}")));
    }
    if c <= 0.0 {
        let p = if upper { 1.0 } else { 0.0 };
        return Ok(NegativityResult {
            probability: p,
            terms_used: 0,
            tail_bound: 0.0,
        });
    }
    let mu = 0.5 * lambda;
    let (j_max, tail) = poisson_cut(mu, 0.5 * ctrl.abs_tol, ctrl.max_terms)?;
    let mut total = 0.0;
    for j in 0..=j_max {
        let a = 0.5 * r + j as f64;
        let g = if upper { reg_upper_gamma(a, 0.5 * c)? } else { reg_lower_gamma(a, 0.5 * c)? };
        total += ln_poisson(j, mu).exp() * g;
    }
    Ok(NegativityResult {
        probability: total.clamp(0.0, 1.0),
        terms_used: j_max + 1,
        tail_bound: tail,
    })
}

/// `P(S_n <= 0)`.
///
/// For `|ρ| < 1` this is `Σ_j Σ_k Pois(j; λ+/2) Pois(k; λ-/2) I_{(1-ρ)/2}(n/2 + j, n/2 + k)`,
/// cut where each Poisson tail falls below `ctrl.abs_tol / 4`. For `ρ = ±1`
/// it is a noncentral chi-square CDF at the threshold set by the shift.
/// The law is continuous for `|ρ| < 1`, so `P(S_n <= 0) = P(S_n < 0)` there.
pub fn prob_nonpositive_sum(p: &ProductNormalParams, ctrl: &SeriesControl) -> Result<NegativityResult> {
    let rep = p.to_chisq_diff();
    if rep.scale_minus == 0.0 {
        // scale_plus V1 + shift <= 0  <=>  V1 <= -shift / scale_plus
        return ncx2_cdf(-rep.shift / rep.scale_plus, rep.r, rep.lambda_plus, ctrl);
    }
    if rep.scale_plus == 0.0 {
        // shift - scale_minus V2 <= 0  <=>  V2 >= shift / scale_minus
        return ncx2_sf(rep.shift / rep.scale_minus, rep.r, rep.lambda_minus, ctrl);
    }
    let x = 0.5 * (1.0 - p.rho());
    beta_mixture(x, 0.5 * rep.r, 0.5 * rep.lambda_plus, 0.5 * rep.lambda_minus, ctrl)
}

/// `P(S_n <= 0)` for `μX = μY = 0`: the single term `I_{(1-ρ)/2}(n/2, n/2)`.
pub fn prob_nonpositive_central(n: u32, rho: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::Domain(format!("central formula needs |rho| < 1, got {rho}")));
    }
    let h = 0.5 * n as f64;
    reg_inc_beta(0.5 * (1.0 - rho), h, h)
}

/// `P(T <= 0) = Σ_j Σ_k Pois(j; λ1/2) Pois(k; λ2/2) I_{1/2}(r/2 + j, r/2 + k)`.
pub fn prob_nonpositive_diff(q: &ChiSqDiffParams, ctrl: &SeriesControl) -> Result<NegativityResult> {
    beta_mixture(0.5, 0.5 * q.r(), 0.5 * q.lambda1(), 0.5 * q.lambda2(), ctrl)
}

/// Row labels `(μX, μY)` of the published negativity table.
pub const TABLE1_MEANS: [(f64, f64); 8] = [
    (0.0, 0.0),
    (1.0, -1.0),
    (2.0, -1.0),
    (2.0, -2.0),
    (1.0, 0.0),
    (1.0, 1.0),
    (2.0, 1.0),
    (2.0, 2.0),
];

/// Column labels `ρ` of the published negativity table.
pub const TABLE1_RHOS: [f64; 7] = [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75];

/// Published four-decimal values of `P(Z <= 0)`, `σX = σY = 1`, `n = 1`.
pub const TABLE1_PUBLISHED: [[f64; 7]; 8] = [
    [0.7499, 0.6667, 0.5804, 0.5000, 0.4196, 0.3333, 0.2301],
    [0.8636, 0.8077, 0.7660, 0.7330, 0.7075, 0.6902, 0.6831],
    [0.8580, 0.8451, 0.8340, 0.8258, 0.8209, 0.8189, 0.8186],
    [0.9715, 0.9626, 0.9579, 0.9555, 0.9547, 0.9545, 0.9545],
    [0.6403, 0.5961, 0.5483, 0.5000, 0.4517, 0.4039, 0.3597],
    [0.3169, 0.3098, 0.2925, 0.2670, 0.2339, 0.1923, 0.1364],
    [0.1814, 0.1811, 0.1791, 0.1742, 0.1660, 0.1549, 0.1420],
    [0.0455, 0.0455, 0.0453, 0.0445, 0.0421, 0.0374, 0.0285],
];

/// Largest deviation from a published four-decimal value that rounding explains.
pub const TABLE1_TOLERANCE: f64 = 5e-5;

/// One cell of the regenerated table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Entry {
    pub mu_x: f64,
    pub mu_y: f64,
    pub rho: f64,
    pub probability: f64,
    pub published: f64,
    pub abs_diff: f64,
}

impl Table1Entry {
    pub fn rounded(&self) -> f64 {
        (self.probability * 1e4).round() / 1e4
    }

    pub fn within_tolerance(&self) -> bool {
        self.abs_diff <= TABLE1_TOLERANCE
    }
}

/// The regenerated table with its comparison against the published values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    /// Row-major over [`TABLE1_MEANS`] then [`TABLE1_RHOS`].
    pub entries: Vec<Table1Entry>,
}

/// Machine-readable summary of a [`Table1Report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Summary {
    pub cells: usize,
    pub max_abs_diff: f64,
    pub within_tolerance: usize,
    pub discrepancies: Vec<Table1Entry>,
}

/// Computes all 56 cells of the published table, cell-parallel with the
/// output order fixed.
pub fn table1(ctrl: &SeriesControl) -> Result<Table1Report> {
    let cells: Vec<(usize, usize)> = (0..8).flat_map(|i| (0..7).map(move |j| (i, j))).collect();
    let entries = cells
        .par_iter()
        .map(|&(i, j)| {
            let (mu_x, mu_y) = TABLE1_MEANS[i];
            let rho = TABLE1_RHOS[j];
            let p = ProductNormalParams::new(mu_x, mu_y, 1.0, 1.0, rho, 1)?;
            let probability = prob_nonpositive_sum(&p, ctrl)?.probability;
            let published = TABLE1_PUBLISHED[i][j];
            Ok(Table1Entry {
                mu_x,
                mu_y,
                rho,
                probability,
                published,
                abs_diff: (probability - published).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table1Report { entries })
}

impl Table1Report {
    pub fn entry(&self, mu_x: f64, mu_y: f64, rho: f64) -> Option<&Table1Entry> {
        self.entries
            .iter()
            .find(|e| e.mu_x == mu_x && e.mu_y == mu_y && e.rho == rho)
    }

    /// Cells farther than [`TABLE1_TOLERANCE`] from the published value.
    pub fn discrepancies(&self) -> Vec<Table1Entry> {
        self.entries.iter().filter(|e| !e.within_tolerance()).copied().collect()
    }

    pub fn summary(&self) -> Table1Summary {
        let discrepancies = self.discrepancies();
        Table1Summary {
            cells: self.entries.len(),
            max_abs_diff: self.entries.iter().map(|e| e.abs_diff).fold(0.0, f64::max),
            within_tolerance: self.entries.len() - discrepancies.len(),
            discrepancies,
        }
    }

    /// CSV with header `mu_x,mu_y,rho,probability,published,abs_diff`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu_x,mu_y,rho,probability,published,abs_diff\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{:.4},{}\n",
                e.mu_x,
                e.mu_y,
                e.rho,
                fmt_sig17(e.probability),
                e.published,
                fmt_sig17(e.abs_diff)
            ));
        }
        out
    }

    /// Human view: the 8 x 7 grid at four decimals, cells that disagree with
    /// the published table marked with `*`.
    pub fn render_grid(&self) -> String {
        let mut out = String::from("(mu_x,mu_y)");
        for rho in TABLE1_RHOS {
            out.push_str(&format!(" {rho:>8}"));
        }
        out.push('\n');
        for (i, &(mx, my)) in TABLE1_MEANS.iter().enumerate() {
            out.push_str(&format!("{:<11}", format!("({mx},{my})")));
            for e in &self.entries[7 * i..7 * i + 7] {
                let mark = if e.within_tolerance() { ' ' } else { '*' };
                out.push_str(&format!("  {:.4}{mark}", e.rounded()));
            }
            out.push('\n');
        }
        for e in self.discrepancies() {
            out.push_str(&format!(
                "* ({},{}) rho={}: computed {:.7}, published {:.4}\n",
                e.mu_x, e.mu_y, e.rho, e.probability, e.published
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctrl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn table_examples() {
        let cases = [
            ((0.0, 0.0, 0.0), 0.5000),
            ((1.0, 1.0, 0.5), 0.1923),
            ((2.0, -1.0, 0.25), 0.8209),
        ];
        for ((mx, my, rho), want) in cases {
            let p = ProductNormalParams::new(mx, my, 1.0, 1.0, rho, 1).unwrap();
            let got = prob_nonpositive_sum(&p, &ctrl()).unwrap();
            assert!((got.probability - want).abs() <= 5e-5, "{got:?} vs {want}");
            assert!(got.tail_bound <= 1e-12);
        }
    }

    #[test]
    fn central_reduction() {
        assert!((prob_nonpositive_central(1, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((prob_nonpositive_central(1, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((prob_nonpositive_central(1, 0.75).unwrap() - 0.2301).abs() < 5e-5);
        let exact = 2.0 / std::f64::consts::PI * 0.875f64.sqrt().asin();
        assert!((prob_nonpositive_central(1, -0.75).unwrap() - exact).abs() < 1e-14);
        assert!(prob_nonpositive_central(1, 1.0).is_err());
    }

    #[test]
    fn difference_examples() {
        let half = prob_nonpositive_diff(&ChiSqDiffParams::new(3.0, 0.0, 0.0).unwrap(), &ctrl()).unwrap();
        assert!((half.probability - 0.5).abs() < 1e-14);
        let sym = prob_nonpositive_diff(&ChiSqDiffParams::new(1.0, 2.0, 2.0).unwrap(), &ctrl()).unwrap();
        assert!((sym.probability - 0.5).abs() < 1e-13);
        let q = ChiSqDiffParams::new(1.0, 2.0, 0.0).unwrap();
        let d = prob_nonpositive_diff(&q, &ctrl()).unwrap();
        let p = crate::repr::from_chisq_diff(&q).unwrap();
        let s = prob_nonpositive_sum(&p, &ctrl()).unwrap();
        assert!((d.probability - s.probability).abs() < 1e-13);
        assert!((d.probability - 0.2670).abs() < 5e-5);
    }

    #[test]
    fn degenerate_rho() {
        // ρ = 1, μX = μY: S = V1 with V1 >= 0, so P(S <= 0) = 0.
        let p = ProductNormalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(prob_nonpositive_sum(&p, &ctrl()).unwrap().probability, 0.0);
        // ρ = -1, μ = 0: S = -V2 <= 0 almost surely.
        let p = ProductNormalParams::new(0.0, 0.0, 1.0, 1.0, -1.0, 2).unwrap();
        assert_eq!(prob_nonpositive_sum(&p, &ctrl()).unwrap().probability, 1.0);
        let p = ProductNormalParams::new(1.0, -1.0, 1.0, 1.0, 1.0, 1).unwrap();
        let got = prob_nonpositive_sum(&p, &ctrl()).unwrap().probability;
        // X ~ N(1,1), Y = X - 2: XY <= 0 iff 0 <= X <= 2.
        let phi = |x: f64| 0.5 * (1.0 + libm_erf(x / std::f64::consts::SQRT_2));
        assert!((got - (phi(1.0) - phi(-1.0))).abs() < 1e-12, "{got}");
    }

    fn libm_erf(x: f64) -> f64 {
        // erf via the regularized lower gamma: erf(x) = sign(x) P(1/2, x^2).
        x.signum() * reg_lower_gamma(0.5, x * x).unwrap()
    }

    #[test]
    fn ncx2_cdf_complements() {
        let c = ctrl();
        for &(x, r, l) in &[(0.5, 1.0, 0.0), (3.0, 2.5, 1.7), (12.0, 4.0, 6.0)] {
            let a = ncx2_cdf(x, r, l, &c).unwrap();
            let b = ncx2_sf(x, r, l, &c).unwrap();
            // Both omit the same Poisson tail.
            assert!((a.probability + b.probability - 1.0).abs() <= a.tail_bound + 1e-14);
        }
        // central r = 2: 1 - e^{-x/2}
        let a = ncx2_cdf(3.0, 2.0, 0.0, &c).unwrap().probability;
        assert!((a - (1.0 - (-1.5f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn reports_nonconvergence() {
        let tight = SeriesControl::new(1e-12, 1e-12, 5).unwrap();
        let p = ProductNormalParams::new(3.0, 3.0, 1.0, 1.0, -0.9, 1).unwrap();
        assert!(matches!(
            prob_nonpositive_sum(&p, &tight),
            Err(Error::NonConvergence { .. })
        ));
    }
}
