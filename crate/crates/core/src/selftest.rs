//! The acceptance suite as a library call.
//!
//! [`run`] evaluates nine criteria and returns a [`SelftestReport`] whose
//! JSON form depends only on the seed and the mode: every Monte Carlo stream
//! is derived from the seed, reductions run in a fixed order, and timings are
//! kept out of the report (see [`run_timed`]).

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::control::SeriesControl;
use crate::density::{
    cf_inversion_pdf, log_char_fn_sum, ncx2diff_pdf, ncx2diff_pdf_equal, singularity_constant, total_mass,
    vgdiff_pdf, vgdiff_pdf_confluent, DiffCf,
};
use crate::error::Result;
use crate::moments::{cumulants_from_log_cf, diff_moment_value, repr_moment_by_expansion, sum_cumulant, sum_moment};
use crate::probability::{prob_nonpositive_central, prob_nonpositive_sum, table1, TABLE1_TOLERANCE};
use crate::repr::{ChiSqDiffParams, ChiSqDiffRepr, ProductNormalParams};
use crate::sampling::{
    derive_seed, k_statistic_variances, k_statistics_streaming, ks_two_sample, monte_carlo_mean, Route, SampleParams,
    Sampler, CHUNK,
};
use crate::stein::{null_check, stein_batch, standard_family, Method, Operator, TestFunction};

/// Sample sizes. `Full` uses the sizes the criteria are stated at; `Quick`
/// divides them so the whole suite runs in a few seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    Quick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestConfig {
    pub seed: u64,
    pub mode: Mode,
}

impl SelftestConfig {
    pub fn new(seed: u64, mode: Mode) -> Self {
        SelftestConfig { seed, mode }
    }

    fn mc_count(&self) -> usize {
        match self.mode {
            Mode::Full => 10_000_000,
            Mode::Quick => 100_000,
        }
    }

    fn ks_size(&self) -> usize {
        match self.mode {
            Mode::Full => 100_000,
            Mode::Quick => 2_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value <= bound`
    Le,
    /// `value >= bound`
    Ge,
    /// `value > bound`
    Gt,
}

/// One numeric comparison inside a criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn new(label: impl Into<String>, value: f64, relation: Relation, bound: f64) -> Self {
        let pass = match relation {
            Relation::Le => value <= bound,
            Relation::Ge => value >= bound,
            Relation::Gt => value > bound,
        };
        Check {
            label: label.into(),
            value,
            relation,
            bound,
            pass,
        }
    }

    fn le(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(label, value, Relation::Le, bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    fn from_checks(id: u8, name: &str, checks: Vec<Check>, summary: String) -> Self {
        CriterionReport {
            id,
            name: name.into(),
            pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
            summary,
            checks,
        }
    }

    fn failed(id: u8, name: &str, reason: String) -> Self {
        CriterionReport {
            id,
            name: name.into(),
            pass: false,
            summary: format!("error: {reason}"),
            checks: Vec::new(),
        }
    }

    /// `PASS`/`FAIL` line for logs.
    pub fn status_line(&self) -> String {
        format!(
            "criterion {} {}: {} ({})",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.summary
        )
    }

    /// Number of failing checks.
    pub fn failing(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub mode: Mode,
    pub criteria: Vec<CriterionReport>,
    pub passed: usize,
    pub failed: usize,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn criterion(&self, id: u8) -> Option<&CriterionReport> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "table1"),
    (2, "negativity_oracles"),
    (3, "density"),
    (4, "normalisation"),
    (5, "moments"),
    (6, "representation_equality"),
    (7, "stein"),
    (8, "singularity"),
    (9, "determinism"),
];

/// Runs every criterion.
pub fn run(cfg: &SelftestConfig) -> SelftestReport {
    run_timed(cfg).0
}

/// Runs every criterion and also returns the wall time of each in seconds.
pub fn run_timed(cfg: &SelftestConfig) -> (SelftestReport, Vec<(u8, f64)>) {
    let mut criteria = Vec::with_capacity(CRITERIA.len());
    let mut timings = Vec::with_capacity(CRITERIA.len());
    for (id, _) in CRITERIA {
        let start = Instant::now();
        criteria.push(run_criterion(id, cfg));
        timings.push((id, start.elapsed().as_secs_f64()));
    }
    let passed = criteria.iter().filter(|c| c.pass).count();
    let report = SelftestReport {
        seed: cfg.seed,
        mode: cfg.mode,
        failed: criteria.len() - passed,
        passed,
        criteria,
    };
    (report, timings)
}

/// Runs one criterion by number (1 to 9).
pub fn run_criterion(id: u8, cfg: &SelftestConfig) -> CriterionReport {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map_or("unknown", |(_, n)| n);
    let result = match id {
        1 => table1_criterion(),
        2 => negativity_criterion(cfg),
        3 => density_criterion(),
        4 => normalisation_criterion(),
        5 => moments_criterion(cfg),
        6 => representation_criterion(cfg),
        7 => stein_criterion(cfg),
        8 => singularity_criterion(),
        9 => determinism_criterion(cfg),
        _ => return CriterionReport::failed(id, name, format!("no criterion {id}")),
    };
    match result {
        Ok((checks, summary)) => CriterionReport::from_checks(id, name, checks, summary),
        Err(e) => CriterionReport::failed(id, name, e.to_string()),
    }
}

type Outcome = Result<(Vec<Check>, String)>;

fn params(mx: f64, my: f64, sx: f64, sy: f64, rho: f64, n: u32) -> Result<ProductNormalParams> {
    ProductNormalParams::new(mx, my, sx, sy, rho, n)
}

fn product_label(p: &ProductNormalParams) -> String {
    format!(
        "mu=({},{}) sigma=({},{}) rho={} n={}",
        p.mu_x(),
        p.mu_y(),
        p.sigma_x(),
        p.sigma_y(),
        p.rho(),
        p.n()
    )
}

fn diff_label(q: &ChiSqDiffParams) -> String {
    format!("r={} lambda=({},{})", q.r(), q.lambda1(), q.lambda2())
}

fn count_failing(checks: &[Check]) -> usize {
    checks.iter().filter(|c| !c.pass).count()
}

fn table1_criterion() -> Outcome {
    let ctrl = SeriesControl::default();
    let report = table1(&ctrl)?;
    let mut checks = Vec::new();
    let mut exception = None;
    for e in &report.entries {
        let label = format!("mu=({},{}) rho={}", e.mu_x, e.mu_y, e.rho);
        if e.mu_x == 0.0 && e.mu_y == 0.0 && e.rho == -0.75 {
            exception = Some(*e);
            checks.push(Check::le(
                format!("{label} vs 0.7699"),
                (e.probability - 0.7699).abs(),
                TABLE1_TOLERANCE,
            ));
            checks.push(Check::new(
                format!("{label} printed value flagged"),
                e.abs_diff,
                Relation::Gt,
                TABLE1_TOLERANCE,
            ));
        } else {
            checks.push(Check::le(label, e.abs_diff, TABLE1_TOLERANCE));
        }
    }
    let exact = prob_nonpositive_central(1, -0.75)?;
    let arcsin = 2.0 / PI * 0.875f64.sqrt().asin();
    checks.push(Check::le("central (0,0) rho=-0.75 vs arcsine form", (exact - arcsin).abs(), 1e-12));
    let mirror = report
        .entry(0.0, 0.0, 0.75)
        .map_or(f64::NAN, |e| e.probability);
    let computed = exception.as_ref().map_or(f64::NAN, |e| e.probability);
    checks.push(Check::le(
        "reflection P(rho=-0.75) + P(rho=0.75) = 1 at (0,0)",
        (computed + mirror - 1.0).abs(),
        1e-12,
    ));
    let summary = report.summary();
    let others: Vec<String> = report
        .discrepancies()
        .iter()
        .filter(|e| !(e.mu_x == 0.0 && e.mu_y == 0.0 && e.rho == -0.75))
        .map(|e| format!("({},{},{}): {:.7} vs {:.4}", e.mu_x, e.mu_y, e.rho, e.probability, e.published))
        .collect();
    let text = format!(
        "{} of {} cells within {:e}; (0,0,-0.75) = {:.7} flagged against 0.7499; other discrepancies: {}",
        summary.within_tolerance,
        summary.cells,
        TABLE1_TOLERANCE,
        computed,
        if others.is_empty() { "none".to_string() } else { others.join(", ") }
    );
    Ok((checks, text))
}

fn negativity_sets() -> Result<Vec<ProductNormalParams>> {
    [
        (1.0, 1.0, 1.0, 1.0, -0.75, 1),
        (2.0, -1.0, 1.0, 1.0, 0.0, 1),
        (0.5, 1.5, 1.2, 0.7, 0.75, 1),
        (1.0, -1.0, 1.0, 1.0, -0.75, 2),
        (0.0, 0.0, 1.0, 1.0, 0.0, 2),
        (1.0, 2.0, 1.5, 0.5, 0.75, 2),
        (-0.3, 0.8, 2.0, 0.5, -0.75, 5),
        (1.0, 0.0, 1.0, 1.0, 0.0, 5),
        (0.4, 0.4, 1.0, 1.0, 0.75, 5),
        (1.0, 1.0, 1.0, 1.0, 0.5, 1),
        (2.0, 2.0, 1.0, 1.0, 0.25, 2),
        (-1.0, 0.5, 0.8, 1.3, -0.25, 5),
    ]
    .into_iter()
    .map(|(a, b, c, d, e, f)| params(a, b, c, d, e, f))
    .collect()
}

fn negativity_criterion(cfg: &SelftestConfig) -> Outcome {
    let ctrl = SeriesControl::default();
    let count = cfg.mc_count();
    let mut checks = Vec::new();
    for (i, p) in negativity_sets()?.iter().enumerate() {
        let exact = prob_nonpositive_sum(p, &ctrl)?.probability;
        let sampler = Sampler::new(Route::Definitional, SampleParams::Product(*p))?;
        let mc = monte_carlo_mean(&sampler, count, derive_seed(cfg.seed, 200 + i as u64), |x| {
            if x <= 0.0 {
                1.0
            } else {
                0.0
            }
        });
        // Binomial standard error at the exact probability; the sample version
        // degenerates when no draw lands on one side.
        let se = (exact * (1.0 - exact) / count as f64).sqrt();
        checks.push(Check::le(product_label(p), (mc.mean - exact).abs() / se, 4.0));
    }
    let worst = checks.iter().map(|c| c.value).fold(0.0, f64::max);
    let summary = format!(
        "{} sets, {} draws each; largest deviation {:.3} s.e.",
        checks.len(),
        count,
        worst
    );
    Ok((checks, summary))
}

const DENSITY_R: [f64; 3] = [1.0, 2.0, 3.5];
const DENSITY_LAMBDA: [f64; 3] = [0.0, 1.0, 4.0];
const DENSITY_X: [f64; 6] = [-3.0, -1.0, -0.25, 0.25, 1.0, 3.0];

fn density_grid() -> Result<Vec<ChiSqDiffParams>> {
    let mut out = Vec::new();
    for r in DENSITY_R {
        for l1 in DENSITY_LAMBDA {
            for l2 in DENSITY_LAMBDA {
                out.push(ChiSqDiffParams::new(r, l1, l2)?);
            }
        }
    }
    Ok(out)
}

fn density_criterion() -> Outcome {
    let ctrl = SeriesControl::default();
    let cf_ctrl = SeriesControl::new(1e-9, 1e-9, 10_000)?;
    let mut checks = Vec::new();
    for q in density_grid()? {
        let mut worst: f64 = 0.0;
        for x in DENSITY_X {
            let series = ncx2diff_pdf(x, &q, &ctrl)?;
            let inverted = cf_inversion_pdf(x, &DiffCf(q), &cf_ctrl)?;
            worst = worst.max((series - inverted).abs());
        }
        checks.push(Check::le(format!("series vs inversion {}", diff_label(&q)), worst, 1e-6));
    }
    for r in DENSITY_R {
        for l in DENSITY_LAMBDA {
            let q = ChiSqDiffParams::new(r, l, l)?;
            let mut worst: f64 = 0.0;
            for x in DENSITY_X {
                let equal = ncx2diff_pdf_equal(x, r, l, &ctrl)?;
                let general = ncx2diff_pdf(x, &q, &ctrl)?;
                worst = worst.max((equal - general).abs());
            }
            checks.push(Check::le(format!("equal-lambda form vs series {}", diff_label(&q)), worst, 1e-9));
        }
    }
    for r in [0.5, 1.0, 2.0, 3.5, 7.0] {
        let mut worst: f64 = 0.0;
        for x in [0.01, 0.25, 1.0, 3.0, 7.5, 15.0] {
            let k = vgdiff_pdf(x, r)?;
            let u = vgdiff_pdf_confluent(x, r)?;
            worst = worst.max((k - u).abs() / k.abs());
        }
        checks.push(Check::le(format!("confluent vs Bessel central form r={r}"), worst, 1e-10));
    }
    let failing = count_failing(&checks);
    let summary = format!("{} comparisons, {} failing", checks.len(), failing);
    Ok((checks, summary))
}

fn normalisation_criterion() -> Outcome {
    let ctrl = SeriesControl::default();
    let mut checks = Vec::new();
    for r in [0.5, 1.0, 2.0, 3.5] {
        for l1 in DENSITY_LAMBDA {
            for l2 in DENSITY_LAMBDA {
                let q = ChiSqDiffParams::new(r, l1, l2)?;
                let mass = total_mass(&q, &ctrl)?;
                checks.push(Check::le(diff_label(&q), (mass - 1.0).abs(), 1e-6));
            }
        }
    }
    let worst = checks.iter().map(|c| c.value).fold(0.0, f64::max);
    let summary = format!("{} parameter sets; largest |mass - 1| = {:.3e}", checks.len(), worst);
    Ok((checks, summary))
}

fn moment_sets() -> Result<Vec<ProductNormalParams>> {
    [
        (1.0, 2.0, 1.5, 0.5, -0.3, 2),
        (1.0, -1.0, 1.0, 1.0, 0.25, 3),
        (0.0, 0.0, 1.0, 1.0, 0.0, 1),
        (-0.4, 0.9, 0.7, 2.0, 0.9, 5),
        (2.0, 1.0, 1.0, 1.0, -0.75, 1),
        (1.0, -1.0, 1.0, 1.0, 1.0, 2),
        (0.5, 1.5, 1.2, 0.7, -1.0, 3),
    ]
    .into_iter()
    .map(|(a, b, c, d, e, f)| params(a, b, c, d, e, f))
    .collect()
}

fn unit_repr(q: &ChiSqDiffParams) -> ChiSqDiffRepr {
    ChiSqDiffRepr {
        scale_plus: 1.0,
        scale_minus: 1.0,
        r: q.r(),
        lambda_plus: q.lambda1(),
        lambda_minus: q.lambda2(),
        shift: 0.0,
    }
}

fn moments_criterion(cfg: &SelftestConfig) -> Outcome {
    let mut checks = Vec::new();
    for q in density_grid()? {
        let rep = unit_repr(&q);
        let mut worst: f64 = 0.0;
        for k in 1..=10 {
            let closed = diff_moment_value(k, &q)?;
            let direct = repr_moment_by_expansion(k, &rep)?;
            // Odd moments of a symmetric law vanish; measure against the term scale.
            let scale = if q.lambda1() == q.lambda2() && k % 2 == 1 { closed.largest_term } else { direct.abs() };
            worst = worst.max((closed.value - direct).abs() / scale);
        }
        checks.push(Check::le(format!("difference moments k<=10 {}", diff_label(&q)), worst, 1e-12));
    }
    for p in moment_sets()? {
        let rep = p.to_chisq_diff();
        let mut worst: f64 = 0.0;
        for k in 1..=10 {
            let closed = sum_moment(k, &p)?;
            let direct = repr_moment_by_expansion(k, &rep)?;
            let scale = if closed.cancellation_warning() { closed.largest_term } else { direct.abs() };
            worst = worst.max((closed.value - direct).abs() / scale);
        }
        checks.push(Check::le(format!("sum moments k<=10 {}", product_label(&p)), worst, 1e-10));
    }
    for p in moment_sets()? {
        let h = 0.05 / (p.s() * (1.0 + p.n() as f64).sqrt());
        let fd = cumulants_from_log_cf(|t| log_char_fn_sum(t, &p), 4, h)?;
        let mut worst: f64 = 0.0;
        for k in 1..=4 {
            let exact = sum_cumulant(k, &p)?;
            // Vanishing cumulants are compared on the scale s^k.
            worst = worst.max((fd[k - 1] - exact).abs() / exact.abs().max(1e-3 * p.s().powi(k as i32)));
        }
        checks.push(Check::le(format!("cumulants vs log-cf differences {}", product_label(&p)), worst, 1e-5));
    }
    let count = cfg.mc_count();
    for (i, p) in [params(1.0, 1.0, 1.0, 1.0, 0.5, 1)?, params(1.0, -1.0, 1.0, 1.0, 0.25, 2)?]
        .iter()
        .enumerate()
    {
        let mut kappa = [0.0; 8];
        for (k, v) in kappa.iter_mut().enumerate() {
            *v = sum_cumulant(k + 1, p)?;
        }
        let sampler = Sampler::new(Route::Definitional, SampleParams::Product(*p))?;
        let ks = k_statistics_streaming(&sampler, count, derive_seed(cfg.seed, 500 + i as u64), kappa[0])?;
        let var = k_statistic_variances(&kappa, count);
        for k in 0..4 {
            checks.push(Check::le(
                format!("empirical k{} {}", k + 1, product_label(p)),
                (ks[k] - kappa[k]).abs() / var[k].sqrt(),
                4.0,
            ));
        }
    }
    let failing = count_failing(&checks);
    let summary = format!(
        "{} comparisons ({} draws for empirical cumulants), {} failing",
        checks.len(),
        count,
        failing
    );
    Ok((checks, summary))
}

const KS_REPETITIONS: usize = 100;
const KS_REQUIRED: usize = 95;

fn representation_criterion(cfg: &SelftestConfig) -> Outcome {
    let sets = [
        params(1.0, -1.0, 1.0, 1.0, -1.0, 2)?,
        params(0.5, 1.5, 1.2, 0.7, -0.75, 1)?,
        params(1.0, 2.0, 1.5, 0.5, 0.0, 3)?,
        params(1.0, 1.0, 1.0, 1.0, 0.75, 1)?,
        params(1.0, -1.0, 1.0, 1.0, 0.25, 2)?,
        params(0.3, 0.8, 0.9, 1.4, 1.0, 2)?,
    ];
    let size = cfg.ks_size();
    let mut checks = Vec::new();
    for (i, p) in sets.iter().enumerate() {
        let def = Sampler::new(Route::Definitional, SampleParams::Product(*p))?;
        let rep = Sampler::new(Route::Representation, SampleParams::Product(*p))?;
        let mut accepted = 0;
        for rep_index in 0..KS_REPETITIONS {
            let base = derive_seed(cfg.seed, 600 + i as u64);
            let a = def.sample(size, derive_seed(base, 2 * rep_index as u64));
            let b = rep.sample(size, derive_seed(base, 2 * rep_index as u64 + 1));
            if ks_two_sample(&a, &b)?.p_value >= 0.01 {
                accepted += 1;
            }
        }
        checks.push(Check::new(
            format!("KS accepted of {KS_REPETITIONS} {}", product_label(p)),
            accepted as f64,
            Relation::Ge,
            KS_REQUIRED as f64,
        ));
    }
    let least = checks.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let summary = format!(
        "{} sets, {} repetitions of {} vs {} draws; fewest acceptances {}",
        checks.len(),
        KS_REPETITIONS,
        size,
        size,
        least
    );
    Ok((checks, summary))
}

fn stein_criterion(cfg: &SelftestConfig) -> Outcome {
    let sets = [
        ChiSqDiffParams::new(2.0, 1.0, 0.5)?,
        ChiSqDiffParams::new(1.5, 2.0, 0.0)?,
        ChiSqDiffParams::new(2.0, 0.0, 0.0)?,
        ChiSqDiffParams::new(1.0, 0.0, 0.0)?,
        ChiSqDiffParams::new(3.5, 0.0, 4.0)?,
        ChiSqDiffParams::new(0.5, 1.0, 1.0)?,
    ];
    let count = cfg.mc_count();
    let quad = Method::Quadrature {
        ctrl: SeriesControl::new(1e-10, 1e-10, 100_000)?,
    };
    let mut checks = Vec::new();
    let mut rows = 0;
    for (i, q) in sets.iter().enumerate() {
        let mc = null_check(
            q,
            Method::MonteCarlo {
                count,
                seed: derive_seed(cfg.seed, 700 + i as u64),
            },
        )?;
        let qd = null_check(q, quad)?;
        rows += mc.len();
        let null = mc.iter().map(|r| r.estimate.abs() / r.uncertainty).fold(0.0, f64::max);
        checks.push(Check::le(format!("null max |E|/se {}", diff_label(q)), null, 4.0));
        let agree = mc
            .iter()
            .zip(&qd)
            .map(|(m, d)| (m.estimate - d.estimate).abs() / m.uncertainty.hypot(d.uncertainty))
            .fold(0.0, f64::max);
        checks.push(Check::le(format!("quadrature vs Monte Carlo max deviation {}", diff_label(q)), agree, 4.0));
    }
    // Each operator is built for one law and applied to samples of a nearby one.
    let perturbed = [
        (Operator::A1, ChiSqDiffParams::new(2.0, 1.0, 0.5)?, ChiSqDiffParams::new(2.0, 2.0, 0.5)?),
        (Operator::A2, ChiSqDiffParams::new(1.5, 2.0, 0.0)?, ChiSqDiffParams::new(1.5, 3.0, 0.0)?),
        (Operator::A3, ChiSqDiffParams::new(2.0, 0.0, 0.0)?, ChiSqDiffParams::new(3.0, 0.0, 0.0)?),
    ];
    let family = standard_family();
    for (i, (op, q_op, q_law)) in perturbed.iter().enumerate() {
        let jobs: Vec<(Operator, &TestFunction)> = family.iter().map(|f| (*op, f)).collect();
        let est = stein_batch(
            &jobs,
            q_op,
            q_law,
            Method::MonteCarlo {
                count,
                seed: derive_seed(cfg.seed, 750 + i as u64),
            },
        )?;
        let power = est.iter().map(|e| e.estimate.abs() / e.uncertainty).fold(0.0, f64::max);
        checks.push(Check::new(
            format!("power {} for {} on {}", op.name(), diff_label(q_op), diff_label(q_law)),
            power,
            Relation::Ge,
            6.0,
        ));
    }
    let failing = count_failing(&checks);
    let summary = format!(
        "{} null rows over {} sets at {} draws, {} power checks; {} failing",
        rows,
        sets.len(),
        count,
        perturbed.len(),
        failing
    );
    Ok((checks, summary))
}

fn singularity_criterion() -> Outcome {
    let ctrl = SeriesControl::default();
    let x = 1e-5f64;
    let mut checks = Vec::new();
    for (l1, l2) in [(0.0, 0.0), (1.0, 0.5), (2.0, 2.0)] {
        let q = ChiSqDiffParams::new(1.0, l1, l2)?;
        let ratio = ncx2diff_pdf(x, &q, &ctrl)? / (-x.ln()) / singularity_constant(l1, l2);
        checks.push(Check::le(format!("|ratio - 1| at x=1e-5 {}", diff_label(&q)), (ratio - 1.0).abs(), 0.1));
    }
    let worst = checks.iter().map(|c| c.value).fold(0.0, f64::max);
    let summary = format!("largest relative deviation {:.4}", worst);
    Ok((checks, summary))
}

fn determinism_criterion(cfg: &SelftestConfig) -> Outcome {
    let p = params(1.0, -1.0, 1.0, 1.0, 0.25, 2)?;
    let count = 3 * CHUNK + 17;
    let seed = derive_seed(cfg.seed, 900);
    let mut checks = Vec::new();
    for route in [Route::Definitional, Route::Representation] {
        let sampler = Sampler::new(route, SampleParams::Product(p))?;
        let first = sampler.sample(count, seed);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .map_err(|e| crate::error::Error::Unsupported(format!("thread pool: {e}")))?;
        let second = pool.install(|| sampler.sample(count, seed));
        let mismatches = first
            .iter()
            .zip(&second)
            .filter(|(a, b)| a.to_bits() != b.to_bits())
            .count();
        checks.push(Check::le(format!("{route:?} sample reproduced on 3 threads"), mismatches as f64, 0.0));
        let m1 = monte_carlo_mean(&sampler, count, seed, |x| x * x);
        let m2 = pool.install(|| monte_carlo_mean(&sampler, count, seed, |x| x * x));
        let same = m1.mean.to_bits() == m2.mean.to_bits() && m1.std_error.to_bits() == m2.std_error.to_bits();
        checks.push(Check::le(
            format!("{route:?} reduction reproduced on 3 threads"),
            if same { 0.0 } else { 1.0 },
            0.0,
        ));
    }
    let ctrl = SeriesControl::default();
    let a = table1(&ctrl)?.to_csv();
    let b = table1(&ctrl)?.to_csv();
    checks.push(Check::le("table1 csv reproduced", if a == b { 0.0 } else { 1.0 }, 0.0));
    let failing = count_failing(&checks);
    let summary = format!("{} reproducibility checks, {} failing", checks.len(), failing);
    Ok((checks, summary))
}
