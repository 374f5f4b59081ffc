//! Stein operators for the difference `T = V1 - V2` and an empirical harness.
//!
//! * `A1` (fourth order) characterises `T` for any `(r, λ1, λ2)`;
//! * `A2` (third order) needs `λ1 = 0` or `λ2 = 0`;
//! * `A3` (second order) needs `λ1 = λ2 = 0`.
//!
//! Under the matching law `E[A f(T)] = 0` for every test function in the
//! class. The harness estimates that expectation by Monte Carlo over the
//! representation sampler or by quadrature against the series density.
//!
//! Test functions have the form `e^{-a x²}(p(x) + s(x) sin x + c(x) cos x)`
//! with polynomials `p, s, c` and `a >= 0`; their derivatives are again of
//! that form and are computed exactly. Every such function and its
//! derivatives is bounded by a polynomial, and `T` has all moments, so each
//! one lies in the class the characterisation requires.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::control::SeriesControl;
use crate::density::ncx2diff_pdf;
use crate::error::{Error, Result};
use crate::quadrature::adaptive;
use crate::repr::ChiSqDiffParams;
use crate::sampling::{monte_carlo_means, Route, SampleParams, Sampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operator {
    A1,
    A2,
    A3,
}

impl Operator {
    /// Highest derivative of `f` the operator uses.
    pub fn order(self) -> usize {
        match self {
            Operator::A1 => 4,
            Operator::A2 => 3,
            Operator::A3 => 2,
        }
    }

    /// Whether the operator characterises the law with these parameters.
    pub fn applies_to(self, q: &ChiSqDiffParams) -> bool {
        match self {
            Operator::A1 => true,
            Operator::A2 => q.lambda1() == 0.0 || q.lambda2() == 0.0,
            Operator::A3 => q.lambda1() == 0.0 && q.lambda2() == 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::A1 => "A1",
            Operator::A2 => "A2",
            Operator::A3 => "A3",
        }
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect()
}

fn poly_add(a: &[f64], b: &[f64], scale_b: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += scale_b * v;
    }
    out
}

/// `x · c(x) · k`.
fn poly_shift_mul(c: &[f64], k: f64) -> Vec<f64> {
    let mut out = vec![0.0; c.len() + 1];
    for (i, v) in c.iter().enumerate() {
        out[i + 1] = k * v;
    }
    out
}

/// `e^{-a x²}(p(x) + s(x) sin x + c(x) cos x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampedForm {
    pub a: f64,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub c: Vec<f64>,
}

impl DampedForm {
    fn derivative(&self) -> DampedForm {
        let m = -2.0 * self.a;
        // (q e^{-ax²})' = (q' - 2a x q) e^{-ax²}; sin' = cos, cos' = -sin.
        let p = poly_add(&poly_deriv(&self.p), &poly_shift_mul(&self.p, m), 1.0);
        let s = poly_add(&poly_add(&poly_deriv(&self.s), &poly_shift_mul(&self.s, m), 1.0), &self.c, -1.0);
        let c = poly_add(&poly_add(&poly_deriv(&self.c), &poly_shift_mul(&self.c, m), 1.0), &self.s, 1.0);
        DampedForm { a: self.a, p, s, c }
    }

    fn eval(&self, x: f64) -> f64 {
        let mut v = poly_eval(&self.p, x);
        if !self.s.is_empty() || !self.c.is_empty() {
            let (sin, cos) = x.sin_cos();
            v += poly_eval(&self.s, x) * sin + poly_eval(&self.c, x) * cos;
        }
        if self.a == 0.0 {
            v
        } else {
            v * (-self.a * x * x).exp()
        }
    }
}

/// A test function with exact derivatives through order 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub name: String,
    /// `(weight, derivatives 0..=4)` summed.
    terms: Vec<(f64, [DampedForm; 5])>,
}

impl TestFunction {
    /// `e^{-a x²}(p(x) + s(x) sin x + c(x) cos x)` with `a >= 0`.
    pub fn damped(name: impl Into<String>, a: f64, p: Vec<f64>, s: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("damping must be nonnegative, got {a}")));
        }
        let f0 = DampedForm { a, p, s, c };
        let f1 = f0.derivative();
        let f2 = f1.derivative();
        let f3 = f2.derivative();
        let f4 = f3.derivative();
        Ok(TestFunction {
            name: name.into(),
            terms: vec![(1.0, [f0, f1, f2, f3, f4])],
        })
    }

    /// `x^p e^{-x²/2}`.
    pub fn gauss_poly(p: usize) -> Self {
        let mut coef = vec![0.0; p + 1];
        coef[p] = 1.0;
        Self::damped(format!("x^{p}*exp(-x^2/2)"), 0.5, coef, vec![], vec![]).expect("valid")
    }

    /// `e^{-x²}`.
    pub fn gauss() -> Self {
        Self::damped("exp(-x^2)", 1.0, vec![1.0], vec![], vec![]).expect("valid")
    }

    /// `sin(x) e^{-x²/4}`.
    pub fn sin_gauss() -> Self {
        Self::damped("sin(x)*exp(-x^2/4)", 0.25, vec![], vec![1.0], vec![]).expect("valid")
    }

    /// The polynomial `Σ c_i x^i`.
    pub fn polynomial(name: impl Into<String>, coef: Vec<f64>) -> Self {
        Self::damped(name, 0.0, coef, vec![], vec![]).expect("valid")
    }

    /// `Σ w_i f_i`.
    pub fn combination(name: impl Into<String>, parts: &[(f64, &TestFunction)]) -> Self {
        let terms = parts
            .iter()
            .flat_map(|(w, f)| f.terms.iter().map(move |(v, d)| (w * v, d.clone())))
            .collect();
        TestFunction {
            name: name.into(),
            terms,
        }
    }

    /// The `k`-th derivative at `x`, `k <= 4`.
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        self.terms.iter().map(|(w, d)| w * d[k].eval(x)).sum()
    }

    /// Derivatives `0..=4` at `x`, sharing the exponential and the
    /// trigonometric factors across orders.
    pub fn jet(&self, x: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (w, d) in &self.terms {
            let damp = if d[0].a == 0.0 { 1.0 } else { (-d[0].a * x * x).exp() };
            let trig = !d[0].s.is_empty() || !d[0].c.is_empty();
            let (sin, cos) = if trig { x.sin_cos() } else { (0.0, 0.0) };
            for (k, form) in d.iter().enumerate() {
                let mut v = poly_eval(&form.p, x);
                if trig {
                    v += poly_eval(&form.s, x) * sin + poly_eval(&form.c, x) * cos;
                }
                out[k] += w * damp * v;
            }
        }
        out
    }
}

/// The built-in family: `x^p e^{-x²/2}` for `p = 0..=6`, `e^{-x²}` and
/// `sin(x) e^{-x²/4}`.
pub fn standard_family() -> Vec<TestFunction> {
    let mut out: Vec<TestFunction> = (0..=6).map(TestFunction::gauss_poly).collect();
    out.push(TestFunction::gauss());
    out.push(TestFunction::sin_gauss());
    out
}

/// `16x f⁗ + 16r f‴ − (8x + 4(λ1−λ2)) f″ − 4(λ1+λ2+r) f′ + (x − (λ1−λ2)) f`.
pub fn a1_from_jet(j: &[f64; 5], x: f64, q: &ChiSqDiffParams) -> f64 {
    let (r, l1, l2) = (q.r(), q.lambda1(), q.lambda2());
    16.0 * x * j[4] + 16.0 * r * j[3] - (8.0 * x + 4.0 * (l1 - l2)) * j[2] - 4.0 * (l1 + l2 + r) * j[1]
        + (x - (l1 - l2)) * j[0]
}

/// `8x f‴ + (8r − 4x) f″ − (2x + 4r + 2λ1) f′ + (x − λ1) f`, the `λ2 = 0` form.
pub fn a2_from_jet(j: &[f64; 5], x: f64, r: f64, lambda1: f64) -> f64 {
    8.0 * x * j[3] + (8.0 * r - 4.0 * x) * j[2] - (2.0 * x + 4.0 * r + 2.0 * lambda1) * j[1] + (x - lambda1) * j[0]
}

/// `4x f″ + 4r f′ − x f`.
pub fn a3_from_jet(j: &[f64; 5], x: f64, r: f64) -> f64 {
    4.0 * x * j[2] + 4.0 * r * j[1] - x * j[0]
}

pub fn apply_a1(f: &TestFunction, x: f64, q: &ChiSqDiffParams) -> f64 {
    a1_from_jet(&f.jet(x), x, q)
}

/// `A2` for `λ2 = 0`.
pub fn apply_a2(f: &TestFunction, x: f64, r: f64, lambda1: f64) -> f64 {
    a2_from_jet(&f.jet(x), x, r, lambda1)
}

pub fn apply_a3(f: &TestFunction, x: f64, r: f64) -> f64 {
    a3_from_jet(&f.jet(x), x, r)
}

/// `(A f)(x)` for the operator built from `q`.
///
/// `A2` with `λ1 = 0 < λ2` is the `λ2 = 0` operator for `-T`, applied to
/// `g(y) = f(-y)` at `y = -x`.
pub fn apply(op: Operator, f: &TestFunction, x: f64, q: &ChiSqDiffParams) -> Result<f64> {
    apply_jet(op, &f.jet(x), x, q)
}

fn apply_jet(op: Operator, j: &[f64; 5], x: f64, q: &ChiSqDiffParams) -> Result<f64> {
    if !op.applies_to(q) {
        return Err(Error::Domain(format!(
            "{} needs {} (got λ1 = {}, λ2 = {})",
            op.name(),
            if op == Operator::A2 { "λ1 = 0 or λ2 = 0" } else { "λ1 = λ2 = 0" },
            q.lambda1(),
            q.lambda2()
        )));
    }
    Ok(match op {
        Operator::A1 => a1_from_jet(j, x, q),
        Operator::A3 => a3_from_jet(j, x, q.r()),
        Operator::A2 if q.lambda2() == 0.0 => a2_from_jet(j, x, q.r(), q.lambda1()),
        Operator::A2 => {
            let g = [j[0], -j[1], j[2], -j[3], j[4]];
            a2_from_jet(&g, -x, q.r(), q.lambda2())
        }
    })
}

/// How to estimate `E[A f(W)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    MonteCarlo { count: usize, seed: u64 },
    Quadrature { ctrl: SeriesControl },
}

/// An expectation estimate with one standard error (Monte Carlo) or the
/// integration error bound (quadrature).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinEstimate {
    pub estimate: f64,
    pub uncertainty: f64,
}

impl SteinEstimate {
    /// `|estimate| <= k · uncertainty`.
    pub fn within(&self, k: f64) -> bool {
        self.estimate.abs() <= k * self.uncertainty
    }
}

/// `E[A f(T)]` with `A` built from `q` and `T` drawn from `q` as well.
pub fn stein_expectation(op: Operator, f: &TestFunction, q: &ChiSqDiffParams, method: Method) -> Result<SteinEstimate> {
    stein_expectation_under(op, f, q, q, method)
}

/// `E[A f(W)]` with `A` built from `q_op` and `W` following `q_law`.
pub fn stein_expectation_under(
    op: Operator,
    f: &TestFunction,
    q_op: &ChiSqDiffParams,
    q_law: &ChiSqDiffParams,
    method: Method,
) -> Result<SteinEstimate> {
    let jobs = [(op, f)];
    Ok(stein_batch(&jobs, q_op, q_law, method)?[0])
}

/// Several `(operator, function)` pairs over one sample or one density.
pub fn stein_batch(
    jobs: &[(Operator, &TestFunction)],
    q_op: &ChiSqDiffParams,
    q_law: &ChiSqDiffParams,
    method: Method,
) -> Result<Vec<SteinEstimate>> {
    for (op, _) in jobs {
        // Validate once so the hot loops can unwrap.
        apply_jet(*op, &[0.0; 5], 0.0, q_op)?;
    }
    match method {
        Method::MonteCarlo { count, seed } => {
            if count < 2 {
                return Err(Error::Domain("Monte Carlo needs at least 2 draws".into()));
            }
            let sampler = Sampler::new(Route::Representation, SampleParams::Diff(*q_law))?;
            // Jets are computed once per distinct function and draw.
            let mut distinct: Vec<&TestFunction> = Vec::new();
            let slots: Vec<usize> = jobs
                .iter()
                .map(|(_, f)| match distinct.iter().position(|g| std::ptr::eq(*g, *f)) {
                    Some(i) => i,
                    None => {
                        distinct.push(f);
                        distinct.len() - 1
                    }
                })
                .collect();
            let means = monte_carlo_means(&sampler, count, seed, jobs.len(), |x, out| {
                let jets: Vec<[f64; 5]> = distinct.iter().map(|f| f.jet(x)).collect();
                for ((slot, (op, _)), i) in out.iter_mut().zip(jobs).zip(&slots) {
                    *slot = apply_jet(*op, &jets[*i], x, q_op).unwrap_or(f64::NAN);
                }
            });
            Ok(means
                .into_iter()
                .map(|m| SteinEstimate {
                    estimate: m.mean,
                    uncertainty: m.std_error,
                })
                .collect())
        }
        Method::Quadrature { ctrl } => {
            // Jobs share most quadrature nodes, so density values are cached.
            let cache = RefCell::new(HashMap::new());
            jobs.iter()
                .map(|(op, f)| quadrature_expectation(*op, f, q_op, q_law, &ctrl, &cache))
                .collect()
        }
    }
}

/// `∫ A f(x) p(x) dx`, folded onto `[0, ∞)` as `g(u) + g(-u)` and mapped by
/// `u = c t/(1 - t)` with `c` the standard deviation of the law.
fn quadrature_expectation(
    op: Operator,
    f: &TestFunction,
    q_op: &ChiSqDiffParams,
    q_law: &ChiSqDiffParams,
    ctrl: &SeriesControl,
    cache: &RefCell<HashMap<u64, f64>>,
) -> Result<SteinEstimate> {
    let failure: Cell<Option<Error>> = Cell::new(None);
    let scale = 2.0 * (q_law.r() + q_law.lambda1() + q_law.lambda2()).sqrt();
    let g = |x: f64| -> f64 {
        let cached = cache.borrow().get(&x.to_bits()).copied();
        let p = match cached {
            Some(p) => p,
            None => match ncx2diff_pdf(x, q_law, ctrl) {
                Ok(p) => {
                    cache.borrow_mut().insert(x.to_bits(), p);
                    p
                }
                Err(e) => {
                    failure.set(Some(e));
                    return 0.0;
                }
            },
        };
        if p == 0.0 {
            return 0.0;
        }
        apply_jet(op, &f.jet(x), x, q_op).unwrap_or(f64::NAN) * p
    };
    let est = adaptive(
        |t| {
            let w = 1.0 - t;
            let u = scale * t / w;
            let jac = scale / (w * w);
            let v = (g(u) + g(-u)) * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        ctrl.abs_tol.max(1e-13),
        0.0,
        8,
        4000,
    )?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(SteinEstimate {
        estimate: est.value,
        uncertainty: est.error,
    })
}

/// One row of the exported Stein report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinRow {
    pub operator: Operator,
    pub test_function: String,
    pub params: ChiSqDiffParams,
    pub method: String,
    pub estimate: f64,
    pub uncertainty: f64,
    pub pass: bool,
}

/// Null check of every applicable operator on the standard family: passes
/// when `|estimate| <= 4 · uncertainty`.
pub fn null_check(q: &ChiSqDiffParams, method: Method) -> Result<Vec<SteinRow>> {
    let family = standard_family();
    let ops: Vec<Operator> = [Operator::A1, Operator::A2, Operator::A3]
        .into_iter()
        .filter(|op| op.applies_to(q))
        .collect();
    let jobs: Vec<(Operator, &TestFunction)> = ops.iter().flat_map(|op| family.iter().map(move |f| (*op, f))).collect();
    let estimates = stein_batch(&jobs, q, q, method)?;
    let method_name = match method {
        Method::MonteCarlo { .. } => "monte_carlo",
        Method::Quadrature { .. } => "quadrature",
    };
    Ok(jobs
        .iter()
        .zip(estimates)
        .map(|((op, f), e)| SteinRow {
            operator: *op,
            test_function: f.name.clone(),
            params: *q,
            method: method_name.into(),
            estimate: e.estimate,
            uncertainty: e.uncertainty,
            pass: e.within(4.0),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_gaussian_polynomial() {
        let f = TestFunction::gauss_poly(2);
        let x = 0.7f64;
        let e = (-0.5 * x * x).exp();
        // f = x² e, f' = (2x - x³) e, f'' = (2 - 5x² + x⁴) e
        assert!((f.eval(0, x) - x * x * e).abs() < 1e-15);
        assert!((f.eval(1, x) - (2.0 * x - x.powi(3)) * e).abs() < 1e-15);
        assert!((f.eval(2, x) - (2.0 - 5.0 * x * x + x.powi(4)) * e).abs() < 1e-15);
    }

    #[test]
    fn derivatives_of_sin_gauss_by_finite_differences() {
        let f = TestFunction::sin_gauss();
        let h = 1e-3;
        for &x in &[-1.3, 0.2, 2.5] {
            for k in 0..4 {
                let fd = (f.eval(k, x - 2.0 * h) - 8.0 * f.eval(k, x - h) + 8.0 * f.eval(k, x + h) - f.eval(k, x + 2.0 * h))
                    / (12.0 * h);
                assert!((fd - f.eval(k + 1, x)).abs() < 1e-9, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn jet_matches_single_derivatives() {
        let f = TestFunction::combination(
            "mix",
            &[(0.5, &TestFunction::gauss_poly(3)), (-2.0, &TestFunction::sin_gauss())],
        );
        let j = f.jet(1.1);
        for (k, v) in j.iter().enumerate() {
            assert!((v - f.eval(k, 1.1)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_function_reduces_to_mean() {
        let one = TestFunction::polynomial("1", vec![1.0]);
        let q = ChiSqDiffParams::new(2.0, 1.0, 0.5).unwrap();
        assert_eq!(apply_a1(&one, 3.0, &q), 3.0 - 0.5);
        assert_eq!(apply_a2(&one, 3.0, 2.0, 1.0), 2.0);
        assert_eq!(apply_a3(&one, 3.0, 2.0), -3.0);
    }

    #[test]
    fn operators_check_parameters() {
        let q = ChiSqDiffParams::new(2.0, 1.0, 0.5).unwrap();
        let f = TestFunction::gauss();
        assert!(apply(Operator::A2, &f, 0.1, &q).is_err());
        assert!(apply(Operator::A3, &f, 0.1, &q).is_err());
        assert!(apply(Operator::A1, &f, 0.1, &q).is_ok());
    }

    #[test]
    fn a2_reflection_matches_lambda2_zero_form() {
        let f = TestFunction::sin_gauss();
        let q = ChiSqDiffParams::new(1.5, 0.0, 2.0).unwrap();
        let g = TestFunction::damped("sin(-x)e", 0.25, vec![], vec![-1.0], vec![]).unwrap();
        let x = 0.8;
        let direct = apply(Operator::A2, &f, x, &q).unwrap();
        assert!((direct - apply_a2(&g, -x, 1.5, 2.0)).abs() < 1e-14);
    }

    #[test]
    fn central_odd_integrand_is_exactly_zero() {
        let one = TestFunction::polynomial("1", vec![1.0]);
        let q = ChiSqDiffParams::new(3.0, 0.0, 0.0).unwrap();
        let e = stein_expectation(Operator::A3, &one, &q, Method::Quadrature { ctrl: SeriesControl::default() }).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn quadrature_null_for_first_moments() {
        let x = TestFunction::polynomial("x", vec![0.0, 1.0]);
        let q = ChiSqDiffParams::new(2.0, 1.0, 0.5).unwrap();
        let ctrl = SeriesControl::default();
        let e = stein_expectation(Operator::A1, &x, &q, Method::Quadrature { ctrl }).unwrap();
        assert!(e.estimate.abs() < 1e-9, "{e:?}");
    }
}
