use std::f64::consts::PI;

use ncx2diff::export::read_numeric_csv;
use ncx2diff::probability::*;
use ncx2diff::sampling::{derive_seed, monte_carlo_mean, Route, SampleParams, Sampler};
use ncx2diff::{ChiSqDiffParams, ProductNormalParams, SeriesControl};

fn ctrl() -> SeriesControl {
    SeriesControl::default()
}

fn prob(mx: f64, my: f64, rho: f64, n: u32) -> f64 {
    let p = ProductNormalParams::new(mx, my, 1.0, 1.0, rho, n).unwrap();
    prob_nonpositive_sum(&p, &ctrl()).unwrap().probability
}

#[test]
fn published_examples() {
    for (mx, my, rho, want) in [
        (0.0, 0.0, 0.0, 0.5000),
        (1.0, 1.0, 0.5, 0.1923),
        (2.0, -1.0, 0.25, 0.8209),
        (2.0, 2.0, 0.75, 0.0285),
        (1.0, 0.0, -0.25, 0.5483),
    ] {
        let v = prob(mx, my, rho, 1);
        assert!((v - want).abs() <= 5e-5, "({mx},{my},{rho}): {v} vs {want}");
    }
}

#[test]
fn central_values() {
    assert!((prob_nonpositive_central(1, 0.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((prob_nonpositive_central(1, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    assert!((prob_nonpositive_central(1, 0.75).unwrap() - 2.0 / PI * 0.125f64.sqrt().asin()).abs() < 1e-14);
    assert!((prob_nonpositive_central(1, -0.75).unwrap() - 2.0 / PI * 0.875f64.sqrt().asin()).abs() < 1e-14);
}

#[test]
fn central_reduction() {
    for n in [1, 2, 3, 5, 10] {
        for rho in [-0.9, -0.75, -0.3, 0.0, 0.25, 0.6, 0.95] {
            let series = prob(0.0, 0.0, rho, n);
            let closed = prob_nonpositive_central(n, rho).unwrap();
            assert!((series - closed).abs() <= 1e-12, "n={n} rho={rho}: {series} vs {closed}");
        }
    }
}

#[test]
fn reflection_identity_on_the_table_grid() {
    for (mx, my) in TABLE1_MEANS {
        for rho in TABLE1_RHOS {
            let total = prob(mx, my, rho, 1) + prob(mx, -my, -rho, 1);
            assert!((total - 1.0).abs() <= 1e-12, "({mx},{my},{rho}): {total}");
        }
    }
}

#[test]
fn central_row_decreases_in_rho() {
    let row: Vec<f64> = TABLE1_RHOS.iter().map(|&rho| prob(0.0, 0.0, rho, 1)).collect();
    assert!(row.windows(2).all(|w| w[1] < w[0]), "{row:?}");
}

#[test]
fn difference_examples() {
    for r in [0.5, 1.0, 3.0] {
        let v = prob_nonpositive_diff(&ChiSqDiffParams::new(r, 0.0, 0.0).unwrap(), &ctrl()).unwrap();
        assert!((v.probability - 0.5).abs() < 1e-12);
    }
    let v = prob_nonpositive_diff(&ChiSqDiffParams::new(1.0, 2.0, 2.0).unwrap(), &ctrl()).unwrap();
    assert!((v.probability - 0.5).abs() < 1e-12);
    let d = prob_nonpositive_diff(&ChiSqDiffParams::new(1.0, 2.0, 0.0).unwrap(), &ctrl()).unwrap();
    let s = prob(1.0, 1.0, 0.0, 1);
    assert!((d.probability - s).abs() < 1e-12);
    assert!((d.probability - 0.2670).abs() <= 5e-5);
}

#[test]
fn table_regression() {
    let report = table1(&ctrl()).unwrap();
    assert_eq!(report.entries.len(), 56);
    let flagged: Vec<(f64, f64, f64)> = report
        .discrepancies()
        .iter()
        .map(|e| (e.mu_x, e.mu_y, e.rho))
        .collect();
    // The documented typo plus three entries the published table rounds wrongly.
    assert_eq!(
        flagged,
        vec![(0.0, 0.0, -0.75), (1.0, -1.0, 0.5), (1.0, 1.0, -0.5), (1.0, 1.0, 0.25)]
    );
    let e = report.entry(0.0, 0.0, -0.75).unwrap();
    assert!((e.probability - 0.7699).abs() <= 5e-5);
    assert_eq!(e.published, 0.7499);
    assert_eq!(e.rounded(), 0.7699);
    let summary = report.summary();
    assert_eq!(summary.within_tolerance, 52);
    assert!(summary.max_abs_diff > 0.0199 && summary.max_abs_diff < 0.0201);

    let csv = report.to_csv();
    assert_eq!(csv, table1(&ctrl()).unwrap().to_csv());
    let (header, rows) = read_numeric_csv(&csv).unwrap();
    assert_eq!(header, ["mu_x", "mu_y", "rho", "probability", "published", "abs_diff"]);
    assert_eq!(rows.len(), 56);
    for (row, e) in rows.iter().zip(&report.entries) {
        assert_eq!(row[3], Some(e.probability));
    }
    let grid = report.render_grid();
    assert!(grid.contains("0.7699*"));
}

#[test]
fn table_agrees_with_monte_carlo() {
    let report = table1(&ctrl()).unwrap();
    let count = 10_000_000;
    for (i, e) in report.entries.iter().enumerate() {
        let p = ProductNormalParams::new(e.mu_x, e.mu_y, 1.0, 1.0, e.rho, 1).unwrap();
        let s = Sampler::new(Route::Definitional, SampleParams::Product(p)).unwrap();
        let mc = monte_carlo_mean(&s, count, derive_seed(2024, i as u64), |x| if x <= 0.0 { 1.0 } else { 0.0 });
        let se = (e.probability * (1.0 - e.probability) / count as f64).sqrt();
        let z = (mc.mean - e.probability).abs() / se;
        assert!(z <= 4.0, "({},{},{}): {} vs {} ({z:.2} s.e.)", e.mu_x, e.mu_y, e.rho, mc.mean, e.probability);
    }
}

#[test]
fn tail_bound_reported() {
    let p = ProductNormalParams::new(2.0, 2.0, 1.0, 1.0, 0.3, 4).unwrap();
    let tight = prob_nonpositive_sum(&p, &ctrl()).unwrap();
    assert!(tight.tail_bound <= 1e-12);
    let loose = prob_nonpositive_sum(&p, &SeriesControl::new(1e-4, 1e-4, 10_000).unwrap()).unwrap();
    assert!(loose.terms_used < tight.terms_used);
    assert!((loose.probability - tight.probability).abs() <= loose.tail_bound + 1e-15);
}
