//! Series densities against convolution and Fourier-inversion references.

#![allow(clippy::excessive_precision, clippy::type_complexity)]

use ncx2diff::density::*;
use ncx2diff::{ChiSqDiffParams, ProductNormalParams, SeriesControl};

include!("data/density_reference.in");

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

#[test]
fn double_series_matches_convolution() {
    let ctrl = SeriesControl::default();
    let mut worst = 0.0f64;
    for &(x, r, l1, l2, want) in DIFF_PDF {
        let q = ChiSqDiffParams::new(r, l1, l2).unwrap();
        let got = ncx2diff_pdf(x, &q, &ctrl).unwrap();
        worst = worst.max(rel_err(got, want));
        assert!(rel_err(got, want) <= 1e-10, "p({x}; {r}, {l1}, {l2}) = {got}, want {want}");
    }
    println!("worst relative error {worst:e}");
}

#[test]
fn equal_lambda_series_matches_convolution() {
    let ctrl = SeriesControl::default();
    for &(x, r, l1, l2, want) in DIFF_PDF.iter().filter(|row| row.2 == row.3) {
        let got = ncx2diff_pdf_equal(x, r, l1, &ctrl).unwrap();
        assert!(rel_err(got, want) <= 1e-10, "p({x}; {r}, {l1}, {l2}) = {got}, want {want}");
    }
}

#[test]
fn one_sided_series_matches_convolution() {
    let ctrl = SeriesControl::default();
    for &(x, r, l1, _, want) in DIFF_PDF.iter().filter(|row| row.3 == 0.0) {
        let got = ncx2diff_pdf_one_sided(x, r, l1, &ctrl).unwrap();
        assert!(rel_err(got, want) <= 1e-10, "p({x}; {r}, {l1}, 0) = {got}, want {want}");
    }
}

#[test]
fn cf_inversion_matches_convolution() {
    let ctrl = SeriesControl::new(1e-9, 1e-9, 10_000).unwrap();
    for &(x, r, l1, l2, want) in DIFF_PDF.iter().filter(|row| row.1 >= 1.0) {
        let cf = DiffCf(ChiSqDiffParams::new(r, l1, l2).unwrap());
        let got = cf_inversion_pdf(x, &cf, &ctrl).unwrap();
        assert!((got - want).abs() <= 1e-8, "p({x}; {r}, {l1}, {l2}) = {got}, want {want}");
    }
}

#[test]
fn sum_density_matches_inversion_reference() {
    let ctrl = SeriesControl::default();
    for &(y, mx, my, sx, sy, rho, n, want) in SUM_PDF {
        let p = ProductNormalParams::new(mx, my, sx, sy, rho, n as u32).unwrap();
        let got = sum_pdf(y, &p, &ctrl).unwrap();
        assert!(rel_err(got, want) <= 1e-9, "p_S({y}; {p:?}) = {got}, want {want}");
    }
}
