use ncx2diff::moments::{diff_moment, sum_cumulant, sum_moment};
use ncx2diff::sampling::*;
use ncx2diff::{ChiSqDiffParams, ProductNormalParams, SeriesControl};
use ncx2diff::probability::prob_nonpositive_sum;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn product(mx: f64, my: f64, sx: f64, sy: f64, rho: f64, n: u32) -> ProductNormalParams {
    ProductNormalParams::new(mx, my, sx, sy, rho, n).unwrap()
}

fn sampler(route: Route, params: SampleParams) -> Sampler {
    Sampler::new(route, params).unwrap()
}

#[test]
fn ncx2_mean_and_variance() {
    let s = sampler(Route::Representation, SampleParams::Ncx2 { r: 3.0, lambda: 2.0 });
    let n = 1_000_000;
    let m = monte_carlo_mean(&s, n, 1, |x| x);
    assert!((m.mean - 5.0).abs() <= 4.0 * m.std_error, "{m:?}");
    let k = k_statistics_streaming(&s, n, 2, 5.0).unwrap();
    // Var of the sample variance is (κ4 + 2κ2²)/n with κ2 = 14, κ4 = 48 (r + 4λ).
    let se = ((528.0 + 2.0 * 196.0) / n as f64).sqrt();
    assert!((k[1] - 14.0).abs() <= 4.0 * se, "{}", k[1]);
}

#[test]
fn product_mean() {
    let s = sampler(Route::Definitional, SampleParams::Product(product(0.0, 0.0, 1.0, 1.0, 0.5, 1)));
    let m = monte_carlo_mean(&s, 1_000_000, 3, |x| x);
    assert!((m.mean - 0.5).abs() <= 4.0 * m.std_error, "{m:?}");
}

#[test]
fn negativity_frequency() {
    let p = product(1.0, 1.0, 1.0, 1.0, 0.5, 1);
    let exact = prob_nonpositive_sum(&p, &SeriesControl::default()).unwrap().probability;
    assert!((exact - 0.1923).abs() <= 5e-5);
    let s = sampler(Route::Definitional, SampleParams::Product(p));
    let m = monte_carlo_mean(&s, 10_000_000, 4, |x| if x <= 0.0 { 1.0 } else { 0.0 });
    assert!((m.mean - exact).abs() <= 4.0 * m.std_error, "{m:?} vs {exact}");
}

#[test]
fn routes_agree_under_ks() {
    let p = product(1.0, -1.0, 1.0, 1.0, 0.25, 2);
    let a = sample_product_definitional(&p, 100_000, 5).unwrap();
    let b = sample_sum_via_representation(&p, 100_000, 6).unwrap();
    assert!(ks_two_sample(&a.values, &b.values).unwrap().p_value >= 0.01);

    let a = sampler(Route::Definitional, SampleParams::Ncx2 { r: 3.0, lambda: 1.5 }).sample(50_000, 7);
    let b = sample_ncx2(3.0, 1.5, 50_000, 8).unwrap();
    assert!(ks_two_sample(&a, &b.values).unwrap().p_value >= 0.01);

    let q = ChiSqDiffParams::new(2.0, 1.0, 0.5).unwrap();
    let a = sampler(Route::Definitional, SampleParams::Diff(q)).sample(50_000, 9);
    let b = sample_diff(&q, 50_000, 10).unwrap();
    assert!(ks_two_sample(&a, &b.values).unwrap().p_value >= 0.01);
}

#[test]
fn degenerate_correlation_routes_agree() {
    for rho in [-1.0, 1.0] {
        let p = product(0.7, -0.2, 1.1, 0.9, rho, 3);
        let a = sample_product_definitional(&p, 50_000, 11).unwrap();
        let b = sample_sum_via_representation(&p, 50_000, 12).unwrap();
        assert!(ks_two_sample(&a.values, &b.values).unwrap().p_value >= 0.01, "rho={rho}");
    }
}

#[test]
fn ks_reference_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let b: Vec<f64> = (0..10_000).map(|_| 3.0 + Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
    let same = ks_two_sample(&a, &a).unwrap();
    assert_eq!(same.statistic, 0.0);
    assert_eq!(same.p_value, 1.0);
    assert!(ks_two_sample(&a, &b).unwrap().p_value < 1e-10);
}

#[test]
fn third_cumulant_of_a_product() {
    let p = product(1.0, 1.0, 1.0, 1.0, 0.5, 1);
    let mut kappa = [0.0; 8];
    for (k, v) in kappa.iter_mut().enumerate() {
        *v = sum_cumulant(k + 1, &p).unwrap();
    }
    let n = 10_000_000;
    let s = sampler(Route::Definitional, SampleParams::Product(p));
    let ks = k_statistics_streaming(&s, n, 13, kappa[0]).unwrap();
    let var = k_statistic_variances(&kappa, n);
    assert!((ks[2] - kappa[2]).abs() <= 4.0 * var[2].sqrt(), "{} vs {}", ks[2], kappa[2]);
}

#[test]
fn high_moments_against_monte_carlo() {
    let q = ChiSqDiffParams::new(2.0, 1.0, 0.5).unwrap();
    let s = sampler(Route::Representation, SampleParams::Diff(q));
    let m = monte_carlo_mean(&s, 10_000_000, 14, |x| x.powi(6));
    let exact = diff_moment(6, &q).unwrap();
    assert!((m.mean - exact).abs() <= 4.0 * m.std_error, "{m:?} vs {exact}");

    let p = product(1.0, -1.0, 1.0, 1.0, 0.5, 3);
    let s = sampler(Route::Definitional, SampleParams::Product(p));
    let m = monte_carlo_mean(&s, 10_000_000, 15, |x| x.powi(4));
    let exact = sum_moment(4, &p).unwrap().value;
    assert!((m.mean - exact).abs() <= 4.0 * m.std_error, "{m:?} vs {exact}");
}

#[test]
fn batch_metadata_round_trips() {
    let p = product(1.0, 2.0, 1.5, 0.5, -0.3, 2);
    let batch = sample_product_definitional(&p, 1000, 99).unwrap();
    let json = serde_json::to_string(&batch.sidecar()).unwrap();
    let back: SampleSidecar = serde_json::from_str(&json).unwrap();
    assert_eq!(back, batch.sidecar());
    let csv = batch.to_csv();
    let (header, rows) = ncx2diff::export::read_numeric_csv(&csv).unwrap();
    assert_eq!(header, ["value"]);
    let parsed: Vec<f64> = rows.iter().map(|r| r[0].unwrap()).collect();
    assert_eq!(parsed, batch.values);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn seeds_reproduce_across_pools(seed in any::<u64>(), count in 1usize..200_000) {
        let s = sampler(Route::Representation, SampleParams::Product(product(0.5, -1.0, 1.0, 2.0, 0.4, 2)));
        let a = s.sample(count, seed);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let b = pool.install(|| s.sample(count, seed));
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert_eq!(a.len(), count);
    }
}
