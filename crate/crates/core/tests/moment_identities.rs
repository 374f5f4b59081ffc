use ncx2diff::density::log_char_fn_sum;
use ncx2diff::moments::*;
use ncx2diff::{ChiSqDiffParams, ProductNormalParams};
use proptest::prelude::*;

fn direct_diff_moment(k: usize, q: &ChiSqDiffParams) -> f64 {
    let m1 = ncx2_moments_recursive(k, q.r(), q.lambda1()).unwrap();
    let m2 = ncx2_moments_recursive(k, q.r(), q.lambda2()).unwrap();
    let at = |m: &[f64], i: usize| if i == 0 { 1.0 } else { m[i - 1] };
    let mut total = 0.0;
    let mut c = 1.0;
    for j in 0..=k {
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += c * sign * at(&m1, j) * at(&m2, k - j);
        c = c * (k - j) as f64 / (j + 1) as f64;
    }
    total
}

#[test]
fn closed_form_diff_moments_match_direct_expansion() {
    for &r in &[0.5, 1.0, 2.0, 3.5, 7.0] {
        for &(l1, l2) in &[(0.0, 0.0), (1.0, 0.0), (0.0, 2.5), (4.0, 1.0), (0.3, 6.0), (2.0, 2.0)] {
            let q = ChiSqDiffParams::new(r, l1, l2).unwrap();
            for k in 1..=10 {
                let closed = diff_moment_value(k, &q).unwrap();
                let direct = direct_diff_moment(k, &q);
                // Odd moments of symmetric laws vanish; compare against the term scale there.
                let scale = if l1 == l2 && k % 2 == 1 { closed.largest_term } else { direct.abs() };
                let err = (closed.value - direct).abs() / scale;
                assert!(err <= 1e-12, "r={r} l=({l1},{l2}) k={k}: {} vs {direct} ({err:e})", closed.value);
            }
        }
    }
}

#[test]
fn diff_raw_moment_list() {
    let (r, l1, l2) = (1.5f64, 2.0f64, 0.5f64);
    let q = ChiSqDiffParams::new(r, l1, l2).unwrap();
    let (d, t) = (l1 - l2, r + l1 + l2);
    let want = [
        d,
        4.0 * t + d * d,
        12.0 * d * (t + 2.0) + d.powi(3),
        48.0 * t * t + 96.0 * (r + 2.0 * l1 + 2.0 * l2) + 24.0 * d * d * (t + 4.0) + d.powi(4),
    ];
    for (k, w) in want.iter().enumerate() {
        let got = diff_moment(k + 1, &q).unwrap();
        assert!((got - w).abs() <= 1e-12 * w.abs(), "k={}: {got} vs {w}", k + 1);
    }
}

#[test]
fn sum_moments_match_representation_expansion() {
    let grid = [
        (1.0, 2.0, 1.5, 0.5, -0.3, 2),
        (1.0, -1.0, 1.0, 1.0, 0.25, 3),
        (0.0, 0.0, 1.0, 1.0, 0.0, 1),
        (-0.4, 0.9, 0.7, 2.0, 0.9, 5),
        (2.0, 1.0, 1.0, 1.0, -0.75, 1),
        (1.0, -1.0, 1.0, 1.0, 1.0, 2),
        (0.5, 1.5, 1.2, 0.7, -1.0, 3),
    ];
    for (mx, my, sx, sy, rho, n) in grid {
        let p = ProductNormalParams::new(mx, my, sx, sy, rho, n).unwrap();
        let rep = p.to_chisq_diff();
        for k in 1..=10 {
            let closed = sum_moment(k, &p).unwrap();
            let direct = repr_moment_by_expansion(k, &rep).unwrap();
            let scale = if closed.cancellation_warning() { closed.largest_term } else { direct.abs() };
            let err = (closed.value - direct).abs() / scale;
            assert!(err <= 1e-10, "{p:?} k={k}: {} vs {direct} ({err:e})", closed.value);
        }
    }
}

#[test]
fn cumulants_rebuild_raw_moments() {
    let p = ProductNormalParams::new(1.0, 2.0, 1.5, 0.5, -0.3, 2).unwrap();
    let kappa: Vec<f64> = (1..=4).map(|k| sum_cumulant(k, &p).unwrap()).collect();
    let rebuilt = moments_from_cumulants(&kappa);
    for k in 1..=4 {
        let m = sum_moment(k, &p).unwrap().value;
        assert!((rebuilt[k - 1] - m).abs() <= 1e-10 * m.abs(), "k={k}: {} vs {m}", rebuilt[k - 1]);
    }
}

#[test]
fn cumulants_match_characteristic_function_derivatives() {
    let grid = [
        (1.0, 2.0, 1.5, 0.5, -0.3, 2),
        (1.0, 1.0, 1.0, 1.0, 0.5, 1),
        (0.0, 0.0, 1.0, 1.0, 0.0, 1),
        (-0.4, 0.9, 0.7, 2.0, 0.9, 5),
        (2.0, -1.0, 1.0, 1.0, -0.75, 3),
    ];
    for (mx, my, sx, sy, rho, n) in grid {
        let p = ProductNormalParams::new(mx, my, sx, sy, rho, n).unwrap();
        let h = 0.05 / (p.s() * (1.0 + p.n() as f64).sqrt());
        let fd = cumulants_from_log_cf(|t| log_char_fn_sum(t, &p), 4, h).unwrap();
        for k in 1..=4 {
            let exact = sum_cumulant(k, &p).unwrap();
            let err = (fd[k - 1] - exact).abs() / exact.abs().max(1e-3 * p.s().powi(k as i32));
            assert!(err <= 1e-5, "{p:?} k={k}: {} vs {exact} ({err:e})", fd[k - 1]);
        }
    }
}

#[test]
fn product_of_independent_standard_normals() {
    let p = ProductNormalParams::new(0.0, 0.0, 1.0, 1.0, 0.0, 1).unwrap();
    let m = sum_moment_set(4, &p).unwrap();
    assert!(m.raw[0].abs() < 1e-15);
    assert!((m.raw[1] - 1.0).abs() < 1e-14);
    assert!((m.raw[3] - 9.0).abs() < 1e-13);
    assert!((m.excess_kurtosis - 6.0).abs() < 1e-13);
}

proptest! {
    #[test]
    fn diff_cumulants_are_additive(r in 0.1f64..10.0, l1 in 0.0f64..8.0, l2 in 0.0f64..8.0, k in 1usize..12) {
        let q = ChiSqDiffParams::new(r, l1, l2).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let want = ncx2_cumulant(k, r, l1) + sign * ncx2_cumulant(k, r, l2);
        prop_assert!((diff_cumulant(k, &q) - want).abs() <= 1e-14 * want.abs().max(1.0));
    }

    #[test]
    fn sum_cumulants_match_scaled_components(
        mx in -2.0f64..2.0, my in -2.0f64..2.0, sx in 0.3f64..2.0, sy in 0.3f64..2.0,
        rho in -0.95f64..0.95, n in 1u32..6, k in 1usize..9,
    ) {
        let p = ProductNormalParams::new(mx, my, sx, sy, rho, n).unwrap();
        let rep = p.to_chisq_diff();
        let want = rep.scale_plus.powi(k as i32) * ncx2_cumulant(k, rep.r, rep.lambda_plus)
            + (-rep.scale_minus).powi(k as i32) * ncx2_cumulant(k, rep.r, rep.lambda_minus);
        let got = sum_cumulant(k, &p).unwrap();
        let scale = (rep.scale_plus.powi(k as i32) * ncx2_cumulant(k, rep.r, rep.lambda_plus)).abs()
            + (rep.scale_minus.powi(k as i32) * ncx2_cumulant(k, rep.r, rep.lambda_minus)).abs();
        prop_assert!((got - want).abs() <= 1e-12 * scale);
    }

    #[test]
    fn ncx2_closed_form_matches_recursion(r in 0.1f64..12.0, l in 0.0f64..15.0, m in 1usize..12) {
        let closed = ncx2_moment(m, r, l).unwrap();
        let rec = ncx2_moments_recursive(m, r, l).unwrap()[m - 1];
        prop_assert!((closed - rec).abs() <= 1e-12 * rec);
    }

    #[test]
    fn negation_flips_odd_moments(r in 0.2f64..6.0, l1 in 0.0f64..5.0, l2 in 0.0f64..5.0, k in 1usize..9) {
        let q = ChiSqDiffParams::new(r, l1, l2).unwrap();
        let a = diff_moment_value(k, &q).unwrap();
        let b = diff_moment(k, &q.negated()).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a.value - sign * b).abs() <= 1e-12 * a.largest_term);
    }
}
