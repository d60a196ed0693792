//! Property suites for the counterexample matrix.

mod common;

use rand::Rng;

use psfm_core::counterexample::{self, GrowthSpec};

#[test]
fn row_sum_recurrence_is_exact_for_power_of_two_growth() {
    let mut rng = common::rng(501);
    for _ in 0..20 {
        let base = 1u64 << rng.random_range(1..5u32);
        let ratio = 1u64 << rng.random_range(1..3u32);
        let m = counterexample::build(GrowthSpec::Geometric { base, ratio }, 128).unwrap();
        assert!(m.growth.is_dyadic());
        let report = counterexample::verify_properties(&m);
        assert_eq!(report.row_sums_exact, Some(true));
        assert_eq!(report.row_sums.max_defect, 0.0);
    }
}

#[test]
fn spectral_radius_below_frobenius_norm_always() {
    let mut rng = common::rng(502);
    for _ in 0..10 {
        let base = rng.random_range(2..12u64);
        let ratio = rng.random_range(2..4u64);
        let m = counterexample::build(GrowthSpec::Geometric { base, ratio }, 160).unwrap();
        for &k in &[8usize, 32, 160] {
            let ev = counterexample::truncated_spectrum(&m, k).unwrap();
            let max_abs = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let frob = m.partial_square_sum(k).sqrt();
            assert!(max_abs <= frob + 1e-12, "k={k}: {max_abs} vs {frob}");
        }
    }
}

#[test]
fn lanczos_tracks_dense_route_across_sizes() {
    let m = counterexample::build(GrowthSpec::Geometric { base: 8, ratio: 2 }, 1024).unwrap();
    for &k in &[16usize, 64, 256, 1024] {
        let dense = counterexample::truncated_spectrum(&m, k).unwrap();
        let dense_max = dense.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let sparse = counterexample::max_abs_eigenvalue(&m, k).unwrap();
        assert!(
            (sparse.max_abs - dense_max).abs() < 1e-9,
            "k={k}: lanczos {} dense {}",
            sparse.max_abs,
            dense_max
        );
    }
}

#[test]
fn section_max_eigenvalue_is_monotone_in_size() {
    // Sections are nested principal submatrices, so the top eigenvalue can
    // only grow with the section and the bottom only sink.
    let m = counterexample::build(GrowthSpec::Geometric { base: 8, ratio: 2 }, 512).unwrap();
    let mut prev_max = 0.0f64;
    for &k in &[8usize, 32, 128, 512] {
        let est = counterexample::max_abs_eigenvalue(&m, k).unwrap();
        assert!(est.max_abs >= prev_max - 1e-10);
        prev_max = est.max_abs;
    }
}

#[test]
fn partial_square_sums_increase_toward_bound() {
    let m = counterexample::build(GrowthSpec::Geometric { base: 8, ratio: 2 }, 2048).unwrap();
    let bound = m.growth.square_sum_bound();
    let mut prev = 0.0;
    for &k in &[16usize, 64, 256, 1024, 2048] {
        let s = m.partial_square_sum(k);
        assert!(s >= prev);
        assert!(s <= bound);
        prev = s;
    }
}

#[test]
fn complete_row_eigencheck_exactness_scales() {
    let m = counterexample::build(GrowthSpec::Geometric { base: 8, ratio: 2 }, 2048).unwrap();
    let report = counterexample::eigencheck_e(&m, 2048);
    // σ_i = 8(2^{i+1} − 1): complete rows 0..=7 inside 2048.
    assert_eq!(report.complete_rows, (0..=7).collect::<Vec<_>>());
    assert!(report.exact);
    assert_eq!(report.max_deviation, 0.0);
}
