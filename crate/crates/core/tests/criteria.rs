use nalgebra::{DMatrix, SymmetricEigen};
use pde_select::criteria::{icomp_from_complexity, ubic_compact};
use pde_select::linalg::Matrix;
use pde_select::regression::{best_subsets, fit_subset, CandidateLibrary, ModelFit};
use pde_select::{bic, estimate_ifim_inverse, icomp, max_info_complexity, relative_scores, scan_a_n, ubic, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

fn to_ours(a: &DMatrix<f64>) -> Matrix<f64> {
    let rows: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
    Matrix::from_rows(&rows).unwrap()
}

fn eigen_oracle(a: &DMatrix<f64>) -> f64 {
    let lambda = SymmetricEigen::new(a.clone()).eigenvalues;
    let s = lambda.len() as f64;
    let mean = lambda.iter().sum::<f64>() / s;
    0.5 * s * mean.ln() - 0.5 * lambda.iter().map(|l| l.ln()).sum::<f64>()
}

fn spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = random_matrix(rng, n);
    let m = &a * a.transpose() + DMatrix::identity(n, n);
    // exact symmetry for the checker
    (&m + m.transpose()) * 0.5
}

fn random_library(n: usize, m: usize, seed: u64) -> CandidateLibrary<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let target = (0..n).map(|i| 0.8 * cols[0][i] + 0.3 + 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
    CandidateLibrary::new(Matrix::from_columns(&cols).unwrap(), (0..m).map(|j| format!("c{j}")).collect(), target).unwrap()
}

fn synthetic_fit(log_likelihood: f64, n: usize, k: usize) -> ModelFit<f64> {
    ModelFit {
        support: (0..k).collect(),
        coefficients: vec![1.0; k],
        intercept: 0.5,
        has_intercept: true,
        rss: 1.0,
        log_likelihood,
        n_samples: n,
        dof: k + 1,
    }
}

#[test]
fn penalty_arithmetic() {
    let ln_n = 10_000f64.ln();
    assert!((ln_n - 9.2103).abs() < 1e-4);
    let two = bic(&synthetic_fit(0.0, 10_000, 2)).unwrap();
    assert!((two.total - 18.4207).abs() < 1e-4);
    let three = bic(&synthetic_fit(0.0, 10_000, 3)).unwrap();
    assert_eq!(three.total - two.total, ln_n);
    let u1 = ubic(&synthetic_fit(0.0, 10_000, 2), 1.0).unwrap();
    assert!((u1.total - 27.6310).abs() < 1e-4);
    assert_eq!(u1.total, 3.0 * ln_n);
    assert!(matches!(ubic(&two_fit(), -0.5), Err(Error::NegativeUncertainty(_))));
}

fn two_fit() -> ModelFit<f64> {
    synthetic_fit(-12.5, 500, 2)
}

#[test]
fn ubic_with_zero_uncertainty_is_bic_bit_for_bit() {
    let fit = two_fit();
    assert_eq!(ubic(&fit, 0.0).unwrap().total.to_bits(), bic(&fit).unwrap().total.to_bits());
}

#[test]
fn compact_form_counts_the_intercept() {
    let fit = synthetic_fit(0.0, 10_000, 2);
    let compact = ubic_compact(&fit, 1.0).unwrap();
    assert_eq!(compact.penalty, 10_000f64.ln() * 4.0);
}

#[test]
fn complexity_closed_forms() {
    for s in 1..6 {
        assert_eq!(max_info_complexity(&Matrix::<f64>::identity(s)).unwrap().value, 0.0);
    }
    let c = max_info_complexity(&Matrix::from_diagonal(&[1.0, 4.0])).unwrap();
    assert!((c.value - (2.5f64.ln() - 2f64.ln())).abs() < 1e-12);
    assert!((c.value - 0.22314).abs() < 1e-5);
    let five = spd(&mut ChaCha8Rng::seed_from_u64(0), 5);
    assert!((max_info_complexity(&to_ours(&five)).unwrap().value - eigen_oracle(&five)).abs() < 1e-9);
}

#[test]
fn complexity_matches_eigenvalue_oracle_on_random_spd_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let n = 2 + trial % 7;
        let a = spd(&mut rng, n);
        let ours = max_info_complexity(&to_ours(&a)).unwrap().value;
        let oracle = eigen_oracle(&a);
        assert!((ours - oracle).abs() <= 1e-9, "trial {trial}: {ours} vs {oracle}");
    }
}

#[test]
fn complexity_rejects_bad_input() {
    let asym = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
    assert!(matches!(max_info_complexity(&asym), Err(Error::NotSymmetric(_))));
    let singular = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert!(matches!(max_info_complexity(&singular), Err(Error::NotPositiveDefinite { .. })));
}

#[test]
fn ifim_single_orthonormal_column() {
    let n = 100;
    let col: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
    let lib = CandidateLibrary::new(Matrix::from_columns(&[col]).unwrap(), vec!["a".into()], vec![0.0; n]).unwrap();
    // rss = N so that σ̂² = 1
    let fit = ModelFit {
        support: vec![0],
        coefficients: vec![0.0],
        intercept: 0.0,
        has_intercept: false,
        rss: n as f64,
        log_likelihood: -1.0,
        n_samples: n,
        dof: 1,
    };
    let f = estimate_ifim_inverse(&fit, &lib).unwrap();
    assert!((f[(0, 0)] - 1.0).abs() < 1e-15);
    assert!((f[(1, 1)] - 0.02).abs() < 1e-15);
    assert_eq!(f[(0, 1)], 0.0);
}

#[test]
fn ifim_matches_inverted_fisher_information() {
    let lib = random_library(40, 2, 77);
    let fit = fit_subset(&lib, &[0, 1], true).unwrap();
    let n = lib.n_samples() as f64;
    let s2 = fit.rss / n;
    let phi = DMatrix::from_fn(40, 2, |i, j| lib.matrix()[(i, j)]);
    let mut fisher = DMatrix::zeros(3, 3);
    fisher.view_mut((0, 0), (2, 2)).copy_from(&(phi.transpose() * &phi / s2));
    fisher[(2, 2)] = n / (2.0 * s2 * s2);
    let oracle = fisher.try_inverse().unwrap();
    let ours = estimate_ifim_inverse(&fit, &lib).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let tol = 1e-8 * oracle[(i, j)].abs().max(oracle.amax());
            assert!((ours[(i, j)] - oracle[(i, j)]).abs() <= tol, "({i},{j})");
        }
    }
}

#[test]
fn ifim_scales_with_the_target() {
    let lib = random_library(60, 3, 8);
    let c = 3.0;
    let scaled = lib.with_target(lib.target().iter().map(|v| c * v).collect()).unwrap();
    let a = estimate_ifim_inverse(&fit_subset(&lib, &[0, 2], true).unwrap(), &lib).unwrap();
    let b = estimate_ifim_inverse(&fit_subset(&scaled, &[0, 2], true).unwrap(), &scaled).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((b[(i, j)] - c * c * a[(i, j)]).abs() <= 1e-10 * b[(i, j)].abs());
        }
    }
    assert!((b[(2, 2)] - c.powi(4) * a[(2, 2)]).abs() <= 1e-10 * b[(2, 2)]);
}

#[test]
fn icomp_penalty_is_linear_in_a_n() {
    let lib = random_library(80, 4, 13);
    let fit = fit_subset(&lib, &[0, 1], true).unwrap();
    let a_n = 10_000f64.ln();
    let one = icomp(&fit, &lib, a_n).unwrap();
    let two = icomp(&fit, &lib, 2.0 * a_n).unwrap();
    assert_eq!(one.params.a_n, Some(a_n));
    assert_eq!(two.penalty, 2.0 * one.penalty);
    assert_eq!(one.total, one.neg2_loglik + one.penalty);
    let zero = icomp_from_complexity(&fit, 0.0, 1e6).unwrap();
    assert_eq!(zero.total, zero.neg2_loglik);
    assert!(icomp_from_complexity(&fit, 1.0, 0.0).is_err());
}

#[test]
fn relative_scores_subtract_the_minimum() {
    let mk = |t: f64| {
        let mut s = bic(&synthetic_fit(0.0, 100, 1)).unwrap();
        s.total = t;
        s
    };
    assert_eq!(relative_scores(&[mk(5.0), mk(3.0), mk(9.0)]).unwrap(), vec![2.0, 0.0, 6.0]);
    assert_eq!(relative_scores(&[mk(4.0), mk(4.0)]).unwrap(), vec![0.0, 0.0]);
    let mut other = mk(1.0);
    other.criterion = pde_select::Criterion::Icomp;
    assert!(matches!(relative_scores(&[mk(1.0), other]), Err(Error::MixedCriteria(..))));
}

#[test]
fn scan_reports_first_matching_a_n() {
    let lib = random_library(200, 4, 21);
    let fits = best_subsets(&lib, 4, pde_select::Strategy::Exhaustive).unwrap();
    let first = scan_a_n(&fits, &lib, &[1.0], &[0]).unwrap();
    let picked = first.entries[0].selected_support.clone();
    let report = scan_a_n(&fits, &lib, &[1.0, 5.0, 50.0], &picked).unwrap();
    assert_eq!(report.matched_a_n, Some(1.0));
    assert_eq!(report.entries.len(), 3);
    let missing = scan_a_n(&fits, &lib, &[1.0, 5.0], &[1, 2, 3]).unwrap();
    assert_eq!(missing.matched_a_n, None);
    assert!(scan_a_n(&fits, &lib, &[5.0, 1.0], &[0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complexity_is_invariant_under_orthogonal_similarity(seed in 0u64..100_000, n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = spd(&mut rng, n);
        let q = random_matrix(&mut rng, n).qr().q();
        let rotated = &q * &a * q.transpose();
        let rotated = (&rotated + rotated.transpose()) * 0.5;
        let c1 = max_info_complexity(&to_ours(&a)).unwrap().value;
        let c2 = max_info_complexity(&to_ours(&rotated)).unwrap().value;
        prop_assert!((c1 - c2).abs() <= 1e-9);
    }

    #[test]
    fn complexity_of_scaled_identity_is_zero(c in 1e-6f64..1e6, n in 1usize..9) {
        let m = Matrix::from_diagonal(&vec![c; n]);
        prop_assert!(max_info_complexity(&m).unwrap().value.abs() <= 1e-12);
    }

    #[test]
    fn complexity_is_nonnegative(seed in 0u64..100_000, n in 1usize..7) {
        let a = spd(&mut ChaCha8Rng::seed_from_u64(seed), n);
        prop_assert!(max_info_complexity(&to_ours(&a)).unwrap().value >= 0.0);
    }

    #[test]
    fn relative_scores_preserve_order(totals in prop::collection::vec(-1e6f64..1e6, 1..20)) {
        let scores: Vec<_> = totals.iter().map(|&t| {
            let mut s = bic(&synthetic_fit(0.0, 100, 1)).unwrap();
            s.total = t;
            s
        }).collect();
        let rel = relative_scores(&scores).unwrap();
        let argmin = |v: &[f64]| v.iter().enumerate().fold(0, |b, (i, x)| if *x < v[b] { i } else { b });
        prop_assert_eq!(argmin(&rel), argmin(&totals));
        prop_assert_eq!(rel[argmin(&rel)], 0.0);
        for i in 0..totals.len() {
            for j in 0..totals.len() {
                if totals[i] < totals[j] {
                    prop_assert!(rel[i] <= rel[j]);
                }
            }
        }
    }

    #[test]
    fn nested_bic_with_equal_likelihood_differs_by_log_n(ll in -1e5f64..1e5, n in 2usize..100_000, k in 1usize..15) {
        let a = bic(&synthetic_fit(ll, n, k)).unwrap().total;
        let b = bic(&synthetic_fit(ll, n, k + 1)).unwrap().total;
        prop_assert!(((b - a) - (n as f64).ln()).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn ubic_is_linear_in_u(u in 0.0f64..50.0) {
        let fit = two_fit();
        let d = ubic(&fit, u + 1.0).unwrap().total - ubic(&fit, u).unwrap().total;
        prop_assert!((d - 500f64.ln()).abs() <= 1e-9);
    }
}
