use nalgebra::{DMatrix, DVector};
use pde_select::linalg::Matrix;
use pde_select::regression::{best_subsets, checked_loglik, fit_subset, gaussian_loglik, CandidateLibrary, Strategy as Search};
use pde_select::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

fn random_library(n: usize, m: usize, seed: u64) -> CandidateLibrary<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let target = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let names = (0..m).map(|j| format!("c{j}")).collect();
    CandidateLibrary::new(Matrix::from_columns(&cols).unwrap(), names, target).unwrap()
}

fn subsets_up_to(m: usize, max: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << m))
        .filter(|mask| mask.count_ones() as usize <= max)
        .map(|mask| (0..m).filter(|j| mask & (1 << j) != 0).collect())
        .collect()
}

/// Solves the normal equations of `[1 | Φ_S]` directly.
fn normal_equations(lib: &CandidateLibrary<f64>, support: &[usize]) -> Vec<f64> {
    let n = lib.n_samples();
    let x = DMatrix::from_fn(n, support.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            lib.matrix()[(i, support[j - 1])]
        }
    });
    let y = DVector::from_column_slice(lib.target());
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * y;
    (xtx.try_inverse().unwrap() * xty).iter().copied().collect()
}

#[test]
fn coefficients_match_normal_equations_on_every_small_support() {
    let lib = random_library(30, 5, 11);
    for support in subsets_up_to(5, 3) {
        let fit = fit_subset(&lib, &support, true).unwrap();
        let oracle = normal_equations(&lib, &support);
        let ours: Vec<f64> = std::iter::once(fit.intercept).chain(fit.coefficients.iter().copied()).collect();
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{support:?}: {a} vs {b}");
        }
    }
}

#[test]
fn exact_linear_fit() {
    let lib = CandidateLibrary::new(
        Matrix::from_columns(&[vec![1.0_f64, 2.0, 3.0]]).unwrap(),
        vec!["a".into()],
        vec![2.0, 4.0, 6.0],
    )
    .unwrap();
    let fit = fit_subset(&lib, &[0], false).unwrap();
    assert!((fit.coefficients[0] - 2.0).abs() < 1e-14);
    assert_eq!(fit.rss, 0.0);
    assert_eq!(checked_loglik(fit.rss, 3).unwrap_err().to_string(), Error::ExactFit.to_string());
}

#[test]
fn known_coefficients_within_standard_error_band() {
    let (n, sigma) = (50, 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cols: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let noise = Normal::new(0.0, sigma).unwrap();
    let target: Vec<f64> = (0..n)
        .map(|i| 1.5 * cols[0][i] - 0.7 * cols[1][i] + noise.sample(&mut rng))
        .collect();
    let lib = CandidateLibrary::new(
        Matrix::from_columns(&cols).unwrap(),
        (0..4).map(|j| format!("c{j}")).collect(),
        target,
    )
    .unwrap();
    let fit = fit_subset(&lib, &[0, 1], false).unwrap();

    // explicit 2×2 inverse of the Gram matrix
    let (a, b, c) = (
        cols[0].iter().map(|v| v * v).sum::<f64>(),
        cols[0].iter().zip(&cols[1]).map(|(x, y)| x * y).sum::<f64>(),
        cols[1].iter().map(|v| v * v).sum::<f64>(),
    );
    let det = a * c - b * b;
    let inv = [[c / det, -b / det], [-b / det, a / det]];
    let r0: f64 = cols[0].iter().zip(lib.target()).map(|(x, y)| x * y).sum();
    let r1: f64 = cols[1].iter().zip(lib.target()).map(|(x, y)| x * y).sum();
    let oracle = [inv[0][0] * r0 + inv[0][1] * r1, inv[1][0] * r0 + inv[1][1] * r1];
    for (c, o) in fit.coefficients.iter().zip(oracle) {
        assert!((c - o).abs() < 1e-10);
    }
    for (j, truth) in [1.5, -0.7].into_iter().enumerate() {
        let se = sigma * inv[j][j].sqrt();
        assert!((fit.coefficients[j] - truth).abs() <= 5.0 * se, "coef {j}");
    }
}

#[test]
fn duplicated_column_is_rank_deficient() {
    let lib = CandidateLibrary::new(
        Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap(),
        vec!["a".into(), "b".into()],
        vec![1.0, 0.0, 2.0],
    )
    .unwrap();
    assert!(matches!(fit_subset(&lib, &[0, 1], false), Err(Error::RankDeficient { .. })));
}

#[test]
fn loglik_closed_form() {
    let v = gaussian_loglik(100.0_f64, 100);
    assert!((v + 141.8939).abs() < 1e-4);
    assert!(gaussian_loglik(0.0_f64, 10).is_infinite());
}

/// Maximizes the Gaussian log-likelihood over σ² by repeated grid refinement.
fn grid_loglik(rss: f64, n: usize) -> f64 {
    let nf = n as f64;
    let ll = |s2: f64| -0.5 * nf * (std::f64::consts::TAU * s2).ln() - rss / (2.0 * s2);
    let (mut lo, mut hi) = (1e-6, 1e3);
    for _ in 0..60 {
        let step = (hi - lo) / 100.0;
        let best = (0..=100)
            .map(|i| lo + i as f64 * step)
            .max_by(|a, b| ll(*a).partial_cmp(&ll(*b)).unwrap())
            .unwrap();
        lo = (best - step).max(1e-12);
        hi = best + step;
    }
    ll(0.5 * (lo + hi))
}

#[test]
fn loglik_matches_grid_oracle() {
    let ours = gaussian_loglik(3.7_f64, 200);
    let oracle = grid_loglik(3.7, 200);
    assert!((ours - oracle).abs() <= 1e-8 * oracle.abs(), "{ours} vs {oracle}");
}

#[test]
fn orthogonal_columns_pick_the_generating_one() {
    let cols = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]];
    let target = cols[0].iter().map(|v| 2.0 * v).collect();
    let lib = CandidateLibrary::new(
        Matrix::from_columns(&cols).unwrap(),
        vec!["a".into(), "b".into(), "c".into()],
        target,
    )
    .unwrap();
    let fits = best_subsets(&lib, 1, Search::Exhaustive).unwrap();
    assert_eq!(fits[0].support, vec![0]);
}

#[test]
fn singletons_agree_between_strategies() {
    let lib = random_library(60, 8, 3);
    let e = best_subsets(&lib, 1, Search::Exhaustive).unwrap();
    let f = best_subsets(&lib, 1, Search::Forward).unwrap();
    assert_eq!(e[0].support, f[0].support);
}

#[test]
fn exhaustive_search_is_the_brute_force_optimum() {
    let lib = random_library(80, 10, 4);
    let ex = best_subsets(&lib, 3, Search::Exhaustive).unwrap();
    let fw = best_subsets(&lib, 3, Search::Forward).unwrap();
    assert!(ex[2].rss <= fw[2].rss);
    let brute = subsets_up_to(10, 3)
        .into_iter()
        .filter(|s| s.len() == 3)
        .map(|s| fit_subset(&lib, &s, true).unwrap().rss)
        .fold(f64::INFINITY, f64::min);
    assert!((ex[2].rss - brute).abs() <= 1e-10 * brute);
}

#[test]
fn library_csv_round_trip_is_exact() {
    let lib = random_library(20, 3, 9);
    let mut buf = Vec::new();
    lib.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",__target__"));
    let back = CandidateLibrary::<f64>::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, lib);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rss_is_monotone_in_nested_supports(seed in 0u64..10_000, extra in 1usize..4) {
        let lib = random_library(40, 6, seed);
        let small = vec![0, 2];
        let mut big = small.clone();
        big.extend([1, 3, 4, 5].into_iter().take(extra));
        big.sort_unstable();
        let a = fit_subset(&lib, &small, true).unwrap().rss;
        let b = fit_subset(&lib, &big, true).unwrap().rss;
        prop_assert!(b <= a + 1e-9 * a);
    }

    #[test]
    fn fit_is_permutation_equivariant(seed in 0u64..10_000, perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let lib = random_library(30, 5, seed);
        let cols: Vec<Vec<f64>> = perm.iter().map(|&j| lib.matrix().col(j).to_vec()).collect();
        let names = perm.iter().map(|&j| lib.column_names()[j].clone()).collect();
        let permuted = CandidateLibrary::new(Matrix::from_columns(&cols).unwrap(), names, lib.target().to_vec()).unwrap();
        let support = [0usize, 3, 4];
        let mapped: Vec<usize> = support.iter().map(|&s| perm.iter().position(|&p| p == s).unwrap()).collect();
        let a = fit_subset(&lib, &support, true).unwrap().rss;
        let b = fit_subset(&permuted, &mapped, true).unwrap().rss;
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn loglik_strictly_decreases_in_rss(rss in 1e-6f64..1e6, factor in 1.001f64..10.0, n in 1usize..100_000) {
        prop_assert!(gaussian_loglik(rss * factor, n) < gaussian_loglik(rss, n));
    }
}
