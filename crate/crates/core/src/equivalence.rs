//! Overparameterized models on which plain BIC reproduces UBIC.
//!
//! Given a fit `û_t = Φ_S ξ_S + ε·1` and an integer uncertainty `u`, the
//! intercept is spread over `u + 1` identical constant columns
//! `Ã = [ε/(u+1)·1, …]` carrying unit coefficients `ξ̃ = 1`. The augmented
//! model `Φ̃ = [Φ_S | Ã]`, `ξ̂ = [ξ_S; ξ̃]` makes exactly the same prediction,
//! so its likelihood is unchanged while `‖ξ̂‖₀ = u + p` with `p = ‖ξ_S‖₀ + 1`.
//! BIC on the augmented model therefore equals the compact-form UBIC
//! `−2 log L + log(N)·(p + u)` of the original.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::criteria::{ubic, ubic_compact};
use crate::error::{Error, Result};
use crate::linalg::{sum_squares, Matrix};
use crate::regression::{checked_loglik, fit_subset, CandidateLibrary, ModelFit};
use crate::scalar::Scalar;
use crate::uncertainty::UncertaintyValue;

/// Intercepts smaller than this cannot carry the constant columns.
pub const MIN_INTERCEPT: f64 = 1e-14;

/// Relative tolerance of the UBIC / augmented-BIC comparison.
pub const IDENTITY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AugmentedModel<T> {
    /// `Φ̃ = [Φ_S | Ã]`, `N × (k + u + 1)`.
    pub matrix: Matrix<T>,
    /// `ξ̂ = [ξ_S; 1, …, 1]`.
    pub coefficients: Vec<T>,
    pub u_int: u64,
    /// `p` of the base model.
    pub base_dof: usize,
    pub base_support: Vec<usize>,
}

impl<T: Scalar> AugmentedModel<T> {
    /// `‖ξ̂‖₀`, counted on the constructed vector.
    pub fn nonzeros(&self) -> usize {
        self.coefficients.iter().filter(|&&c| c != T::zero()).count()
    }

    /// `‖ξ̃‖₀`.
    pub fn augmentation_nonzeros(&self) -> usize {
        self.coefficients[self.base_support.len()..]
            .iter()
            .filter(|&&c| c != T::zero())
            .count()
    }

    pub fn predictions(&self) -> Vec<T> {
        self.matrix.mul_vec(&self.coefficients)
    }

    pub fn rss(&self, lib: &CandidateLibrary<T>) -> T {
        let r: Vec<T> = self
            .predictions()
            .iter()
            .zip(lib.target())
            .map(|(&p, &y)| y - p)
            .collect();
        sum_squares(&r)
    }
}

pub fn augment<T: Scalar>(fit: &ModelFit<T>, lib: &CandidateLibrary<T>, u_int: u64) -> Result<AugmentedModel<T>> {
    if u_int < 1 {
        return Err(Error::DegenerateU(u_int));
    }
    if !fit.has_intercept || !(fit.intercept.abs() >= T::lit(MIN_INTERCEPT)) {
        return Err(Error::ZeroIntercept(fit.intercept.as_f64()));
    }
    let n = lib.n_samples();
    let parts = (u_int + 1) as usize;
    let share = fit.intercept / T::from_count(parts);
    let mut matrix = lib.matrix().select_columns(&fit.support);
    let column = vec![share; n];
    for _ in 0..parts {
        matrix.push_column(&column)?;
    }
    let mut coefficients = fit.coefficients.clone();
    coefficients.extend(std::iter::repeat_n(T::one(), parts));
    Ok(AugmentedModel {
        matrix,
        coefficients,
        u_int,
        base_dof: fit.dof,
        base_support: fit.support.clone(),
    })
}

/// Outcome of comparing UBIC on a fit with BIC on its augmentation.
///
/// `ubic_total` uses the compact count `p + u` (intercept folded into the
/// coefficient vector); `ubic_k_total` is the same criterion with the plain
/// library-term count `k + u` and is reported for reference only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EquivalenceReport<T> {
    pub ubic_total: T,
    pub ubic_k_total: T,
    pub bic_aug_total: T,
    pub abs_diff: T,
    pub pass: bool,
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub u_rounded: u64,
}

pub fn verify_identity<T: Scalar>(
    fit: &ModelFit<T>,
    lib: &CandidateLibrary<T>,
    u: &UncertaintyValue<T>,
) -> Result<EquivalenceReport<T>> {
    let aug = augment(fit, lib, u.rounded)?;
    verify_augmented(fit, lib, &aug)
}

/// Checks an explicit augmented model against the base fit. Useful to show
/// that a tampered augmentation breaks the identity.
pub fn verify_augmented<T: Scalar>(
    fit: &ModelFit<T>,
    lib: &CandidateLibrary<T>,
    aug: &AugmentedModel<T>,
) -> Result<EquivalenceReport<T>> {
    let u = T::from_u64(aug.u_int).expect("u fits in scalar");
    let ubic_total = ubic_compact(fit, u)?.total;
    let ubic_k_total = ubic(fit, u)?.total;

    let n = lib.n_samples();
    let neg2 = -T::lit(2.0) * checked_loglik(aug.rss(lib), n)?;
    let bic_aug_total = neg2 + T::from_count(n).ln() * T::from_count(aug.nonzeros());

    let abs_diff = (ubic_total - bic_aug_total).abs();
    let pass = abs_diff <= T::lit(IDENTITY_RTOL) * T::one().max(ubic_total.abs());
    Ok(EquivalenceReport {
        ubic_total,
        ubic_k_total,
        bic_aug_total,
        abs_diff,
        pass,
        n,
        k: fit.support_size(),
        p: fit.dof,
        u_rounded: aug.u_int,
    })
}

/// Settings for a randomized battery of identity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub instances: usize,
    pub seed: u64,
    /// Adds 1e-3 to one augmentation coefficient before checking; every
    /// instance should then fail.
    pub perturb: bool,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            instances: 200,
            seed: 0,
            perturb: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BatterySummary<T> {
    pub pass_count: usize,
    pub fail_count: usize,
    pub max_abs_diff: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BatteryReport<T> {
    pub summary: BatterySummary<T>,
    pub reports: Vec<EquivalenceReport<T>>,
}

/// One random instance: `N ∈ [50, 500]`, `m ∈ [3, 8]`, `k ∈ [1, m]`,
/// `u ∈ [1, 5]`, Gaussian library and noise, nonzero intercept.
pub fn random_instance<T: Scalar>(seed: u64) -> Result<(CandidateLibrary<T>, ModelFit<T>, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(50..=500usize);
    let m = rng.random_range(3..=8usize);
    let k = rng.random_range(1..=m);
    let u_int = rng.random_range(1..=5u64);

    let normal = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
    let columns: Vec<Vec<T>> = (0..m)
        .map(|_| (0..n).map(|_| T::lit(normal(&mut rng))).collect())
        .collect();
    let mut support = sample(&mut rng, m, k).into_vec();
    support.sort_unstable();
    let signed = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> f64 {
        let v = rng.random_range(lo..hi);
        if rng.random_bool(0.5) { v } else { -v }
    };
    let truth: Vec<f64> = (0..k).map(|_| signed(&mut rng, 0.5, 2.0)).collect();
    let intercept = signed(&mut rng, 0.5, 3.0);
    let noise = 0.1;
    let target: Vec<T> = (0..n)
        .map(|i| {
            let signal: f64 = support
                .iter()
                .zip(&truth)
                .map(|(&j, &c)| columns[j][i].as_f64() * c)
                .sum();
            T::lit(signal + intercept + noise * normal(&mut rng))
        })
        .collect();
    let names = (0..m).map(|j| format!("x{j}")).collect();
    let lib = CandidateLibrary::new(Matrix::from_columns(&columns)?, names, target)?;
    let fit = fit_subset(&lib, &support, true)?;
    Ok((lib, fit, u_int))
}

pub fn run_battery<T: Scalar>(config: &BatteryConfig) -> Result<BatteryReport<T>> {
    let mut reports = Vec::with_capacity(config.instances);
    for i in 0..config.instances as u64 {
        let (lib, fit, u_int) = random_instance::<T>(config.seed.wrapping_add(i))?;
        let mut aug = augment(&fit, &lib, u_int)?;
        if config.perturb {
            let j = aug.base_support.len();
            aug.coefficients[j] += T::lit(1e-3);
        }
        reports.push(verify_augmented(&fit, &lib, &aug)?);
    }
    let pass_count = reports.iter().filter(|r| r.pass).count();
    let max_abs_diff = reports.iter().map(|r| r.abs_diff).fold(T::zero(), T::max);
    Ok(BatteryReport {
        summary: BatterySummary {
            pass_count,
            fail_count: reports.len() - pass_count,
            max_abs_diff,
        },
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tiny_fit(intercept: f64) -> (CandidateLibrary<f64>, ModelFit<f64>) {
        let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + intercept + 0.01 * (v * 3.0).sin()).collect();
        let lib = CandidateLibrary::new(Matrix::from_columns(&[x]).unwrap(), vec!["x".into()], y).unwrap();
        let fit = fit_subset(&lib, &[0], true).unwrap();
        (lib, fit)
    }

    #[test]
    fn intercept_of_three_over_three_columns() {
        let (lib, mut fit) = tiny_fit(3.0);
        fit.intercept = 3.0;
        let aug = augment(&fit, &lib, 2).unwrap();
        assert_eq!(aug.matrix.cols(), 1 + 3);
        for j in 1..4 {
            assert!(aug.matrix.col(j).iter().all(|&v| v == 1.0));
        }
        assert_eq!(&aug.coefficients[1..], &[1.0, 1.0, 1.0]);
        assert_eq!(aug.augmentation_nonzeros(), 3);
    }

    #[test]
    fn smallest_augmentation() {
        let (lib, mut fit) = tiny_fit(1.0);
        fit.intercept = 1.0;
        let aug = augment(&fit, &lib, 1).unwrap();
        assert!(aug.matrix.col(1).iter().all(|&v| v == 0.5));
        assert!(aug.matrix.col(2).iter().all(|&v| v == 0.5));
        let base = fit.fitted_values(&lib);
        for (a, b) in aug.predictions().iter().zip(&base) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
        assert_eq!(aug.nonzeros(), 1 + 2);
        assert_eq!(aug.nonzeros(), aug.u_int as usize + aug.base_dof);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let (lib, mut fit) = tiny_fit(1.0);
        assert!(matches!(augment(&fit, &lib, 0), Err(Error::DegenerateU(0))));
        fit.intercept = 1e-16;
        assert!(matches!(augment(&fit, &lib, 1), Err(Error::ZeroIntercept(_))));
    }

    #[test]
    fn penalty_sides_agree_for_two_terms_and_unit_u() {
        // k = 2, p = 3, u = 1: both sides carry log(N)·4
        let mut k2 = None;
        for s in 0.. {
            let (l, f, _) = random_instance::<f64>(s).unwrap();
            if f.support_size() == 2 {
                k2 = Some((l, f));
                break;
            }
        }
        let (lib2, fit2) = k2.unwrap();
        let u = UncertaintyValue::new(1.2).unwrap();
        let r = verify_identity(&fit2, &lib2, &u).unwrap();
        let n = lib2.n_samples() as f64;
        assert_eq!(r.p, 3);
        assert_eq!(r.u_rounded, 1);
        let neg2 = -2.0 * fit2.log_likelihood;
        assert_relative_eq!(r.ubic_total - neg2, n.ln() * 4.0, max_relative = 1e-12);
        assert_relative_eq!(r.bic_aug_total - neg2, n.ln() * 4.0, max_relative = 1e-9);
        assert_relative_eq!(r.ubic_k_total - neg2, n.ln() * 3.0, max_relative = 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn perturbed_augmentation_fails() {
        let report = run_battery::<f64>(&BatteryConfig {
            instances: 10,
            seed: 1,
            perturb: true,
        })
        .unwrap();
        assert_eq!(report.summary.fail_count, 10);
    }
}
