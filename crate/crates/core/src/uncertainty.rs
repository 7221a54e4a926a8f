//! Model uncertainty `U_ξ` for the UBIC penalty.
//!
//! The default quantifier is a residual bootstrap: the design is held fixed,
//! residuals are resampled onto the fitted values, and the support is refit
//! `n_boot` times. `U_ξ = 1 + Σ_j sd(ξ_j) / |mean(ξ_j)|`, which is scale
//! free and never below 1. Any other quantifier can be plugged in through
//! [`UncertaintyQuantifier`]; only the rounded value enters the equivalence
//! construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{CandidateLibrary, ModelFit, SupportSolver};
use crate::scalar::Scalar;

/// Bootstrap means smaller than this make the coefficient of variation
/// undefined.
pub const MIN_BOOTSTRAP_MEAN: f64 = 1e-12;

pub const MIN_BOOTSTRAP_REPLICATES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct UncertaintyValue<T> {
    pub raw: T,
    /// Nearest integer to `raw`, halves rounded up.
    pub rounded: u64,
}

impl<T: Scalar> UncertaintyValue<T> {
    pub fn new(raw: T) -> Result<Self> {
        if !(raw > T::zero()) || !raw.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "uncertainty must be positive and finite, got {raw}"
            )));
        }
        Ok(Self {
            raw,
            rounded: nint(raw),
        })
    }
}

/// Nearest integer, ties rounded up.
pub fn nint<T: Scalar>(u: T) -> u64 {
    (u + T::lit(0.5))
        .floor()
        .to_u64()
        .expect("rounded uncertainty fits in u64")
}

/// Anything that can attach an uncertainty to a fitted model.
pub trait UncertaintyQuantifier<T: Scalar> {
    fn quantify(&self, fit: &ModelFit<T>, lib: &CandidateLibrary<T>) -> Result<UncertaintyValue<T>>;
}

/// Residual-bootstrap coefficient-of-variation quantifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapCv {
    pub n_boot: usize,
    pub seed: u64,
}

impl<T: Scalar> UncertaintyQuantifier<T> for BootstrapCv {
    fn quantify(&self, fit: &ModelFit<T>, lib: &CandidateLibrary<T>) -> Result<UncertaintyValue<T>> {
        quantify_default(fit, lib, self.n_boot, self.seed)
    }
}

/// Sample standard deviation computed on values shifted by the first one, so
/// a constant sequence yields exactly zero.
fn shifted_mean_sd<T: Scalar>(values: &[T]) -> (T, T) {
    let n = T::from_count(values.len());
    let shift = values[0];
    let mean_d = values.iter().map(|&v| v - shift).sum::<T>() / n;
    let ss: T = values.iter().map(|&v| (v - shift - mean_d).powi(2)).sum();
    (shift + mean_d, (ss / (n - T::one())).sqrt())
}

/// Per-coefficient `(mean, sd)` over `n_boot` residual-bootstrap refits with
/// the support of `fit` held fixed. Replicate `i` draws from its own stream
/// seeded with `seed + i`, so the result does not depend on how replicates
/// are scheduled.
pub fn bootstrap_spread<T: Scalar>(
    fit: &ModelFit<T>,
    lib: &CandidateLibrary<T>,
    n_boot: usize,
    seed: u64,
) -> Result<Vec<(T, T)>> {
    if n_boot < MIN_BOOTSTRAP_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_BOOTSTRAP_REPLICATES} bootstrap replicates, got {n_boot}"
        )));
    }
    if fit.n_samples != lib.n_samples() {
        return Err(Error::InvalidArgument("fit and library disagree on sample count".into()));
    }
    let solver = SupportSolver::new(lib, &fit.support, fit.has_intercept)?;
    let fitted = fit.fitted_values(lib);
    let residuals = if fit.is_exact() {
        vec![T::zero(); fitted.len()]
    } else {
        fit.residuals(lib)
    };
    let n = fitted.len();

    let replicates: Vec<Vec<T>> = (0..n_boot as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let y: Vec<T> = fitted
                .iter()
                .map(|&f| f + residuals[rng.random_range(0..n)])
                .collect();
            solver.solve(&y).0
        })
        .collect();

    Ok((0..fit.support.len())
        .map(|j| {
            let column: Vec<T> = replicates.iter().map(|r| r[j]).collect();
            shifted_mean_sd(&column)
        })
        .collect())
}

/// `1 + Σ_j sd(ξ_j) / |mean(ξ_j)|` from [`bootstrap_spread`].
pub fn quantify_default<T: Scalar>(
    fit: &ModelFit<T>,
    lib: &CandidateLibrary<T>,
    n_boot: usize,
    seed: u64,
) -> Result<UncertaintyValue<T>> {
    let spread = bootstrap_spread(fit, lib, n_boot, seed)?;
    let mut raw = T::one();
    for (&col, &(mean, sd)) in fit.support.iter().zip(&spread) {
        if !(mean.abs() >= T::lit(MIN_BOOTSTRAP_MEAN)) {
            return Err(Error::UnstableCoefficient {
                column: col,
                mean: mean.as_f64(),
            });
        }
        raw += sd / mean.abs();
    }
    UncertaintyValue::new(raw)
}
