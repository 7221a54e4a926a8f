//! Information criteria over fitted subset models: BIC, the
//! uncertainty-penalized UBIC, and ICOMP with the maximal information
//! complexity of the estimated inverse Fisher information.
//!
//! Every score is assembled the same way, `total = neg2_loglik + penalty`,
//! so that e.g. `ubic(fit, 0)` and `bic(fit)` agree bit for bit.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, HouseholderQr, Matrix, RANK_RTOL};
use crate::regression::{CandidateLibrary, ModelFit};
use crate::scalar::{format_sci, Scalar};

/// Relative asymmetry accepted by [`max_info_complexity`].
pub const SYMMETRY_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "BIC")]
    Bic,
    #[serde(rename = "UBIC")]
    Ubic,
    #[serde(rename = "ICOMP")]
    Icomp,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Bic => "BIC",
            Criterion::Ubic => "UBIC",
            Criterion::Icomp => "ICOMP",
        })
    }
}

/// Inputs the penalty was computed from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScoreParams<T> {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub uncertainty: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_n: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub complexity: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CriterionScore<T> {
    pub criterion: Criterion,
    pub neg2_loglik: T,
    pub penalty: T,
    pub total: T,
    pub support_size: usize,
    pub params: ScoreParams<T>,
}

fn neg2_loglik<T: Scalar>(fit: &ModelFit<T>) -> Result<T> {
    if !fit.log_likelihood.is_finite() {
        return Err(Error::ExactFit);
    }
    Ok(-T::lit(2.0) * fit.log_likelihood)
}

fn log_n_penalty<T: Scalar>(n: usize, count: T) -> T {
    T::from_count(n).ln() * count
}

fn assemble<T: Scalar>(
    criterion: Criterion,
    fit: &ModelFit<T>,
    penalty: T,
    params: ScoreParams<T>,
) -> Result<CriterionScore<T>> {
    let neg2 = neg2_loglik(fit)?;
    Ok(CriterionScore {
        criterion,
        neg2_loglik: neg2,
        penalty,
        total: neg2 + penalty,
        support_size: fit.support_size(),
        params,
    })
}

/// `−2 log L + log(N)·‖ξ‖₀`, with ‖ξ‖₀ the number of library terms (the
/// intercept is not counted).
pub fn bic<T: Scalar>(fit: &ModelFit<T>) -> Result<CriterionScore<T>> {
    let count = T::from_count(fit.support_size());
    let params = ScoreParams {
        n: fit.n_samples,
        ..Default::default()
    };
    assemble(Criterion::Bic, fit, log_n_penalty(fit.n_samples, count), params)
}

/// `−2 log L + log(N)·(‖ξ‖₀ + u)`.
pub fn ubic<T: Scalar>(fit: &ModelFit<T>, u: T) -> Result<CriterionScore<T>> {
    ubic_with_count(fit, fit.support_size(), u)
}

/// UBIC in compact form: the intercept is folded into the coefficient vector,
/// so the count is the model's `dof` (`‖ξ‖₀ + 1`) rather than `‖ξ‖₀`.
pub fn ubic_compact<T: Scalar>(fit: &ModelFit<T>, u: T) -> Result<CriterionScore<T>> {
    ubic_with_count(fit, fit.dof, u)
}

fn ubic_with_count<T: Scalar>(fit: &ModelFit<T>, count: usize, u: T) -> Result<CriterionScore<T>> {
    if !(u >= T::zero()) || !u.is_finite() {
        return Err(Error::NegativeUncertainty(u.as_f64()));
    }
    let params = ScoreParams {
        n: fit.n_samples,
        uncertainty: Some(u),
        ..Default::default()
    };
    let penalty = log_n_penalty(fit.n_samples, T::from_count(count) + u);
    assemble(Criterion::Ubic, fit, penalty, params)
}

/// Maximal information complexity of a covariance matrix,
/// `C₁(Σ) = (s/2)·log(tr Σ / s) − ½·log det Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ComplexityReport<T> {
    pub value: T,
    pub trace: T,
    pub log_det: T,
    pub dim: usize,
}

pub fn max_info_complexity<T: Scalar>(cov: &Matrix<T>) -> Result<ComplexityReport<T>> {
    if !cov.is_square() || cov.rows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "covariance must be square and nonempty, got {}x{}",
            cov.rows(),
            cov.cols()
        )));
    }
    let asym = cov.asymmetry();
    if asym > T::lit(SYMMETRY_RTOL) * cov.max_abs() {
        return Err(Error::NotSymmetric(asym.as_f64()));
    }
    let dim = cov.rows();
    let s = T::from_count(dim);
    let chol = Cholesky::new(cov, T::epsilon() * s)?;
    let log_det = chol.log_det();
    let trace = cov.trace();
    let half = T::lit(0.5);
    let value = half * s * (trace / s).ln() - half * log_det;
    Ok(ComplexityReport {
        // AM-GM bounds C₁ below by zero; anything negative is rounding
        value: value.max(T::zero()),
        trace,
        log_det,
        dim,
    })
}

/// Estimated inverse Fisher information of the Gaussian regression
/// parameters `(ξ_S, σ²)`: the block-diagonal matrix
/// `[σ̂²(Φ_SᵀΦ_S)⁻¹, 0; 0, 2σ̂⁴/N]` with `σ̂² = rss/N`.
pub fn estimate_ifim_inverse<T: Scalar>(fit: &ModelFit<T>, lib: &CandidateLibrary<T>) -> Result<Matrix<T>> {
    if fit.is_exact() {
        return Err(Error::ExactFit);
    }
    if fit.n_samples != lib.n_samples() {
        return Err(Error::InvalidArgument("fit and library disagree on sample count".into()));
    }
    let n = T::from_count(fit.n_samples);
    let sigma2 = fit.rss / n;
    let phi_s = lib.matrix().select_columns(&fit.support);
    let qr = HouseholderQr::new(phi_s)?;
    qr.check_rank(T::lit(RANK_RTOL))?;
    let gram_inv = qr.gram_inverse();
    let k = fit.support.len();
    let mut out = Matrix::zeros(k + 1, k + 1);
    for j in 0..k {
        for i in 0..k {
            out[(i, j)] = sigma2 * gram_inv[(i, j)];
        }
    }
    out[(k, k)] = T::lit(2.0) * sigma2 * sigma2 / n;
    Ok(out)
}

/// `−2 log L + 2·a_N·C₁(F̂⁻¹)`.
pub fn icomp<T: Scalar>(fit: &ModelFit<T>, lib: &CandidateLibrary<T>, a_n: T) -> Result<CriterionScore<T>> {
    let c = max_info_complexity(&estimate_ifim_inverse(fit, lib)?)?;
    icomp_from_complexity(fit, c.value, a_n)
}

/// ICOMP with a precomputed complexity, for sweeping several `a_N`.
pub fn icomp_from_complexity<T: Scalar>(fit: &ModelFit<T>, complexity: T, a_n: T) -> Result<CriterionScore<T>> {
    if !(a_n > T::zero()) || !a_n.is_finite() {
        return Err(Error::InvalidArgument(format!("a_N must be positive, got {a_n}")));
    }
    let params = ScoreParams {
        n: fit.n_samples,
        a_n: Some(a_n),
        complexity: Some(complexity),
        ..Default::default()
    };
    assemble(Criterion::Icomp, fit, T::lit(2.0) * a_n * complexity, params)
}

/// `total_i − min_j total_j`.
pub fn relative_scores<T: Scalar>(scores: &[CriterionScore<T>]) -> Result<Vec<T>> {
    let first = scores
        .first()
        .ok_or_else(|| Error::InvalidArgument("no scores to compare".into()))?;
    if let Some(other) = scores.iter().find(|s| s.criterion != first.criterion) {
        return Err(Error::MixedCriteria(
            first.criterion.to_string(),
            other.criterion.to_string(),
        ));
    }
    let min = scores.iter().map(|s| s.total).fold(T::infinity(), T::min);
    Ok(scores.iter().map(|s| s.total - min).collect())
}

/// Index of the smallest total; exact ties go to the smaller support, then
/// the lexicographically smaller one.
pub fn argmin_total<T: Scalar>(candidates: &[(T, &[usize])]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &(total, support)) in candidates.iter().enumerate() {
        if total.is_nan() {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let (bt, bs) = candidates[b];
                let wins = total < bt
                    || (total == bt && (support.len(), support) < (bs.len(), bs));
                Some(if wins { i } else { b })
            }
        };
    }
    best
}

/// ICOMP selection at one `a_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AnScanEntry<T> {
    pub a_n: T,
    pub selected_support: Vec<usize>,
    pub selected_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AnScanReport<T> {
    pub oracle_support: Vec<usize>,
    pub entries: Vec<AnScanEntry<T>>,
    /// Smallest `a_N` in the schedule whose ICOMP argmin is the oracle
    /// support; `None` when no entry matches.
    pub matched_a_n: Option<T>,
    /// Fits dropped because their complexity could not be evaluated.
    pub skipped_fits: usize,
}

/// Walks an ascending `a_N` schedule and reports the ICOMP selection at each
/// value.
pub fn scan_a_n<T: Scalar>(
    fits: &[ModelFit<T>],
    lib: &CandidateLibrary<T>,
    schedule: &[T],
    oracle_support: &[usize],
) -> Result<AnScanReport<T>> {
    if schedule.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("a_N schedule must be ascending".into()));
    }
    let mut oracle = oracle_support.to_vec();
    oracle.sort_unstable();
    let scored: Vec<(&ModelFit<T>, T)> = fits
        .iter()
        .filter_map(|f| {
            let c = max_info_complexity(&estimate_ifim_inverse(f, lib).ok()?).ok()?;
            f.log_likelihood.is_finite().then_some((f, c.value))
        })
        .collect();
    let skipped_fits = fits.len() - scored.len();
    let mut entries = Vec::with_capacity(schedule.len());
    for &a_n in schedule {
        let totals = scored
            .iter()
            .map(|(f, c)| icomp_from_complexity(f, *c, a_n).map(|s| (s.total, f.support.as_slice())))
            .collect::<Result<Vec<_>>>()?;
        let selected = argmin_total(&totals).map(|i| scored[i].0.support.clone()).unwrap_or_default();
        entries.push(AnScanEntry {
            a_n,
            selected_size: selected.len(),
            selected_support: selected,
        });
    }
    let matched_a_n = entries
        .iter()
        .find(|e| e.selected_support == oracle)
        .map(|e| e.a_n);
    Ok(AnScanReport {
        oracle_support: oracle,
        entries,
        matched_a_n,
        skipped_fits,
    })
}

pub fn write_scores_json<T: Scalar, W: Write>(scores: &[CriterionScore<T>], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, scores)?;
    Ok(())
}

/// Two-column CSV `support_size,relative_score` for external plotters.
pub fn write_relative_csv<T: Scalar, W: Write>(scores: &[CriterionScore<T>], mut out: W) -> Result<()> {
    let rel = relative_scores(scores)?;
    writeln!(out, "support_size,relative_score")?;
    for (s, r) in scores.iter().zip(rel) {
        writeln!(out, "{},{}", s.support_size, format_sci(r))?;
    }
    Ok(())
}
