//! Subset least squares on a candidate library and the Gaussian profile
//! log-likelihood that every criterion consumes.
//!
//! Fits always go through Householder QR. The intercept, when requested, is a
//! literal all-ones column appended in front of the selected library columns,
//! so a fit with `k` library terms has `k + 1` free coefficients.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sum_squares, HouseholderQr, Matrix, RANK_RTOL};
use crate::scalar::{format_sci, Scalar};

/// Header name of the target column in library CSV files.
pub const TARGET_COLUMN: &str = "__target__";

/// Residual sums of squares below `(EXACT_FIT_ULPS · ε · ‖y‖)²` are treated
/// as an exact fit.
const EXACT_FIT_ULPS: f64 = 64.0;

/// Design matrix of evaluated candidate terms plus the regression target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CandidateLibrary<T> {
    matrix: Matrix<T>,
    column_names: Vec<String>,
    target: Vec<T>,
}

impl<T: Scalar> CandidateLibrary<T> {
    pub fn new(matrix: Matrix<T>, column_names: Vec<String>, target: Vec<T>) -> Result<Self> {
        let (n, m) = (matrix.rows(), matrix.cols());
        if m == 0 {
            return Err(Error::InvalidLibrary("library has no columns".into()));
        }
        if n < m {
            return Err(Error::InvalidLibrary(format!(
                "need at least as many samples as columns, got {n} x {m}"
            )));
        }
        if column_names.len() != m {
            return Err(Error::InvalidLibrary(format!(
                "{} names for {m} columns",
                column_names.len()
            )));
        }
        if target.len() != n {
            return Err(Error::InvalidLibrary(format!(
                "target has length {} but library has {n} rows",
                target.len()
            )));
        }
        for (j, name) in column_names.iter().enumerate() {
            if name.is_empty() || name.contains(',') || name.contains('\n') || name == TARGET_COLUMN {
                return Err(Error::InvalidLibrary(format!("invalid column name {name:?}")));
            }
            if column_names[..j].contains(name) {
                return Err(Error::InvalidLibrary(format!("duplicate column name {name:?}")));
            }
            if matrix.col(j).iter().all(|&v| v == T::zero()) {
                return Err(Error::InvalidLibrary(format!("column {name:?} is identically zero")));
            }
        }
        if (0..m).any(|j| matrix.col(j).iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidLibrary("library contains non-finite values".into()));
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLibrary("target contains non-finite values".into()));
        }
        Ok(Self {
            matrix,
            column_names,
            target,
        })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn target(&self) -> &[T] {
        &self.target
    }

    pub fn n_samples(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_terms(&self) -> usize {
        self.matrix.cols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Resolves term names into a sorted support.
    pub fn support_of(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut idx = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown term {n:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    pub fn names_of(&self, support: &[usize]) -> Vec<String> {
        support.iter().map(|&j| self.column_names[j].clone()).collect()
    }

    /// Same library with the target replaced.
    pub fn with_target(&self, target: Vec<T>) -> Result<Self> {
        Self::new(self.matrix.clone(), self.column_names.clone(), target)
    }

    /// Writes the library as CSV: term columns then `__target__`, one row per
    /// sample, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = self.column_names.join(",");
        header.push(',');
        header.push_str(TARGET_COLUMN);
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for i in 0..self.n_samples() {
            line.clear();
            for j in 0..self.n_terms() {
                write!(line, "{},", format_sci(self.matrix[(i, j)])).expect("write to string");
            }
            line.push_str(&format_sci(self.target[i]));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty file".into(),
        })??;
        let mut names: Vec<String> = header.trim_end().split(',').map(str::to_owned).collect();
        if names.last().map(String::as_str) != Some(TARGET_COLUMN) {
            return Err(Error::Parse {
                line: 1,
                message: format!("last header column must be {TARGET_COLUMN}"),
            });
        }
        names.pop();
        let m = names.len();
        let mut columns = vec![Vec::new(); m];
        let mut target = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != m + 1 {
                return Err(Error::Parse {
                    line: lineno + 2,
                    message: format!("expected {} fields, found {}", m + 1, fields.len()),
                });
            }
            for (j, f) in fields.iter().enumerate() {
                let v: T = f.trim().parse().map_err(|_| Error::Parse {
                    line: lineno + 2,
                    message: format!("bad number {f:?}"),
                })?;
                if j < m {
                    columns[j].push(v);
                } else {
                    target.push(v);
                }
            }
        }
        Self::new(Matrix::from_columns(&columns)?, names, target)
    }
}

/// Ordinary least-squares fit on a fixed support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModelFit<T> {
    /// Sorted library column indices.
    pub support: Vec<usize>,
    /// Coefficients aligned with `support`.
    pub coefficients: Vec<T>,
    /// Zero when fitted without an intercept.
    pub intercept: T,
    pub has_intercept: bool,
    pub rss: T,
    /// `+inf` for an exact fit.
    pub log_likelihood: T,
    pub n_samples: usize,
    /// Free coefficients: `|support| + 1` with an intercept.
    pub dof: usize,
}

impl<T: Scalar> ModelFit<T> {
    /// Number of nonzero library coefficients, not counting the intercept.
    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn is_exact(&self) -> bool {
        self.rss == T::zero()
    }

    /// `Φ_S ξ_S + ε·1`.
    pub fn fitted_values(&self, lib: &CandidateLibrary<T>) -> Vec<T> {
        let mut out = lib.matrix().select_columns(&self.support).mul_vec(&self.coefficients);
        if self.has_intercept {
            for v in &mut out {
                *v += self.intercept;
            }
        }
        out
    }

    pub fn residuals(&self, lib: &CandidateLibrary<T>) -> Vec<T> {
        self.fitted_values(lib)
            .iter()
            .zip(lib.target())
            .map(|(&f, &y)| y - f)
            .collect()
    }
}

/// Maximized Gaussian log-likelihood with the variance profiled out:
/// `−(n/2)(ln(2π·rss/n) + 1)`. Returns `+inf` when `rss == 0`; see
/// [`checked_loglik`] for the fallible variant.
pub fn gaussian_loglik<T: Scalar>(rss: T, n: usize) -> T {
    assert!(n >= 1, "gaussian_loglik needs at least one sample");
    if rss == T::zero() {
        return T::infinity();
    }
    let n_t = T::from_count(n);
    let two_pi = T::lit(std::f64::consts::TAU);
    -(n_t / T::lit(2.0)) * ((two_pi * rss / n_t).ln() + T::one())
}

/// Like [`gaussian_loglik`], but an exact fit is an error.
pub fn checked_loglik<T: Scalar>(rss: T, n: usize) -> Result<T> {
    let ll = gaussian_loglik(rss, n);
    if ll.is_finite() {
        Ok(ll)
    } else {
        Err(Error::ExactFit)
    }
}

fn validate_support(support: &[usize], m: usize) -> Result<Vec<usize>> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut s = support.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != support.len() {
        return Err(Error::InvalidArgument("support contains duplicates".into()));
    }
    if let Some(&bad) = s.iter().find(|&&j| j >= m) {
        return Err(Error::InvalidArgument(format!(
            "support index {bad} out of range for {m} columns"
        )));
    }
    Ok(s)
}

/// Design matrix for a support: optional leading ones column, then the
/// selected library columns in support order.
pub(crate) fn design_matrix<T: Scalar>(
    lib: &CandidateLibrary<T>,
    support: &[usize],
    with_intercept: bool,
) -> Matrix<T> {
    let n = lib.n_samples();
    let mut cols: Vec<usize> = Vec::with_capacity(support.len() + 1);
    cols.extend_from_slice(support);
    let selected = lib.matrix().select_columns(&cols);
    if !with_intercept {
        return selected;
    }
    let mut design = Matrix::zeros(n, 0);
    design.push_column(&vec![T::one(); n]).expect("row count matches");
    for c in selected.columns() {
        design.push_column(c).expect("row count matches");
    }
    design
}

/// Prepared QR for repeated solves against one design (used by the bootstrap).
pub(crate) struct SupportSolver<T> {
    qr: HouseholderQr<T>,
    with_intercept: bool,
}

impl<T: Scalar> SupportSolver<T> {
    pub(crate) fn new(lib: &CandidateLibrary<T>, support: &[usize], with_intercept: bool) -> Result<Self> {
        let design = design_matrix(lib, support, with_intercept);
        if design.rows() < design.cols() {
            return Err(Error::InvalidArgument(format!(
                "{} samples cannot determine {} coefficients",
                design.rows(),
                design.cols()
            )));
        }
        let qr = HouseholderQr::new(design)?;
        qr.check_rank(T::lit(RANK_RTOL))?;
        Ok(Self { qr, with_intercept })
    }

    /// Returns `(coefficients over the support, intercept)`.
    pub(crate) fn solve(&self, y: &[T]) -> (Vec<T>, T) {
        let mut x = self.qr.solve(y);
        if self.with_intercept {
            let intercept = x.remove(0);
            (x, intercept)
        } else {
            (x, T::zero())
        }
    }
}

/// Ordinary least-squares fit of the target on the selected columns
/// (plus an all-ones intercept column when `with_intercept`).
pub fn fit_subset<T: Scalar>(
    lib: &CandidateLibrary<T>,
    support: &[usize],
    with_intercept: bool,
) -> Result<ModelFit<T>> {
    let support = validate_support(support, lib.n_terms())?;
    let solver = SupportSolver::new(lib, &support, with_intercept)?;
    let (coefficients, intercept) = solver.solve(lib.target());
    let n = lib.n_samples();
    let mut fit = ModelFit {
        dof: support.len() + usize::from(with_intercept),
        support,
        coefficients,
        intercept,
        has_intercept: with_intercept,
        rss: T::zero(),
        log_likelihood: T::zero(),
        n_samples: n,
    };
    let rss = sum_squares(&fit.residuals(lib));
    let floor = T::lit(EXACT_FIT_ULPS) * T::epsilon();
    fit.rss = if rss <= floor * floor * sum_squares(lib.target()) {
        T::zero()
    } else {
        rss
    };
    fit.log_likelihood = gaussian_loglik(fit.rss, n);
    Ok(fit)
}

/// Search strategy for [`best_subsets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Every support of each size; the per-size global optimum.
    Exhaustive,
    /// Greedy forward selection; supports are nested across sizes.
    Forward,
    /// Exhaustive up to [`EXHAUSTIVE_MAX_TERMS`] library columns, forward above.
    Auto,
}

pub const EXHAUSTIVE_MAX_TERMS: usize = 16;

impl Strategy {
    pub fn resolve(self, n_terms: usize) -> Strategy {
        match self {
            Strategy::Auto if n_terms <= EXHAUSTIVE_MAX_TERMS => Strategy::Exhaustive,
            Strategy::Auto => Strategy::Forward,
            s => s,
        }
    }
}

/// Scores candidate supports by RSS.
///
/// When the sample count allows, the augmented matrix `[1 | Φ | y]` is
/// factored once and each subset regression is solved on its small R factor:
/// with `Q` orthogonal, `‖y − X_S b‖ = ‖r_y − R_S b‖` for every subset.
struct SubsetScorer<'a, T> {
    lib: &'a CandidateLibrary<T>,
    compressed: Option<Matrix<T>>,
}

impl<'a, T: Scalar> SubsetScorer<'a, T> {
    fn new(lib: &'a CandidateLibrary<T>) -> Result<Self> {
        let (n, m) = (lib.n_samples(), lib.n_terms());
        if n < m + 2 {
            return Ok(Self { lib, compressed: None });
        }
        let mut a = Matrix::zeros(n, 0);
        a.push_column(&vec![T::one(); n])?;
        for c in lib.matrix().columns() {
            a.push_column(c)?;
        }
        a.push_column(lib.target())?;
        let r = HouseholderQr::new(a)?.r();
        Ok(Self {
            lib,
            compressed: Some(r),
        })
    }

    fn rss(&self, support: &[usize]) -> Result<T> {
        let Some(r) = &self.compressed else {
            return fit_subset(self.lib, support, true).map(|f| f.rss);
        };
        let m = self.lib.n_terms();
        let mut cols = Vec::with_capacity(support.len() + 1);
        cols.push(0);
        cols.extend(support.iter().map(|&j| j + 1));
        let x = r.select_columns(&cols);
        let y = r.col(m + 1);
        let qr = HouseholderQr::new(x)?;
        qr.check_rank(T::lit(RANK_RTOL))?;
        let mut qty = y.to_vec();
        qr.apply_qt(&mut qty);
        Ok(sum_squares(&qty[cols.len()..]))
    }
}

/// Lexicographic k-combinations of `0..m`.
fn combinations(m: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut state: Option<Vec<usize>> = if k <= m { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let current = state.clone()?;
        let mut next = current.clone();
        let mut i = k;
        loop {
            if i == 0 {
                state = None;
                break;
            }
            i -= 1;
            if next[i] < m - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                state = Some(next);
                break;
            }
        }
        Some(current)
    })
}

/// Keeps the lowest-RSS support; on equal RSS the earlier (lexicographically
/// smaller, given enumeration order) support wins.
fn better<T: Scalar>(best: &Option<(Vec<usize>, T)>, rss: T) -> bool {
    match best {
        None => true,
        Some((_, b)) => rss < *b,
    }
}

/// Best support of every size `1..=max_size`, each refit on the full data
/// with an intercept. Sizes whose candidates are all degenerate yield an
/// error entry instead of aborting the search.
pub fn best_subsets_per_size<T: Scalar>(
    lib: &CandidateLibrary<T>,
    max_size: usize,
    strategy: Strategy,
) -> Result<Vec<Result<ModelFit<T>>>> {
    let m = lib.n_terms();
    if max_size == 0 || max_size > m {
        return Err(Error::InvalidArgument(format!(
            "max_size must be in 1..={m}, got {max_size}"
        )));
    }
    let scorer = SubsetScorer::new(lib)?;
    let mut out = Vec::with_capacity(max_size);
    match strategy.resolve(m) {
        Strategy::Exhaustive => {
            for k in 1..=max_size {
                let mut best: Option<(Vec<usize>, T)> = None;
                let mut last_err = None;
                for support in combinations(m, k) {
                    match scorer.rss(&support) {
                        Ok(rss) if better(&best, rss) => best = Some((support, rss)),
                        Ok(_) => {}
                        Err(e) => last_err = Some(e),
                    }
                }
                out.push(match best {
                    Some((s, _)) => fit_subset(lib, &s, true),
                    None => Err(last_err.unwrap_or(Error::EmptySupport)),
                });
            }
        }
        Strategy::Forward | Strategy::Auto => {
            let mut current: Vec<usize> = Vec::new();
            for _ in 1..=max_size {
                if current.len() != out.len() {
                    out.push(Err(Error::InvalidArgument(format!(
                        "forward selection stalled at size {}",
                        current.len()
                    ))));
                    continue;
                }
                let mut best: Option<(Vec<usize>, T)> = None;
                let mut last_err = None;
                for j in (0..m).filter(|j| !current.contains(j)) {
                    let mut trial = current.clone();
                    trial.push(j);
                    trial.sort_unstable();
                    match scorer.rss(&trial) {
                        Ok(rss) if better(&best, rss) => best = Some((trial, rss)),
                        Ok(_) => {}
                        Err(e) => last_err = Some(e),
                    }
                }
                match best {
                    Some((s, _)) => {
                        out.push(fit_subset(lib, &s, true));
                        current = s;
                    }
                    None => out.push(Err(last_err.unwrap_or(Error::EmptySupport))),
                }
            }
        }
    }
    Ok(out)
}

/// Minimum-RSS model of each support size `1..=max_size`.
pub fn best_subsets<T: Scalar>(
    lib: &CandidateLibrary<T>,
    max_size: usize,
    strategy: Strategy,
) -> Result<Vec<ModelFit<T>>> {
    best_subsets_per_size(lib, max_size, strategy)?.into_iter().collect()
}
