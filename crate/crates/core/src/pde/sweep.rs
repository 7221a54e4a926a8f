//! Support-size sweep: best model per size, its uncertainty, BIC / UBIC /
//! ICOMP scores, the inverse-Fisher complexity, and the UBIC = BIC
//! equivalence check, plus the per-criterion selections.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::criteria::{
    argmin_total, bic, estimate_ifim_inverse, icomp_from_complexity, max_info_complexity, ubic,
    ComplexityReport, CriterionScore,
};
use crate::equivalence::{verify_identity, EquivalenceReport};
use crate::error::{Error, Result};
use crate::regression::{best_subsets_per_size, CandidateLibrary, ModelFit, Strategy};
use crate::scalar::{format_sci, Scalar};
use crate::uncertainty::{quantify_default, UncertaintyValue};

/// ICOMP penalty scale `a_N`: either a constant or `log N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Scalar")]
pub enum PenaltyScale<T> {
    Named(NamedScale),
    Value(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedScale {
    LogN,
}

impl<T: Scalar> PenaltyScale<T> {
    pub fn resolve(&self, n: usize) -> T {
        match *self {
            PenaltyScale::Named(NamedScale::LogN) => T::from_count(n).ln(),
            PenaltyScale::Value(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepConfig<T> {
    pub a_n: Vec<PenaltyScale<T>>,
    pub n_boot: usize,
    pub seed: u64,
    pub strategy: Strategy,
}

impl<T: Scalar> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            a_n: vec![PenaltyScale::Value(T::one()), PenaltyScale::Named(NamedScale::LogN)],
            n_boot: 100,
            seed: 0,
            strategy: Strategy::Auto,
        }
    }
}

/// Everything computed for one support size. Failed stages leave their
/// field empty and append to `errors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepRow<T> {
    pub k: usize,
    pub terms: Vec<String>,
    pub fit: Option<ModelFit<T>>,
    pub uncertainty: Option<UncertaintyValue<T>>,
    pub bic: Option<CriterionScore<T>>,
    pub ubic: Option<CriterionScore<T>>,
    pub complexity: Option<ComplexityReport<T>>,
    /// One ICOMP score per configured `a_N`, in configuration order.
    pub icomp: Vec<CriterionScore<T>>,
    pub equivalence: Option<EquivalenceReport<T>>,
    pub errors: Vec<String>,
}

impl<T> SweepRow<T> {
    pub fn failed(&self) -> bool {
        !self.errors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Selection<T> {
    /// `BIC`, `UBIC`, or `ICOMP`.
    pub criterion: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_n: Option<T>,
    pub support: Vec<usize>,
    pub terms: Vec<String>,
    pub coefficients: Vec<T>,
    pub intercept: T,
    pub equation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepResult<T> {
    pub n_samples: usize,
    pub column_names: Vec<String>,
    /// Resolved `a_N` values, aligned with each row's `icomp`.
    pub a_n: Vec<T>,
    pub rows: Vec<SweepRow<T>>,
    pub selections: Vec<Selection<T>>,
    /// Whether the complexity of the best-per-size models never decreases
    /// with `k` (over rows where it could be computed).
    pub complexity_nondecreasing: bool,
}

/// Renders `u_t = c₁ term₁ + c₂ term₂ …` with coefficients to six decimal
/// places.
pub fn render_equation<T: Scalar>(terms: &[String], coefficients: &[T], intercept: Option<T>) -> String {
    let mut s = String::from("u_t =");
    let mut first = true;
    let mut push = |s: &mut String, c: T, term: &str| {
        let neg = c < T::zero();
        let mag = format!("{:.6}", c.abs().as_f64());
        match (first, neg) {
            (true, true) => write!(s, " -{mag}"),
            (true, false) => write!(s, " {mag}"),
            (false, true) => write!(s, " - {mag}"),
            (false, false) => write!(s, " + {mag}"),
        }
        .expect("write to string");
        if !term.is_empty() {
            write!(s, " {term}").expect("write to string");
        }
        first = false;
    };
    for (t, &c) in terms.iter().zip(coefficients) {
        push(&mut s, c, t);
    }
    if let Some(e) = intercept {
        push(&mut s, e, "");
    }
    s
}

fn score_row<T: Scalar>(
    lib: &CandidateLibrary<T>,
    k: usize,
    fit: ModelFit<T>,
    a_n: &[T],
    config: &SweepConfig<T>,
) -> SweepRow<T> {
    let mut row = SweepRow {
        k,
        terms: lib.names_of(&fit.support),
        fit: None,
        uncertainty: None,
        bic: None,
        ubic: None,
        complexity: None,
        icomp: Vec::new(),
        equivalence: None,
        errors: Vec::new(),
    };
    let note = |row: &mut SweepRow<T>, stage: &str, e: Error| row.errors.push(format!("{stage}: {e}"));

    match bic(&fit) {
        Ok(s) => row.bic = Some(s),
        Err(e) => note(&mut row, "bic", e),
    }
    let seed = config.seed.wrapping_add((k as u64) << 32);
    match quantify_default(&fit, lib, config.n_boot, seed) {
        Ok(u) => {
            match ubic(&fit, u.raw) {
                Ok(s) => row.ubic = Some(s),
                Err(e) => note(&mut row, "ubic", e),
            }
            match verify_identity(&fit, lib, &u) {
                Ok(r) => row.equivalence = Some(r),
                Err(e) => note(&mut row, "equivalence", e),
            }
            row.uncertainty = Some(u);
        }
        Err(e) => note(&mut row, "uncertainty", e),
    }
    match estimate_ifim_inverse(&fit, lib).and_then(|m| max_info_complexity(&m)) {
        Ok(c) => {
            let scores: Result<Vec<_>> = a_n.iter().map(|&a| icomp_from_complexity(&fit, c.value, a)).collect();
            match scores {
                Ok(s) => row.icomp = s,
                Err(e) => note(&mut row, "icomp", e),
            }
            row.complexity = Some(c);
        }
        Err(e) => note(&mut row, "complexity", e),
    }
    row.fit = Some(fit);
    row
}

fn select<T: Scalar>(
    lib: &CandidateLibrary<T>,
    rows: &[SweepRow<T>],
    criterion: &str,
    a_n: Option<T>,
    total: impl Fn(&SweepRow<T>) -> Option<T>,
) -> Option<Selection<T>> {
    let candidates: Vec<(T, &ModelFit<T>)> = rows
        .iter()
        .filter_map(|r| Some((total(r)?, r.fit.as_ref()?)))
        .collect();
    let keyed: Vec<(T, &[usize])> = candidates.iter().map(|(t, f)| (*t, f.support.as_slice())).collect();
    let (_, fit) = candidates[argmin_total(&keyed)?];
    let terms = lib.names_of(&fit.support);
    Some(Selection {
        criterion: criterion.to_owned(),
        a_n,
        support: fit.support.clone(),
        equation: render_equation(&terms, &fit.coefficients, fit.has_intercept.then_some(fit.intercept)),
        terms,
        coefficients: fit.coefficients.clone(),
        intercept: fit.intercept,
    })
}

/// Runs the full support-size sweep `k = 1..=max_size`.
pub fn discovery_sweep<T: Scalar>(
    lib: &CandidateLibrary<T>,
    max_size: usize,
    config: &SweepConfig<T>,
) -> Result<SweepResult<T>> {
    if config.a_n.is_empty() {
        return Err(Error::InvalidArgument("at least one a_N is required".into()));
    }
    let n = lib.n_samples();
    let a_n: Vec<T> = config.a_n.iter().map(|s| s.resolve(n)).collect();
    if let Some(bad) = a_n.iter().find(|a| !(**a > T::zero())) {
        return Err(Error::InvalidArgument(format!("a_N must be positive, got {bad}")));
    }
    let fits = best_subsets_per_size(lib, max_size, config.strategy)?;
    let rows: Vec<SweepRow<T>> = fits
        .into_iter()
        .enumerate()
        .map(|(idx, fit)| match fit {
            Ok(f) => score_row(lib, idx + 1, f, &a_n, config),
            Err(e) => SweepRow {
                k: idx + 1,
                terms: Vec::new(),
                fit: None,
                uncertainty: None,
                bic: None,
                ubic: None,
                complexity: None,
                icomp: Vec::new(),
                equivalence: None,
                errors: vec![format!("fit: {e}")],
            },
        })
        .collect();

    let mut selections = Vec::new();
    selections.extend(select(lib, &rows, "BIC", None, |r| r.bic.as_ref().map(|s| s.total)));
    selections.extend(select(lib, &rows, "UBIC", None, |r| r.ubic.as_ref().map(|s| s.total)));
    for (i, &a) in a_n.iter().enumerate() {
        selections.extend(select(lib, &rows, "ICOMP", Some(a), |r| r.icomp.get(i).map(|s| s.total)));
    }

    let complexities: Vec<T> = rows.iter().filter_map(|r| r.complexity.map(|c| c.value)).collect();
    let complexity_nondecreasing = complexities.windows(2).all(|w| w[1] >= w[0]);

    Ok(SweepResult {
        n_samples: n,
        column_names: lib.column_names().to_vec(),
        a_n,
        rows,
        selections,
        complexity_nondecreasing,
    })
}

impl<T: Scalar> SweepResult<T> {
    /// Selection for `criterion`, and for ICOMP the given `a_N` index.
    pub fn selection(&self, criterion: &str, a_n_index: Option<usize>) -> Option<&Selection<T>> {
        let a = a_n_index.map(|i| self.a_n[i]);
        self.selections.iter().find(|s| s.criterion == criterion && s.a_n == a)
    }

    /// Relative ICOMP per `a_N` over the sweep rows; `None` where a row has
    /// no score.
    pub fn relative_icomp(&self) -> Vec<Vec<Option<T>>> {
        (0..self.a_n.len())
            .map(|i| {
                let totals: Vec<Option<T>> = self.rows.iter().map(|r| r.icomp.get(i).map(|s| s.total)).collect();
                let min = totals.iter().flatten().fold(T::infinity(), |m, &v| m.min(v));
                totals.into_iter().map(|t| t.map(|v| v - min)).collect()
            })
            .collect()
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// `k` and the relative ICOMP for each `a_N`.
    pub fn write_fig1_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = String::from("k");
        for a in &self.a_n {
            write!(header, ",relative_icomp_a_n={}", format_sci(*a)).expect("write to string");
        }
        writeln!(out, "{header}")?;
        let rel = self.relative_icomp();
        for (r, row) in self.rows.iter().enumerate() {
            let mut line = row.k.to_string();
            for col in &rel {
                line.push(',');
                if let Some(v) = col[r] {
                    line.push_str(&format_sci(v));
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// `k` and the maximal information complexity of the estimated IFIM.
    pub fn write_fig2_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,complexity")?;
        for row in &self.rows {
            match row.complexity {
                Some(c) => writeln!(out, "{},{}", row.k, format_sci(c.value))?,
                None => writeln!(out, "{},", row.k)?,
            }
        }
        Ok(())
    }
}
