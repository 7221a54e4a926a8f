//! Model selection for sparse-regression PDE discovery.
//!
//! Fits best-subset regression models on a candidate library of PDE terms and
//! scores them with BIC, the uncertainty-penalized UBIC, and ICOMP (with the
//! maximal information complexity of the estimated inverse Fisher
//! information). The [`equivalence`] module builds the overparameterized model
//! on which plain BIC reproduces UBIC and checks the identity numerically;
//! [`pde`] generates Burgers' equation data and runs the full discovery sweep.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod equivalence;
pub mod error;
pub mod linalg;
pub mod pde;
pub mod regression;
pub mod scalar;
pub mod uncertainty;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use criteria::{
    bic, estimate_ifim_inverse, icomp, max_info_complexity, relative_scores, scan_a_n, ubic, Criterion,
};
pub use equivalence::{augment, verify_identity};
pub use regression::{best_subsets, fit_subset, gaussian_loglik, Strategy};
pub use uncertainty::{nint, quantify_default, UncertaintyQuantifier};

pub type Matrix = linalg::Matrix<f64>;
pub type CandidateLibrary = regression::CandidateLibrary<f64>;
pub type ModelFit = regression::ModelFit<f64>;
pub type CriterionScore = criteria::CriterionScore<f64>;
pub type ComplexityReport = criteria::ComplexityReport<f64>;
pub type AnScanReport = criteria::AnScanReport<f64>;
pub type UncertaintyValue = uncertainty::UncertaintyValue<f64>;
pub type AugmentedModel = equivalence::AugmentedModel<f64>;
pub type EquivalenceReport = equivalence::EquivalenceReport<f64>;
pub type FieldData = pde::FieldData<f64>;
pub type FieldMeta = pde::FieldMeta<f64>;
pub type Domain = pde::Domain<f64>;
pub type InitialCondition = pde::InitialCondition<f64>;
pub type SweepConfig = pde::SweepConfig<f64>;
pub type SweepResult = pde::SweepResult<f64>;
