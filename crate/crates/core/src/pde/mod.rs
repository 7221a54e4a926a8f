//! Burgers' equation data, candidate-library construction, and the
//! support-size discovery sweep.

pub mod burgers;
pub mod field;
pub mod library;
pub mod sweep;

pub use burgers::{simulate_burgers, Domain, InitialCondition};
pub use field::{FieldData, FieldMeta};
pub use library::{add_target_noise, build_library, library_terms, term_name, Differentiation, LibrarySpec, TermTable};
pub use sweep::{
    discovery_sweep, render_equation, NamedScale, PenaltyScale, Selection, SweepConfig, SweepResult, SweepRow,
};
