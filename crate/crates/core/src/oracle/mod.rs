//! Independent reference computations used to validate the closed forms.

mod density;
mod lemmas;
mod ode;
mod pde;
mod suite;

pub use density::{density_matrix, entropy_numerical, entropy_numerical_state, DensityGridParams, DensityMatrixGrid};
pub use lemmas::{integral_lemma_suite, integral_lemma_suite_with, wronskian_drift, LemmaCheck, LemmaExtras, LemmaReport};
pub use ode::ode_params;
pub use pde::{pde_evolve, pde_evolve_split, stability_bound, PhaseSpaceGrid, SplitOptions};
pub use suite::{acceptance_suite, run_criterion, CriterionOutcome, OracleReport, CRITERIA};
