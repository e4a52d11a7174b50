//! Comparison of two binary grids through `j*_0` and the construction of functions that lie
//! in the Besov space of one grid but not of the other.

mod build;
mod phi;
mod profile;
mod report;
mod select;

pub use build::{build_exotic_function, ExoticFunction, ExoticTerm};
pub use phi::{conjugacy_check, phi_at_depth, PhiCheck};
pub use profile::{
    bilipschitz_diagnostic, extremal_words, graded_word, jstar, jstar_level, jstar_profile, linear_fit, BilipschitzReport,
    JStarProfile, SpreadRow, PROFILE_GUARD,
};
pub use report::{coefficient_bound, exotic_norm_report, BoundReport, ExoticReport, LpCheck, TransferSummary};
pub use select::{
    harmonic, harmonic_threshold, select_exotic_families, verify_selection, ExoticMode, ExoticSelection,
    SelectedCell, SelectionCheck, SelectionGroup, MAX_SELECTION_CELLS,
};
