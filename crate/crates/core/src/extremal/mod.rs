//! Cumulative multipole distributions and the states that extremize them.

pub mod closed_form;
pub mod cumulative;
pub mod direct;
pub mod joint;
pub mod qutrit;

pub use closed_form::{extremal_closed_forms, verify_extremal_case, ExtremalCase, ExtremalState};
pub use cumulative::{
    cumulative_direct, cumulative_direct_value, cumulative_inverse, cumulative_inverse_value,
    direct_norm_sq, multipole_norm_sq, CumulativeBasis, CumulativeProfile,
};
pub use direct::{direct_maximizer_check, direct_minimizer, MaximizerReport, TrialFamily, TrialOutcome};
pub use joint::{build_joint_operator, eigenanalysis, write_spectra_csv, JointOperator, JointSpectrum, SwapClass};
pub use qutrit::{qutrit_form, scan_qutrit, write_coefficients_csv, QutritForm, QutritScan};
