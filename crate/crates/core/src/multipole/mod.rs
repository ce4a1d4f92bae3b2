//! State multipoles, inverse multipoles, expansions and homodyne inversion.

pub mod closed_form;
pub mod homodyne;
pub mod moments;
pub mod table;

pub use homodyne::{
    equispaced_phases, recover_inverse_multipoles, simulate_quadrature_moments, HomodyneRecovery,
    MomentNoise, QuadratureMomentSet,
};
pub use moments::{
    inverse_multipole, inverse_multipole_weyl, state_multipole, state_multipole_weyl, SUPPORT_EPS,
};
pub use table::{expand_operator, multipole_table, purity_from_multipoles, reconstruct, Basis, MultipoleTable};
