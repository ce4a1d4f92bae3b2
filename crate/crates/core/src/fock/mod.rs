//! Truncated Fock-space linear algebra for one and two bosonic modes.

pub mod eigen;
pub mod operator;
pub mod state;

pub use eigen::{eigensolve_matrix, hermitian_eigensolve, EigenDecomposition};
pub use operator::{
    build_annihilation, build_creation, build_displacement, build_number, tensor_product,
    FockOperator, C64,
};
pub use state::{
    cat_ket, coherent_required_cutoff, explicit_from_file, explicit_from_json, explicit_to_json,
    make_state, purity, DensityMatrix, StateSpec,
};
