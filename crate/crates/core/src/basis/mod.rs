//! The covariant operator basis `T_Kq`, its inverse `𝔗_Kq`, and the
//! symmetrically ordered counterparts.

pub mod algebra;
pub mod index;
pub mod normal;
pub mod weyl;

pub use algebra::{
    displaced_inverse_expansion, displaced_monomial_expansion, product_expansion, ExpansionTerm,
    StructureExpansion,
};
pub use index::TensorIndex;
pub use normal::{
    inverse_matrix, inverse_trace_overlap, monomial_matrix, support_pattern, verify_orthonormality,
    OrthonormalityReport, StripePattern,
};
pub use weyl::{inverse_weyl_matrix, monomial_weyl_matrix, weyl_regularized_trace};
