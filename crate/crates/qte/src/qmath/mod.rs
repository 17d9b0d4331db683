//! Dense complex linear algebra on labeled tensor-product spaces.

pub mod bounds;
pub mod matrix;
pub mod random;
pub mod shape;
pub mod spectral;
pub mod tensor;

pub use bounds::{bound_eval, Bound};
pub use matrix::{CMatrix, C64, ONE, ZERO};
pub use shape::{Factor, Permutation, SpaceShape};
pub use spectral::{
    helstrom_pair, psd_sqrt, spectral_decompose, td_pure, trace_distance, trace_norm, Helstrom, SpectralDecomp,
    HERMITIAN_TOL, PSD_FLOOR,
};
pub use tensor::{partial_trace, permute_factors, tensor_all, tensor_product};
