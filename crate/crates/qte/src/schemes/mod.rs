//! Scheme abstractions and the scalar functionals computed from them.

pub mod group;
pub mod keys;
pub mod metrics;
pub mod types;

pub use group::{group_ops, GroupTable};
pub use keys::{KeyDist, KeyedFamily};
pub use metrics::{
    average_ciphertext, conditioned_difference, conditioned_state, revocation_difference, revocation_profile, correctness_gap, correctness_gap_qecm, correctness_gap_qecmr,
    correctness_gap_qm, dbar_apply, encryption_gap, qm_forgery_value, tamper_profile, vbar_apply, Correctness,
    EncryptionGap, RevocationCorrectness, TamperProfile, DEFAULT_DIM_CAP,
};
pub use types::{flag_shape, AqecmScheme, QecmScheme, QecmrScheme, QmScheme};
