//! Constructions of new schemes from old ones, and the baseline schemes.

pub mod baselines;
pub mod compose;
pub mod money;
pub mod random;
pub mod revocation;

pub use baselines::{
    baseline_scheme, conj_parity_pad, cpp_key, id_accept, otp_accept, qotp_accept, triv_reject, BaselineKind,
};
pub use compose::{aqecm_from_kraus, double_of, drop_flag, extend_messages, nfold, parallel_compose, star_of};
pub use money::{good_pairs, pair_success, qm_of, GoodPairs, GOOD_PAIR_TOL};
pub use random::{random_aqecm, random_qecmr};
pub use revocation::{rev_of, revocation_cgm, te_of};

use crate::error::Result;
use crate::schemes::{AqecmScheme, GroupTable};

/// `S^⊕ = S ∗ Triv`: a one-time pad whose key is protected by `s`.
pub fn s_oplus(s: &AqecmScheme) -> Result<AqecmScheme> {
    let q = s.num_messages();
    let out = star_of(s, &triv_reject(q)?, &GroupTable::cyclic(q))?;
    Ok(out.renamed(format!("s_oplus({})", s.name())))
}
