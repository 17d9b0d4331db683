//! Revocation from tamper evidence and back.

use rayon::prelude::*;

use crate::channels::{cgm_of_channel, Circuit};
use crate::error::Result;
use crate::schemes::{flag_shape, AqecmScheme, KeyedFamily, QecmrScheme};

use super::compose::drop_flag;

/// Rev(S): revocation returns the ciphertext itself, and verification
/// decodes it and keeps only the flag.
pub fn rev_of(s: &AqecmScheme) -> Result<QecmrScheme> {
    let base = drop_flag(s)?.renamed(format!("rev({})", s.name()));
    let l = s.msg_shape().len();
    let mut keep_flag = Circuit::builder(s.msg_shape().concat(&flag_shape()));
    for _ in 0..l {
        keep_flag = keep_flag.discard(0)?;
    }
    let keep_flag = keep_flag.finish(flag_shape())?;
    let ver = s.dec().then_fixed(&keep_flag)?;
    QecmrScheme::new(base, Circuit::identity(s.cipher_shape().clone()), ver)
}

/// `CGM(Δ_F ∘ V_k ∘ R)` as a circuit `C → C ⊗ F`.
pub fn revocation_cgm(s: &QecmrScheme, k: usize, cap: usize) -> Result<Circuit> {
    let vr = s.ver().get(k)?.after(s.rev())?;
    let dephased = Circuit::builder(vr.in_shape().clone())
        .append(&vr, 0)?
        .dephase(0)?
        .finish(flag_shape())?;
    let kraus = dephased.to_kraus(cap)?;
    Ok(Circuit::from_kraus(&cgm_of_channel(&kraus)?))
}

/// TE(S): `D′_k = (D_k ⊗ Id_F) ∘ CGM(Δ_F ∘ V_k ∘ R)`, computed per key.
/// The channel under the CGM has dimension `|C|·2`, bounded by `cap`.
pub fn te_of(s: &QecmrScheme, cap: usize) -> Result<AqecmScheme> {
    let base = s.base();
    let out = base.msg_shape().concat(&flag_shape());
    let n = s.keys().len();
    let dec: Vec<Circuit> = (0..n)
        .into_par_iter()
        .map(|k| {
            let cgm = revocation_cgm(s, k, cap)?;
            Circuit::builder(base.cipher_shape().clone())
                .append(&cgm, 0)?
                .append(&base.dec().get(k)?, 0)?
                .finish(out.clone())
        })
        .collect::<Result<_>>()?;
    AqecmScheme::new(
        format!("te({})", base.name()),
        s.keys().clone(),
        base.msg_shape().clone(),
        base.cipher_shape().clone(),
        base.enc().clone(),
        KeyedFamily::from_circuits(dec)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::baselines::{conj_parity_pad, triv_reject};
    use crate::schemes::{correctness_gap, correctness_gap_qecmr};

    #[test]
    fn rev_of_perfect_scheme() {
        let s = rev_of(&conj_parity_pad(2).unwrap()).unwrap();
        assert_eq!(correctness_gap_qecmr(&s, 64).unwrap().eps, 0.0);
    }

    #[test]
    fn rev_of_reject_never_revokes() {
        let s = rev_of(&triv_reject(2).unwrap()).unwrap();
        let c = correctness_gap_qecmr(&s, 64).unwrap();
        assert_eq!(c.revoke.eps, 1.0);
        assert_eq!(c.decode.eps, 0.0);
    }

    #[test]
    fn te_of_rev_is_correct() {
        let s = te_of(&rev_of(&conj_parity_pad(2).unwrap()).unwrap(), 256).unwrap();
        assert!(correctness_gap(&s, 256).unwrap().eps < 1e-9);
    }
}
