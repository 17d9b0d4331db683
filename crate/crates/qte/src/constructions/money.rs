//! Quantum money from tamper-evident schemes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{flat_index, split_index, Circuit, FactoredOp};
use crate::error::{Error, Result};
use crate::qmath::CMatrix;
use crate::schemes::metrics::project_message;
use crate::schemes::{flag_shape, AqecmScheme, KeyDist, KeyedFamily, QmScheme};

/// Honest acceptance `⟨m|D̄_k E_k(m)|m⟩` of every key-message pair,
/// indexed `k·|ℳ| + m`.
pub fn pair_success(s: &AqecmScheme, cap: usize) -> Result<Vec<f64>> {
    let q = s.num_messages();
    let dims = s.msg_shape().dims();
    (0..s.keys().len() * q)
        .into_par_iter()
        .map(|i| {
            let (k, m) = (i / q, i % q);
            if s.keys().prob(k) == 0.0 {
                return Ok(0.0);
            }
            let mut x = s.encrypt(k, m, cap)?;
            s.dbar_at(k, &mut x, 0)?;
            project_message(&mut x, &dims, m, 0)?;
            Ok(x.trace().re)
        })
        .collect()
}

/// Slack granted to the `1 − γ` threshold so that rounding noise on a
/// perfectly decoded pair does not exclude it.
pub const GOOD_PAIR_TOL: f64 = 1e-12;

/// Pairs clearing the `1 − γ` threshold and their mass under `K × uniform`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodPairs {
    pub gamma: f64,
    pub members: Vec<bool>,
    pub mass: f64,
}

pub fn good_pairs(s: &AqecmScheme, gamma: f64, cap: usize) -> Result<GoodPairs> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::Precondition(format!("gamma must be non-negative, got {gamma}")));
    }
    let q = s.num_messages();
    let succ = pair_success(s, cap)?;
    let members: Vec<bool> =
        succ.iter().enumerate().map(|(i, &v)| s.keys().prob(i / q) > 0.0 && v >= 1.0 - gamma - GOOD_PAIR_TOL).collect();
    let mass = members.iter().enumerate().filter(|(_, &g)| g).map(|(i, _)| s.keys().prob(i / q) / q as f64).sum();
    Ok(GoodPairs { gamma, members, mass })
}

/// Verifier for note `(k, m)`: accept iff `D_k` accepts and outputs `m`.
fn note_verifier(s: &AqecmScheme, k: usize, m: usize) -> Result<Circuit> {
    let l = s.msg_shape().len();
    let dims = s.msg_shape().dims();
    let wires: Vec<usize> = (0..=l).collect();
    let mut full = dims.clone();
    full.push(2);
    Circuit::builder(s.cipher_shape().clone())
        .append(&s.dec().get(k)?, 0)?
        .classical(&wires, &[2], move |x| {
            let d = split_index(x, &full);
            let msg = flat_index(&d[..l], &full[..l]);
            usize::from(d[l] == 1 && msg == m)
        })?
        .finish(flag_shape())
}

/// `QM_γ(S)`, or the weak variant with uniform messages and `K`-keys.
/// Keys of the result are pairs `k·|ℳ| + m`; notes are `E_k(m)`.
pub fn qm_of(s: &AqecmScheme, gamma: f64, weak: bool, cap: usize) -> Result<QmScheme> {
    let q = s.num_messages();
    let n = s.keys().len() * q;
    let note = s.cipher_shape().clone();
    let (probs, always_accept, label) = if weak {
        ((0..n).map(|i| s.keys().prob(i / q) / q as f64).collect::<Vec<_>>(), false, format!("qm_weak({})", s.name()))
    } else {
        let g = good_pairs(s, gamma, cap)?;
        let label = format!("qm({}, gamma={gamma})", s.name());
        if g.mass > 0.0 {
            let p = (0..n)
                .map(|i| if g.members[i] { s.keys().prob(i / q) / q as f64 / g.mass } else { 0.0 })
                .collect();
            (p, false, label)
        } else {
            (vec![1.0 / n as f64; n], true, label)
        }
    };
    let keys = KeyDist::new(normalize(probs))?;
    let src = s.clone();
    let ver = if always_accept {
        let mut b = Circuit::builder(note.clone());
        for _ in 0..note.len() {
            b = b.discard(0)?;
        }
        KeyedFamily::constant(n, b.prep(0, CMatrix::basis_projector(2, 1), &[2])?.finish(flag_shape())?)
    } else {
        KeyedFamily::new(n, note.clone(), flag_shape(), move |i| note_verifier(&src, i / q, i % q))
    };
    let src = s.clone();
    let mint = move |i: usize| -> Result<FactoredOp> { src.encrypt(i / q, i % q, cap) };
    QmScheme::new(label, keys, note, mint, ver)
}

/// Renormalizes away floating-point drift in conditioned distributions.
fn normalize(mut p: Vec<f64>) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        for v in &mut p {
            *v /= s;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::baselines::{otp_accept, triv_reject};
    use crate::schemes::correctness_gap_qm;

    #[test]
    fn perfect_scheme_all_pairs_good() {
        let s = otp_accept(3).unwrap();
        let g = good_pairs(&s, 0.0, 64).unwrap();
        assert!(g.members.iter().all(|&b| b));
        assert!((g.mass - 1.0).abs() < 1e-12);
        let qm = qm_of(&s, 0.0, false, 64).unwrap();
        assert!(correctness_gap_qm(&qm).unwrap().eps < 1e-12);
    }

    #[test]
    fn empty_good_set_falls_back_to_accept() {
        let s = triv_reject(2).unwrap();
        let qm = qm_of(&s, 0.5, false, 64).unwrap();
        assert_eq!(correctness_gap_qm(&qm).unwrap().eps, 0.0);
        let weak = qm_of(&s, 0.0, true, 64).unwrap();
        assert_eq!(correctness_gap_qm(&weak).unwrap().eps, 1.0);
    }

    #[test]
    fn negative_gamma_rejected() {
        assert!(qm_of(&otp_accept(2).unwrap(), -0.1, false, 64).is_err());
    }
}
