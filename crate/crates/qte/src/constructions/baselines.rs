//! Reference schemes: trivial, always-accepting pads and the
//! conjugate-coding parity pad.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::channels::{permutation_unitary, Circuit};
use crate::error::{Error, Result};
use crate::qmath::{CMatrix, Factor, SpaceShape, C64};
use crate::schemes::{flag_shape, AqecmScheme, KeyDist, KeyedFamily};

/// Named baseline schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    TrivReject,
    IdAccept,
    OtpAccept,
    QotpAccept,
    ConjParityPad,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::TrivReject => "triv_reject",
            BaselineKind::IdAccept => "id_accept",
            BaselineKind::OtpAccept => "otp_accept",
            BaselineKind::QotpAccept => "qotp_accept",
            BaselineKind::ConjParityPad => "conj_parity_pad",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            BaselineKind::TrivReject,
            BaselineKind::IdAccept,
            BaselineKind::OtpAccept,
            BaselineKind::QotpAccept,
            BaselineKind::ConjParityPad,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// `size` is the message alphabet size for the pads and the qubit count
/// for [`BaselineKind::ConjParityPad`].
pub fn baseline_scheme(kind: BaselineKind, size: usize) -> Result<AqecmScheme> {
    match kind {
        BaselineKind::TrivReject => triv_reject(size),
        BaselineKind::IdAccept => id_accept(size),
        BaselineKind::OtpAccept => otp_accept(size),
        BaselineKind::QotpAccept => qotp_accept(size),
        BaselineKind::ConjParityPad => conj_parity_pad(size),
    }
}

pub(crate) fn msg_shape(q: usize) -> SpaceShape {
    SpaceShape::classical("M", q)
}

fn check_alphabet(q: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::Precondition(format!("message alphabet of size {q}")));
    }
    Ok(())
}

/// Identity encryption followed by a fixed flag.
fn fixed_flag(name: &str, q: usize, flag: usize) -> Result<AqecmScheme> {
    check_alphabet(q)?;
    let m = msg_shape(q);
    let c = SpaceShape::single("C", q);
    let enc = Circuit::identity(m.clone()).with_out_shape(c.clone())?;
    let dec = Circuit::builder(c.clone())
        .prep(1, CMatrix::basis_projector(2, flag), &[2])?
        .finish(m.concat(&flag_shape()))?;
    AqecmScheme::new(
        format!("{name}(q={q})"),
        KeyDist::uniform(1),
        m,
        c,
        KeyedFamily::constant(1, enc),
        KeyedFamily::constant(1, dec),
    )
}

/// One key, ciphertext = message, flag always `0`.
pub fn triv_reject(q: usize) -> Result<AqecmScheme> {
    fixed_flag("triv_reject", q, 0)
}

/// One key, ciphertext = message, flag always `1`.
pub fn id_accept(q: usize) -> Result<AqecmScheme> {
    fixed_flag("id_accept", q, 1)
}

/// Keyed unitary pads `U_k` with accept-always decoding `U_k†`.
fn unitary_pad(name: String, q: usize, pads: Vec<CMatrix>) -> Result<AqecmScheme> {
    let m = msg_shape(q);
    let c = SpaceShape::single("C", q);
    let n = pads.len();
    let mut enc = Vec::with_capacity(n);
    let mut dec = Vec::with_capacity(n);
    for u in pads {
        enc.push(Circuit::builder(m.clone()).unitary(&[0], u.clone())?.finish(c.clone())?);
        dec.push(
            Circuit::builder(c.clone())
                .unitary(&[0], u.adjoint())?
                .prep(1, CMatrix::basis_projector(2, 1), &[2])?
                .finish(m.concat(&flag_shape()))?,
        );
    }
    AqecmScheme::new(
        name,
        KeyDist::uniform(n),
        m,
        c,
        KeyedFamily::from_circuits(enc)?,
        KeyedFamily::from_circuits(dec)?,
    )
}

/// Classical one-time pad over `ℤ/q`: `|m⟩ ↦ |m + k⟩`.
pub fn otp_accept(q: usize) -> Result<AqecmScheme> {
    check_alphabet(q)?;
    let pads = (0..q).map(|k| permutation_unitary(q, |m| (m + k) % q)).collect::<Result<_>>()?;
    unitary_pad(format!("otp_accept(q={q})"), q, pads)
}

/// Generalized Pauli pad `X^a Z^b` on a `q`-level system, `q²` keys.
pub fn qotp_accept(q: usize) -> Result<AqecmScheme> {
    check_alphabet(q)?;
    let omega = |e: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (e % q) as f64 / q as f64);
    let mut pads = Vec::with_capacity(q * q);
    for a in 0..q {
        for b in 0..q {
            // X^a Z^b |j⟩ = ω^{bj} |j + a⟩
            pads.push(CMatrix::from_fn(q, q, |r, c| if r == (c + a) % q { omega(b * c) } else { C64::new(0.0, 0.0) }));
        }
    }
    unitary_pad(format!("qotp_accept(q={q})"), q, pads)
}

fn hadamard() -> CMatrix {
    CMatrix::from_fn(2, 2, |r, c| C64::new(if r == 1 && c == 1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 }, 0.0))
}

/// Bit `i` (most significant first) of an `n`-bit string.
pub(crate) fn bit(x: usize, i: usize, n: usize) -> usize {
    (x >> (n - 1 - i)) & 1
}

fn parity(x: usize) -> usize {
    (x.count_ones() & 1) as usize
}

/// Key layout of [`conj_parity_pad`]: `k = θ·2ⁿ + d`.
pub fn cpp_key(theta: usize, d: usize, n: usize) -> usize {
    (theta << n) | d
}

/// `H^θ |d⟩⟨d| H^θ` on one qubit.
fn conjugate_state(theta: usize, d: usize) -> CMatrix {
    let ket = CMatrix::ket(2, d);
    if theta == 0 {
        ket.outer_self()
    } else {
        hadamard().matmul(&ket).expect("2x2 times 2x1").outer_self()
    }
}

/// Ciphertext `(⊗_i H^{θ_i}|d_i⟩) ⊗ |m ⊕ parity(d)⟩`; decoding measures
/// each qubit in its basis, accepts iff the outcomes equal `d`, and
/// outputs the classical bit xor the outcome parity.
pub fn conj_parity_pad(n: usize) -> Result<AqecmScheme> {
    if n < 2 {
        return Err(Error::Precondition(format!("conj_parity_pad needs n >= 2, got {n}")));
    }
    if n > 10 {
        return Err(Error::Precondition(format!("conj_parity_pad n = {n} is past desk scale")));
    }
    let m = msg_shape(2);
    let mut c = SpaceShape::qubits("Q", n);
    c.push(Factor::classical("c", 2));
    let out = m.concat(&flag_shape());
    let nkeys = 1usize << (2 * n);
    let (m2, c2) = (m.clone(), c.clone());
    let enc = KeyedFamily::new(nkeys, m.clone(), c.clone(), move |k| {
        let (theta, d) = (k >> n, k & ((1 << n) - 1));
        let pd = parity(d);
        let mut b = Circuit::builder(m2.clone()).classical(&[0], &[2], move |x| x ^ pd)?;
        for i in 0..n {
            b = b.prep(i, conjugate_state(bit(theta, i, n), bit(d, i, n)), &[2])?;
        }
        b.finish(c2.clone())
    });
    let c3 = c.clone();
    let dec = KeyedFamily::new(nkeys, c.clone(), out.clone(), move |k| {
        let (theta, d) = (k >> n, k & ((1 << n) - 1));
        let mut b = Circuit::builder(c3.clone());
        for i in 0..n {
            let basis = if bit(theta, i, n) == 1 { hadamard() } else { CMatrix::identity(2) };
            let kraus = (0..2)
                .map(|o| CMatrix::basis_projector(2, o).matmul(&basis))
                .collect::<Result<Vec<_>>>()?;
            b = b.map(&[i], kraus, &[2])?;
        }
        let wires: Vec<usize> = (0..=n).collect();
        b.classical(&wires, &[2, 2], move |x| {
            let (o, cbit) = (x >> 1, x & 1);
            let msg = cbit ^ parity(o);
            let flag = usize::from(o == d);
            msg * 2 + flag
        })?
        .finish(out.clone())
    });
    AqecmScheme::new(format!("conj_parity_pad(n={n})"), KeyDist::uniform(nkeys), m, c, enc, dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::FactoredOp;
    use crate::schemes::{correctness_gap, dbar_apply, encryption_gap};

    #[test]
    fn triv_reject_dbar_is_zero() {
        let s = triv_reject(2).unwrap();
        let rho = CMatrix::maximally_mixed(2);
        assert!(dbar_apply(&s, 0, &rho, 64).unwrap().is_zero(0.0));
        assert_eq!(correctness_gap(&s, 64).unwrap().eps, 1.0);
    }

    #[test]
    fn id_accept_fully_leaks() {
        let s = id_accept(2).unwrap();
        assert!((encryption_gap(&s, 64).unwrap().alpha - 1.0).abs() < 1e-12);
        assert_eq!(correctness_gap(&s, 64).unwrap().eps, 0.0);
    }

    #[test]
    fn pads_are_correct_and_hiding() {
        for s in [otp_accept(3).unwrap(), qotp_accept(2).unwrap(), qotp_accept(3).unwrap()] {
            assert!(correctness_gap(&s, 64).unwrap().eps < 1e-12, "{}", s.name());
            assert!(encryption_gap(&s, 64).unwrap().alpha < 1e-12, "{}", s.name());
        }
    }

    #[test]
    fn cpp_round_trip_every_key() {
        // brute force: honest decode of every key and message, flag and message read off
        let n = 2;
        let s = conj_parity_pad(n).unwrap();
        for k in 0..16 {
            for m in 0..2 {
                let mut x = s.encrypt(k, m, 64).unwrap();
                s.dec().get(k).unwrap().apply(&mut x).unwrap();
                let out = x.to_dense(4).unwrap();
                // expected |m, 1⟩
                let want = 2 * m + 1;
                assert!((out.get(want, want).re - 1.0).abs() < 1e-12, "k={k} m={m}");
            }
        }
        assert_eq!(correctness_gap(&s, 64).unwrap().eps, 0.0);
    }

    #[test]
    fn cpp_ciphertext_matches_definition() {
        let n = 2;
        let s = conj_parity_pad(n).unwrap();
        // θ = 01, d = 10: |1⟩ ⊗ |+⟩ ⊗ |m ⊕ 1⟩
        let k = cpp_key(0b01, 0b10, n);
        let ct = s.encrypt(k, 0, 64).unwrap().to_dense(8).unwrap();
        let plus = hadamard().matmul(&CMatrix::ket(2, 0)).unwrap().outer_self();
        let want = CMatrix::basis_projector(2, 1).kron(&plus).kron(&CMatrix::basis_projector(2, 1));
        assert!(ct.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn cpp_junk_accept_probability() {
        let n = 3;
        let s = conj_parity_pad(n).unwrap();
        let dims = s.cipher_shape().dims();
        let mut x = FactoredOp::unit();
        for (i, &d) in dims.iter().enumerate() {
            x.prep(i, CMatrix::maximally_mixed(d), &[d]).unwrap();
        }
        s.dbar_at(5, &mut x, 0).unwrap();
        assert!((x.trace().re - 0.125).abs() < 1e-12);
    }
}
