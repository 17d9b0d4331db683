//! Scheme-to-scheme combinators: parallel repetition, Double, the
//! secret-sharing product, message re-encoding and flag removal.

use crate::channels::{Circuit, KrausChannel};
use crate::error::{mismatch, Error, Result};
use crate::qmath::{CMatrix, Permutation, SpaceShape, ONE};
use crate::schemes::{flag_shape, AqecmScheme, GroupTable, KeyDist, KeyedFamily, QecmScheme};

/// Regroups `(M1, F1, M2, F2)` into `(M1, M2, F1, F2)` and combines the
/// two flags with `f`.
fn merge_flags(
    d1: &Circuit,
    d2: &Circuit,
    l1: usize,
    l2: usize,
    out: SpaceShape,
    f: fn(usize, usize) -> usize,
) -> Result<Circuit> {
    let both = d1.tensor(d2);
    let perm = Permutation::from_images(vec![0, 2, 1, 3])?.expand(&[l1, 1, l2, 1]);
    Circuit::builder(both.in_shape().clone())
        .append(&both, 0)?
        .permute(perm)?
        .classical(&[l1 + l2, l1 + l2 + 1], &[2], move |x| f(x >> 1, x & 1))?
        .finish(out)
}

/// `E_(k′,k″) = E′ ⊗ E″`; decoding runs `D′ ⊗ D″` and ANDs the flags.
pub fn parallel_compose(s1: &AqecmScheme, s2: &AqecmScheme) -> Result<AqecmScheme> {
    let keys = KeyDist::product(s1.keys(), s2.keys());
    let msg = s1.msg_shape().concat(s2.msg_shape());
    let cipher = s1.cipher_shape().concat(s2.cipher_shape());
    let enc = s1.enc().tensor(s2.enc());
    let (l1, l2) = (s1.msg_shape().len(), s2.msg_shape().len());
    let out = msg.concat(&flag_shape());
    let (a, b) = (s1.dec().clone(), s2.dec().clone());
    let n2 = s2.keys().len();
    let o = out.clone();
    let dec = KeyedFamily::new(keys.len(), cipher.clone(), out, move |k| {
        merge_flags(&a.get(k / n2)?, &b.get(k % n2)?, l1, l2, o.clone(), |x, y| x & y)
    });
    AqecmScheme::new(format!("par({}, {})", s1.name(), s2.name()), keys, msg, cipher, enc, dec)
}

/// `n`-fold parallel repetition; the ciphertext dimension must stay
/// within `cap`.
pub fn nfold(s: &AqecmScheme, n: usize, cap: usize) -> Result<AqecmScheme> {
    if n == 0 {
        return Err(Error::Precondition("nfold needs n >= 1".into()));
    }
    let needed = s.cipher_shape().total_dim().checked_pow(n as u32).unwrap_or(usize::MAX);
    if needed > cap {
        return Err(Error::DimensionCap { cap, needed });
    }
    let mut acc = s.clone();
    for _ in 1..n {
        acc = parallel_compose(&acc, s)?;
    }
    if n == 1 {
        return Ok(acc);
    }
    Ok(acc.renamed(format!("nfold({}, n={n})", s.name())))
}

/// `V = Σ_m |m, m⟩⟨m|`.
fn copy_isometry(q: usize) -> CMatrix {
    let mut v = CMatrix::zeros(q * q, q);
    for m in 0..q {
        v.set(m * q + m, m, ONE);
    }
    v
}

/// Selector `Ψ` on `(sel, M1, M2)`: outputs `M1` on `sel = 0` and `M2`
/// on `sel = 1`, tracing the other copy.
fn selector_kraus(q: usize) -> Vec<CMatrix> {
    let mut ks = Vec::with_capacity(2 * q);
    for j in 0..q {
        let mut k = CMatrix::zeros(q, 2 * q * q);
        for a in 0..q {
            k.set(a, a * q + j, ONE);
        }
        ks.push(k);
    }
    for i in 0..q {
        let mut k = CMatrix::zeros(q, 2 * q * q);
        for b in 0..q {
            k.set(b, q * q + i * q + b, ONE);
        }
        ks.push(k);
    }
    ks
}

/// Double: a selector qubit `|0⟩` next to two independently keyed
/// encryptions of a copied message; decoding keeps the AND flag and lets
/// the selector pick which recovered message to output.
pub fn double_of(s: &AqecmScheme) -> Result<AqecmScheme> {
    let par = parallel_compose(s, s)?;
    let msg = s.msg_shape().clone();
    let l = msg.len();
    let q = msg.total_dim();
    let mdims = msg.dims();
    let mut copy_dims = mdims.clone();
    copy_dims.extend_from_slice(&mdims);
    let mut cipher = SpaceShape::single("sel", 2);
    cipher = cipher.concat(par.cipher_shape());
    let out = msg.concat(&flag_shape());

    let penc = par.enc().clone();
    let (m2, c2) = (msg.clone(), cipher.clone());
    let enc = KeyedFamily::new(par.keys().len(), msg.clone(), cipher.clone(), move |k| {
        let wires: Vec<usize> = (0..l).collect();
        Circuit::builder(m2.clone())
            .map(&wires, vec![copy_isometry(q)], &copy_dims)?
            .append(&penc.get(k)?, 0)?
            .prep(0, CMatrix::basis_projector(2, 0), &[2])?
            .finish(c2.clone())
    });
    let pdec = par.dec().clone();
    let (c3, o3) = (cipher.clone(), out.clone());
    let psi = selector_kraus(q);
    let dec = KeyedFamily::new(par.keys().len(), cipher.clone(), out, move |k| {
        let wires: Vec<usize> = (0..=2 * l).collect();
        Circuit::builder(c3.clone())
            .append(&pdec.get(k)?, 1)?
            .map(&wires, psi.clone(), &mdims)?
            .finish(o3.clone())
    });
    AqecmScheme::new(format!("double({})", s.name()), par.keys().clone(), msg, cipher, enc, dec)
}

/// Secret-sharing product `S ∗ S′`: a uniform pad `p` is encrypted under
/// `S` and `p ∗ m` under `S′`; decoding ORs the flags and undoes `∗`.
pub fn star_of(s1: &AqecmScheme, s2: &AqecmScheme, g: &GroupTable) -> Result<AqecmScheme> {
    if s1.msg_shape().dims() != s2.msg_shape().dims() {
        return Err(mismatch("star product needs a shared message alphabet"));
    }
    let q = s1.num_messages();
    if g.order() != q {
        return Err(mismatch(format!("group of order {} on {q} messages", g.order())));
    }
    let msg = s1.msg_shape().clone();
    let l = msg.len();
    let mdims = msg.dims();
    let keys = KeyDist::product(s1.keys(), s2.keys());
    let cipher = s1.cipher_shape().concat(s2.cipher_shape());
    let out = msg.concat(&flag_shape());
    let lc1 = s1.cipher_shape().len();
    let n2 = s2.keys().len();
    let u = g.coherent_unitary();
    let pad = tensor_maximally_mixed(&mdims);

    let (e1, e2) = (s1.enc().clone(), s2.enc().clone());
    let (m2, c2, u2) = (msg.clone(), cipher.clone(), u.clone());
    let mdims2 = mdims.clone();
    let enc = KeyedFamily::new(keys.len(), msg.clone(), cipher.clone(), move |k| {
        let both: Vec<usize> = (0..2 * l).collect();
        Circuit::builder(m2.clone())
            .prep(0, pad.clone(), &mdims2)?
            .unitary(&both, u2.clone())?
            .append(&e1.get(k / n2)?, 0)?
            .append(&e2.get(k % n2)?, lc1)?
            .finish(c2.clone())
    });
    let (d1, d2) = (s1.dec().clone(), s2.dec().clone());
    let (c3, o3) = (cipher.clone(), out.clone());
    let uinv = u.adjoint();
    let mut merged = msg.concat(&msg);
    merged = merged.concat(&flag_shape());
    let dec = KeyedFamily::new(keys.len(), cipher.clone(), out, move |k| {
        let both: Vec<usize> = (0..2 * l).collect();
        let joined = merge_flags(&d1.get(k / n2)?, &d2.get(k % n2)?, l, l, merged.clone(), |x, y| x | y)?;
        let mut b = Circuit::builder(c3.clone()).append(&joined, 0)?.unitary(&both, uinv.clone())?;
        for _ in 0..l {
            b = b.discard(0)?;
        }
        b.finish(o3.clone())
    });
    AqecmScheme::new(format!("star({}, {})", s1.name(), s2.name()), keys, msg, cipher, enc, dec)
}

fn tensor_maximally_mixed(dims: &[usize]) -> CMatrix {
    let d: usize = dims.iter().product();
    CMatrix::maximally_mixed(d)
}

/// Re-encodes messages: `inj : ℳ′ → ℳ` before encryption and
/// `retr : ℳ → ℳ′` after decryption, with `retr ∘ inj = id`.
pub fn extend_messages(s: &AqecmScheme, new_msg: SpaceShape, inj: Vec<usize>, retr: Vec<usize>) -> Result<AqecmScheme> {
    let q_new = new_msg.total_dim();
    let q_old = s.num_messages();
    if inj.len() != q_new || retr.len() != q_old {
        return Err(mismatch(format!(
            "maps of sizes ({}, {}) for alphabets ({q_new}, {q_old})",
            inj.len(),
            retr.len()
        )));
    }
    for (x, &y) in inj.iter().enumerate() {
        if y >= q_old || retr[y] != x {
            return Err(Error::Precondition(format!("retraction fails on message {x}")));
        }
    }
    if let Some(&y) = retr.iter().find(|&&y| y >= q_new) {
        return Err(Error::IndexOutOfRange(format!("retraction value {y} outside the new alphabet")));
    }
    let old_dims = s.msg_shape().dims();
    let new_dims = new_msg.dims();
    let ln = new_msg.len();
    let lo = s.msg_shape().len();
    let out = new_msg.concat(&flag_shape());
    let pre = Circuit::builder(new_msg.clone())
        .classical(&(0..ln).collect::<Vec<_>>(), &old_dims, move |x| inj[x])?
        .finish(s.msg_shape().clone())?;
    let post = Circuit::builder(s.msg_shape().concat(&flag_shape()))
        .classical(&(0..lo).collect::<Vec<_>>(), &new_dims, move |x| retr[x])?
        .finish(out)?;
    AqecmScheme::new(
        format!("extend({})", s.name()),
        s.keys().clone(),
        new_msg,
        s.cipher_shape().clone(),
        s.enc().after_fixed(&pre)?,
        s.dec().then_fixed(&post)?,
    )
}

/// `(Id ⊗ Tr_F) ∘ D`.
pub fn drop_flag(s: &AqecmScheme) -> Result<QecmScheme> {
    let l = s.msg_shape().len();
    let strip = Circuit::builder(s.msg_shape().concat(&flag_shape())).discard(l)?.finish(s.msg_shape().clone())?;
    QecmScheme::new(
        format!("drop_flag({})", s.name()),
        s.keys().clone(),
        s.msg_shape().clone(),
        s.cipher_shape().clone(),
        s.enc().clone(),
        s.dec().then_fixed(&strip)?,
    )
}

/// Keyed Kraus families as a scheme, for schemes loaded from files.
pub fn aqecm_from_kraus(
    name: &str,
    keys: KeyDist,
    msg: SpaceShape,
    cipher: SpaceShape,
    enc: Vec<KrausChannel>,
    dec: Vec<KrausChannel>,
) -> Result<AqecmScheme> {
    let enc = KeyedFamily::from_circuits(enc.iter().map(Circuit::from_kraus).collect())?;
    let dec = KeyedFamily::from_circuits(dec.iter().map(Circuit::from_kraus).collect())?;
    AqecmScheme::new(name, keys, msg, cipher, enc, dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::baselines::{conj_parity_pad, id_accept, otp_accept, triv_reject};
    use crate::schemes::{correctness_gap, correctness_gap_qecm};

    #[test]
    fn parallel_of_pads_is_correct() {
        let s = parallel_compose(&otp_accept(2).unwrap(), &otp_accept(3).unwrap()).unwrap();
        assert_eq!(s.num_messages(), 6);
        assert!(correctness_gap(&s, 64).unwrap().eps < 1e-12);
    }

    #[test]
    fn and_with_reject_never_accepts() {
        let s = parallel_compose(&triv_reject(2).unwrap(), &id_accept(2).unwrap()).unwrap();
        let c = correctness_gap(&s, 64).unwrap();
        assert!(c.success.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn nfold_one_is_identity_and_cap_applies() {
        let s = otp_accept(2).unwrap();
        assert_eq!(nfold(&s, 1, 256).unwrap().name(), s.name());
        assert!(matches!(nfold(&s, 9, 256), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn double_honest_decode() {
        let s = double_of(&conj_parity_pad(2).unwrap()).unwrap();
        assert_eq!(s.keys().len(), 256);
        assert_eq!(correctness_gap(&s, 256).unwrap().eps, 0.0);
    }

    #[test]
    fn double_selector_forced_to_one() {
        // with sel = |1⟩ the output must be the second copy's decode
        let base = otp_accept(3).unwrap();
        let s = double_of(&base).unwrap();
        let k = 5;
        let (k1, k2) = (k / 3, k % 3);
        let mut x = crate::channels::FactoredOp::unit();
        x.prep(0, CMatrix::basis_projector(2, 1), &[2]).unwrap();
        x.prep(1, base.encrypt(k1, 0, 64).unwrap().to_dense(64).unwrap(), &[3]).unwrap();
        x.prep(2, base.encrypt(k2, 2, 64).unwrap().to_dense(64).unwrap(), &[3]).unwrap();
        s.dec().get(k).unwrap().apply(&mut x).unwrap();
        let out = x.to_dense(64).unwrap();
        assert!((out.get(2 * 2 + 1, 2 * 2 + 1).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn star_honest_round_trip() {
        let g = GroupTable::cyclic(2);
        let s = star_of(&conj_parity_pad(2).unwrap(), &otp_accept(2).unwrap(), &g).unwrap();
        assert_eq!(correctness_gap(&s, 256).unwrap().eps, 0.0);
    }

    #[test]
    fn s_oplus_inherits_correctness() {
        let g = GroupTable::cyclic(2);
        let s = star_of(&conj_parity_pad(2).unwrap(), &triv_reject(2).unwrap(), &g).unwrap();
        assert_eq!(correctness_gap(&s, 256).unwrap().eps, 0.0);
    }

    #[test]
    fn extend_two_symbols_into_two_bits() {
        let s = nfold(&otp_accept(2).unwrap(), 2, 256).unwrap();
        let e = extend_messages(&s, SpaceShape::classical("M", 2), vec![0, 3], vec![0, 0, 1, 1]).unwrap();
        assert!(correctness_gap(&e, 64).unwrap().eps < 1e-12);
        assert!(extend_messages(&s, SpaceShape::classical("M", 2), vec![0, 3], vec![0, 0, 0, 0]).is_err());
    }

    #[test]
    fn drop_flag_on_reject() {
        let s = triv_reject(3).unwrap();
        assert_eq!(correctness_gap_qecm(&drop_flag(&s).unwrap(), 64).unwrap().eps, 0.0);
    }
}
