//! Attacks built from schemes and other attacks: the gentle distinguisher,
//! the hybrid lift for parallel schemes, and translations between tamper,
//! revocation and game-style attacks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{cgm_of_channel, split_index, Circuit, CircuitBuilder, FactoredOp, Povm};
use crate::error::{mismatch, Error, Result};
use crate::qmath::{helstrom_pair, trace_norm, CMatrix, Factor, SpaceShape};
use crate::schemes::metrics::project_message;
use crate::schemes::{average_ciphertext, revocation_difference, AqecmScheme, QecmrScheme};

/// Helstrom channel for the key-averaged ciphertexts of `m0` and `m1`,
/// dilated by the coherent gentle measurement. The one-qubit register `G`
/// holds the guess (`0` for `m0`).
#[derive(Clone, Debug)]
pub struct Distinguisher {
    pub attack: Circuit,
    /// `½(Tr P ρ₀ + Tr Q ρ₁)`.
    pub success: f64,
    pub saturation: f64,
}

pub fn cgm_distinguisher(s: &AqecmScheme, m0: usize, m1: usize, cap: usize) -> Result<Distinguisher> {
    if m0 == m1 {
        return Err(Error::Precondition("distinguisher needs two distinct messages".into()));
    }
    let r0 = average_ciphertext(s, m0, cap)?;
    let r1 = average_ciphertext(s, m1, cap)?;
    let h = helstrom_pair(&r0, &r1)?;
    let success = 0.5 * (crate::qmath::spectral::trace_product(&h.positive, &r0).re
        + crate::qmath::spectral::trace_product(&h.negative, &r1).re);
    let meas = Povm::indexed(vec![h.positive.clone(), h.negative.clone()])?.to_channel(s.cipher_shape().clone())?;
    let cgm = cgm_of_channel(&meas)?;
    let mut out = s.cipher_shape().clone();
    out.push(Factor::classical("G", 2));
    let attack = Circuit::from_kraus(&cgm).with_out_shape(out)?;
    Ok(Distinguisher { attack, success, saturation: h.saturation })
}

fn prep_basis(mut b: CircuitBuilder, at: usize, dims: &[usize], idx: usize) -> Result<CircuitBuilder> {
    for (i, (&d, x)) in dims.iter().zip(split_index(idx, dims)).enumerate() {
        b = b.prep(at + i, CMatrix::basis_projector(d, x), &[d])?;
    }
    Ok(b)
}

fn prep_mixed(mut b: CircuitBuilder, at: usize, dims: &[usize]) -> Result<CircuitBuilder> {
    for (i, &d) in dims.iter().enumerate() {
        b = b.prep(at + i, CMatrix::maximally_mixed(d), &[d])?;
    }
    Ok(b)
}

/// Side register of an attack whose output starts with `lead` factors.
fn side_shape(attack: &Circuit, lead: usize) -> Result<SpaceShape> {
    let n = attack.out_shape().len();
    attack.out_shape().select(&(lead..n).collect::<Vec<_>>())
}

/// `A′_{k″}`: against `S′`, prepare `E″_{k″}(m″₀)`, run the attack on the
/// pair, decode the second part with `D″_{k″}` and keep its flag, giving
/// `C′ → C′ ⊗ F″ ⊗ A`.
pub fn lift_hybrid_attack(a: &Circuit, s1: &AqecmScheme, s2: &AqecmScheme, k2: usize, m2: usize) -> Result<Circuit> {
    let c1 = s1.cipher_shape();
    let joint = c1.concat(s2.cipher_shape());
    if a.in_shape().dims() != joint.dims() {
        return Err(mismatch("hybrid lift needs an attack on the parallel ciphertext"));
    }
    let lc1 = c1.len();
    let lc = joint.len();
    let side = side_shape(a, lc)?;
    let b = prep_basis(Circuit::builder(c1.clone()), lc1, &s2.msg_shape().dims(), m2)?;
    let mut b = b.append(&s2.enc().get(k2)?, lc1)?.append(a, 0)?.append(&s2.dec().get(k2)?, lc1)?;
    for _ in 0..s2.msg_shape().len() {
        b = b.discard(lc1)?;
    }
    let mut out = c1.clone();
    out.push(Factor::classical("F2", 2));
    b.finish(out.concat(&side))
}

/// A tamper attack on `S` read as a revocation attack on `Rev(S)`, whose
/// tokens are the ciphertexts themselves.
pub fn rev_from_tamper(a: &Circuit, rev: &QecmrScheme) -> Result<Circuit> {
    let c = rev.base().cipher_shape();
    let dims = a.out_shape().dims();
    if a.in_shape().dims() != c.dims() || rev.rev_shape().dims() != c.dims() || dims[..c.len()] != c.dims()[..] {
        return Err(mismatch("attack does not fit a scheme whose tokens are its ciphertexts"));
    }
    Ok(a.clone())
}

/// The revocation attack `(R ⊗ Id_A) ∘ A′` on `s` induced by a tamper
/// attack `A′` on `TE(s)`.
pub fn tamper_from_rev(a: &Circuit, s: &QecmrScheme) -> Result<Circuit> {
    let c = s.base().cipher_shape();
    if a.in_shape().dims() != c.dims() || a.out_shape().dims()[..c.len()] != c.dims()[..] {
        return Err(mismatch("tamper attack does not fit the ciphertext space"));
    }
    let side = side_shape(a, c.len())?;
    Circuit::builder(c.clone())
        .append(a, 0)?
        .append(s.rev(), 0)?
        .finish(s.rev_shape().concat(&side))
}

/// Game-style attack `(A⁰, A¹, A²)`; `A²` acts on `K ⊗ A` and outputs a
/// classical guess bit.
#[derive(Clone, Debug)]
pub struct GameAttack {
    pub a0: Circuit,
    pub a1: Circuit,
    pub a2: Circuit,
}

/// The attack pair of the translation from a revocation attack: `A²` is
/// the Helstrom measurement of the key-labeled conditioned operator and
/// `A²_flip` the same with its guess flipped.
#[derive(Clone, Debug)]
pub struct GamePair {
    pub attack: GameAttack,
    pub flipped: GameAttack,
    /// `E_k ‖(V̄_k ⊗ Id) ∘ A ∘ E_k(m − m′)‖₁`.
    pub expected_norm: f64,
}

fn key_shape(n: usize) -> SpaceShape {
    SpaceShape::classical("K", n)
}

pub fn game_from_rev(a: &Circuit, s: &QecmrScheme, m: usize, m2: usize, cap: usize) -> Result<GamePair> {
    let base = s.base();
    let c = base.cipher_shape();
    let lr = s.rev_shape().len();
    if a.in_shape().dims() != c.dims() || a.out_shape().dims()[..lr] != s.rev_shape().dims()[..] {
        return Err(mismatch("revocation attack must map C to R ⊗ A"));
    }
    let side = side_shape(a, lr)?;
    let mdims = base.msg_shape().dims();
    let lm = mdims.len();
    let nk = s.keys().len();
    let da = side.total_dim();

    let mut two = base.msg_shape().concat(base.msg_shape());
    two = two.concat(&side);
    let b = prep_basis(Circuit::builder(SpaceShape::trivial()), 0, &mdims, m)?;
    let b = prep_basis(b, lm, &mdims, m2)?;
    let a0 = prep_mixed(b, 2 * lm, &side.dims())?.finish(two)?;

    let mut b = Circuit::builder(c.concat(&side));
    for _ in 0..side.len() {
        b = b.discard(c.len())?;
    }
    let a1 = b.append(a, 0)?.finish(a.out_shape().clone())?;

    let blocks: Vec<CMatrix> = (0..nk)
        .into_par_iter()
        .map(|k| {
            let p = s.keys().prob(k);
            if p == 0.0 {
                return Ok(CMatrix::zeros(da, da));
            }
            Ok(revocation_difference(s, a, k, m, m2, cap)?.scale_real(p))
        })
        .collect::<Result<_>>()?;
    let expected_norm = blocks.iter().map(trace_norm).sum();
    let mut pos = CMatrix::zeros(nk * da, nk * da);
    for (k, blk) in blocks.iter().enumerate() {
        let h = helstrom_pair(blk, &CMatrix::zeros(da, da))?;
        for r in 0..da {
            for cc in 0..da {
                pos.set(k * da + r, k * da + cc, h.positive.get(r, cc));
            }
        }
    }
    let neg = &CMatrix::identity(nk * da) - &pos;
    let input = key_shape(nk).concat(&side);
    let guess = SpaceShape::classical("g", 2);
    let a2 = Circuit::from_kraus(&Povm::indexed(vec![neg.clone(), pos.clone()])?.to_channel(input.clone())?)
        .with_out_shape(guess.clone())?;
    let a2_flip = Circuit::from_kraus(&Povm::indexed(vec![pos, neg])?.to_channel(input)?).with_out_shape(guess)?;
    let attack = GameAttack { a0: a0.clone(), a1: a1.clone(), a2 };
    let flipped = GameAttack { a0, a1, a2: a2_flip };
    Ok(GamePair { attack, flipped, expected_norm })
}

/// Signed game value `E_k ⟨1|A²_k ∘ (V̄_k ⊗ Id) ∘ A¹ ∘ ((E⁰_k − E¹_k) ⊗ Id) ∘ A⁰|1⟩`,
/// evaluated by running the game.
pub fn game_value(s: &QecmrScheme, g: &GameAttack, cap: usize) -> Result<f64> {
    let base = s.base();
    let lm = base.msg_shape().len();
    let nk = s.keys().len();
    let per_key: Vec<f64> = (0..nk)
        .into_par_iter()
        .map(|k| {
            let p = s.keys().prob(k);
            if p == 0.0 {
                return Ok(0.0);
            }
            let mut vals = [0.0; 2];
            for (b, val) in vals.iter_mut().enumerate() {
                let mut x = FactoredOp::unit().with_cap(cap);
                g.a0.apply(&mut x)?;
                // keep M_b measured, drop the other candidate
                let keep = if b == 0 { 0 } else { lm };
                let drop = lm - keep;
                for _ in 0..lm {
                    x.discard(drop)?;
                }
                for w in 0..lm {
                    let d = x.wire_dims()[w];
                    let proj: Vec<CMatrix> = (0..d).map(|i| CMatrix::basis_projector(d, i)).collect();
                    x.apply_kraus(&[w], &proj, &[d])?;
                }
                base.enc().get(k)?.apply(&mut x)?;
                g.a1.apply(&mut x)?;
                s.vbar_at(k, &mut x, 0)?;
                x.prep(0, CMatrix::basis_projector(nk, k), &[nk])?;
                g.a2.apply(&mut x)?;
                x.project(0, 1)?;
                *val = x.trace().re;
            }
            Ok(p * (vals[0] - vals[1]))
        })
        .collect::<Result<_>>()?;
    Ok(per_key.iter().sum())
}

/// One revocation attack per measured message pair of `A⁰`.
#[derive(Clone, Debug)]
pub struct PairAttack {
    pub messages: (usize, usize),
    pub prob: f64,
    pub attack: Circuit,
}

/// `A′_{m,m′}(ρ) = A¹(ρ ⊗ σ_{m,m′})` with `σ_{m,m′}` the memory left by
/// measuring the candidates of `A⁰`.
pub fn rev_from_game(g: &GameAttack, s: &QecmrScheme, cap: usize) -> Result<Vec<PairAttack>> {
    let base = s.base();
    let mdims = base.msg_shape().dims();
    let lm = mdims.len();
    let q = base.num_messages();
    let c = base.cipher_shape();
    let side = side_shape(&g.a0, 2 * lm)?;
    if g.a1.in_shape().dims() != c.concat(&side).dims() {
        return Err(mismatch("A¹ must act on the ciphertext and the memory of A⁰"));
    }
    let mut out = Vec::new();
    for m in 0..q {
        for m2 in 0..q {
            let mut x = FactoredOp::unit().with_cap(cap);
            g.a0.apply(&mut x)?;
            project_message(&mut x, &mdims, m, 0)?;
            project_message(&mut x, &mdims, m2, 0)?;
            let p = x.trace().re;
            if p <= 0.0 {
                continue;
            }
            let sigma = x.to_dense(cap)?.scale_real(1.0 / p);
            let attack = Circuit::builder(c.clone())
                .prep(c.len(), sigma, &side.dims())?
                .append(&g.a1, 0)?
                .finish(g.a1.out_shape().clone())?;
            out.push(PairAttack { messages: (m, m2), prob: p, attack });
        }
    }
    Ok(out)
}

/// Reshapes an attack `N → N ⊗ A` into a forgery `N → N ⊗ N`: `A` must be
/// banknote-shaped, or trivial, in which case a maximally mixed junk note
/// is appended.
pub fn qm_counterfeit_adapter(a: &Circuit, note: &SpaceShape) -> Result<Circuit> {
    let ln = note.len();
    let dims = a.out_shape().dims();
    if a.in_shape().dims() != note.dims() || dims.len() < ln || dims[..ln] != note.dims()[..] {
        return Err(mismatch("attack does not start from a banknote"));
    }
    let side = &dims[ln..];
    let both = note.concat(note);
    if side == note.dims().as_slice() {
        return a.clone().with_out_shape(both);
    }
    if side.is_empty() {
        let b = Circuit::builder(note.clone()).append(a, 0)?;
        return prep_mixed(b, ln, &note.dims())?.finish(both);
    }
    Err(mismatch(format!("side register {side:?} cannot be read as a banknote {:?}", note.dims())))
}

/// Summary of a translated game attack for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameCheck {
    pub value: f64,
    pub flipped_value: f64,
    pub expected_norm: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::builtin::{builtin_attack, AttackKind};
    use crate::constructions::{id_accept, otp_accept, parallel_compose, random_aqecm, random_qecmr, rev_of};
    use crate::qmath::random::rng_from_seed;
    use crate::schemes::{conditioned_state, revocation_profile, tamper_profile};

    #[test]
    fn distinguisher_on_id_accept_leaks_everything() {
        let s = id_accept(2).unwrap();
        let d = cgm_distinguisher(&s, 0, 1, 64).unwrap();
        assert!((d.success - 1.0).abs() < 1e-12);
        let p = tamper_profile(&s, &d.attack, 0, 1, 64).unwrap();
        assert!(p.distances.iter().all(|&x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn distinguisher_on_otp_is_blind() {
        let s = otp_accept(2).unwrap();
        let d = cgm_distinguisher(&s, 0, 1, 64).unwrap();
        assert!(d.saturation.abs() < 1e-12);
        let p = tamper_profile(&s, &d.attack, 0, 1, 64).unwrap();
        assert!(p.max_distance() < 1e-12);
    }

    #[test]
    fn hybrid_lift_identity() {
        let mut rng = rng_from_seed(21);
        let s1 = random_aqecm(&mut rng, 2, 2, 2).unwrap();
        let s2 = random_aqecm(&mut rng, 2, 2, 2).unwrap();
        let par = parallel_compose(&s1, &s2).unwrap();
        let a = builtin_attack(&AttackKind::RandomIsometry { seed: 3, adim: 2 }, par.cipher_shape()).unwrap();
        for (k1, k2, m1, m2) in [(0, 1, 1, 0), (1, 0, 0, 1)] {
            let lifted = lift_hybrid_attack(&a, &s1, &s2, k2, m2).unwrap();
            let rho = conditioned_state(&par, &a, k1 * 2 + k2, m1 * 2 + m2, 64).unwrap();
            let sigma = conditioned_state(&s1, &lifted, k1, m1, 64).unwrap();
            // σ lives on (F″, A): keep the accept block
            let acc = sigma.block(2, 2, 2, 2);
            assert!(acc.max_abs_diff(&rho) < 1e-10);
        }
    }

    #[test]
    fn game_flip_pair_sums_to_expected_norm() {
        let mut rng = rng_from_seed(5);
        let s = random_qecmr(&mut rng, 3, 2, 2, 2).unwrap();
        let a = builtin_attack(&AttackKind::RandomIsometry { seed: 9, adim: 2 }, s.base().cipher_shape()).unwrap();
        // token = first output factor, A = second
        let a = a.with_out_shape(s.rev_shape().concat(&SpaceShape::single("A", 2))).unwrap();
        let g = game_from_rev(&a, &s, 0, 1, 64).unwrap();
        let v = game_value(&s, &g.attack, 64).unwrap();
        let w = game_value(&s, &g.flipped, 64).unwrap();
        assert!((v.abs() + w.abs() - g.expected_norm).abs() < 1e-9);
        let prof = revocation_profile(&s, &a, 0, 1, 64).unwrap();
        assert!((2.0 * prof.expectation() - g.expected_norm).abs() < 1e-9);

        let pairs = rev_from_game(&g.attack, &s, 64).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].prob - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adapter_shapes() {
        let s = otp_accept(2).unwrap();
        let id = builtin_attack(&AttackKind::Identity, s.cipher_shape()).unwrap();
        let f = qm_counterfeit_adapter(&id, s.cipher_shape()).unwrap();
        assert_eq!(f.out_shape().dims(), vec![2, 2]);
        let bad = builtin_attack(&AttackKind::RandomIsometry { seed: 1, adim: 3 }, s.cipher_shape()).unwrap();
        assert!(qm_counterfeit_adapter(&bad, s.cipher_shape()).is_err());
    }

    #[test]
    fn rev_translation_of_identity() {
        let s = rev_of(&otp_accept(2).unwrap()).unwrap();
        let id = builtin_attack(&AttackKind::Identity, s.base().cipher_shape()).unwrap();
        let r = rev_from_tamper(&id, &s).unwrap();
        assert_eq!(r.out_shape().dims(), vec![2]);
        let p = revocation_profile(&s, &r, 0, 1, 64).unwrap();
        assert!(p.max_distance() < 1e-12);
    }
}
