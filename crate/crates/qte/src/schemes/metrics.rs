//! Correctness, encryption and tamper-evidence functionals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::types::{AqecmScheme, QecmScheme, QecmrScheme, QmScheme};
use crate::channels::{Circuit, FactoredOp};
use crate::error::{mismatch, Result};
use crate::qmath::{trace_distance, trace_norm, CMatrix};

/// Default cap on a single dense block during evaluation.
pub const DEFAULT_DIM_CAP: usize = 256;

/// Per-message success probabilities and the resulting gap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correctness {
    pub eps: f64,
    pub success: Vec<f64>,
}

impl Correctness {
    fn from_success(success: Vec<f64>) -> Self {
        let worst = success.iter().copied().fold(f64::INFINITY, f64::min);
        Correctness { eps: (1.0 - worst).max(0.0), success }
    }
}

/// Largest key-averaged ciphertext distance over message pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncryptionGap {
    pub alpha: f64,
    pub worst_pair: (usize, usize),
}

/// `Σ_k p_k f(k)` over the key support, evaluated in parallel and summed
/// in key order.
fn key_average<T: Send>(
    probs: &[f64],
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<(f64, T)>> {
    let support: Vec<usize> = (0..probs.len()).filter(|&k| probs[k] > 0.0).collect();
    support.par_iter().map(|&k| f(k).map(|v| (probs[k], v))).collect()
}

/// `D̄_k(ρ)` for a dense input; the result lives on the message space.
pub fn dbar_apply(s: &AqecmScheme, k: usize, rho: &CMatrix, cap: usize) -> Result<CMatrix> {
    let mut x = FactoredOp::from_dense(rho, &s.cipher_shape().dims())?.with_cap(cap);
    s.dbar_at(k, &mut x, 0)?;
    x.to_dense(cap)
}

/// `V̄_k(ρ) = ⟨1|V_k(ρ)|1⟩` for a dense revocation token.
pub fn vbar_apply(s: &QecmrScheme, k: usize, rho: &CMatrix, cap: usize) -> Result<f64> {
    let mut x = FactoredOp::from_dense(rho, &s.rev_shape().dims())?.with_cap(cap);
    s.vbar_at(k, &mut x, 0)?;
    Ok(x.trace().re)
}

/// Projects the message wires at `offset` onto the basis state `m`.
pub(crate) fn project_message(x: &mut FactoredOp, dims: &[usize], m: usize, offset: usize) -> Result<()> {
    let digits = crate::channels::split_index(m, dims);
    for d in digits {
        x.project(offset, d)?;
    }
    Ok(())
}

fn discard_wires(x: &mut FactoredOp, offset: usize, count: usize) -> Result<()> {
    for _ in 0..count {
        x.discard(offset)?;
    }
    Ok(())
}

/// `ε = 1 − min_m E_k ⟨m|D̄_k E_k(m)|m⟩`.
pub fn correctness_gap(s: &AqecmScheme, cap: usize) -> Result<Correctness> {
    let dims = s.msg_shape().dims();
    let nm = s.num_messages();
    let per_key = key_average(s.keys().probs(), |k| {
        (0..nm)
            .map(|m| {
                let mut x = s.encrypt(k, m, cap)?;
                s.dbar_at(k, &mut x, 0)?;
                project_message(&mut x, &dims, m, 0)?;
                Ok(x.trace().re)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(Correctness::from_success(accumulate(nm, &per_key)))
}

fn accumulate(n: usize, per_key: &[(f64, Vec<f64>)]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (p, v) in per_key {
        for (o, x) in out.iter_mut().zip(v) {
            *o += p * x;
        }
    }
    out
}

/// `ε = 1 − min_m E_k ⟨m|D_k E_k(m)|m⟩` for flagless schemes.
pub fn correctness_gap_qecm(s: &QecmScheme, cap: usize) -> Result<Correctness> {
    let dims = s.msg_shape().dims();
    let nm = s.num_messages();
    let per_key = key_average(s.keys().probs(), |k| {
        (0..nm)
            .map(|m| {
                let mut x = s.encrypt(k, m, cap)?;
                s.dec().get(k)?.apply(&mut x)?;
                project_message(&mut x, &dims, m, 0)?;
                Ok(x.trace().re)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(Correctness::from_success(accumulate(nm, &per_key)))
}

/// Revocation correctness: worst of the decoding gap and the gap of
/// `E_k V̄_k R E_k(m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevocationCorrectness {
    pub eps: f64,
    pub decode: Correctness,
    pub revoke: Correctness,
}

pub fn correctness_gap_qecmr(s: &QecmrScheme, cap: usize) -> Result<RevocationCorrectness> {
    let decode = correctness_gap_qecm(s.base(), cap)?;
    let nm = s.base().num_messages();
    let per_key = key_average(s.keys().probs(), |k| {
        (0..nm)
            .map(|m| {
                let mut x = s.base().encrypt(k, m, cap)?;
                s.rev().apply(&mut x)?;
                s.vbar_at(k, &mut x, 0)?;
                Ok(x.trace().re)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let revoke = Correctness::from_success(accumulate(nm, &per_key));
    Ok(RevocationCorrectness { eps: decode.eps.max(revoke.eps), decode, revoke })
}

/// `ε = 1 − min_{k : p_k > 0} V̄_k(mint(k))`.
pub fn correctness_gap_qm(s: &QmScheme) -> Result<Correctness> {
    let per_key = key_average(s.keys().probs(), |k| {
        let mut x = s.mint(k)?;
        s.vbar_at(k, &mut x, 0)?;
        Ok(x.trace().re)
    })?;
    Ok(Correctness::from_success(per_key.into_iter().map(|(_, v)| v).collect()))
}

/// Key-averaged ciphertext `Σ_k p_k E_k(m)` as a dense matrix.
pub fn average_ciphertext(s: &AqecmScheme, m: usize, cap: usize) -> Result<CMatrix> {
    let d = s.cipher_shape().total_dim();
    let per_key = key_average(s.keys().probs(), |k| s.encrypt(k, m, cap)?.to_dense(cap))?;
    let mut out = CMatrix::zeros(d, d);
    for (p, c) in &per_key {
        out += &c.scale_real(*p);
    }
    Ok(out)
}

/// `α = max_{m, m′} ½‖E_k[E_k(m)] − E_k[E_k(m′)]‖₁`.
pub fn encryption_gap(s: &AqecmScheme, cap: usize) -> Result<EncryptionGap> {
    let nm = s.num_messages();
    let avg: Vec<CMatrix> = (0..nm).map(|m| average_ciphertext(s, m, cap)).collect::<Result<_>>()?;
    let mut best = EncryptionGap { alpha: 0.0, worst_pair: (0, 0) };
    for a in 0..nm {
        for b in (a + 1)..nm {
            let d = trace_distance(&avg[a], &avg[b])?;
            if d > best.alpha {
                best = EncryptionGap { alpha: d, worst_pair: (a, b) };
            }
        }
    }
    Ok(best)
}

/// Per-key distances `d_k = ½‖((Tr_M ∘ D̄_k) ⊗ Id_A) ∘ A ∘ E_k(m − m′)‖₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TamperProfile {
    pub messages: (usize, usize),
    pub keys: Vec<usize>,
    pub probs: Vec<f64>,
    pub distances: Vec<f64>,
}

impl TamperProfile {
    pub fn expectation(&self) -> f64 {
        self.probs.iter().zip(&self.distances).map(|(p, d)| p * d).sum()
    }

    /// `Pr_k[d_k ≤ δ]`.
    pub fn prob_within(&self, delta: f64) -> f64 {
        self.probs.iter().zip(&self.distances).filter(|(_, &d)| d <= delta).map(|(p, _)| p).sum()
    }

    /// Probability form: `Pr_k[d_k ≤ δ] ≥ 1 − δ`.
    pub fn witnesses(&self, delta: f64) -> bool {
        self.prob_within(delta) >= 1.0 - delta - 1e-12
    }

    /// Smallest `δ` for which this attack is consistent with δ-tamper
    /// evidence, i.e. the attack's lower bound on the scheme's `δ`.
    pub fn delta_lb(&self) -> f64 {
        let mut vals: Vec<f64> = self.distances.clone();
        vals.push(0.0);
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let mut best: f64 = 1.0;
        for (i, &v) in vals.iter().enumerate() {
            let g = self.prob_within(v);
            let cand = v.max(1.0 - g);
            let next = vals.get(i + 1).copied().unwrap_or(f64::INFINITY);
            if cand < next && self.prob_within(cand) >= 1.0 - cand - 1e-12 {
                best = best.min(cand);
            }
        }
        best.clamp(0.0, 1.0)
    }

    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }

    /// The two conversions between expectation and probability forms:
    /// `(E ≤ δ ⇒ √δ-witnessed, δ-witnessed ⇒ E ≤ 2δ − δ²)`, each as a slack.
    pub fn te_ns_slacks(&self) -> (f64, f64) {
        let e = self.expectation();
        let s = e.max(0.0).sqrt();
        let first = self.prob_within(s) - (1.0 - s);
        let d = self.delta_lb();
        let second = (2.0 * d - d * d) - e;
        (first, second)
    }
}

/// Applies `attack` (C → C ⊗ A) to `E_k(m) − E_k(m′)` and returns the
/// operator left on `A` after the accept branch of `D_k` is traced out.
pub fn conditioned_difference(
    s: &AqecmScheme,
    attack: &Circuit,
    k: usize,
    m: usize,
    m2: usize,
    cap: usize,
) -> Result<CMatrix> {
    let a = s.encrypt(k, m, cap)?;
    let b = s.encrypt(k, m2, cap)?;
    let mut x = FactoredOp::difference(&a, &b)?;
    attack.apply(&mut x)?;
    s.dbar_at(k, &mut x, 0)?;
    discard_wires(&mut x, 0, s.msg_shape().len())?;
    x.to_dense(cap)
}

/// `((Tr_M ∘ D̄_k) ⊗ Id_A) ∘ A ∘ E_k(m)`, subnormalized, on `A`.
pub fn conditioned_state(s: &AqecmScheme, attack: &Circuit, k: usize, m: usize, cap: usize) -> Result<CMatrix> {
    let mut x = s.encrypt(k, m, cap)?;
    attack.apply(&mut x)?;
    s.dbar_at(k, &mut x, 0)?;
    discard_wires(&mut x, 0, s.msg_shape().len())?;
    x.to_dense(cap)
}

/// `(V̄_k ⊗ Id_A) ∘ A ∘ E_k(m − m′)` for a revocation attack `A : C → R ⊗ A`.
pub fn revocation_difference(
    s: &QecmrScheme,
    attack: &Circuit,
    k: usize,
    m: usize,
    m2: usize,
    cap: usize,
) -> Result<CMatrix> {
    let a = s.base().encrypt(k, m, cap)?;
    let b = s.base().encrypt(k, m2, cap)?;
    let mut x = FactoredOp::difference(&a, &b)?;
    attack.apply(&mut x)?;
    s.vbar_at(k, &mut x, 0)?;
    x.to_dense(cap)
}

/// Per-key `½‖(V̄_k ⊗ Id_A) ∘ A ∘ E_k(m − m′)‖₁`; its expectation is the
/// quantity bounded by revocation security.
pub fn revocation_profile(s: &QecmrScheme, attack: &Circuit, m: usize, m2: usize, cap: usize) -> Result<TamperProfile> {
    let rdims = s.rev_shape().dims();
    let adims = attack.out_shape().dims();
    if attack.in_shape().dims() != s.base().cipher_shape().dims()
        || adims.len() < rdims.len()
        || adims[..rdims.len()] != rdims[..]
    {
        return Err(mismatch("revocation attack must map ciphertexts to tokens and a side register"));
    }
    let per_key = key_average(s.keys().probs(), |k| {
        let diff = revocation_difference(s, attack, k, m, m2, cap)?;
        Ok((k, 0.5 * trace_norm(&diff)))
    })?;
    Ok(collect_profile(m, m2, per_key))
}

fn collect_profile(m: usize, m2: usize, per_key: Vec<(f64, (usize, f64))>) -> TamperProfile {
    let mut prof = TamperProfile { messages: (m, m2), keys: Vec::new(), probs: Vec::new(), distances: Vec::new() };
    for (p, (k, d)) in per_key {
        prof.keys.push(k);
        prof.probs.push(p);
        prof.distances.push(d);
    }
    prof
}

pub fn tamper_profile(s: &AqecmScheme, attack: &Circuit, m: usize, m2: usize, cap: usize) -> Result<TamperProfile> {
    let cdims = s.cipher_shape().dims();
    let adims = attack.out_shape().dims();
    if attack.in_shape().dims() != cdims || adims.len() < cdims.len() || adims[..cdims.len()] != cdims[..] {
        return Err(mismatch(format!(
            "tamper attack {:?} -> {:?} does not fit ciphertext {:?}",
            attack.in_shape().dims(),
            adims,
            cdims
        )));
    }
    let per_key = key_average(s.keys().probs(), |k| {
        let diff = conditioned_difference(s, attack, k, m, m2, cap)?;
        Ok((k, 0.5 * trace_norm(&diff)))
    })?;
    Ok(collect_profile(m, m2, per_key))
}

/// `E_k (V̄_k ⊗ V̄_k) ∘ A ∘ mint(k)` for a forgery `A : N → N ⊗ N`.
pub fn qm_forgery_value(s: &QmScheme, attack: &Circuit) -> Result<f64> {
    let nd = s.note_shape().dims();
    let mut both = nd.clone();
    both.extend_from_slice(&nd);
    if attack.in_shape().dims() != nd || attack.out_shape().dims() != both {
        return Err(mismatch("forgery attack must map one banknote to two"));
    }
    let per_key = key_average(s.keys().probs(), |k| {
        let mut x = s.mint(k)?;
        attack.apply(&mut x)?;
        s.vbar_at(k, &mut x, 0)?;
        s.vbar_at(k, &mut x, 0)?;
        Ok(x.trace().re)
    })?;
    Ok(per_key.iter().map(|(p, v)| p * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(d: Vec<f64>) -> TamperProfile {
        let n = d.len();
        TamperProfile { messages: (0, 1), keys: (0..n).collect(), probs: vec![1.0 / n as f64; n], distances: d }
    }

    #[test]
    fn delta_lb_all_zero() {
        assert_eq!(profile(vec![0.0, 0.0]).delta_lb(), 0.0);
    }

    #[test]
    fn delta_lb_all_one() {
        assert_eq!(profile(vec![1.0, 1.0]).delta_lb(), 1.0);
    }

    #[test]
    fn delta_lb_mixed() {
        // half the keys at 0.1, half at 0.9: δ = 0.5 works, nothing below does
        let p = profile(vec![0.1, 0.9]);
        assert!((p.delta_lb() - 0.5).abs() < 1e-15);
        assert!(p.witnesses(0.5));
        assert!(!p.witnesses(0.4));
    }

    #[test]
    fn delta_lb_small_spread() {
        let p = profile(vec![0.2, 0.2, 0.2, 0.2]);
        assert!((p.delta_lb() - 0.2).abs() < 1e-15);
        let (a, b) = p.te_ns_slacks();
        assert!(a >= 0.0 && b >= 0.0);
    }
}
