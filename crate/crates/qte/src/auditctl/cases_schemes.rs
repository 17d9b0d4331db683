//! Audits of the schemes, constructions and attacks.

use rand::Rng;
use rayon::prelude::*;

use crate::attacks::{
    builtin_attack, cgm_distinguisher, game_from_rev, game_value, lift_hybrid_attack, qm_counterfeit_adapter,
    rev_from_game, tamper_from_rev, AttackKind, GameAttack,
};
use crate::channels::{Circuit, FactoredOp, Povm};
use crate::constructions::{
    conj_parity_pad, double_of, good_pairs, id_accept, otp_accept, parallel_compose, qm_of, qotp_accept, random_aqecm,
    random_qecmr, rev_of, s_oplus, star_of, te_of, triv_reject, GOOD_PAIR_TOL,
};
use crate::error::Result;
use crate::qmath::random::{random_density, random_distribution, random_isometry, random_unitary, AuditRng};
use crate::qmath::{trace_distance, CMatrix, SpaceShape, C64};
use crate::schemes::metrics::project_message;
use crate::schemes::{
    conditioned_state, correctness_gap, correctness_gap_qecmr, correctness_gap_qm, dbar_apply, encryption_gap, flag_shape,
    qm_forgery_value, revocation_profile, tamper_profile, AqecmScheme, GroupTable, QecmrScheme,
};

use super::gallery::{attack_gallery, evaluate_gallery};
use super::registry::{Ctx, Outcome};
use super::report::{Check, IDENTITY_TOL, INEQUALITY_TOL};

/// Kraus operators of `D̄_k`: the flag-1 rows of each `D_k` operator.
fn dbar_kraus(s: &AqecmScheme, k: usize, cap: usize) -> Result<Vec<CMatrix>> {
    let kc = s.dec().get(k)?.to_kraus(cap)?;
    let dm = s.msg_shape().total_dim();
    Ok(kc.kraus_ops().iter().map(|op| CMatrix::from_fn(dm, op.cols(), |r, c| op.get(2 * r + 1, c))).collect())
}

/// Accept effect `D_k†(I_M ⊗ |1⟩⟨1|)` on the ciphertext.
fn accept_effect(s: &AqecmScheme, k: usize) -> Result<CMatrix> {
    let obs = CMatrix::identity(s.msg_shape().total_dim()).kron(&CMatrix::basis_projector(2, 1));
    s.dec().get(k)?.dual_dense(&obs)
}

/// `(message, flag)` distribution of `D_k(ρ)`, read off its diagonal.
fn decoded_dist(s: &AqecmScheme, k: usize, rho: &CMatrix) -> Result<Vec<[f64; 2]>> {
    let out = s.dec().get(k)?.apply_dense(rho)?;
    Ok((0..s.num_messages()).map(|m| [out.get(2 * m, 2 * m).re, out.get(2 * m + 1, 2 * m + 1).re]).collect())
}

fn enc_dense(s: &AqecmScheme, k: usize, m: usize) -> Result<CMatrix> {
    s.enc().get(k)?.apply_dense(&CMatrix::basis_projector(s.num_messages(), m))
}

fn for_keys<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

fn random_baseline(rng: &mut AuditRng) -> Result<AqecmScheme> {
    match rng.random_range(0..6) {
        0 => otp_accept(2),
        1 => qotp_accept(2),
        2 => id_accept(2),
        3 => triv_reject(2),
        4 => random_aqecm(rng, 2, 2, 2),
        _ => random_aqecm(rng, 3, 2, 3),
    }
}

pub fn t07(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let n = ctx.trials(20)?;
    let mut o = Outcome::default();
    let eps = for_keys(n, |i| {
        let mut rng = ctx.rng(i as u64);
        let (a, b) = (random_baseline(&mut rng)?, random_baseline(&mut rng)?);
        let sum = correctness_gap(&a, cap)?.eps + correctness_gap(&b, cap)?.eps;
        Ok((correctness_gap(&parallel_compose(&a, &b)?, cap)?.eps, sum))
    })?;
    o.check(Check::worst_at_most("ε(S′ ⊗ S″) ≤ ε′ + ε″", eps, IDENTITY_TOL));

    let m = ctx.usize("identity_trials", 4)?;
    let rows = for_keys(m, |i| {
        let mut rng = ctx.rng(1000 + i as u64);
        let a = random_aqecm(&mut rng, 2, 2, 2)?;
        let b = random_aqecm(&mut rng, 2, 2, 2)?;
        let par = parallel_compose(&a, &b)?;
        let mut factor: f64 = 0.0;
        for k1 in 0..2 {
            let ka = dbar_kraus(&a, k1, cap)?;
            for k2 in 0..2 {
                let kb = dbar_kraus(&b, k2, cap)?;
                let rho = random_density(&mut rng, 4, 4);
                let mut want = CMatrix::zeros(4, 4);
                for x in &ka {
                    for y in &kb {
                        want += &x.kron(y).conjugate(&rho)?;
                    }
                }
                factor = factor.max(dbar_apply(&par, k1 * 2 + k2, &rho, cap)?.max_abs_diff(&want));
            }
        }
        let attack = builtin_attack(&AttackKind::RandomIsometry { seed: rng.random(), adim: 2 }, par.cipher_shape())?;
        let mut lift: f64 = 0.0;
        for k in 0..4 {
            for msg in 0..4 {
                let (k1, k2, m1, m2) = (k / 2, k % 2, msg / 2, msg % 2);
                let lifted = lift_hybrid_attack(&attack, &a, &b, k2, m2)?;
                let rho = conditioned_state(&par, &attack, k, msg, cap)?;
                let sigma = conditioned_state(&a, &lifted, k1, m1, cap)?;
                lift = lift.max(sigma.block(2, 2, 2, 2).max_abs_diff(&rho));
            }
        }
        Ok((factor, lift))
    })?;
    o.check(Check::worst_identity("D̄ = D̄′ ⊗ D̄″", rows.iter().map(|r| (r.0, 0.0)), IDENTITY_TOL));
    o.check(Check::worst_identity("hybrid lift: ρ = (⟨1| ⊗ I) σ (|1⟩ ⊗ I)", rows.iter().map(|r| (r.1, 0.0)), IDENTITY_TOL));
    Ok(o)
}

pub fn t08(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let mut o = Outcome::default();
    let s = id_accept(2)?;
    let d = cgm_distinguisher(&s, 0, 1, cap)?;
    let p = tamper_profile(&s, &d.attack, 0, 1, cap)?;
    o.check(Check::worst_identity("ID_ACCEPT: conditioned distance 1 per key", p.distances.iter().map(|&x| (x, 1.0)), INEQUALITY_TOL));

    let s = otp_accept(2)?;
    let d = cgm_distinguisher(&s, 0, 1, cap)?;
    o.check(Check::identity("OTP_ACCEPT: Helstrom saturation", d.saturation, 0.0, IDENTITY_TOL));
    let p = tamper_profile(&s, &d.attack, 0, 1, cap)?;
    o.check(Check::identity("OTP_ACCEPT: max distance", p.max_distance(), 0.0, IDENTITY_TOL));

    let n = ctx.usize("n", 2)?;
    let s = s_oplus(&conj_parity_pad(n)?)?;
    let d = cgm_distinguisher(&s, 0, 1, cap)?;
    let alpha = encryption_gap(&s, cap)?.alpha;
    o.check(Check::identity("S^⊕: guess success = ½(1 + α)", d.success, 0.5 * (1.0 + alpha), INEQUALITY_TOL));
    o.value("s_oplus_alpha", alpha);
    o.value("s_oplus_guess_success", d.success);
    Ok(o)
}

pub fn t09(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let random = ctx.usize("random_attacks", 4)?;
    let ns = ctx.list("n", &[2, 3, 4])?;
    let mut o = Outcome::default();
    let mut named: Vec<(String, AqecmScheme)> =
        vec![("otp_accept".into(), otp_accept(2)?), ("id_accept".into(), id_accept(2)?), ("triv_reject".into(), triv_reject(2)?)];
    for &n in &ns {
        named.push((format!("s_oplus_n{n}"), s_oplus(&conj_parity_pad(n)?)?));
    }
    let mut alphas = Vec::new();
    for (i, (label, s)) in named.iter().enumerate() {
        let eps = correctness_gap(s, cap)?.eps;
        let alpha = encryption_gap(s, cap)?.alpha;
        let gallery = attack_gallery(s, random, ctx.seed() ^ (i as u64) << 32, cap)?;
        let summary = evaluate_gallery(s, &gallery, 0, 1, cap)?;
        let bound = (19.0 * (summary.delta_lb + (2.0 * eps).sqrt())).sqrt();
        o.check(Check::at_most(format!("{label}: α ≤ √(19(δ_lb + √(2ε)))"), alpha, bound, INEQUALITY_TOL));
        o.value(format!("{label}.alpha"), alpha);
        o.value(format!("{label}.eps"), eps);
        o.value(format!("{label}.delta_lb"), summary.delta_lb);
        o.value(format!("{label}.attacks_skipped"), summary.skipped.len() as f64);
        if label.starts_with("s_oplus") {
            alphas.push((label.clone(), alpha));
        }
    }
    for w in alphas.windows(2) {
        o.check(Check::at_most(format!("α non-increasing: {} → {}", w[0].0, w[1].0), w[1].1, w[0].1, INEQUALITY_TOL));
    }
    Ok(o)
}

pub fn t10(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let mut o = Outcome::default();
    let mut schemes = vec![otp_accept(2)?, conj_parity_pad(2)?, id_accept(3)?, triv_reject(2)?];
    for i in 0..ctx.trials(3)? {
        schemes.push(random_aqecm(&mut ctx.rng(i as u64), 3, 2, 3)?);
    }
    let gammas = [0.0, 0.1, 0.3, 0.6];
    let mut qm_rows = Vec::new();
    let mut mass_rows = Vec::new();
    for s in &schemes {
        for &g in &gammas {
            qm_rows.push((correctness_gap_qm(&qm_of(s, g, false, cap)?)?.eps, g));
        }
        let eps = correctness_gap(s, cap)?.eps;
        let root = eps.sqrt();
        mass_rows.push((1.0 - root, good_pairs(s, root, cap)?.mass));
    }
    o.check(Check::worst_at_most("QM_γ(S) is γ-correct", qm_rows, INEQUALITY_TOL + GOOD_PAIR_TOL));
    o.check(Check::worst_at_most("Pr[(k, m) ∈ G] ≥ 1 − √ε", mass_rows, INEQUALITY_TOL));
    Ok(o)
}

/// Probability that the star decoder accepts, and accepts with message
/// `m`, given decoded distributions of the two components.
fn star_outcome(g: &GroupTable, d1: &[[f64; 2]], d2: &[[f64; 2]], m: usize) -> (f64, f64) {
    let (mut acc, mut hit) = (0.0, 0.0);
    for (a, fa) in d1.iter().enumerate() {
        for (b, fb) in d2.iter().enumerate() {
            for (f1, p1) in fa.iter().enumerate() {
                for (f2, p2) in fb.iter().enumerate() {
                    if f1 == 0 && f2 == 0 {
                        continue;
                    }
                    let p = p1 * p2;
                    acc += p;
                    if g.op(g.inverse(a), b) == m {
                        hit += p;
                    }
                }
            }
        }
    }
    (acc, hit)
}

pub fn t11(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let n = ctx.usize("n", 2)?;
    let s1 = conj_parity_pad(n)?;
    let s2 = otp_accept(2)?;
    let q = s1.num_messages();
    let g = GroupTable::cyclic(q);
    let star = star_of(&s1, &s2, &g)?;
    let note = star.cipher_shape().clone();
    let ln = note.len();
    let attack = builtin_attack(&AttackKind::ShareSplit { first: s1.cipher_shape().len() }, &note)?;
    let (n1, n2) = (s1.keys().len(), s2.keys().len());
    let junk1 = CMatrix::maximally_mixed(s1.cipher_shape().total_dim());
    let junk2 = CMatrix::maximally_mixed(s2.cipher_shape().total_dim());
    let mdims = star.msg_shape().dims();

    // per (key, message): measured and enumerated accept/decode per half, and the joint oracle
    let rows = for_keys(n1 * n2 * q, |i| {
        let (k, m) = (i / q, i % q);
        let (k1, k2) = (k / n2, k % n2);
        let mut x = star.encrypt(k, m, cap)?;
        attack.apply(&mut x)?;
        let mut measured = [[0.0; 2]; 2];
        for (h, slot) in measured.iter_mut().enumerate() {
            let mut y = x.clone();
            star.dbar_at(k, &mut y, h * ln)?;
            slot[0] = y.trace().re;
            project_message(&mut y, &mdims, m, h * ln)?;
            slot[1] = y.trace().re;
        }
        let mut oracle = [[0.0; 2]; 2];
        let mut joint = 0.0;
        for p in 0..q {
            let a = star_outcome(&g, &decoded_dist(&s1, k1, &enc_dense(&s1, k1, p)?)?, &decoded_dist(&s2, k2, &junk2)?, m);
            let b = star_outcome(&g, &decoded_dist(&s1, k1, &junk1)?, &decoded_dist(&s2, k2, &enc_dense(&s2, k2, g.op(p, m))?)?, m);
            for (h, r) in [a, b].iter().enumerate() {
                oracle[h][0] += r.0 / q as f64;
                oracle[h][1] += r.1 / q as f64;
            }
            joint += a.1 * b.1 / q as f64;
        }
        Ok((star.keys().prob(k), measured, oracle, joint))
    })?;
    let mut o = Outcome::default();
    for h in 0..2 {
        o.check(Check::worst_identity(format!("half {h}: flag accepts"), rows.iter().map(|r| (r.1[h][0], 1.0)), IDENTITY_TOL));
        o.check(Check::worst_identity(
            format!("half {h}: decode = enumeration"),
            rows.iter().map(|r| (r.1[h][1], r.2[h][1])),
            IDENTITY_TOL,
        ));
        o.check(Check::worst_identity(
            format!("half {h}: enumeration = 1/|M|"),
            rows.iter().map(|r| (r.2[h][1], 1.0 / q as f64)),
            IDENTITY_TOL,
        ));
    }
    let qm = qm_of(&star, 0.0, false, cap)?;
    let forged = qm_counterfeit_adapter(&attack, &note)?;
    let value = qm_forgery_value(&qm, &forged)?;
    // perfectly correct components: every positive-probability pair is good
    let mass: f64 = rows.iter().map(|r| r.0 / q as f64).sum();
    let oracle: f64 = rows.iter().map(|r| r.0 / q as f64 * r.3).sum::<f64>() / mass;
    o.check(Check::identity("QM_0(S ∗ S′) forgery = enumeration", value, oracle, INEQUALITY_TOL));
    o.value("forgery_value", value);
    o.value("inverse_message_count", 1.0 / q as f64);
    Ok(o)
}

fn random_game(rng: &mut AuditRng, s: &QecmrScheme) -> Result<GameAttack> {
    let base = s.base();
    let q = base.num_messages();
    let msg = base.msg_shape();
    let da = rng.random_range(1..=3);
    let p = random_distribution(rng, q * q);
    let mut state = CMatrix::zeros(q * q * da, q * q * da);
    for (i, &w) in p.iter().enumerate() {
        let rank = rng.random_range(1..=da);
        let sigma = random_density(rng, da, rank);
        state += &CMatrix::basis_projector(q * q, i).kron(&sigma).scale_real(w);
    }
    let side = SpaceShape::single("A", da);
    let a0 = Circuit::builder(SpaceShape::trivial())
        .prep(0, state, &[q, q, da])?
        .finish(msg.concat(msg).concat(&side))?;
    let c = base.cipher_shape();
    let dr = s.rev_shape().total_dim();
    let min = (c.total_dim() * da).div_ceil(dr);
    let da2 = rng.random_range(min..=min + 1);
    let v = random_isometry(rng, dr * da2, c.total_dim() * da);
    let out = s.rev_shape().concat(&SpaceShape::single("B", da2));
    let a1 = Circuit::builder(c.concat(&side)).map(&[0, 1], vec![v], &[dr, da2])?.finish(out)?;
    let nk = s.keys().len();
    let d2 = nk * da2;
    let u = random_unitary(rng, d2);
    let weights: Vec<f64> = (0..d2).map(|_| rng.random()).collect();
    let e = u.matmul(&CMatrix::diag_real(&weights))?.matmul_adj(&u)?;
    let rest = &CMatrix::identity(d2) - &e;
    let input = SpaceShape::classical("K", nk).concat(&SpaceShape::single("B", da2));
    let a2 = Circuit::from_kraus(&Povm::indexed(vec![rest, e])?.to_channel(input)?).with_out_shape(SpaceShape::classical("g", 2))?;
    Ok(GameAttack { a0, a1, a2 })
}

pub fn t13(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let n = ctx.trials(8)?;
    let rows = for_keys(n, |i| {
        let mut rng = ctx.rng(i as u64);
        let nk = rng.random_range(2..=3);
        let s = random_qecmr(&mut rng, nk, 2, 2, 2)?;
        let c = s.base().cipher_shape();
        let da = rng.random_range(1..=3);
        let dr = s.rev_shape().total_dim();
        let v = random_isometry(&mut rng, dr * da, c.total_dim());
        let a = Circuit::builder(c.clone())
            .map(&[0], vec![v], &[dr, da])?
            .finish(s.rev_shape().concat(&SpaceShape::single("A", da)))?;
        let pair = game_from_rev(&a, &s, 0, 1, cap)?;
        let v0 = game_value(&s, &pair.attack, cap)?;
        let v1 = game_value(&s, &pair.flipped, cap)?;
        let rev = revocation_profile(&s, &a, 0, 1, cap)?.expectation();

        let g = random_game(&mut rng, &s)?;
        let value = game_value(&s, &g, cap)?;
        let mut bound = 0.0;
        for pa in rev_from_game(&g, &s, cap)? {
            let (m, m2) = pa.messages;
            bound += pa.prob * 2.0 * revocation_profile(&s, &pa.attack, m, m2, cap)?.expectation();
        }
        let ratio = if rev > 0.0 { v0.abs().max(v1.abs()) / (2.0 * rev) } else { 0.0 };
        Ok(((v0.abs() + v1.abs(), pair.expected_norm), (2.0 * rev, pair.expected_norm), (value.abs(), bound), ratio))
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_identity("flip pair: |g(A²)| + |g(A²_flip)| = E_k‖Y_k‖₁", rows.iter().map(|r| r.0), INEQUALITY_TOL));
    o.check(Check::worst_identity("revocation profile: 2 E_k d_k = E_k‖Y_k‖₁", rows.iter().map(|r| r.1), INEQUALITY_TOL));
    o.check(Check::worst_at_most("convexity: |game| ≤ Σ p_{m,m′} E_k‖·‖₁", rows.iter().map(|r| r.2), INEQUALITY_TOL));
    o.value("max_game_to_revocation_ratio", rows.iter().map(|r| r.3).fold(0.0, f64::max));
    Ok(o)
}

fn revocation_cases(ctx: &Ctx, cpp: &[usize]) -> Result<Vec<(String, QecmrScheme)>> {
    let mut out = Vec::new();
    for &n in cpp {
        out.push((format!("rev_cpp_n{n}"), rev_of(&conj_parity_pad(n)?)?));
    }
    out.push(("rev_otp".into(), rev_of(&otp_accept(2)?)?));
    for i in 0..ctx.trials(3)? {
        let mut rng = ctx.rng(i as u64);
        out.push((format!("random_qecmr_{i}"), random_qecmr(&mut rng, 3, 2, 3, 2)?));
    }
    Ok(out)
}

pub fn t14(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let mut o = Outcome::default();
    for (label, s) in revocation_cases(ctx, &ctx.list("n", &[2, 3])?)? {
        let eps = correctness_gap_qecmr(&s, cap)?.eps;
        let te = te_of(&s, cap)?;
        let eps_te = correctness_gap(&te, cap)?.eps;
        o.check(Check::at_most(format!("{label}: ε(TE(S)) ≤ 2 ε^(1/4)"), eps_te, 2.0 * eps.max(0.0).powf(0.25), INEQUALITY_TOL));
        o.value(format!("{label}.eps"), eps);
        o.value(format!("{label}.eps_te"), eps_te);
    }
    Ok(o)
}

pub fn t15(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let random = ctx.usize("random_attacks", 2)?;
    let mut o = Outcome::default();
    for (i, (label, s)) in revocation_cases(ctx, &ctx.list("n", &[2])?)?.into_iter().enumerate() {
        let te = te_of(&s, cap)?;
        let c = s.base().cipher_shape().clone();
        let dm = s.base().msg_shape().total_dim();
        let obs = CMatrix::identity(dm).kron(&CMatrix::basis_projector(2, 1));
        let lemma = for_keys(s.keys().len(), |k| {
            let lhs = te.dec().get(k)?.dual_dense(&obs)?;
            let vr = Circuit::builder(c.clone()).append(s.rev(), 0)?.append(&s.ver().get(k)?, 0)?.finish(flag_shape())?;
            Ok(lhs.max_abs_diff(&vr.dual_dense(&CMatrix::basis_projector(2, 1))?))
        })?;
        o.check(Check::worst_identity(format!("{label}: Tr_M ∘ D̄′_k = V̄_k ∘ R"), lemma.into_iter().map(|r| (r, 0.0)), IDENTITY_TOL));

        let gallery = attack_gallery(&te, random, ctx.seed() ^ (i as u64) << 32, cap)?;
        let mut chain = Vec::new();
        let mut per_key: f64 = 0.0;
        for g in &gallery {
            let t = tamper_profile(&te, &g.attack, 0, 1, cap)?;
            let r = revocation_profile(&s, &tamper_from_rev(&g.attack, &s)?, 0, 1, cap)?;
            chain.push((t.expectation(), r.expectation()));
            for (a, b) in t.distances.iter().zip(&r.distances) {
                per_key = per_key.max((a - b).abs());
            }
        }
        o.check(Check::worst_identity(format!("{label}: tamper expectation = revocation expectation"), chain, INEQUALITY_TOL));
        o.check(Check::identity(format!("{label}: per-key distances agree"), per_key, 0.0, INEQUALITY_TOL));
    }
    Ok(o)
}

pub fn t16(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let n = ctx.usize("n", 3)?;
    let s = s_oplus(&conj_parity_pad(n)?)?;
    let q = s.num_messages();
    let flip = builtin_attack(&AttackKind::Bitflip, s.cipher_shape())?;
    let dims = s.msg_shape().dims();
    let rows = for_keys(s.keys().len() * q, |i| {
        let (k, b) = (i / q, i % q);
        let target = (b + 1) % q;
        let mut x = s.encrypt(k, b, cap)?;
        flip.apply(&mut x)?;
        let commute = x.to_dense(cap)?.max_abs_diff(&s.encrypt(k, target, cap)?.to_dense(cap)?);
        s.dbar_at(k, &mut x, 0)?;
        project_message(&mut x, &dims, target, 0)?;
        Ok((x.trace().re, commute))
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_identity("⟨b⊕1| D̄_k Ã E_k(b) |b⊕1⟩ = 1", rows.iter().map(|r| (r.0, 1.0)), IDENTITY_TOL));
    o.check(Check::worst_identity("Ã ∘ E_k(b) = E_k(b⊕1)", rows.iter().map(|r| (r.1, 0.0)), IDENTITY_TOL));
    Ok(o)
}

pub fn t17(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.usize("n", 2)?;
    let s = s_oplus(&conj_parity_pad(n)?)?;
    let half = C64::new(0.5, 0.0);
    let plus = CMatrix::from_fn(2, 2, |_, _| half);
    let minus = CMatrix::from_fn(2, 2, |r, c| if r == c { half } else { -half });
    let nk = s.keys().len();
    let states = for_keys(nk, |k| {
        let e = s.enc().get(k)?;
        Ok((e.apply_dense(&plus)?.strip_shapes(), e.apply_dense(&minus)?.strip_shapes()))
    })?;
    let rows = for_keys(nk * nk, |i| Ok((trace_distance(&states[i / nk].0, &states[i % nk].1)?, 1.0)))?;
    let mut o = Outcome::default();
    o.check(Check::worst_identity("½‖E_k(|+⟩⟨+|) − E_k′(|−⟩⟨−|)‖₁ = 1", rows, INEQUALITY_TOL));
    Ok(o)
}

pub fn t18(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let n = ctx.usize("n", 3)?;
    let s = conj_parity_pad(n)?;
    let d = double_of(&s)?;
    let note = d.cipher_shape().clone();
    let ln = note.len();
    let lm = d.msg_shape().len();
    let mdims = d.msg_shape().dims();
    let q = s.num_messages();
    let attack = builtin_attack(&AttackKind::DoubleSplit, &note)?;
    let nk = d.keys().len();
    let mut o = Outcome::default();

    let halves = for_keys(nk * q, |i| {
        let (k, m) = (i / q, i % q);
        let mut x = d.encrypt(k, m, cap)?;
        attack.apply(&mut x)?;
        let mut out = [0.0; 2];
        for (h, slot) in out.iter_mut().enumerate() {
            let mut y: FactoredOp = x.clone();
            d.dec().get(k)?.apply_at(&mut y, h * ln)?;
            y.discard(h * ln + lm)?;
            project_message(&mut y, &mdims, m, h * ln)?;
            *slot = y.trace().re;
        }
        Ok(out)
    })?;
    for h in 0..2 {
        o.check(Check::worst_identity(format!("half {h}: flag-ignored decode = m"), halves.iter().map(|r| (r[h], 1.0)), INEQUALITY_TOL));
    }
    let eps_s = correctness_gap(&s, cap)?.eps;
    o.check(Check::at_most("ε(Double(S)) ≤ 2ε(S)", correctness_gap(&d, cap)?.eps, 2.0 * eps_s, IDENTITY_TOL));

    // enumeration oracle over component keys
    let ns = s.keys().len();
    let junk = CMatrix::maximally_mixed(s.cipher_shape().total_dim());
    let comp = for_keys(ns, |k| {
        let j: f64 = decoded_dist(&s, k, &junk)?.iter().map(|r| r[1]).sum();
        let honest = (0..q)
            .map(|m| {
                let dist = decoded_dist(&s, k, &enc_dense(&s, k, m)?)?;
                Ok((dist[m][1], dist.iter().map(|r| r[1]).sum::<f64>()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((j, honest))
    })?;
    let (mut num, mut mass) = (0.0, 0.0);
    for k0 in 0..ns {
        for k1 in 0..ns {
            let w = s.keys().prob(k0) * s.keys().prob(k1) / q as f64;
            if w == 0.0 {
                continue;
            }
            for m in 0..q {
                let g0 = comp[k0].1[m].0;
                let (g1, a1) = comp[k1].1[m];
                // honest Double acceptance with the selector on copy 0
                if g0 * a1 < 1.0 - GOOD_PAIR_TOL {
                    continue;
                }
                mass += w;
                num += w * (g0 * comp[k1].0) * (comp[k0].0 * g1);
            }
        }
    }
    let oracle = if mass > 0.0 { num / mass } else { f64::NAN };
    let qm = qm_of(&d, 0.0, false, cap)?;
    let value = qm_forgery_value(&qm, &qm_counterfeit_adapter(&attack, &note)?)?;
    o.check(Check::identity("QM_0(Double(S)) forgery = enumeration", value, oracle, INEQUALITY_TOL));
    o.check(Check::at_most("forgery value < 1", value, 1.0 - INEQUALITY_TOL, 0.0));
    o.value("forgery_value", value);
    o.value("two_pow_minus_2n", 0.25f64.powi(n as i32));
    Ok(o)
}

pub fn t19(ctx: &Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng(0);
    let pairs = vec![
        ("otp*triv", otp_accept(2)?, triv_reject(2)?),
        ("cpp2*otp", conj_parity_pad(2)?, otp_accept(2)?),
        ("random*random", random_aqecm(&mut rng, 2, 2, 2)?, random_aqecm(&mut rng, 2, 2, 3)?),
    ];
    let mut o = Outcome::default();
    for (label, a, b) in pairs {
        let star = star_of(&a, &b, &GroupTable::cyclic(a.num_messages()))?;
        let (na, nb) = (a.keys().len(), b.keys().len());
        let (da, db) = (a.cipher_shape().total_dim(), b.cipher_shape().total_dim());
        let fa = for_keys(na, |k| accept_effect(&a, k))?;
        let fb = for_keys(nb, |k| accept_effect(&b, k))?;
        let rows = for_keys(na * nb, |i| {
            let (k1, k2) = (i / nb, i % nb);
            let f = accept_effect(&star, i)?;
            let (x, y) = (&fa[k1], &fb[k2]);
            let want = &(&x.kron(&CMatrix::identity(db)) + &CMatrix::identity(da).kron(y)) - &x.kron(y);
            Ok(f.max_abs_diff(&want))
        })?;
        o.check(Check::worst_identity(format!("{label}: inclusion-exclusion"), rows.into_iter().map(|r| (r, 0.0)), IDENTITY_TOL));
    }
    Ok(o)
}

pub fn t20(ctx: &Ctx) -> Result<Outcome> {
    let cap = ctx.cap();
    let random = ctx.usize("random_attacks", 4)?;
    let mut o = Outcome::default();
    for q in [2, 3] {
        let s = triv_reject(q)?;
        let gallery = attack_gallery(&s, random, ctx.seed().wrapping_add(q as u64), cap)?;
        let summary = evaluate_gallery(&s, &gallery, 0, q - 1, cap)?;
        o.check(Check::identity(
            format!("TRIV_REJECT(q={q}): max distance over gallery"),
            summary.results.iter().map(|r| r.max_distance).fold(0.0, f64::max),
            0.0,
            0.0,
        ));
        let mut rng = ctx.rng(q as u64);
        let rho = random_density(&mut rng, s.cipher_shape().total_dim(), 2);
        o.check(Check::identity(format!("TRIV_REJECT(q={q}): D̄ is zero"), dbar_apply(&s, 0, &rho, cap)?.max_abs(), 0.0, 0.0));
    }
    Ok(o)
}
