//! Audits of the linear-algebra and probability lemmas.

use rand::Rng;
use rayon::prelude::*;

use crate::channels::{cgm_of_channel, KrausChannel};
use crate::error::Result;
use crate::qmath::random::{random_density, random_distribution, random_hermitian, random_kraus_ops, random_pure};
use crate::qmath::{helstrom_pair, td_pure, trace_distance, trace_norm, Bound, CMatrix, SpaceShape, C64};

use super::registry::{Ctx, Outcome};
use super::report::{Check, IDENTITY_TOL, INEQUALITY_TOL};

/// Tolerance of the purely probabilistic checks.
const PROB_TOL: f64 = 1e-12;

fn trials<T: Send>(ctx: &Ctx, n: usize, f: impl Fn(&mut crate::qmath::random::AuditRng) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(|i| f(&mut ctx.rng(i as u64))).collect()
}

fn random_channel<R: Rng + ?Sized>(rng: &mut R, din: usize, dout: usize) -> Result<KrausChannel> {
    // enough operators for the Stinespring isometry to exist
    let min = din.div_ceil(dout);
    let n = rng.random_range(min..=min + 2);
    KrausChannel::new(random_kraus_ops(rng, din, dout, n), SpaceShape::single("H", din), SpaceShape::single("K", dout))
}

pub fn t01(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.trials(200)?;
    let max_dim = ctx.usize("max_dim", 8)?;
    let rows = trials(ctx, n, |rng| {
        let d = rng.random_range(1..=max_dim);
        let (a, b) = (random_hermitian(rng, d), random_hermitian(rng, d));
        let h = helstrom_pair(&a, &b)?;
        let diff = &a - &b;
        let tn = trace_norm(&diff);
        let complete = (&(&h.positive + &h.negative) - &CMatrix::identity(d)).max_abs();
        let dout = rng.random_range(1..=max_dim);
        let phi = random_channel(rng, d, dout)?;
        let out = trace_norm(&(&phi.apply(&a)? - &phi.apply(&b)?));
        Ok(((h.saturation, tn), complete, (out, tn)))
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_identity("saturation = trace norm", rows.iter().map(|r| r.0), INEQUALITY_TOL));
    o.check(Check::worst_identity("P + Q = I", rows.iter().map(|r| (r.1, 0.0)), IDENTITY_TOL));
    o.check(Check::worst_at_most("contraction under channels", rows.iter().map(|r| r.2), INEQUALITY_TOL));
    let a = CMatrix::basis_projector(2, 0);
    let b = a.scale_real(0.5);
    o.check(Check::identity("‖|0⟩⟨0| − ½|0⟩⟨0|‖₁ = 0.5", trace_norm(&(&a - &b)), 0.5, 1e-15));
    o.check(Check::identity("saturation of the same pair", helstrom_pair(&a, &b)?.saturation, 0.5, 1e-15));
    Ok(o)
}

pub fn t02(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.trials(200)?;
    let max_dim = ctx.usize("max_dim", 6)?;
    let rows = trials(ctx, n, |rng| {
        let d = rng.random_range(1..=max_dim);
        let psi = random_pure(rng, d).scale_real(rng.random::<f64>().sqrt());
        let phi = random_pure(rng, d).scale_real(rng.random::<f64>().sqrt());
        Ok((td_pure(&psi, &phi)?, trace_distance(&psi.outer_self(), &phi.outer_self())?))
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_identity("td_pure = trace distance", rows, INEQUALITY_TOL));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CMatrix::column(&[C64::new(s, 0.0), C64::new(s, 0.0)]);
    let minus = CMatrix::column(&[C64::new(s, 0.0), C64::new(-s, 0.0)]);
    o.check(Check::identity("|+⟩ vs |−⟩", td_pure(&plus, &minus)?, 1.0, INEQUALITY_TOL));
    o.check(Check::identity("|+⟩⟨+| vs |−⟩⟨−|", trace_distance(&plus.outer_self(), &minus.outer_self())?, 1.0, INEQUALITY_TOL));
    o.check(Check::identity("|0⟩ vs |+⟩", td_pure(&CMatrix::ket(2, 0), &plus)?, s, INEQUALITY_TOL));
    Ok(o)
}

fn tensor_power(rho: &CMatrix, t: u32) -> CMatrix {
    (1..t).fold(rho.clone(), |acc, _| acc.kron(rho))
}

pub fn t03(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.trials(50)?;
    let max_t = ctx.usize("max_t", 4)? as u32;
    let rows = trials(ctx, n, |rng| {
        let (r0, r1) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let (a, b) = (random_density(rng, 2, r0), random_density(rng, 2, r1));
        let d = trace_distance(&a, &b)?.min(1.0);
        (1..=max_t)
            .map(|t| Ok((Bound::CopiesLb { t, d }.eval()?, trace_distance(&tensor_power(&a, t), &tensor_power(&b, t))?)))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_at_most("copies bound ≤ t-copy distance", rows.into_iter().flatten(), INEQUALITY_TOL));
    o.check(Check::identity("COPIES_LB(t=2, d=1)", Bound::CopiesLb { t: 2, d: 1.0 }.eval()?, 1.0 - 2.0 / std::f64::consts::E, 1e-12));
    Ok(o)
}

pub fn t04(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.trials(100)?;
    let rows = trials(ctx, n, |rng| {
        let nx = rng.random_range(1..=4);
        let d = rng.random_range(1..=4);
        let mut big = CMatrix::zeros(nx * d, nx * d);
        let mut sum = 0.0;
        for x in 0..nx {
            let diff = &random_hermitian(rng, d) - &random_hermitian(rng, d);
            sum += trace_norm(&diff);
            big += &CMatrix::basis_projector(nx, x).kron(&diff);
        }
        Ok((trace_norm(&big), sum))
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_identity("block additivity", rows, INEQUALITY_TOL));
    Ok(o)
}

/// `Tr_H` of an operator on `H ⊗ Y`.
fn trace_out_first(m: &CMatrix, dh: usize, dy: usize) -> CMatrix {
    CMatrix::from_fn(dy, dy, |a, b| (0..dh).map(|h| m.get(h * dy + a, h * dy + b)).sum())
}

fn diagonal(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.rows(), m.cols(), |a, b| if a == b { m.get(a, a) } else { C64::new(0.0, 0.0) })
}

pub fn t05(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.trials(200)?;
    let max_dim = ctx.usize("max_dim", 6)?;
    let rows = trials(ctx, n, |rng| {
        let din = rng.random_range(1..=max_dim);
        let dy = rng.random_range(2..=max_dim);
        let phi = random_channel(rng, din, dy)?
            .dephased_output()
            .with_shapes(SpaceShape::single("H", din), SpaceShape::classical("Y", dy))?;
        let cgm = cgm_of_channel(&phi)?;
        // (Tr ⊗ Δ) ∘ CGM(Φ) = Δ ∘ Φ on an arbitrary operator
        let x = &random_hermitian(rng, din) + &random_hermitian(rng, din).scale(C64::new(0.0, 1.0));
        let lhs = diagonal(&trace_out_first(&cgm.apply(&x)?, din, dy));
        let marginal = lhs.max_abs_diff(&diagonal(&phi.apply(&x)?));
        // disturbance bound on a subnormalized state
        let rank = rng.random_range(1..=din);
        let t: f64 = rng.random_range(0.05..=1.0);
        let rho = random_density(rng, din, rank).scale_real(t);
        let y = rng.random_range(0..dy);
        let after = cgm.apply(&rho)?;
        let target = rho.kron(&CMatrix::basis_projector(dy, y));
        let p = phi.apply(&rho)?.get(y, y).re;
        let tr = rho.trace().re;
        let bound = (tr * tr - p * p).max(0.0).sqrt();
        Ok((marginal, (trace_distance(&after, &target)?, bound), cgm.diagnostics().tp_deviation))
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_identity("(Tr ⊗ Δ) ∘ CGM = Δ ∘ Φ", rows.iter().map(|r| (r.0, 0.0)), IDENTITY_TOL));
    o.check(Check::worst_at_most("disturbance bound", rows.iter().map(|r| r.1), INEQUALITY_TOL));
    o.check(Check::worst_identity("CGM is an isometry", rows.iter().map(|r| (r.2, 0.0)), INEQUALITY_TOL));

    let deph = KrausChannel::new(
        vec![CMatrix::basis_projector(2, 0), CMatrix::basis_projector(2, 1)],
        SpaceShape::single("H", 2),
        SpaceShape::classical("Y", 2),
    )?;
    let cgm = cgm_of_channel(&deph)?;
    let plus = CMatrix::from_fn(2, 2, |_, _| C64::new(0.5, 0.0));
    let lhs = trace_distance(&cgm.apply(&plus)?, &plus.kron(&CMatrix::basis_projector(2, 0)))?;
    let p = deph.apply(&plus)?.get(0, 0).re;
    let rhs = (1.0 - p * p).sqrt();
    let target = 3f64.sqrt() / 2.0;
    o.check(Check::identity("|+⟩ dephasing: distance = √3/2", lhs, target, INEQUALITY_TOL));
    o.check(Check::identity("|+⟩ dephasing: bound = √3/2", rhs, target, INEQUALITY_TOL));
    Ok(o)
}

pub fn t06(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.trials(200)?;
    let rows = trials(ctx, n, |rng| {
        let d = rng.random_range(1..=4);
        let a = random_density(rng, d, d);
        let rank = rng.random_range(1..=d);
        let b = random_density(rng, d, rank);
        let (t0, t1): (f64, f64) = (rng.random(), rng.random());
        let dist = trace_distance(&a, &b)?.min(1.0);
        Ok((Bound::ScaledTdLb { t0, t1, d: dist }.eval()?, trace_distance(&a.scale_real(t0), &b.scale_real(t1))?))
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_at_most("max(t0,t1)/2 · d ≤ ½‖t0ρ0 − t1ρ1‖₁", rows, INEQUALITY_TOL));
    o.check(Check::identity("SCALED_TD_LB(1, 0, 1)", Bound::ScaledTdLb { t0: 1.0, t1: 0.0, d: 1.0 }.eval()?, 0.5, 0.0));
    Ok(o)
}

pub fn t12(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.trials(1000)?;
    let rows = trials(ctx, n, |rng| {
        let q = rng.random_range(2..=4);
        let d = rng.random_range(1..=4);
        let common = random_density(rng, d, d);
        let lambda: f64 = rng.random_range(0.0..0.4);
        let family: Vec<CMatrix> = (0..q)
            .map(|_| {
                let t: f64 = rng.random_range(0.5..=1.0);
                (&common.scale_real(1.0 - lambda) + &random_density(rng, d, 1).scale_real(lambda)).scale_real(t)
            })
            .collect();
        let mut delta: f64 = 0.0;
        for i in 0..q {
            for j in i + 1..q {
                delta = delta.max(trace_distance(&family[i], &family[j])?);
            }
        }
        let mu = random_distribution(rng, q);
        let phi = random_channel(rng, d, q)?;
        let lhs: f64 = (0..q).map(|m| Ok(mu[m] * phi.apply(&family[m])?.get(m, m).re)).sum::<Result<f64>>()?;
        let pmax = mu.iter().copied().fold(0.0, f64::max);
        Ok((lhs, pmax * (1.0 - 2.0 * delta) + 2.0 * delta))
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_at_most("set discrimination bound", rows, PROB_TOL));
    Ok(o)
}

/// Random finite distribution on `n` atoms with values in `[0, hi]`.
fn random_variable<R: Rng + ?Sized>(rng: &mut R, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(1..=6);
    let p = random_distribution(rng, n);
    let x = (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..=hi) }).collect();
    (p, x)
}

pub fn t21(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.trials(1000)?;
    let rows = trials(ctx, n, |rng| {
        let (p, x) = random_variable(rng, 5.0);
        let e: f64 = p.iter().zip(&x).map(|(a, b)| a * b).sum();
        let alpha: f64 = rng.random_range(0.01..=5.0);
        let tail: f64 = p.iter().zip(&x).filter(|(_, &v)| v >= alpha).map(|(a, _)| a).sum();
        let markov = (tail, Bound::MarkovUb { expect: e, alpha }.eval()?);
        let markov_low = (1.0 - Bound::MarkovUb { expect: e, alpha }.eval()?, 1.0 - tail);

        let beta: f64 = rng.random_range(0.5..=5.0);
        let (p, x) = random_variable(rng, beta);
        let e: f64 = p.iter().zip(&x).map(|(a, b)| a * b).sum();
        let alpha = rng.random_range(0.0..beta).max(1e-6);
        let above: f64 = p.iter().zip(&x).filter(|(_, &v)| v > alpha).map(|(a, _)| a).sum();
        let conc = (Bound::ConcLb { expect: e, alpha, beta }.eval()?, above);

        let (p, f) = random_variable(rng, 3.0);
        let mut inside: Vec<bool> = (0..p.len()).map(|_| rng.random_bool(0.6)).collect();
        let pick = rng.random_range(0..p.len());
        inside[pick] = true;
        let pb: f64 = p.iter().zip(&inside).filter(|(_, &b)| b).map(|(a, _)| a).sum();
        let ea: f64 = p.iter().zip(&f).map(|(a, b)| a * b).sum();
        let eb: f64 = p.iter().zip(&f).zip(&inside).filter(|(_, &b)| b).map(|((a, v), _)| a * v / pb).sum();
        let fmax = f.iter().copied().fold(0.0, f64::max);
        let cond = ((ea - eb).abs(), fmax * (1.0 - pb));
        Ok((markov, markov_low, conc, cond))
    })?;
    let mut o = Outcome::default();
    o.check(Check::worst_at_most("Markov: Pr[X ≥ α] ≤ E X / α", rows.iter().map(|r| r.0), PROB_TOL));
    o.check(Check::worst_at_most("Markov: Pr[X < α] ≥ 1 − E X / α", rows.iter().map(|r| r.1), PROB_TOL));
    o.check(Check::worst_at_most("concentration: Pr[X > α] ≥ (E X − α)/(β − α)", rows.iter().map(|r| r.2), PROB_TOL));
    o.check(Check::worst_at_most("conditioning: |E_A f − E_B f| ≤ max f · Pr[A ∉ B]", rows.iter().map(|r| r.3), PROB_TOL));
    Ok(o)
}
