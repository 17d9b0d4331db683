//! Cross-checks of library results against independently computed values.

use qte::attacks::{builtin_attack, AttackKind};
use qte::channels::{Circuit, KrausChannel};
use qte::constructions::{
    conj_parity_pad, nfold, otp_accept, qm_of, random_aqecm, rev_of, s_oplus, star_of, te_of, triv_reject,
};
use qte::qmath::random::{random_density, random_hermitian, random_kraus_ops, rng_from_seed};
use qte::qmath::{
    bound_eval, permute_factors, spectral_decompose, td_pure, tensor_all, trace_distance, trace_norm, Bound, CMatrix,
    Permutation, SpaceShape, C64,
};
use qte::schemes::{
    correctness_gap, correctness_gap_qecmr, dbar_apply, qm_forgery_value, AqecmScheme, GroupTable, DEFAULT_DIM_CAP,
};

const CAP: usize = DEFAULT_DIM_CAP;

fn shaped(m: CMatrix, label: &str) -> CMatrix {
    let s = SpaceShape::single(label, m.rows());
    m.with_shapes(s.clone(), s).unwrap()
}

#[test]
fn kron_matches_four_index_loop() {
    let mut rng = rng_from_seed(11);
    let a = random_hermitian(&mut rng, 2);
    let b = random_hermitian(&mut rng, 2);
    let k = a.kron(&b);
    for i in 0..2 {
        for j in 0..2 {
            for r in 0..2 {
                for c in 0..2 {
                    let want = a.get(i, j) * b.get(r, c);
                    assert!((k.get(2 * i + r, 2 * j + c) - want).norm() < 1e-15);
                }
            }
        }
    }
}

#[test]
fn permutation_rebuilds_reordered_product() {
    let mut rng = rng_from_seed(12);
    let rho = shaped(random_density(&mut rng, 2, 2), "r");
    let sigma = shaped(random_density(&mut rng, 3, 3), "s");
    let tau = shaped(random_density(&mut rng, 2, 1), "t");
    let joint = tensor_all(&[rho.clone(), sigma.clone(), tau.clone()]);
    // ρ to the end, σ to the front, τ to the middle
    let moved = permute_factors(&joint, &Permutation::from_images(vec![2, 0, 1]).unwrap()).unwrap();
    let want = sigma.kron(&tau).kron(&rho);
    assert!(moved.max_abs_diff(&want) < 1e-15);
}

#[test]
fn spectral_reconstruction_and_trace_norm() {
    let mut rng = rng_from_seed(13);
    let h = random_hermitian(&mut rng, 6);
    let sd = spectral_decompose(&h).unwrap();
    assert!(sd.reconstruct().max_abs_diff(&h) < 1e-9);
    let from_spectrum: f64 = sd.eigenvalues().iter().map(|l| l.abs()).sum();
    assert!((trace_norm(&h) - from_spectrum).abs() < 1e-10);
}

#[test]
fn pure_state_overlap_formula() {
    let psi = CMatrix::ket(2, 0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi = CMatrix::column(&[C64::new(s, 0.0), C64::new(s, 0.0)]);
    let td = td_pure(&psi, &phi).unwrap();
    assert!((td - s).abs() < 1e-12);
    assert!((trace_distance(&psi.outer_self(), &phi.outer_self()).unwrap() - td).abs() < 1e-12);
}

#[test]
fn copies_bound_for_orthogonal_pair() {
    let v = bound_eval(Bound::CopiesLb { t: 2, d: 1.0 }).unwrap();
    assert!((v - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-12);
}

#[test]
fn channel_dual_matches_inner_products() {
    let mut rng = rng_from_seed(14);
    let ops = random_kraus_ops(&mut rng, 3, 2, 3);
    let ch = KrausChannel::new(ops, SpaceShape::single("H", 3), SpaceShape::single("K", 2)).unwrap();
    let c = Circuit::from_kraus(&ch);
    for _ in 0..20 {
        let rho = random_density(&mut rng, 3, 3);
        let obs = random_hermitian(&mut rng, 2);
        let lhs = obs.matmul(&c.apply_dense(&rho).unwrap()).unwrap().trace();
        let rhs = c.dual_dense(&obs).unwrap().matmul(&rho).unwrap().trace();
        assert!((lhs - rhs).norm() < 1e-10);
    }
}

#[test]
fn accept_and_reject_branches_sum_to_trace() {
    let mut rng = rng_from_seed(15);
    let s = random_aqecm(&mut rng, 3, 2, 3).unwrap();
    let q = s.num_messages();
    for k in 0..3 {
        let rho = random_density(&mut rng, 3, 2);
        let accepted = dbar_apply(&s, k, &rho, CAP).unwrap().trace().re;
        let out = s.dec().get(k).unwrap().apply_dense(&rho).unwrap();
        let rejected: f64 = (0..q).map(|m| out.get(2 * m, 2 * m).re).sum();
        assert!((accepted + rejected - 1.0).abs() < 1e-10);
    }
}

#[test]
fn nfold_correctness_is_at_most_additive() {
    let mut rng = rng_from_seed(16);
    let s = random_aqecm(&mut rng, 2, 2, 2).unwrap();
    let eps = correctness_gap(&s, CAP).unwrap().eps;
    let e3 = correctness_gap(&nfold(&s, 3, CAP).unwrap(), CAP).unwrap().eps;
    assert!(e3 <= 3.0 * eps + 1e-9, "{e3} vs {eps}");
}

#[test]
fn permuted_cyclic_group_is_associative() {
    let g = GroupTable::cyclic_on(&[3, 1, 4, 0, 2]).unwrap();
    for a in 0..5 {
        for b in 0..5 {
            for c in 0..5 {
                assert_eq!(g.op(g.op(a, b), c), g.op(a, g.op(b, c)));
            }
        }
    }
}

#[test]
fn honest_revocation_matches_flag_probability() {
    let mut rng = rng_from_seed(17);
    let s = random_aqecm(&mut rng, 2, 2, 2).unwrap();
    let r = rev_of(&s).unwrap();
    for k in 0..2 {
        for m in 0..2 {
            let mut x = r.base().encrypt(k, m, CAP).unwrap();
            r.rev().apply(&mut x).unwrap();
            r.vbar_at(k, &mut x, 0).unwrap();
            let rho = s.enc().get(k).unwrap().apply_dense(&CMatrix::basis_projector(2, m)).unwrap();
            let want = dbar_apply(&s, k, &rho, CAP).unwrap().trace().re;
            assert!((x.trace().re - want).abs() < 1e-10);
        }
    }
}

#[test]
fn te_of_revocable_pad_is_perfectly_correct() {
    let r = rev_of(&conj_parity_pad(2).unwrap()).unwrap();
    assert!(correctness_gap_qecmr(&r, CAP).unwrap().eps < 1e-12);
    let te = te_of(&r, CAP).unwrap();
    assert!(correctness_gap(&te, CAP).unwrap().eps < 1e-9);
}

#[test]
fn star_with_reject_is_at_least_as_correct() {
    let mut rng = rng_from_seed(18);
    for s in [conj_parity_pad(2).unwrap(), random_aqecm(&mut rng, 2, 2, 2).unwrap()] {
        let star = star_of(&s, &triv_reject(2).unwrap(), &GroupTable::cyclic(2)).unwrap();
        let a = correctness_gap(&s, CAP).unwrap().eps;
        let b = correctness_gap(&star, CAP).unwrap().eps;
        // the uniform pad averages the per-message success of `s`
        assert!(b <= a + 1e-10, "{a} vs {b}");
    }
}

#[test]
fn star_honest_decode_over_all_pads() {
    let s = star_of(&otp_accept(2).unwrap(), &otp_accept(2).unwrap(), &GroupTable::cyclic(2)).unwrap();
    for k in 0..s.keys().len() {
        for m in 0..2 {
            let out = s.dec().get(k).unwrap().apply_dense(&s.enc().get(k).unwrap().apply_dense(&CMatrix::basis_projector(2, m)).unwrap()).unwrap();
            assert!((out.get(2 * m + 1, 2 * m + 1).re - 1.0).abs() < 1e-12);
        }
    }
}

/// Accept probability of `(k, m)` on the computational basis state `x`.
fn basis_accept(s: &AqecmScheme, k: usize, m: usize, x: usize) -> f64 {
    let d = s.cipher_shape().total_dim();
    let out = s.dec().get(k).unwrap().apply_dense(&CMatrix::basis_projector(d, x)).unwrap();
    out.get(2 * m + 1, 2 * m + 1).re
}

#[test]
fn duplicate_by_measurement_matches_enumeration() {
    for n in [2, 3] {
        let s = conj_parity_pad(n).unwrap();
        let q = s.num_messages();
        let d = s.cipher_shape().total_dim();
        let qm = qm_of(&s, 0.0, false, CAP).unwrap();
        let attack = builtin_attack(&AttackKind::FullMeasure { wires: None }, qm.note_shape()).unwrap();
        let value = qm_forgery_value(&qm, &attack).unwrap();
        let mut oracle = 0.0;
        for k in 0..s.keys().len() {
            for m in 0..q {
                let rho = s.enc().get(k).unwrap().apply_dense(&CMatrix::basis_projector(q, m)).unwrap();
                let w = s.keys().prob(k) / q as f64;
                oracle += w * (0..d).map(|x| rho.get(x, x).re * basis_accept(&s, k, m, x).powi(2)).sum::<f64>();
            }
        }
        assert!((value - oracle).abs() < 1e-9, "n={n}: {value} vs {oracle}");
        assert!(value < 1.0);
    }
}

#[test]
fn s_oplus_hides_less_as_pad_grows() {
    let mut prev = f64::INFINITY;
    for n in 2..=4 {
        let a = qte::schemes::encryption_gap(&s_oplus(&conj_parity_pad(n).unwrap()).unwrap(), CAP).unwrap().alpha;
        assert!(a <= prev + 1e-12);
        prev = a;
    }
}
