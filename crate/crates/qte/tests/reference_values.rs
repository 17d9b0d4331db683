//! Closed-form values the library must reproduce exactly.

use qte::attacks::{builtin_attack, AttackKind};
use qte::constructions::{conj_parity_pad, double_of, id_accept, otp_accept, parallel_compose, s_oplus, triv_reject};
use qte::qmath::random::{random_density, rng_from_seed};
use qte::qmath::{trace_distance, trace_norm, CMatrix, C64};
use qte::schemes::{correctness_gap, dbar_apply, encryption_gap, tamper_profile, DEFAULT_DIM_CAP};

const CAP: usize = DEFAULT_DIM_CAP;

#[test]
fn scaled_projector_difference() {
    let a = CMatrix::basis_projector(2, 0);
    let b = a.scale_real(0.5);
    assert_eq!(trace_norm(&(&a - &b)), 0.5);
    assert!((trace_distance(&a, &b).unwrap() - 0.25).abs() < 1e-15);
}

#[test]
fn plus_minus_are_orthogonal() {
    let h = C64::new(0.5, 0.0);
    let plus = CMatrix::from_fn(2, 2, |_, _| h);
    let minus = CMatrix::from_fn(2, 2, |r, c| if r == c { h } else { -h });
    assert!((trace_distance(&plus, &minus).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn reject_scheme_is_one_correct_and_silent() {
    for q in [2, 3] {
        let s = triv_reject(q).unwrap();
        assert_eq!(correctness_gap(&s, CAP).unwrap().eps, 1.0);
        let mut rng = rng_from_seed(q as u64);
        let rho = random_density(&mut rng, s.cipher_shape().total_dim(), 2);
        assert_eq!(dbar_apply(&s, 0, &rho, CAP).unwrap().max_abs(), 0.0);
        for kind in [AttackKind::Identity, AttackKind::Bitflip, AttackKind::RandomIsometry { seed: 4, adim: 3 }] {
            let a = builtin_attack(&kind, s.cipher_shape()).unwrap();
            let p = tamper_profile(&s, &a, 0, 1, CAP).unwrap();
            assert!(p.distances.iter().all(|&d| d == 0.0));
        }
    }
}

#[test]
fn parallel_composition_of_pads() {
    let s = parallel_compose(&otp_accept(2).unwrap(), &conj_parity_pad(2).unwrap()).unwrap();
    assert!(correctness_gap(&s, CAP).unwrap().eps < 1e-12);
}

#[test]
fn baseline_gaps() {
    let otp = otp_accept(2).unwrap();
    assert!(correctness_gap(&otp, CAP).unwrap().eps.abs() < 1e-10);
    assert!(encryption_gap(&otp, CAP).unwrap().alpha.abs() < 1e-10);
    assert!((encryption_gap(&id_accept(2).unwrap(), CAP).unwrap().alpha - 1.0).abs() < 1e-10);
}

#[test]
fn bitflip_is_undetected_on_s_oplus() {
    let s = s_oplus(&conj_parity_pad(2).unwrap()).unwrap();
    let a = builtin_attack(&AttackKind::Bitflip, s.cipher_shape()).unwrap();
    for k in 0..s.keys().len() {
        for b in 0..2 {
            let mut x = s.encrypt(k, b, CAP).unwrap();
            a.apply(&mut x).unwrap();
            s.dbar_at(k, &mut x, 0).unwrap();
            let out = x.to_dense(CAP).unwrap();
            assert!((out.get(1 - b, 1 - b).re - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn double_of_perfect_scheme_is_perfect() {
    let d = double_of(&conj_parity_pad(2).unwrap()).unwrap();
    assert!(correctness_gap(&d, CAP).unwrap().eps < 1e-12);
}
