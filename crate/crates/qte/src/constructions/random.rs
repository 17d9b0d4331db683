//! Seeded random schemes for property checks.

use rand::Rng;

use crate::channels::{Circuit, KrausChannel};
use crate::error::Result;
use crate::qmath::random::{random_distribution, random_kraus_ops};
use crate::qmath::SpaceShape;
use crate::schemes::{flag_shape, AqecmScheme, KeyDist, KeyedFamily, QecmScheme, QecmrScheme};

use super::baselines::msg_shape;

fn random_circuit<R: Rng + ?Sized>(rng: &mut R, input: &SpaceShape, output: &SpaceShape) -> Result<Circuit> {
    let ks = random_kraus_ops(rng, input.total_dim(), output.total_dim(), 2);
    Ok(Circuit::from_kraus(&KrausChannel::new(ks, input.clone(), output.clone())?))
}

fn random_family<R: Rng + ?Sized>(rng: &mut R, n: usize, input: &SpaceShape, output: &SpaceShape) -> Result<KeyedFamily> {
    KeyedFamily::from_circuits((0..n).map(|_| random_circuit(rng, input, output)).collect::<Result<_>>()?)
}

/// Random keys, encryption `M → C` and decryption `C → M ⊗ F`.
pub fn random_aqecm<R: Rng + ?Sized>(rng: &mut R, nkeys: usize, q: usize, dc: usize) -> Result<AqecmScheme> {
    let m = msg_shape(q);
    let c = SpaceShape::single("C", dc);
    let keys = KeyDist::new(random_distribution(rng, nkeys))?;
    let enc = random_family(rng, nkeys, &m, &c)?;
    let dec = random_family(rng, nkeys, &c, &m.concat(&flag_shape()))?;
    AqecmScheme::new(format!("random_aqecm(k={nkeys}, q={q}, c={dc})"), keys, m, c, enc, dec)
}

/// Random QECMR with token space of dimension `dr`.
pub fn random_qecmr<R: Rng + ?Sized>(rng: &mut R, nkeys: usize, q: usize, dc: usize, dr: usize) -> Result<QecmrScheme> {
    let m = msg_shape(q);
    let c = SpaceShape::single("C", dc);
    let r = SpaceShape::single("R", dr);
    let keys = KeyDist::new(random_distribution(rng, nkeys))?;
    let enc = random_family(rng, nkeys, &m, &c)?;
    let dec = random_family(rng, nkeys, &c, &m)?;
    let base = QecmScheme::new(format!("random_qecmr(k={nkeys}, q={q}, c={dc}, r={dr})"), keys, m, c.clone(), enc, dec)?;
    let rev = random_circuit(rng, &c, &r)?;
    let ver = random_family(rng, nkeys, &r, &flag_shape())?;
    QecmrScheme::new(base, rev, ver)
}
