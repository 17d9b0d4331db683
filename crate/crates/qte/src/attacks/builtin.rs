//! Named tamper attacks `C → C ⊗ A`.

use serde::{Deserialize, Serialize};

use crate::channels::Circuit;
use crate::error::{mismatch, Error, Result};
use crate::qmath::random::{random_isometry, rng_from_seed};
use crate::qmath::{CMatrix, Factor, Permutation, SpaceShape, C64, ONE, ZERO};

/// Attack gallery entries. Shapes are fixed by the ciphertext they act on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackKind {
    /// Leaves the ciphertext alone; `A` is trivial.
    Identity,
    /// Cyclic shift `|x⟩ ↦ |x + 1⟩` on the last ciphertext factor.
    Bitflip,
    /// Splits `(sel, C, C)` into `(|0⟩, c₀, I/d) ⊗ (|1⟩, I/d, c₁)`.
    DoubleSplit,
    /// Splits `(C₁, C₂)` into `(c₁, I/d₂) ⊗ (I/d₁, c₂)`; `first` is the
    /// number of factors of `C₁`.
    ShareSplit { first: usize },
    /// Measures the listed factors (all when `None`) and keeps copies of
    /// the outcomes in `A`.
    FullMeasure { wires: Option<Vec<usize>> },
    /// Seeded random isometry `C → C ⊗ ℂ^adim`.
    RandomIsometry { seed: u64, adim: usize },
}

impl AttackKind {
    pub fn name(&self) -> String {
        match self {
            AttackKind::Identity => "identity".into(),
            AttackKind::Bitflip => "bitflip".into(),
            AttackKind::DoubleSplit => "double_split".into(),
            AttackKind::ShareSplit { first } => format!("share_split(first={first})"),
            AttackKind::FullMeasure { wires: None } => "full_measure".into(),
            AttackKind::FullMeasure { wires: Some(w) } => format!("full_measure(wires={w:?})"),
            AttackKind::RandomIsometry { seed, adim } => format!("random_isometry(seed={seed}, adim={adim})"),
        }
    }
}

/// Maximally mixed state on each listed factor, prepared starting at `at`.
fn prep_junk(mut b: crate::channels::CircuitBuilder, at: usize, dims: &[usize]) -> Result<crate::channels::CircuitBuilder> {
    for (i, &d) in dims.iter().enumerate() {
        b = b.prep(at + i, CMatrix::maximally_mixed(d), &[d])?;
    }
    Ok(b)
}

pub fn builtin_attack(kind: &AttackKind, cipher: &SpaceShape) -> Result<Circuit> {
    let dims = cipher.dims();
    let n = dims.len();
    if n == 0 {
        return Err(mismatch("attack on an empty ciphertext"));
    }
    match kind {
        AttackKind::Identity => Ok(Circuit::identity(cipher.clone())),
        AttackKind::Bitflip => {
            let d = dims[n - 1];
            let shift = CMatrix::from_fn(d, d, |r, c| if r == (c + 1) % d { ONE } else { ZERO });
            Circuit::builder(cipher.clone()).unitary(&[n - 1], shift)?.finish(cipher.clone())
        }
        AttackKind::DoubleSplit => {
            if n < 3 || n.is_multiple_of(2) || dims[0] != 2 {
                return Err(mismatch(format!("double_split needs (sel, C, C), got {dims:?}")));
            }
            let lc = (n - 1) / 2;
            if dims[1..=lc] != dims[lc + 1..] {
                return Err(mismatch("double_split halves differ"));
            }
            let cdims = dims[1..=lc].to_vec();
            let mut b = Circuit::builder(cipher.clone()).discard(0)?;
            b = b.prep(0, CMatrix::basis_projector(2, 0), &[2])?;
            b = prep_junk(b, 1 + lc, &cdims)?;
            b = b.prep(1 + 2 * lc, CMatrix::basis_projector(2, 1), &[2])?;
            b = prep_junk(b, 2 + 2 * lc, &cdims)?;
            b.finish(cipher.concat(cipher))
        }
        AttackKind::ShareSplit { first } => {
            let l1 = *first;
            if l1 == 0 || l1 >= n {
                return Err(mismatch(format!("share_split first share of {l1} factors in {n}")));
            }
            let (d1, d2) = (dims[..l1].to_vec(), dims[l1..].to_vec());
            let b = prep_junk(Circuit::builder(cipher.clone()), l1, &d2)?;
            let b = prep_junk(b, l1 + d2.len(), &d1)?;
            b.finish(cipher.concat(cipher))
        }
        AttackKind::FullMeasure { wires } => {
            let wires: Vec<usize> = wires.clone().unwrap_or_else(|| (0..n).collect());
            full_measure(cipher, &wires)
        }
        AttackKind::RandomIsometry { seed, adim } => {
            if *adim == 0 {
                return Err(Error::Precondition("random isometry needs adim >= 1".into()));
            }
            let dc = cipher.total_dim();
            let v = random_isometry(&mut rng_from_seed(*seed), dc * adim, dc);
            let mut out_dims = dims.clone();
            out_dims.push(*adim);
            let all: Vec<usize> = (0..n).collect();
            let mut out = cipher.clone();
            out.push(Factor::quantum("A", *adim));
            Circuit::builder(cipher.clone()).map(&all, vec![v], &out_dims)?.finish(out)
        }
    }
}

fn full_measure(cipher: &SpaceShape, wires: &[usize]) -> Result<Circuit> {
    let dims = cipher.dims();
    let n = dims.len();
    let mut sorted = wires.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != wires.len() || sorted.iter().any(|&w| w >= n) {
        return Err(Error::IndexOutOfRange(format!("measured wires {wires:?} of {n}")));
    }
    // tags: Ok(i) for cipher factor i, Err(j) for the j-th outcome copy
    let mut layout: Vec<std::result::Result<usize, usize>> = (0..n).map(Ok).collect();
    let mut b = Circuit::builder(cipher.clone());
    for (j, &w) in sorted.iter().enumerate() {
        let pos = layout.iter().position(|t| *t == Ok(w)).expect("present");
        let d = dims[w];
        let kraus = (0..d)
            .map(|x| CMatrix::from_fn(d * d, d, |r, c| if c == x && r == x * d + x { C64::new(1.0, 0.0) } else { ZERO }))
            .collect();
        b = b.map(&[pos], kraus, &[d, d])?;
        layout.insert(pos + 1, Err(j));
    }
    let image: Vec<usize> = layout
        .iter()
        .map(|t| match *t {
            Ok(i) => i,
            Err(j) => n + j,
        })
        .collect();
    b = b.permute(Permutation::from_images(image)?)?;
    let mut out = cipher.clone();
    for &w in &sorted {
        out.push(Factor::classical(format!("A{w}"), dims[w]));
    }
    b.finish(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::FactoredOp;

    fn two_qubits() -> SpaceShape {
        SpaceShape::qubits("q", 2)
    }

    #[test]
    fn bitflip_shifts_last_factor() {
        let a = builtin_attack(&AttackKind::Bitflip, &two_qubits()).unwrap();
        let mut x = FactoredOp::basis_state(&[2, 2], 0b10);
        a.apply(&mut x).unwrap();
        assert_eq!(x.to_dense(4).unwrap().get(3, 3).re, 1.0);
    }

    #[test]
    fn full_measure_copies_outcomes() {
        let a = builtin_attack(&AttackKind::FullMeasure { wires: None }, &two_qubits()).unwrap();
        assert_eq!(a.out_shape().dims(), vec![2, 2, 2, 2]);
        let mut x = FactoredOp::basis_state(&[2, 2], 0b01);
        a.apply(&mut x).unwrap();
        // (c0, c1, a0, a1) = (0, 1, 0, 1)
        assert_eq!(x.to_dense(16).unwrap().get(0b0101, 0b0101).re, 1.0);
        let kc = a.to_kraus(256).unwrap();
        assert!(kc.diagnostics().valid);
    }

    #[test]
    fn double_split_layout() {
        let c = SpaceShape::new(vec![Factor::quantum("s", 2), Factor::quantum("a", 3), Factor::quantum("b", 3)]).unwrap();
        let a = builtin_attack(&AttackKind::DoubleSplit, &c).unwrap();
        assert_eq!(a.out_shape().dims(), vec![2, 3, 3, 2, 3, 3]);
        // |s, x, y⟩ ↦ |0, x⟩ ⊗ I/3 ⊗ |1⟩ ⊗ I/3 ⊗ |y⟩
        let mut x = FactoredOp::basis_state(&[2, 3, 3], 9 + 2 * 3 + 1);
        a.apply(&mut x).unwrap();
        let d = x.to_dense(324).unwrap();
        let want = CMatrix::basis_projector(2, 0)
            .kron(&CMatrix::basis_projector(3, 2))
            .kron(&CMatrix::maximally_mixed(3))
            .kron(&CMatrix::basis_projector(2, 1))
            .kron(&CMatrix::maximally_mixed(3))
            .kron(&CMatrix::basis_projector(3, 1));
        assert!(d.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn share_split_layout() {
        let c = SpaceShape::new(vec![Factor::quantum("a", 2), Factor::quantum("b", 3)]).unwrap();
        let a = builtin_attack(&AttackKind::ShareSplit { first: 1 }, &c).unwrap();
        assert_eq!(a.out_shape().dims(), vec![2, 3, 2, 3]);
        let mut x = FactoredOp::basis_state(&[2, 3], 3 + 2);
        a.apply(&mut x).unwrap();
        let want = CMatrix::basis_projector(2, 1)
            .kron(&CMatrix::maximally_mixed(3))
            .kron(&CMatrix::maximally_mixed(2))
            .kron(&CMatrix::basis_projector(3, 2));
        assert!(x.to_dense(36).unwrap().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn random_isometry_is_valid_and_seeded() {
        let k = AttackKind::RandomIsometry { seed: 4, adim: 3 };
        let a = builtin_attack(&k, &two_qubits()).unwrap().to_kraus(1024).unwrap();
        assert!(a.diagnostics().valid);
        let b = builtin_attack(&k, &two_qubits()).unwrap().to_kraus(1024).unwrap();
        assert_eq!(a, b);
    }
}
