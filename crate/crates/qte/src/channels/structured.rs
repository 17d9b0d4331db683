use super::kraus::KrausChannel;
use super::povm::Povm;
use crate::error::{mismatch, Error, Result};
use crate::qmath::spectral::eigh_unchecked;
use crate::qmath::tensor::permutation_index_map;
use crate::qmath::{CMatrix, Permutation, SpaceShape, C64, ZERO};

/// Named channel families.
#[derive(Clone, Debug)]
pub enum StructuredKind {
    /// Complete dephasing in the computational basis of `shape`.
    Dephase { shape: SpaceShape },
    /// Measurement into a classical outcome register.
    Measure { povm: Povm, in_shape: SpaceShape },
    /// Factor permutation: factor `i` of `shape` moves to `perm.image(i)`.
    Swap { shape: SpaceShape, perm: Permutation },
    Unitary { u: CMatrix, shape: SpaceShape },
    /// Stochastic map on basis labels; `table[x][y] = Pr(y | x)`.
    Classical { in_shape: SpaceShape, out_shape: SpaceShape, table: Vec<Vec<f64>> },
    /// Prepares `state` from the trivial space.
    Prep { state: CMatrix, shape: SpaceShape },
    /// Traces out `shape`.
    Discard { shape: SpaceShape },
}

pub fn structured_channel(kind: StructuredKind) -> Result<KrausChannel> {
    match kind {
        StructuredKind::Dephase { shape } => {
            let d = shape.total_dim();
            let kraus = (0..d).map(|i| CMatrix::basis_projector(d, i)).collect();
            let out = shape.clone().into_classical();
            KrausChannel::validated(kraus, shape, out)
        }
        StructuredKind::Measure { povm, in_shape } => {
            let c = povm.to_channel(in_shape)?;
            KrausChannel::validated(c.kraus_ops().to_vec(), c.in_shape().clone(), c.out_shape().clone())
        }
        StructuredKind::Swap { shape, perm } => {
            if perm.len() != shape.len() {
                return Err(mismatch(format!("permutation of {} on {} factors", perm.len(), shape.len())));
            }
            let map = permutation_index_map(&shape.dims(), &perm);
            let d = shape.total_dim();
            let mut u = CMatrix::zeros(d, d);
            for (x, &y) in map.iter().enumerate() {
                u.set(y, x, C64::new(1.0, 0.0));
            }
            let out = SpaceShape::new(perm.apply(shape.factors()))?;
            KrausChannel::validated(vec![u], shape, out)
        }
        StructuredKind::Unitary { u, shape } => {
            let d = shape.total_dim();
            if u.rows() != d || u.cols() != d {
                return Err(mismatch("unitary does not match its shape"));
            }
            let dev = u.adjoint().matmul(&u)?.max_abs_diff(&CMatrix::identity(d));
            if dev > 1e-9 {
                return Err(Error::Precondition(format!("matrix is not unitary (deviation {dev:.3e})")));
            }
            KrausChannel::validated(vec![u], shape.clone(), shape)
        }
        StructuredKind::Classical { in_shape, out_shape, table } => {
            let (din, dout) = (in_shape.total_dim(), out_shape.total_dim());
            if table.len() != din || table.iter().any(|row| row.len() != dout) {
                return Err(mismatch(format!("stochastic table must be {din}x{dout}")));
            }
            let mut kraus = Vec::new();
            for (x, row) in table.iter().enumerate() {
                let s: f64 = row.iter().sum();
                if row.iter().any(|&p| p < 0.0) || (s - 1.0).abs() > 1e-12 {
                    return Err(Error::Precondition(format!("row {x} of the stochastic table is not a distribution")));
                }
                for (y, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        let w = C64::new(p.sqrt(), 0.0);
                        kraus.push(CMatrix::from_fn(dout, din, |r, c| if r == y && c == x { w } else { ZERO }));
                    }
                }
            }
            KrausChannel::validated(kraus, in_shape, out_shape)
        }
        StructuredKind::Prep { state, shape } => {
            let d = shape.total_dim();
            if state.rows() != d || state.cols() != d {
                return Err(mismatch("prepared state does not match its shape"));
            }
            let sd = eigh_unchecked(&state.hermitian_part());
            if sd.eigenvalues()[0] < -1e-10 || (state.trace().re - 1.0).abs() > 1e-9 {
                return Err(Error::Precondition("prepared state must be a density operator".into()));
            }
            let mut kraus = Vec::new();
            for (j, &l) in sd.eigenvalues().iter().enumerate() {
                if l > 0.0 {
                    kraus.push(sd.eigenvector(j).scale_real(l.sqrt()));
                }
            }
            KrausChannel::validated(kraus, SpaceShape::trivial(), shape)
        }
        StructuredKind::Discard { shape } => {
            let d = shape.total_dim();
            let kraus = (0..d).map(|i| CMatrix::ket(d, i).adjoint()).collect();
            KrausChannel::validated(kraus, shape, SpaceShape::trivial())
        }
    }
}

/// Deterministic classical map as a stochastic table.
pub fn classical_function(
    in_shape: SpaceShape,
    out_shape: SpaceShape,
    f: impl Fn(usize) -> usize,
) -> Result<KrausChannel> {
    let dout = out_shape.total_dim();
    let table = (0..in_shape.total_dim())
        .map(|x| {
            let mut row = vec![0.0; dout];
            let y = f(x);
            if y < dout {
                row[y] = 1.0;
            }
            row
        })
        .collect();
    structured_channel(StructuredKind::Classical { in_shape, out_shape, table })
}

/// `(f1, f2) ↦ f1 ∧ f2` on two classical bits.
pub fn and_flag() -> KrausChannel {
    let shape = SpaceShape::new(vec![
        crate::qmath::Factor::classical("F1", 2),
        crate::qmath::Factor::classical("F2", 2),
    ])
    .expect("labels");
    classical_function(shape, SpaceShape::classical("F", 2), |x| usize::from(x == 3)).expect("valid")
}

/// `(f1, f2) ↦ f1 ∨ f2` on two classical bits.
pub fn or_flag() -> KrausChannel {
    let shape = SpaceShape::new(vec![
        crate::qmath::Factor::classical("F1", 2),
        crate::qmath::Factor::classical("F2", 2),
    ])
    .expect("labels");
    classical_function(shape, SpaceShape::classical("F", 2), |x| usize::from(x != 0)).expect("valid")
}
