//! Channels described as a sequence of local operations on positional wires.

use std::sync::Arc;

use super::factored::{basis_digits, FactoredOp, DEFAULT_BLOCK_CAP};
use super::kraus::KrausChannel;
use crate::error::{mismatch, Error, Result};
use crate::qmath::{CMatrix, Permutation, SpaceShape, C64, ZERO};

/// One local step. Positions are relative to the circuit's own wires.
#[derive(Clone, Debug)]
pub enum Op {
    /// Kraus map on `wires` (in that order); outputs replace them at the
    /// smallest listed position.
    Map { wires: Vec<usize>, kraus: Arc<Vec<CMatrix>>, out_dims: Vec<usize> },
    Prep { at: usize, state: Arc<CMatrix>, dims: Vec<usize> },
    Discard { wire: usize },
    Permute { perm: Permutation },
}

/// Channel between shaped spaces given as local operations.
#[derive(Clone, Debug)]
pub struct Circuit {
    in_shape: SpaceShape,
    out_shape: SpaceShape,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn identity(shape: SpaceShape) -> Self {
        Circuit { in_shape: shape.clone(), out_shape: shape, ops: Vec::new() }
    }

    pub fn builder(in_shape: SpaceShape) -> CircuitBuilder {
        let dims = in_shape.dims();
        CircuitBuilder { in_shape, dims, ops: Vec::new() }
    }

    /// A dense Kraus channel as a single step.
    pub fn from_kraus(c: &KrausChannel) -> Self {
        let n_in = c.in_shape().len();
        let out_dims = c.out_shape().dims();
        let ops = if n_in == 0 {
            let state = c.apply(&CMatrix::identity(1)).expect("dim 1 input").strip_shapes();
            if out_dims.is_empty() {
                Vec::new()
            } else {
                vec![Op::Prep { at: 0, state: Arc::new(state), dims: out_dims }]
            }
        } else {
            vec![Op::Map { wires: (0..n_in).collect(), kraus: Arc::new(c.kraus_ops().to_vec()), out_dims }]
        };
        Circuit { in_shape: c.in_shape().clone(), out_shape: c.out_shape().clone(), ops }
    }

    pub fn in_shape(&self) -> &SpaceShape {
        &self.in_shape
    }

    pub fn out_shape(&self) -> &SpaceShape {
        &self.out_shape
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn with_out_shape(mut self, shape: SpaceShape) -> Result<Self> {
        if shape.dims() != self.out_shape.dims() {
            return Err(mismatch("relabeled output must keep factor dimensions"));
        }
        self.out_shape = shape;
        Ok(self)
    }

    pub fn with_in_shape(mut self, shape: SpaceShape) -> Result<Self> {
        if shape.dims() != self.in_shape.dims() {
            return Err(mismatch("relabeled input must keep factor dimensions"));
        }
        self.in_shape = shape;
        Ok(self)
    }

    /// Runs the circuit on the wires `offset..offset + n_in` of `x`.
    pub fn apply_at(&self, x: &mut FactoredOp, offset: usize) -> Result<()> {
        let dims = x.wire_dims();
        let n_in = self.in_shape.len();
        if offset + n_in > dims.len() || dims[offset..offset + n_in] != self.in_shape.dims()[..] {
            return Err(mismatch(format!(
                "circuit input {:?} does not match wires {:?} at offset {offset}",
                self.in_shape.dims(),
                dims
            )));
        }
        for op in &self.ops {
            match op {
                Op::Map { wires, kraus, out_dims } => {
                    let pos: Vec<usize> = wires.iter().map(|w| w + offset).collect();
                    x.apply_kraus(&pos, kraus, out_dims)?;
                }
                Op::Prep { at, state, dims } => x.prep(at + offset, (**state).clone(), dims)?,
                Op::Discard { wire } => x.discard(wire + offset)?,
                Op::Permute { perm } => x.permute(offset, perm)?,
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &mut FactoredOp) -> Result<()> {
        self.apply_at(x, 0)
    }

    /// Dense evaluation `Φ(ρ)`; the result carries the output shape.
    pub fn apply_dense(&self, rho: &CMatrix) -> Result<CMatrix> {
        let mut x = FactoredOp::from_dense(rho, &self.in_shape.dims())?;
        self.apply(&mut x)?;
        x.to_dense(usize::MAX)?.with_shape(self.out_shape.clone())
    }

    /// `g` then `self`.
    pub fn after(&self, g: &Circuit) -> Result<Circuit> {
        if g.out_shape.dims() != self.in_shape.dims() {
            return Err(mismatch(format!(
                "compose: inner output {:?} vs outer input {:?}",
                g.out_shape.dims(),
                self.in_shape.dims()
            )));
        }
        let mut ops = g.ops.clone();
        ops.extend(self.ops.iter().cloned());
        Ok(Circuit { in_shape: g.in_shape.clone(), out_shape: self.out_shape.clone(), ops })
    }

    /// `self ⊗ g`.
    pub fn tensor(&self, g: &Circuit) -> Circuit {
        let mut ops = self.ops.clone();
        let shift = self.out_shape.len();
        ops.extend(g.ops.iter().map(|op| shift_op(op, shift)));
        Circuit {
            in_shape: self.in_shape.concat(&g.in_shape),
            out_shape: self.out_shape.concat(&g.out_shape),
            ops,
        }
    }

    /// Φ(|i⟩⟨j|) for basis indices of the input space.
    pub fn apply_unit(&self, i: usize, j: usize, cap: usize) -> Result<FactoredOp> {
        let mut x = FactoredOp::basis_unit(&self.in_shape.dims(), i, j).with_cap(cap);
        self.apply(&mut x)?;
        Ok(x)
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, bounded by `din·dout ≤ cap`.
    pub fn choi(&self, cap: usize) -> Result<CMatrix> {
        let din = self.in_shape.total_dim();
        let dout = self.out_shape.total_dim();
        if din * dout > cap {
            return Err(Error::DimensionCap { cap, needed: din * dout });
        }
        let mut j = CMatrix::zeros(din * dout, din * dout);
        for a in 0..din {
            for b in 0..din {
                let blk = self.apply_unit(a, b, DEFAULT_BLOCK_CAP.max(dout))?.to_dense(dout)?;
                for r in 0..dout {
                    for c in 0..dout {
                        let v = blk.get(r, c);
                        if v != ZERO {
                            j.set(a * dout + r, b * dout + c, v);
                        }
                    }
                }
            }
        }
        Ok(j)
    }

    /// Kraus form, bounded by `din·dout ≤ cap`. Single dense steps are
    /// returned as they are.
    pub fn to_kraus(&self, cap: usize) -> Result<KrausChannel> {
        if let [Op::Map { wires, kraus, .. }] = &self.ops[..] {
            if wires.iter().copied().eq(0..self.in_shape.len()) {
                return KrausChannel::new((**kraus).clone(), self.in_shape.clone(), self.out_shape.clone());
            }
        }
        if self.ops.is_empty() {
            return KrausChannel::identity(self.in_shape.clone()).with_shapes(self.in_shape.clone(), self.out_shape.clone());
        }
        KrausChannel::from_choi(&self.choi(cap)?, self.in_shape.clone(), self.out_shape.clone())
    }

    /// `Φ†(O)` via `(Φ†(O))_{ji} = Tr(O Φ(|i⟩⟨j|))`.
    pub fn dual_dense(&self, obs: &CMatrix) -> Result<CMatrix> {
        let din = self.in_shape.total_dim();
        let dout = self.out_shape.total_dim();
        if obs.rows() != dout || obs.cols() != dout {
            return Err(mismatch("observable does not match circuit output"));
        }
        let mut out = CMatrix::zeros(din, din);
        for i in 0..din {
            for j in 0..din {
                let phi = self.apply_unit(i, j, DEFAULT_BLOCK_CAP.max(dout))?.to_dense(dout)?;
                out.set(j, i, crate::qmath::spectral::trace_product(obs, &phi));
            }
        }
        Ok(out)
    }
}

fn shift_op(op: &Op, shift: usize) -> Op {
    match op {
        Op::Map { wires, kraus, out_dims } => Op::Map {
            wires: wires.iter().map(|w| w + shift).collect(),
            kraus: kraus.clone(),
            out_dims: out_dims.clone(),
        },
        Op::Prep { at, state, dims } => Op::Prep { at: at + shift, state: state.clone(), dims: dims.clone() },
        Op::Discard { wire } => Op::Discard { wire: wire + shift },
        Op::Permute { perm } => {
            let mut image: Vec<usize> = (0..shift).collect();
            image.extend(perm.images().iter().map(|p| p + shift));
            Op::Permute { perm: Permutation::from_images(image).expect("shifted bijection") }
        }
    }
}

/// Incremental circuit construction that tracks wire dimensions.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    in_shape: SpaceShape,
    dims: Vec<usize>,
    ops: Vec<Op>,
}

impl CircuitBuilder {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn map(mut self, wires: &[usize], kraus: Vec<CMatrix>, out_dims: &[usize]) -> Result<Self> {
        if wires.is_empty() {
            return Err(Error::Precondition("map needs at least one wire".into()));
        }
        let mut din = 1;
        for (i, &w) in wires.iter().enumerate() {
            if w >= self.dims.len() || wires[..i].contains(&w) {
                return Err(Error::IndexOutOfRange(format!("map wires {wires:?} on {} wires", self.dims.len())));
            }
            din *= self.dims[w];
        }
        let dout: usize = out_dims.iter().product();
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus family".into()));
        }
        for k in &kraus {
            if k.rows() != dout || k.cols() != din {
                return Err(mismatch(format!("Kraus {}x{} for map {din} -> {dout}", k.rows(), k.cols())));
            }
        }
        let at = *wires.iter().min().expect("nonempty");
        let mut kept: Vec<usize> =
            self.dims.iter().enumerate().filter(|(i, _)| !wires.contains(i)).map(|(_, &d)| d).collect();
        kept.splice(at..at, out_dims.iter().copied());
        self.dims = kept;
        let kraus = kraus.into_iter().map(CMatrix::strip_shapes).collect();
        self.ops.push(Op::Map { wires: wires.to_vec(), kraus: Arc::new(kraus), out_dims: out_dims.to_vec() });
        Ok(self)
    }

    pub fn unitary(self, wires: &[usize], u: CMatrix) -> Result<Self> {
        let out: Vec<usize> = wires.iter().map(|&w| self.dims.get(w).copied().unwrap_or(0)).collect();
        self.map(wires, vec![u], &out)
    }

    /// Deterministic classical function on basis labels, `x ↦ f(x)`.
    pub fn classical(self, wires: &[usize], out_dims: &[usize], f: impl Fn(usize) -> usize) -> Result<Self> {
        let din: usize = wires.iter().map(|&w| self.dims.get(w).copied().unwrap_or(1)).product();
        let dout: usize = out_dims.iter().product();
        let kraus = classical_kraus(din, dout, f)?;
        self.map(wires, kraus, out_dims)
    }

    pub fn prep(mut self, at: usize, state: CMatrix, dims: &[usize]) -> Result<Self> {
        if at > self.dims.len() {
            return Err(Error::IndexOutOfRange(format!("prep at {at} on {} wires", self.dims.len())));
        }
        let d: usize = dims.iter().product();
        if state.rows() != d || state.cols() != d {
            return Err(mismatch("prep state does not match its wire dims"));
        }
        self.dims.splice(at..at, dims.iter().copied());
        self.ops.push(Op::Prep { at, state: Arc::new(state.strip_shapes()), dims: dims.to_vec() });
        Ok(self)
    }

    pub fn discard(mut self, wire: usize) -> Result<Self> {
        if wire >= self.dims.len() {
            return Err(Error::IndexOutOfRange(format!("discard {wire} on {} wires", self.dims.len())));
        }
        self.dims.remove(wire);
        self.ops.push(Op::Discard { wire });
        Ok(self)
    }

    /// Measures `wire` in the computational basis and keeps the outcome.
    pub fn dephase(self, wire: usize) -> Result<Self> {
        let d = self.dims.get(wire).copied().unwrap_or(0);
        self.classical(&[wire], &[d], |x| x)
    }

    /// Projects `wire` onto `⟨idx|` (trace-nonincreasing; removes the wire).
    pub fn project(self, wire: usize, idx: usize) -> Result<Self> {
        let d = self.dims.get(wire).copied().unwrap_or(0);
        if idx >= d {
            return Err(Error::IndexOutOfRange(format!("projection index {idx} on dim {d}")));
        }
        self.map(&[wire], vec![CMatrix::ket(d, idx).adjoint()], &[])
    }

    pub fn permute(mut self, perm: Permutation) -> Result<Self> {
        if perm.len() != self.dims.len() {
            return Err(mismatch(format!("permutation of {} on {} wires", perm.len(), self.dims.len())));
        }
        self.dims = perm.apply(&self.dims);
        if perm != Permutation::identity(perm.len()) {
            self.ops.push(Op::Permute { perm });
        }
        Ok(self)
    }

    /// Runs `c` on the wires `offset..offset + c.in_len`.
    pub fn append(mut self, c: &Circuit, offset: usize) -> Result<Self> {
        let n_in = c.in_shape.len();
        if offset + n_in > self.dims.len() || self.dims[offset..offset + n_in] != c.in_shape.dims()[..] {
            return Err(mismatch(format!(
                "appending circuit on {:?} at offset {offset} of {:?}",
                c.in_shape.dims(),
                self.dims
            )));
        }
        let tail = self.dims.len() - offset - n_in;
        for op in &c.ops {
            let shifted = shift_op(op, offset);
            let shifted = match shifted {
                Op::Permute { perm } => {
                    let mut image = perm.images().to_vec();
                    let base = image.len();
                    image.extend(base..base + tail);
                    Op::Permute { perm: Permutation::from_images(image)? }
                }
                other => other,
            };
            self.ops.push(shifted);
        }
        self.dims.splice(offset..offset + n_in, c.out_shape.dims());
        Ok(self)
    }

    pub fn finish(self, out_shape: SpaceShape) -> Result<Circuit> {
        if out_shape.dims() != self.dims {
            return Err(mismatch(format!("builder ends on {:?}, declared output {:?}", self.dims, out_shape.dims())));
        }
        Ok(Circuit { in_shape: self.in_shape, out_shape, ops: self.ops })
    }
}

/// Kraus family `{|f(x)⟩⟨x|}` of a deterministic classical map.
pub fn classical_kraus(din: usize, dout: usize, f: impl Fn(usize) -> usize) -> Result<Vec<CMatrix>> {
    let mut kraus = Vec::with_capacity(din);
    for x in 0..din {
        let y = f(x);
        if y >= dout {
            return Err(Error::IndexOutOfRange(format!("classical map sends {x} to {y} >= {dout}")));
        }
        kraus.push(CMatrix::from_fn(dout, din, |r, c| if r == y && c == x { C64::new(1.0, 0.0) } else { ZERO }));
    }
    Ok(kraus)
}

/// Permutation unitary `|x⟩ ↦ |f(x)⟩` for a bijection `f`.
pub fn permutation_unitary(dim: usize, f: impl Fn(usize) -> usize) -> Result<CMatrix> {
    let mut u = CMatrix::zeros(dim, dim);
    let mut hit = vec![false; dim];
    for x in 0..dim {
        let y = f(x);
        if y >= dim || hit[y] {
            return Err(Error::Precondition(format!("map is not a bijection on {dim} labels")));
        }
        hit[y] = true;
        u.set(y, x, C64::new(1.0, 0.0));
    }
    Ok(u)
}

/// Flat index of mixed-radix digits, last factor fastest.
pub fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Digits of a flat index.
pub fn split_index(idx: usize, dims: &[usize]) -> Vec<usize> {
    basis_digits(idx, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::kraus::{compose_channels, tensor_channels};
    use crate::qmath::random::{random_density, random_kraus_ops, rng_from_seed};

    fn rand_channel(seed: u64, din: usize, dout: usize) -> KrausChannel {
        let ks = random_kraus_ops(&mut rng_from_seed(seed), din, dout, 2);
        KrausChannel::new(ks, SpaceShape::single("i", din), SpaceShape::single("o", dout)).unwrap()
    }

    #[test]
    fn from_kraus_round_trip() {
        let c = rand_channel(1, 2, 3);
        let circ = Circuit::from_kraus(&c);
        let rho = random_density(&mut rng_from_seed(2), 2, 2);
        assert!(circ.apply_dense(&rho).unwrap().max_abs_diff(&c.apply(&rho).unwrap()) < 1e-13);
        let back = circ.to_kraus(64).unwrap();
        assert_eq!(back.kraus_ops(), c.kraus_ops());
    }

    #[test]
    fn tensor_and_compose_match_kraus() {
        let f = rand_channel(3, 2, 3);
        let g = rand_channel(4, 3, 2);
        let h = rand_channel(5, 2, 2);
        let ct = Circuit::from_kraus(&f).tensor(&Circuit::from_kraus(&h));
        let kt = tensor_channels(&f, &h);
        let rho = random_density(&mut rng_from_seed(6), 4, 4);
        assert!(ct.apply_dense(&rho).unwrap().max_abs_diff(&kt.apply(&rho).unwrap()) < 1e-12);
        let cc = Circuit::from_kraus(&g).after(&Circuit::from_kraus(&f)).unwrap();
        let kc = compose_channels(&g, &f).unwrap();
        let sigma = random_density(&mut rng_from_seed(7), 2, 2);
        assert!(cc.apply_dense(&sigma).unwrap().max_abs_diff(&kc.apply(&sigma).unwrap()) < 1e-12);
        let via_choi = cc.choi(64).unwrap();
        assert!(via_choi.max_abs_diff(&kc.choi()) < 1e-12);
    }

    #[test]
    fn builder_tracks_dims() {
        let b = Circuit::builder(SpaceShape::from_dims("x", &[2, 3]).unwrap())
            .prep(0, CMatrix::maximally_mixed(2), &[2])
            .unwrap()
            .classical(&[0, 1], &[2], |x| x & 1)
            .unwrap();
        assert_eq!(b.dims(), &[2, 3]);
        assert!(b.finish(SpaceShape::from_dims("y", &[3]).unwrap()).is_err());
    }

    #[test]
    fn appended_permutation_leaves_tail() {
        let swap = Circuit::builder(SpaceShape::from_dims("s", &[2, 3]).unwrap())
            .permute(Permutation::one_line(&[2, 1]).unwrap())
            .unwrap()
            .finish(SpaceShape::from_dims("t", &[3, 2]).unwrap())
            .unwrap();
        let outer = Circuit::builder(SpaceShape::from_dims("w", &[2, 2, 3, 2]).unwrap())
            .append(&swap, 1)
            .unwrap()
            .finish(SpaceShape::from_dims("v", &[2, 3, 2, 2]).unwrap())
            .unwrap();
        let dims = [2, 2, 3, 2];
        let idx = flat_index(&[1, 0, 2, 1], &dims);
        let out = outer.apply_dense(&CMatrix::basis_projector(24, idx)).unwrap();
        let want = flat_index(&[1, 2, 0, 1], &[2, 3, 2, 2]);
        assert_eq!(out.get(want, want), C64::new(1.0, 0.0));
    }

    #[test]
    fn classical_and_table() {
        let and = Circuit::builder(SpaceShape::from_dims("f", &[2, 2]).unwrap())
            .classical(&[0, 1], &[2], |x| usize::from(x == 3))
            .unwrap()
            .finish(SpaceShape::classical("F", 2))
            .unwrap();
        let one = and.apply_dense(&CMatrix::basis_projector(4, 3)).unwrap();
        assert_eq!(one.get(1, 1).re, 1.0);
        let zero = and.apply_dense(&CMatrix::basis_projector(4, 2)).unwrap();
        assert_eq!(zero.get(0, 0).re, 1.0);
    }
}
