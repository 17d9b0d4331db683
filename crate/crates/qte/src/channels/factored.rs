//! Operators kept as sums of tensor products of small dense blocks.
//!
//! Channels acting on a few wires only touch the blocks holding those
//! wires, so product-structured states on hundreds of thousands of
//! dimensions stay cheap as long as no single block grows past the cap.

use crate::error::{mismatch, Error, Result};
use crate::qmath::tensor::{partial_trace_raw, permute_square};
use crate::qmath::{CMatrix, Permutation, C64, ONE, ZERO};

/// Default maximum dimension of one dense block.
pub const DEFAULT_BLOCK_CAP: usize = 1024;

#[derive(Clone, Debug)]
struct Block {
    wires: Vec<u32>,
    mat: CMatrix,
}

#[derive(Clone, Debug)]
struct Term {
    coef: C64,
    blocks: Vec<Block>,
}

/// `Σ_t c_t ⊗_b X_{t,b}` over an ordered list of wires.
#[derive(Clone, Debug)]
pub struct FactoredOp {
    order: Vec<u32>,
    dims: Vec<usize>,
    terms: Vec<Term>,
    cap: usize,
}

impl FactoredOp {
    /// The scalar `1` on zero wires.
    pub fn unit() -> Self {
        FactoredOp { order: Vec::new(), dims: Vec::new(), terms: vec![Term { coef: ONE, blocks: Vec::new() }], cap: DEFAULT_BLOCK_CAP }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Dense operator on wires of the given dimensions, held as one block.
    pub fn from_dense(mat: &CMatrix, dims: &[usize]) -> Result<Self> {
        let mut op = FactoredOp::unit();
        op.prep(0, mat.clone(), dims)?;
        Ok(op)
    }

    /// `⊗_w |i_w⟩⟨j_w|` with one block per wire.
    pub fn basis_unit(dims: &[usize], row: usize, col: usize) -> Self {
        let mut op = FactoredOp::unit();
        let digits_r = digits(row, dims);
        let digits_c = digits(col, dims);
        for (w, &d) in dims.iter().enumerate() {
            op.prep(w, CMatrix::unit(d, digits_r[w], digits_c[w]), &[d]).expect("unit block");
        }
        op
    }

    /// `|i⟩⟨i|` as a product over wires.
    pub fn basis_state(dims: &[usize], idx: usize) -> Self {
        FactoredOp::basis_unit(dims, idx, idx)
    }

    /// Product of single-wire or multi-wire states.
    pub fn product(parts: Vec<(CMatrix, Vec<usize>)>) -> Result<Self> {
        let mut op = FactoredOp::unit();
        for (m, dims) in parts {
            let at = op.num_wires();
            op.prep(at, m, &dims)?;
        }
        Ok(op)
    }

    pub fn num_wires(&self) -> usize {
        self.order.len()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn wire_dims(&self) -> Vec<usize> {
        self.order.iter().map(|&w| self.dims[w as usize]).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.wire_dims().iter().product()
    }

    fn fresh(&mut self, d: usize) -> u32 {
        self.dims.push(d);
        (self.dims.len() - 1) as u32
    }

    fn check_pos(&self, pos: usize) -> Result<()> {
        if pos >= self.order.len() {
            return Err(Error::IndexOutOfRange(format!("wire {pos} of {}", self.order.len())));
        }
        Ok(())
    }

    /// Inserts a state on new wires starting at position `at`.
    pub fn prep(&mut self, at: usize, state: CMatrix, dims: &[usize]) -> Result<()> {
        let d: usize = dims.iter().product();
        if state.rows() != d || state.cols() != d {
            return Err(mismatch(format!("prep of a {}x{} state on wires of total dim {d}", state.rows(), state.cols())));
        }
        if at > self.order.len() {
            return Err(Error::IndexOutOfRange(format!("prep position {at} of {}", self.order.len())));
        }
        let ids: Vec<u32> = dims.iter().map(|&x| self.fresh(x)).collect();
        let state = state.strip_shapes();
        if ids.is_empty() {
            let s = state.get(0, 0);
            for t in &mut self.terms {
                t.coef *= s;
            }
        } else {
            for t in &mut self.terms {
                t.blocks.push(Block { wires: ids.clone(), mat: state.clone() });
            }
        }
        self.order.splice(at..at, ids);
        Ok(())
    }

    /// Applies `X ↦ Σ K X K†` to the wires at `pos` (taken in that order);
    /// the output wires, of dimensions `out_dims`, are inserted where the
    /// first of the input wires was.
    pub fn apply_kraus(&mut self, pos: &[usize], kraus: &[CMatrix], out_dims: &[usize]) -> Result<()> {
        if pos.is_empty() {
            return Err(Error::Precondition("apply_kraus needs at least one wire".into()));
        }
        for (i, &p) in pos.iter().enumerate() {
            self.check_pos(p)?;
            if pos[..i].contains(&p) {
                return Err(Error::Precondition(format!("wire {p} listed twice")));
            }
        }
        let targets: Vec<u32> = pos.iter().map(|&p| self.order[p]).collect();
        let din: usize = targets.iter().map(|&w| self.dims[w as usize]).product();
        let dout: usize = out_dims.iter().product();
        for k in kraus {
            if k.cols() != din || k.rows() != dout {
                return Err(mismatch(format!("Kraus operator {}x{} on wires {din} -> {dout}", k.rows(), k.cols())));
            }
        }
        let out_ids: Vec<u32> = out_dims.iter().map(|&d| self.fresh(d)).collect();
        let prepared = prepare_kraus(kraus);
        let cap = self.cap;
        let dims = self.dims.clone();
        let mut new_terms = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            let (mut rest_blocks, merged) = merge_blocks(t.blocks, &targets, &dims, cap)?;
            let r = merged.mat.rows() / din;
            let out = leading_kraus(&merged.mat, din, r, dout, &prepared);
            let mut coef = t.coef;
            let mut wires = out_ids.clone();
            wires.extend_from_slice(&merged.wires[targets.len()..]);
            if wires.is_empty() {
                coef *= out.get(0, 0);
            } else {
                rest_blocks.push(Block { wires, mat: out });
            }
            if coef != ZERO {
                new_terms.push(Term { coef, blocks: rest_blocks });
            }
        }
        self.terms = new_terms;
        let at = *pos.iter().min().expect("nonempty");
        self.order.retain(|w| !targets.contains(w));
        self.order.splice(at..at, out_ids);
        Ok(())
    }

    /// Partial trace over the wire at `pos`.
    pub fn discard(&mut self, pos: usize) -> Result<()> {
        self.check_pos(pos)?;
        let w = self.order[pos];
        let dims = self.dims.clone();
        for t in &mut self.terms {
            let bi = t.blocks.iter().position(|b| b.wires.contains(&w)).expect("wire in block");
            let b = t.blocks.swap_remove(bi);
            if b.wires.len() == 1 {
                t.coef *= b.mat.trace();
            } else {
                let bd: Vec<usize> = b.wires.iter().map(|&x| dims[x as usize]).collect();
                let keep: Vec<bool> = b.wires.iter().map(|&x| x != w).collect();
                let mat = partial_trace_raw(&b.mat, &bd, &keep);
                let wires = b.wires.into_iter().filter(|&x| x != w).collect();
                t.blocks.push(Block { wires, mat });
            }
        }
        self.terms.retain(|t| t.coef != ZERO);
        self.order.remove(pos);
        Ok(())
    }

    /// `⟨i|·|i⟩` on the wire at `pos` (removes the wire).
    pub fn project(&mut self, pos: usize, idx: usize) -> Result<()> {
        self.check_pos(pos)?;
        let d = self.dims[self.order[pos] as usize];
        if idx >= d {
            return Err(Error::IndexOutOfRange(format!("basis index {idx} on a wire of dim {d}")));
        }
        let bra = CMatrix::ket(d, idx).adjoint();
        self.apply_kraus(&[pos], &[bra], &[])
    }

    /// Reorders the `perm.len()` wires starting at `offset`: the wire at
    /// `offset + i` moves to `offset + perm.image(i)`.
    pub fn permute(&mut self, offset: usize, perm: &Permutation) -> Result<()> {
        if offset + perm.len() > self.order.len() {
            return Err(mismatch(format!(
                "permutation of {} wires at offset {offset} on {} wires",
                perm.len(),
                self.order.len()
            )));
        }
        let window = perm.apply(&self.order[offset..offset + perm.len()]);
        self.order[offset..offset + perm.len()].copy_from_slice(&window);
        Ok(())
    }

    pub fn scale(&mut self, s: C64) {
        for t in &mut self.terms {
            t.coef *= s;
        }
        self.terms.retain(|t| t.coef != ZERO);
    }

    /// `self + s·other`; wires are matched by position.
    pub fn add_scaled(&mut self, other: &FactoredOp, s: C64) -> Result<()> {
        if self.wire_dims() != other.wire_dims() {
            return Err(mismatch("adding operators on different wire layouts"));
        }
        let mut relabel = vec![u32::MAX; other.dims.len()];
        for (i, &w) in other.order.iter().enumerate() {
            relabel[w as usize] = self.order[i];
        }
        for t in &other.terms {
            let coef = t.coef * s;
            if coef == ZERO {
                continue;
            }
            let blocks = t
                .blocks
                .iter()
                .map(|b| Block { wires: b.wires.iter().map(|&w| relabel[w as usize]).collect(), mat: b.mat.clone() })
                .collect();
            self.terms.push(Term { coef, blocks });
        }
        Ok(())
    }

    /// `a − b`.
    pub fn difference(a: &FactoredOp, b: &FactoredOp) -> Result<FactoredOp> {
        let mut out = a.clone();
        out.add_scaled(b, C64::new(-1.0, 0.0))?;
        Ok(out)
    }

    pub fn trace(&self) -> C64 {
        self.terms.iter().map(|t| t.coef * t.blocks.iter().map(|b| b.mat.trace()).product::<C64>()).sum()
    }

    /// Dense matrix on the full wire order; fails past `dense_cap`.
    pub fn to_dense(&self, dense_cap: usize) -> Result<CMatrix> {
        let dims = self.wire_dims();
        let total: usize = dims.iter().product();
        if total > dense_cap {
            return Err(Error::DimensionCap { cap: dense_cap, needed: total });
        }
        let mut out = CMatrix::zeros(total, total);
        for t in &self.terms {
            let mut m = CMatrix::scalar(t.coef);
            let mut wires: Vec<u32> = Vec::new();
            for b in &t.blocks {
                m = m.kron(&b.mat);
                wires.extend_from_slice(&b.wires);
            }
            let m = m.strip_shapes();
            let image: Vec<usize> =
                wires.iter().map(|w| self.order.iter().position(|x| x == w).expect("wire present")).collect();
            let perm = Permutation::from_images(image)?;
            let wd: Vec<usize> = wires.iter().map(|&w| self.dims[w as usize]).collect();
            out += &permute_square(&m, &wd, &perm);
        }
        Ok(out)
    }

    /// Collapses all terms into a single dense block (bounded by the cap).
    pub fn densify(&self) -> Result<FactoredOp> {
        let dims = self.wire_dims();
        let dense = self.to_dense(self.cap)?;
        Ok(FactoredOp::from_dense(&dense, &dims)?.with_cap(self.cap))
    }
}

fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = idx % dims[i];
        idx /= dims[i];
    }
    out
}

/// Mixed-radix digits of a flat basis index, last factor fastest.
pub fn basis_digits(idx: usize, dims: &[usize]) -> Vec<usize> {
    digits(idx, dims)
}

/// Pulls every block touching `targets` into one block whose wire list
/// starts with `targets` (in order) followed by the remaining wires.
fn merge_blocks(blocks: Vec<Block>, targets: &[u32], dims: &[usize], cap: usize) -> Result<(Vec<Block>, Block)> {
    let (touched, rest): (Vec<Block>, Vec<Block>) =
        blocks.into_iter().partition(|b| b.wires.iter().any(|w| targets.contains(w)));
    let mut mat = CMatrix::scalar(ONE);
    let mut wires: Vec<u32> = Vec::new();
    for b in &touched {
        wires.extend_from_slice(&b.wires);
    }
    let total: usize = wires.iter().map(|&w| dims[w as usize]).product();
    if total > cap {
        return Err(Error::DimensionCap { cap, needed: total });
    }
    for b in touched {
        mat = mat.kron(&b.mat);
    }
    let mat = mat.strip_shapes();
    let mut target_order: Vec<u32> = targets.to_vec();
    target_order.extend(wires.iter().filter(|w| !targets.contains(w)));
    if target_order == wires {
        return Ok((rest, Block { wires, mat }));
    }
    let image: Vec<usize> = wires.iter().map(|w| target_order.iter().position(|x| x == w).expect("wire")).collect();
    let wd: Vec<usize> = wires.iter().map(|&w| dims[w as usize]).collect();
    let perm = Permutation::from_images(image)?;
    let mat = permute_square(&mat, &wd, &perm);
    Ok((rest, Block { wires: target_order, mat }))
}

/// Non-zero entries `(row, col, value)` of each Kraus operator.
type SparseKraus = Vec<Vec<(usize, usize, C64)>>;

fn prepare_kraus(kraus: &[CMatrix]) -> SparseKraus {
    kraus
        .iter()
        .map(|k| {
            let mut nz = Vec::new();
            for r in 0..k.rows() {
                for c in 0..k.cols() {
                    let v = k.get(r, c);
                    if v != ZERO {
                        nz.push((r, c, v));
                    }
                }
            }
            nz
        })
        .collect()
}

/// `Σ_K (K ⊗ I_r) X (K ⊗ I_r)†` for `X` on `din·r`.
fn leading_kraus(x: &CMatrix, din: usize, r: usize, dout: usize, kraus: &SparseKraus) -> CMatrix {
    let n_in = din * r;
    let n_out = dout * r;
    let src = x.data();
    let mut out = vec![ZERO; n_out * n_out];
    let mut t = vec![ZERO; n_out * n_in];
    for nz in kraus {
        if nz.is_empty() {
            continue;
        }
        t.iter_mut().for_each(|v| *v = ZERO);
        // T = (K ⊗ I) X, slab by slab: rows (a, i) are contiguous.
        let slab = r * n_in;
        for &(a2, a, v) in nz {
            let s = &src[a * slab..(a + 1) * slab];
            let d = &mut t[a2 * slab..(a2 + 1) * slab];
            for (o, x) in d.iter_mut().zip(s) {
                *o += v * x;
            }
        }
        // out += T (K ⊗ I)†
        for row in 0..n_out {
            let trow = &t[row * n_in..(row + 1) * n_in];
            let orow = &mut out[row * n_out..(row + 1) * n_out];
            for &(b2, b, v) in nz {
                let vc = v.conj();
                let s = &trow[b * r..(b + 1) * r];
                let d = &mut orow[b2 * r..(b2 + 1) * r];
                for (o, x) in d.iter_mut().zip(s) {
                    *o += vc * x;
                }
            }
        }
    }
    CMatrix::new(n_out, n_out, out).expect("sized")
}
