use super::matrix::{CMatrix, ZERO};
use super::shape::{Permutation, SpaceShape};
use crate::error::{mismatch, Error, Result};

/// Kronecker product `a ⊗ b`; shapes are concatenated when present.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Kronecker product of a list, left to right.
pub fn tensor_all(ms: &[CMatrix]) -> CMatrix {
    let mut it = ms.iter();
    let first = it.next().cloned().unwrap_or_else(|| CMatrix::identity(1));
    it.fold(first, |acc, m| acc.kron(m))
}

/// Map from old flat index to new flat index when factor `i` (of
/// dimension `dims[i]`) moves to position `perm.image(i)`.
pub(crate) fn permutation_index_map(dims: &[usize], perm: &Permutation) -> Vec<usize> {
    let n = dims.len();
    let new_dims = perm.apply(dims);
    let mut new_stride = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        new_stride[i] = new_stride[i + 1] * new_dims[i + 1];
    }
    // stride, in the new layout, of old factor i
    let stride_of_old: Vec<usize> = (0..n).map(|i| new_stride[perm.image(i)]).collect();
    let total: usize = dims.iter().product();
    let mut map = vec![0usize; total];
    let mut digits = vec![0usize; n];
    let mut target = 0usize;
    for slot in map.iter_mut() {
        *slot = target;
        // increment mixed-radix counter, last factor fastest
        for i in (0..n).rev() {
            digits[i] += 1;
            target += stride_of_old[i];
            if digits[i] < dims[i] {
                break;
            }
            target -= stride_of_old[i] * digits[i];
            digits[i] = 0;
        }
    }
    map
}

/// Conjugates by the factor permutation unitary, with separate row and
/// column factorizations (needed for rectangular operators).
pub(crate) fn permute_raw(
    a: &CMatrix,
    row_dims: &[usize],
    col_dims: &[usize],
    row_perm: &Permutation,
    col_perm: &Permutation,
) -> CMatrix {
    let rmap = permutation_index_map(row_dims, row_perm);
    let cmap = if row_dims == col_dims && row_perm == col_perm {
        rmap.clone()
    } else {
        permutation_index_map(col_dims, col_perm)
    };
    let cols = a.cols();
    let mut out = CMatrix::zeros(a.rows(), cols);
    let src = a.data();
    let dst = out.data_mut();
    for (r, &nr) in rmap.iter().enumerate() {
        let row = &src[r * cols..(r + 1) * cols];
        let base = nr * cols;
        for (c, &nc) in cmap.iter().enumerate() {
            dst[base + nc] = row[c];
        }
    }
    out
}

/// Square-matrix factor permutation on raw dimensions.
pub(crate) fn permute_square(a: &CMatrix, dims: &[usize], perm: &Permutation) -> CMatrix {
    permute_raw(a, dims, dims, perm, perm)
}

/// Rearranges the tensor factors of `a` according to `perm`: factor `i`
/// moves to position `perm.image(i)`. Applies to rows and columns alike.
pub fn permute_factors(a: &CMatrix, perm: &Permutation) -> Result<CMatrix> {
    let rs = a.row_shape().ok_or_else(|| Error::Precondition("permute_factors needs a row shape".into()))?;
    let cs = a.col_shape().ok_or_else(|| Error::Precondition("permute_factors needs a column shape".into()))?;
    if rs.len() != perm.len() || cs.len() != perm.len() {
        return Err(mismatch(format!(
            "permutation of length {} for {} row / {} column factors",
            perm.len(),
            rs.len(),
            cs.len()
        )));
    }
    let out = permute_raw(a, &rs.dims(), &cs.dims(), perm, perm);
    let new_rs = SpaceShape::new(perm.apply(rs.factors()))?;
    let new_cs = SpaceShape::new(perm.apply(cs.factors()))?;
    out.with_shapes(new_rs, new_cs)
}

/// Partial trace keeping the factors listed in `keep` (in their original
/// order) on raw dimensions.
pub(crate) fn partial_trace_raw(a: &CMatrix, dims: &[usize], keep: &[bool]) -> CMatrix {
    let n = dims.len();
    let kd: usize = (0..n).filter(|&i| keep[i]).map(|i| dims[i]).product();
    let td: usize = (0..n).filter(|&i| !keep[i]).map(|i| dims[i]).product();
    if td == 1 {
        return a.clone().strip_shapes();
    }
    // full[k * td + t] = flat index of the joint (kept, traced) assignment
    let total = kd * td;
    let mut full = vec![0usize; total];
    let mut stride = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * dims[i + 1];
    }
    let kept: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    let traced: Vec<usize> = (0..n).filter(|&i| !keep[i]).collect();
    let offsets = |idx: &[usize], count: usize| -> Vec<usize> {
        let mut out = Vec::with_capacity(count);
        let mut digits = vec![0usize; idx.len()];
        for _ in 0..count {
            out.push(idx.iter().zip(&digits).map(|(&f, &d)| d * stride[f]).sum());
            for j in (0..idx.len()).rev() {
                digits[j] += 1;
                if digits[j] < dims[idx[j]] {
                    break;
                }
                digits[j] = 0;
            }
        }
        out
    };
    let koff = offsets(&kept, kd);
    let toff = offsets(&traced, td);
    for k in 0..kd {
        for t in 0..td {
            full[k * td + t] = koff[k] + toff[t];
        }
    }
    let cols = a.cols();
    let src = a.data();
    let mut out = CMatrix::zeros(kd, kd);
    for k1 in 0..kd {
        for k2 in 0..kd {
            let mut acc = ZERO;
            for t in 0..td {
                acc += src[full[k1 * td + t] * cols + full[k2 * td + t]];
            }
            out.set(k1, k2, acc);
        }
    }
    out
}

/// Partial trace of a shaped square matrix, keeping the factors in `keep`.
pub fn partial_trace(a: &CMatrix, keep: &[usize]) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(mismatch("partial trace needs a square matrix"));
    }
    let shape = a
        .row_shape()
        .ok_or_else(|| Error::Precondition("partial_trace needs a shaped matrix".into()))?
        .clone();
    let n = shape.len();
    let mut mask = vec![false; n];
    for &k in keep {
        if k >= n {
            return Err(Error::IndexOutOfRange(format!("keep index {k} with {n} factors")));
        }
        mask[k] = true;
    }
    let out = partial_trace_raw(a, &shape.dims(), &mask);
    let kept: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    let ks = shape.select(&kept)?;
    out.with_shape(ks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::matrix::C64;

    fn shaped(m: CMatrix, dims: &[usize]) -> CMatrix {
        m.with_shape(SpaceShape::from_dims("f", dims).unwrap()).unwrap()
    }

    #[test]
    fn identity_permutation_is_noop() {
        let a = shaped(CMatrix::from_fn(4, 4, |r, c| C64::new(r as f64, c as f64)), &[2, 2]);
        let p = Permutation::one_line(&[1, 2]).unwrap();
        assert_eq!(permute_factors(&a, &p).unwrap().data(), a.data());
    }

    #[test]
    fn swap_basis_states() {
        let a = shaped(CMatrix::basis_projector(2, 0).kron(&CMatrix::basis_projector(2, 1)), &[2, 2]);
        let p = Permutation::one_line(&[2, 1]).unwrap();
        let b = permute_factors(&a, &p).unwrap();
        let want = CMatrix::basis_projector(2, 1).kron(&CMatrix::basis_projector(2, 0));
        assert_eq!(b.data(), want.data());
    }

    #[test]
    fn permutation_length_mismatch() {
        let a = shaped(CMatrix::identity(4), &[2, 2]);
        assert!(permute_factors(&a, &Permutation::one_line(&[1, 2, 3]).unwrap()).is_err());
    }

    #[test]
    fn trace_keep_all_and_none() {
        let a = shaped(CMatrix::from_fn(6, 6, |r, c| C64::new((r * 6 + c) as f64, 0.0)), &[2, 3]);
        assert_eq!(partial_trace(&a, &[0, 1]).unwrap().data(), a.data());
        let t = partial_trace(&a, &[]).unwrap();
        assert_eq!(t.rows(), 1);
        assert!((t.get(0, 0) - a.trace()).norm() < 1e-12);
        assert!(partial_trace(&a, &[2]).is_err());
    }

    #[test]
    fn bell_state_marginal_is_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let psi = CMatrix::column(&[C64::new(s, 0.), C64::new(0., 0.), C64::new(0., 0.), C64::new(s, 0.)]);
        let rho = shaped(psi.outer_self(), &[2, 2]);
        let m = partial_trace(&rho, &[0]).unwrap();
        assert!(m.max_abs_diff(&CMatrix::maximally_mixed(2)) < 1e-15);
    }
}
