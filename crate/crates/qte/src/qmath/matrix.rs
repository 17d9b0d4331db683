use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::shape::SpaceShape;
use crate::error::{mismatch, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix, row-major, with optional tensor shapes on its
/// row and column spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
    row_shape: Option<SpaceShape>,
    col_shape: Option<SpaceShape>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(mismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(CMatrix { rows, cols, data, row_shape: None, col_shape: None })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols], row_shape: None, col_shape: None }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data, row_shape: None, col_shape: None }
    }

    pub fn from_real(rows: usize, cols: usize, vals: &[f64]) -> Result<Self> {
        CMatrix::new(rows, cols, vals.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn diag(vals: &[C64]) -> Self {
        let n = vals.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, v) in vals.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    pub fn diag_real(vals: &[f64]) -> Self {
        CMatrix::diag(&vals.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>())
    }

    /// Column vector `|i⟩` of dimension `dim`.
    pub fn ket(dim: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(dim, 1);
        m.data[i] = ONE;
        m
    }

    /// Matrix unit `|i⟩⟨j|` on a `dim`-dimensional space.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m.data[i * dim + j] = ONE;
        m
    }

    /// Computational basis projector `|i⟩⟨i|`.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        CMatrix::unit(dim, i, i)
    }

    pub fn column(entries: &[C64]) -> Self {
        CMatrix { rows: entries.len(), cols: 1, data: entries.to_vec(), row_shape: None, col_shape: None }
    }

    pub fn scalar(v: C64) -> Self {
        CMatrix { rows: 1, cols: 1, data: vec![v], row_shape: None, col_shape: None }
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        CMatrix::identity(dim).scale_real(1.0 / dim as f64)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row_shape(&self) -> Option<&SpaceShape> {
        self.row_shape.as_ref()
    }

    pub fn col_shape(&self) -> Option<&SpaceShape> {
        self.col_shape.as_ref()
    }

    pub fn with_shapes(mut self, row: SpaceShape, col: SpaceShape) -> Result<Self> {
        if row.total_dim() != self.rows || col.total_dim() != self.cols {
            return Err(mismatch(format!(
                "shapes of dims {}x{} on a {}x{} matrix",
                row.total_dim(),
                col.total_dim(),
                self.rows,
                self.cols
            )));
        }
        self.row_shape = Some(row);
        self.col_shape = Some(col);
        Ok(self)
    }

    /// Attaches the same shape to rows and columns of a square matrix.
    pub fn with_shape(self, shape: SpaceShape) -> Result<Self> {
        self.with_shapes(shape.clone(), shape)
    }

    pub fn strip_shapes(mut self) -> Self {
        self.row_shape = None;
        self.col_shape = None;
        self
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        out.row_shape = self.col_shape.clone();
        out.col_shape = self.row_shape.clone();
        out
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out.row_shape = self.col_shape.clone();
        out.col_shape = self.row_shape.clone();
        out
    }

    pub fn conj(&self) -> CMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.conj();
        }
        out
    }

    pub fn trace(&self) -> C64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> CMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(mismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let orow = &mut out[i * m..(i + 1) * m];
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[l * m..(l + 1) * m];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(CMatrix {
            rows: n,
            cols: m,
            data: out,
            row_shape: self.row_shape.clone(),
            col_shape: other.col_shape.clone(),
        })
    }

    /// `self · other†` without materializing the adjoint.
    pub fn matmul_adj(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.cols {
            return Err(mismatch("matmul_adj column mismatch"));
        }
        let (n, k, m) = (self.rows, self.cols, other.rows);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let arow = &self.data[i * k..(i + 1) * k];
            for j in 0..m {
                let brow = &other.data[j * k..(j + 1) * k];
                let mut acc = ZERO;
                for (a, b) in arow.iter().zip(brow) {
                    acc += a * b.conj();
                }
                out[i * m + j] = acc;
            }
        }
        Ok(CMatrix { rows: n, cols: m, data: out, row_shape: None, col_shape: None })
    }

    /// `A ρ A†`.
    pub fn conjugate(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.matmul(rho)?.matmul_adj(self)
    }

    /// Kronecker product; shapes are concatenated when both operands carry them.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let rows = r1 * r2;
        let cols = c1 * c2;
        let mut data = vec![ZERO; rows * cols];
        for i1 in 0..r1 {
            for j1 in 0..c1 {
                let a = self.data[i1 * c1 + j1];
                if a == ZERO {
                    continue;
                }
                for i2 in 0..r2 {
                    let row = i1 * r2 + i2;
                    let base = row * cols + j1 * c2;
                    let brow = &other.data[i2 * c2..(i2 + 1) * c2];
                    for (o, b) in data[base..base + c2].iter_mut().zip(brow) {
                        *o = a * b;
                    }
                }
            }
        }
        let join = |a: &Option<SpaceShape>, b: &Option<SpaceShape>| match (a, b) {
            (Some(x), Some(y)) => Some(x.concat(y)),
            _ => None,
        };
        CMatrix {
            rows,
            cols,
            data,
            row_shape: join(&self.row_shape, &other.row_shape),
            col_shape: join(&self.col_shape, &other.col_shape),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max-abs distance; infinite on dimension mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-abs entry of `A − A†`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                let d = (self.data[r * n + c] - self.data[c * n + r].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> CMatrix {
        let n = self.rows;
        let mut out = self.clone();
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = (self.data[r * n + c] + self.data[c * n + r].conj()) * 0.5;
            }
        }
        out
    }

    /// `⟨ψ|φ⟩` for column vectors.
    pub fn inner(&self, other: &CMatrix) -> Result<C64> {
        if self.cols != 1 || other.cols != 1 || self.rows != other.rows {
            return Err(mismatch("inner product needs equal-length column vectors"));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|ψ⟩⟨ψ|` for a column vector.
    pub fn outer_self(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.rows, |r, c| self.data[r] * self.data[c].conj())
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.data[r * self.cols + c])
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> CMatrix {
        CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Sub-block `rows r0..r0+nr`, `cols c0..c0+nc`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> CMatrix {
        CMatrix::from_fn(nr, nc, |r, c| self.get(r0 + r, c0 + c))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix add dimension mismatch");
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&rhs.data) {
            *o += b;
        }
        out
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sub dimension mismatch");
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&rhs.data) {
            *o -= b;
        }
        out
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix add dimension mismatch");
        for (o, b) in self.data.iter_mut().zip(&rhs.data) {
            *o += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sub dimension mismatch");
        for (o, b) in self.data.iter_mut().zip(&rhs.data) {
            *o -= b;
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Mul<C64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: C64) -> CMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: f64) -> CMatrix {
        self.scale_real(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_kron_identity() {
        let i2 = CMatrix::identity(2);
        assert_eq!(i2.kron(&i2), CMatrix::identity(4));
    }

    #[test]
    fn kron_of_basis_projectors() {
        let p0 = CMatrix::basis_projector(2, 0);
        let p1 = CMatrix::basis_projector(2, 1);
        assert_eq!(p0.kron(&p1), CMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_matches_index_formula() {
        let a = CMatrix::new(2, 2, vec![c(1., 2.), c(0., -1.), c(3., 0.), c(0.5, 0.5)]).unwrap();
        let b = CMatrix::new(2, 2, vec![c(-1., 0.), c(2., 1.), c(0., 0.), c(1., -3.)]).unwrap();
        let k = a.kron(&b);
        for i1 in 0..2 {
            for j1 in 0..2 {
                for i2 in 0..2 {
                    for j2 in 0..2 {
                        assert_eq!(k.get(i1 * 2 + i2, j1 * 2 + j2), a.get(i1, j1) * b.get(i2, j2));
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_and_products() {
        let a = CMatrix::new(2, 3, (0..6).map(|i| c(i as f64, 1.0 - i as f64)).collect()).unwrap();
        let aa = a.matmul(&a.adjoint()).unwrap();
        assert!(aa.is_hermitian(1e-14));
        assert!(a.matmul_adj(&a).unwrap().max_abs_diff(&aa) < 1e-14);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn shape_checks() {
        let m = CMatrix::identity(4);
        assert!(m.clone().with_shape(SpaceShape::qubits("q", 2)).is_ok());
        assert!(m.with_shape(SpaceShape::qubits("q", 3)).is_err());
        assert!(CMatrix::new(2, 2, vec![ONE; 3]).is_err());
    }
}
