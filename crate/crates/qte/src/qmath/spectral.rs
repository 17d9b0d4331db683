use nalgebra::SymmetricEigen;

use super::matrix::{CMatrix, C64};
use crate::error::{mismatch, Error, Result};

/// Max-abs deviation from Hermiticity accepted by spectral routines.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues at or above this floor count as non-negative.
pub const PSD_FLOOR: f64 = -1e-10;

/// Eigen-decomposition `h = Σ λ_j |v_j⟩⟨v_j|` of a Hermitian matrix,
/// eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    eigenvalues: Vec<f64>,
    /// Eigenvectors as columns.
    vectors: CMatrix,
}

impl SpectralDecomp {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, j: usize) -> CMatrix {
        let n = self.vectors.rows();
        CMatrix::from_fn(n, 1, |r, _| self.vectors.get(r, j))
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.vectors
    }

    /// Rank-one projector onto eigenvector `j`.
    pub fn projector(&self, j: usize) -> CMatrix {
        self.eigenvector(j).outer_self()
    }

    pub fn projectors(&self) -> Vec<CMatrix> {
        (0..self.eigenvalues.len()).map(|j| self.projector(j)).collect()
    }

    /// `Σ f(λ_j) Π_j`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.rows();
        let mut out = CMatrix::zeros(n, n);
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let w = f(l);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = self.vectors.get(r, j) * w;
                for c in 0..n {
                    out.add_at(r, c, vr * self.vectors.get(c, j).conj());
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_eigenvalues(|l| l)
    }

    /// `Σ √λ_j Π_j`, eigenvalues in `[PSD_FLOOR, 0)` clamped to zero.
    pub fn psd_sqrt(&self) -> Result<CMatrix> {
        if let Some(&l) = self.eigenvalues.iter().find(|&&l| l < PSD_FLOOR) {
            return Err(Error::Precondition(format!("negative eigenvalue {l:.3e} in psd_sqrt")));
        }
        Ok(self.map_eigenvalues(|l| l.max(0.0).sqrt()))
    }
}

/// Spectral decomposition of a Hermitian matrix (tolerance 1e-10).
pub fn spectral_decompose(h: &CMatrix) -> Result<SpectralDecomp> {
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(eigh_unchecked(&h.hermitian_part()))
}

pub(crate) fn eigh_unchecked(h: &CMatrix) -> SpectralDecomp {
    let n = h.rows();
    if n == 1 {
        return SpectralDecomp { eigenvalues: vec![h.get(0, 0).re], vectors: CMatrix::identity(1) };
    }
    let eig = SymmetricEigen::new(h.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    SpectralDecomp { eigenvalues, vectors }
}

/// Square root of a PSD matrix (eigen floor 1e-10).
pub fn psd_sqrt(a: &CMatrix) -> Result<CMatrix> {
    spectral_decompose(a)?.psd_sqrt()
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let svd = a.to_nalgebra().svd(false, false);
    svd.singular_values.iter().copied().collect()
}

/// Schatten 1-norm: eigenvalue route for Hermitian input, SVD otherwise.
pub fn trace_norm(a: &CMatrix) -> f64 {
    if a.is_square() && a.hermitian_deviation() <= HERMITIAN_TOL {
        eigh_unchecked(&a.hermitian_part()).eigenvalues.iter().map(|l| l.abs()).sum()
    } else {
        singular_values(a).iter().sum()
    }
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(mismatch(format!(
            "trace distance of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(0.5 * trace_norm(&(a - b)))
}

/// Closed form `½‖|ψ⟩⟨ψ| − |φ⟩⟨φ|‖₁` for arbitrary (unnormalized) vectors.
pub fn td_pure(psi: &CMatrix, phi: &CMatrix) -> Result<f64> {
    let pp = psi.inner(psi)?.re;
    let ff = phi.inner(phi)?.re;
    let pf = psi.inner(phi)?.norm_sqr();
    let avg = 0.5 * (pp + ff);
    Ok((avg * avg - pf).max(0.0).sqrt())
}

/// Optimal two-outcome measurement for the difference `a − b`.
#[derive(Clone, Debug)]
pub struct Helstrom {
    /// Projector onto the non-negative eigenspace (ties included).
    pub positive: CMatrix,
    /// Projector onto the negative eigenspace.
    pub negative: CMatrix,
    /// `Tr(P(a−b)) − Tr(Q(a−b))`.
    pub saturation: f64,
}

pub fn helstrom_pair(a: &CMatrix, b: &CMatrix) -> Result<Helstrom> {
    if a.rows() != b.rows() || a.cols() != b.cols() || !a.is_square() {
        return Err(mismatch("helstrom_pair needs square matrices of equal size"));
    }
    let diff = a - b;
    let sd = spectral_decompose(&diff)?;
    let positive = sd.map_eigenvalues(|l| if l >= PSD_FLOOR { 1.0 } else { 0.0 });
    let negative = sd.map_eigenvalues(|l| if l >= PSD_FLOOR { 0.0 } else { 1.0 });
    let saturation = (positive.matmul(&diff)?.trace() - negative.matmul(&diff)?.trace()).re;
    Ok(Helstrom { positive, negative, saturation })
}

/// Real part of `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.rows();
    let m = a.cols();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..m {
            acc += a.get(i, j) * b.get(j, i);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn diagonal_spectrum() {
        let sd = spectral_decompose(&CMatrix::diag_real(&[2.0, 3.0])).unwrap();
        assert_eq!(sd.eigenvalues(), &[2.0, 3.0]);
        assert!(sd.projector(0).max_abs_diff(&CMatrix::basis_projector(2, 0)) < 1e-15);
        assert!(sd.projector(1).max_abs_diff(&CMatrix::basis_projector(2, 1)) < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = CMatrix::new(2, 2, vec![r(0.), r(1.), r(1.), r(0.)]).unwrap();
        let sd = spectral_decompose(&x).unwrap();
        assert!((sd.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((sd.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let plus = CMatrix::from_fn(2, 2, |_, _| r(0.5));
        assert!(sd.projector(1).max_abs_diff(&plus) < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = CMatrix::new(2, 2, vec![r(0.), r(1.), r(0.), r(0.)]).unwrap();
        assert!(matches!(spectral_decompose(&a), Err(Error::NotHermitian(_))));
        assert!(helstrom_pair(&a, &CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn footnote_instance() {
        let a = CMatrix::basis_projector(2, 0);
        let b = a.scale_real(0.5);
        assert_eq!(trace_norm(&(&a - &b)), 0.5);
        assert_eq!(trace_distance(&a, &b).unwrap(), 0.25);
    }

    #[test]
    fn zero_norm() {
        assert_eq!(trace_norm(&CMatrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn plus_minus_distance() {
        let s = 0.5;
        let plus = CMatrix::from_fn(2, 2, |_, _| r(s));
        let minus = CMatrix::new(2, 2, vec![r(s), r(-s), r(-s), r(s)]).unwrap();
        assert!((trace_distance(&plus, &minus).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn td_pure_examples() {
        let k0 = CMatrix::ket(2, 0);
        let k1 = CMatrix::ket(2, 1);
        let plus = CMatrix::column(&[r(0.5f64.sqrt()), r(0.5f64.sqrt())]);
        assert!((td_pure(&k0, &k1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(td_pure(&k0, &k0).unwrap(), 0.0);
        assert!((td_pure(&k0, &plus).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(td_pure(&k0, &CMatrix::ket(3, 0)).is_err());
    }

    #[test]
    fn helstrom_examples() {
        let p0 = CMatrix::basis_projector(2, 0);
        let p1 = CMatrix::basis_projector(2, 1);
        let h = helstrom_pair(&p0, &p1).unwrap();
        assert!(h.positive.max_abs_diff(&p0) < 1e-15);
        assert!(h.negative.max_abs_diff(&p1) < 1e-15);
        assert!((h.saturation - 2.0).abs() < 1e-14);
        let same = helstrom_pair(&p0, &p0).unwrap();
        assert!(same.positive.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        assert_eq!(same.saturation, 0.0);
    }

    #[test]
    fn rectangular_norm_uses_svd() {
        let a = CMatrix::from_real(1, 2, &[3.0, 4.0]).unwrap();
        assert!((trace_norm(&a) - 5.0).abs() < 1e-12);
    }
}
