//! Seeded random matrices. Every generator takes the RNG explicitly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::matrix::{CMatrix, C64};

pub type AuditRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> AuditRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Derives an independent stream for sub-task `index` of a seeded run.
pub fn substream(seed: u64, index: u64) -> AuditRng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(index.wrapping_add(1));
    r
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Isometry `cols → rows` (rows ≥ cols) from the QR factorization of a
/// Gaussian matrix, with the phases of R's diagonal absorbed into Q.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = gaussian_matrix(rng, rows, cols).to_nalgebra();
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    CMatrix::from_fn(rows, cols, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q[(i, j)] * phase
    })
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    random_isometry(rng, dim, dim)
}

/// Random unit vector as a column.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let v = gaussian_matrix(rng, dim, 1);
    let n = v.frobenius_norm();
    v.scale_real(1.0 / n)
}

/// Density operator `G G† / Tr(G G†)` with Gaussian `G` of the given rank.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> CMatrix {
    let g = gaussian_matrix(rng, dim, rank.max(1));
    let rho = g.matmul_adj(&g).expect("square");
    let t = rho.trace().re;
    rho.scale_real(1.0 / t).hermitian_part()
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    gaussian_matrix(rng, dim, dim).hermitian_part()
}

/// Random channel given by `n_kraus` blocks of a random isometry.
pub fn random_kraus_ops<R: Rng + ?Sized>(rng: &mut R, din: usize, dout: usize, n_kraus: usize) -> Vec<CMatrix> {
    let v = random_isometry(rng, dout * n_kraus, din);
    (0..n_kraus).map(|k| v.block(k * dout, 0, dout, din)).collect()
}

/// Random probability vector (normalized exponentials).
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isometry_is_isometric() {
        let mut rng = rng_from_seed(7);
        let v = random_isometry(&mut rng, 6, 3);
        let g = v.adjoint().matmul(&v).unwrap();
        assert!(g.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn density_has_unit_trace() {
        let mut rng = rng_from_seed(3);
        let rho = random_density(&mut rng, 5, 2);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.hermitian_deviation() == 0.0);
    }

    #[test]
    fn kraus_ops_sum_to_identity() {
        let mut rng = rng_from_seed(11);
        let ks = random_kraus_ops(&mut rng, 3, 2, 4);
        let mut s = CMatrix::zeros(3, 3);
        for k in &ks {
            s += &k.adjoint().matmul(k).unwrap();
        }
        assert!(s.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn same_seed_same_stream() {
        let a = gaussian_matrix(&mut rng_from_seed(5), 2, 2);
        let b = gaussian_matrix(&mut rng_from_seed(5), 2, 2);
        assert_eq!(a.data(), b.data());
        let c = gaussian_matrix(&mut substream(5, 1), 2, 2);
        assert_ne!(a.data(), c.data());
    }
}
