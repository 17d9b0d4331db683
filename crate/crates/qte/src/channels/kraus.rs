use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::qmath::spectral::eigh_unchecked;
use crate::qmath::{CMatrix, SpaceShape, C64, ZERO};

/// Trace-preservation tolerance for validated channels.
pub const TP_TOL: f64 = 1e-9;
/// Eigen-floor for Choi positivity.
pub const CHOI_FLOOR: f64 = -1e-9;

/// Channel `ρ ↦ Σ K ρ K†` between shaped spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    in_shape: SpaceShape,
    out_shape: SpaceShape,
}

/// Result of [`validate_channel`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `max |Σ K†K − I|` entrywise.
    pub tp_deviation: f64,
    /// Smallest eigenvalue of the Choi matrix.
    pub choi_min_eigenvalue: f64,
    pub valid: bool,
}

impl KrausChannel {
    /// Builds a channel after checking dimensions only; call
    /// [`KrausChannel::validated`] for the CPTP check.
    pub fn new(kraus: Vec<CMatrix>, in_shape: SpaceShape, out_shape: SpaceShape) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus family".into()));
        }
        let (din, dout) = (in_shape.total_dim(), out_shape.total_dim());
        for (i, k) in kraus.iter().enumerate() {
            if k.rows() != dout || k.cols() != din {
                return Err(mismatch(format!(
                    "Kraus operator {i} is {}x{}, expected {dout}x{din}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let kraus = kraus.into_iter().map(CMatrix::strip_shapes).collect();
        Ok(KrausChannel { kraus, in_shape, out_shape })
    }

    /// As [`KrausChannel::new`] but rejects non-CPTP families.
    pub fn validated(kraus: Vec<CMatrix>, in_shape: SpaceShape, out_shape: SpaceShape) -> Result<Self> {
        let c = KrausChannel::new(kraus, in_shape, out_shape)?;
        let d = c.diagnostics();
        if !d.valid {
            return Err(Error::InvalidChannel(format!(
                "trace-preservation deviation {:.3e}, Choi min eigenvalue {:.3e}",
                d.tp_deviation, d.choi_min_eigenvalue
            )));
        }
        Ok(c)
    }

    pub fn identity(shape: SpaceShape) -> Self {
        let d = shape.total_dim();
        KrausChannel { kraus: vec![CMatrix::identity(d)], in_shape: shape.clone(), out_shape: shape }
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn in_shape(&self) -> &SpaceShape {
        &self.in_shape
    }

    pub fn out_shape(&self) -> &SpaceShape {
        &self.out_shape
    }

    pub fn din(&self) -> usize {
        self.in_shape.total_dim()
    }

    pub fn dout(&self) -> usize {
        self.out_shape.total_dim()
    }

    pub fn with_shapes(mut self, in_shape: SpaceShape, out_shape: SpaceShape) -> Result<Self> {
        if in_shape.total_dim() != self.din() || out_shape.total_dim() != self.dout() {
            return Err(mismatch("relabeling must keep dimensions"));
        }
        self.in_shape = in_shape;
        self.out_shape = out_shape;
        Ok(self)
    }

    /// `Σ K† K`.
    pub fn kraus_sum(&self) -> CMatrix {
        let mut s = CMatrix::zeros(self.din(), self.din());
        for k in &self.kraus {
            s += &k.adjoint().matmul(k).expect("Kraus dims checked");
        }
        s
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
    pub fn choi(&self) -> CMatrix {
        let (din, dout) = (self.din(), self.dout());
        let n = din * dout;
        let mut j = CMatrix::zeros(n, n);
        for k in &self.kraus {
            // |K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩
            let v: Vec<C64> = (0..n).map(|idx| k.get(idx % dout, idx / dout)).collect();
            for (r, vr) in v.iter().enumerate() {
                if *vr == ZERO {
                    continue;
                }
                for (c, vc) in v.iter().enumerate() {
                    j.add_at(r, c, vr * vc.conj());
                }
            }
        }
        j
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let tp_deviation = self.kraus_sum().max_abs_diff(&CMatrix::identity(self.din()));
        let choi = self.choi();
        let choi_min_eigenvalue = eigh_unchecked(&choi.hermitian_part()).eigenvalues()[0];
        let valid = tp_deviation <= TP_TOL && choi_min_eigenvalue >= CHOI_FLOOR;
        Diagnostics { tp_deviation, choi_min_eigenvalue, valid }
    }

    /// `Φ(ρ)`; the output carries `out_shape`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.rows() != self.din() || rho.cols() != self.din() {
            return Err(mismatch(format!(
                "channel input dim {} applied to {}x{}",
                self.din(),
                rho.rows(),
                rho.cols()
            )));
        }
        let mut out = CMatrix::zeros(self.dout(), self.dout());
        for k in &self.kraus {
            out += &k.matmul(rho)?.matmul_adj(k)?;
        }
        out.with_shape(self.out_shape.clone())
    }

    /// Adjoint map `O ↦ Σ K† O K`.
    pub fn apply_dual(&self, obs: &CMatrix) -> Result<CMatrix> {
        if obs.rows() != self.dout() || obs.cols() != self.dout() {
            return Err(mismatch("dual map applied to an operator of the wrong size"));
        }
        let mut out = CMatrix::zeros(self.din(), self.din());
        for k in &self.kraus {
            out += &k.adjoint().matmul(obs)?.matmul(k)?;
        }
        Ok(out)
    }

    /// Kraus family of the channel `Δ∘Φ`, dephasing every output factor.
    pub fn dephased_output(&self) -> KrausChannel {
        let dout = self.dout();
        let mut kraus = Vec::with_capacity(self.kraus.len() * dout);
        for k in &self.kraus {
            for y in 0..dout {
                let row = CMatrix::from_fn(dout, self.din(), |r, c| if r == y { k.get(y, c) } else { ZERO });
                if !row.is_zero(0.0) {
                    kraus.push(row);
                }
            }
        }
        if kraus.is_empty() {
            kraus.push(CMatrix::zeros(dout, self.din()));
        }
        KrausChannel { kraus, in_shape: self.in_shape.clone(), out_shape: self.out_shape.clone() }
    }

    /// Max-abs distance between the Choi matrices of `Φ` and `Δ∘Φ`.
    pub fn classicality_residual(&self) -> f64 {
        self.choi().max_abs_diff(&self.dephased_output().choi())
    }

    /// Rebuilds a Kraus family from a Choi matrix (`din·dout` square,
    /// input factor first). Eigenvalues below `1e-13·max` are dropped.
    pub fn from_choi(choi: &CMatrix, in_shape: SpaceShape, out_shape: SpaceShape) -> Result<Self> {
        let (din, dout) = (in_shape.total_dim(), out_shape.total_dim());
        if choi.rows() != din * dout || !choi.is_square() {
            return Err(mismatch("Choi matrix size does not match shapes"));
        }
        let sd = eigh_unchecked(&choi.hermitian_part());
        let top = sd.eigenvalues().iter().fold(0.0f64, |a, &b| a.max(b));
        let mut kraus = Vec::new();
        for (idx, &l) in sd.eigenvalues().iter().enumerate().rev() {
            if l <= 1e-13 * top.max(1e-300) {
                continue;
            }
            let s = l.sqrt();
            let vecs = sd.eigenvectors();
            kraus.push(CMatrix::from_fn(dout, din, |o, i| vecs.get(i * dout + o, idx) * s));
        }
        if kraus.is_empty() {
            kraus.push(CMatrix::zeros(dout, din));
        }
        KrausChannel::new(kraus, in_shape, out_shape)
    }
}

pub fn validate_channel(c: &KrausChannel) -> Diagnostics {
    c.diagnostics()
}

pub fn apply_channel(c: &KrausChannel, rho: &CMatrix) -> Result<CMatrix> {
    c.apply(rho)
}

/// `f ∘ g`: apply `g` first.
pub fn compose_channels(f: &KrausChannel, g: &KrausChannel) -> Result<KrausChannel> {
    if g.dout() != f.din() {
        return Err(mismatch(format!("compose: inner output dim {} vs outer input dim {}", g.dout(), f.din())));
    }
    let mut kraus = Vec::with_capacity(f.kraus.len() * g.kraus.len());
    for a in &f.kraus {
        for b in &g.kraus {
            kraus.push(a.matmul(b)?);
        }
    }
    KrausChannel::new(kraus, g.in_shape.clone(), f.out_shape.clone())
}

/// `f ⊗ g`.
pub fn tensor_channels(f: &KrausChannel, g: &KrausChannel) -> KrausChannel {
    let mut kraus = Vec::with_capacity(f.kraus.len() * g.kraus.len());
    for a in &f.kraus {
        for b in &g.kraus {
            kraus.push(a.kron(b));
        }
    }
    KrausChannel {
        kraus,
        in_shape: f.in_shape.concat(&g.in_shape),
        out_shape: f.out_shape.concat(&g.out_shape),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::random::{random_density, random_kraus_ops, rng_from_seed};

    fn qubit() -> SpaceShape {
        SpaceShape::single("q", 2)
    }

    fn random_channel(seed: u64, din: usize, dout: usize) -> KrausChannel {
        let mut rng = rng_from_seed(seed);
        let ks = random_kraus_ops(&mut rng, din, dout, 3);
        KrausChannel::validated(ks, SpaceShape::single("a", din), SpaceShape::single("b", dout)).unwrap()
    }

    #[test]
    fn identity_has_zero_deviation() {
        let d = KrausChannel::identity(qubit()).diagnostics();
        assert_eq!(d.tp_deviation, 0.0);
        assert!(d.valid);
    }

    #[test]
    fn doubled_identity_violates_tp_by_three() {
        let c = KrausChannel::new(vec![CMatrix::identity(2).scale_real(2.0)], qubit(), qubit()).unwrap();
        let d = validate_channel(&c);
        assert_eq!(d.tp_deviation, 3.0);
        assert!(!d.valid);
        assert!(KrausChannel::validated(c.kraus_ops().to_vec(), qubit(), qubit()).is_err());
    }

    #[test]
    fn dimension_errors() {
        assert!(KrausChannel::new(vec![CMatrix::identity(3)], qubit(), qubit()).is_err());
        assert!(KrausChannel::new(vec![], qubit(), qubit()).is_err());
        assert!(KrausChannel::identity(qubit()).apply(&CMatrix::identity(3)).is_err());
    }

    #[test]
    fn random_channel_preserves_trace() {
        let c = random_channel(1, 3, 2);
        let rho = random_density(&mut rng_from_seed(2), 3, 3);
        let out = c.apply(&rho).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn composition_matches_sequential_apply() {
        let g = random_channel(3, 2, 3);
        let f = random_channel(4, 3, 2);
        let rho = random_density(&mut rng_from_seed(5), 2, 2);
        let fg = compose_channels(&f, &g).unwrap();
        let seq = f.apply(&g.apply(&rho).unwrap()).unwrap();
        assert!(fg.apply(&rho).unwrap().max_abs_diff(&seq) < 1e-10);
        assert!(compose_channels(&g, &g).is_err());
    }

    #[test]
    fn choi_round_trip() {
        let c = random_channel(6, 2, 3);
        let back = KrausChannel::from_choi(&c.choi(), c.in_shape().clone(), c.out_shape().clone()).unwrap();
        assert!(back.choi().max_abs_diff(&c.choi()) < 1e-12);
        assert!(back.diagnostics().valid);
    }
}
