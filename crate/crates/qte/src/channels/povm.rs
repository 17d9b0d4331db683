use super::kraus::KrausChannel;
use crate::error::{mismatch, Error, Result};
use crate::qmath::spectral::{eigh_unchecked, psd_sqrt};
use crate::qmath::{CMatrix, SpaceShape, ZERO};

/// Entrywise tolerance for classical-output checks.
pub const CLASSICAL_TOL: f64 = 1e-9;

/// Measurement: one PSD effect per outcome, summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    outcomes: Vec<String>,
    effects: Vec<CMatrix>,
}

impl Povm {
    /// Builds and validates (effects PSD above −1e−10, sum = I within 1e−9).
    pub fn new(outcomes: Vec<String>, effects: Vec<CMatrix>) -> Result<Self> {
        let p = Povm::unchecked(outcomes, effects)?;
        let (sum_dev, min_eig) = p.diagnostics();
        if sum_dev > 1e-9 || min_eig < -1e-10 {
            return Err(Error::InvalidChannel(format!(
                "measurement effects sum deviation {sum_dev:.3e}, min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(p)
    }

    fn unchecked(outcomes: Vec<String>, effects: Vec<CMatrix>) -> Result<Self> {
        if effects.is_empty() || outcomes.len() != effects.len() {
            return Err(mismatch("measurement needs one label per effect"));
        }
        let d = effects[0].rows();
        if effects.iter().any(|e| e.rows() != d || e.cols() != d) {
            return Err(mismatch("measurement effects differ in size"));
        }
        Ok(Povm { outcomes, effects: effects.into_iter().map(CMatrix::strip_shapes).collect() })
    }

    /// Effects labeled `0..n`.
    pub fn indexed(effects: Vec<CMatrix>) -> Result<Self> {
        let labels = (0..effects.len()).map(|i| i.to_string()).collect();
        Povm::new(labels, effects)
    }

    /// Computational-basis projectors.
    pub fn computational(dim: usize) -> Self {
        Povm::indexed((0..dim).map(|i| CMatrix::basis_projector(dim, i)).collect()).expect("projective")
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// `(max |Σ μ − I|, min eigenvalue over effects)`.
    pub fn diagnostics(&self) -> (f64, f64) {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d, d);
        let mut min_eig = f64::INFINITY;
        for e in &self.effects {
            sum += e;
            min_eig = min_eig.min(eigh_unchecked(&e.hermitian_part()).eigenvalues()[0]);
        }
        (sum.max_abs_diff(&CMatrix::identity(d)), min_eig)
    }

    /// Outcome probabilities `Tr(μ(a) ρ)`.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.effects.iter().map(|e| crate::qmath::spectral::trace_product(e, rho).re).collect()
    }

    /// The channel `ρ ↦ Σ_a Tr(μ(a) ρ) |a⟩⟨a|` into a classical register.
    pub fn to_channel(&self, in_shape: SpaceShape) -> Result<KrausChannel> {
        if in_shape.total_dim() != self.dim() {
            return Err(mismatch("measurement dimension does not match input shape"));
        }
        let n = self.effects.len();
        let mut kraus = Vec::new();
        for (a, e) in self.effects.iter().enumerate() {
            let diagonal = (0..e.rows()).all(|r| (0..e.cols()).all(|c| r == c || e.get(r, c) == ZERO));
            if diagonal {
                for i in 0..e.rows() {
                    let w = e.get(i, i).re.max(0.0);
                    if w > 0.0 {
                        let s = w.sqrt();
                        kraus.push(CMatrix::from_fn(n, e.cols(), |r, c| {
                            if r == a && c == i {
                                crate::qmath::C64::new(s, 0.0)
                            } else {
                                ZERO
                            }
                        }));
                    }
                }
            } else {
                let sd = eigh_unchecked(&e.hermitian_part());
                for (j, &l) in sd.eigenvalues().iter().enumerate() {
                    if l <= 0.0 {
                        continue;
                    }
                    let s = l.sqrt();
                    let v = sd.eigenvector(j);
                    kraus.push(CMatrix::from_fn(n, e.cols(), |r, c| if r == a { v.get(c, 0).conj() * s } else { ZERO }));
                }
            }
        }
        KrausChannel::new(kraus, in_shape, SpaceShape::classical("Y", n))
    }
}

fn require_classical_output(c: &KrausChannel) -> Result<()> {
    if !c.out_shape().is_single_classical() {
        return Err(Error::NotClassical("output is not a single classical factor".into()));
    }
    let r = c.classicality_residual();
    if r > CLASSICAL_TOL {
        return Err(Error::NotClassical(format!("Φ differs from Δ∘Φ by {r:.3e}")));
    }
    Ok(())
}

/// The unique measurement `μ_Φ(y) = Σ_i K_i† |y⟩⟨y| K_i` of a
/// classical-output channel.
pub fn povm_of_channel(c: &KrausChannel) -> Result<Povm> {
    require_classical_output(c)?;
    let ny = c.dout();
    let din = c.din();
    let mut effects = vec![CMatrix::zeros(din, din); ny];
    for k in c.kraus_ops() {
        for (y, eff) in effects.iter_mut().enumerate() {
            for r in 0..din {
                let a = k.get(y, r).conj();
                if a == ZERO {
                    continue;
                }
                for s in 0..din {
                    eff.add_at(r, s, a * k.get(y, s));
                }
            }
        }
    }
    let labels = (0..ny).map(|y| y.to_string()).collect();
    let p = Povm::unchecked(labels, effects)?;
    let (dev, _) = p.diagnostics();
    if dev > 1e-9 {
        return Err(Error::InvalidChannel(format!("channel is not trace preserving ({dev:.3e})")));
    }
    Ok(p)
}

/// Coherent gentle measurement: the single-Kraus isometry
/// `V = Σ_y √μ_Φ(y) ⊗ |y⟩` from the input space to input ⊗ outcome.
pub fn cgm_of_channel(c: &KrausChannel) -> Result<KrausChannel> {
    let p = povm_of_channel(c)?;
    let din = c.din();
    let ny = p.len();
    let roots: Vec<CMatrix> = p.effects().iter().map(psd_sqrt).collect::<Result<_>>()?;
    let v = CMatrix::from_fn(din * ny, din, |row, col| roots[row % ny].get(row / ny, col));
    KrausChannel::new(vec![v], c.in_shape().clone(), c.in_shape().concat(c.out_shape()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::structured::{structured_channel, StructuredKind};
    use crate::qmath::tensor::partial_trace_raw;
    use crate::qmath::{td_pure, trace_distance, C64};

    fn qubit() -> SpaceShape {
        SpaceShape::single("q", 2)
    }

    fn plus() -> CMatrix {
        CMatrix::from_fn(2, 2, |_, _| C64::new(0.5, 0.0))
    }

    #[test]
    fn dephase_povm_is_computational() {
        let d = structured_channel(StructuredKind::Dephase { shape: SpaceShape::classical("Y", 2) }).unwrap();
        let d = d.with_shapes(qubit(), SpaceShape::classical("Y", 2)).unwrap();
        let p = povm_of_channel(&d).unwrap();
        assert_eq!(p.effects(), Povm::computational(2).effects());
    }

    #[test]
    fn measure_round_trip() {
        let mu = Povm::indexed(vec![plus(), &CMatrix::identity(2) - &plus()]).unwrap();
        let c = mu.to_channel(qubit()).unwrap();
        let back = povm_of_channel(&c).unwrap();
        for (a, b) in back.effects().iter().zip(mu.effects()) {
            assert!(a.max_abs_diff(b) < 1e-10);
        }
    }

    #[test]
    fn quantum_output_rejected() {
        assert!(matches!(povm_of_channel(&KrausChannel::identity(qubit())), Err(Error::NotClassical(_))));
        let h = CMatrix::from_fn(2, 2, |r, c| C64::new(if r == 1 && c == 1 { -1.0 } else { 1.0 } / 2f64.sqrt(), 0.0));
        let not_classical = KrausChannel::new(vec![h], qubit(), SpaceShape::classical("Y", 2)).unwrap();
        assert!(matches!(povm_of_channel(&not_classical), Err(Error::NotClassical(_))));
    }

    #[test]
    fn cgm_on_certain_outcome_is_undisturbing() {
        let d = Povm::computational(2).to_channel(qubit()).unwrap();
        let v = cgm_of_channel(&d).unwrap();
        let out = v.apply(&CMatrix::basis_projector(2, 0)).unwrap();
        let want = CMatrix::basis_projector(2, 0).kron(&CMatrix::basis_projector(2, 0));
        assert!(out.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn cgm_of_constant_prep_is_identity_tagging() {
        let ks = vec![CMatrix::unit(2, 0, 0), CMatrix::unit(2, 0, 1)];
        let c = KrausChannel::new(ks, qubit(), SpaceShape::classical("Y", 2)).unwrap();
        let p = povm_of_channel(&c).unwrap();
        assert!(p.effects()[0].max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        let v = cgm_of_channel(&c).unwrap();
        let rho = plus();
        let out = v.apply(&rho).unwrap();
        assert!(out.max_abs_diff(&rho.kron(&CMatrix::basis_projector(2, 0))) < 1e-12);
    }

    #[test]
    fn cgm_plus_equality_case() {
        let d = Povm::computational(2).to_channel(qubit()).unwrap();
        let v = cgm_of_channel(&d).unwrap();
        let rho = plus();
        let out = v.apply(&rho).unwrap();
        let target = rho.kron(&CMatrix::basis_projector(2, 0));
        let dist = trace_distance(&out, &target).unwrap();
        let p0 = d.apply(&rho).unwrap().get(0, 0).re;
        let bound = (1.0 - p0 * p0).sqrt();
        assert!((dist - 3f64.sqrt() / 2.0).abs() < 1e-9);
        assert!((bound - 3f64.sqrt() / 2.0).abs() < 1e-9);
        // brute force: the output is the Bell-like pure state (|00⟩+|11⟩)/√2
        let bell = CMatrix::column(&[C64::new(0.5f64.sqrt(), 0.0), ZERO, ZERO, C64::new(0.5f64.sqrt(), 0.0)]);
        let plus0 = CMatrix::column(&[C64::new(0.5f64.sqrt(), 0.0), ZERO, C64::new(0.5f64.sqrt(), 0.0), ZERO]);
        let overlap = bell.inner(&plus0).unwrap().norm_sqr();
        assert!((overlap - 0.25).abs() < 1e-15);
        assert!((td_pure(&bell, &plus0).unwrap() - (1.0 - overlap).sqrt()).abs() < 1e-12);
        // marginal of the CGM output on the outcome register is Δ(ρ)
        let marg = partial_trace_raw(&out, &[2, 2], &[false, true]);
        assert!(marg.max_abs_diff(&CMatrix::maximally_mixed(2)) < 1e-12);
    }
}
