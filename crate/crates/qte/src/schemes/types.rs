use std::fmt;
use std::sync::Arc;

use super::keys::{KeyDist, KeyedFamily};
use crate::channels::{Circuit, FactoredOp};
use crate::error::{mismatch, Error, Result};
use crate::qmath::{Factor, SpaceShape};

/// The accept/reject flag space.
pub fn flag_shape() -> SpaceShape {
    SpaceShape::new(vec![Factor::classical("F", 2)]).expect("single factor")
}

fn check_family(name: &str, fam: &KeyedFamily, keys: &KeyDist, input: &SpaceShape, output: &SpaceShape) -> Result<()> {
    if fam.len() != keys.len() {
        return Err(mismatch(format!("{name} family has {} keys, distribution has {}", fam.len(), keys.len())));
    }
    if fam.in_shape().dims() != input.dims() || fam.out_shape().dims() != output.dims() {
        return Err(mismatch(format!(
            "{name} family maps {:?} -> {:?}, expected {:?} -> {:?}",
            fam.in_shape().dims(),
            fam.out_shape().dims(),
            input.dims(),
            output.dims()
        )));
    }
    Ok(())
}

/// Augmented scheme: `E_k : M → C`, `D_k : C → M ⊗ F`.
#[derive(Clone, Debug)]
pub struct AqecmScheme {
    name: String,
    keys: KeyDist,
    msg_shape: SpaceShape,
    cipher_shape: SpaceShape,
    enc: KeyedFamily,
    dec: KeyedFamily,
}

impl AqecmScheme {
    pub fn new(
        name: impl Into<String>,
        keys: KeyDist,
        msg_shape: SpaceShape,
        cipher_shape: SpaceShape,
        enc: KeyedFamily,
        dec: KeyedFamily,
    ) -> Result<Self> {
        check_family("encryption", &enc, &keys, &msg_shape, &cipher_shape)?;
        check_family("decryption", &dec, &keys, &cipher_shape, &msg_shape.concat(&flag_shape()))?;
        let enc = KeyedFamily::new(enc.len(), msg_shape.clone(), cipher_shape.clone(), {
            let e = enc.clone();
            move |k| e.get(k)
        });
        let out = msg_shape.concat(&flag_shape());
        let dec = KeyedFamily::new(dec.len(), cipher_shape.clone(), out, {
            let d = dec.clone();
            move |k| d.get(k)
        });
        Ok(AqecmScheme { name: name.into(), keys, msg_shape, cipher_shape, enc, dec })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn keys(&self) -> &KeyDist {
        &self.keys
    }

    pub fn msg_shape(&self) -> &SpaceShape {
        &self.msg_shape
    }

    pub fn cipher_shape(&self) -> &SpaceShape {
        &self.cipher_shape
    }

    pub fn num_messages(&self) -> usize {
        self.msg_shape.total_dim()
    }

    pub fn enc(&self) -> &KeyedFamily {
        &self.enc
    }

    pub fn dec(&self) -> &KeyedFamily {
        &self.dec
    }

    /// `E_k(|m⟩⟨m|)` as a factored operator.
    pub fn encrypt(&self, k: usize, m: usize, cap: usize) -> Result<FactoredOp> {
        if m >= self.num_messages() {
            return Err(Error::IndexOutOfRange(format!("message {m} of {}", self.num_messages())));
        }
        let mut x = FactoredOp::basis_state(&self.msg_shape.dims(), m).with_cap(cap);
        self.enc.get(k)?.apply(&mut x)?;
        Ok(x)
    }

    /// `D̄_k` applied in place to the cipher wires at `offset`; the
    /// message wires replace them.
    pub fn dbar_at(&self, k: usize, x: &mut FactoredOp, offset: usize) -> Result<()> {
        self.dec.get(k)?.apply_at(x, offset)?;
        x.project(offset + self.msg_shape.len(), 1)
    }
}

/// Scheme without a flag: `D_k : C → M`.
#[derive(Clone, Debug)]
pub struct QecmScheme {
    name: String,
    keys: KeyDist,
    msg_shape: SpaceShape,
    cipher_shape: SpaceShape,
    enc: KeyedFamily,
    dec: KeyedFamily,
}

impl QecmScheme {
    pub fn new(
        name: impl Into<String>,
        keys: KeyDist,
        msg_shape: SpaceShape,
        cipher_shape: SpaceShape,
        enc: KeyedFamily,
        dec: KeyedFamily,
    ) -> Result<Self> {
        check_family("encryption", &enc, &keys, &msg_shape, &cipher_shape)?;
        check_family("decryption", &dec, &keys, &cipher_shape, &msg_shape)?;
        Ok(QecmScheme { name: name.into(), keys, msg_shape, cipher_shape, enc, dec })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn keys(&self) -> &KeyDist {
        &self.keys
    }

    pub fn msg_shape(&self) -> &SpaceShape {
        &self.msg_shape
    }

    pub fn cipher_shape(&self) -> &SpaceShape {
        &self.cipher_shape
    }

    pub fn num_messages(&self) -> usize {
        self.msg_shape.total_dim()
    }

    pub fn enc(&self) -> &KeyedFamily {
        &self.enc
    }

    pub fn dec(&self) -> &KeyedFamily {
        &self.dec
    }

    pub fn encrypt(&self, k: usize, m: usize, cap: usize) -> Result<FactoredOp> {
        if m >= self.num_messages() {
            return Err(Error::IndexOutOfRange(format!("message {m} of {}", self.num_messages())));
        }
        let mut x = FactoredOp::basis_state(&self.msg_shape.dims(), m).with_cap(cap);
        self.enc.get(k)?.apply(&mut x)?;
        Ok(x)
    }
}

/// Scheme with revocation: `R : C → R` and keyed verifier `V_k : R → F`.
#[derive(Clone, Debug)]
pub struct QecmrScheme {
    base: QecmScheme,
    rev_shape: SpaceShape,
    rev: Circuit,
    ver: KeyedFamily,
}

impl QecmrScheme {
    pub fn new(base: QecmScheme, rev: Circuit, ver: KeyedFamily) -> Result<Self> {
        if rev.in_shape().dims() != base.cipher_shape.dims() {
            return Err(mismatch("revocation channel must act on the ciphertext space"));
        }
        let rev_shape = rev.out_shape().clone();
        check_family("verification", &ver, &base.keys, &rev_shape, &flag_shape())?;
        Ok(QecmrScheme { base, rev_shape, rev, ver })
    }

    pub fn base(&self) -> &QecmScheme {
        &self.base
    }

    pub fn keys(&self) -> &KeyDist {
        &self.base.keys
    }

    pub fn rev(&self) -> &Circuit {
        &self.rev
    }

    pub fn rev_shape(&self) -> &SpaceShape {
        &self.rev_shape
    }

    pub fn ver(&self) -> &KeyedFamily {
        &self.ver
    }

    /// `V̄_k` applied in place at `offset` (the token wires disappear).
    pub fn vbar_at(&self, k: usize, x: &mut FactoredOp, offset: usize) -> Result<()> {
        self.ver.get(k)?.apply_at(x, offset)?;
        x.project(offset, 1)
    }

    /// Whether every `V_k` equals `V_k ∘ Δ_R` within `tol` (Choi distance).
    pub fn is_certified_deletion(&self, tol: f64, cap: usize) -> Result<bool> {
        let r = self.rev_shape.total_dim();
        let dephase = Circuit::builder(self.rev_shape.clone())
            .classical(&(0..self.rev_shape.len()).collect::<Vec<_>>(), &[r], |x| x)?
            .map(&[0], vec![crate::qmath::CMatrix::identity(r)], &self.rev_shape.dims())?
            .finish(self.rev_shape.clone())?;
        for k in self.keys().support() {
            let v = self.ver.get(k)?;
            let a = v.choi(cap)?;
            let b = v.after(&dephase)?.choi(cap)?;
            if a.max_abs_diff(&b) > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

type Mint = dyn Fn(usize) -> Result<FactoredOp> + Send + Sync;

/// Private-key money: banknotes `mint(k)` on `N`, verifier `V_k : N → F`.
#[derive(Clone)]
pub struct QmScheme {
    name: String,
    keys: KeyDist,
    note_shape: SpaceShape,
    mint: Arc<Mint>,
    ver: KeyedFamily,
}

impl fmt::Debug for QmScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QmScheme")
            .field("name", &self.name)
            .field("keys", &self.keys.len())
            .field("note", &self.note_shape.dims())
            .finish()
    }
}

impl QmScheme {
    pub fn new(
        name: impl Into<String>,
        keys: KeyDist,
        note_shape: SpaceShape,
        mint: impl Fn(usize) -> Result<FactoredOp> + Send + Sync + 'static,
        ver: KeyedFamily,
    ) -> Result<Self> {
        check_family("verification", &ver, &keys, &note_shape, &flag_shape())?;
        Ok(QmScheme { name: name.into(), keys, note_shape, mint: Arc::new(mint), ver })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn keys(&self) -> &KeyDist {
        &self.keys
    }

    pub fn note_shape(&self) -> &SpaceShape {
        &self.note_shape
    }

    pub fn ver(&self) -> &KeyedFamily {
        &self.ver
    }

    pub fn mint(&self, k: usize) -> Result<FactoredOp> {
        let x = (self.mint)(k)?;
        if x.wire_dims() != self.note_shape.dims() {
            return Err(mismatch("minted banknote does not match the banknote shape"));
        }
        Ok(x)
    }

    /// `V̄_k` applied in place at `offset`.
    pub fn vbar_at(&self, k: usize, x: &mut FactoredOp, offset: usize) -> Result<()> {
        self.ver.get(k)?.apply_at(x, offset)?;
        x.project(offset, 1)
    }
}
