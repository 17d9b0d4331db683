use std::fmt;
use std::sync::Arc;

use crate::channels::Circuit;
use crate::error::{mismatch, Error, Result};
use crate::qmath::SpaceShape;

/// Probability distribution over key indices `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyDist {
    probs: Vec<f64>,
}

impl KeyDist {
    /// Probabilities must be non-negative and sum to 1 within 1e−12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::KeyDist("empty key alphabet".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| p.is_nan() || **p < 0.0) {
            return Err(Error::KeyDist(format!("key {i} has probability {p}")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::KeyDist(format!("probabilities sum to {s}")));
        }
        Ok(KeyDist { probs })
    }

    pub fn uniform(n: usize) -> Self {
        KeyDist { probs: vec![1.0 / n.max(1) as f64; n.max(1)] }
    }

    /// Joint distribution of independent keys; index `a·|b| + b`.
    pub fn product(a: &KeyDist, b: &KeyDist) -> Self {
        let mut probs = Vec::with_capacity(a.len() * b.len());
        for &pa in &a.probs {
            for &pb in &b.probs {
                probs.push(pa * pb);
            }
        }
        KeyDist { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs[k]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Keys with positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&k| self.probs[k] > 0.0).collect()
    }
}

type Generator = dyn Fn(usize) -> Result<Circuit> + Send + Sync;

/// Channel family indexed by key, generated on demand.
#[derive(Clone)]
pub struct KeyedFamily {
    len: usize,
    in_shape: SpaceShape,
    out_shape: SpaceShape,
    gen: Arc<Generator>,
}

impl fmt::Debug for KeyedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyedFamily")
            .field("len", &self.len)
            .field("in", &self.in_shape.dims())
            .field("out", &self.out_shape.dims())
            .finish()
    }
}

impl KeyedFamily {
    pub fn new(
        len: usize,
        in_shape: SpaceShape,
        out_shape: SpaceShape,
        gen: impl Fn(usize) -> Result<Circuit> + Send + Sync + 'static,
    ) -> Self {
        KeyedFamily { len, in_shape, out_shape, gen: Arc::new(gen) }
    }

    /// Same channel for every key.
    pub fn constant(len: usize, c: Circuit) -> Self {
        let (i, o) = (c.in_shape().clone(), c.out_shape().clone());
        KeyedFamily::new(len, i, o, move |_| Ok(c.clone()))
    }

    /// One stored circuit per key.
    pub fn from_circuits(circuits: Vec<Circuit>) -> Result<Self> {
        let first = circuits.first().ok_or_else(|| Error::KeyDist("empty keyed family".into()))?;
        let (i, o) = (first.in_shape().clone(), first.out_shape().clone());
        for (k, c) in circuits.iter().enumerate() {
            if c.in_shape().dims() != i.dims() || c.out_shape().dims() != o.dims() {
                return Err(mismatch(format!("keyed channel {k} has a different shape")));
            }
        }
        let circuits = Arc::new(circuits);
        Ok(KeyedFamily::new(circuits.len(), i, o, move |k| Ok(circuits[k].clone())))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn in_shape(&self) -> &SpaceShape {
        &self.in_shape
    }

    pub fn out_shape(&self) -> &SpaceShape {
        &self.out_shape
    }

    pub fn get(&self, k: usize) -> Result<Circuit> {
        if k >= self.len {
            return Err(Error::IndexOutOfRange(format!("key {k} of {}", self.len)));
        }
        let c = (self.gen)(k)?;
        c.with_in_shape(self.in_shape.clone())?.with_out_shape(self.out_shape.clone())
    }

    /// `g_k ∘ self_k` for every key.
    pub fn then(&self, g: &KeyedFamily) -> Result<KeyedFamily> {
        if self.len != g.len || self.out_shape.dims() != g.in_shape.dims() {
            return Err(mismatch("keyed composition with incompatible families"));
        }
        let (a, b) = (self.clone(), g.clone());
        Ok(KeyedFamily::new(self.len, self.in_shape.clone(), g.out_shape.clone(), move |k| b.get(k)?.after(&a.get(k)?)))
    }

    /// `c ∘ self_k` for a fixed channel `c`.
    pub fn then_fixed(&self, c: &Circuit) -> Result<KeyedFamily> {
        self.then(&KeyedFamily::constant(self.len, c.clone()))
    }

    /// `self_k ∘ c` for a fixed channel `c`.
    pub fn after_fixed(&self, c: &Circuit) -> Result<KeyedFamily> {
        KeyedFamily::constant(self.len, c.clone()).then(self)
    }

    /// Reindexes: key `k` of the result uses key `map(k)` of `self`.
    pub fn reindex(&self, len: usize, map: impl Fn(usize) -> usize + Send + Sync + 'static) -> KeyedFamily {
        let a = self.clone();
        KeyedFamily::new(len, self.in_shape.clone(), self.out_shape.clone(), move |k| a.get(map(k)))
    }

    /// `self_{k / |g|} ⊗ g_{k mod |g|}` over the product key set.
    pub fn tensor(&self, g: &KeyedFamily) -> KeyedFamily {
        let (a, b) = (self.clone(), g.clone());
        let n2 = g.len;
        KeyedFamily::new(
            self.len * g.len,
            self.in_shape.concat(&g.in_shape),
            self.out_shape.concat(&g.out_shape),
            move |k| Ok(a.get(k / n2)?.tensor(&b.get(k % n2)?)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_dist_validation() {
        assert!(KeyDist::new(vec![0.5, 0.4]).is_err());
        assert!(KeyDist::new(vec![1.5, -0.5]).is_err());
        assert!(KeyDist::new(vec![]).is_err());
        assert!(KeyDist::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn product_indexing() {
        let a = KeyDist::new(vec![0.25, 0.75]).unwrap();
        let b = KeyDist::uniform(3);
        let p = KeyDist::product(&a, &b);
        assert_eq!(p.len(), 6);
        assert!((p.prob(3 + 2) - 0.25).abs() < 1e-15);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn family_range_check() {
        let f = KeyedFamily::constant(2, Circuit::identity(SpaceShape::single("m", 2)));
        assert!(f.get(1).is_ok());
        assert!(f.get(2).is_err());
    }
}
