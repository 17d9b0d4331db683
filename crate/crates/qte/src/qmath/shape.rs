use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One tensor factor of a space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
    #[serde(default)]
    pub classical: bool,
}

impl Factor {
    pub fn quantum(label: impl Into<String>, dim: usize) -> Self {
        Factor { label: label.into(), dim, classical: false }
    }

    pub fn classical(label: impl Into<String>, dim: usize) -> Self {
        Factor { label: label.into(), dim, classical: true }
    }
}

/// Ordered, labeled tensor factorization of a Hilbert space.
///
/// Labels are only descriptive; every operation addresses factors by position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "Vec<Factor>", into = "Vec<Factor>")]
pub struct SpaceShape {
    factors: Vec<Factor>,
}

impl TryFrom<Vec<Factor>> for SpaceShape {
    type Error = Error;
    fn try_from(factors: Vec<Factor>) -> Result<Self> {
        SpaceShape::new(factors)
    }
}

impl From<SpaceShape> for Vec<Factor> {
    fn from(s: SpaceShape) -> Self {
        s.factors
    }
}

impl SpaceShape {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(Error::InvalidShape(format!("factor '{}' has dimension 0", f.label)));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::InvalidShape(format!("duplicate label '{}'", f.label)));
            }
        }
        Ok(SpaceShape { factors })
    }

    /// The one-dimensional space with no factors.
    pub fn trivial() -> Self {
        SpaceShape { factors: Vec::new() }
    }

    pub fn single(label: &str, dim: usize) -> Self {
        SpaceShape { factors: vec![Factor::quantum(label, dim.max(1))] }
    }

    pub fn classical(label: &str, dim: usize) -> Self {
        SpaceShape { factors: vec![Factor::classical(label, dim.max(1))] }
    }

    /// `n` qubit factors labeled `prefix0 .. prefix{n-1}`.
    pub fn qubits(prefix: &str, n: usize) -> Self {
        SpaceShape {
            factors: (0..n).map(|i| Factor::quantum(format!("{prefix}{i}"), 2)).collect(),
        }
    }

    /// Shape with anonymous factors of the given dimensions.
    pub fn from_dims(prefix: &str, dims: &[usize]) -> Result<Self> {
        SpaceShape::new(
            dims.iter().enumerate().map(|(i, &d)| Factor::quantum(format!("{prefix}{i}"), d)).collect(),
        )
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn is_single_classical(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].classical
    }

    /// Appends a factor, renaming it with primes if its label is taken.
    pub fn push(&mut self, mut f: Factor) {
        while self.factors.iter().any(|g| g.label == f.label) {
            f.label.push('\'');
        }
        self.factors.push(f);
    }

    /// Tensor product of shapes; clashing labels get primes.
    pub fn concat(&self, other: &SpaceShape) -> SpaceShape {
        let mut out = self.clone();
        for f in &other.factors {
            out.push(f.clone());
        }
        out
    }

    pub fn select(&self, idx: &[usize]) -> Result<SpaceShape> {
        let mut out = SpaceShape::trivial();
        for &i in idx {
            let f = self
                .factors
                .get(i)
                .ok_or_else(|| Error::IndexOutOfRange(format!("factor {i} of {}", self.len())))?;
            out.push(f.clone());
        }
        Ok(out)
    }

    /// Marks every factor as classical.
    pub fn into_classical(mut self) -> Self {
        for f in &mut self.factors {
            f.classical = true;
        }
        self
    }

    pub fn relabel(mut self, prefix: &str) -> Self {
        let n = self.factors.len();
        for (i, f) in self.factors.iter_mut().enumerate() {
            f.label = if n == 1 { prefix.to_string() } else { format!("{prefix}{i}") };
        }
        self
    }
}

/// Factor permutation in one-line notation: factor `i` moves to position `image[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    /// Builds from 1-based one-line notation, e.g. `[2, 3, 1]`.
    pub fn one_line(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut image = Vec::with_capacity(n);
        for &p in images {
            if p == 0 || p > n || seen[p - 1] {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection on 1..={n}")));
            }
            seen[p - 1] = true;
            image.push(p - 1);
        }
        Ok(Permutation { image })
    }

    /// Builds from 0-based images.
    pub fn from_images(image: Vec<usize>) -> Result<Self> {
        let one: Vec<usize> = image.iter().map(|&i| i + 1).collect();
        Permutation::one_line(&one)
    }

    pub fn identity(n: usize) -> Self {
        Permutation { image: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// 0-based image of position `i`.
    pub fn image(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    pub fn to_one_line(&self) -> Vec<usize> {
        self.image.iter().map(|&i| i + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &p) in self.image.iter().enumerate() {
            inv[p] = i;
        }
        Permutation { image: inv }
    }

    /// Rearranges `items` so that `items[i]` ends up at `image[i]`.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        assert_eq!(items.len(), self.image.len(), "permutation length mismatch");
        let mut out: Vec<Option<T>> = vec![None; items.len()];
        for (i, it) in items.iter().enumerate() {
            out[self.image[i]] = Some(it.clone());
        }
        out.into_iter().map(|x| x.expect("bijection")).collect()
    }

    /// Lifts a permutation of groups to a permutation of the individual
    /// members, where group `g` holds `sizes[g]` consecutive members.
    pub fn expand(&self, sizes: &[usize]) -> Permutation {
        assert_eq!(sizes.len(), self.image.len());
        let new_order = self.apply(&(0..sizes.len()).collect::<Vec<_>>());
        // start offset of each group in the output
        let mut out_start = vec![0; sizes.len()];
        let mut acc = 0;
        for &g in &new_order {
            out_start[g] = acc;
            acc += sizes[g];
        }
        let mut image = Vec::with_capacity(acc);
        for (g, &s) in sizes.iter().enumerate() {
            for j in 0..s {
                image.push(out_start[g] + j);
            }
        }
        Permutation { image }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_labels_rejected() {
        let r = SpaceShape::new(vec![Factor::quantum("A", 2), Factor::quantum("A", 3)]);
        assert!(r.is_err());
    }

    #[test]
    fn concat_renames_clashes() {
        let a = SpaceShape::single("C", 4);
        let c = a.concat(&a);
        assert_eq!(c.factors()[1].label, "C'");
        assert_eq!(c.total_dim(), 16);
    }

    #[test]
    fn permutation_moves_factor_i_to_image() {
        let p = Permutation::one_line(&[2, 3, 1]).unwrap();
        assert_eq!(p.apply(&['a', 'b', 'c']), vec!['c', 'a', 'b']);
        assert_eq!(p.inverse().apply(&p.apply(&[1, 2, 3])), vec![1, 2, 3]);
    }

    #[test]
    fn expand_groups() {
        let p = Permutation::one_line(&[2, 1]).unwrap();
        let e = p.expand(&[2, 1]);
        assert_eq!(e.apply(&['a', 'b', 'c']), vec!['c', 'a', 'b']);
    }

    #[test]
    fn bad_permutation() {
        assert!(Permutation::one_line(&[1, 1]).is_err());
        assert!(Permutation::one_line(&[0, 1]).is_err());
    }
}
