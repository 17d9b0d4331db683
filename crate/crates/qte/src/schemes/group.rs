use crate::channels::permutation_unitary;
use crate::error::{mismatch, Error, Result};
use crate::qmath::CMatrix;

/// Finite group given by its multiplication table on labels `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTable {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl GroupTable {
    /// Validates closure, associativity, a two-sided identity and inverses
    /// exhaustively; violations name a witness.
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::GroupAxiom("empty alphabet".into()));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(mismatch(format!("row {a} of the group table has {} entries", row.len())));
            }
            if let Some(b) = row.iter().position(|&c| c >= n) {
                return Err(Error::GroupAxiom(format!("{a} * {b} = {} is outside the alphabet", row[b])));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::GroupAxiom(format!("associativity fails on ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::GroupAxiom("no two-sided identity".into()))?;
        let mut inverses = Vec::with_capacity(n);
        for (a, row) in table.iter().enumerate() {
            let inv = (0..n)
                .find(|&b| row[b] == identity && table[b][a] == identity)
                .ok_or_else(|| Error::GroupAxiom(format!("element {a} has no inverse")))?;
            inverses.push(inv);
        }
        Ok(GroupTable { table, identity, inverses })
    }

    /// `ℤ/n` under addition.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        GroupTable::new(table).expect("cyclic group")
    }

    /// Cyclic group transported along the labeling `order[i] ↔ i`.
    pub fn cyclic_on(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut pos = vec![usize::MAX; n];
        for (i, &x) in order.iter().enumerate() {
            if x >= n || pos[x] != usize::MAX {
                return Err(Error::Precondition("labeling is not a bijection".into()));
            }
            pos[x] = i;
        }
        let table = (0..n).map(|a| (0..n).map(|b| order[(pos[a] + pos[b]) % n]).collect()).collect();
        GroupTable::new(table)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    /// `U_∗ |a, b⟩ = |a, a ∗ b⟩` on `ℂ^n ⊗ ℂ^n`.
    pub fn coherent_unitary(&self) -> CMatrix {
        let n = self.order();
        permutation_unitary(n * n, |x| {
            let (a, b) = (x / n, x % n);
            a * n + self.op(a, b)
        })
        .expect("left multiplication is a bijection")
    }
}

/// Validation entry point matching the operation-style API.
pub fn group_ops(table: Vec<Vec<usize>>) -> Result<GroupTable> {
    GroupTable::new(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor() {
        let g = GroupTable::cyclic(2);
        assert_eq!(g.op(1, 1), 0);
        assert_eq!(g.inverse(1), 1);
    }

    #[test]
    fn identity_first_in_cyclic_table() {
        let g = GroupTable::cyclic(3);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.op(0, 1), 1);
    }

    #[test]
    fn axiom_witness() {
        let bad = vec![vec![0, 1], vec![1, 1]];
        let e = GroupTable::new(bad).unwrap_err();
        assert!(matches!(e, Error::GroupAxiom(_)));
    }

    #[test]
    fn coherent_unitary_is_permutation() {
        let g = GroupTable::cyclic(3);
        let u = g.coherent_unitary();
        assert!(u.adjoint().matmul(&u).unwrap().max_abs_diff(&CMatrix::identity(9)) < 1e-15);
        // |2, 2⟩ ↦ |2, 1⟩
        assert_eq!(u.get(2 * 3 + 1, 2 * 3 + 2).re, 1.0);
    }
}
