//! The S_k×S_d action on M(k,d): permutations, the group action, isotropy
//! detection and labeling, canonical alignment, and fixed-point subspaces.

mod fixed_point;
mod isotropy;
mod perm_group;

pub use fixed_point::{fixed_point_basis, row_orbit_block_sizes, FixedPointBasis, SubgroupSpec};
pub use isotropy::{
    canonical_align, isotropy_group, isotropy_group_budgeted, label_isotropy, young_block_sizes,
    IsotropyGroup, DEFAULT_ISO_TOL, DEFAULT_NODE_BUDGET,
};
pub use perm_group::perm_group_order;

use crate::tensor::WeightMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("image array {0:?} is not a bijection")]
    NotBijection(Vec<usize>),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("invalid subgroup spec: {0}")]
    BadSpec(String),
}

/// A permutation of {0..n−1} in one-line notation: `img[i] = π(i)`.
/// Rendered 1-based in cycle notation to match caption conventions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    img: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            img: (0..n).collect(),
        }
    }

    pub fn from_images(img: Vec<usize>) -> Result<Self, SymmetryError> {
        let n = img.len();
        let mut seen = vec![false; n];
        for &x in &img {
            if x >= n || seen[x] {
                return Err(SymmetryError::NotBijection(img));
            }
            seen[x] = true;
        }
        Ok(Self { img })
    }

    /// Transposition (a b) on {0..n−1}.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut img: Vec<usize> = (0..n).collect();
        img.swap(a, b);
        Self { img }
    }

    /// The cycle i ↦ i+1 (mod n).
    pub fn cyclic_shift(n: usize) -> Self {
        Self {
            img: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.img.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.img[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.img
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.img.len()];
        for (i, &x) in self.img.iter().enumerate() {
            inv[x] = i;
        }
        Self { img: inv }
    }

    /// self ∘ other: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n(), other.n());
        Self {
            img: other.img.iter().map(|&x| self.img[x]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Points with π(i) ≠ i.
    pub fn support(&self) -> Vec<usize> {
        self.img
            .iter()
            .enumerate()
            .filter(|&(i, &x)| i != x)
            .map(|(i, _)| i)
            .collect()
    }

    /// Nontrivial cycles, each rotated to start at its minimum, sorted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.img[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut cur = self.img[start];
            while cur != start {
                seen[cur] = true;
                cycle.push(cur);
                cur = self.img[cur];
            }
            out.push(cycle);
        }
        out
    }

    /// 1-based cycle notation, e.g. "(9 10)(11 12)"; "()" for the identity.
    pub fn cycle_string(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".into();
        }
        cycles
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|&i| (i + 1).to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect()
    }
}

/// An element (π, ρ) of S_k×S_d acting on M(k,d) by A ↦ P_π A P_ρᵀ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermPair {
    pub row: Permutation,
    pub col: Permutation,
}

impl PermPair {
    pub fn identity(k: usize, d: usize) -> Self {
        Self {
            row: Permutation::identity(k),
            col: Permutation::identity(d),
        }
    }

    /// The diagonal element (σ, σ).
    pub fn diagonal(sigma: Permutation) -> Self {
        Self {
            row: sigma.clone(),
            col: sigma,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.row.is_identity() && self.col.is_identity()
    }

    pub fn is_diagonal(&self) -> bool {
        self.row == self.col
    }

    pub fn inverse(&self) -> Self {
        Self {
            row: self.row.inverse(),
            col: self.col.inverse(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            row: self.row.compose(&other.row),
            col: self.col.compose(&other.col),
        }
    }
}

/// act((π,ρ), A) = P_π A P_ρᵀ: output entry (i,j) = A(π⁻¹(i), ρ⁻¹(j)).
pub fn act(pair: &PermPair, a: &WeightMatrix) -> Result<WeightMatrix, SymmetryError> {
    if pair.row.n() != a.k() || pair.col.n() != a.d() {
        return Err(SymmetryError::SizeMismatch(format!(
            "pair sizes ({}, {}) vs matrix {}x{}",
            pair.row.n(),
            pair.col.n(),
            a.k(),
            a.d()
        )));
    }
    let mut out = WeightMatrix::zeros(a.k(), a.d());
    // Write A(i,j) to position (π(i), ρ(j)); equivalent and loopable forward.
    for i in 0..a.k() {
        let ti = pair.row.apply(i);
        for j in 0..a.d() {
            out.set(ti, pair.col.apply(j), a.entry(i, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianStream;

    fn random_perm(stream: &mut GaussianStream, n: usize) -> Permutation {
        // Fisher–Yates driven by the uniform stream.
        let mut img: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = (stream.next_uniform() * (i + 1) as f64) as usize % (i + 1);
            img.swap(i, j);
        }
        Permutation::from_images(img).unwrap()
    }

    #[test]
    fn identity_pair_fixes_everything() {
        let a = WeightMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]])
            .unwrap();
        let g = PermPair::identity(3, 2);
        assert_eq!(act(&g, &a).unwrap(), a);
    }

    #[test]
    fn row_swap_on_identity_gives_antidiagonal() {
        let g = PermPair {
            row: Permutation::transposition(2, 0, 1),
            col: Permutation::identity(2),
        };
        let out = act(&g, &WeightMatrix::identity(2)).unwrap();
        assert_eq!(out.data(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn diagonal_pairs_fix_identity_matrix() {
        let mut stream = GaussianStream::new(60);
        for _ in 0..10 {
            let sigma = random_perm(&mut stream, 7);
            let g = PermPair::diagonal(sigma);
            assert_eq!(act(&g, &WeightMatrix::identity(7)).unwrap(), WeightMatrix::identity(7));
        }
    }

    #[test]
    fn action_law_composition() {
        let mut stream = GaussianStream::new(61);
        let a = WeightMatrix::new(4, 5, (0..20).map(|_| stream.next_gaussian()).collect())
            .unwrap();
        for _ in 0..20 {
            let g = PermPair {
                row: random_perm(&mut stream, 4),
                col: random_perm(&mut stream, 5),
            };
            let h = PermPair {
                row: random_perm(&mut stream, 4),
                col: random_perm(&mut stream, 5),
            };
            let lhs = act(&g.compose(&h), &a).unwrap();
            let rhs = act(&g, &act(&h, &a).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn inverse_undoes_action() {
        let mut stream = GaussianStream::new(62);
        let a = WeightMatrix::new(3, 6, (0..18).map(|_| stream.next_gaussian()).collect())
            .unwrap();
        for _ in 0..10 {
            let g = PermPair {
                row: random_perm(&mut stream, 3),
                col: random_perm(&mut stream, 6),
            };
            let back = act(&g.inverse(), &act(&g, &a).unwrap()).unwrap();
            assert_eq!(back, a);
        }
    }

    #[test]
    fn permutation_matrix_convention() {
        // (P_π)_{ij} = 1 iff i = π(j): act moves A(i,·) to row π(i).
        let pi = Permutation::from_images(vec![1, 2, 0]).unwrap();
        let a = WeightMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![3.0, 0.0]])
            .unwrap();
        let g = PermPair {
            row: pi,
            col: Permutation::identity(2),
        };
        let out = act(&g, &a).unwrap();
        assert_eq!(out.entry(1, 0), 1.0);
        assert_eq!(out.entry(2, 0), 2.0);
        assert_eq!(out.entry(0, 0), 3.0);
    }

    #[test]
    fn cycle_notation() {
        let p = Permutation::from_images(vec![1, 0, 3, 2, 4]).unwrap();
        assert_eq!(p.cycle_string(), "(1 2)(3 4)");
        assert_eq!(Permutation::identity(4).cycle_string(), "()");
        let shift = Permutation::cyclic_shift(4);
        assert_eq!(shift.cycle_string(), "(1 2 3 4)");
    }

    #[test]
    fn compose_applies_right_first() {
        let a = Permutation::transposition(3, 0, 1);
        let b = Permutation::cyclic_shift(3);
        // (a∘b)(i) = a(b(i)): b sends 0→1, a sends 1→0.
        assert_eq!(a.compose(&b).apply(0), 0);
        assert_eq!(a.compose(&b).apply(1), 2);
        assert_eq!(a.compose(&b).apply(2), 1);
    }
}
