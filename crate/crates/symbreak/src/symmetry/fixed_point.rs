//! Fixed-point subspaces M(k,d)^G for named subgroups G ≤ S_k×S_d.
//!
//! The fixed-point subspace of a permutation subgroup is spanned by 0/1
//! indicator matrices of the cell orbits. Bases here are built generically:
//! each named subgroup supplies generators, cell orbits come from a
//! union-find closure, and basis elements are ordered by their smallest
//! cell in row-major order. For Δ(S_d) that yields {I, 𝟙𝟙ᵀ−I}, so restricted
//! coordinates read (ω₁, ω₂) = (diagonal, off-diagonal) as in the captions.

use super::{PermPair, Permutation, SymmetryError};
use crate::tensor::WeightMatrix;

/// Named subgroups with known fixed-point bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubgroupSpec {
    /// Diagonal Young product Δ(S_{b1}×…×S_{bp}) with consecutive blocks;
    /// requires k = d = Σbᵢ. `DeltaYoung(vec![d])` is ΔS_d.
    DeltaYoung(Vec<usize>),
    /// The full product S_k×S_d.
    FullProduct,
    /// Diagonal cyclic group ΔZ_d; requires k = d.
    DeltaCyclic,
}

#[derive(Clone, Debug)]
pub struct FixedPointBasis {
    k: usize,
    d: usize,
    basis: Vec<WeightMatrix>,
    /// Orbit id per cell, row-major; indexes into `basis`.
    orbit_id: Vec<usize>,
    orbit_sizes: Vec<usize>,
    generators: Vec<PermPair>,
}

fn generators_for(spec: &SubgroupSpec, k: usize, d: usize) -> Result<Vec<PermPair>, SymmetryError> {
    match spec {
        SubgroupSpec::DeltaYoung(blocks) => {
            if blocks.is_empty() || blocks.iter().any(|&b| b == 0) {
                return Err(SymmetryError::BadSpec(
                    "Young blocks must be nonempty and positive".into(),
                ));
            }
            let total: usize = blocks.iter().sum();
            if k != d || total != d {
                return Err(SymmetryError::BadSpec(format!(
                    "Δ(Young) needs k = d = Σblocks, got k={k}, d={d}, Σ={total}"
                )));
            }
            let mut gens = Vec::new();
            let mut offset = 0;
            for &b in blocks {
                for t in offset..offset + b - 1 {
                    gens.push(PermPair::diagonal(Permutation::transposition(d, t, t + 1)));
                }
                offset += b;
            }
            Ok(gens)
        }
        SubgroupSpec::FullProduct => {
            let mut gens = Vec::new();
            for t in 0..k.saturating_sub(1) {
                gens.push(PermPair {
                    row: Permutation::transposition(k, t, t + 1),
                    col: Permutation::identity(d),
                });
            }
            for t in 0..d.saturating_sub(1) {
                gens.push(PermPair {
                    row: Permutation::identity(k),
                    col: Permutation::transposition(d, t, t + 1),
                });
            }
            Ok(gens)
        }
        SubgroupSpec::DeltaCyclic => {
            if k != d || d == 0 {
                return Err(SymmetryError::BadSpec(format!(
                    "ΔZ_d needs k = d ≥ 1, got k={k}, d={d}"
                )));
            }
            Ok(vec![PermPair::diagonal(Permutation::cyclic_shift(d))])
        }
    }
}

/// Build the fixed-point basis of `spec` inside M(k,d).
pub fn fixed_point_basis(
    spec: &SubgroupSpec,
    k: usize,
    d: usize,
) -> Result<FixedPointBasis, SymmetryError> {
    FixedPointBasis::from_generators(generators_for(spec, k, d)?, k, d)
}

impl FixedPointBasis {
    /// Build the fixed-point basis of the group generated by `generators`
    /// inside M(k,d). Generators must act on k rows and d columns.
    pub fn from_generators(
        generators: Vec<PermPair>,
        k: usize,
        d: usize,
    ) -> Result<Self, SymmetryError> {
        if k == 0 || d == 0 {
            return Err(SymmetryError::BadSpec("k and d must be positive".into()));
        }
        for g in &generators {
            if g.row.n() != k || g.col.n() != d {
                return Err(SymmetryError::SizeMismatch(format!(
                    "generator acts on {}x{}, matrix space is {}x{}",
                    g.row.n(),
                    g.col.n(),
                    k,
                    d
                )));
            }
        }

        // Cell orbits under the generated group via union-find closure.
        let n = k * d;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        for g in &generators {
            for i in 0..k {
                for j in 0..d {
                    let from = i * d + j;
                    let to = g.row.apply(i) * d + g.col.apply(j);
                    let (a, b) = (find(&mut parent, from), find(&mut parent, to));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }

        // Basis elements ordered by smallest cell; roots are already minima.
        let mut roots: Vec<usize> = Vec::new();
        let mut orbit_id = vec![usize::MAX; n];
        for cell in 0..n {
            let root = find(&mut parent, cell);
            let id = match roots.iter().position(|&r| r == root) {
                Some(p) => p,
                None => {
                    roots.push(root);
                    roots.len() - 1
                }
            };
            orbit_id[cell] = id;
        }
        let dim = roots.len();
        let mut basis = vec![WeightMatrix::zeros(k, d); dim];
        let mut orbit_sizes = vec![0usize; dim];
        for cell in 0..n {
            let id = orbit_id[cell];
            basis[id].data_mut()[cell] = 1.0;
            orbit_sizes[id] += 1;
        }
        Ok(FixedPointBasis {
            k,
            d,
            basis,
            orbit_id,
            orbit_sizes,
            generators,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> &[WeightMatrix] {
        &self.basis
    }

    pub fn generators(&self) -> &[PermPair] {
        &self.generators
    }

    /// Σ coords[t]·B_t. Exact: each cell belongs to exactly one orbit.
    pub fn embed(&self, coords: &[f64]) -> Result<WeightMatrix, SymmetryError> {
        if coords.len() != self.dim() {
            return Err(SymmetryError::SizeMismatch(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                coords.len()
            )));
        }
        let mut w = WeightMatrix::zeros(self.k, self.d);
        for (cell, &id) in self.orbit_id.iter().enumerate() {
            w.data_mut()[cell] = coords[id];
        }
        Ok(w)
    }

    /// Orthogonal projection onto the subspace, in coordinates: the mean of
    /// each orbit. Computed as first + Σ(xᵢ−first)/n so that project∘embed
    /// is the identity bitwise.
    pub fn project(&self, w: &WeightMatrix) -> Result<Vec<f64>, SymmetryError> {
        if w.k() != self.k || w.d() != self.d {
            return Err(SymmetryError::SizeMismatch(format!(
                "matrix {}x{} vs basis {}x{}",
                w.k(),
                w.d(),
                self.k,
                self.d
            )));
        }
        let dim = self.dim();
        let mut first: Vec<Option<f64>> = vec![None; dim];
        let mut dev_sum = vec![0.0f64; dim];
        for (cell, &id) in self.orbit_id.iter().enumerate() {
            let x = w.data()[cell];
            match first[id] {
                None => first[id] = Some(x),
                Some(f) => dev_sum[id] += x - f,
            }
        }
        Ok((0..dim)
            .map(|id| first[id].unwrap() + dev_sum[id] / self.orbit_sizes[id] as f64)
            .collect())
    }

    /// Orthogonal projection of `w` onto the subspace, as a matrix.
    pub fn project_matrix(&self, w: &WeightMatrix) -> Result<WeightMatrix, SymmetryError> {
        self.embed(&self.project(w)?)
    }
}

/// Block sizes of the orbits of the generators' row permutations on
/// {1..k}, sorted descending. This is the invariant the caption labels
/// Δ(S_{b1}×…) encode.
pub fn row_orbit_block_sizes(generators: &[PermPair], k: usize) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for g in generators {
        for i in 0..k.min(g.row.n()) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, g.row.apply(i)));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut sizes = vec![0usize; k];
    for i in 0..k {
        let r = find(&mut parent, i);
        sizes[r] += 1;
    }
    let mut out: Vec<usize> = sizes.into_iter().filter(|&s| s > 0).collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

#[cfg(test)]
mod tests {
    use super::super::act;
    use super::*;
    use crate::rng::GaussianStream;

    #[test]
    fn delta_sd_basis_is_identity_and_complement() {
        let fp = fixed_point_basis(&SubgroupSpec::DeltaYoung(vec![4]), 4, 4).unwrap();
        assert_eq!(fp.dim(), 2);
        assert_eq!(fp.basis()[0], WeightMatrix::identity(4));
        let mut ones_minus_i = WeightMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    ones_minus_i.set(i, j, 1.0);
                }
            }
        }
        assert_eq!(fp.basis()[1], ones_minus_i);
    }

    #[test]
    fn full_product_basis_is_all_ones() {
        let fp = fixed_point_basis(&SubgroupSpec::FullProduct, 3, 5).unwrap();
        assert_eq!(fp.dim(), 1);
        assert!(fp.basis()[0].data().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn young_dimension_formula() {
        // dim = p + #{blocks ≥ 2} + p(p−1).
        for blocks in [vec![3, 2, 1], vec![9, 2, 1], vec![2, 2], vec![5]] {
            let d: usize = blocks.iter().sum();
            let p = blocks.len();
            let big = blocks.iter().filter(|&&b| b >= 2).count();
            let fp = fixed_point_basis(&SubgroupSpec::DeltaYoung(blocks), d, d).unwrap();
            assert_eq!(fp.dim(), p + big + p * (p - 1));
        }
    }

    #[test]
    fn basis_supports_partition_all_cells() {
        let specs: Vec<(SubgroupSpec, usize, usize)> = vec![
            (SubgroupSpec::DeltaYoung(vec![3, 2, 1]), 6, 6),
            (SubgroupSpec::FullProduct, 4, 7),
            (SubgroupSpec::DeltaCyclic, 5, 5),
        ];
        for (spec, k, d) in specs {
            let fp = fixed_point_basis(&spec, k, d).unwrap();
            let mut total = WeightMatrix::zeros(k, d);
            for b in fp.basis() {
                for (t, &x) in b.data().iter().enumerate() {
                    assert!(x == 0.0 || x == 1.0);
                    total.data_mut()[t] += x;
                }
            }
            assert!(
                total.data().iter().all(|&x| x == 1.0),
                "orbits must partition cells for {spec:?}"
            );
        }
    }

    #[test]
    fn basis_matrices_are_invariant_under_generators() {
        let specs: Vec<(SubgroupSpec, usize, usize)> = vec![
            (SubgroupSpec::DeltaYoung(vec![4, 2]), 6, 6),
            (SubgroupSpec::FullProduct, 3, 4),
            (SubgroupSpec::DeltaCyclic, 6, 6),
        ];
        for (spec, k, d) in specs {
            let fp = fixed_point_basis(&spec, k, d).unwrap();
            for g in fp.generators() {
                for b in fp.basis() {
                    assert_eq!(&act(g, b).unwrap(), b);
                }
            }
        }
    }

    #[test]
    fn embed_project_roundtrip_is_exact() {
        let mut stream = GaussianStream::new(80);
        let specs: Vec<(SubgroupSpec, usize, usize)> = vec![
            (SubgroupSpec::DeltaYoung(vec![9, 2, 1]), 12, 12),
            (SubgroupSpec::FullProduct, 4, 4),
            (SubgroupSpec::DeltaCyclic, 7, 7),
        ];
        for (spec, k, d) in specs {
            let fp = fixed_point_basis(&spec, k, d).unwrap();
            let coords: Vec<f64> = (0..fp.dim()).map(|_| stream.next_gaussian()).collect();
            let w = fp.embed(&coords).unwrap();
            let back = fp.project(&w).unwrap();
            assert_eq!(back, coords, "project∘embed must be the identity bitwise");
        }
    }

    #[test]
    fn project_takes_orbit_means() {
        let fp = fixed_point_basis(&SubgroupSpec::DeltaYoung(vec![3]), 3, 3).unwrap();
        let w = WeightMatrix::from_rows(&[
            vec![1.0, 10.0, 20.0],
            vec![30.0, 2.0, 40.0],
            vec![50.0, 60.0, 3.0],
        ])
        .unwrap();
        let coords = fp.project(&w).unwrap();
        assert!((coords[0] - 2.0).abs() < 1e-15);
        assert!((coords[1] - 35.0).abs() < 1e-13);
    }

    #[test]
    fn project_matrix_is_fixed_and_idempotent() {
        let mut stream = GaussianStream::new(81);
        let mut gens: Vec<PermPair> = (0..3)
            .map(|t| PermPair::diagonal(Permutation::transposition(5, t, t + 1)))
            .collect();
        gens.push(PermPair {
            row: Permutation::transposition(5, 3, 4),
            col: Permutation::identity(5),
        });
        let fp = FixedPointBasis::from_generators(gens, 5, 5).unwrap();
        let data: Vec<f64> = (0..25).map(|_| stream.next_gaussian()).collect();
        let w = WeightMatrix::new(5, 5, data).unwrap();
        let p = fp.project_matrix(&w).unwrap();
        for g in fp.generators() {
            assert_eq!(act(g, &p).unwrap(), p, "projection must be fixed");
        }
        assert_eq!(fp.project_matrix(&p).unwrap(), p, "projection is idempotent");
    }

    #[test]
    fn row_orbit_block_sizes_from_generators() {
        let gens: Vec<PermPair> = (0..2)
            .map(|t| PermPair::diagonal(Permutation::transposition(5, t, t + 1)))
            .collect();
        assert_eq!(row_orbit_block_sizes(&gens, 5), vec![3, 1, 1]);
        let row_only = vec![PermPair {
            row: Permutation::transposition(5, 3, 4),
            col: Permutation::identity(5),
        }];
        assert_eq!(row_orbit_block_sizes(&row_only, 5), vec![2, 1, 1, 1]);
        assert_eq!(row_orbit_block_sizes(&[], 4), vec![1, 1, 1, 1]);
    }

    #[test]
    fn delta_cyclic_basis_is_circulant_diagonals() {
        let d = 5;
        let fp = fixed_point_basis(&SubgroupSpec::DeltaCyclic, d, d).unwrap();
        assert_eq!(fp.dim(), d);
        for (t, b) in fp.basis().iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    let expect = if (i + t) % d == j { 1.0 } else { 0.0 };
                    assert_eq!(b.entry(i, j), expect, "B_{t} at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn orbits_match_brute_force_group_closure() {
        // Δ(S_2×S_1) in M(3,3): the group is {id, (0 1) diagonal}. Enumerate
        // cell orbits directly and compare supports.
        let fp = fixed_point_basis(&SubgroupSpec::DeltaYoung(vec![2, 1]), 3, 3).unwrap();
        let swap = PermPair::diagonal(Permutation::transposition(3, 0, 1));
        let elements = [PermPair::identity(3, 3), swap];
        let mut seen = vec![false; 9];
        let mut orbits: Vec<Vec<usize>> = Vec::new();
        for cell in 0..9 {
            if seen[cell] {
                continue;
            }
            let (i, j) = (cell / 3, cell % 3);
            let mut orbit: Vec<usize> = elements
                .iter()
                .map(|g| g.row.apply(i) * 3 + g.col.apply(j))
                .collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &c in &orbit {
                seen[c] = true;
            }
            orbits.push(orbit);
        }
        assert_eq!(fp.dim(), orbits.len());
        for (b, orbit) in fp.basis().iter().zip(&orbits) {
            let support: Vec<usize> = (0..9).filter(|&c| b.data()[c] == 1.0).collect();
            assert_eq!(&support, orbit);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(fixed_point_basis(&SubgroupSpec::DeltaYoung(vec![2, 2]), 5, 5).is_err());
        assert!(fixed_point_basis(&SubgroupSpec::DeltaYoung(vec![3]), 3, 4).is_err());
        assert!(fixed_point_basis(&SubgroupSpec::DeltaYoung(vec![]), 0, 0).is_err());
        assert!(fixed_point_basis(&SubgroupSpec::DeltaCyclic, 3, 4).is_err());
    }
}
