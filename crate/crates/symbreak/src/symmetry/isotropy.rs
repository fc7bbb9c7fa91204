//! Isotropy-group detection for weight matrices.
//!
//! The isotropy group of W under S_k×S_d is recovered combinatorially: matrix
//! entries are clustered into value classes at a tolerance, the resulting
//! class matrix is refined by Weisfeiler–Leman color propagation on rows and
//! columns, and a backtracking search over color-respecting bijections
//! enumerates a strong generating set along a stabilizer chain. The chain
//! yields the exact group order as a product of orbit sizes, which avoids
//! materializing the group element by element.
//!
//! Cells are interleaved row/column in the chain. Ordering all rows before
//! all columns would let highly symmetric inputs (circulants in particular)
//! drive the search through factorially many row bijections before any
//! column constraint prunes them.

use super::{act, perm_group_order, PermPair, Permutation, SymmetryError};
use crate::tensor::WeightMatrix;
use std::collections::BTreeMap;

/// Default entry-clustering tolerance, applied after max-norm scaling.
pub const DEFAULT_ISO_TOL: f64 = 1e-6;

/// Node budget for the backtracking search. Structured inputs stay far below
/// this; adversarial near-symmetric noise trips it and degrades the order to
/// a lower bound instead of hanging.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct IsotropyGroup {
    /// Strong generating set (may be empty for the trivial group).
    pub generators: Vec<PermPair>,
    /// Group order; exact iff `order_exact`.
    pub order: u128,
    /// False only when the node budget was exhausted (order is then a lower
    /// bound from the completed chain prefix).
    pub order_exact: bool,
    /// True when some entry sat within 2·tol of a cluster boundary, so the
    /// value classes (and hence the group) are sensitive to the tolerance.
    pub ambiguous_tolerance: bool,
    /// Human-readable label, e.g. "Δ(S_9×S_2×S_1)".
    pub label: String,
    /// ASCII rendering of the same label, e.g. "D(S9xS2xS1)".
    pub label_ascii: String,
}

impl IsotropyGroup {
    /// True if every generator fixes `w` exactly up to `tol` in max norm.
    pub fn fixes(&self, w: &WeightMatrix, tol: f64) -> Result<bool, SymmetryError> {
        for g in &self.generators {
            let dist = act(g, w)?
                .max_dist(w)
                .expect("acted matrix has the same shape");
            if dist > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// Value classes
// ---------------------------------------------------------------------------

struct Classes {
    /// Class id per cell, row-major; ids ascend with entry value.
    ids: Vec<usize>,
    n_classes: usize,
    /// Mean scaled value per class.
    reps: Vec<f64>,
    ambiguous: bool,
}

fn value_classes(w: &WeightMatrix, tol: f64) -> Classes {
    let n = w.data().len();
    let scale = w.max_abs();
    let scaled: Vec<f64> = if scale > 0.0 {
        w.data().iter().map(|&x| x / scale).collect()
    } else {
        vec![0.0; n]
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scaled[a].total_cmp(&scaled[b]));

    // Single-linkage: a gap larger than tol starts a new class.
    let mut ids = vec![0usize; n];
    let mut reps = Vec::new();
    let mut ambiguous = false;
    let mut class = 0usize;
    let mut sum = scaled[order[0]];
    let mut count = 1usize;
    ids[order[0]] = 0;
    for pair in order.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        let gap = scaled[cur] - scaled[prev];
        if gap > tol {
            reps.push(sum / count as f64);
            if gap < 2.0 * tol {
                ambiguous = true;
            }
            class += 1;
            sum = 0.0;
            count = 0;
        }
        ids[cur] = class;
        sum += scaled[cur];
        count += 1;
    }
    reps.push(sum / count as f64);
    Classes {
        ids,
        n_classes: class + 1,
        reps,
        ambiguous,
    }
}

// ---------------------------------------------------------------------------
// Weisfeiler–Leman refinement
// ---------------------------------------------------------------------------

/// Canonical row/column colors for the class matrix. `forced_rows`, when
/// present, seeds individualized row colors (used by canonical alignment).
/// Color ids are assigned by sorting signatures, so they depend only on the
/// entry classes, never on row/column indices.
fn wl_colors(
    ids: &[usize],
    k: usize,
    d: usize,
    forced_rows: Option<&[u32]>,
) -> (Vec<u32>, Vec<u32>) {
    let mut rc: Vec<u32> = match forced_rows {
        Some(f) => f.to_vec(),
        None => vec![0; k],
    };
    let mut cc: Vec<u32> = vec![0; d];
    loop {
        let mut row_sigs: Vec<(u32, Vec<(u32, usize)>)> = Vec::with_capacity(k);
        for i in 0..k {
            let mut entries: Vec<(u32, usize)> =
                (0..d).map(|j| (cc[j], ids[i * d + j])).collect();
            entries.sort_unstable();
            row_sigs.push((rc[i], entries));
        }
        let mut distinct = row_sigs.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let new_rc: Vec<u32> = row_sigs
            .iter()
            .map(|s| distinct.binary_search(s).unwrap() as u32)
            .collect();

        let mut col_sigs: Vec<(u32, Vec<(u32, usize)>)> = Vec::with_capacity(d);
        for j in 0..d {
            let mut entries: Vec<(u32, usize)> =
                (0..k).map(|i| (new_rc[i], ids[i * d + j])).collect();
            entries.sort_unstable();
            col_sigs.push((cc[j], entries));
        }
        let mut distinct = col_sigs.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let new_cc: Vec<u32> = col_sigs
            .iter()
            .map(|s| distinct.binary_search(s).unwrap() as u32)
            .collect();

        if new_rc == rc && new_cc == cc {
            return (rc, cc);
        }
        rc = new_rc;
        cc = new_cc;
    }
}

// ---------------------------------------------------------------------------
// Stabilizer-chain search
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
enum Cell {
    Row(usize),
    Col(usize),
}

struct Search<'a> {
    ids: &'a [usize],
    k: usize,
    d: usize,
    rc: Vec<u32>,
    cc: Vec<u32>,
    cells: Vec<Cell>,
    row_img: Vec<Option<usize>>,
    col_img: Vec<Option<usize>>,
    row_used: Vec<bool>,
    col_used: Vec<bool>,
    /// Assignment trail for undo: (cell, image).
    trail: Vec<(Cell, usize)>,
    nodes: u64,
    budget: u64,
    exceeded: bool,
}

impl<'a> Search<'a> {
    fn new(ids: &'a [usize], k: usize, d: usize, rc: Vec<u32>, cc: Vec<u32>, budget: u64) -> Self {
        let mut cells = Vec::with_capacity(k + d);
        let common = k.min(d);
        for t in 0..common {
            cells.push(Cell::Row(t));
            cells.push(Cell::Col(t));
        }
        for t in common..k {
            cells.push(Cell::Row(t));
        }
        for t in common..d {
            cells.push(Cell::Col(t));
        }
        Self {
            ids,
            k,
            d,
            rc,
            cc,
            cells,
            row_img: vec![None; k],
            col_img: vec![None; d],
            row_used: vec![false; k],
            col_used: vec![false; d],
            trail: Vec::with_capacity(k + d),
            nodes: 0,
            budget,
            exceeded: false,
        }
    }

    fn entry(&self, i: usize, j: usize) -> usize {
        self.ids[i * self.d + j]
    }

    fn consistent(&self, cell: Cell, x: usize) -> bool {
        match cell {
            Cell::Row(i) => {
                if self.rc[x] != self.rc[i] {
                    return false;
                }
                for &(c, y) in &self.trail {
                    if let Cell::Col(j) = c {
                        if self.entry(x, y) != self.entry(i, j) {
                            return false;
                        }
                    }
                }
                true
            }
            Cell::Col(j) => {
                if self.cc[x] != self.cc[j] {
                    return false;
                }
                for &(c, y) in &self.trail {
                    if let Cell::Row(i) = c {
                        if self.entry(y, x) != self.entry(i, j) {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    fn assign(&mut self, cell: Cell, x: usize) {
        match cell {
            Cell::Row(i) => {
                self.row_img[i] = Some(x);
                self.row_used[x] = true;
            }
            Cell::Col(j) => {
                self.col_img[j] = Some(x);
                self.col_used[x] = true;
            }
        }
        self.trail.push((cell, x));
    }

    fn unwind_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let (cell, x) = self.trail.pop().unwrap();
            match cell {
                Cell::Row(i) => {
                    self.row_img[i] = None;
                    self.row_used[x] = false;
                }
                Cell::Col(j) => {
                    self.col_img[j] = None;
                    self.col_used[x] = false;
                }
            }
        }
    }

    fn candidates(&self, cell: Cell) -> Vec<usize> {
        match cell {
            Cell::Row(_) => (0..self.k).filter(|&x| !self.row_used[x]).collect(),
            Cell::Col(_) => (0..self.d).filter(|&x| !self.col_used[x]).collect(),
        }
    }

    /// Candidates with the cell's own index first. Completions then fix
    /// everything not forced to move, keeping emitted generator supports
    /// minimal; the labeler relies on supports not straddling independent
    /// blocks.
    fn candidates_identity_first(&self, cell: Cell) -> Vec<usize> {
        let (own, n, used) = match cell {
            Cell::Row(i) => (i, self.k, &self.row_used),
            Cell::Col(j) => (j, self.d, &self.col_used),
        };
        let mut out = Vec::with_capacity(n);
        if !used[own] {
            out.push(own);
        }
        out.extend((0..n).filter(|&x| x != own && !used[x]));
        out
    }

    /// Complete the partial assignment from `pos` onward; on success the
    /// completing assignments stay on the trail.
    fn find_first(&mut self, pos: usize) -> bool {
        if self.exceeded {
            return false;
        }
        if pos == self.cells.len() {
            return true;
        }
        let cell = self.cells[pos];
        for x in self.candidates_identity_first(cell) {
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exceeded = true;
                return false;
            }
            if !self.consistent(cell, x) {
                continue;
            }
            self.assign(cell, x);
            if self.find_first(pos + 1) {
                return true;
            }
            self.unwind_to(self.trail.len() - 1);
        }
        false
    }

    fn current_pair(&self) -> PermPair {
        let row =
            Permutation::from_images(self.row_img.iter().map(|x| x.unwrap()).collect()).unwrap();
        let col =
            Permutation::from_images(self.col_img.iter().map(|x| x.unwrap()).collect()).unwrap();
        PermPair { row, col }
    }

    /// Walk the identity spine; at depth t, count the orbit of cells[t] under
    /// the stabilizer of cells[0..t] and record one generator per non-trivial
    /// orbit point. The product of orbit sizes is the group order.
    fn run(&mut self) -> (Vec<PermPair>, u128) {
        let mut generators = Vec::new();
        let mut order: u128 = 1;
        for pos in 0..self.cells.len() {
            let cell = self.cells[pos];
            let own = match cell {
                Cell::Row(i) => i,
                Cell::Col(j) => j,
            };
            let mut orbit: u128 = 1;
            for x in self.candidates(cell) {
                if x == own {
                    continue;
                }
                self.nodes += 1;
                if self.nodes > self.budget {
                    self.exceeded = true;
                    break;
                }
                if !self.consistent(cell, x) {
                    continue;
                }
                let mark = self.trail.len();
                self.assign(cell, x);
                if self.find_first(pos + 1) {
                    generators.push(self.current_pair());
                    orbit += 1;
                }
                self.unwind_to(mark);
                if self.exceeded {
                    break;
                }
            }
            order = order.saturating_mul(orbit);
            if self.exceeded {
                break;
            }
            // Identity branch: trivially consistent on the identity spine.
            self.assign(cell, own);
        }
        (generators, order)
    }
}

/// Detect the isotropy group of `w` in S_k×S_d at clustering tolerance `tol`,
/// with an explicit node budget for the search.
pub fn isotropy_group_budgeted(w: &WeightMatrix, tol: f64, budget: u64) -> IsotropyGroup {
    let (k, d) = (w.k(), w.d());
    let classes = value_classes(w, tol);
    let (rc, cc) = wl_colors(&classes.ids, k, d, None);
    let mut search = Search::new(&classes.ids, k, d, rc, cc, budget);
    let (generators, order) = search.run();
    let order_exact = !search.exceeded;
    let label = label_isotropy(&generators, order, k, d, false);
    let label_ascii = label_isotropy(&generators, order, k, d, true);
    IsotropyGroup {
        generators,
        order,
        order_exact,
        ambiguous_tolerance: classes.ambiguous,
        label,
        label_ascii,
    }
}

/// Detect the isotropy group of `w` at tolerance `tol` with the default
/// node budget.
pub fn isotropy_group(w: &WeightMatrix, tol: f64) -> IsotropyGroup {
    isotropy_group_budgeted(w, tol, DEFAULT_NODE_BUDGET)
}

// ---------------------------------------------------------------------------
// Labeling
// ---------------------------------------------------------------------------

fn factorial_u128(n: usize) -> u128 {
    let mut f: u128 = 1;
    for i in 2..=n as u128 {
        f = f.saturating_mul(i);
    }
    f
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

enum DiagFactor {
    Sym(usize),
    Custom { gens: Vec<Permutation> },
}

/// Decompose a diagonal subgroup ⟨(σ,σ)⟩ into independent factors: the point
/// set splits into regions (unions of orbits glued by shared generator
/// support), and the group is the direct product of the per-region closures.
/// Returns None if the generators are not all diagonal or the factor orders
/// fail to multiply up to `order` (entangled case: no concise product form).
fn analyze_diagonal(gens: &[PermPair], order: u128, k: usize, d: usize) -> Option<Vec<DiagFactor>> {
    if k != d || gens.iter().any(|g| !g.is_diagonal()) {
        return None;
    }
    let sigma: Vec<&Permutation> = gens
        .iter()
        .map(|g| &g.row)
        .filter(|p| !p.is_identity())
        .collect();
    let mut uf = UnionFind::new(d);
    for s in &sigma {
        for i in 0..d {
            uf.union(i, s.apply(i));
        }
        let sup = s.support();
        for pair in sup.windows(2) {
            uf.union(pair[0], pair[1]);
        }
    }
    let mut regions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..d {
        let root = uf.find(i);
        regions.entry(root).or_default().push(i);
    }
    let mut factors = Vec::new();
    let mut product: u128 = 1;
    for pts in regions.values() {
        if pts.len() == 1 {
            factors.push(DiagFactor::Sym(1));
            continue;
        }
        let h: Vec<Permutation> = sigma
            .iter()
            .filter(|s| s.support().iter().all(|p| pts.contains(p)))
            .map(|s| (*s).clone())
            .collect();
        let h_order = perm_group_order(&h);
        product = product.saturating_mul(h_order);
        if h_order == factorial_u128(pts.len()) {
            factors.push(DiagFactor::Sym(pts.len()));
        } else {
            factors.push(DiagFactor::Custom { gens: h });
        }
    }
    if product != order {
        return None;
    }
    Some(factors)
}

fn format_perm(p: &Permutation, ascii: bool) -> String {
    let _ = ascii;
    p.cycle_string()
}

fn format_factors(factors: &[DiagFactor], ascii: bool) -> String {
    let times = if ascii { "x" } else { "×" };
    let mut syms: Vec<usize> = Vec::new();
    let mut ones = 0usize;
    let mut customs: Vec<String> = Vec::new();
    for f in factors {
        match f {
            DiagFactor::Sym(1) => ones += 1,
            DiagFactor::Sym(n) => syms.push(*n),
            DiagFactor::Custom { gens } => {
                let inner: Vec<String> = gens.iter().map(|g| format_perm(g, ascii)).collect();
                let body = inner.join(", ");
                customs.push(if ascii {
                    format!("<{body}>")
                } else {
                    format!("⟨{body}⟩")
                });
            }
        }
    }
    syms.sort_unstable_by(|a, b| b.cmp(a));
    let mut parts: Vec<String> = syms
        .iter()
        .map(|n| if ascii { format!("S{n}") } else { format!("S_{n}") })
        .collect();
    parts.extend(customs);
    if ones == 1 {
        parts.push(if ascii { "S1".into() } else { "S_1".into() });
    } else if ones > 1 {
        parts.push(if ascii {
            format!("S1^{ones}")
        } else {
            format!("S_1^{ones}")
        });
    }
    parts.join(times)
}

/// Render a human-readable name for the group generated by `gens` inside
/// S_k×S_d. Diagonal Young products become "Δ(S_a×S_b×…)"; diagonal groups
/// with non-symmetric factors keep those factors as generator lists, e.g.
/// "Δ(S_8×⟨(9 10)(11 12)⟩)"; the full product is "S_k×S_d"; anything else
/// falls back to a raw generator listing. `ascii` selects a 7-bit rendering.
pub fn label_isotropy(gens: &[PermPair], order: u128, k: usize, d: usize, ascii: bool) -> String {
    if order == 1 {
        return "1".into();
    }
    if let Some(factors) = analyze_diagonal(gens, order, k, d) {
        let body = format_factors(&factors, ascii);
        return if ascii {
            format!("D({body})")
        } else {
            format!("Δ({body})")
        };
    }
    if order == factorial_u128(k).saturating_mul(factorial_u128(d)) {
        return if ascii {
            format!("S{k}xS{d}")
        } else {
            format!("S_{k}×S_{d}")
        };
    }
    let shown: Vec<String> = gens
        .iter()
        .take(4)
        .map(|g| {
            format!(
                "({}, {})",
                format_perm(&g.row, ascii),
                format_perm(&g.col, ascii)
            )
        })
        .collect();
    let ellipsis = if gens.len() > 4 {
        if ascii {
            ", ..."
        } else {
            ", …"
        }
    } else {
        ""
    };
    if ascii {
        format!("<{}{}>", shown.join(", "), ellipsis)
    } else {
        format!("⟨{}{}⟩", shown.join(", "), ellipsis)
    }
}

/// If the group is exactly a diagonal Young product Δ(S_{b1}×…×S_{bp}),
/// return the block sizes in decreasing order (singletons included).
pub fn young_block_sizes(group: &IsotropyGroup, k: usize, d: usize) -> Option<Vec<usize>> {
    let factors = analyze_diagonal(&group.generators, group.order, k, d)?;
    let mut sizes = Vec::with_capacity(factors.len());
    for f in &factors {
        match f {
            DiagFactor::Sym(n) => sizes.push(*n),
            DiagFactor::Custom { .. } => return None,
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Some(sizes)
}

// ---------------------------------------------------------------------------
// Canonical alignment
// ---------------------------------------------------------------------------

/// Canonicalize `w` under the S_k×S_d action: returns (g, W') with
/// W' = act(g, w). Two matrices on the same group orbit whose entries
/// quantize identically map to the same W', so orbit equality reduces to a
/// matrix comparison. The form is diagonal-heavy: large-magnitude value
/// classes are pulled toward the upper-left.
///
/// Square matrices get the full individualization-refinement treatment. The
/// construction depends only on entry values (all tie-breaks by raw index
/// occur between rows/columns that earlier canonical choices have already
/// made interchangeable), which makes it idempotent. When two rows are
/// WL-equivalent and value-equivalent but not actually automorphic, orbit
/// members can still canonize differently; callers treating equality as
/// orbit equality accept that a merge may then be missed (never invented).
///
/// Non-square matrices are canonicalized only up to column order: rows are
/// sorted lexicographically and the column permutation is the identity.
pub fn canonical_align(w: &WeightMatrix, tol: f64) -> (PermPair, WeightMatrix) {
    let (k, d) = (w.k(), w.d());
    if k != d {
        return row_sorted_align(w);
    }
    let classes = value_classes(w, tol);

    // Place rows one at a time, re-refining after each individualization.
    let mut placed: Vec<usize> = Vec::with_capacity(k);
    let mut is_placed = vec![false; k];
    let mut forced: Vec<u32> = vec![0; k];
    while placed.len() < k {
        let (rc, _) = wl_colors(&classes.ids, k, d, Some(&forced));
        // Candidate color class: largest first, then canonical color id.
        let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for i in 0..k {
            if !is_placed[i] {
                by_color.entry(rc[i]).or_default().push(i);
            }
        }
        let (_, members) = by_color
            .iter()
            .max_by_key(|(color, members)| (members.len(), std::cmp::Reverse(**color)))
            .expect("unplaced rows remain");
        // Within the class: index-free value keys, raw index as final tie.
        let pick = *members
            .iter()
            .min_by(|&&a, &&b| {
                let key = |i: usize| {
                    let mut cls: Vec<usize> = (0..d).map(|j| classes.ids[i * d + j]).collect();
                    cls.sort_unstable();
                    let mut vals: Vec<f64> = (0..d).map(|j| w.entry(i, j)).collect();
                    vals.sort_by(f64::total_cmp);
                    (cls, vals)
                };
                let (ca, va) = key(a);
                let (cb, vb) = key(b);
                ca.cmp(&cb)
                    .then_with(|| {
                        for (x, y) in va.iter().zip(&vb) {
                            let ord = x.total_cmp(y);
                            if ord != std::cmp::Ordering::Equal {
                                return ord;
                            }
                        }
                        std::cmp::Ordering::Equal
                    })
                    .then(a.cmp(&b))
            })
            .expect("class is nonempty");
        is_placed[pick] = true;
        forced[pick] = placed.len() as u32 + 1;
        placed.push(pick);
    }

    // Column order: rank value classes by |representative| descending so the
    // dominant class hugs the diagonal, then compare exact values down the
    // canonical row order.
    let mut class_rank = vec![0usize; classes.n_classes];
    let mut by_mag: Vec<usize> = (0..classes.n_classes).collect();
    by_mag.sort_by(|&a, &b| {
        classes.reps[b]
            .abs()
            .total_cmp(&classes.reps[a].abs())
            .then(classes.reps[a].total_cmp(&classes.reps[b]))
    });
    for (rank, &c) in by_mag.iter().enumerate() {
        class_rank[c] = rank;
    }
    let col_key = |j: usize| -> (Vec<usize>, Vec<f64>) {
        let ranks = placed
            .iter()
            .map(|&i| class_rank[classes.ids[i * d + j]])
            .collect();
        let vals = placed.iter().map(|&i| w.entry(i, j)).collect();
        (ranks, vals)
    };
    let mut col_order: Vec<usize> = (0..d).collect();
    col_order.sort_by(|&a, &b| {
        let (ra, va) = col_key(a);
        let (rb, vb) = col_key(b);
        ra.cmp(&rb)
            .then_with(|| {
                for (x, y) in va.iter().zip(&vb) {
                    let ord = x.total_cmp(y);
                    if ord != std::cmp::Ordering::Equal {
                        return ord;
                    }
                }
                std::cmp::Ordering::Equal
            })
            .then(a.cmp(&b))
    });

    let mut row_img = vec![0usize; k];
    for (pos, &orig) in placed.iter().enumerate() {
        row_img[orig] = pos;
    }
    let mut col_img = vec![0usize; d];
    for (pos, &orig) in col_order.iter().enumerate() {
        col_img[orig] = pos;
    }
    let pair = PermPair {
        row: Permutation::from_images(row_img).unwrap(),
        col: Permutation::from_images(col_img).unwrap(),
    };
    let aligned = act(&pair, w).unwrap();
    (pair, aligned)
}

fn row_sorted_align(w: &WeightMatrix) -> (PermPair, WeightMatrix) {
    let (k, d) = (w.k(), w.d());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        for j in 0..d {
            let ord = w.entry(a, j).total_cmp(&w.entry(b, j));
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        a.cmp(&b)
    });
    let mut row_img = vec![0usize; k];
    for (pos, &orig) in order.iter().enumerate() {
        row_img[orig] = pos;
    }
    let pair = PermPair {
        row: Permutation::from_images(row_img).unwrap(),
        col: Permutation::identity(d),
    };
    let aligned = act(&pair, w).unwrap();
    (pair, aligned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianStream;

    fn random_pair(stream: &mut GaussianStream, k: usize, d: usize) -> PermPair {
        let mut perm = |n: usize| {
            let mut img: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = (stream.next_uniform() * (i + 1) as f64) as usize % (i + 1);
                img.swap(i, j);
            }
            Permutation::from_images(img).unwrap()
        };
        PermPair {
            row: perm(k),
            col: perm(d),
        }
    }

    #[test]
    fn identity_matrix_has_full_diagonal_symmetric_group() {
        let g = isotropy_group(&WeightMatrix::identity(12), 1e-6);
        assert_eq!(g.order, 479_001_600, "|ΔS_12| = 12!");
        assert!(g.order_exact);
        assert!(!g.ambiguous_tolerance);
        assert_eq!(g.label, "Δ(S_12)");
        assert_eq!(g.label_ascii, "D(S12)");
        assert!(g.generators.iter().all(|p| p.is_diagonal()));
        assert!(g.fixes(&WeightMatrix::identity(12), 0.0).unwrap());
        assert_eq!(young_block_sizes(&g, 12, 12), Some(vec![12]));
    }

    #[test]
    fn zero_matrix_has_full_product_group() {
        let g = isotropy_group(&WeightMatrix::zeros(4, 3), 1e-6);
        assert_eq!(g.order, 24 * 6);
        assert_eq!(g.label, "S_4×S_3");
        assert_eq!(g.label_ascii, "S4xS3");
    }

    #[test]
    fn generic_matrix_is_asymmetric() {
        let mut stream = GaussianStream::new(70);
        let w = WeightMatrix::new(6, 6, (0..36).map(|_| stream.next_gaussian()).collect())
            .unwrap();
        let g = isotropy_group(&w, 1e-6);
        assert_eq!(g.order, 1);
        assert_eq!(g.label, "1");
        assert!(g.generators.is_empty());
    }

    #[test]
    fn laplacian_circulant_has_dihedral_isotropy() {
        // Aut of the cycle graph C_20 is dihedral of order 40, acting
        // diagonally; the detected group must contain the shift pair.
        let w = crate::loss::laplacian_circulant(20);
        let g = isotropy_group(&w, 1e-6);
        assert_eq!(g.order, 40);
        assert!(g.order_exact);
        let shift = PermPair::diagonal(Permutation::cyclic_shift(20));
        assert_eq!(act(&shift, &w).unwrap(), w);
        assert!(g.generators.iter().all(|p| act(p, &w).unwrap() == w));
        assert!(g.label.starts_with("Δ⟨") || g.label.starts_with("Δ("));
    }

    #[test]
    fn block_young_structure_is_detected_and_labeled() {
        // Rows and columns in blocks {0..8}, {9,10}, {11}: three value
        // classes arranged so the isotropy is exactly Δ(S_9×S_2×S_1).
        let d = 12;
        let blocks: Vec<usize> = (0..d)
            .map(|i| if i < 9 { 0 } else if i < 11 { 1 } else { 2 })
            .collect();
        let mut w = WeightMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let v = if i == j {
                    1.0 + 0.1 * blocks[i] as f64
                } else if blocks[i] == blocks[j] {
                    -0.05 * (1 + blocks[i]) as f64
                } else {
                    0.01 * (blocks[i] + blocks[j]) as f64
                };
                w.set(i, j, v);
            }
        }
        let g = isotropy_group(&w, 1e-6);
        assert_eq!(g.order, 362_880 * 2, "9!·2!·1!");
        assert_eq!(g.label, "Δ(S_9×S_2×S_1)");
        assert_eq!(g.label_ascii, "D(S9xS2xS1)");
        assert_eq!(young_block_sizes(&g, d, d), Some(vec![9, 2, 1]));
    }

    #[test]
    fn hybrid_label_with_custom_factor() {
        // Block {0..7} fully symmetric; {8,9} and {10,11} linked so only the
        // simultaneous swap (9 10)(11 12) survives.
        let d = 12;
        let mut w = WeightMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let bi = if i < 8 { 0 } else { 1 };
                let bj = if j < 8 { 0 } else { 1 };
                let v = if i == j {
                    if i < 8 {
                        1.0
                    } else if i < 10 {
                        2.0
                    } else {
                        3.0
                    }
                } else if bi == 0 && bj == 0 {
                    0.25
                } else if bi == 1 && bj == 1 {
                    // Couple (8,11) and (9,10) so the pairs must swap together.
                    match (i, j) {
                        (8, 11) | (11, 8) | (9, 10) | (10, 9) => 0.5,
                        _ => 0.75,
                    }
                } else {
                    0.0
                };
                w.set(i, j, v);
            }
        }
        let g = isotropy_group(&w, 1e-6);
        assert_eq!(g.order, 40_320 * 2, "8!·2");
        // The surviving element swaps 8↔9 and 10↔11 (0-based) simultaneously.
        assert_eq!(g.label, "Δ(S_8×⟨(9 10)(11 12)⟩)");
        assert_eq!(g.label_ascii, "D(S8x<(9 10)(11 12)>)");
        assert_eq!(young_block_sizes(&g, d, d), None);
    }

    #[test]
    fn isotropy_is_conjugated_by_the_action() {
        // Iso(act(g, W)) = g·Iso(W)·g⁻¹: same order, and conjugated
        // generators fix the moved matrix.
        let d = 8;
        let blocks: Vec<usize> = (0..d).map(|i| if i < 5 { 0 } else { 1 }).collect();
        let mut w = WeightMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let v = if i == j {
                    2.0
                } else if blocks[i] == blocks[j] {
                    0.5
                } else {
                    -0.25 - 0.1 * blocks[i] as f64
                };
                w.set(i, j, v);
            }
        }
        let base = isotropy_group(&w, 1e-6);
        let mut stream = GaussianStream::new(71);
        for _ in 0..5 {
            let g = random_pair(&mut stream, d, d);
            let moved = act(&g, &w).unwrap();
            let iso = isotropy_group(&moved, 1e-6);
            assert_eq!(iso.order, base.order);
            for h in &base.generators {
                let conj = g.compose(h).compose(&g.inverse());
                assert_eq!(act(&conj, &moved).unwrap(), moved);
            }
        }
    }

    #[test]
    fn noisy_entries_cluster_at_tolerance() {
        let mut w = WeightMatrix::identity(6);
        let mut stream = GaussianStream::new(72);
        for i in 0..6 {
            for j in 0..6 {
                let noise = 1e-9 * stream.next_gaussian();
                w.set(i, j, w.entry(i, j) + noise);
            }
        }
        let g = isotropy_group(&w, 1e-6);
        assert_eq!(g.order, 720, "noise below tol must not break ΔS_6");
        // At a tolerance below the noise floor everything is asymmetric.
        let tight = isotropy_group(&w, 1e-12);
        assert_eq!(tight.order, 1);
    }

    #[test]
    fn ambiguity_flag_trips_near_cluster_boundaries() {
        let w = WeightMatrix::new(1, 3, vec![0.0, 1.0, 1.0 + 1.5e-6]).unwrap();
        let g = isotropy_group(&w, 1e-6);
        assert!(g.ambiguous_tolerance, "gap of 1.5·tol straddles 2·tol rule");
        let w2 = WeightMatrix::new(1, 3, vec![0.0, 0.5, 1.0]).unwrap();
        assert!(!isotropy_group(&w2, 1e-6).ambiguous_tolerance);
    }

    #[test]
    fn budget_exhaustion_reports_inexact_order() {
        let g = isotropy_group_budgeted(&WeightMatrix::zeros(12, 12), 1e-6, 50);
        assert!(!g.order_exact);
        assert!(g.order <= 479_001_600u128 * 479_001_600u128);
    }

    #[test]
    fn canonical_align_is_idempotent() {
        let mut stream = GaussianStream::new(73);
        for _ in 0..10 {
            let w =
                WeightMatrix::new(7, 7, (0..49).map(|_| stream.next_gaussian()).collect())
                    .unwrap();
            let (_, once) = canonical_align(&w, 1e-6);
            let (pair2, twice) = canonical_align(&once, 1e-6);
            assert!(pair2.is_identity(), "second alignment must be trivial");
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn canonical_align_recovers_scrambled_orbit_members() {
        let mut stream = GaussianStream::new(74);
        // Structured matrix with repeated values: the hard case for recovery.
        let d = 9;
        let mut w = WeightMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let v = if i == j {
                    3.0
                } else if (i < 6) == (j < 6) {
                    1.0
                } else {
                    -1.0 + 0.001 * ((i * d + j) % 3) as f64
                };
                w.set(i, j, v);
            }
        }
        let (_, canon) = canonical_align(&w, 1e-6);
        for _ in 0..20 {
            let g = random_pair(&mut stream, d, d);
            let (_, recovered) = canonical_align(&act(&g, &w).unwrap(), 1e-6);
            assert_eq!(recovered, canon);
        }
    }

    #[test]
    fn canonical_align_output_is_the_action_of_the_returned_pair() {
        let mut stream = GaussianStream::new(75);
        let w = WeightMatrix::new(5, 5, (0..25).map(|_| stream.next_gaussian()).collect())
            .unwrap();
        let (pair, aligned) = canonical_align(&w, 1e-6);
        assert_eq!(act(&pair, &w).unwrap(), aligned);
    }

    #[test]
    fn canonical_align_pulls_large_entries_to_the_diagonal() {
        // A permuted identity must canonize back to the identity.
        let mut stream = GaussianStream::new(76);
        for _ in 0..10 {
            let g = random_pair(&mut stream, 8, 8);
            let (_, canon) = canonical_align(&act(&g, &WeightMatrix::identity(8)).unwrap(), 1e-6);
            assert_eq!(canon, WeightMatrix::identity(8));
        }
    }

    #[test]
    fn non_square_align_sorts_rows() {
        let w = WeightMatrix::from_rows(&[
            vec![2.0, 0.0, 1.0],
            vec![-1.0, 5.0, 0.0],
            vec![2.0, -3.0, 4.0],
            vec![-1.0, 2.0, 7.0],
        ])
        .unwrap();
        let (pair, aligned) = canonical_align(&w, 1e-6);
        assert!(pair.col.is_identity());
        for i in 0..3 {
            let a: Vec<f64> = (0..3).map(|j| aligned.entry(i, j)).collect();
            let b: Vec<f64> = (0..3).map(|j| aligned.entry(i + 1, j)).collect();
            assert!(a <= b, "rows must be sorted");
        }
        let (pair2, again) = canonical_align(&aligned, 1e-6);
        assert!(pair2.is_identity());
        assert_eq!(again, aligned);
    }

    #[test]
    fn labels_for_small_young_products() {
        // Exercise the formatter via synthetic generator sets.
        let d = 6;
        let gens = vec![
            PermPair::diagonal(Permutation::transposition(d, 0, 1)),
            PermPair::diagonal(Permutation::transposition(d, 1, 2)),
            PermPair::diagonal(Permutation::transposition(d, 3, 4)),
        ];
        assert_eq!(label_isotropy(&gens, 12, d, d, false), "Δ(S_3×S_2×S_1)");
        assert_eq!(label_isotropy(&gens, 12, d, d, true), "D(S3xS2xS1)");
        // Two singletons collapse to a power.
        let d = 7;
        let gens = vec![
            PermPair::diagonal(Permutation::transposition(d, 0, 1)),
            PermPair::diagonal(Permutation::transposition(d, 1, 2)),
            PermPair::diagonal(Permutation::transposition(d, 3, 4)),
        ];
        assert_eq!(label_isotropy(&gens, 12, d, d, false), "Δ(S_3×S_2×S_1^2)");
        assert_eq!(label_isotropy(&gens, 12, d, d, true), "D(S3xS2xS1^2)");
    }
}
