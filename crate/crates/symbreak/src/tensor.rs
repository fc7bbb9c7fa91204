//! Dense symmetric tensor arithmetic: rank-1 powers, the τ_n map, and the
//! Frobenius and moment-induced inner products.
//!
//! Tensors are stored densely in lexicographic multi-index order (first
//! index major), so `vec`/`mat` reshapes are the identity on storage. A
//! configurable entry cap guards against accidental d^n blowups; everything
//! the experiments need stays far below the default cap.

use thiserror::Error;

/// Default cap on dense tensor entry counts (d^order).
pub const DEFAULT_ENTRY_CAP: usize = 100_000_000;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("dense tensor with dim {dim} and order {order} would exceed the entry cap {cap}")]
    CapExceeded {
        dim: usize,
        order: usize,
        cap: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("moment tensors must have even order, got {0}")]
    OddOrder(usize),
    #[error("tensor order must be at least 1")]
    ZeroOrder,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Checked d^order with the entry cap.
fn checked_len(dim: usize, order: usize, cap: usize) -> Result<usize, TensorError> {
    let mut len: usize = 1;
    for _ in 0..order {
        len = len
            .checked_mul(dim)
            .filter(|&l| l <= cap)
            .ok_or(TensorError::CapExceeded { dim, order, cap })?;
    }
    Ok(len)
}

/// A k×d real matrix whose rows parameterize rank-1 components.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    k: usize,
    d: usize,
    data: Vec<f64>, // row-major
}

impl WeightMatrix {
    pub fn new(k: usize, d: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        if k == 0 || d == 0 {
            return Err(TensorError::ShapeMismatch(format!(
                "weight matrix must be at least 1x1, got {k}x{d}"
            )));
        }
        if data.len() != k * d {
            return Err(TensorError::ShapeMismatch(format!(
                "expected {k}*{d}={} entries, got {}",
                k * d,
                data.len()
            )));
        }
        Ok(Self { k, d, data })
    }

    pub fn zeros(k: usize, d: usize) -> Self {
        Self {
            k,
            d,
            data: vec![0.0; k * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.data[i * d + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, TensorError> {
        if rows.is_empty() {
            return Err(TensorError::ShapeMismatch("no rows".into()));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(TensorError::ShapeMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.d + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Max-norm distance; `None` on shape mismatch.
    pub fn max_dist(&self, other: &Self) -> Option<f64> {
        if self.k != other.k || self.d != other.d {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
        )
    }

    /// Plain CSV, one row per line, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.k {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:.16e}")).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, TensorError> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Result<Vec<f64>, _> = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| TensorError::Parse(format!("line {}: {e}", lineno + 1)))
                })
                .collect();
            rows.push(row?);
        }
        Self::from_rows(&rows)
    }
}

/// A dense order-n symmetric tensor on ℝ^d, entries in lexicographic
/// multi-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor {
    order: usize,
    dim: usize,
    data: Vec<f64>,
}

impl SymTensor {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Flat offset of a multi-index (first index major).
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn entry(&self, idx: &[usize]) -> f64 {
        self.data[self.flat_index(idx)]
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        if self.order != other.order || self.dim != other.dim {
            return Err(TensorError::ShapeMismatch(format!(
                "order {}/dim {} vs order {}/dim {}",
                self.order, self.dim, other.order, other.dim
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            order: self.order,
            dim: self.dim,
            data,
        })
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Flat CSV with an `order,dim` header line, one entry per line.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{}\n", self.order, self.dim);
        for x in &self.data {
            s.push_str(&format!("{x:.16e}\n"));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, TensorError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| TensorError::Parse("empty tensor file".into()))?;
        let parts: Vec<&str> = header.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(TensorError::Parse("header must be `order,dim`".into()));
        }
        let order: usize = parts[0]
            .parse()
            .map_err(|e| TensorError::Parse(format!("order: {e}")))?;
        let dim: usize = parts[1]
            .parse()
            .map_err(|e| TensorError::Parse(format!("dim: {e}")))?;
        let mut data = Vec::new();
        for line in lines {
            for tok in line.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                data.push(
                    tok.parse::<f64>()
                        .map_err(|e| TensorError::Parse(e.to_string()))?,
                );
            }
        }
        let expect = checked_len(dim, order, usize::MAX)?;
        if data.len() != expect {
            return Err(TensorError::Parse(format!(
                "expected {expect} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { order, dim, data })
    }
}

/// v^{⊗n}: entry(i₁…i_n) = v_{i₁}⋯v_{i_n}.
pub fn rank_one_power(v: &[f64], n: usize) -> Result<SymTensor, TensorError> {
    rank_one_power_with_cap(v, n, DEFAULT_ENTRY_CAP)
}

pub fn rank_one_power_with_cap(v: &[f64], n: usize, cap: usize) -> Result<SymTensor, TensorError> {
    if n == 0 {
        return Err(TensorError::ZeroOrder);
    }
    let d = v.len();
    let len = checked_len(d, n, cap)?;
    // Repeated outer product: after step t the buffer holds v^{⊗t}.
    let mut data = Vec::with_capacity(len);
    data.push(1.0);
    for _ in 0..n {
        let mut next = Vec::with_capacity(data.len() * d);
        for &x in &data {
            for &vi in v {
                next.push(x * vi);
            }
        }
        data = next;
    }
    Ok(SymTensor { order: n, dim: d, data })
}

/// τ_n(W) = Σ_i w_i^{⊗n}.
pub fn tau(w: &WeightMatrix, n: usize) -> Result<SymTensor, TensorError> {
    tau_with_cap(w, n, DEFAULT_ENTRY_CAP)
}

pub fn tau_with_cap(w: &WeightMatrix, n: usize, cap: usize) -> Result<SymTensor, TensorError> {
    let mut acc = rank_one_power_with_cap(w.row(0), n, cap)?;
    for i in 1..w.k() {
        let next = rank_one_power_with_cap(w.row(i), n, cap)?;
        for (a, b) in acc.data.iter_mut().zip(&next.data) {
            *a += b;
        }
    }
    Ok(acc)
}

/// ⟨S, T⟩_F: sum of entrywise products.
pub fn frob_inner(s: &SymTensor, t: &SymTensor) -> Result<f64, TensorError> {
    if s.order != t.order || s.dim != t.dim {
        return Err(TensorError::ShapeMismatch(format!(
            "order {}/dim {} vs order {}/dim {}",
            s.order, s.dim, t.order, t.dim
        )));
    }
    Ok(s.data.iter().zip(&t.data).map(|(a, b)| a * b).sum())
}

/// An even-order moment tensor M_{D,2n} = E[x^{⊗2n}] for x ~ N(0, I_d).
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTensor(SymTensor);

impl MomentTensor {
    pub fn tensor(&self) -> &SymTensor {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }
}

/// Number of perfect pairings of `idx` into pairs of equal values
/// (the Isserlis/Wick count for N(0, I_d); E[x_{i₁}⋯x_{i_{2n}}]).
fn pairing_count(idx: &mut Vec<usize>) -> u64 {
    if idx.is_empty() {
        return 1;
    }
    let first = idx[0];
    let mut count = 0;
    for j in 1..idx.len() {
        if idx[j] == first {
            let mut rest = Vec::with_capacity(idx.len() - 2);
            rest.extend_from_slice(&idx[1..j]);
            rest.extend_from_slice(&idx[j + 1..]);
            count += pairing_count(&mut rest);
        }
    }
    count
}

fn moment_entry(flat: usize, dim: usize, order: usize) -> f64 {
    let mut idx = Vec::with_capacity(order);
    let mut rem = flat;
    for _ in 0..order {
        idx.push(rem % dim);
        rem /= dim;
    }
    // Digit order does not matter for the pairing count.
    pairing_count(&mut idx) as f64
}

/// E[x^{⊗order}] for x ~ N(0, I_d); entries are Isserlis pairing counts.
pub fn gaussian_moment_tensor(d: usize, order: usize) -> Result<MomentTensor, TensorError> {
    gaussian_moment_tensor_with_cap(d, order, DEFAULT_ENTRY_CAP)
}

pub fn gaussian_moment_tensor_with_cap(
    d: usize,
    order: usize,
    cap: usize,
) -> Result<MomentTensor, TensorError> {
    if order == 0 {
        return Err(TensorError::ZeroOrder);
    }
    if order % 2 != 0 {
        return Err(TensorError::OddOrder(order));
    }
    if d == 0 {
        return Err(TensorError::ShapeMismatch("dim must be >= 1".into()));
    }
    let len = checked_len(d, order, cap)?;
    let data = moment_entries(len, d, order);
    Ok(MomentTensor(SymTensor {
        order,
        dim: d,
        data,
    }))
}

#[cfg(feature = "parallel")]
fn moment_entries(len: usize, d: usize, order: usize) -> Vec<f64> {
    use rayon::prelude::*;
    (0..len)
        .into_par_iter()
        .map(|flat| moment_entry(flat, d, order))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn moment_entries(len: usize, d: usize, order: usize) -> Vec<f64> {
    moment_entries_seq(len, d, order)
}

/// Sequential moment-tensor fill; always compiled for benchmarking.
pub(crate) fn moment_entries_seq(len: usize, d: usize, order: usize) -> Vec<f64> {
    (0..len).map(|flat| moment_entry(flat, d, order)).collect()
}

/// Sequential counterpart of [`gaussian_moment_tensor`].
pub fn gaussian_moment_tensor_seq(d: usize, order: usize) -> Result<MomentTensor, TensorError> {
    if order == 0 {
        return Err(TensorError::ZeroOrder);
    }
    if order % 2 != 0 {
        return Err(TensorError::OddOrder(order));
    }
    if d == 0 {
        return Err(TensorError::ShapeMismatch("dim must be >= 1".into()));
    }
    let len = checked_len(d, order, DEFAULT_ENTRY_CAP)?;
    let data = moment_entries_seq(len, d, order);
    Ok(MomentTensor(SymTensor {
        order,
        dim: d,
        data,
    }))
}

/// ⟨S, T⟩_D = vec(S)ᵀ·mat(M)·vec(T) = ⟨S⊗T, M⟩_F.
pub fn moment_inner(s: &SymTensor, t: &SymTensor, m: &MomentTensor) -> Result<f64, TensorError> {
    if s.order != t.order || s.dim != t.dim {
        return Err(TensorError::ShapeMismatch(
            "S and T must share order and dim".into(),
        ));
    }
    if m.order() != 2 * s.order || m.dim() != s.dim {
        return Err(TensorError::ShapeMismatch(format!(
            "moment tensor order {} dim {} incompatible with arguments of order {} dim {}",
            m.order(),
            m.dim(),
            s.order,
            s.dim
        )));
    }
    let n = s.data.len();
    let mdata = &m.0.data;
    let mut total = 0.0;
    for (a, &sa) in s.data.iter().enumerate() {
        if sa == 0.0 {
            continue;
        }
        let row = &mdata[a * n..(a + 1) * n];
        let mut dot = 0.0;
        for (b, &tb) in t.data.iter().enumerate() {
            dot += row[b] * tb;
        }
        total += sa * dot;
    }
    Ok(total)
}
