//! Small dense linear algebra: a row-major matrix type and a symmetric
//! eigensolver (Householder tridiagonalization followed by implicit-shift
//! QL), sized for the (k·d)×(k·d) Hessians of the experiments.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("QL iteration failed to converge for eigenvalue {0}")]
    NoConvergence(usize),
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Self {
            n_rows,
            n_cols,
            data: rows.concat(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// (M + Mᵀ)/2; panics unless square.
    pub fn symmetrized(&self) -> Mat {
        assert_eq!(self.n_rows, self.n_cols);
        let n = self.n_rows;
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n_cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Eigendecomposition of a symmetric matrix: `values` ascending,
/// `vectors` holding the corresponding eigenvectors as columns.
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

/// Symmetric eigendecomposition by tridiagonalization + implicit QL.
/// Only the lower triangle participates; the input is assumed symmetric
/// (callers symmetrize first when in doubt).
pub fn sym_eigen(a: &Mat) -> Result<SymEigen, LinalgError> {
    if a.n_rows != a.n_cols {
        return Err(LinalgError::ShapeMismatch(format!(
            "{}x{} not square",
            a.n_rows, a.n_cols
        )));
    }
    let n = a.n_rows;
    if n == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: Mat::zeros(0, 0),
        });
    }
    let mut z = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, &mut d, &mut e);
    tql2(&mut z, &mut d, &mut e)?;

    // Sort ascending, permuting eigenvector columns alongside.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new_col)] = z[(r, old_col)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Householder reduction to tridiagonal form, accumulating the orthogonal
/// transform in `z` (EISPACK tred2).
fn tred2(z: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| z[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = z[(i, l)];
            } else {
                for k in 0..=l {
                    z[(i, k)] /= scale;
                    h += z[(i, k)] * z[(i, k)];
                }
                let f = z[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[(i, l)] = f - g;
                let mut fsum = 0.0;
                for j in 0..=l {
                    z[(j, i)] = z[(i, j)] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[(j, k)] * z[(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += z[(k, j)] * z[(i, k)];
                    }
                    e[j] = g / h;
                    fsum += e[j] * z[(i, j)];
                }
                let hh = fsum / (h + h);
                for j in 0..=l {
                    let f = z[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[(j, k)] -= f * e[k] + g * z[(i, k)];
                    }
                }
            }
        } else {
            e[i] = z[(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[(i, k)] * z[(k, j)];
                }
                for k in 0..i {
                    z[(k, j)] -= g * z[(k, i)];
                }
            }
        }
        d[i] = z[(i, i)];
        z[(i, i)] = 1.0;
        for j in 0..i {
            z[(j, i)] = 0.0;
            z[(i, j)] = 0.0;
        }
    }
}

/// Implicit-shift QL on a tridiagonal matrix, accumulating eigenvectors
/// (EISPACK tql2). `d` holds the diagonal, `e` the subdiagonal.
fn tql2(z: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(LinalgError::NoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Solve (A + shift·I)x = b through the eigendecomposition of symmetric A.
/// Modes with |eigenvalue + shift| below `floor` are clamped to ±floor,
/// which turns near-singular solves into bounded pseudo-inverse steps.
pub fn solve_sym_shifted(
    eig: &SymEigen,
    shift: f64,
    b: &[f64],
    floor: f64,
) -> Vec<f64> {
    let n = eig.values.len();
    assert_eq!(b.len(), n);
    // y = Qᵀ b
    let mut y = vec![0.0; n];
    for (j, yj) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..n {
            acc += eig.vectors[(i, j)] * b[i];
        }
        *yj = acc;
    }
    for (j, yj) in y.iter_mut().enumerate() {
        let lam = eig.values[j] + shift;
        let denom = if lam.abs() < floor {
            floor.copysign(if lam == 0.0 { 1.0 } else { lam })
        } else {
            lam
        };
        *yj /= denom;
    }
    // x = Q y
    let mut x = vec![0.0; n];
    for (i, xi) in x.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..n {
            acc += eig.vectors[(i, j)] * y[j];
        }
        *xi = acc;
    }
    x
}

/// Random orthogonal matrix by Gram–Schmidt on a Gaussian matrix
/// (test utility for the rotation-invariance properties).
pub fn random_orthogonal(d: usize, seed: u64) -> Mat {
    use crate::rng::GaussianStream;
    let mut stream = GaussianStream::new(seed);
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
        let mut degenerate = false;
        for _ in 0..d {
            let mut v: Vec<f64> = (0..d).map(|_| stream.next_gaussian()).collect();
            for u in &cols {
                let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= dot * ui;
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            cols.push(v);
        }
        if degenerate {
            continue;
        }
        let mut m = Mat::zeros(d, d);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..d {
                m[(i, j)] = col[i];
            }
        }
        return m;
    }
}
