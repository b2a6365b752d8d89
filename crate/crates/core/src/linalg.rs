//! Dense row-major kernels: Cholesky-based log-determinant and solves, and a
//! one-sided Jacobi thin SVD.
//!
//! Dimensions here are desk scale (a few hundred at most), so everything is
//! plain `Vec<f64>` storage and `O(n^3)` algorithms.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Sweep cap for the Jacobi SVD.
const MAX_SWEEPS: usize = 80;

/// Relative symmetry tolerance accepted by the SPD routines.
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors (all of equal length).
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Submatrix made of the listed columns, in the listed order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self::from_fn(self.rows, columns.len(), |i, j| self[(i, columns[j])])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn transpose_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = other.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Gram matrix `AᵀA`.
    pub fn gram(&self) -> DenseMatrix {
        let mut g = self.transpose_matmul(self).expect("shapes agree");
        g.symmetrize();
        g
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀ x`.
    pub fn transpose_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖A − Aᵀ‖_F`; zero for non-square input is meaningless, so that returns +inf.
    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let d = self[(i, j)] - self[(j, i)];
                acc += 2.0 * d * d;
            }
        }
        acc.sqrt()
    }

    fn symmetrize(&mut self) {
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .fold(0.0, |acc, v| acc + v)
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Lower-triangular Cholesky factor `G = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: DenseMatrix,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix. Fails on the first
    /// non-positive pivot, reporting its index.
    pub fn factor(g: &DenseMatrix) -> Result<Self> {
        let n = g.rows();
        if g.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.cols(),
            });
        }
        let scale = g.frobenius_norm();
        let asym = g.asymmetry();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let lj = &l.data[j * n..j * n + j];
            let d = g[(j, j)] - norm_sq(lj);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let s = g[(i, j)] - dot(&l.data[i * n..i * n + j], &l.data[j * n..j * n + j]);
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    /// `ln det G = 2 Σ ln L_ii`.
    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.dim())
            .map(|i| self.lower[(i, i)].ln())
            .fold(0.0, |acc, v| acc + v)
    }

    /// Solves `G v = b` by forward then backward substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let l = &self.lower;
        let mut z = b.to_vec();
        for i in 0..n {
            let s = dot(&l.data[i * n..i * n + i], &z[..i]);
            z[i] = (z[i] - s) / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= l[(k, i)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
        Ok(z)
    }

    /// `bᵀ G⁻¹ b = ‖L⁻¹ b‖²`.
    pub fn inverse_quadratic_form(&self, b: &[f64]) -> Result<f64> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let l = &self.lower;
        let mut z = b.to_vec();
        for i in 0..n {
            let s = dot(&l.data[i * n..i * n + i], &z[..i]);
            z[i] = (z[i] - s) / l[(i, i)];
        }
        Ok(norm_sq(&z))
    }
}

/// `ln det G` for symmetric positive definite `G`, via Cholesky.
pub fn logdet_psd(g: &DenseMatrix) -> Result<f64> {
    Ok(Cholesky::factor(g)?.logdet())
}

/// Solves `G v = b` for symmetric positive definite `G`. One step of
/// iterative refinement keeps the residual small for ill-conditioned `G`.
pub fn solve_psd(g: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let chol = Cholesky::factor(g)?;
    let mut v = chol.solve(b)?;
    let gv = g.matvec(&v)?;
    let r: Vec<f64> = b.iter().zip(&gv).map(|(bi, gi)| bi - gi).collect();
    let dv = chol.solve(&r)?;
    for (vi, di) in v.iter_mut().zip(&dv) {
        *vi += di;
    }
    Ok(v)
}

/// Thin SVD `A = U diag(s) Vᵀ` of an `M×k` matrix with `M ≥ k`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `M×k`, orthonormal columns.
    pub left_vectors: DenseMatrix,
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// `k×k` orthogonal.
    pub right_vectors: DenseMatrix,
}

impl ThinSvd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, k) = self.left_vectors.shape();
        let u = &self.left_vectors;
        let v = &self.right_vectors;
        DenseMatrix::from_fn(m, k, |i, j| {
            (0..k)
                .map(|l| u[(i, l)] * self.singular_values[l] * v[(j, l)])
                .fold(0.0, |acc, v| acc + v)
        })
    }

    /// Number of singular values above `tol · σ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s > tol * smax && s > 0.0)
            .count()
    }

    /// Left singular vectors spanning the numerical column space.
    pub fn range_basis(&self, tol: f64) -> DenseMatrix {
        let r = self.rank(tol);
        let idx: Vec<usize> = (0..r).collect();
        self.left_vectors.select_columns(&idx)
    }
}

/// Column-major working copy used by the Jacobi iteration.
struct Columns {
    len: usize,
    data: Vec<f64>,
}

impl Columns {
    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.len..(j + 1) * self.len]
    }

    fn rotate(&mut self, p: usize, q: usize, c: f64, s: f64) {
        debug_assert!(p < q);
        let (head, tail) = self.data.split_at_mut(q * self.len);
        let cp = &mut head[p * self.len..(p + 1) * self.len];
        let cq = &mut tail[..self.len];
        for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = c * x - s * y;
            *b = s * x + c * y;
        }
    }
}

/// One-sided (Hestenes) Jacobi. Returns the rotated columns `A V` and,
/// optionally, the accumulated `V`.
fn hestenes(a: &DenseMatrix, want_v: bool) -> Result<(Columns, Option<Columns>)> {
    let (m, n) = a.shape();
    let mut w = Columns {
        len: m,
        data: Vec::with_capacity(m * n),
    };
    for j in 0..n {
        w.data.extend((0..m).map(|i| a[(i, j)]));
    }
    let mut v = want_v.then(|| {
        let mut c = Columns {
            len: n,
            data: vec![0.0; n * n],
        };
        for j in 0..n {
            c.data[j * n + j] = 1.0;
        }
        c
    });
    let tol = f64::EPSILON * (m.max(1) as f64);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm_sq(w.col(p));
                let beta = norm_sq(w.col(q));
                let gamma = dot(w.col(p), w.col(q));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                w.rotate(p, q, c, s);
                if let Some(v) = v.as_mut() {
                    v.rotate(p, q, c, s);
                }
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }
    Err(Error::NonConvergence { rows: m, cols: n })
}

/// Thin SVD of an `M×k` matrix, `M ≥ k`. Columns of `U` belonging to zero
/// singular values are filled in with an orthonormal completion.
pub fn thin_svd(a: &DenseMatrix) -> Result<ThinSvd> {
    let (m, k) = a.shape();
    if m < k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: m,
        });
    }
    if a.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (w, v) = hestenes(a, true)?;
    let v = v.expect("requested");
    let norms: Vec<f64> = (0..k).map(|j| norm(w.col(j))).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let smax = order.first().map(|&j| norms[j]).unwrap_or(0.0);
    let floor = smax * f64::EPSILON * (m.max(k) as f64);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut pending = 0usize;
    for &j in &order {
        let s = norms[j];
        if s > floor && s > 0.0 {
            u_cols.push(w.col(j).iter().map(|x| x / s).collect());
        } else {
            pending += 1;
        }
    }
    // complete the basis for the null directions
    let mut e = 0usize;
    while pending > 0 && e < m {
        let mut cand = vec![0.0; m];
        cand[e] = 1.0;
        e += 1;
        for _ in 0..2 {
            for u in &u_cols {
                let c = dot(u, &cand);
                for (x, ui) in cand.iter_mut().zip(u) {
                    *x -= c * ui;
                }
            }
        }
        let nc = norm(&cand);
        if nc > 0.5 {
            u_cols.push(cand.into_iter().map(|x| x / nc).collect());
            pending -= 1;
        }
    }

    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let left_vectors = DenseMatrix::from_columns(m, &u_cols);
    let right_vectors = DenseMatrix::from_fn(k, k, |i, c| v.col(order[c])[i]);
    Ok(ThinSvd {
        left_vectors,
        singular_values,
        right_vectors,
    })
}

/// Singular values (descending) without forming singular vectors. Wide
/// matrices are transposed first, so `min(rows, cols)` values come back.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let tall;
    let a = if a.rows() < a.cols() {
        tall = a.transpose();
        &tall
    } else {
        a
    };
    let (w, _) = hestenes(a, false)?;
    let mut s: Vec<f64> = (0..a.cols()).map(|j| norm(w.col(j))).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// `(σ_min, σ_max)` over the `min(rows, cols)` singular values; `(0, 0)` for
/// an empty matrix.
pub fn extreme_singular_values(a: &DenseMatrix) -> Result<(f64, f64)> {
    let s = singular_values(a)?;
    match (s.last(), s.first()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Ok((0.0, 0.0)),
    }
}
