//! Independent reference implementations used as test oracles. Nothing here
//! calls into the numerical routines under test beyond reading inputs.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use sparsemap_core::{DenseMatrix, Instance};

pub fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn from_na(a: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

/// `(ln det Φ, cᵀΦ⁻¹c, |S| ln((1−p)/p))` from an explicit `M×M` Cholesky
/// factorization of `Φ(S) = σ1² A_S A_Sᵀ + σe² I`.
pub fn dense_gamma(support: &[usize], inst: &Instance) -> (f64, f64, f64) {
    let p = &inst.params;
    let a = to_na(&inst.matrix);
    let m = p.m;
    let mut phi = DMatrix::<f64>::identity(m, m) * (p.sigma_e * p.sigma_e);
    let mut c = DVector::from_column_slice(&inst.observation);
    for &j in support {
        let col = a.column(j);
        phi += col * col.transpose() * (p.sigma1 * p.sigma1);
        c -= col * p.mu1;
    }
    let chol = phi.cholesky().expect("Φ is positive definite");
    let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let quad = c.dot(&chol.solve(&c));
    let prior = support.len() as f64 * ((1.0 - p.p) / p.p).ln();
    (logdet, quad, prior)
}

pub fn dense_total(support: &[usize], inst: &Instance) -> f64 {
    let (g1, g2, g3) = dense_gamma(support, inst);
    0.5 * g1 + 0.5 * g2 + g3
}

pub fn random_support<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut s = index::sample(rng, n, k).into_vec();
    s.sort_unstable();
    s
}

/// Every support of `{0..n}` with at most `cap` elements, enumerated by
/// decreasing bitmask (a different order from the library's).
pub fn supports_by_bitmask(n: usize, cap: usize) -> Vec<Vec<usize>> {
    assert!(n < 32);
    (0u32..(1 << n))
        .rev()
        .filter(|m| m.count_ones() as usize <= cap)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Argmin of `cost` over `supports` with ties broken towards smaller, then
/// lexicographically smaller supports.
pub fn argmin_by<F: FnMut(&[usize]) -> f64>(
    supports: &[Vec<usize>],
    mut cost: F,
) -> (Vec<usize>, f64) {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for s in supports {
        let c = cost(s);
        let better = match &best {
            None => true,
            Some((bs, bc)) => c < *bc || (c == *bc && (s.len(), s) < (bs.len(), bs)),
        };
        if better {
            best = Some((s.clone(), c));
        }
    }
    best.expect("nonempty family")
}

/// Orthonormal basis of the column space from nalgebra's SVD.
pub fn projector_energy(a_s: &DenseMatrix, e: &[f64]) -> f64 {
    // ‖A(AᵀA)⁻¹Aᵀe‖² via the normal equations
    let a = to_na(a_s);
    let e = DVector::from_column_slice(e);
    let gram = a.transpose() * &a;
    let coeffs = gram
        .cholesky()
        .expect("full column rank")
        .solve(&(a.transpose() * &e));
    (a * coeffs).norm_squared()
}

/// `(n−1)×n` unit-norm equiangular frame: the Helmert basis of the
/// complement of the all-ones vector, columns normalised, then rotated by a
/// random orthogonal matrix. Every Gram off-diagonal equals `−1/(n−1)`, so
/// the RIP constant at level `k` is exactly `(k−1)/(n−1)`.
pub fn equiangular_frame<R: Rng>(n: usize, rng: &mut R) -> DenseMatrix {
    let m = n - 1;
    let helmert = DMatrix::from_fn(m, n, |r, c| {
        let j = (r + 1) as f64;
        let v = if c < r + 1 {
            1.0
        } else if c == r + 1 {
            -j
        } else {
            0.0
        };
        v / (j * (j + 1.0)).sqrt()
    });
    let col_scale = (1.0 - 1.0 / n as f64).sqrt();
    let g = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    from_na(&(q * helmert / col_scale))
}
