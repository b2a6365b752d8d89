//! Recovery metrics: the four-way index partition, missed energy, noise
//! projections onto column spans, and direct checks of the near-orthogonality
//! inequalities implied by a restricted isometry constant.

use alloc::vec::Vec;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, singular_values, thin_svd, DenseMatrix};
use crate::model::{check_support, ModelParams, SparseSignal};

/// Relative cut-off below which singular values are treated as zero when
/// extracting a column-space basis.
const RANK_TOL: f64 = 1e-12;

/// Absolute slack when comparing a measured operator norm with its bound.
pub const CHECK_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportPartition {
    /// In both the true and the estimated support.
    pub correct: Vec<usize>,
    /// True but not estimated.
    pub missed: Vec<usize>,
    /// Estimated but not true.
    pub false_alarms: Vec<usize>,
    /// In neither.
    pub true_rejections: Vec<usize>,
}

pub fn partition_supports(
    true_support: &[usize],
    estimated: &[usize],
    n: usize,
) -> Result<SupportPartition> {
    check_support(true_support, n)?;
    check_support(estimated, n)?;
    let mut part = SupportPartition {
        correct: Vec::new(),
        missed: Vec::new(),
        false_alarms: Vec::new(),
        true_rejections: Vec::new(),
    };
    for i in 0..n {
        let t = true_support.binary_search(&i).is_ok();
        let e = estimated.binary_search(&i).is_ok();
        match (t, e) {
            (true, true) => part.correct.push(i),
            (true, false) => part.missed.push(i),
            (false, true) => part.false_alarms.push(i),
            (false, false) => part.true_rejections.push(i),
        }
    }
    Ok(part)
}

/// `‖x_{S1}‖²`, the signal energy on the missed indices.
pub fn missed_energy(signal: &SparseSignal, part: &SupportPartition) -> f64 {
    part.missed
        .iter()
        .map(|&i| signal.values()[i].powi(2))
        .fold(0.0, |acc, v| acc + v)
}

/// Orthonormal basis of the numerical column space of `a`.
pub fn column_space_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, k) = a.shape();
    if k == 0 {
        return Ok(DenseMatrix::zeros(m, 0));
    }
    if m >= k {
        return Ok(thin_svd(a)?.range_basis(RANK_TOL));
    }
    // wide: range(A) is spanned by the right singular vectors of Aᵀ
    let svd = thin_svd(&a.transpose())?;
    let r = svd.rank(RANK_TOL);
    let idx: Vec<usize> = (0..r).collect();
    Ok(svd.right_vectors.select_columns(&idx))
}

/// Removes from each column of `b` its component in the span of the
/// orthonormal columns of `basis`.
fn project_out(basis: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if basis.cols() == 0 {
        return Ok(b.clone());
    }
    let coeffs = basis.transpose_matmul(b)?;
    let inside = basis.matmul(&coeffs)?;
    b.sub(&inside)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub subspace_support: Vec<usize>,
    /// Energy of the noise inside the column span.
    pub parallel_energy: f64,
    /// Energy of the noise orthogonal to it.
    pub orthogonal_energy: f64,
}

/// Splits `‖e‖²` into the parts inside and orthogonal to `range(A_S)`.
pub fn project_noise(a_s: &DenseMatrix, e: &[f64]) -> Result<(f64, f64)> {
    if e.len() != a_s.rows() {
        return Err(Error::DimensionMismatch {
            expected: a_s.rows(),
            found: e.len(),
        });
    }
    let basis = column_space_basis(a_s)?;
    if basis.cols() == 0 {
        return Ok((0.0, norm_sq(e)));
    }
    let coords = basis.transpose_matvec(e)?;
    let inside = basis.matvec(&coords)?;
    let outside: f64 = e
        .iter()
        .zip(&inside)
        .map(|(a, b)| (a - b) * (a - b))
        .fold(0.0, |acc, v| acc + v);
    Ok((norm_sq(&coords), outside))
}

/// [`project_noise`] for the columns of `a` listed in `support`.
pub fn project_noise_onto(
    a: &DenseMatrix,
    support: &[usize],
    e: &[f64],
) -> Result<ProjectionReport> {
    check_support(support, a.cols())?;
    let (parallel_energy, orthogonal_energy) = project_noise(&a.select_columns(support), e)?;
    Ok(ProjectionReport {
        subspace_support: support.to_vec(),
        parallel_energy,
        orthogonal_energy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// measured ≤ bound
    Upper,
    /// measured ≥ bound
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionCheck {
    pub name: &'static str,
    pub kind: BoundKind,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
    /// False when the bound carries no information at this `ε`.
    pub binding: bool,
    /// True when one of the supports is empty and the check holds trivially.
    pub trivial: bool,
}

impl PropositionCheck {
    fn trivial(name: &'static str, kind: BoundKind) -> Self {
        Self {
            name,
            kind,
            measured: 0.0,
            bound: 0.0,
            passed: true,
            binding: false,
            trivial: true,
        }
    }

    fn evaluate(name: &'static str, kind: BoundKind, measured: f64, bound: Option<f64>) -> Self {
        let (bound, binding) = match bound {
            Some(b) if b.is_finite() => (b, true),
            _ => (f64::NAN, false),
        };
        let passed = !binding
            || match kind {
                BoundKind::Upper => measured <= bound + CHECK_SLACK,
                BoundKind::Lower => measured >= bound - CHECK_SLACK,
            };
        Self {
            name,
            kind,
            measured,
            bound,
            passed,
            binding,
            trivial: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionReport {
    pub epsilon: f64,
    pub support_i: Vec<usize>,
    pub support_j: Vec<usize>,
    pub checks: Vec<PropositionCheck>,
    pub all_passed: bool,
}

/// `|S_j|`-th singular value of a matrix with `|S_j|` columns, zero when it
/// has fewer rows than columns.
fn smallest_in_column_sense(b: &DenseMatrix) -> Result<f64> {
    if b.rows() < b.cols() {
        return Ok(0.0);
    }
    Ok(*singular_values(b)?.last().unwrap_or(&0.0))
}

/// Measures five operator-norm quantities for disjoint supports `S_i`, `S_j`
/// and compares them with their bounds at RIP constant `epsilon`:
///
/// - `‖A_iᵀA_j‖₂ ≤ ε`
/// - `‖Ū_iᵀA_j‖₂ ≤ ε/√(1−ε)`
/// - `σ_min(U̱_iᵀA_j) ≥ √((1−2ε)/(1−ε))`
/// - `σ_min(U̱_iᵀŪ_j) ≥ √((1−2ε)/(1−ε²))`
/// - `σ_min(A_jᵀΦ(S_i)⁻¹A_j) ≥ (1−2ε)/((1−ε)σe²)`
///
/// `Ū`/`U̱` are orthonormal bases of the column span and its complement.
/// Lower bounds whose right-hand side is not positive (`ε ≥ ½`) are
/// reported as non-binding.
pub fn check_propositions(
    a: &DenseMatrix,
    support_i: &[usize],
    support_j: &[usize],
    params: &ModelParams,
    epsilon: f64,
) -> Result<PropositionReport> {
    let n = a.cols();
    check_support(support_i, n)?;
    check_support(support_j, n)?;
    if let Some(&index) = support_i
        .iter()
        .find(|i| support_j.binary_search(i).is_ok())
    {
        return Err(Error::OverlappingSupports { index });
    }
    if !(epsilon >= 0.0) {
        return Err(Error::invalid("epsilon", epsilon, "must be nonnegative"));
    }

    const NAMES: [&str; 5] = [
        "cross_gram_norm",
        "span_leakage_norm",
        "complement_min_gain",
        "complement_basis_min_gain",
        "whitened_gram_min_eigenvalue",
    ];
    let kinds = [
        BoundKind::Upper,
        BoundKind::Upper,
        BoundKind::Lower,
        BoundKind::Lower,
        BoundKind::Lower,
    ];

    let upper_leak = (epsilon < 1.0).then(|| epsilon / (1.0 - epsilon).sqrt());
    let positive = |v: f64| (epsilon < 0.5 && v > 0.0).then_some(v);
    let lower_c = positive(((1.0 - 2.0 * epsilon) / (1.0 - epsilon)).sqrt());
    let lower_d = positive(((1.0 - 2.0 * epsilon) / (1.0 - epsilon * epsilon)).sqrt());
    let noise_var = params.sigma_e * params.sigma_e;
    let lower_e = positive((1.0 - 2.0 * epsilon) / ((1.0 - epsilon) * noise_var));

    let mut checks = Vec::with_capacity(5);
    if support_j.is_empty() {
        for (name, kind) in NAMES.iter().zip(kinds) {
            checks.push(PropositionCheck::trivial(name, kind));
        }
    } else {
        let a_i = a.select_columns(support_i);
        let a_j = a.select_columns(support_j);
        let basis_i = column_space_basis(&a_i)?;

        if support_i.is_empty() {
            checks.push(PropositionCheck::trivial(NAMES[0], kinds[0]));
            checks.push(PropositionCheck::trivial(NAMES[1], kinds[1]));
        } else {
            let cross = a_i.transpose_matmul(&a_j)?;
            let cross_norm = singular_values(&cross)?[0];
            checks.push(PropositionCheck::evaluate(
                NAMES[0],
                kinds[0],
                cross_norm,
                Some(epsilon),
            ));
            let leak = basis_i.transpose_matmul(&a_j)?;
            let leak_norm = singular_values(&leak)?[0];
            checks.push(PropositionCheck::evaluate(
                NAMES[1], kinds[1], leak_norm, upper_leak,
            ));
        }

        let residual_j = project_out(&basis_i, &a_j)?;
        checks.push(PropositionCheck::evaluate(
            NAMES[2],
            kinds[2],
            smallest_in_column_sense(&residual_j)?,
            lower_c,
        ));

        let basis_j = column_space_basis(&a_j)?;
        let residual_basis = project_out(&basis_i, &basis_j)?;
        checks.push(PropositionCheck::evaluate(
            NAMES[3],
            kinds[3],
            smallest_in_column_sense(&residual_basis)?,
            lower_d,
        ));

        // A_jᵀΦ(S_i)⁻¹A_j = Cᵀ D C + σe⁻² RᵀR with C = Ū_iᵀA_j,
        // D = diag(1/(σ1² s_k² + σe²)) and R the residual of A_j off span(A_i)
        let mut whitened = residual_j.gram().scale(1.0 / noise_var);
        if !support_i.is_empty() && basis_i.cols() > 0 {
            let svd = singular_values(&a_i)?;
            let c = basis_i.transpose_matmul(&a_j)?;
            let k = support_j.len();
            let var1 = params.sigma1 * params.sigma1;
            for (r, s) in svd.iter().take(basis_i.cols()).enumerate() {
                let d = 1.0 / (var1 * s * s + noise_var);
                for p in 0..k {
                    for q in 0..k {
                        whitened[(p, q)] += d * c[(r, p)] * c[(r, q)];
                    }
                }
            }
        }
        let eig_min = *singular_values(&whitened)?.last().unwrap_or(&0.0);
        checks.push(PropositionCheck::evaluate(
            NAMES[4], kinds[4], eig_min, lower_e,
        ));
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(PropositionReport {
        epsilon,
        support_i: support_i.to_vec(),
        support_j: support_j.to_vec(),
        checks,
        all_passed,
    })
}
