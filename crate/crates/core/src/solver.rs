//! MAP support estimation: the cost `γ(S)`, exhaustive and greedy
//! minimisation under `|S| ≤ cap`, and least-squares regression on a chosen
//! support.
//!
//! `γ(S) = ½ ln det Φ(S) + ½ cᵀ Φ(S)⁻¹ c + |S| ln((1−p)/p)` with
//! `Φ(S) = σ1² A_S A_Sᵀ + σe² I_M` and `c = y − μ1 A_S 1`. Nothing here forms
//! an `M×M` matrix: the log-determinant goes through the matrix determinant
//! lemma and the quadratic form through the equivalent ridge problem, both in
//! `|S|` dimensions.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::combinations::{count_up_to, Combinations};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, thin_svd, Cholesky, DenseMatrix};
use crate::model::{check_support, Instance};

/// Maximum number of supports the exhaustive solver will score.
pub const MAP_ENUMERATION_LIMIT: u128 = 2_000_000;

/// Smallest singular value accepted by [`regress_on_support`].
pub const REGRESSION_RANK_TOL: f64 = 1e-10;

/// The three terms of `γ(S)`; `total = ½γ1 + ½γ2 + γ3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaBreakdown {
    /// `ln det Φ(S)`.
    pub gamma1: f64,
    /// `cᵀ Φ(S)⁻¹ c`.
    pub gamma2: f64,
    /// `|S| ln((1−p)/p)`.
    pub gamma3: f64,
    pub total: f64,
}

impl GammaBreakdown {
    fn new(gamma1: f64, gamma2: f64, gamma3: f64) -> Self {
        Self {
            gamma1,
            gamma2,
            gamma3,
            total: 0.5 * gamma1 + 0.5 * gamma2 + gamma3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    pub support: Vec<usize>,
    pub cost: GammaBreakdown,
    pub solver: SolverKind,
    pub supports_evaluated: u64,
}

/// Evaluates `γ(S)` for a sorted support.
pub fn gamma_cost(support: &[usize], inst: &Instance) -> Result<GammaBreakdown> {
    let params = &inst.params;
    check_support(support, params.n)?;
    let k = support.len();
    let m = params.m;
    let noise_var = params.sigma_e * params.sigma_e;
    let ratio = params.variance_ratio();
    let y = &inst.observation;

    let gamma3 = if k == 0 {
        0.0
    } else {
        k as f64 * params.prior_penalty()
    };
    let base_logdet = m as f64 * noise_var.ln();

    if k == 0 {
        return Ok(GammaBreakdown::new(
            base_logdet,
            norm_sq(y) / noise_var,
            0.0,
        ));
    }

    let b = inst.matrix.select_columns(support);
    // det Φ(S) = σe^{2M} det(I + (σ1²/σe²) BᵀB)
    let mut inner = b.gram().scale(ratio);
    for i in 0..k {
        inner[(i, i)] += 1.0;
    }
    let chol = Cholesky::factor(&inner)?;
    let gamma1 = base_logdet + chol.logdet();

    // centred residual c = y − μ1 B 1
    let mut c = y.clone();
    if params.mu1 != 0.0 {
        for (i, ci) in c.iter_mut().enumerate() {
            let row_sum: f64 = b.row(i).iter().fold(0.0, |acc, v| acc + v);
            *ci -= params.mu1 * row_sum;
        }
    }

    // cᵀΦ⁻¹c = min_u (‖c − Bu‖² + λ‖u‖²) / σe² with λ = σe²/σ1²; the
    // minimiser solves (I + r BᵀB) u = r Bᵀc.
    let btc = b.transpose_matvec(&c)?;
    let rhs: Vec<f64> = btc.iter().map(|v| v * ratio).collect();
    let u = chol.solve(&rhs)?;
    let bu = b.matvec(&u)?;
    let fit: f64 = c
        .iter()
        .zip(&bu)
        .map(|(ci, bi)| (ci - bi) * (ci - bi))
        .fold(0.0, |acc, v| acc + v);
    let gamma2 = (fit + norm_sq(&u) / ratio) / noise_var;

    Ok(GammaBreakdown::new(gamma1, gamma2, gamma3))
}

/// Strict ordering used by both solvers: lower cost, then fewer indices,
/// then lexicographically smaller support.
fn prefer(a_cost: f64, a: &[usize], b_cost: f64, b: &[usize]) -> bool {
    match a_cost.partial_cmp(&b_cost) {
        Some(Ordering::Less) => true,
        Some(Ordering::Greater) | None => false,
        Some(Ordering::Equal) => (a.len(), a) < (b.len(), b),
    }
}

/// Global minimiser of `γ` over every support with at most `cap` indices.
pub fn exhaustive_map(inst: &Instance, cap: usize) -> Result<SupportEstimate> {
    let n = inst.params.n;
    let cap = cap.min(n);
    let candidates = count_up_to(n, cap);
    if candidates > MAP_ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            what: "exhaustive MAP search",
            candidates,
            limit: MAP_ENUMERATION_LIMIT,
            hint: "use the greedy solver instead",
        });
    }
    let mut best_support = Vec::new();
    let mut best = gamma_cost(&best_support, inst)?;
    let mut evaluated = 1u64;
    for k in 1..=cap {
        for support in Combinations::new(n, k) {
            let cost = gamma_cost(&support, inst)?;
            evaluated += 1;
            if prefer(cost.total, &support, best.total, &best_support) {
                best = cost;
                best_support = support;
            }
        }
    }
    Ok(SupportEstimate {
        support: best_support,
        cost: best,
        solver: SolverKind::Exhaustive,
        supports_evaluated: evaluated,
    })
}

/// Memoised `γ` for one solve.
struct CostCache<'a> {
    inst: &'a Instance,
    seen: BTreeMap<Vec<usize>, GammaBreakdown>,
}

impl<'a> CostCache<'a> {
    fn new(inst: &'a Instance) -> Self {
        Self {
            inst,
            seen: BTreeMap::new(),
        }
    }

    fn get(&mut self, support: &[usize]) -> Result<GammaBreakdown> {
        if let Some(c) = self.seen.get(support) {
            return Ok(*c);
        }
        let c = gamma_cost(support, self.inst)?;
        self.seen.insert(support.to_vec(), c);
        Ok(c)
    }
}

fn with_index(support: &[usize], i: usize) -> Vec<usize> {
    let mut s = support.to_vec();
    let pos = s.partition_point(|&x| x < i);
    s.insert(pos, i);
    s
}

fn without_index(support: &[usize], i: usize) -> Vec<usize> {
    support.iter().copied().filter(|&x| x != i).collect()
}

/// Best candidate under [`prefer`], or `None` for an empty candidate list.
fn best_of(
    cache: &mut CostCache<'_>,
    candidates: impl Iterator<Item = Vec<usize>>,
) -> Result<Option<(Vec<usize>, GammaBreakdown)>> {
    let mut best: Option<(Vec<usize>, GammaBreakdown)> = None;
    for s in candidates {
        let c = cache.get(&s)?;
        let take = match &best {
            None => true,
            Some((bs, bc)) => prefer(c.total, &s, bc.total, bs),
        };
        if take {
            best = Some((s, c));
        }
    }
    Ok(best)
}

/// Forward selection with swap and removal refinement.
///
/// Starting from the empty support, adds the index with the largest cost
/// decrease, then applies single removals or swaps while they decrease the
/// cost. Stops when no addition helps or the support reaches `cap`.
pub fn greedy_map(inst: &Instance, cap: usize) -> Result<SupportEstimate> {
    let n = inst.params.n;
    let cap = cap.min(n);
    let mut cache = CostCache::new(inst);
    let mut current: Vec<usize> = Vec::new();
    let mut cost = cache.get(&current)?;

    while current.len() < cap {
        let additions = (0..n)
            .filter(|i| current.binary_search(i).is_err())
            .map(|i| with_index(&current, i));
        match best_of(&mut cache, additions)? {
            Some((s, c)) if c.total < cost.total => {
                current = s;
                cost = c;
            }
            _ => break,
        }

        loop {
            let outside: Vec<usize> = (0..n)
                .filter(|i| current.binary_search(i).is_err())
                .collect();
            let removals = current.iter().map(|&j| without_index(&current, j));
            let swaps = current.iter().flat_map(|&j| {
                let reduced = without_index(&current, j);
                outside
                    .iter()
                    .map(move |&i| with_index(&reduced, i))
                    .collect::<Vec<_>>()
            });
            let moves: Vec<Vec<usize>> = removals.chain(swaps).collect();
            match best_of(&mut cache, moves.into_iter())? {
                Some((s, c)) if c.total < cost.total => {
                    current = s;
                    cost = c;
                }
                _ => break,
            }
        }
    }

    Ok(SupportEstimate {
        support: current,
        cost,
        solver: SolverKind::Greedy,
        supports_evaluated: cache.seen.len() as u64,
    })
}

/// Least-squares coefficients on `support`, zero elsewhere:
/// `x̂_S = (A_SᵀA_S)⁻¹ A_Sᵀ y`, computed through the thin SVD of `A_S`.
pub fn regress_on_support(inst: &Instance, support: &[usize]) -> Result<Vec<f64>> {
    let n = inst.params.n;
    check_support(support, n)?;
    let mut out = vec![0.0; n];
    if support.is_empty() {
        return Ok(out);
    }
    if support.len() > inst.params.m {
        return Err(Error::RankDeficient { smallest: 0.0 });
    }
    let b: DenseMatrix = inst.matrix.select_columns(support);
    let svd = thin_svd(&b)?;
    let smallest = *svd.singular_values.last().expect("nonempty");
    if !(smallest > REGRESSION_RANK_TOL) {
        return Err(Error::RankDeficient { smallest });
    }
    let uty = svd.left_vectors.transpose_matvec(&inst.observation)?;
    let scaled: Vec<f64> = uty
        .iter()
        .zip(&svd.singular_values)
        .map(|(v, s)| v / s)
        .collect();
    let coeffs = svd.right_vectors.matvec(&scaled)?;
    for (&i, c) in support.iter().zip(coeffs) {
        out[i] = c;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_instance, ModelParams, SparseSignal};

    fn identity_instance(m: usize, n: usize, sigma_e: f64, y: Vec<f64>) -> Instance {
        let params = ModelParams::new(n, m, 0.1, 0.0, 1.0, sigma_e).unwrap();
        let a = DenseMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
        Instance::from_parts(params, a, SparseSignal::zero(n), vec![0.0; m])
            .unwrap()
            .with_observation(y)
            .unwrap()
    }

    #[test]
    fn empty_support_unit_noise() {
        let inst = identity_instance(3, 5, 1.0, vec![1.0, 2.0, 2.0]);
        let g = gamma_cost(&[], &inst).unwrap();
        assert_eq!(g.gamma1, 0.0);
        assert_eq!(g.gamma2, 9.0);
        assert_eq!(g.gamma3, 0.0);
    }

    #[test]
    fn empty_support_closed_form() {
        let inst = identity_instance(3, 5, 2.0, vec![2.0, 2.0, 0.0]);
        let g = gamma_cost(&[], &inst).unwrap();
        let expected = 3.0 * 2f64.ln() + 1.0;
        assert!((g.total - expected).abs() < 1e-14);
    }

    #[test]
    fn prior_term_grows_by_penalty() {
        let p = ModelParams::new(20, 10, 0.1, 0.5, 1.0, 0.3).unwrap();
        let inst = generate_instance(&p, 3).unwrap();
        let a = gamma_cost(&[2, 5], &inst).unwrap();
        let b = gamma_cost(&[2, 5, 9], &inst).unwrap();
        assert!((b.gamma3 - a.gamma3 - 9f64.ln()).abs() < 1e-14);
        assert!(a.gamma2 >= 0.0);
    }

    #[test]
    fn rejects_invalid_supports() {
        let p = ModelParams::new(20, 10, 0.1, 0.5, 1.0, 0.3).unwrap();
        let inst = generate_instance(&p, 3).unwrap();
        assert!(gamma_cost(&[3, 3], &inst).is_err());
        assert!(gamma_cost(&[20], &inst).is_err());
    }

    #[test]
    fn exhaustive_returns_empty_without_signal() {
        let p = ModelParams::new(10, 6, 0.1, 0.0, 1e-6, 1.0).unwrap();
        let inst = generate_instance(&p, 1).unwrap();
        let inst = inst.with_observation(vec![0.0; 6]).unwrap();
        let est = exhaustive_map(&inst, 2).unwrap();
        assert!(est.support.is_empty());
        assert_eq!(est.supports_evaluated, 1 + 10 + 45);
        let greedy = greedy_map(&inst, 2).unwrap();
        assert!(greedy.support.is_empty());
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        let p = ModelParams::new(60, 10, 0.1, 0.0, 1.0, 1.0).unwrap();
        let inst = generate_instance(&p, 1).unwrap();
        assert!(matches!(
            exhaustive_map(&inst, 10),
            Err(Error::EnumerationLimit { .. })
        ));
    }

    #[test]
    fn greedy_respects_cap() {
        let p = ModelParams::new(20, 12, 0.2, 3.0, 1.0, 0.1).unwrap();
        for seed in 0..10 {
            let inst = generate_instance(&p, seed).unwrap();
            for cap in 0..4 {
                assert!(greedy_map(&inst, cap).unwrap().support.len() <= cap);
            }
        }
    }

    #[test]
    fn regression_on_empty_and_exact_support() {
        let p = ModelParams::new(12, 8, 0.2, 2.0, 1.0, 1e-12).unwrap();
        let inst = generate_instance(&p, 4).unwrap();
        assert_eq!(regress_on_support(&inst, &[]).unwrap(), vec![0.0; 12]);
        let noiseless = inst.matrix.matvec(inst.signal.values()).unwrap();
        let inst = inst.with_observation(noiseless).unwrap();
        let xhat = regress_on_support(&inst, inst.true_support()).unwrap();
        for (a, b) in xhat.iter().zip(inst.signal.values()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn regression_rejects_rank_deficiency() {
        let params = ModelParams::new(4, 3, 0.1, 0.0, 1.0, 1.0).unwrap();
        let a = DenseMatrix::from_fn(3, 4, |i, j| {
            if j == 3 {
                (i == 0) as u8 as f64
            } else {
                (i == j) as u8 as f64
            }
        });
        let inst =
            Instance::from_parts(params, a, SparseSignal::zero(4), vec![0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(
            regress_on_support(&inst, &[0, 3]),
            Err(Error::RankDeficient { .. })
        ));
        assert!(regress_on_support(&inst, &[0, 1, 2, 3]).is_err());
    }
}
