//! Closed-form constants and probability lower bounds for the constrained
//! MAP estimator: the missed-energy bound, the no-miss and perfect-recovery
//! mean thresholds, the chi-squared and binomial tail bounds, and the error
//! bound of least squares on the estimated support.
//!
//! `Np` is used as a real number throughout. Probability lower bounds can
//! go negative at small `Np`; they are clamped to `[0, 1]` and the raw value
//! is kept alongside a `vacuous` flag.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// `2 ln 2 − 1`, the binomial Chernoff exponent at `δ = 1`.
pub const CHERNOFF_EXPONENT: f64 = 2.0 * core::f64::consts::LN_2 - 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub beta: f64,
    pub beta_bar: f64,
}

impl BoundParams {
    pub fn new(beta: f64, beta_bar: f64) -> Result<Self> {
        check_beta("beta", beta)?;
        check_beta("beta_bar", beta_bar)?;
        Ok(Self { beta, beta_bar })
    }

    pub fn validate(&self) -> Result<()> {
        check_beta("beta", self.beta)?;
        check_beta("beta_bar", self.beta_bar)
    }
}

fn check_beta(name: &'static str, v: f64) -> Result<()> {
    if v > 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must be finite and greater than 1"))
    }
}

fn check_sparsity(params: &ModelParams) -> Result<()> {
    if params.p > 0.0 && params.p < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid("p", params.p, "bounds need 0 < p < 0.5"))
    }
}

/// `β − 1 − ln β`, positive for every `β > 1`.
fn tail_rate(beta: f64) -> f64 {
    beta - 1.0 - beta.ln()
}

/// A probability lower bound together with its raw (possibly negative) value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityBound {
    pub value: f64,
    pub unclamped: f64,
    /// Set when the raw value is not positive, i.e. the bound says nothing.
    pub vacuous: bool,
}

impl ProbabilityBound {
    fn from_raw(raw: f64) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            unclamped: raw,
            vacuous: !(raw > 0.0),
        }
    }
}

/// `C = ln(1 + 4σ1²/(3σe²)) + 2 ln((1−p)/p)`.
pub fn constant_c(params: &ModelParams) -> Result<f64> {
    check_sparsity(params)?;
    Ok((1.0 + 4.0 * params.variance_ratio() / 3.0).ln() + 2.0 * params.prior_penalty())
}

/// `K1 = 2(√(7β + C) + √β)`.
pub fn k1(beta: f64, c: f64) -> f64 {
    2.0 * ((7.0 * beta + c).sqrt() + beta.sqrt())
}

/// `1 − e^{−Np(2 ln 2 − 1)}`: Chernoff lower bound on `P[|S| ≤ 2Np]`.
pub fn event_e_prob_lower(params: &ModelParams) -> f64 {
    -(-params.expected_sparsity() * CHERNOFF_EXPONENT).exp_m1()
}

/// `e^{−(n/2)(β − 1 − ln β)}`, the Chernoff bound on `P[Z > βnσ²]` for a
/// sum `Z` of `n` squared i.i.d. `N(0, σ²)` variables.
pub fn chi_sq_tail_bound(n: usize, beta: f64) -> Result<f64> {
    check_beta("beta", beta)?;
    if n == 0 {
        return Err(Error::invalid(
            "n",
            0.0,
            "need at least one degree of freedom",
        ));
    }
    Ok((-(n as f64) / 2.0 * tail_rate(beta)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Result {
    pub beta: f64,
    pub c: f64,
    pub k1: f64,
    /// `K1² Np σe²`, bound on the energy of the missed coefficients.
    pub energy_bound: f64,
    /// `K1 √(Np) σe`, bound on their ℓ2 norm.
    pub norm_bound: f64,
    pub prob_lower: f64,
    pub prob_lower_unclamped: f64,
    pub vacuous: bool,
    /// `3e^{−Np(β−1−ln β)}`, the β-dependent deficit in `prob_lower`. It
    /// stays resolvable in `f64` long after `prob_lower` itself has rounded
    /// to its `β → ∞` limit.
    pub tail_term: f64,
}

/// Missed-energy bound and the probability it holds:
/// `(1 − e^{−Np(2ln2−1)})(1 − 3e^{−Np(β−1−ln β)})`.
pub fn theorem1(params: &ModelParams, beta: f64) -> Result<Theorem1Result> {
    check_beta("beta", beta)?;
    let c = constant_c(params)?;
    let np = params.expected_sparsity();
    let k1 = k1(beta, c);
    let tail_term = 3.0 * (-np * tail_rate(beta)).exp();
    let prob = ProbabilityBound::from_raw(event_e_prob_lower(params) * (1.0 - tail_term));
    Ok(Theorem1Result {
        beta,
        c,
        k1,
        energy_bound: k1 * k1 * np * params.sigma_e * params.sigma_e,
        norm_bound: k1 * np.sqrt() * params.sigma_e,
        prob_lower: prob.value,
        prob_lower_unclamped: prob.unclamped,
        vacuous: prob.vacuous,
        tail_term,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Result {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// `K2 σ1 + K1 √(Np) σe`.
    pub mu_threshold_no_miss: f64,
    /// `K3 σ1 + K4 √(Np) σe`.
    pub mu_threshold_perfect: f64,
    pub prob_no_miss: f64,
    pub prob_perfect: f64,
    pub prob_unclamped: f64,
    pub vacuous: bool,
}

/// Mean thresholds for no missed coefficient and for exact support recovery.
/// Both events share the probability
/// `(1 − e^{−Np(2ln2−1)})(1 − 3e^{−Np(β−1−ln β)} − e^{−(β̄−1−ln β̄)/2})`.
pub fn theorem2(params: &ModelParams, bounds: &BoundParams) -> Result<Theorem2Result> {
    bounds.validate()?;
    let t1 = theorem1(params, bounds.beta)?;
    let np = params.expected_sparsity();
    let beta = bounds.beta;
    let k1 = t1.k1;
    let k2 = bounds.beta_bar.sqrt();
    let k3 = k2.max(6.0 * (2.0 * beta * np).sqrt());
    let k4 = k1.max(3.0 * (0.5 + 3f64.sqrt()) * (2.0 * beta).sqrt());
    let factor =
        1.0 - 3.0 * (-np * tail_rate(beta)).exp() - (-tail_rate(bounds.beta_bar) / 2.0).exp();
    let prob = ProbabilityBound::from_raw(event_e_prob_lower(params) * factor);
    let noise_scale = np.sqrt() * params.sigma_e;
    Ok(Theorem2Result {
        k1,
        k2,
        k3,
        k4,
        mu_threshold_no_miss: k2 * params.sigma1 + k1 * noise_scale,
        mu_threshold_perfect: k3 * params.sigma1 + k4 * noise_scale,
        prob_no_miss: prob.value,
        prob_perfect: prob.value,
        prob_unclamped: prob.unclamped,
        vacuous: prob.vacuous,
    })
}

/// `(K1/(1−ε) + √(β/(1−ε))) √(Np) σe`, the ℓ2 error bound of least squares
/// on the estimated support, for an RIP constant `ε ∈ [0, 1/3]`.
pub fn regression_error_bound(params: &ModelParams, beta: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0 / 3.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon", epsilon, "must lie in [0, 1/3]"));
    }
    regression_error_bound_formula(params, beta, epsilon)
}

/// Same closed form as [`regression_error_bound`] for any `ε ∈ [0, 1)`,
/// outside the range where the constants are advertised. Used to compare
/// against measured RIP constants on small matrices, where `ε` is rarely
/// below 1/3.
pub fn regression_error_bound_formula(
    params: &ModelParams,
    beta: f64,
    epsilon: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon", epsilon, "must lie in [0, 1)"));
    }
    let t1 = theorem1(params, beta)?;
    let shrink = 1.0 - epsilon;
    Ok((t1.k1 / shrink + (beta / shrink).sqrt())
        * params.expected_sparsity().sqrt()
        * params.sigma_e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub beta: f64,
    pub k1: f64,
    pub prob_lower: f64,
    /// See [`Theorem1Result::tail_term`].
    pub tail_term: f64,
}

/// `K1` and the missed-energy probability bound over a grid of `β`, in grid
/// order.
pub fn fig1_sweep(params: &ModelParams, beta_grid: &[f64]) -> Result<Vec<Fig1Row>> {
    beta_grid
        .iter()
        .map(|&beta| {
            theorem1(params, beta).map(|t| Fig1Row {
                beta,
                k1: t.k1,
                prob_lower: t.prob_lower,
                tail_term: t.tail_term,
            })
        })
        .collect()
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}
