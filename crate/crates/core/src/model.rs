//! Bernoulli-Gaussian signal model, Gaussian measurement ensemble and the
//! empirical restricted-isometry constant.

use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::combinations::{binomial, Combinations};
use crate::error::{Error, Result};
use crate::linalg::{singular_values, DenseMatrix};

/// Maximum number of supports visited by exhaustive RIP estimation.
pub const RIP_ENUMERATION_CAP: u128 = 2_000_000;

/// Scalar constants of the generative model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Ambient dimension `N`.
    pub n: usize,
    /// Number of measurements `M`.
    pub m: usize,
    /// Inclusion probability of each index.
    pub p: f64,
    /// Mean of the active coefficients.
    pub mu1: f64,
    /// Standard deviation of the active coefficients.
    pub sigma1: f64,
    /// Noise standard deviation.
    pub sigma_e: f64,
}

impl ModelParams {
    pub fn new(n: usize, m: usize, p: f64, mu1: f64, sigma1: f64, sigma_e: f64) -> Result<Self> {
        let params = Self {
            n,
            m,
            p,
            mu1,
            sigma1,
            sigma_e,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks `0 ≤ p < ½`, `0 < M < N` and strictly positive deviations.
    ///
    /// `p = 0` is accepted so that degenerate signal-free campaigns can be
    /// generated; the bound formulas reject it separately.
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("m", 0.0, "need at least one measurement"));
        }
        if self.m >= self.n {
            return Err(Error::invalid("m", self.m as f64, "must be smaller than n"));
        }
        if !(self.p >= 0.0 && self.p < 0.5) {
            return Err(Error::invalid("p", self.p, "must lie in [0, 0.5)"));
        }
        if !self.mu1.is_finite() {
            return Err(Error::invalid("mu1", self.mu1, "must be finite"));
        }
        if !(self.sigma1 > 0.0 && self.sigma1.is_finite()) {
            return Err(Error::invalid("sigma1", self.sigma1, "must be positive"));
        }
        if !(self.sigma_e > 0.0 && self.sigma_e.is_finite()) {
            return Err(Error::invalid("sigma_e", self.sigma_e, "must be positive"));
        }
        Ok(())
    }

    /// Expected support size `Np`.
    pub fn expected_sparsity(&self) -> f64 {
        self.n as f64 * self.p
    }

    /// `floor(q·Np)`, the cardinality cap of the constrained estimator.
    pub fn cardinality_cap(&self, q: f64) -> usize {
        (q * self.expected_sparsity()).floor() as usize
    }

    /// Prior penalty per active index, `ln((1−p)/p)`.
    pub fn prior_penalty(&self) -> f64 {
        ((1.0 - self.p) / self.p).ln()
    }

    /// `σ1² / σe²`.
    pub fn variance_ratio(&self) -> f64 {
        (self.sigma1 * self.sigma1) / (self.sigma_e * self.sigma_e)
    }
}

/// Support set plus the dense coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSignal {
    /// Validates that `support` is sorted, duplicate free and that `values`
    /// vanishes off the support.
    pub fn new(support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_support(&support, values.len())?;
        let mut on = support.iter().peekable();
        for (i, &v) in values.iter().enumerate() {
            if on.peek() == Some(&&i) {
                on.next();
            } else if v != 0.0 {
                return Err(Error::invalid("value", v, "nonzero entry off the support"));
            }
        }
        Ok(Self { support, values })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            support: Vec::new(),
            values: alloc::vec![0.0; n],
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn energy(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v * v)
            .fold(0.0, |acc, v| acc + v)
    }
}

/// Ensures a support is sorted, duplicate free and inside `{0..dim}`.
pub(crate) fn check_support(support: &[usize], dim: usize) -> Result<()> {
    for w in support.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Other(alloc::format!(
                "support must be strictly increasing, found {} before {}",
                w[0],
                w[1]
            )));
        }
    }
    if let Some(&last) = support.last() {
        if last >= dim {
            return Err(Error::IndexOutOfRange { index: last, dim });
        }
    }
    Ok(())
}

/// One generated problem `y = A x + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub params: ModelParams,
    pub matrix: DenseMatrix,
    pub signal: SparseSignal,
    pub noise: Vec<f64>,
    pub observation: Vec<f64>,
}

impl Instance {
    /// Assembles an instance from its parts, computing `y = A x + e`.
    pub fn from_parts(
        params: ModelParams,
        matrix: DenseMatrix,
        signal: SparseSignal,
        noise: Vec<f64>,
    ) -> Result<Self> {
        if matrix.shape() != (params.m, params.n) {
            return Err(Error::DimensionMismatch {
                expected: params.m * params.n,
                found: matrix.rows() * matrix.cols(),
            });
        }
        if noise.len() != params.m {
            return Err(Error::DimensionMismatch {
                expected: params.m,
                found: noise.len(),
            });
        }
        let mut observation = matrix.matvec(signal.values())?;
        for (y, e) in observation.iter_mut().zip(&noise) {
            *y += e;
        }
        Ok(Self {
            params,
            matrix,
            signal,
            noise,
            observation,
        })
    }

    /// Same instance with a replaced observation vector (noise is kept for
    /// reference but no longer satisfies `y = Ax + e`).
    pub fn with_observation(mut self, observation: Vec<f64>) -> Result<Self> {
        if observation.len() != self.params.m {
            return Err(Error::DimensionMismatch {
                expected: self.params.m,
                found: observation.len(),
            });
        }
        self.observation = observation;
        Ok(self)
    }

    pub fn true_support(&self) -> &[usize] {
        self.signal.support()
    }
}

/// Labels of the independent random streams carved out of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Support,
    Signal,
    Matrix,
    Noise,
    Trial,
    Rip,
    Propositions,
}

impl Stream {
    fn tag(self) -> u64 {
        let bytes: &[u8; 8] = match self {
            Stream::Support => b"support\0",
            Stream::Signal => b"signal\0\0",
            Stream::Matrix => b"matrix\0\0",
            Stream::Noise => b"noise\0\0\0",
            Stream::Trial => b"trial\0\0\0",
            Stream::Rip => b"rip\0\0\0\0\0",
            Stream::Propositions => b"props\0\0\0",
        };
        u64::from_be_bytes(*bytes)
    }
}

/// Generator for one labelled stream of `seed`. Streams with different labels
/// never overlap, so draw order between them is irrelevant.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.tag());
    rng
}

/// Derives the `index`-th child seed of `master` on the given stream.
pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    let mut rng = stream_rng(master, stream);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}

/// Each index joins the support independently with probability `p`.
pub fn draw_support<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Vec<usize> {
    let p = params.p.clamp(0.0, 1.0);
    (0..params.n).filter(|_| rng.random_bool(p)).collect()
}

/// Fills the support with i.i.d. `N(μ1, σ1²)` draws.
pub fn draw_signal<R: Rng + ?Sized>(
    support: &[usize],
    params: &ModelParams,
    rng: &mut R,
) -> Result<SparseSignal> {
    check_support(support, params.n)?;
    let normal = Normal::new(params.mu1, params.sigma1)
        .map_err(|_| Error::invalid("sigma1", params.sigma1, "must be positive"))?;
    let mut values = alloc::vec![0.0; params.n];
    for &i in support {
        values[i] = normal.sample(rng);
    }
    Ok(SparseSignal {
        support: support.to_vec(),
        values,
    })
}

/// `M×N` matrix with i.i.d. `N(0, 1/M)` entries.
pub fn draw_matrix<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> DenseMatrix {
    let sd = 1.0 / (params.m as f64).sqrt();
    let normal = Normal::new(0.0, sd).expect("positive deviation");
    DenseMatrix::from_fn(params.m, params.n, |_, _| normal.sample(rng))
}

fn draw_noise<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Vec<f64> {
    let normal = Normal::new(0.0, params.sigma_e).expect("validated");
    (0..params.m).map(|_| normal.sample(rng)).collect()
}

/// Draws a full instance; every component comes from its own labelled
/// stream of `seed`.
pub fn generate_instance(params: &ModelParams, seed: u64) -> Result<Instance> {
    params.validate()?;
    let support = draw_support(params, &mut stream_rng(seed, Stream::Support));
    let signal = draw_signal(&support, params, &mut stream_rng(seed, Stream::Signal))?;
    let matrix = draw_matrix(params, &mut stream_rng(seed, Stream::Matrix));
    let noise = draw_noise(params, &mut stream_rng(seed, Stream::Noise));
    Instance::from_parts(*params, matrix, signal, noise)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMode {
    Exhaustive,
    Sampled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub sparsity_level: usize,
    pub epsilon_hat: f64,
    pub exhaustive: bool,
    pub supports_checked: u64,
}

/// `max(σ_max² − 1, 1 − σ_min²)` for the columns of `a` listed in `support`.
pub fn isometry_deviation(a: &DenseMatrix, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Ok(0.0);
    }
    let sub = a.select_columns(support);
    let s = singular_values(&sub)?;
    let hi = s[0];
    // more columns than rows: some combination is annihilated
    let lo = if support.len() > a.rows() {
        0.0
    } else {
        *s.last().expect("nonempty")
    };
    Ok((hi * hi - 1.0).max(1.0 - lo * lo))
}

/// Empirical RIP constant of `a` at sparsity level `k`.
///
/// Exhaustive mode visits every `k`-column support. Supports smaller than `k`
/// need no visit: by eigenvalue interlacing, the Gram spectrum of a
/// sub-support lies inside that of any superset. Sampled mode gives a lower
/// bound from `n` uniformly drawn supports.
pub fn estimate_rip<R: Rng + ?Sized>(
    a: &DenseMatrix,
    k: usize,
    mode: RipMode,
    rng: &mut R,
) -> Result<RipEstimate> {
    let n = a.cols();
    if k > n {
        return Err(Error::invalid(
            "k",
            k as f64,
            "exceeds the number of columns",
        ));
    }
    if k == 0 {
        return Ok(RipEstimate {
            sparsity_level: 0,
            epsilon_hat: 0.0,
            exhaustive: true,
            supports_checked: 1,
        });
    }
    match mode {
        RipMode::Exhaustive => {
            let candidates = binomial(n, k);
            if candidates > RIP_ENUMERATION_CAP {
                return Err(Error::EnumerationLimit {
                    what: "exhaustive RIP estimation",
                    candidates,
                    limit: RIP_ENUMERATION_CAP,
                    hint: "use sampled mode instead",
                });
            }
            let mut eps: f64 = 0.0;
            let mut checked = 0u64;
            for support in Combinations::new(n, k) {
                eps = eps.max(isometry_deviation(a, &support)?);
                checked += 1;
            }
            Ok(RipEstimate {
                sparsity_level: k,
                epsilon_hat: eps,
                exhaustive: true,
                supports_checked: checked,
            })
        }
        RipMode::Sampled(samples) => {
            let mut eps: f64 = 0.0;
            for _ in 0..samples {
                let mut support = index::sample(rng, n, k).into_vec();
                support.sort_unstable();
                eps = eps.max(isometry_deviation(a, &support)?);
            }
            Ok(RipEstimate {
                sparsity_level: k,
                epsilon_hat: eps,
                exhaustive: false,
                supports_checked: samples as u64,
            })
        }
    }
}
