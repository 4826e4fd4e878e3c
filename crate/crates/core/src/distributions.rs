//! Discrete ground-truth score distributions and the two generative models
//! used by the simulations.
//!
//! A [`ScorePmf`] is a probability mass function over the integer scores
//! `{0, .., n-1}`. The uniform model draws one `U(0,1)` weight per score and
//! normalizes; the Gaussian model histograms clamped, rounded normal draws.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `Σ mass = 1`.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePmf {
    mass: Vec<f64>,
}

impl ScorePmf {
    /// Builds a pmf from masses that already sum to one.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::invalid(format!(
                "a score distribution needs n >= 2 levels, got {}",
                mass.len()
            )));
        }
        if let Some((s, m)) = mass
            .iter()
            .enumerate()
            .find(|(_, m)| !m.is_finite() || **m < 0.0)
        {
            return Err(Error::invalid(format!("mass at score {s} is {m}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::invalid(format!("masses sum to {total}, expected 1")));
        }
        Ok(Self { mass })
    }

    /// Normalizes non-negative weights into a pmf.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::invalid(format!(
                "weight {w} is not a non-negative number"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights sum to zero"));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// All mass on a single score.
    pub fn point_mass(n: usize, score: usize) -> Result<Self> {
        if score >= n {
            return Err(Error::invalid(format!("score {score} outside 0..{n}")));
        }
        let mut mass = vec![0.0; n];
        mass[score] = 1.0;
        Self::new(mass)
    }

    /// Equal mass `1/n` on every score.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// The ground-truth average `Σ s·mass[s]`.
    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(s, m)| s as f64 * m)
            .sum()
    }

    /// `P(score < cut)`, the strict-below CDF.
    pub fn cdf_below(&self, cut: f64) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .take_while(|(s, _)| (*s as f64) < cut)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Parameters of the Gaussian generative model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaussianParams {
    /// Number of normal draws histogrammed into one pmf.
    pub sample_count: u64,
    pub mu: f64,
    pub sigma: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self {
            sample_count: 1000,
            mu: 50.0,
            sigma: 50.0 / 3.0,
        }
    }
}

impl GaussianParams {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::invalid("sample_count must be at least 1"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::invalid(format!(
                "mu must be finite, got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

/// Root seed for every random stream in an experiment.
///
/// Stream `i` is ChaCha8 keyed with `seed_from_u64(seed)` and positioned on
/// stream number `i` (`set_stream(i)`). The mapping depends only on the seed
/// and the index, so trial `i` sees the same randomness however trials are
/// scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

/// Uniform model: one `U(0,1)` draw per score, normalized to sum one.
pub fn gen_uniform_pmf<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ScorePmf> {
    if n < 2 {
        return Err(Error::invalid(format!("n must be at least 2, got {n}")));
    }
    let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    ScorePmf::from_weights(&weights)
}

/// Gaussian model: `sample_count` draws from `Normal(mu, sigma)`, each
/// clamped to `[0, n-1]` and rounded half-up into a histogram.
pub fn gen_gaussian_pmf<R: Rng + ?Sized>(
    n: usize,
    params: &GaussianParams,
    rng: &mut R,
) -> Result<ScorePmf> {
    if n < 2 {
        return Err(Error::invalid(format!("n must be at least 2, got {n}")));
    }
    params.validate()?;
    let normal = Normal::new(params.mu, params.sigma)
        .map_err(|e| Error::invalid(format!("normal distribution: {e}")))?;
    let mut counts = vec![0u64; n];
    for _ in 0..params.sample_count {
        counts[gaussian_bin(normal.sample(rng), n)] += 1;
    }
    let total = params.sample_count as f64;
    ScorePmf::new(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// Histogram bin of one raw Gaussian draw.
pub(crate) fn gaussian_bin(draw: f64, n: usize) -> usize {
    let top = (n - 1) as f64;
    let clamped = draw.clamp(0.0, top);
    (clamped + 0.5).floor() as usize
}
