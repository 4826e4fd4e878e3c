//! Compression of a fine score distribution onto `k` coarse options.
//!
//! Score `s` on `{0, .., n-1}` falls in region `⌊s / (n/k)⌋`. Each region
//! carries a representative score: its index under the floor scheme, the
//! region midpoint `n(2i+1)/(2k)` under the rounding scheme, or any
//! caller-supplied value under a custom scheme.

use serde::{Deserialize, Serialize};

use crate::distributions::ScorePmf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Floor,
    Rounding,
    /// One representative score per region, on the fine scale.
    Custom(Vec<f64>),
}

impl Scheme {
    /// Representative scores `(s_0, .., s_{k-1})` for `k` regions of an
    /// `n`-level scale.
    pub fn region_scores(&self, n: usize, k: usize) -> Result<Vec<f64>> {
        match self {
            Scheme::Floor => Ok((0..k).map(|i| i as f64).collect()),
            Scheme::Rounding => Ok((0..k).map(|i| midpoint(n, k, i)).collect()),
            Scheme::Custom(scores) if scores.len() == k => Ok(scores.clone()),
            Scheme::Custom(scores) => Err(Error::invalid(format!(
                "custom scheme has {} region scores, k is {k}",
                scores.len()
            ))),
        }
    }

    /// Error of a compressed mean against the ground-truth mean.
    ///
    /// Floor scores live on `{0, .., k-1}` and are rescaled by
    /// `(n-1)/(k-1)`; rounding and custom scores are already on the fine scale.
    pub fn error(&self, a_f: f64, a_k: f64, n: usize, k: usize) -> Result<f64> {
        match self {
            Scheme::Floor => error_floor_discrete(a_f, a_k, n, k),
            Scheme::Rounding | Scheme::Custom(_) => Ok(error_rounding_discrete(a_f, a_k)),
        }
    }
}

/// Midpoint of region `i`, `n(2i+1)/(2k)`.
pub fn midpoint(n: usize, k: usize, i: usize) -> f64 {
    (n * (2 * i + 1)) as f64 / (2 * k) as f64
}

/// Inclusive range of region indices a rater is allowed to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClampRange {
    pub lo: usize,
    pub hi: usize,
}

impl ClampRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.lo > self.hi || self.hi >= k {
            return Err(Error::invalid(format!(
                "clamp range {}..={} is not within 0..={}",
                self.lo,
                self.hi,
                k.saturating_sub(1)
            )));
        }
        Ok(())
    }

    pub fn apply(&self, region: usize) -> usize {
        region.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressedPmf {
    n: usize,
    k: usize,
    region_mass: Vec<f64>,
    region_scores: Vec<f64>,
    scheme: Scheme,
}

impl CompressedPmf {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn region_mass(&self) -> &[f64] {
        &self.region_mass
    }

    pub fn region_scores(&self) -> &[f64] {
        &self.region_scores
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// The compressed average `a_k = Σ region_mass[i] · region_scores[i]`.
    pub fn mean(&self) -> f64 {
        self.region_mass
            .iter()
            .zip(&self.region_scores)
            .map(|(m, s)| m * s)
            .sum()
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!("k must be in 2..={n}, got {k}")));
    }
    Ok(())
}

/// Region of score `s`: `⌊s / (n/k)⌋`.
///
/// Evaluated as `⌊s·k / n⌋` in integers, which is the same rational and
/// never misplaces a score sitting exactly on a region boundary.
pub fn region_index(s: usize, n: usize, k: usize) -> Result<usize> {
    check_k(n, k)?;
    if s >= n {
        return Err(Error::invalid(format!("score {s} outside 0..{n}")));
    }
    Ok(s * k / n)
}

pub fn compress_pmf(pmf: &ScorePmf, k: usize, scheme: &Scheme) -> Result<CompressedPmf> {
    let n = pmf.n();
    check_k(n, k)?;
    let region_scores = scheme.region_scores(n, k)?;
    let mut region_mass = vec![0.0; k];
    for (s, m) in pmf.mass().iter().enumerate() {
        region_mass[s * k / n] += m;
    }
    Ok(CompressedPmf {
        n,
        k,
        region_mass,
        region_scores,
        scheme: scheme.clone(),
    })
}

/// Moves mass outside `range` onto its nearest end. Region scores are kept,
/// so under rounding the clamped mass takes the boundary region's midpoint.
pub fn clamp_regions(c: &CompressedPmf, range: ClampRange) -> Result<CompressedPmf> {
    range.validate(c.k)?;
    let mut region_mass = vec![0.0; c.k];
    for (i, m) in c.region_mass.iter().enumerate() {
        region_mass[range.apply(i)] += m;
    }
    Ok(CompressedPmf {
        region_mass,
        ..c.clone()
    })
}

/// `|a_f - (n-1)/(k-1) · a_k|`.
pub fn error_floor_discrete(a_f: f64, a_k: f64, n: usize, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "floor error needs k >= 2 for its (n-1)/(k-1) rescaling, got {k}"
        )));
    }
    let scale = (n - 1) as f64 / (k - 1) as f64;
    Ok((a_f - scale * a_k).abs())
}

/// `|a_f - a_k|`; rounding scores need no rescaling.
pub fn error_rounding_discrete(a_f: f64, a_k: f64) -> f64 {
    (a_f - a_k).abs()
}
