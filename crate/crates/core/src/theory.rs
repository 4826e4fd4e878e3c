//! Closed-form compression errors for continuous score distributions.
//!
//! For a distribution on `(0, n)` with CDF `F`, floor compression to `k`
//! options has error
//!
//! ```text
//! e_k = | E[X] - n + n/(k-1) · Σ_{i=1}^{k-1} F(n·i/k) |
//! ```
//!
//! and rounding compression has error
//!
//! ```text
//! e_k = | E[X] - n(2k-1)/(2k) + n/k · Σ_{i=1}^{k-1} F(n·i/k) |
//! ```
//!
//! so only `E[X]` and the `k-1` CDF values at the region cuts are needed.
//! The continuous floor rescaling is `n/(k-1)`; the discrete path in
//! [`crate::compression`] uses `(n-1)/(k-1)`. Do not mix the two.

use std::fmt;
use std::sync::Arc;

use crate::distributions::ScorePmf;
use crate::error::{Error, Result};

type CdfFn = dyn Fn(f64) -> Option<f64> + Send + Sync;

/// The statistics of a continuous distribution that the closed forms need.
#[derive(Clone)]
pub struct ContinuousSpec {
    n: f64,
    expected_value: f64,
    cdf: Arc<CdfFn>,
}

impl fmt::Debug for ContinuousSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousSpec")
            .field("n", &self.n)
            .field("expected_value", &self.expected_value)
            .finish_non_exhaustive()
    }
}

/// Relative tolerance used to match a requested cut against a tabulated one.
const CUT_MATCH_TOLERANCE: f64 = 1e-9;

impl ContinuousSpec {
    /// A spec whose CDF is defined everywhere.
    pub fn with_cdf<F>(n: f64, expected_value: f64, cdf: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(n, expected_value, Arc::new(move |c| Some(cdf(c))))
    }

    /// A spec known only through `(cut, F(cut))` pairs, e.g. estimated from
    /// historical ratings. Queries at other cuts fail.
    pub fn from_cut_values(n: f64, expected_value: f64, table: Vec<(f64, f64)>) -> Result<Self> {
        let mut sorted = table;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        if sorted.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(Error::invalid("tabulated CDF values are not monotone"));
        }
        Self::build(
            n,
            expected_value,
            Arc::new(move |c| {
                sorted
                    .iter()
                    .find(|(cut, _)| (cut - c).abs() <= CUT_MATCH_TOLERANCE * c.abs().max(1.0))
                    .map(|(_, v)| *v)
            }),
        )
    }

    fn build(n: f64, expected_value: f64, cdf: Arc<CdfFn>) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid(format!("n must be positive, got {n}")));
        }
        if !(0.0..=n).contains(&expected_value) {
            return Err(Error::invalid(format!(
                "expected value {expected_value} outside [0, {n}]"
            )));
        }
        Ok(Self {
            n,
            expected_value,
            cdf,
        })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn expected_value(&self) -> f64 {
        self.expected_value
    }

    pub fn cdf_at(&self, cut: f64) -> Result<f64> {
        let value =
            (self.cdf)(cut).ok_or_else(|| Error::invalid(format!("no CDF value at cut {cut}")))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!(
                "CDF value {value} at {cut} outside [0, 1]"
            )));
        }
        Ok(value)
    }

    /// `Σ_{i=1}^{k-1} F(n·i/k)`, checking monotonicity across the cuts.
    fn cut_sum(&self, k: usize) -> Result<f64> {
        if k < 2 {
            return Err(Error::invalid(format!("k must be at least 2, got {k}")));
        }
        let mut sum = 0.0;
        let mut prev = 0.0;
        for i in 1..k {
            let value = self.cdf_at(self.n * i as f64 / k as f64)?;
            if value < prev {
                return Err(Error::invalid("CDF decreases across the region cuts"));
            }
            prev = value;
            sum += value;
        }
        Ok(sum)
    }
}

pub fn floor_error_continuous(spec: &ContinuousSpec, k: usize) -> Result<f64> {
    let sum = spec.cut_sum(k)?;
    let n = spec.n;
    Ok((spec.expected_value - n + n / (k - 1) as f64 * sum).abs())
}

pub fn rounding_error_continuous(spec: &ContinuousSpec, k: usize) -> Result<f64> {
    let sum = spec.cut_sum(k)?;
    let n = spec.n;
    let k = k as f64;
    Ok((spec.expected_value - n * (2.0 * k - 1.0) / (2.0 * k) + n / k * sum).abs())
}

/// `(k-1) - Σ_{i=1}^{k-1} P(score < n·i/k)`.
///
/// With the strict-below CDF this is exactly the floor-compressed mean of
/// `pmf`, because score `s` lies below cut `n·i/k` iff its region is below `i`.
pub fn discrete_closed_form_mean(pmf: &ScorePmf, k: usize) -> Result<f64> {
    let n = pmf.n();
    if k < 2 || k > n {
        return Err(Error::invalid(format!("k must be in 2..={n}, got {k}")));
    }
    let sum: f64 = (1..k)
        .map(|i| pmf.cdf_below((n * i) as f64 / k as f64))
        .sum();
    Ok((k - 1) as f64 - sum)
}

/// Mass `p1` at `x1` and `1 - p1` at `x2`.
pub fn two_point_spec(x1: f64, p1: f64, x2: f64, n: f64) -> Result<ContinuousSpec> {
    if !(0.0 < x1 && x1 < x2 && x2 < n) {
        return Err(Error::invalid(format!(
            "two-point spec needs 0 < x1 < x2 < n, got x1={x1}, x2={x2}, n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::invalid(format!(
            "p1 must be a probability, got {p1}"
        )));
    }
    let expected_value = p1 * x1 + (1.0 - p1) * x2;
    ContinuousSpec::with_cdf(n, expected_value, move |c| {
        if c <= x1 {
            0.0
        } else if c <= x2 {
            p1
        } else {
            1.0
        }
    })
}

/// On a `(0, 100)` scale, whether floor `k = 2` beats `k = 3`, decided by
/// `F(50) - F(100/3) < F(200/3) - F(50)`.
///
/// The reduction only holds when both compressed means (rescaled) are at or
/// below `E[X]`, i.e. both expressions inside the absolute values are
/// non-negative; otherwise `None`.
pub fn two_beats_three_by_mass(spec: &ContinuousSpec) -> Result<Option<bool>> {
    let n = spec.n;
    let ev = spec.expected_value;
    let f_third = spec.cdf_at(n / 3.0)?;
    let f_half = spec.cdf_at(n / 2.0)?;
    let f_two_thirds = spec.cdf_at(2.0 * n / 3.0)?;
    let inner2 = ev - n + n * f_half;
    let inner3 = ev - n + n / 2.0 * (f_third + f_two_thirds);
    if inner2 < 0.0 || inner3 < 0.0 {
        return Ok(None);
    }
    Ok(Some(f_half - f_third < f_two_thirds - f_half))
}
