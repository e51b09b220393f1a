// SPDX-License-Identifier: MIT OR Apache-2.0

//! Offline change-point detection by binary segmentation.
//!
//! Each candidate segment is scanned for the split maximizing a two-sample
//! statistic: the pooled Student-t statistic for changes in mean, or the
//! absolute log variance ratio (a symmetric F statistic) for changes in
//! variance. The maximum is compared against its permutation distribution
//! within the segment; significant splits are accepted and both halves are
//! searched again.
//!
//! Change points are observation indices. With augmented breakpoints
//! `0 = c_0 < c_1 < ... < c_m < c_{m+1} = H`, segment `i` owns the
//! observations `c_i..c_{i+1}`, and the final segment also owns index `H`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Statistical attribute tracked between change points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Mean,
    Variance,
}

impl Attribute {
    /// Smallest admissible `min_segment` for this attribute.
    pub fn min_segment_floor(self) -> usize {
        match self {
            Attribute::Mean => 2,
            Attribute::Variance => 3,
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attribute::Mean => "mean",
            Attribute::Variance => "variance",
        })
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(Attribute::Mean),
            "variance" | "var" => Ok(Attribute::Variance),
            other => Err(Error::Config(format!("unknown attribute `{other}`"))),
        }
    }
}

/// Strictly increasing interior change points of a series with horizon `H`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChangePointSet {
    points: Vec<usize>,
    horizon: usize,
}

impl ChangePointSet {
    pub fn new(points: Vec<usize>, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidChangePoints("horizon must be positive".into()));
        }
        for w in points.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidChangePoints(format!(
                    "points not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&c) = points.iter().find(|&&c| c == 0 || c >= horizon) {
            return Err(Error::InvalidChangePoints(format!("point {c} not interior to (0, {horizon})")));
        }
        Ok(Self { points, horizon })
    }

    pub fn empty(horizon: usize) -> Result<Self> {
        Self::new(Vec::new(), horizon)
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `[0, c_1, ..., c_m, H]`.
    pub fn augmented(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.points.len() + 2);
        out.push(0);
        out.extend_from_slice(&self.points);
        out.push(self.horizon);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub attribute: Attribute,
    /// Per-test significance level of the permutation test.
    pub significance: f64,
    /// Minimum gap between consecutive augmented breakpoints.
    pub min_segment: usize,
    /// Number of permutations calibrating each max-statistic test.
    pub permutations: usize,
    pub seed: u64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self { attribute: Attribute::Mean, significance: 0.05, min_segment: 30, permutations: 199, seed: 0 }
    }
}

impl DetectionParams {
    pub fn with_attribute(attribute: Attribute) -> Self {
        Self { attribute, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::InvalidParams(format!("significance must lie in (0, 1), got {}", self.significance)));
        }
        let floor = self.attribute.min_segment_floor();
        if self.min_segment < floor {
            return Err(Error::InvalidParams(format!(
                "min_segment must be >= {floor} for {}, got {}",
                self.attribute, self.min_segment
            )));
        }
        if self.permutations == 0 {
            return Err(Error::InvalidParams("permutations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Detect change points of `series` with respect to `params.attribute`.
///
/// Deterministic: the permutation stream of every tested segment is seeded
/// from `(params.seed, segment bounds)`, so the result does not depend on
/// the order in which segments are visited.
pub fn detect_change_points(series: &TimeSeries, params: &DetectionParams) -> Result<ChangePointSet> {
    params.validate()?;
    let n = series.len();
    let needed = 2 * params.min_segment;
    if n < needed {
        return Err(Error::SeriesTooShort { id: series.id().to_string(), len: n, needed });
    }
    let horizon = series.horizon();
    let values = series.values();

    let mut found = Vec::new();
    let mut pending = vec![(0usize, horizon)];
    while let Some((lo, hi)) = pending.pop() {
        if let Some(k) = test_segment(values, lo, hi, horizon, params) {
            found.push(k);
            pending.push((lo, k));
            pending.push((k, hi));
        }
    }
    found.sort_unstable();
    ChangePointSet::new(found, horizon)
}

/// Observations owned by the segment between breakpoints `lo` and `hi`.
fn segment_slice(values: &[f64], lo: usize, hi: usize, horizon: usize) -> &[f64] {
    if hi == horizon {
        &values[lo..=hi]
    } else {
        &values[lo..hi]
    }
}

/// Returns the accepted split of segment `(lo, hi)`, if any.
fn test_segment(values: &[f64], lo: usize, hi: usize, horizon: usize, params: &DetectionParams) -> Option<usize> {
    let m = params.min_segment;
    if hi - lo < 2 * m {
        return None;
    }
    let obs = segment_slice(values, lo, hi, horizon);
    // relative split r: left = obs[..r], right = obs[r..]; gaps r and (hi-lo)-r
    let splits = m..=(hi - lo - m);
    let mut scanner = Scanner::new(params.attribute);
    let (best_r, observed) = scanner.scan(obs, splits.clone());
    if observed.is_nan() || observed <= 0.0 {
        return None;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(segment_seed(params.seed, lo, hi));
    let mut shuffled = obs.to_vec();
    let total = (params.permutations + 1) as f64;
    let mut exceed = 0usize;
    for _ in 0..params.permutations {
        shuffled.shuffle(&mut rng);
        let (_, stat) = scanner.scan(&shuffled, splits.clone());
        if stat >= observed {
            exceed += 1;
            if (exceed + 1) as f64 / total > params.significance {
                return None;
            }
        }
    }
    let p_value = (exceed + 1) as f64 / total;
    (p_value <= params.significance).then_some(lo + best_r)
}

fn segment_seed(seed: u64, lo: usize, hi: usize) -> u64 {
    let mut z = seed ^ (lo as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (hi as u64).rotate_left(32);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Prefix-sum scanner reused across permutations.
struct Scanner {
    attribute: Attribute,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Scanner {
    fn new(attribute: Attribute) -> Self {
        Self { attribute, sum: Vec::new(), sum_sq: Vec::new() }
    }

    /// Maximum statistic over `splits`; ties resolve to the smallest split.
    fn scan(&mut self, x: &[f64], splits: std::ops::RangeInclusive<usize>) -> (usize, f64) {
        let n = x.len();
        let center = x.iter().sum::<f64>() / n as f64;
        self.sum.clear();
        self.sum_sq.clear();
        self.sum.push(0.0);
        self.sum_sq.push(0.0);
        let (mut s, mut ss) = (0.0, 0.0);
        for &v in x {
            let d = v - center;
            s += d;
            ss += d * d;
            self.sum.push(s);
            self.sum_sq.push(ss);
        }

        let mut best = (*splits.start(), f64::NEG_INFINITY);
        for r in splits {
            let stat = self.statistic(r, n);
            if stat > best.1 {
                best = (r, stat);
            }
        }
        best
    }

    fn statistic(&self, r: usize, n: usize) -> f64 {
        let (nl, nr) = (r as f64, (n - r) as f64);
        let sl = self.sum[r];
        let sr = self.sum[n] - sl;
        let ssl = (self.sum_sq[r] - sl * sl / nl).max(0.0);
        let ssr = (self.sum_sq[n] - self.sum_sq[r] - sr * sr / nr).max(0.0);
        match self.attribute {
            Attribute::Mean => {
                let diff = (sl / nl - sr / nr).abs();
                if diff == 0.0 {
                    return 0.0;
                }
                let pooled = (ssl + ssr) / (nl + nr - 2.0);
                if pooled == 0.0 {
                    return f64::INFINITY;
                }
                diff / (pooled * (1.0 / nl + 1.0 / nr)).sqrt()
            }
            Attribute::Variance => {
                let vl = ssl / (nl - 1.0);
                let vr = ssr / (nr - 1.0);
                match (vl == 0.0, vr == 0.0) {
                    (true, true) => 0.0,
                    (true, false) | (false, true) => f64::INFINITY,
                    (false, false) => (vl / vr).ln().abs(),
                }
            }
        }
    }
}

/// Per-segment statistic `mu_0..mu_m` for the intervals delimited by `cps`.
pub fn segment_statistics(series: &TimeSeries, cps: &ChangePointSet, attribute: Attribute) -> Result<Vec<f64>> {
    let horizon = series.horizon();
    if cps.horizon() != horizon {
        return Err(Error::InvalidChangePoints(format!(
            "change points built for H = {}, series `{}` has H = {horizon}",
            cps.horizon(),
            series.id()
        )));
    }
    let values = series.values();
    let bps = cps.augmented();
    bps.windows(2)
        .map(|w| {
            let obs = segment_slice(values, w[0], w[1], horizon);
            match attribute {
                Attribute::Mean => Ok(mean(obs)),
                Attribute::Variance => {
                    if obs.len() < 2 {
                        return Err(Error::DegenerateSegment { start: w[0], end: w[0] + obs.len() });
                    }
                    Ok(sample_variance(obs))
                }
            }
        })
        .collect()
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}
