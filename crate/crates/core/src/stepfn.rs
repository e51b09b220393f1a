// SPDX-License-Identifier: MIT OR Apache-2.0

//! Piecewise-constant functions on `[0, H]` and their exact `L^p` geometry.
//!
//! Norms use the normalized measure `dx / H`, so the constant function 1 has
//! norm 1 for every `p`. All integrals are evaluated in closed form over the
//! merged partition of breakpoints.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::changepoint::{detect_change_points, segment_statistics, ChangePointSet, DetectionParams};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// A step function in canonical form: no two adjacent intervals carry the
/// same value, so two canonical functions are equal almost everywhere iff
/// their fields are identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFunction")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStepFunction> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStepFunction) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl StepFunction {
    /// Builds and canonicalizes a step function. Adjacent values merge only
    /// when exactly equal.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidStepFunction("need at least two breakpoints".into()));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints require {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidStepFunction(format!("first breakpoint must be 0, got {}", breakpoints[0])));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction("non-finite breakpoint or value".into()));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStepFunction(format!(
                "breakpoints not strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }

        let mut bps = Vec::with_capacity(breakpoints.len());
        let mut vals: Vec<f64> = Vec::with_capacity(values.len());
        bps.push(0.0);
        for (i, &v) in values.iter().enumerate() {
            if vals.last() == Some(&v) {
                // extend the previous interval over this one
                *bps.last_mut().unwrap() = breakpoints[i + 1];
            } else {
                vals.push(v);
                bps.push(breakpoints[i + 1]);
            }
        }
        Ok(Self { breakpoints: bps, values: vals })
    }

    pub fn constant(value: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![value])
    }

    /// Step function with integer breakpoints `[0, c_1, ..., c_m, H]`.
    pub fn from_change_points(cps: &ChangePointSet, values: Vec<f64>) -> Result<Self> {
        Self::new(cps.augmented().into_iter().map(|c| c as f64).collect(), values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Domain length `H`.
    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Intervals as `(length, value)` pairs.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + Clone + '_ {
        self.breakpoints.windows(2).zip(&self.values).map(|(w, &v)| (w[1] - w[0], v))
    }

    pub fn scale(&self, k: f64) -> Result<Self> {
        Self::new(self.breakpoints.clone(), self.values.iter().map(|v| v * k).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("step functions always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Exponent of an `L^p` norm, `p >= 1` or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub const ONE: PNorm = PNorm::Finite(1.0);
    pub const TWO: PNorm = PNorm::Finite(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(PNorm::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(PNorm::Finite(p))
        } else {
            Err(Error::InvalidParams(format!("p must be >= 1 or infinity, got {p}")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            PNorm::Finite(p) => p,
            PNorm::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for PNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(PNorm::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| Error::Config(format!("cannot parse p = `{other}`")))?;
                PNorm::new(p)
            }
        }
    }
}

/// Norm of a piecewise-constant function given as `(length, |value|)` cells.
/// Values are scaled by their maximum before exponentiation so that neither
/// tiny nor huge values under/overflow.
fn norm_of_cells(cells: impl Iterator<Item = (f64, f64)> + Clone, horizon: f64, p: PNorm) -> f64 {
    let scale = cells.clone().map(|(_, a)| a).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    match p {
        PNorm::Infinity => scale,
        PNorm::Finite(1.0) => scale * (cells.map(|(len, a)| a / scale * len).sum::<f64>() / horizon),
        PNorm::Finite(2.0) => {
            let s: f64 = cells.map(|(len, a)| (a / scale).powi(2) * len).sum();
            scale * (s / horizon).sqrt()
        }
        PNorm::Finite(p) => {
            let s: f64 = cells.map(|(len, a)| (a / scale).powf(p) * len).sum();
            scale * (s / horizon).powf(1.0 / p)
        }
    }
}

/// Visits the merged partition of `f` and `g` as `(length, f value, g value)`.
fn merged_cells(f: &StepFunction, g: &StepFunction) -> Result<Vec<(f64, f64, f64)>> {
    check_domain(f, g)?;
    let (bf, bg) = (&f.breakpoints, &g.breakpoints);
    let mut cells = Vec::with_capacity(bf.len() + bg.len());
    let (mut i, mut j) = (0, 0);
    let mut left = 0.0;
    while i < f.values.len() && j < g.values.len() {
        let right = bf[i + 1].min(bg[j + 1]);
        cells.push((right - left, f.values[i], g.values[j]));
        if bf[i + 1] == right {
            i += 1;
        }
        if bg[j + 1] == right {
            j += 1;
        }
        left = right;
    }
    Ok(cells)
}

fn check_domain(f: &StepFunction, g: &StepFunction) -> Result<()> {
    if f.horizon() != g.horizon() {
        return Err(Error::DomainMismatch { left: f.horizon(), right: g.horizon() });
    }
    Ok(())
}

/// `((1/H) * sum |v_i|^p (b_{i+1} - b_i))^(1/p)`, or `max |v_i|` for `p = inf`.
pub fn lp_norm(f: &StepFunction, p: PNorm) -> f64 {
    norm_of_cells(f.pieces().map(|(len, v)| (len, v.abs())), f.horizon(), p)
}

/// `||f - g||_p`, exact over the merged partition.
pub fn lp_distance(f: &StepFunction, g: &StepFunction, p: PNorm) -> Result<f64> {
    let cells = merged_cells(f, g)?;
    Ok(norm_of_cells(cells.iter().map(|&(len, a, b)| (len, (a - b).abs())), f.horizon(), p))
}

/// `(1/H) * integral of f g`.
pub fn inner_product(f: &StepFunction, g: &StepFunction) -> Result<f64> {
    let cells = merged_cells(f, g)?;
    Ok(cells.iter().map(|&(len, a, b)| a * b * len).sum::<f64>() / f.horizon())
}

/// `f / ||f||_p`.
pub fn normalize(f: &StepFunction, p: PNorm) -> Result<StepFunction> {
    let norm = lp_norm(f, p);
    if norm == 0.0 {
        return Err(Error::ZeroFunction { label: String::new() });
    }
    StepFunction::new(f.breakpoints.clone(), f.values.iter().map(|v| v / norm).collect())
}

/// Equality of canonical forms, i.e. equality almost everywhere.
pub fn are_equivalent(f: &StepFunction, g: &StepFunction) -> Result<bool> {
    check_domain(f, g)?;
    Ok(f.breakpoints == g.breakpoints && f.values == g.values)
}

/// A series' detected change points together with its step function.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub change_points: ChangePointSet,
    pub function: StepFunction,
}

/// Detected change points plus segment statistics, canonicalized.
pub fn embed_with_change_points(series: &TimeSeries, params: &DetectionParams) -> Result<Embedding> {
    let change_points = detect_change_points(series, params)?;
    let stats = segment_statistics(series, &change_points, params.attribute)?;
    let function = StepFunction::from_change_points(&change_points, stats)?;
    Ok(Embedding { change_points, function })
}

pub fn embed(series: &TimeSeries, params: &DetectionParams) -> Result<StepFunction> {
    Ok(embed_with_change_points(series, params)?.function)
}

/// Size of a series measured through its embedding. Not a norm on series:
/// the magnitude of a difference of series is not their distance.
pub fn magnitude(series: &TimeSeries, params: &DetectionParams, p: PNorm) -> Result<f64> {
    Ok(lp_norm(&embed(series, params)?, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(b: &[f64], v: &[f64]) -> StepFunction {
        StepFunction::new(b.to_vec(), v.to_vec()).unwrap()
    }

    const PS: [PNorm; 4] = [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Finite(3.0), PNorm::Infinity];

    #[test]
    fn validation() {
        assert!(StepFunction::new(vec![0.0], vec![]).is_err());
        assert!(StepFunction::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 2.0, 2.0], vec![1.0, 2.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 2.0], vec![1.0, 2.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 2.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn canonical_merges_equal_neighbours() {
        let f = sf(&[0.0, 1.0, 2.0, 3.0, 4.0], &[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(f.breakpoints(), &[0.0, 2.0, 4.0]);
        assert_eq!(f.values(), &[1.0, 2.0]);
        let g = sf(&[0.0, 2.0, 4.0], &[1.0, 2.0]);
        assert!(are_equivalent(&f, &g).unwrap());
    }

    #[test]
    fn norm_examples() {
        for p in PS {
            assert_eq!(lp_norm(&StepFunction::constant(-3.5, 7.0).unwrap(), p), 3.5);
        }
        let f = sf(&[0.0, 5.0, 10.0], &[2.0, 0.0]);
        assert_eq!(lp_norm(&f, PNorm::ONE), 1.0);
        assert!((lp_norm(&f, PNorm::TWO) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(lp_norm(&f, PNorm::Infinity), 2.0);
    }

    #[test]
    fn distance_examples() {
        let f = sf(&[0.0, 1.0], &[1.0]);
        let g = sf(&[0.0, 1.0], &[0.0]);
        assert_eq!(lp_distance(&f, &g, PNorm::ONE).unwrap(), 1.0);
        assert_eq!(lp_distance(&f, &f, PNorm::TWO).unwrap(), 0.0);

        let f = sf(&[0.0, 0.5, 1.0], &[1.0, 0.0]);
        let g = sf(&[0.0, 0.25, 0.75, 1.0], &[0.0, 1.0, 0.0]);
        assert_eq!(lp_distance(&f, &g, PNorm::ONE).unwrap(), 0.5);
        assert_eq!(lp_distance(&f, &g, PNorm::Infinity).unwrap(), 1.0);

        let h = sf(&[0.0, 2.0], &[1.0]);
        assert!(matches!(lp_distance(&f, &h, PNorm::ONE), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn inner_product_examples() {
        let f = sf(&[0.0, 0.5, 1.0], &[1.0, 0.0]);
        let g = sf(&[0.0, 0.5, 1.0], &[0.0, 1.0]);
        assert_eq!(inner_product(&f, &g).unwrap(), 0.0);
        let a = StepFunction::constant(3.0, 4.0).unwrap();
        let b = StepFunction::constant(-2.0, 4.0).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), -6.0);
        let h = sf(&[0.0, 1.5, 2.0, 4.0], &[1.0, -2.0, 0.5]);
        let n2 = lp_norm(&h, PNorm::TWO);
        assert!((inner_product(&h, &h).unwrap() - n2 * n2).abs() < 1e-14);
    }

    #[test]
    fn normalize_examples() {
        let f = StepFunction::constant(5.0, 3.0).unwrap();
        assert_eq!(normalize(&f, PNorm::ONE).unwrap().values(), &[1.0]);
        let z = StepFunction::constant(0.0, 3.0).unwrap();
        assert!(matches!(normalize(&z, PNorm::ONE), Err(Error::ZeroFunction { .. })));
        let h = sf(&[0.0, 1.5, 2.0, 4.0], &[1.0, -2.0, 0.5]);
        for p in PS {
            assert!((lp_norm(&normalize(&h, p).unwrap(), p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_differences_are_not_equivalent() {
        let f = sf(&[0.0, 1.0, 2.0], &[1.0, 2.0]);
        let g = sf(&[0.0, 1.0, 2.0], &[1.0, 2.0 + 1e-6]);
        assert!(!are_equivalent(&f, &g).unwrap());
        for p in PS {
            assert!(lp_distance(&f, &g, p).unwrap() > 0.0);
        }
        // far below the range where |d|^p underflows without rescaling
        let g = sf(&[0.0, 1.0, 2.0], &[1e-200, 2.0]);
        let f = sf(&[0.0, 1.0, 2.0], &[0.0, 2.0]);
        assert!(lp_distance(&f, &g, PNorm::Finite(3.0)).unwrap() > 0.0);
    }

    #[test]
    fn pnorm_parse() {
        assert_eq!("inf".parse::<PNorm>().unwrap(), PNorm::Infinity);
        assert_eq!("2".parse::<PNorm>().unwrap(), PNorm::TWO);
        assert!("0.5".parse::<PNorm>().is_err());
        assert!("x".parse::<PNorm>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = sf(&[0.0, 0.1, 1.0 / 3.0, 7.0], &[std::f64::consts::PI, -1e-300, 2.5e17]);
        let s = f.to_json();
        assert!(s.starts_with("{\"breakpoints\":["));
        assert_eq!(StepFunction::from_json(&s).unwrap(), f);
        assert!(StepFunction::from_json(r#"{"breakpoints":[0,1],"values":[]}"#).is_err());
    }

    #[test]
    fn embed_constant_and_two_level() {
        let s = TimeSeries::new("c", vec![4.25; 200]).unwrap();
        let f = embed(&s, &DetectionParams::default()).unwrap();
        assert_eq!(f, StepFunction::constant(4.25, 199.0).unwrap());
        assert_eq!(magnitude(&s, &DetectionParams::default(), PNorm::TWO).unwrap(), 4.25);

        let v: Vec<f64> = (0..400).map(|t| if t < 200 { 0.0 } else { 10.0 }).collect();
        let f = embed(&TimeSeries::new("x", v).unwrap(), &DetectionParams::default()).unwrap();
        assert_eq!(f.breakpoints(), &[0.0, 200.0, 399.0]);
        assert_eq!(f.values(), &[0.0, 10.0]);
    }
}
