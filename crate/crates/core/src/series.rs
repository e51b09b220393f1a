// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite real-valued series observed at integer times `0..=H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    id: String,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if values.len() < 2 {
            return Err(Error::InvalidSeries {
                id,
                reason: format!("need at least 2 observations, got {}", values.len()),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries { id, reason: format!("non-finite value {} at index {i}", values[i]) });
        }
        Ok(Self { id, values })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a valid series has at least two observations.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time horizon `H = len - 1`.
    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.id.clone(), self.values.iter().map(|&v| f(v)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_nonfinite() {
        assert!(TimeSeries::new("a", vec![1.0]).is_err());
        assert!(TimeSeries::new("a", vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new("a", vec![1.0, f64::INFINITY]).is_err());
        let s = TimeSeries::new("a", vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.horizon(), 2);
    }
}
