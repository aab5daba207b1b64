//! Five-number summaries for the box plots and benchmark reports.
//!
//! Quartiles interpolate linearly between order statistics (the common
//! "type 7" convention).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear interpolation between order statistics of an ascending slice.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Min, Q1, median, Q3, max of a non-empty sample.
pub fn five_number_summary(samples: &[f64]) -> Result<FiveNumber> {
    if samples.is_empty() {
        return Err(Error::invalid_input(
            "five-number summary of an empty group",
        ));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "five-number summary over non-finite samples".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(FiveNumber {
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}
