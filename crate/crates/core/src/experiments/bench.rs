//! Inference latency benchmark: classification alone versus classification
//! plus the salience readout, timed per run with the monotonic clock.

use std::hint::black_box;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::experiments::stats::{five_number_summary, mean};
use crate::network::Network;
use crate::salience::response_from_cache;

/// Timings of one benchmark arm.
#[derive(Debug, Clone)]
pub struct BenchmarkRecord {
    pub with_response: bool,
    /// One entry per repetition, in microseconds.
    pub timings_us: Vec<f64>,
    pub median_us: f64,
    pub mean_us: f64,
}

/// Both arms plus the headline ratio of mean times.
#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub without: BenchmarkRecord,
    pub with_response: BenchmarkRecord,
    /// mean(with) / mean(without).
    pub mean_ratio: f64,
    pub warmup_runs: usize,
}

fn summarize(with_response: bool, timings_us: Vec<f64>) -> Result<BenchmarkRecord> {
    let summary = five_number_summary(&timings_us)?;
    Ok(BenchmarkRecord {
        with_response,
        median_us: summary.median,
        mean_us: mean(&timings_us),
        timings_us,
    })
}

/// Times `repetitions` single-image classifications with and without the
/// salience readout, after `warmup` untimed runs. Single-threaded; the
/// caller supplies the (already tagged) network and the encoded input.
/// The two arms alternate within each repetition so ambient load lands on
/// both equally.
pub fn run_benchmark(
    net: &Network,
    input: &[f64],
    repetitions: usize,
    warmup: usize,
) -> Result<BenchmarkReport> {
    if repetitions < 100 {
        return Err(Error::invalid_input(format!(
            "benchmark needs at least 100 repetitions for a stable mean, got {repetitions}"
        )));
    }
    let mut net = net.clone();

    for _ in 0..warmup {
        black_box(net.predict(black_box(input))?);
        black_box(response_from_cache(&net));
    }

    let mut without_us = Vec::with_capacity(repetitions);
    let mut with_us = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        black_box(net.predict(black_box(input))?);
        without_us.push(start.elapsed().as_secs_f64() * 1e6);

        let start = Instant::now();
        let prediction = net.predict(black_box(input))?;
        let response = response_from_cache(&net);
        black_box((prediction, response));
        with_us.push(start.elapsed().as_secs_f64() * 1e6);
    }

    let without = summarize(false, without_us)?;
    let with_response = summarize(true, with_us)?;
    let mean_ratio = with_response.mean_us / without.mean_us;
    Ok(BenchmarkReport {
        without,
        with_response,
        mean_ratio,
        warmup_runs: warmup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::salience::{tag, SalienceConfig};

    #[test]
    fn benchmark_produces_one_timing_per_repetition() {
        let mut net = Network::new(&[16, 16, 15], 5).unwrap();
        let input = vec![0.5; 16];
        tag(&mut net, &input, &SalienceConfig::default()).unwrap();
        let report = run_benchmark(&net, &input, 100, 10).unwrap();
        assert_eq!(report.without.timings_us.len(), 100);
        assert_eq!(report.with_response.timings_us.len(), 100);
        assert!(report.without.timings_us.iter().all(|t| *t >= 0.0));
        assert!(report.mean_ratio.is_finite() && report.mean_ratio > 0.0);
        assert!(!report.without.with_response);
        assert!(report.with_response.with_response);
    }

    #[test]
    fn benchmark_rejects_unstable_repetition_counts() {
        let net = Network::new(&[16, 16, 15], 5).unwrap();
        assert!(run_benchmark(&net, &[0.5; 16], 99, 0).is_err());
    }
}
