use std::time::Duration;

use serde::{Deserialize, Serialize};

/// 95% two-sided normal quantile.
pub const Z95: f64 = 1.959964;

/// A binomial proportion with its Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    pub fn wilson(successes: u64, trials: u64) -> Estimate {
        if trials == 0 {
            return Estimate {
                value: 0.0,
                lower: 0.0,
                upper: 1.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Estimate {
            value: p,
            lower: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
            upper: if successes == trials { 1.0 } else { (centre + half).min(1.0) },
        }
    }

    /// Binomial standard error of the point estimate.
    pub fn std_error(&self, trials: u64) -> f64 {
        (self.value * (1.0 - self.value) / trials.max(1) as f64).sqrt()
    }
}

/// Outcome of a Monte Carlo campaign.
///
/// `wall_time` is informational: it is neither serialized nor compared, so
/// reruns with the same seed produce identical reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimReport {
    pub code: String,
    pub channel: String,
    pub seed: u64,
    pub trials: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub data_bits: u64,
    pub fer: Estimate,
    pub ber: Estimate,
    /// Mean fraction of data bits in error among erroneous frames.
    pub ber_given_frame_error: f64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SimReport {
    pub(crate) fn from_counts(code: String, channel: String, seed: u64, counts: Counts, k: usize) -> SimReport {
        let data_bits = counts.trials * k as u64;
        SimReport {
            code,
            channel,
            seed,
            trials: counts.trials,
            frame_errors: counts.frame_errors,
            bit_errors: counts.bit_errors,
            data_bits,
            fer: Estimate::wilson(counts.frame_errors, counts.trials),
            ber: Estimate::wilson(counts.bit_errors, data_bits),
            ber_given_frame_error: if counts.frame_errors == 0 || k == 0 {
                0.0
            } else {
                counts.bit_errors as f64 / (counts.frame_errors as f64 * k as f64)
            },
            wall_time: Duration::ZERO,
        }
    }
}

impl PartialEq for SimReport {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code
            && self.channel == other.channel
            && self.seed == other.seed
            && self.trials == other.trials
            && self.frame_errors == other.frame_errors
            && self.bit_errors == other.bit_errors
            && self.data_bits == other.data_bits
            && self.fer == other.fer
            && self.ber == other.ber
            && self.ber_given_frame_error == other.ber_given_frame_error
    }
}

/// Exact error counts; merging is associative, so sharding cannot change the
/// totals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Counts {
    pub trials: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
}

impl Counts {
    pub fn merge(self, o: Counts) -> Counts {
        Counts {
            trials: self.trials + o.trials,
            frame_errors: self.frame_errors + o.frame_errors,
            bit_errors: self.bit_errors + o.bit_errors,
        }
    }
}
