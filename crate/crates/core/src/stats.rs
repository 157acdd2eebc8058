//! Block-averaged estimates for correlated Markov-chain samples.

use serde::{Deserialize, Serialize};

/// Mean of an observable with a block-averaging standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub observable: String,
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub blocks: usize,
}

impl EnergyEstimate {
    /// Splits `samples` into `blocks` contiguous blocks whose sizes differ by
    /// at most one; the error is the standard error of the block means.
    pub fn from_samples(observable: impl Into<String>, samples: &[f64], blocks: usize) -> Self {
        let n = samples.len();
        let observable = observable.into();
        if n == 0 {
            return EnergyEstimate { observable, mean: f64::NAN, std_error: f64::NAN, samples: 0, blocks: 0 };
        }
        let blocks = blocks.clamp(1, n);
        let mean = samples.iter().sum::<f64>() / n as f64;
        let (base, extra) = (n / blocks, n % blocks);
        let mut start = 0;
        let mut means = Vec::with_capacity(blocks);
        for b in 0..blocks {
            let len = base + usize::from(b < extra);
            let block = &samples[start..start + len];
            means.push(block.iter().sum::<f64>() / len as f64);
            start += len;
        }
        let std_error = if blocks < 2 {
            f64::NAN
        } else {
            let m = means.iter().sum::<f64>() / blocks as f64;
            let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (blocks - 1) as f64;
            (var / blocks as f64).sqrt()
        };
        EnergyEstimate { observable, mean, std_error, samples: n, blocks }
    }

    /// Same estimate shifted by a constant.
    pub fn shifted(&self, observable: impl Into<String>, offset: f64) -> Self {
        EnergyEstimate { observable: observable.into(), mean: self.mean + offset, ..self.clone() }
    }

    /// Average of independent estimates with equal weights.
    pub fn pooled(observable: impl Into<String>, parts: &[EnergyEstimate]) -> Self {
        let k = parts.len() as f64;
        EnergyEstimate {
            observable: observable.into(),
            mean: parts.iter().map(|p| p.mean).sum::<f64>() / k,
            std_error: parts.iter().map(|p| p.std_error * p.std_error).sum::<f64>().sqrt() / k,
            samples: parts.iter().map(|p| p.samples).sum(),
            blocks: parts.iter().map(|p| p.blocks).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_series_has_zero_error() {
        let e = EnergyEstimate::from_samples("u", &[0.0; 100], 10);
        assert_eq!((e.mean, e.std_error, e.blocks), (0.0, 0.0, 10));
    }

    #[test]
    fn known_block_means() {
        // Blocks [1,2] [3,4] [5,6] [7,8]: means 1.5 3.5 5.5 7.5, sd √(20/3).
        let x: Vec<f64> = (1..=8).map(f64::from).collect();
        let e = EnergyEstimate::from_samples("x", &x, 4);
        assert_eq!(e.mean, 4.5);
        assert!((e.std_error - (20.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn blocks_partition_samples(xs in prop::collection::vec(-1e3f64..1e3, 1..300), b in 1usize..40) {
            let e = EnergyEstimate::from_samples("x", &xs, b);
            prop_assert_eq!(e.samples, xs.len());
            prop_assert!(e.blocks <= xs.len() && e.blocks >= 1);
            prop_assert!(e.std_error >= 0.0 || e.blocks < 2);
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            prop_assert!((e.mean - mean).abs() <= 1e-9 * (1.0 + mean.abs()));
        }
    }
}
