use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disjoint train/validation/test index sets covering `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.75,
            val: 0.05,
            test: 0.20,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("train", self.train), ("val", self.val), ("test", self.test)] {
            if !(f > 0.0) {
                return Err(Error::config(format!("split.{name}"), "fraction must be positive"));
            }
        }
        let total = self.train + self.val + self.test;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config("split", format!("fractions sum to {total}, expected 1")));
        }
        Ok(())
    }

    /// Set sizes: train and validation rounded, the remainder goes to test.
    /// For `n ≥ 3` every set gets at least one subject.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let round = |f: f64| ((n as f64) * f).round() as usize;
        let mut train = round(self.train).min(n);
        let mut val = round(self.val).min(n - train);
        if n >= 3 {
            if val == 0 {
                val = 1;
                train = train.min(n - 1);
            }
            if train + val >= n {
                train = n - val - 1;
            }
            train = train.max(1);
        }
        (train, val, n - train - val)
    }
}

/// Uniform random partition of `0..n`, deterministic in `seed`.
pub fn split(n: usize, fractions: &SplitFractions, seed: u64) -> Result<Split> {
    fractions.validate()?;
    let (train, val, _) = fractions.sizes(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = order.split_off(train + val);
    let val = order.split_off(train);
    Ok(Split {
        train: order,
        val,
        test,
        seed,
    })
}
