//! Synthetic cohorts whose features carry a tunable amount of age signal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Tensor;

use super::data::scale_columns;
use super::{Cohort, Phenotype, PhenotypeKind, PhenotypeSchema};

/// One Gaussian component of the age distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgeComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Truncated Gaussian mixture over ages in years.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgeMixture {
    pub components: Vec<AgeComponent>,
    pub min_age: f64,
    pub max_age: f64,
}

impl Default for AgeMixture {
    fn default() -> Self {
        AgeMixture {
            components: vec![
                AgeComponent {
                    weight: 0.7,
                    mean: 63.0,
                    sd: 7.0,
                },
                AgeComponent {
                    weight: 0.3,
                    mean: 72.0,
                    sd: 5.0,
                },
            ],
            min_age: 47.0,
            max_age: 81.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub subjects: usize,
    pub imaging_features: usize,
    pub categorical: usize,
    pub continuous: usize,
    /// Levels per categorical phenotype.
    pub categories: usize,
    /// Ratio of age-signal variance to noise variance in every column.
    pub snr: f64,
    pub age: AgeMixture,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            subjects: 1000,
            imaging_features: 68,
            categorical: 5,
            continuous: 15,
            categories: 4,
            snr: 5.0,
            age: AgeMixture::default(),
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subjects < 10 {
            return Err(Error::config("subjects", "at least 10 subjects are required"));
        }
        if self.imaging_features == 0 {
            return Err(Error::config("imaging_features", "must be at least 1"));
        }
        if self.categorical + self.continuous == 0 {
            return Err(Error::config("categorical", "at least one non-imaging phenotype is required"));
        }
        if self.categorical > 0 && self.categories < 2 {
            return Err(Error::config("categories", "categorical phenotypes need at least 2 levels"));
        }
        if !(self.snr.is_finite() && self.snr >= 0.0) {
            return Err(Error::config("snr", "must be finite and non-negative"));
        }
        let age = &self.age;
        if !(age.min_age < age.max_age) {
            return Err(Error::config("age.min_age", "must be below age.max_age"));
        }
        if age.components.is_empty()
            || age
                .components
                .iter()
                .any(|c| !(c.weight > 0.0 && c.sd > 0.0 && c.mean.is_finite()))
        {
            return Err(Error::config("age.components", "need positive weights and standard deviations"));
        }
        Ok(())
    }

    pub fn schema(&self) -> Result<PhenotypeSchema> {
        let phenotypes = (0..self.categorical)
            .map(|i| Phenotype {
                name: format!("cat_{i}"),
                kind: PhenotypeKind::Categorical,
            })
            .chain((0..self.continuous).map(|i| Phenotype {
                name: format!("cont_{i}"),
                kind: PhenotypeKind::Continuous,
            }))
            .collect();
        PhenotypeSchema::new(phenotypes, self.imaging_features)
    }
}

fn sample_age(rng: &mut ChaCha8Rng, mixture: &AgeMixture) -> f64 {
    let total: f64 = mixture.components.iter().map(|c| c.weight).sum();
    loop {
        let mut pick = rng.random::<f64>() * total;
        let mut component = mixture.components[mixture.components.len() - 1];
        for c in &mixture.components {
            if pick < c.weight {
                component = *c;
                break;
            }
            pick -= c.weight;
        }
        let z: f64 = StandardNormal.sample(rng);
        let age = component.mean + component.sd * z;
        if (mixture.min_age..=mixture.max_age).contains(&age) {
            return age;
        }
    }
}

fn standardize(values: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for v in values.iter_mut() {
        *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
    }
}

/// Columns `sqrt(snr)·s + e` where `s` is a unit-variance random linear
/// combination of the age basis and `e ~ N(0, 1)`.
fn signal_columns(rng: &mut ChaCha8Rng, basis: &[[f64; 2]], columns: usize, snr: f64) -> Vec<Vec<f64>> {
    let gain = snr.sqrt();
    (0..columns)
        .map(|_| {
            let w: [f64; 2] = [StandardNormal.sample(rng), StandardNormal.sample(rng)];
            let mut signal: Vec<f64> = basis.iter().map(|b| b[0] * w[0] + b[1] * w[1]).collect();
            standardize(&mut signal);
            signal
                .into_iter()
                .map(|s| {
                    let e: f64 = StandardNormal.sample(rng);
                    gain * s + e
                })
                .collect()
        })
        .collect()
}

/// Codes each value by its rank bucket: `floor(rank · levels / n)`.
fn quantile_codes(values: &[f64], levels: usize) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut codes = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        codes[i] = (rank * levels / n) as f64;
    }
    codes
}

fn to_matrix(columns: &[Vec<f64>], rows: usize) -> Tensor {
    let cols = columns.len();
    let mut values = vec![0.0; rows * cols];
    for (c, column) in columns.iter().enumerate() {
        for (r, v) in column.iter().enumerate() {
            values[r * cols + c] = *v;
        }
    }
    Tensor::new(vec![rows, cols], values).expect("rows × cols")
}

/// Generates a normalized cohort. Identical configs give identical cohorts.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Cohort> {
    config.validate()?;
    let schema = config.schema()?;
    let n = config.subjects;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let ages: Vec<f64> = (0..n).map(|_| sample_age(&mut rng, &config.age)).collect();
    let mut z = ages.clone();
    standardize(&mut z);
    let mut sq: Vec<f64> = z.iter().map(|v| v * v).collect();
    standardize(&mut sq);
    let basis: Vec<[f64; 2]> = z.iter().zip(&sq).map(|(&a, &b)| [a, b]).collect();

    let imaging_cols = signal_columns(&mut rng, &basis, config.imaging_features, config.snr);
    let categorical_latent = signal_columns(&mut rng, &basis, config.categorical, config.snr);
    let continuous_cols = signal_columns(&mut rng, &basis, config.continuous, config.snr);

    let mut imaging = to_matrix(&imaging_cols, n);
    scale_columns(&mut imaging, |_| true);

    let pheno_cols: Vec<Vec<f64>> = categorical_latent
        .iter()
        .map(|latent| quantile_codes(latent, config.categories))
        .chain(continuous_cols)
        .collect();
    let phenotypes = to_matrix(&pheno_cols, n);

    let cohort = Cohort::new(imaging, phenotypes, ages, schema)?;
    Ok(cohort.normalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_configs() {
        let bad = |f: fn(&mut SyntheticConfig)| {
            let mut c = SyntheticConfig::default();
            f(&mut c);
            generate_synthetic(&c).is_err()
        };
        assert!(bad(|c| c.subjects = 9));
        assert!(bad(|c| c.snr = -1.0));
        assert!(bad(|c| c.snr = f64::INFINITY));
        assert!(bad(|c| c.categories = 1));
        assert!(bad(|c| {
            c.categorical = 0;
            c.continuous = 0
        }));
    }

    #[test]
    fn ages_in_range_and_features_normalized() {
        let c = generate_synthetic(&SyntheticConfig {
            subjects: 300,
            ..SyntheticConfig::default()
        })
        .unwrap();
        assert!(c.ages().iter().all(|a| (47.0..=81.0).contains(a)));
        assert!(c.imaging().values().iter().all(|v| (0.0..=1.0).contains(v)));
        for k in 0..c.schema().len() {
            let col = (0..c.len()).map(|i| c.phenotypes().get(i, k));
            match c.schema().kind(k) {
                PhenotypeKind::Categorical => {
                    assert!(col.into_iter().all(|v| [0.0, 1.0, 2.0, 3.0].contains(&v)))
                }
                PhenotypeKind::Continuous => assert!(col.into_iter().all(|v| (0.0..=1.0).contains(&v))),
            }
        }
    }

    #[test]
    fn quantile_codes_balanced() {
        let codes = quantile_codes(&[0.4, 0.1, 0.3, 0.2], 4);
        assert_eq!(codes, vec![3.0, 0.0, 2.0, 1.0]);
    }
}
