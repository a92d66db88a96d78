use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Tensor;

use super::{PhenotypeKind, PhenotypeSchema};

/// Min/max used to scale one column into `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub min: f64,
    pub max: f64,
}

/// Scaling applied by [`Cohort::normalize`]; `None` marks untouched
/// categorical columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub imaging: Vec<ColumnScale>,
    pub phenotypes: Vec<Option<ColumnScale>>,
}

/// Subjects with imaging features, non-imaging phenotypes and ages in years.
#[derive(Clone, Debug, PartialEq)]
pub struct Cohort {
    imaging: Tensor,
    phenotypes: Tensor,
    ages: Vec<f64>,
    schema: PhenotypeSchema,
    normalization: Option<Normalization>,
}

impl Cohort {
    pub fn new(
        imaging: Tensor,
        phenotypes: Tensor,
        ages: Vec<f64>,
        schema: PhenotypeSchema,
    ) -> Result<Self> {
        let n = ages.len();
        if imaging.dims2() != (n, schema.imaging_features()) {
            return Err(Error::Shape {
                op: "cohort_imaging",
                left: vec![n, schema.imaging_features()],
                right: imaging.shape().to_vec(),
            });
        }
        if phenotypes.dims2() != (n, schema.len()) {
            return Err(Error::Shape {
                op: "cohort_phenotypes",
                left: vec![n, schema.len()],
                right: phenotypes.shape().to_vec(),
            });
        }
        if let Some(i) = ages.iter().position(|a| !a.is_finite()) {
            return Err(Error::config("age", format!("subject {i} has a non-finite age")));
        }
        for (k, p) in schema.phenotypes().iter().enumerate() {
            if p.kind != PhenotypeKind::Categorical {
                continue;
            }
            if let Some(i) = (0..n).find(|&i| phenotypes.get(i, k).fract() != 0.0) {
                return Err(Error::config(
                    &p.name,
                    format!("categorical value {} for subject {i} is not an integer code", phenotypes.get(i, k)),
                ));
            }
        }
        Ok(Cohort {
            imaging,
            phenotypes,
            ages,
            schema,
            normalization: None,
        })
    }

    /// Number of subjects.
    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }

    pub fn imaging(&self) -> &Tensor {
        &self.imaging
    }

    pub fn phenotypes(&self) -> &Tensor {
        &self.phenotypes
    }

    pub fn ages(&self) -> &[f64] {
        &self.ages
    }

    pub fn schema(&self) -> &PhenotypeSchema {
        &self.schema
    }

    pub fn normalization(&self) -> Option<&Normalization> {
        self.normalization.as_ref()
    }

    /// Same cohort with ages replaced.
    pub fn with_ages(&self, ages: Vec<f64>) -> Result<Self> {
        let mut out = Cohort::new(
            self.imaging.clone(),
            self.phenotypes.clone(),
            ages,
            self.schema.clone(),
        )?;
        out.normalization = self.normalization.clone();
        Ok(out)
    }

    /// Min-max scales imaging and continuous phenotype columns into `[0, 1]`.
    /// Constant columns map to zero. Categorical columns and ages are kept.
    pub fn normalize(&self) -> Cohort {
        let mut imaging = self.imaging.clone();
        let imaging_scale = scale_columns(&mut imaging, |_| true)
            .into_iter()
            .map(|s| s.expect("every imaging column is scaled"))
            .collect();
        let mut phenotypes = self.phenotypes.clone();
        let schema = &self.schema;
        let phenotype_scale =
            scale_columns(&mut phenotypes, |k| schema.kind(k) == PhenotypeKind::Continuous);
        Cohort {
            imaging,
            phenotypes,
            ages: self.ages.clone(),
            schema: self.schema.clone(),
            normalization: Some(Normalization {
                imaging: imaging_scale,
                phenotypes: phenotype_scale,
            }),
        }
    }
}

pub(crate) fn scale_columns(t: &mut Tensor, selected: impl Fn(usize) -> bool) -> Vec<Option<ColumnScale>> {
    let (rows, cols) = t.dims2();
    let values = t.values_mut();
    (0..cols)
        .map(|c| {
            if !selected(c) {
                return None;
            }
            let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
            for r in 0..rows {
                let v = values[r * cols + c];
                min = min.min(v);
                max = max.max(v);
            }
            let range = max - min;
            for r in 0..rows {
                let v = &mut values[r * cols + c];
                *v = if range > 0.0 { (*v - min) / range } else { 0.0 };
            }
            Some(ColumnScale { min, max })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::Phenotype;

    fn cohort(imaging: &[[f64; 1]], pheno: &[[f64; 2]]) -> Cohort {
        let schema = PhenotypeSchema::new(
            vec![
                Phenotype {
                    name: "sex".into(),
                    kind: PhenotypeKind::Categorical,
                },
                Phenotype {
                    name: "bmi".into(),
                    kind: PhenotypeKind::Continuous,
                },
            ],
            1,
        )
        .unwrap();
        Cohort::new(
            Tensor::from_rows(imaging).unwrap(),
            Tensor::from_rows(pheno).unwrap(),
            vec![50.0; imaging.len()],
            schema,
        )
        .unwrap()
    }

    #[test]
    fn affine_scaling() {
        let c = cohort(&[[2.0], [4.0], [6.0]], &[[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]).normalize();
        assert_eq!(c.imaging().values(), &[0.0, 0.5, 1.0]);
        // categorical untouched, constant continuous column → zeros
        let col = |k| (0..3).map(|i| c.phenotypes().get(i, k)).collect::<Vec<_>>();
        assert_eq!(col(0), vec![1.0, 2.0, 3.0]);
        assert_eq!(col(1), vec![0.0, 0.0, 0.0]);
        assert_eq!(c.ages(), &[50.0; 3]);
        let scale = c.normalization().unwrap();
        assert_eq!(scale.imaging[0], ColumnScale { min: 2.0, max: 6.0 });
        assert!(scale.phenotypes[0].is_none());
    }

    #[test]
    fn unit_column_unchanged() {
        let c = cohort(&[[0.0], [0.3], [1.0]], &[[0.0, 0.0], [1.0, 1.0], [0.0, 0.7]]);
        assert_eq!(c.normalize().imaging(), c.imaging());
    }

    #[test]
    fn non_integer_category_rejected() {
        let schema = PhenotypeSchema::new(
            vec![Phenotype {
                name: "sex".into(),
                kind: PhenotypeKind::Categorical,
            }],
            1,
        )
        .unwrap();
        let err = Cohort::new(
            Tensor::from_rows(&[[0.0]]).unwrap(),
            Tensor::from_rows(&[[0.5]]).unwrap(),
            vec![60.0],
            schema,
        );
        assert!(err.is_err());
    }
}
