use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numeric::Tensor;

use super::{Cohort, PhenotypeSchema};

/// Schema sidecar stored next to a cohort file: `cohort.csv` → `cohort.schema`.
pub fn sidecar_path(cohort: &Path) -> PathBuf {
    cohort.with_extension("schema")
}

/// Writes `age,img_0..img_{M-1},<phenotypes>` rows. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_cohort(path: &Path, cohort: &Cohort) -> Result<()> {
    let io_err = |e: csv::Error| Error::io(path, e.into());
    let mut writer = csv::Writer::from_path(path).map_err(io_err)?;
    let schema = cohort.schema();
    let mut header = vec!["age".to_string()];
    header.extend((0..schema.imaging_features()).map(PhenotypeSchema::imaging_column));
    header.extend(schema.phenotypes().iter().map(|p| p.name.clone()));
    writer.write_record(&header).map_err(io_err)?;

    let mut row = Vec::with_capacity(header.len());
    for i in 0..cohort.len() {
        row.clear();
        row.push(cohort.ages()[i].to_string());
        row.extend(cohort.imaging().row(i).iter().map(f64::to_string));
        row.extend(cohort.phenotypes().row(i).iter().map(f64::to_string));
        writer.write_record(&row).map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads a cohort file laid out by [`write_cohort`]. Row order is preserved;
/// extra columns are ignored; empty cells are rejected.
pub fn load_cohort(path: &Path, schema: &PhenotypeSchema) -> Result<Cohort> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let parse_err = |line: usize, column: &str, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, "", e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(parse_err(1, "", "empty file".into()));
    }
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| parse_err(1, name, format!("missing column `{name}`")))
    };
    let age_col = find("age")?;
    let imaging_cols = (0..schema.imaging_features())
        .map(|i| find(&PhenotypeSchema::imaging_column(i)))
        .collect::<Result<Vec<_>>>()?;
    let pheno_cols = schema
        .phenotypes()
        .iter()
        .map(|p| find(&p.name))
        .collect::<Result<Vec<_>>>()?;

    let mut ages = Vec::new();
    let mut imaging = Vec::new();
    let mut phenotypes = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| parse_err(line, "", e.to_string()))?;
        let cell = |col: usize| -> Result<f64> {
            let name = &headers[col];
            let raw = record
                .get(col)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| parse_err(line, name, "missing value".into()))?;
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, name, format!("non-numeric value `{raw}`")))
        };
        ages.push(cell(age_col)?);
        for &c in &imaging_cols {
            imaging.push(cell(c)?);
        }
        for &c in &pheno_cols {
            phenotypes.push(cell(c)?);
        }
    }
    if ages.is_empty() {
        return Err(parse_err(2, "", "no subject rows".into()));
    }
    let n = ages.len();
    Cohort::new(
        Tensor::new(vec![n, schema.imaging_features()], imaging)?,
        Tensor::new(vec![n, schema.len()], phenotypes)?,
        ages,
        schema.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{Phenotype, PhenotypeKind};

    fn schema() -> PhenotypeSchema {
        PhenotypeSchema::new(
            vec![Phenotype {
                name: "sex".into(),
                kind: PhenotypeKind::Categorical,
            }],
            2,
        )
        .unwrap()
    }

    #[test]
    fn three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "age,img_0,img_1,sex\n50,0.1,0.2,1\n61.5,0.3,0.4,0\n70,1,0,1\n").unwrap();
        let c = load_cohort(&path, &schema()).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.ages(), &[50.0, 61.5, 70.0]);
        assert_eq!(c.imaging().row(1), &[0.3, 0.4]);
    }

    #[test]
    fn missing_age_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "img_0,img_1,sex\n0.1,0.2,1\n").unwrap();
        let err = load_cohort(&path, &schema()).unwrap_err().to_string();
        assert!(err.contains("age"), "{err}");
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "age,img_0,img_1,sex\n50,0.1,0.2,1\n60,abc,0.2,1\n").unwrap();
        let err = load_cohort(&path, &schema()).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("img_0"), "{err}");

        std::fs::write(&path, "age,img_0,img_1,sex\n50,,0.2,1\n").unwrap();
        let err = load_cohort(&path, &schema()).unwrap_err().to_string();
        assert!(err.contains("missing value"), "{err}");
    }

    #[test]
    fn empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "").unwrap();
        assert!(load_cohort(&path, &schema()).is_err());
    }
}
