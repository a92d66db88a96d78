//! Cohort data model, normalization, synthetic generation and splitting.

mod data;
mod io;
mod schema;
mod split;
mod synthetic;

pub use data::{Cohort, ColumnScale, Normalization};
pub use io::{load_cohort, sidecar_path, write_cohort};
pub use schema::{Phenotype, PhenotypeKind, PhenotypeSchema, IMAGING_KEY};
pub use split::{split, Split, SplitFractions};
pub use synthetic::{generate_synthetic, AgeComponent, AgeMixture, SyntheticConfig};
