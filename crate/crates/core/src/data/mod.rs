//! Dataset sources: the UCI Adult census extract and synthetic generators.

mod adult;
mod synthetic;

pub use adult::{
    ingest_adult, read_normalized_csv, write_normalized_csv, AttributeRule, IngestReport,
    IngestSpec, MissingPolicy,
};
pub use synthetic::{gen_synthetic, Shape, SyntheticSpec};
