mod common;

use common::adult_dir;
use sampram::data::{ingest_adult, IngestSpec, MissingPolicy};
use sampram::typestats::joint_type;

#[test]
fn default_policy_row_count() {
    let r = ingest_adult(&IngestSpec::adult_dir(adult_dir())).unwrap();
    assert_eq!(r.database.len(), 45222);
    assert_eq!(r.database.alphabet().joint_card(), 24);
    assert_eq!(r.records, 48842);
    assert_eq!(r.dropped_missing, 48842 - 45222);
    assert_eq!(r.skipped_malformed, 0);
    assert!(joint_type(&r.database)
        .unwrap()
        .values()
        .iter()
        .all(|&v| v > 0.0));
}

/// The four kept attributes have no missing values of their own.
#[test]
fn used_fields_policy_keeps_everything() {
    let mut spec = IngestSpec::adult_dir(adult_dir());
    spec.missing = MissingPolicy::UsedFields;
    assert_eq!(ingest_adult(&spec).unwrap().database.len(), 48842);
}

#[test]
fn train_file_alone() {
    let spec = IngestSpec::adult(vec![adult_dir().join("adult.data")]);
    assert_eq!(ingest_adult(&spec).unwrap().database.len(), 30162);
}

#[test]
fn missing_file_is_an_ingest_error() {
    let spec = IngestSpec::adult(vec![adult_dir().join("nope.data")]);
    assert!(matches!(
        ingest_adult(&spec),
        Err(sampram::Error::Ingest(_))
    ));
}
