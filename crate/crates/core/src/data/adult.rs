//! UCI Adult ingestion.
//!
//! Four attributes are kept and quantized: education (3 levels) and marital
//! status (2) go to Alice, giving `|X| = 6`; sex (2) and income (2) go to Bob,
//! giving `|Y| = 4`. Every mapping is data, so it can be replaced from a JSON
//! config.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::domain::{Alphabet, Database};
use crate::error::{Error, Result};

/// Field count of one `adult.data` / `adult.test` record.
pub const ADULT_FIELDS: usize = 15;

/// Which rows are dropped for missing (`?`) values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Drop a row with `?` in any field. Yields 45222 rows on train + test.
    AnyField,
    /// Drop a row only if a kept attribute is `?`.
    UsedFields,
}

/// Quantization of one source column into dense levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeRule {
    pub name: String,
    /// Zero-based source column.
    pub column: usize,
    /// Level names, indexed by level.
    pub levels: Vec<String>,
    /// Raw source value → level index.
    pub mapping: BTreeMap<String, usize>,
}

impl AttributeRule {
    fn new(name: &str, column: usize, groups: &[(&str, &[&str])]) -> Self {
        let mut mapping = BTreeMap::new();
        let mut levels = Vec::with_capacity(groups.len());
        for (level, (label, raw)) in groups.iter().enumerate() {
            levels.push(label.to_string());
            for r in raw.iter() {
                mapping.insert(r.to_string(), level);
            }
        }
        Self {
            name: name.to_string(),
            column,
            levels,
            mapping,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Parameter(format!(
                "attribute {} has no levels",
                self.name
            )));
        }
        if let Some((raw, &lvl)) = self.mapping.iter().find(|(_, &l)| l >= self.levels.len()) {
            return Err(Error::Parameter(format!(
                "attribute {}: value {raw:?} maps to level {lvl} of {}",
                self.name,
                self.levels.len()
            )));
        }
        Ok(())
    }

    fn level_of(&self, raw: &str) -> Result<usize> {
        // adult.test labels carry a trailing period (">50K.").
        let key = raw.strip_suffix('.').unwrap_or(raw);
        self.mapping.get(key).copied().ok_or_else(|| {
            Error::Ingest(format!(
                "unknown value {raw:?} for attribute {} (column {})",
                self.name, self.column
            ))
        })
    }
}

/// Mixed-radix index over a curator's attributes (first attribute most significant).
fn cardinality(rules: &[AttributeRule]) -> usize {
    rules.iter().map(|r| r.levels.len()).product()
}

fn compose(rules: &[AttributeRule], fields: &[&str]) -> Result<usize> {
    rules.iter().try_fold(0, |acc, r| {
        Ok(acc * r.levels.len() + r.level_of(fields[r.column])?)
    })
}

fn labels(rules: &[AttributeRule]) -> Vec<String> {
    rules.iter().fold(vec![String::new()], |acc, r| {
        acc.iter()
            .flat_map(|prefix| {
                r.levels.iter().map(move |l| {
                    if prefix.is_empty() {
                        l.clone()
                    } else {
                        format!("{prefix},{l}")
                    }
                })
            })
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSpec {
    pub paths: Vec<PathBuf>,
    pub alice: Vec<AttributeRule>,
    pub bob: Vec<AttributeRule>,
    pub missing: MissingPolicy,
}

impl IngestSpec {
    /// Default quantization and curator split for the given Adult files.
    pub fn adult(paths: Vec<PathBuf>) -> Self {
        let education = AttributeRule::new(
            "education",
            3,
            &[
                (
                    "no college",
                    &[
                        "Preschool",
                        "1st-4th",
                        "5th-6th",
                        "7th-8th",
                        "9th",
                        "10th",
                        "11th",
                        "12th",
                        "HS-grad",
                    ],
                ),
                (
                    "some college",
                    &["Some-college", "Assoc-acdm", "Assoc-voc", "Bachelors"],
                ),
                (
                    "post-graduate degree",
                    &["Masters", "Prof-school", "Doctorate"],
                ),
            ],
        );
        let marital = AttributeRule::new(
            "marital-status",
            5,
            &[
                (
                    "married",
                    &[
                        "Married-civ-spouse",
                        "Married-spouse-absent",
                        "Married-AF-spouse",
                    ],
                ),
                (
                    "single/divorced/widowed",
                    &["Never-married", "Divorced", "Separated", "Widowed"],
                ),
            ],
        );
        let sex = AttributeRule::new("sex", 9, &[("male", &["Male"]), ("female", &["Female"])]);
        let income = AttributeRule::new(
            "income",
            14,
            &[("50K or less", &["<=50K"]), ("over 50K", &[">50K"])],
        );
        Self {
            paths,
            alice: vec![education, marital],
            bob: vec![sex, income],
            missing: MissingPolicy::AnyField,
        }
    }

    /// Train and test files inside an Adult directory.
    pub fn adult_dir(dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        Self::adult(vec![dir.join("adult.data"), dir.join("adult.test")])
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        let x_labels = labels(&self.alice);
        let y_labels = labels(&self.bob);
        let joint = x_labels
            .iter()
            .flat_map(|x| y_labels.iter().map(move |y| format!("{x}|{y}")))
            .collect();
        Alphabet::new(cardinality(&self.alice), cardinality(&self.bob))?.with_labels(joint)
    }

    fn validate(&self) -> Result<()> {
        if self.alice.is_empty() || self.bob.is_empty() {
            return Err(Error::Parameter(
                "each curator needs at least one attribute".into(),
            ));
        }
        for r in self.alice.iter().chain(&self.bob) {
            r.validate()?;
            if r.column >= ADULT_FIELDS {
                return Err(Error::Parameter(format!(
                    "attribute {} reads column {} of {ADULT_FIELDS}",
                    r.name, r.column
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IngestReport {
    pub database: Database,
    /// Well-formed records seen, before dropping.
    pub records: usize,
    pub dropped_missing: usize,
    /// Records with the wrong number of fields.
    pub skipped_malformed: usize,
}

/// Reads every file in `spec.paths` in order.
pub fn ingest_adult(spec: &IngestSpec) -> Result<IngestReport> {
    spec.validate()?;
    let mut sources = Vec::with_capacity(spec.paths.len());
    for p in &spec.paths {
        let f = std::fs::File::open(p)
            .map_err(|e| Error::Ingest(format!("cannot open {}: {e}", p.display())))?;
        sources.push(std::io::BufReader::new(f));
    }
    ingest_readers(spec, sources)
}

/// Same as [`ingest_adult`] over arbitrary readers; `spec.paths` is ignored.
pub fn ingest_readers<R: Read>(spec: &IngestSpec, sources: Vec<R>) -> Result<IngestReport> {
    spec.validate()?;
    let alphabet = spec.alphabet()?;
    let used: Vec<usize> = spec
        .alice
        .iter()
        .chain(&spec.bob)
        .map(|r| r.column)
        .collect();
    let (mut x_col, mut y_col) = (Vec::new(), Vec::new());
    let (mut records, mut dropped, mut malformed) = (0, 0, 0);

    for source in sources {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'|'))
            .from_reader(source);
        for rec in reader.records() {
            let rec = rec?;
            if rec.len() == 1 && rec[0].is_empty() {
                continue;
            }
            if rec.len() != ADULT_FIELDS {
                malformed += 1;
                continue;
            }
            records += 1;
            let fields: Vec<&str> = rec.iter().collect();
            let missing = match spec.missing {
                MissingPolicy::AnyField => fields.contains(&"?"),
                MissingPolicy::UsedFields => used.iter().any(|&c| fields[c] == "?"),
            };
            if missing {
                dropped += 1;
                continue;
            }
            x_col.push(compose(&spec.alice, &fields)?);
            y_col.push(compose(&spec.bob, &fields)?);
        }
    }
    if malformed > 0 {
        log::warn!("skipped {malformed} malformed Adult records");
    }
    let database = Database::new(alphabet, x_col, y_col)
        .map_err(|e| Error::Ingest(format!("no usable rows: {e}")))?;
    Ok(IngestReport {
        database,
        records,
        dropped_missing: dropped,
        skipped_malformed: malformed,
    })
}

/// Writes `x_index,y_index` rows with a header.
pub fn write_normalized_csv<W: Write>(db: &Database, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_index", "y_index"])?;
    for s in db.rows() {
        w.write_record([s.x.to_string(), s.y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file produced by [`write_normalized_csv`] back into `alphabet`.
pub fn read_normalized_csv<R: Read>(alphabet: Alphabet, input: R) -> Result<Database> {
    let mut r = csv::Reader::from_reader(input);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<usize> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Ingest(format!("bad normalized row {:?}", rec)))
        };
        x.push(parse(0)?);
        y.push(parse(1)?);
    }
    Database::new(alphabet, x, y)
}
