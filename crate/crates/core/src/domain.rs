//! Finite joint alphabets, joint symbols and vertically partitioned databases.
//!
//! Every attribute is a dense integer index. The joint alphabet `X × Y` is
//! flattened row-major with `x` as the major index, so a joint symbol
//! `(x, y)` lives at `x * y_card + y`. PRAM channels and type vectors all use
//! this one ordering.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The pair of per-curator alphabets `X` (Alice) and `Y` (Bob).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    x_card: usize,
    y_card: usize,
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(x_card: usize, y_card: usize) -> Result<Self> {
        if x_card == 0 || y_card == 0 {
            return Err(Error::Parameter(format!(
                "alphabet cardinalities must be positive, got {x_card}x{y_card}"
            )));
        }
        let joint = x_card.checked_mul(y_card).ok_or_else(|| {
            Error::Parameter(format!("joint cardinality {x_card}x{y_card} overflows"))
        })?;
        if joint < 2 {
            return Err(Error::Parameter(
                "joint cardinality must be at least 2".to_string(),
            ));
        }
        Ok(Self {
            x_card,
            y_card,
            labels: None,
        })
    }

    /// Attaches one human-readable label per joint (flat) index.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.joint_card() {
            return Err(Error::Shape(format!(
                "expected {} labels, got {}",
                self.joint_card(),
                labels.len()
            )));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::Parameter(format!("duplicate label {label:?}")));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn x_card(&self) -> usize {
        self.x_card
    }

    pub fn y_card(&self) -> usize {
        self.y_card
    }

    /// `d = |X| |Y|`.
    pub fn joint_card(&self) -> usize {
        self.x_card * self.y_card
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, flat: usize) -> Option<&str> {
        self.labels
            .as_ref()
            .and_then(|l| l.get(flat))
            .map(String::as_str)
    }

    /// Same cardinalities; labels are ignored.
    pub fn same_shape(&self, other: &Alphabet) -> bool {
        self.x_card == other.x_card && self.y_card == other.y_card
    }

    pub fn symbol(&self, x: usize, y: usize) -> Result<JointSymbol> {
        let s = JointSymbol { x, y };
        self.check(s)?;
        Ok(s)
    }

    fn check(&self, s: JointSymbol) -> Result<()> {
        if s.x >= self.x_card || s.y >= self.y_card {
            return Err(Error::Bounds(format!(
                "symbol ({}, {}) outside {}x{} alphabet",
                s.x, s.y, self.x_card, self.y_card
            )));
        }
        Ok(())
    }

    pub fn flat_index(&self, s: JointSymbol) -> Result<usize> {
        self.check(s)?;
        Ok(s.x * self.y_card + s.y)
    }

    pub fn unflatten(&self, flat: usize) -> Result<JointSymbol> {
        if flat >= self.joint_card() {
            return Err(Error::Bounds(format!(
                "flat index {flat} outside joint alphabet of size {}",
                self.joint_card()
            )));
        }
        Ok(JointSymbol {
            x: flat / self.y_card,
            y: flat % self.y_card,
        })
    }

    fn ensure_shape(&self, other: &Alphabet) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::Shape(format!(
                "alphabet {}x{} does not match {}x{}",
                self.x_card, self.y_card, other.x_card, other.y_card
            )));
        }
        Ok(())
    }
}

/// One respondent's joint value `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointSymbol {
    pub x: usize,
    pub y: usize,
}

/// Free-function form of [`Alphabet::flat_index`].
pub fn flat_index(s: JointSymbol, a: &Alphabet) -> Result<usize> {
    a.flat_index(s)
}

/// Free-function form of [`Alphabet::unflatten`].
pub fn unflatten(flat: usize, a: &Alphabet) -> Result<JointSymbol> {
    a.unflatten(flat)
}

/// Alice's column `X^n` and Bob's column `Y^n`, row-aligned.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Database {
    alphabet: Alphabet,
    x_col: Vec<usize>,
    y_col: Vec<usize>,
}

impl Database {
    pub fn new(alphabet: Alphabet, x_col: Vec<usize>, y_col: Vec<usize>) -> Result<Self> {
        if x_col.len() != y_col.len() {
            return Err(Error::Shape(format!(
                "column lengths differ: {} vs {}",
                x_col.len(),
                y_col.len()
            )));
        }
        if x_col.is_empty() {
            return Err(Error::Domain("database must have at least one row".into()));
        }
        if let Some((i, &x)) = x_col
            .iter()
            .enumerate()
            .find(|(_, &x)| x >= alphabet.x_card)
        {
            return Err(Error::Bounds(format!(
                "row {i}: x index {x} >= |X| = {}",
                alphabet.x_card
            )));
        }
        if let Some((i, &y)) = y_col
            .iter()
            .enumerate()
            .find(|(_, &y)| y >= alphabet.y_card)
        {
            return Err(Error::Bounds(format!(
                "row {i}: y index {y} >= |Y| = {}",
                alphabet.y_card
            )));
        }
        Ok(Self {
            alphabet,
            x_col,
            y_col,
        })
    }

    /// Builds a database from flat joint indices.
    pub fn from_flat(alphabet: Alphabet, flat: &[usize]) -> Result<Self> {
        let mut x_col = Vec::with_capacity(flat.len());
        let mut y_col = Vec::with_capacity(flat.len());
        for &f in flat {
            let s = alphabet.unflatten(f)?;
            x_col.push(s.x);
            y_col.push(s.y);
        }
        Self::new(alphabet, x_col, y_col)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.x_col.len()
    }

    /// Always false for a constructed database; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.x_col.is_empty()
    }

    pub fn x_col(&self) -> &[usize] {
        &self.x_col
    }

    pub fn y_col(&self) -> &[usize] {
        &self.y_col
    }

    pub fn row(&self, i: usize) -> JointSymbol {
        JointSymbol {
            x: self.x_col[i],
            y: self.y_col[i],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = JointSymbol> + '_ {
        self.x_col
            .iter()
            .zip(&self.y_col)
            .map(|(&x, &y)| JointSymbol { x, y })
    }

    /// Flat joint index of every row.
    pub fn flat(&self) -> Vec<usize> {
        let y_card = self.alphabet.y_card;
        self.x_col
            .iter()
            .zip(&self.y_col)
            .map(|(&x, &y)| x * y_card + y)
            .collect()
    }
}

/// Number of rows whose joint value differs.
pub fn hamming_distance(d1: &Database, d2: &Database) -> Result<usize> {
    d1.alphabet.ensure_shape(&d2.alphabet)?;
    if d1.len() != d2.len() {
        return Err(Error::Shape(format!(
            "database lengths differ: {} vs {}",
            d1.len(),
            d2.len()
        )));
    }
    Ok(d1.rows().zip(d2.rows()).filter(|(a, b)| a != b).count())
}
