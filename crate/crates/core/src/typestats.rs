//! Joint types (empirical distributions) and the few vector norms the
//! estimator needs.

use serde::{Deserialize, Serialize};

use crate::domain::{Alphabet, Database};
use crate::error::{Error, Result};

const PROPER_SUM_TOL: f64 = 1e-12;

/// Whether a [`TypeVector`] is a genuine distribution or an unconstrained
/// estimate produced by inverting the PRAM channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeKind {
    /// Entries in `[0, 1]`, summing to one.
    Proper,
    /// Sums to one but entries may be negative or exceed one.
    Raw,
}

/// A vector over the joint alphabet, indexed by flat index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeVector {
    alphabet: Alphabet,
    values: Vec<f64>,
    kind: TypeKind,
}

impl TypeVector {
    /// Validates a proper type: entries in `[0, 1]` summing to one within 1e-12.
    pub fn proper(alphabet: Alphabet, values: Vec<f64>) -> Result<Self> {
        check_len(&alphabet, &values)?;
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("type entry {v} outside [0, 1]")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > PROPER_SUM_TOL {
            return Err(Error::Domain(format!("type entries sum to {sum}, not 1")));
        }
        Ok(Self {
            alphabet,
            values,
            kind: TypeKind::Proper,
        })
    }

    /// Wraps an unconstrained estimate. Only the length is checked.
    pub fn raw(alphabet: Alphabet, values: Vec<f64>) -> Result<Self> {
        check_len(&alphabet, &values)?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite estimate entry {v}")));
        }
        Ok(Self {
            alphabet,
            values,
            kind: TypeKind::Raw,
        })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let d = alphabet.joint_card();
        Self {
            alphabet,
            values: vec![1.0 / d as f64; d],
            kind: TypeKind::Proper,
        }
    }

    pub fn indicator(alphabet: Alphabet, flat: usize) -> Result<Self> {
        let d = alphabet.joint_card();
        if flat >= d {
            return Err(Error::Bounds(format!("index {flat} >= d = {d}")));
        }
        let mut values = vec![0.0; d];
        values[flat] = 1.0;
        Ok(Self {
            alphabet,
            values,
            kind: TypeKind::Proper,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> TypeKind {
        self.kind
    }

    pub fn is_proper(&self) -> bool {
        self.kind == TypeKind::Proper
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn l1_norm(&self) -> f64 {
        l1_norm(self)
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(self)
    }

    /// Euclidean projection onto the probability simplex.
    ///
    /// Not used by the estimator itself; raw estimates are reported unclipped.
    pub fn project_to_simplex(&self) -> TypeVector {
        let mut sorted = self.values.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut cumsum = 0.0;
        let mut theta = 0.0;
        for (i, &u) in sorted.iter().enumerate() {
            cumsum += u;
            let t = (cumsum - 1.0) / (i + 1) as f64;
            if u - t > 0.0 {
                theta = t;
            }
        }
        let mut values: Vec<f64> = self.values.iter().map(|v| (v - theta).max(0.0)).collect();
        // Remove the last ulp-level drift so the result validates as proper.
        let sum: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v = (*v / sum).min(1.0));
        TypeVector {
            alphabet: self.alphabet.clone(),
            values,
            kind: TypeKind::Proper,
        }
    }
}

fn check_len(alphabet: &Alphabet, values: &[f64]) -> Result<()> {
    if values.len() != alphabet.joint_card() {
        return Err(Error::Shape(format!(
            "type vector has {} entries, alphabet has {}",
            values.len(),
            alphabet.joint_card()
        )));
    }
    Ok(())
}

/// Joint type `T(x, y) = |{i : (X_i, Y_i) = (x, y)}| / n`.
pub fn joint_type(db: &Database) -> Result<TypeVector> {
    let n = db.len();
    if n == 0 {
        return Err(Error::Domain("joint type of an empty database".into()));
    }
    let alphabet = db.alphabet().clone();
    let counts = joint_counts(db);
    let values = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(TypeVector {
        alphabet,
        values,
        kind: TypeKind::Proper,
    })
}

/// Integer cell counts in flat order.
pub fn joint_counts(db: &Database) -> Vec<u64> {
    let y_card = db.alphabet().y_card();
    let mut counts = vec![0u64; db.alphabet().joint_card()];
    for (&x, &y) in db.x_col().iter().zip(db.y_col()) {
        counts[x * y_card + y] += 1;
    }
    counts
}

/// `‖est − truth‖₂`.
pub fn l2_error(est: &TypeVector, truth: &TypeVector) -> Result<f64> {
    if !est.alphabet.same_shape(&truth.alphabet) {
        return Err(Error::Shape(format!(
            "estimate over {} symbols compared with truth over {}",
            est.alphabet.joint_card(),
            truth.alphabet.joint_card()
        )));
    }
    Ok(est
        .values
        .iter()
        .zip(&truth.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

pub fn l1_norm(t: &TypeVector) -> f64 {
    t.values.iter().map(|v| v.abs()).sum()
}

pub fn l2_norm(t: &TypeVector) -> f64 {
    t.values.iter().map(|v| v * v).sum::<f64>().sqrt()
}
