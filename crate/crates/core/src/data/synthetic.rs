//! Synthetic datasets with a prescribed joint distribution.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::domain::{Alphabet, Database};
use crate::error::{Error, Result};
use crate::seed;

/// Mass held by the dominant cell of the peaky shape.
pub const PEAK_MASS: f64 = 0.90;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Every cell `1/d`.
    Uniform,
    /// Cell `i` has mass `(i + 1) / (1 + 2 + … + d)`.
    Linear,
    /// Cell 0 has mass 0.9; the rest share 0.1 equally.
    Peaky,
}

impl Shape {
    pub fn probabilities(self, d: usize) -> Result<Vec<f64>> {
        if d < 2 {
            return Err(Error::Parameter(format!(
                "synthetic d must be >= 2, got {d}"
            )));
        }
        Ok(match self {
            Shape::Uniform => vec![1.0 / d as f64; d],
            Shape::Linear => {
                let q = (d * (d + 1) / 2) as f64;
                (1..=d).map(|i| i as f64 / q).collect()
            }
            Shape::Peaky => {
                let rest = (1.0 - PEAK_MASS) / (d - 1) as f64;
                let mut p = vec![rest; d];
                p[0] = PEAK_MASS;
                p
            }
        })
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Shape::Uniform),
            "linear" => Ok(Shape::Linear),
            "peaky" | "peak" => Ok(Shape::Peaky),
            other => Err(Error::Parameter(format!(
                "unknown shape {other:?}; expected uniform, linear or peaky"
            ))),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Uniform => "uniform",
            Shape::Linear => "linear",
            Shape::Peaky => "peaky",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub shape: Shape,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    /// `(|X|, |Y|)`; defaults to `(d, 1)`.
    pub split: Option<(usize, usize)>,
}

impl SyntheticSpec {
    pub fn new(shape: Shape, n: usize, d: usize, seed: u64) -> Self {
        Self {
            shape,
            n,
            d,
            seed,
            split: None,
        }
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        let (x, y) = self.split.unwrap_or((self.d, 1));
        if x * y != self.d {
            return Err(Error::Parameter(format!(
                "split {x}x{y} does not multiply to d = {}",
                self.d
            )));
        }
        Alphabet::new(x, y)
    }
}

/// `n` i.i.d. draws from the shape's distribution over `d` joint cells.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<Database> {
    let probs = spec.shape.probabilities(spec.d)?;
    let alphabet = spec.alphabet()?;
    if spec.n == 0 {
        return Err(Error::Parameter("synthetic n must be >= 1".into()));
    }
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut rng = seed::rng(spec.seed);
    let flat: Vec<usize> = (0..spec.n).map(|_| dist.sample(&mut rng)).collect();
    Database::from_flat(alphabet, &flat)
}
