//! The γ-diagonal PRAM channel.
//!
//! For a joint alphabet of size `d` and parameter `γ > 1`, the channel keeps a
//! symbol with probability `γ/q` and moves it to each other symbol with
//! probability `1/q`, where `q = γ + d − 1`. As a matrix,
//! `A = ((γ − 1) I + J) / q` with `J` the all-ones matrix, so `A`, `A⁻¹` and
//! the condition number all have closed forms and nothing here ever builds the
//! dense `d × d` matrix except [`PramChannel::dense_matrix`].

use serde::{Deserialize, Serialize};

use crate::domain::{Alphabet, Database};
use crate::error::{Error, Result};
use crate::seed;
use crate::typestats::TypeVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PramChannel {
    alphabet: Alphabet,
    gamma: f64,
    q: f64,
}

impl PramChannel {
    pub fn new(alphabet: Alphabet, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 1.0 {
            return Err(Error::Parameter(format!(
                "PRAM parameter gamma must be finite and > 1, got {gamma}"
            )));
        }
        let q = gamma + alphabet.joint_card() as f64 - 1.0;
        Ok(Self { alphabet, gamma, q })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.alphabet.joint_card()
    }

    /// Probability of keeping a symbol, `γ/q`.
    pub fn keep_probability(&self) -> f64 {
        self.gamma / self.q
    }

    /// `A[out, input]`.
    pub fn probability(&self, out: usize, input: usize) -> f64 {
        if out == input {
            self.gamma / self.q
        } else {
            1.0 / self.q
        }
    }

    /// The explicit column-stochastic matrix, row-major `a[out][input]`.
    pub fn dense_matrix(&self) -> Vec<Vec<f64>> {
        let d = self.d();
        (0..d)
            .map(|out| (0..d).map(|input| self.probability(out, input)).collect())
            .collect()
    }

    /// `c = 1 + d / (γ − 1)`, the ratio of the extreme singular values of `A`.
    pub fn condition_number(&self) -> f64 {
        1.0 + self.d() as f64 / (self.gamma - 1.0)
    }

    /// Perturbs one flat symbol.
    pub fn perturb_symbol<R: rand::Rng + ?Sized>(&self, symbol: usize, rng: &mut R) -> usize {
        let d = self.d();
        let u: f64 = rng.gen();
        if u < self.keep_probability() {
            symbol
        } else {
            // Uniform over the other d − 1 symbols: draw from 0..d−1 and skip `symbol`.
            let r = rng.gen_range(0..d - 1);
            if r >= symbol {
                r + 1
            } else {
                r
            }
        }
    }

    /// Perturbs every flat symbol independently.
    pub fn perturb_flat(&self, symbols: &[usize], seed: u64) -> Result<Vec<usize>> {
        let d = self.d();
        if let Some(s) = symbols.iter().find(|&&s| s >= d) {
            return Err(Error::Bounds(format!("flat symbol {s} >= d = {d}")));
        }
        let mut rng = seed::rng(seed);
        Ok(symbols
            .iter()
            .map(|&s| self.perturb_symbol(s, &mut rng))
            .collect())
    }

    /// `A · t = ((γ − 1) t + 1) / q`.
    pub fn apply(&self, t: &TypeVector) -> Result<TypeVector> {
        self.check_alphabet(t.alphabet())?;
        let total = mass(t);
        let values = t
            .values()
            .iter()
            .map(|&v| ((self.gamma - 1.0) * v + total) / self.q)
            .collect::<Vec<_>>();
        if t.is_proper() {
            TypeVector::proper(self.alphabet.clone(), values)
        } else {
            TypeVector::raw(self.alphabet.clone(), values)
        }
    }

    /// `A⁻¹ · t = (q t − (Σt) 1) / (γ − 1)`.
    ///
    /// For a type the result also sums to one but may have negative entries.
    pub fn invert(&self, t_hat: &TypeVector) -> Result<TypeVector> {
        self.check_alphabet(t_hat.alphabet())?;
        let total = mass(t_hat);
        let values = t_hat
            .values()
            .iter()
            .map(|&v| (self.q * v - total) / (self.gamma - 1.0))
            .collect();
        TypeVector::raw(self.alphabet.clone(), values)
    }

    fn check_alphabet(&self, other: &Alphabet) -> Result<()> {
        if !self.alphabet.same_shape(other) {
            return Err(Error::Shape(format!(
                "channel over {} symbols applied to a vector over {}",
                self.d(),
                other.joint_card()
            )));
        }
        Ok(())
    }
}

/// Total mass, taken as exactly one for proper types.
fn mass(t: &TypeVector) -> f64 {
    if t.is_proper() {
        1.0
    } else {
        t.sum()
    }
}

/// Applies the channel to every joint row of `db`.
pub fn perturb(db: &Database, ch: &PramChannel, seed: u64) -> Result<Database> {
    ch.check_alphabet(db.alphabet())?;
    let out = ch.perturb_flat(&db.flat(), seed)?;
    Database::from_flat(db.alphabet().clone(), &out)
}

pub fn channel_apply(ch: &PramChannel, t: &TypeVector) -> Result<TypeVector> {
    ch.apply(t)
}

pub fn channel_invert(ch: &PramChannel, t_hat: &TypeVector) -> Result<TypeVector> {
    ch.invert(t_hat)
}

pub fn condition_number(ch: &PramChannel) -> f64 {
    ch.condition_number()
}
