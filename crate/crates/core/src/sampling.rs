//! Synchronized sampling of `m` record positions out of `n`.
//!
//! Both curators derive the same [`SamplingPlan`] from a shared 64-bit seed,
//! so they select the same respondents without exchanging the indices.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::domain::Database;
use crate::error::{Error, Result};
use crate::seed;

/// An ordered, injective choice of `m` positions from `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    n: usize,
    m: usize,
    seed: u64,
    indices: Vec<usize>,
}

impl SamplingPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Selects the planned entries of a single column.
    pub fn select<T: Copy>(&self, column: &[T]) -> Result<Vec<T>> {
        if column.len() != self.n {
            return Err(Error::Shape(format!(
                "plan drawn for n = {}, column has {} rows",
                self.n,
                column.len()
            )));
        }
        Ok(self.indices.iter().map(|&i| column[i]).collect())
    }
}

/// Draws `m` distinct positions uniformly without replacement.
///
/// A partial Fisher–Yates shuffle of `0..n`: the ordered tuple is uniform over
/// all `n! / (n − m)!` injective tuples, hence the unordered set is uniform
/// over all `C(n, m)` subsets.
pub fn draw_plan(n: usize, m: usize, seed: u64) -> Result<SamplingPlan> {
    if m == 0 || m > n {
        return Err(Error::Parameter(format!(
            "sample size must satisfy 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(m);
    Ok(SamplingPlan {
        n,
        m,
        seed,
        indices: pool,
    })
}

/// Row `i` of the result is row `plan.indices()[i]` of `db`.
pub fn apply_plan(db: &Database, plan: &SamplingPlan) -> Result<Database> {
    let x = plan.select(db.x_col())?;
    let y = plan.select(db.y_col())?;
    Database::new(db.alphabet().clone(), x, y)
}
