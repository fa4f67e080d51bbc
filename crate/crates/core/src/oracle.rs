//! Exhaustive verification of the sampling + PRAM privacy level on tiny
//! instances.
//!
//! The output law of the release, seen from the researcher, is
//!
//! ```text
//! P(out | db) = (1/|Θ|) Σ_{π ∈ Θ} Π_i A[out_i, db[π_i]]
//! ```
//!
//! where `Θ` is the set of ordered injective `m`-tuples of row positions. With
//! `γ = p/r` rational, every channel entry is an integer over
//! `Q = p + (d − 1) r` (keep ↦ `p`, move ↦ `r`), so every output probability is
//! an exact integer over the common denominator `Q^m · |Θ|`. All comparisons
//! below are exact integer comparisons; floats appear only in reports.
//!
//! This module shares no code with `sampling` or `pram`.

use serde::Serialize;

use crate::domain::{Alphabet, Database};
use crate::error::{Error, Result};

/// Largest population the enumeration accepts.
pub const MAX_N: usize = 5;
/// Largest joint alphabet the enumeration accepts.
pub const MAX_D: usize = 4;

/// γ as an exact fraction `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExactGamma {
    pub num: u64,
    pub den: u64,
}

impl ExactGamma {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num <= den {
            return Err(Error::Parameter(format!(
                "gamma = {num}/{den} must exceed 1"
            )));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    /// Finds the exact fraction for a binary float with a denominator of at most 1000.
    pub fn from_f64(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 1.0 || gamma > 1e9 {
            return Err(Error::Parameter(format!(
                "oracle gamma must lie in (1, 1e9], got {gamma}"
            )));
        }
        for den in 1..=1000u64 {
            let num = (gamma * den as f64).round();
            if num / den as f64 == gamma {
                return Self::new(num as u64, den);
            }
        }
        Err(Error::Parameter(format!(
            "gamma {gamma} has no exact fraction with denominator <= 1000"
        )))
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Channel normaliser `Q = num + (d − 1) den`, i.e. `q · den`.
    fn q(&self, d: usize) -> u128 {
        self.num as u128 + (d as u128 - 1) * self.den as u128
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn overflow() -> Error {
    Error::Capacity("exact arithmetic overflowed u128".into())
}

/// All ordered injective `m`-tuples over `0..n`.
fn injective_tuples(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn extend(
        n: usize,
        m: usize,
        prefix: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        if prefix.len() == m {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(n, m, prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(
        n,
        m,
        &mut Vec::with_capacity(m),
        &mut vec![false; n],
        &mut out,
    );
    out
}

/// Decodes `code` as a length-`len` base-`d` sequence, first symbol most significant.
fn decode_sequence(mut code: usize, d: usize, len: usize) -> Vec<usize> {
    let mut seq = vec![0; len];
    for slot in seq.iter_mut().rev() {
        *slot = code % d;
        code /= d;
    }
    seq
}

fn encode_sequence(seq: &[usize], d: usize) -> usize {
    seq.iter().fold(0, |acc, &s| acc * d + s)
}

fn check_instance(n: usize, m: usize, d: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Parameter(format!(
            "need 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    if n > MAX_N || d > MAX_D {
        return Err(Error::Capacity(format!(
            "n = {n}, d = {d} exceeds the enumeration limits n <= {MAX_N}, d <= {MAX_D}"
        )));
    }
    if d < 2 {
        return Err(Error::Parameter(
            "joint alphabet needs at least 2 symbols".into(),
        ));
    }
    Ok(())
}

/// One exact output probability.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLikelihood {
    pub database: Database,
    pub output: Database,
    pub numerator: u128,
    pub denominator: u128,
}

impl ExactLikelihood {
    pub fn probability(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// The exact law of the researcher's sanitized sequence for one database.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputDistribution {
    d: usize,
    m: usize,
    denominator: u128,
    /// Indexed by base-`d` output code.
    numerators: Vec<u128>,
}

impl OutputDistribution {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn denominator(&self) -> u128 {
        self.denominator
    }

    pub fn num_outputs(&self) -> usize {
        self.numerators.len()
    }

    /// Exact numerator for an output given as flat joint symbols.
    pub fn numerator(&self, output: &[usize]) -> Result<u128> {
        if output.len() != self.m || output.iter().any(|&s| s >= self.d) {
            return Err(Error::Shape(format!(
                "output must be {} symbols below {}",
                self.m, self.d
            )));
        }
        Ok(self.numerators[encode_sequence(output, self.d)])
    }

    pub fn probability(&self, output: &[usize]) -> Result<f64> {
        Ok(self.numerator(output)? as f64 / self.denominator as f64)
    }

    /// Exact total mass (numerator sum); equals the denominator.
    pub fn total_numerator(&self) -> u128 {
        self.numerators.iter().sum()
    }

    /// `(output sequence, probability)` for every output.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.numerators.iter().enumerate().map(|(code, &num)| {
            (
                decode_sequence(code, self.d, self.m),
                num as f64 / self.denominator as f64,
            )
        })
    }

    /// Expands into per-output [`ExactLikelihood`] records for `db`.
    pub fn likelihoods(&self, db: &Database) -> Result<Vec<ExactLikelihood>> {
        self.numerators
            .iter()
            .enumerate()
            .map(|(code, &numerator)| {
                Ok(ExactLikelihood {
                    database: db.clone(),
                    output: Database::from_flat(
                        db.alphabet().clone(),
                        &decode_sequence(code, self.d, self.m),
                    )?,
                    numerator,
                    denominator: self.denominator,
                })
            })
            .collect()
    }
}

/// Shared enumeration over `Θ` for a database given as flat symbols.
struct Enumerator {
    d: usize,
    m: usize,
    gamma: ExactGamma,
    tuples: Vec<Vec<usize>>,
    denominator: u128,
}

impl Enumerator {
    fn new(n: usize, m: usize, d: usize, gamma: ExactGamma) -> Result<Self> {
        check_instance(n, m, d)?;
        let tuples = injective_tuples(n, m);
        let q = gamma.q(d);
        let denominator = q
            .checked_pow(m as u32)
            .and_then(|v| v.checked_mul(tuples.len() as u128))
            .ok_or_else(overflow)?;
        Ok(Self {
            d,
            m,
            gamma,
            tuples,
            denominator,
        })
    }

    fn distribution(&self, rows: &[usize]) -> Result<OutputDistribution> {
        let outputs = self.d.pow(self.m as u32);
        let keep = self.gamma.num as u128;
        let moved = self.gamma.den as u128;
        let mut numerators = vec![0u128; outputs];
        let mut sampled = vec![0usize; self.m];
        for pi in &self.tuples {
            for (s, &i) in sampled.iter_mut().zip(pi) {
                *s = rows[i];
            }
            for (code, slot) in numerators.iter_mut().enumerate() {
                let out = decode_sequence(code, self.d, self.m);
                let mut prod: u128 = 1;
                for (o, s) in out.iter().zip(&sampled) {
                    prod = prod
                        .checked_mul(if o == s { keep } else { moved })
                        .ok_or_else(overflow)?;
                }
                *slot = slot.checked_add(prod).ok_or_else(overflow)?;
            }
        }
        Ok(OutputDistribution {
            d: self.d,
            m: self.m,
            denominator: self.denominator,
            numerators,
        })
    }
}

/// Exact output law of the sampled-then-perturbed release of `db`.
pub fn exact_output_dist(db: &Database, m: usize, gamma: f64) -> Result<OutputDistribution> {
    let g = ExactGamma::from_f64(gamma)?;
    exact_output_dist_with(db, m, g)
}

pub fn exact_output_dist_with(
    db: &Database,
    m: usize,
    gamma: ExactGamma,
) -> Result<OutputDistribution> {
    let d = db.alphabet().joint_card();
    Enumerator::new(db.len(), m, d, gamma)?.distribution(&db.flat())
}

/// Exact ratio `num / den` of two probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExactRatio {
    pub num: u128,
    pub den: u128,
}

impl ExactRatio {
    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn gt(&self, other: &ExactRatio) -> Result<bool> {
        let l = self.num.checked_mul(other.den).ok_or_else(overflow)?;
        let r = other.num.checked_mul(self.den).ok_or_else(overflow)?;
        Ok(l > r)
    }

    fn cmp_exact(&self, other: &ExactRatio) -> Result<std::cmp::Ordering> {
        let l = self.num.checked_mul(other.den).ok_or_else(overflow)?;
        let r = other.num.checked_mul(self.den).ok_or_else(overflow)?;
        Ok(l.cmp(&r))
    }
}

/// The closed-form privacy ratio `(n + m(γ − 1)) / n` as an exact fraction.
pub fn theorem_ratio(n: usize, m: usize, gamma: ExactGamma) -> ExactRatio {
    let den = n as u128 * gamma.den as u128;
    let num = den + m as u128 * (gamma.num - gamma.den) as u128;
    ExactRatio { num, den }
}

/// Where the worst-case ratio is attained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub db1: Vec<usize>,
    pub db2: Vec<usize>,
    pub output: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstCase {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub gamma: f64,
    /// Largest `P(out | db1) / P(out | db2)` over neighbouring databases and outputs.
    pub ratio: ExactRatio,
    pub bound: ExactRatio,
    pub witness: Witness,
}

impl WorstCase {
    pub fn ratio_f64(&self) -> f64 {
        self.ratio.as_f64()
    }

    pub fn bound_f64(&self) -> f64 {
        self.bound.as_f64()
    }

    /// Exact `ratio <= bound`.
    pub fn within_bound(&self) -> bool {
        matches!(
            self.ratio.cmp_exact(&self.bound),
            Ok(std::cmp::Ordering::Less | std::cmp::Ordering::Equal)
        )
    }

    /// Exact `ratio == bound`.
    pub fn attains_bound(&self) -> bool {
        matches!(
            self.ratio.cmp_exact(&self.bound),
            Ok(std::cmp::Ordering::Equal)
        )
    }
}

/// Maximises the likelihood ratio over every pair of databases at Hamming
/// distance one and every output.
pub fn worst_case_ratio(n: usize, m: usize, gamma: f64, d: usize) -> Result<WorstCase> {
    worst_case_ratio_with(n, m, ExactGamma::from_f64(gamma)?, d)
}

pub fn worst_case_ratio_with(n: usize, m: usize, gamma: ExactGamma, d: usize) -> Result<WorstCase> {
    let en = Enumerator::new(n, m, d, gamma)?;
    let databases = d.pow(n as u32);
    let dists = (0..databases)
        .map(|code| en.distribution(&decode_sequence(code, d, n)))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(ExactRatio, Witness)> = None;
    for code1 in 0..databases {
        let db1 = decode_sequence(code1, d, n);
        for k in 0..n {
            for v in (0..d).filter(|&v| v != db1[k]) {
                let mut db2 = db1.clone();
                db2[k] = v;
                let code2 = encode_sequence(&db2, d);
                let (p1, p2) = (&dists[code1].numerators, &dists[code2].numerators);
                for out in 0..p1.len() {
                    let r = ExactRatio {
                        num: p1[out],
                        den: p2[out],
                    };
                    let better = match &best {
                        None => true,
                        Some((b, _)) => r.gt(b)?,
                    };
                    if better {
                        best = Some((
                            r,
                            Witness {
                                db1: db1.clone(),
                                db2: db2.clone(),
                                output: decode_sequence(out, d, m),
                            },
                        ));
                    }
                }
            }
        }
    }
    let (ratio, witness) = best.expect("at least one neighbouring pair exists for d >= 2");
    Ok(WorstCase {
        n,
        m,
        d,
        gamma: gamma.as_f64(),
        ratio,
        bound: theorem_ratio(n, m, gamma),
        witness,
    })
}

/// The tightness configuration: `db1 = (b, a, …, a)`, `db2 = (a, …, a)`,
/// output `(b, …, b)`.
pub fn tightness_example(n: usize, m: usize, gamma: f64, d: usize) -> Result<ExactRatio> {
    let g = ExactGamma::from_f64(gamma)?;
    let en = Enumerator::new(n, m, d, g)?;
    let (a, b) = (0usize, 1usize);
    let mut db1 = vec![a; n];
    db1[0] = b;
    let db2 = vec![a; n];
    let out = vec![b; m];
    let code = encode_sequence(&out, d);
    Ok(ExactRatio {
        num: en.distribution(&db1)?.numerators[code],
        den: en.distribution(&db2)?.numerators[code],
    })
}

/// Convenience: a `d`-symbol joint alphabet laid out as `d × 1`.
pub fn joint_alphabet(d: usize) -> Result<Alphabet> {
    Alphabet::new(d, 1)
}
