#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sampram::domain::{Alphabet, JointSymbol};
use sampram::otp::{self, PadKey};
use sampram::pram::PramChannel;
use sampram::typestats::TypeVector;

pub fn adult_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/adult")
}

/// All sequences of length `m` over `0..card`, most significant symbol first.
pub fn sequences(card: usize, m: usize) -> Vec<Vec<usize>> {
    (0..card.pow(m as u32))
        .map(|mut code| {
            let mut s = vec![0; m];
            for slot in s.iter_mut().rev() {
                *slot = code % card;
                code /= card;
            }
            s
        })
        .collect()
}

fn split(a: &Alphabet, flat: &[usize]) -> (Vec<usize>, Vec<usize>) {
    flat.iter()
        .map(|&f| {
            let s = a.unflatten(f).unwrap();
            (s.x, s.y)
        })
        .unzip()
}

fn join(a: &Alphabet, x: &[usize], y: &[usize]) -> Vec<usize> {
    x.iter()
        .zip(y)
        .map(|(&x, &y)| a.flat_index(JointSymbol { x, y }).unwrap())
        .collect()
}

/// Exact `P(decrypted output | plaintext)` for one key pair, summed over
/// every server output.
fn composite(
    ch: &PramChannel,
    ka: &PadKey,
    kb: &PadKey,
    x: &[usize],
    y: &[usize],
) -> BTreeMap<Vec<usize>, f64> {
    let a = ch.alphabet();
    let cipher = join(
        a,
        &otp::encrypt(x, ka).unwrap(),
        &otp::encrypt(y, kb).unwrap(),
    );
    let mut law = BTreeMap::new();
    for server_out in sequences(a.joint_card(), x.len()) {
        let p: f64 = server_out
            .iter()
            .zip(&cipher)
            .map(|(&o, &c)| ch.probability(o, c))
            .product();
        let (sx, sy) = split(a, &server_out);
        let plain = join(
            a,
            &otp::decrypt(&sx, ka).unwrap(),
            &otp::decrypt(&sy, kb).unwrap(),
        );
        *law.entry(plain).or_insert(0.0) += p;
    }
    law
}

/// Number of key pairs visited and the largest gap between the composite
/// law and the per-row channel over every key pair, input and output.
pub fn commutation_gap(x_card: usize, y_card: usize, m: usize, gamma: f64) -> (usize, f64) {
    let ch = PramChannel::new(Alphabet::new(x_card, y_card).unwrap(), gamma).unwrap();
    let a = ch.alphabet().clone();
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    for pad_a in sequences(x_card, m) {
        for pad_b in sequences(y_card, m) {
            pairs += 1;
            let ka = PadKey::new(x_card, pad_a.clone()).unwrap();
            let kb = PadKey::new(y_card, pad_b.clone()).unwrap();
            for input in sequences(a.joint_card(), m) {
                let (x, y) = split(&a, &input);
                let law = composite(&ch, &ka, &kb, &x, &y);
                assert_eq!(law.len(), a.joint_card().pow(m as u32));
                for (out, p) in law {
                    let direct: f64 = out
                        .iter()
                        .zip(&input)
                        .map(|(&o, &i)| ch.probability(o, i))
                        .product();
                    worst = worst.max((p - direct).abs());
                }
            }
        }
    }
    (pairs, worst)
}

pub fn channel(d: usize, gamma: f64) -> PramChannel {
    PramChannel::new(Alphabet::new(d, 1).unwrap(), gamma).unwrap()
}

pub fn dense(ch: &PramChannel) -> DMatrix<f64> {
    let rows = ch.dense_matrix();
    let d = rows.len();
    DMatrix::from_fn(d, d, |i, j| rows[i][j])
}

/// Largest entrywise gap between the closed-form inverse and an LU solve,
/// over `draws` random right-hand sides.
pub fn inverse_gap(d: usize, gamma: f64, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ch = channel(d, gamma);
    let lu = dense(&ch).lu();
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let obs: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..1.0)).collect();
        let t = TypeVector::raw(ch.alphabet().clone(), obs.clone()).unwrap();
        let closed = ch.invert(&t).unwrap();
        let solved = lu.solve(&DVector::from_vec(obs)).unwrap();
        for (a, b) in closed.values().iter().zip(solved.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// Relative gap between the closed-form condition number and `σ_max / σ_min`.
pub fn condition_gap(d: usize, gamma: f64) -> f64 {
    let ch = channel(d, gamma);
    let sv = dense(&ch).singular_values();
    let spectral = sv.max() / sv.min();
    ((ch.condition_number() - spectral) / spectral).abs()
}
