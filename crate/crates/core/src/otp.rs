//! Additive one-time pad over the cyclic group `Z_card`.
//!
//! Alice pads her column modulo `|X|`, Bob modulo `|Y|`. Decryption subtracts
//! the pad, which coincides with adding it when `card = 2`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Largest modulus the 16-bit wire encoding can carry.
pub const MAX_CARD: usize = u16::MAX as usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadKey {
    card: usize,
    pad: Vec<usize>,
}

impl PadKey {
    pub fn new(card: usize, pad: Vec<usize>) -> Result<Self> {
        check_card(card)?;
        if let Some(v) = pad.iter().find(|&&v| v >= card) {
            return Err(Error::Bounds(format!("pad entry {v} >= modulus {card}")));
        }
        Ok(Self { card, pad })
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn pad(&self) -> &[usize] {
        &self.pad
    }

    pub fn len(&self) -> usize {
        self.pad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pad.is_empty()
    }

    /// `u16` modulus, `u32` entry count, then one `u16` per residue; all big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(6 + 2 * self.pad.len());
        out.extend_from_slice(&(self.card as u16).to_be_bytes());
        out.extend_from_slice(&(self.pad.len() as u32).to_be_bytes());
        for &v in &self.pad {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (card, pad) = decode_residues(bytes)?;
        Self::new(card, pad).map_err(|e| Error::Decode(e.to_string()))
    }
}

fn check_card(card: usize) -> Result<()> {
    if card == 0 || card > MAX_CARD {
        return Err(Error::Parameter(format!(
            "pad modulus must be in 1..={MAX_CARD}, got {card}"
        )));
    }
    Ok(())
}

/// Shared layout of pads and cipher columns: `u16` modulus, `u32` count, `u16` entries.
pub(crate) fn decode_residues(bytes: &[u8]) -> Result<(usize, Vec<usize>)> {
    if bytes.len() < 6 {
        return Err(Error::Decode(format!(
            "residue array needs a 6-byte header, got {} bytes",
            bytes.len()
        )));
    }
    let card = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
    let len = u32::from_be_bytes([bytes[2], bytes[3], bytes[4], bytes[5]]) as usize;
    let body = &bytes[6..];
    if body.len() != 2 * len {
        return Err(Error::Decode(format!(
            "declared {len} residues but body holds {} bytes",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]) as usize)
        .collect();
    Ok((card, values))
}

/// Draws `m` independent uniform residues modulo `card`.
pub fn gen_key(card: usize, m: usize, seed: u64) -> Result<PadKey> {
    check_card(card)?;
    if m == 0 {
        return Err(Error::Parameter("key length must be at least 1".into()));
    }
    let mut rng = seed::rng(seed);
    let pad = (0..m).map(|_| rng.gen_range(0..card)).collect();
    Ok(PadKey { card, pad })
}

fn check_column(col: &[usize], key: &PadKey) -> Result<()> {
    if col.len() != key.pad.len() {
        return Err(Error::Shape(format!(
            "column has {} entries, key has {}",
            col.len(),
            key.pad.len()
        )));
    }
    if let Some(v) = col.iter().find(|&&v| v >= key.card) {
        return Err(Error::Bounds(format!(
            "column entry {v} >= modulus {}",
            key.card
        )));
    }
    Ok(())
}

/// `(value + pad) mod card`, entrywise.
pub fn encrypt(col: &[usize], key: &PadKey) -> Result<Vec<usize>> {
    check_column(col, key)?;
    Ok(col
        .iter()
        .zip(&key.pad)
        .map(|(&v, &k)| (v + k) % key.card)
        .collect())
}

/// `(value − pad) mod card`, entrywise.
pub fn decrypt(col: &[usize], key: &PadKey) -> Result<Vec<usize>> {
    check_column(col, key)?;
    Ok(col
        .iter()
        .zip(&key.pad)
        .map(|(&v, &k)| (v + key.card - k) % key.card)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    #[test]
    fn trivial_group_key_is_zero() {
        let k = gen_key(1, 50, 3).unwrap();
        assert!(k.pad().iter().all(|&v| v == 0));
    }

    #[test]
    fn residues_are_uniform() {
        let k = gen_key(3, 100_000, 11).unwrap();
        let mut counts = [0usize; 3];
        for &v in k.pad() {
            counts[v] += 1;
        }
        for c in counts {
            let f = c as f64 / 1e5;
            assert!((f - 1.0 / 3.0).abs() <= 0.01, "{f}");
        }
    }

    #[test]
    fn seeds_give_distinct_pads() {
        assert_ne!(gen_key(7, 64, 1).unwrap(), gen_key(7, 64, 2).unwrap());
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(gen_key(0, 4, 0), Err(Error::Parameter(_))));
        assert!(matches!(gen_key(3, 0, 0), Err(Error::Parameter(_))));
        let k = gen_key(3, 2, 0).unwrap();
        assert!(matches!(encrypt(&[0, 1, 2], &k), Err(Error::Shape(_))));
        assert!(matches!(encrypt(&[0, 3], &k), Err(Error::Bounds(_))));
    }

    #[test]
    fn hand_evaluated_examples() {
        let zero = PadKey::new(4, vec![0, 0, 0]).unwrap();
        assert_eq!(encrypt(&[3, 1, 2], &zero).unwrap(), vec![3, 1, 2]);

        let k2 = PadKey::new(2, vec![1, 1, 0]).unwrap();
        assert_eq!(encrypt(&[0, 1, 1], &k2).unwrap(), vec![1, 0, 1]);
        assert_eq!(
            decrypt(&[0, 1, 1], &k2).unwrap(),
            encrypt(&[0, 1, 1], &k2).unwrap()
        );

        let k3 = PadKey::new(3, vec![1, 2]).unwrap();
        assert_eq!(decrypt(&[2, 0], &k3).unwrap(), vec![1, 1]);
    }

    /// For a fixed plaintext, enumerating every key yields every ciphertext exactly once.
    #[test]
    fn ciphertext_is_uniform_over_keys() {
        for card in 1..=3usize {
            for m in 1..=4u32 {
                let total = card.pow(m);
                let unpack = |mut code: usize| -> Vec<usize> {
                    (0..m)
                        .map(|_| {
                            let v = code % card;
                            code /= card;
                            v
                        })
                        .collect()
                };
                for plain_code in 0..total {
                    let plain = unpack(plain_code);
                    let mut hist: HashMap<Vec<usize>, usize> = HashMap::new();
                    for key_code in 0..total {
                        let key = PadKey::new(card, unpack(key_code)).unwrap();
                        *hist.entry(encrypt(&plain, &key).unwrap()).or_default() += 1;
                    }
                    assert_eq!(hist.len(), total);
                    assert!(hist.values().all(|&c| c == 1));
                }
            }
        }
    }

    #[test]
    fn wire_layout() {
        let k = PadKey::new(300, vec![1, 299]).unwrap();
        assert_eq!(k.to_bytes(), vec![1, 44, 0, 0, 0, 2, 0, 1, 1, 43]);
        assert_eq!(PadKey::from_bytes(&k.to_bytes()).unwrap(), k);
        assert!(PadKey::from_bytes(&[0, 3, 0, 0, 0, 2, 0, 1]).is_err());
        assert!(PadKey::from_bytes(&[0, 3, 0, 0, 0, 1, 0, 3]).is_err());
    }

    proptest! {
        #[test]
        fn decrypt_inverts_encrypt(
            card in 1usize..50,
            raw in prop::collection::vec((0usize..1000, 0usize..1000), 1..40),
        ) {
            let col: Vec<usize> = raw.iter().map(|(v, _)| v % card).collect();
            let key = PadKey::new(card, raw.iter().map(|(_, k)| k % card).collect()).unwrap();
            let c = encrypt(&col, &key).unwrap();
            prop_assert_eq!(decrypt(&c, &key).unwrap(), col);
            prop_assert_eq!(PadKey::from_bytes(&key.to_bytes()).unwrap(), key);
        }
    }
}
