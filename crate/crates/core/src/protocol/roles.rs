//! State machines for the two curators, the server and the researcher.

use super::message::{ChannelParams, CipherColumn, Payload, ProtocolMessage, Role, SanitizedData};
use crate::domain::{Alphabet, Database};
use crate::error::{Error, Result};
use crate::otp::{self, PadKey};
use crate::pram::PramChannel;
use crate::sampling;
use crate::typestats::{joint_type, TypeVector};

/// Alice or Bob: holds one full column and the shared sampling seed.
#[derive(Debug, Clone)]
pub struct Curator {
    role: Role,
    card: usize,
    column: Vec<usize>,
    shared_seed: Option<u64>,
}

impl Curator {
    pub fn new(role: Role, card: usize, column: Vec<usize>) -> Result<Self> {
        if !role.is_curator() {
            return Err(Error::Protocol(format!("{role:?} is not a curator")));
        }
        if column.is_empty() {
            return Err(Error::Domain("curator column is empty".into()));
        }
        if let Some(v) = column.iter().find(|&&v| v >= card) {
            return Err(Error::Bounds(format!(
                "column value {v} >= cardinality {card}"
            )));
        }
        Ok(Self {
            role,
            card,
            column,
            shared_seed: None,
        })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn n(&self) -> usize {
        self.column.len()
    }

    /// Fixes the sampling seed locally and emits it for the other curator.
    pub fn share_seed(&mut self, seed: u64) -> Result<ProtocolMessage> {
        self.shared_seed = Some(seed);
        ProtocolMessage::new(self.role, &Payload::SamplingSeed(seed))
    }

    pub fn receive(&mut self, msg: &ProtocolMessage) -> Result<()> {
        match msg.payload()? {
            Payload::SamplingSeed(seed) if Some(msg.sender) == self.role.peer() => {
                self.shared_seed = Some(seed);
                Ok(())
            }
            other => Err(Error::Protocol(format!(
                "curator {:?} cannot accept {:?} from {:?}",
                self.role,
                other.kind(),
                msg.sender
            ))),
        }
    }

    /// Samples, pads and emits `(CipherColumn for the server, KeyRelease for the researcher)`.
    pub fn release(&self, m: usize, key_seed: u64) -> Result<(ProtocolMessage, ProtocolMessage)> {
        let seed = self
            .shared_seed
            .ok_or_else(|| Error::Protocol(format!("{:?} has no sampling seed", self.role)))?;
        let plan = sampling::draw_plan(self.column.len(), m, seed)?;
        let sampled = plan.select(&self.column)?;
        let key = otp::gen_key(self.card, m, key_seed)?;
        let cipher = otp::encrypt(&sampled, &key)?;
        let cipher_msg = ProtocolMessage::new(
            self.role,
            &Payload::CipherColumn(CipherColumn {
                card: self.card,
                values: cipher,
            }),
        )?;
        let key_msg = ProtocolMessage::new(self.role, &Payload::KeyRelease(key))?;
        Ok((cipher_msg, key_msg))
    }
}

/// One-shot form of the curator's release step.
pub fn curator_release(
    column: &[usize],
    card: usize,
    role: Role,
    m: usize,
    shared_seed: u64,
    key_seed: u64,
) -> Result<(ProtocolMessage, ProtocolMessage)> {
    let mut c = Curator::new(role, card, column.to_vec())?;
    c.shared_seed = Some(shared_seed);
    c.release(m, key_seed)
}

/// The untrusted server. Its state has no place for keys or plaintext.
#[derive(Debug, Clone)]
pub struct Server {
    channel: PramChannel,
    from_alice: Option<CipherColumn>,
    from_bob: Option<CipherColumn>,
}

impl Server {
    pub fn new(channel: PramChannel) -> Self {
        Self {
            channel,
            from_alice: None,
            from_bob: None,
        }
    }

    pub fn receive(&mut self, msg: &ProtocolMessage) -> Result<()> {
        match (msg.sender, msg.payload()?) {
            (Role::Alice, Payload::CipherColumn(c)) => self.from_alice = Some(c),
            (Role::Bob, Payload::CipherColumn(c)) => self.from_bob = Some(c),
            (sender, other) => {
                return Err(Error::Protocol(format!(
                    "server cannot accept {:?} from {sender:?}",
                    other.kind()
                )))
            }
        }
        Ok(())
    }

    pub fn ready(&self) -> bool {
        self.from_alice.is_some() && self.from_bob.is_some()
    }

    /// Emits `(SanitizedData, ChannelParams)`, both for the researcher.
    pub fn process(&self, seed: u64) -> Result<(ProtocolMessage, ProtocolMessage)> {
        let (Some(a), Some(b)) = (&self.from_alice, &self.from_bob) else {
            return Err(Error::Protocol(
                "server needs both cipher columns before processing".into(),
            ));
        };
        let sanitized = server_process(a, b, &self.channel, seed)?;
        let params = ChannelParams {
            x_card: self.channel.alphabet().x_card(),
            y_card: self.channel.alphabet().y_card(),
            gamma: self.channel.gamma(),
        };
        Ok((
            ProtocolMessage::new(Role::Server, &Payload::SanitizedData(sanitized))?,
            ProtocolMessage::new(Role::Server, &Payload::ChannelParams(params))?,
        ))
    }
}

/// Joins the two cipher columns into joint symbols and perturbs each row once.
pub fn server_process(
    a: &CipherColumn,
    b: &CipherColumn,
    ch: &PramChannel,
    seed: u64,
) -> Result<SanitizedData> {
    if a.values.len() != b.values.len() {
        return Err(Error::Protocol(format!(
            "cipher columns differ in length: {} vs {}",
            a.values.len(),
            b.values.len()
        )));
    }
    let (x_card, y_card) = (ch.alphabet().x_card(), ch.alphabet().y_card());
    if a.card != x_card || b.card != y_card {
        return Err(Error::Protocol(format!(
            "cipher alphabets {}x{} do not match channel {x_card}x{y_card}",
            a.card, b.card
        )));
    }
    let joined: Vec<usize> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| x * y_card + y)
        .collect();
    let perturbed = ch
        .perturb_flat(&joined, seed)
        .map_err(|e| Error::Protocol(format!("malformed cipher column: {e}")))?;
    let (x, y) = perturbed.iter().map(|&f| (f / y_card, f % y_card)).unzip();
    Ok(SanitizedData {
        x_card,
        y_card,
        x,
        y,
    })
}

/// The authorized researcher: collects sanitized data, both keys and the
/// channel parameters, then reconstructs the joint type.
#[derive(Debug, Clone, Default)]
pub struct Researcher {
    sanitized: Option<SanitizedData>,
    params: Option<ChannelParams>,
    key_a: Option<PadKey>,
    key_b: Option<PadKey>,
}

impl Researcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn receive(&mut self, msg: &ProtocolMessage) -> Result<()> {
        match (msg.sender, msg.payload()?) {
            (Role::Server, Payload::SanitizedData(s)) => self.sanitized = Some(s),
            (Role::Server, Payload::ChannelParams(p)) => self.params = Some(p),
            (Role::Alice, Payload::KeyRelease(k)) => self.key_a = Some(k),
            (Role::Bob, Payload::KeyRelease(k)) => self.key_b = Some(k),
            (sender, other) => {
                return Err(Error::Protocol(format!(
                    "researcher cannot accept {:?} from {sender:?}",
                    other.kind()
                )))
            }
        }
        Ok(())
    }

    pub fn ready(&self) -> bool {
        self.sanitized.is_some()
            && self.params.is_some()
            && self.key_a.is_some()
            && self.key_b.is_some()
    }

    fn parts(&self) -> Result<(&SanitizedData, &PadKey, &PadKey, PramChannel)> {
        let missing = |what: &str| Error::Protocol(format!("researcher is missing {what}"));
        let s = self
            .sanitized
            .as_ref()
            .ok_or_else(|| missing("sanitized data"))?;
        let p = self.params.ok_or_else(|| missing("channel parameters"))?;
        let ka = self.key_a.as_ref().ok_or_else(|| missing("Alice's key"))?;
        let kb = self.key_b.as_ref().ok_or_else(|| missing("Bob's key"))?;
        let ch = PramChannel::new(Alphabet::new(p.x_card, p.y_card)?, p.gamma)?;
        Ok((s, ka, kb, ch))
    }

    /// The decrypted sanitized rows `(X̂^m, Ŷ^m)`.
    pub fn decrypt(&self) -> Result<Database> {
        let (s, ka, kb, ch) = self.parts()?;
        decrypt_sanitized(s, ka, kb, ch.alphabet())
    }

    pub fn estimate(&self) -> Result<TypeVector> {
        let (s, ka, kb, ch) = self.parts()?;
        researcher_estimate(s, ka, kb, &ch)
    }
}

fn decrypt_sanitized(
    s: &SanitizedData,
    ka: &PadKey,
    kb: &PadKey,
    alphabet: &Alphabet,
) -> Result<Database> {
    if ka.len() != s.len() || kb.len() != s.len() {
        return Err(Error::Protocol(format!(
            "key lengths {} / {} do not match {} sanitized rows",
            ka.len(),
            kb.len(),
            s.len()
        )));
    }
    if (s.x_card, s.y_card) != (alphabet.x_card(), alphabet.y_card())
        || ka.card() != s.x_card
        || kb.card() != s.y_card
    {
        return Err(Error::Protocol("key or data alphabet mismatch".into()));
    }
    let x = otp::decrypt(&s.x, ka)?;
    let y = otp::decrypt(&s.y, kb)?;
    Database::new(alphabet.clone(), x, y)
}

/// Decrypts, takes the joint type and inverts the channel.
pub fn researcher_estimate(
    s: &SanitizedData,
    ka: &PadKey,
    kb: &PadKey,
    ch: &PramChannel,
) -> Result<TypeVector> {
    let db = decrypt_sanitized(s, ka, kb, ch.alphabet())?;
    ch.invert(&joint_type(&db)?)
}
