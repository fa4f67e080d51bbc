//! Wire records exchanged between the four roles.
//!
//! Frame layout: 1-byte kind tag, 1-byte sender id, 4-byte big-endian payload
//! length, then the payload. Column payloads are arrays of big-endian `u16`
//! symbol indices.

use crate::error::{Error, Result};
use crate::otp::{self, PadKey};

const HEADER_LEN: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Role {
    Alice = 1,
    Bob = 2,
    Server = 3,
    Researcher = 4,
}

impl Role {
    pub fn is_curator(self) -> bool {
        matches!(self, Role::Alice | Role::Bob)
    }

    /// The other curator.
    pub fn peer(self) -> Option<Role> {
        match self {
            Role::Alice => Some(Role::Bob),
            Role::Bob => Some(Role::Alice),
            _ => None,
        }
    }
}

impl TryFrom<u8> for Role {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        Ok(match b {
            1 => Role::Alice,
            2 => Role::Bob,
            3 => Role::Server,
            4 => Role::Researcher,
            _ => return Err(Error::Decode(format!("unknown role id {b}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageKind {
    CipherColumn = 1,
    KeyRelease = 2,
    SamplingSeed = 3,
    SanitizedData = 4,
    ChannelParams = 5,
}

impl TryFrom<u8> for MessageKind {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        Ok(match b {
            1 => MessageKind::CipherColumn,
            2 => MessageKind::KeyRelease,
            3 => MessageKind::SamplingSeed,
            4 => MessageKind::SanitizedData,
            5 => MessageKind::ChannelParams,
            _ => return Err(Error::Decode(format!("unknown message kind {b}"))),
        })
    }
}

/// A curator's padded, sampled column as seen by the server.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherColumn {
    pub card: usize,
    pub values: Vec<usize>,
}

/// The server's perturbed output, still padded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SanitizedData {
    pub x_card: usize,
    pub y_card: usize,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl SanitizedData {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Channel metadata the researcher needs to invert the perturbation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub x_card: usize,
    pub y_card: usize,
    pub gamma: f64,
}

/// Typed view of a message body.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    CipherColumn(CipherColumn),
    KeyRelease(PadKey),
    SamplingSeed(u64),
    SanitizedData(SanitizedData),
    ChannelParams(ChannelParams),
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::CipherColumn(_) => MessageKind::CipherColumn,
            Payload::KeyRelease(_) => MessageKind::KeyRelease,
            Payload::SamplingSeed(_) => MessageKind::SamplingSeed,
            Payload::SanitizedData(_) => MessageKind::SanitizedData,
            Payload::ChannelParams(_) => MessageKind::ChannelParams,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        match self {
            Payload::CipherColumn(c) => {
                put_card(&mut out, c.card)?;
                put_len(&mut out, c.values.len())?;
                put_symbols(&mut out, &c.values)?;
            }
            Payload::KeyRelease(k) => out = k.to_bytes(),
            Payload::SamplingSeed(s) => out.extend_from_slice(&s.to_be_bytes()),
            Payload::SanitizedData(s) => {
                if s.x.len() != s.y.len() {
                    return Err(Error::Shape("sanitized columns differ in length".into()));
                }
                put_card(&mut out, s.x_card)?;
                put_card(&mut out, s.y_card)?;
                put_len(&mut out, s.x.len())?;
                put_symbols(&mut out, &s.x)?;
                put_symbols(&mut out, &s.y)?;
            }
            Payload::ChannelParams(p) => {
                put_card(&mut out, p.x_card)?;
                put_card(&mut out, p.y_card)?;
                out.extend_from_slice(&p.gamma.to_bits().to_be_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(kind: MessageKind, bytes: &[u8]) -> Result<Self> {
        Ok(match kind {
            MessageKind::CipherColumn => {
                let (card, values) = otp::decode_residues(bytes)?;
                Payload::CipherColumn(CipherColumn { card, values })
            }
            MessageKind::KeyRelease => Payload::KeyRelease(PadKey::from_bytes(bytes)?),
            MessageKind::SamplingSeed => {
                let arr: [u8; 8] = bytes.try_into().map_err(|_| {
                    Error::Decode(format!("seed needs 8 bytes, got {}", bytes.len()))
                })?;
                Payload::SamplingSeed(u64::from_be_bytes(arr))
            }
            MessageKind::SanitizedData => {
                if bytes.len() < 8 {
                    return Err(Error::Decode("sanitized header truncated".into()));
                }
                let x_card = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
                let y_card = u16::from_be_bytes([bytes[2], bytes[3]]) as usize;
                let m = u32::from_be_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]) as usize;
                let body = &bytes[8..];
                if body.len() != 4 * m {
                    return Err(Error::Decode(format!(
                        "sanitized body holds {} bytes, expected {}",
                        body.len(),
                        4 * m
                    )));
                }
                let (xb, yb) = body.split_at(2 * m);
                Payload::SanitizedData(SanitizedData {
                    x_card,
                    y_card,
                    x: get_symbols(xb),
                    y: get_symbols(yb),
                })
            }
            MessageKind::ChannelParams => {
                if bytes.len() != 12 {
                    return Err(Error::Decode(format!(
                        "channel params need 12 bytes, got {}",
                        bytes.len()
                    )));
                }
                let mut g = [0u8; 8];
                g.copy_from_slice(&bytes[4..12]);
                Payload::ChannelParams(ChannelParams {
                    x_card: u16::from_be_bytes([bytes[0], bytes[1]]) as usize,
                    y_card: u16::from_be_bytes([bytes[2], bytes[3]]) as usize,
                    gamma: f64::from_bits(u64::from_be_bytes(g)),
                })
            }
        })
    }
}

fn put_card(out: &mut Vec<u8>, card: usize) -> Result<()> {
    let c = u16::try_from(card)
        .map_err(|_| Error::Parameter(format!("cardinality {card} exceeds u16")))?;
    out.extend_from_slice(&c.to_be_bytes());
    Ok(())
}

fn put_len(out: &mut Vec<u8>, len: usize) -> Result<()> {
    let l =
        u32::try_from(len).map_err(|_| Error::Parameter(format!("length {len} exceeds u32")))?;
    out.extend_from_slice(&l.to_be_bytes());
    Ok(())
}

fn put_symbols(out: &mut Vec<u8>, values: &[usize]) -> Result<()> {
    out.reserve(2 * values.len());
    for &v in values {
        let s =
            u16::try_from(v).map_err(|_| Error::Parameter(format!("symbol {v} exceeds u16")))?;
        out.extend_from_slice(&s.to_be_bytes());
    }
    Ok(())
}

fn get_symbols(bytes: &[u8]) -> Vec<usize> {
    bytes
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]) as usize)
        .collect()
}

/// A framed message: kind, sender and an opaque payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolMessage {
    pub kind: MessageKind,
    pub sender: Role,
    pub payload: Vec<u8>,
}

impl ProtocolMessage {
    pub fn new(sender: Role, payload: &Payload) -> Result<Self> {
        Ok(Self {
            kind: payload.kind(),
            sender,
            payload: payload.to_bytes()?,
        })
    }

    pub fn payload(&self) -> Result<Payload> {
        Payload::from_bytes(self.kind, &self.payload)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.push(self.kind as u8);
        out.push(self.sender as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(frame: &[u8]) -> Result<Self> {
        if frame.len() < HEADER_LEN {
            return Err(Error::Decode(format!(
                "frame shorter than {HEADER_LEN}-byte header"
            )));
        }
        let kind = MessageKind::try_from(frame[0])?;
        let sender = Role::try_from(frame[1])?;
        let len = u32::from_be_bytes([frame[2], frame[3], frame[4], frame[5]]) as usize;
        let payload = &frame[HEADER_LEN..];
        if payload.len() != len {
            return Err(Error::Decode(format!(
                "header declares {len} payload bytes, frame carries {}",
                payload.len()
            )));
        }
        Ok(Self {
            kind,
            sender,
            payload: payload.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frame_layout() {
        let msg = ProtocolMessage::new(
            Role::Bob,
            &Payload::CipherColumn(CipherColumn {
                card: 4,
                values: vec![3, 0],
            }),
        )
        .unwrap();
        assert_eq!(
            msg.encode(),
            vec![1, 2, 0, 0, 0, 10, 0, 4, 0, 0, 0, 2, 0, 3, 0, 0]
        );
        assert_eq!(ProtocolMessage::decode(&msg.encode()).unwrap(), msg);
    }

    #[test]
    fn sanitized_layout() {
        let p = Payload::SanitizedData(SanitizedData {
            x_card: 6,
            y_card: 4,
            x: vec![5, 1],
            y: vec![0, 3],
        });
        let bytes = p.to_bytes().unwrap();
        assert_eq!(bytes, vec![0, 6, 0, 4, 0, 0, 0, 2, 0, 5, 0, 1, 0, 0, 0, 3]);
        assert_eq!(
            Payload::from_bytes(MessageKind::SanitizedData, &bytes).unwrap(),
            p
        );
    }

    #[test]
    fn malformed_frames() {
        assert!(ProtocolMessage::decode(&[1, 1, 0]).is_err());
        assert!(ProtocolMessage::decode(&[9, 1, 0, 0, 0, 0]).is_err());
        assert!(ProtocolMessage::decode(&[1, 7, 0, 0, 0, 0]).is_err());
        assert!(ProtocolMessage::decode(&[3, 1, 0, 0, 0, 2, 0]).is_err());
        assert!(Payload::from_bytes(MessageKind::SamplingSeed, &[0; 7]).is_err());
        assert!(Payload::from_bytes(MessageKind::ChannelParams, &[0; 11]).is_err());
        assert!(
            Payload::from_bytes(MessageKind::SanitizedData, &[0, 2, 0, 2, 0, 0, 0, 1, 0]).is_err()
        );
    }

    #[test]
    fn oversized_symbols_are_rejected() {
        let p = Payload::CipherColumn(CipherColumn {
            card: 70_000,
            values: vec![1],
        });
        assert!(p.to_bytes().is_err());
    }

    proptest! {
        #[test]
        fn payloads_survive_framing(
            seed in any::<u64>(),
            gamma in 1.0001f64..1e9,
            xs in prop::collection::vec(0usize..6, 1..50),
        ) {
            let ys: Vec<usize> = xs.iter().map(|x| (x * 7 + 1) % 4).collect();
            let payloads = [
                Payload::SamplingSeed(seed),
                Payload::ChannelParams(ChannelParams { x_card: 6, y_card: 4, gamma }),
                Payload::CipherColumn(CipherColumn { card: 6, values: xs.clone() }),
                Payload::SanitizedData(SanitizedData { x_card: 6, y_card: 4, x: xs.clone(), y: ys }),
                Payload::KeyRelease(PadKey::new(6, xs.clone()).unwrap()),
            ];
            for p in payloads {
                let msg = ProtocolMessage::new(Role::Server, &p).unwrap();
                let back = ProtocolMessage::decode(&msg.encode()).unwrap();
                prop_assert_eq!(back.payload().unwrap(), p);
            }
        }
    }
}
