//! The four-role release protocol.
//!
//! 1. Alice and Bob agree on a sampling seed, sample the same `m` rows and pad
//!    their sampled columns with fresh one-time pads.
//! 2. The server joins the padded columns and perturbs every joint row with
//!    the γ-diagonal channel. It never sees a key.
//! 3. The researcher receives the perturbed rows, both pads and the channel
//!    parameters, strips the pads and inverts the channel on the joint type.
//!
//! Roles only talk through [`MessageBus`]. The sampling seed never leaves the
//! two curators.

mod bus;
mod message;
mod roles;

pub use bus::MessageBus;
pub use message::{
    ChannelParams, CipherColumn, MessageKind, Payload, ProtocolMessage, Role, SanitizedData,
};
pub use roles::{
    curator_release, researcher_estimate, server_process, Curator, Researcher, Server,
};

use crate::domain::Database;
use crate::error::{Error, Result};
use crate::pram::PramChannel;
use crate::seed;
use crate::typestats::TypeVector;

/// Independent seeds for every random choice in one protocol run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReleaseSeeds {
    pub sampling: u64,
    pub key_alice: u64,
    pub key_bob: u64,
    pub server: u64,
}

impl ReleaseSeeds {
    pub fn derive(run_seed: u64) -> Self {
        Self {
            sampling: seed::derive(run_seed, &[0]),
            key_alice: seed::derive(run_seed, &[1]),
            key_bob: seed::derive(run_seed, &[2]),
            server: seed::derive(run_seed, &[3]),
        }
    }
}

/// What the researcher ends up with after one run.
#[derive(Clone, Debug)]
pub struct ReleaseOutcome {
    /// Decrypted sanitized rows `(X̂^m, Ŷ^m)`.
    pub sanitized: Database,
    /// Raw estimate `A⁻¹ T_{X̂^m, Ŷ^m}`.
    pub estimate: TypeVector,
}

/// Runs the whole protocol on `db` with `m` samples and channel parameter `gamma`.
pub fn run_release(
    db: &Database,
    m: usize,
    gamma: f64,
    seeds: ReleaseSeeds,
) -> Result<ReleaseOutcome> {
    let alphabet = db.alphabet();
    let mut bus = MessageBus::new();

    let mut alice = Curator::new(Role::Alice, alphabet.x_card(), db.x_col().to_vec())?;
    let mut bob = Curator::new(Role::Bob, alphabet.y_card(), db.y_col().to_vec())?;
    let mut server = Server::new(PramChannel::new(alphabet.clone(), gamma)?);
    let mut researcher = Researcher::new();

    bus.send(Role::Bob, &alice.share_seed(seeds.sampling)?)?;
    while let Some(msg) = bus.recv(Role::Bob)? {
        bob.receive(&msg)?;
    }

    for (curator, key_seed) in [(&alice, seeds.key_alice), (&bob, seeds.key_bob)] {
        let (cipher, key) = curator.release(m, key_seed)?;
        bus.send(Role::Server, &cipher)?;
        bus.send(Role::Researcher, &key)?;
    }

    while let Some(msg) = bus.recv(Role::Server)? {
        server.receive(&msg)?;
    }
    let (sanitized, params) = server.process(seeds.server)?;
    bus.send(Role::Researcher, &sanitized)?;
    bus.send(Role::Researcher, &params)?;

    while let Some(msg) = bus.recv(Role::Researcher)? {
        researcher.receive(&msg)?;
    }
    if !researcher.ready() {
        return Err(Error::Protocol(
            "researcher did not receive every input".into(),
        ));
    }
    Ok(ReleaseOutcome {
        sanitized: researcher.decrypt()?,
        estimate: researcher.estimate()?,
    })
}
